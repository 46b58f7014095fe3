// Witness layer that introduces unary functions.  Starting from a witness B0
// for the relational reduct of the base, each vertex of the new witness pairs
// a B0-vertex x with a "valuation structure": a structure over the full
// language whose carrier sits inside B0, whose relational part is the
// B0-induced one, and which is isomorphic (possibly permuting symbols) to the
// closure of some base vertex y with x playing the role of y.  Relations only
// look at the projections; functions walk inside the valuation structure.

#pragma once

#include <map>
#include <vector>

#include "eppa/core.hpp"
#include "eppa/witness.hpp"

namespace eppa {

struct ValuationStructure {
  Vertex owner = 0;    // vertex of B0
  Structure carrier;   // V: full-language structure on a subset of B0
  Vertex anchor = 0;   // y in the base witnessing the isomorphism
  Morphism iso;        // (group element, vertex map): carrier -> Cl_base(y),
                       // canonical representative (least anchor, then map,
                       // then group element)
};

struct OwnerStructureLess {
  bool operator()(const std::pair<Vertex, Structure>& a,
                  const std::pair<Vertex, Structure>& b) const {
    if (a.first != b.first) return a.first < b.first;
    return StructureLess{}(a.second, b.second);
  }
};

struct FunctionWitness {
  Structure base;  // A over the full language (unary function symbols)
  Witness b0;      // witness bundle for the relational reduct of A
  Structure witness;
  Morphism psi;  // x -> (x, closure of x), identity symbol perm
  std::vector<Vertex> projection;             // witness id -> B0 vertex
  std::vector<ValuationStructure> valuation;  // witness id -> its (x, V)
  std::map<std::pair<Vertex, Structure>, Vertex, OwnerStructureLess> index;

  // Witness id of the pair (x, V); throws input_error when no such vertex.
  Vertex vertex_id(Vertex x, const Structure& V) const;
};

// Builds the function witness on top of an explicit reduct witness bundle.
// b0.base must equal the relational reduct of A.
FunctionWitness build_function_witness(const Structure& A, Witness b0,
                                       const Caps& caps = default_caps());

// Convenience overload: builds the reduct witness with
// build_relational_witness first.
FunctionWitness build_function_witness(const Structure& A,
                                       const Caps& caps = default_caps());

struct FunctionExtension {
  Morphism theta;   // automorphism of the witness
  Morphism phihat;  // the reduct witness's automorphism it rides on
};

// Extends a partial automorphism of psi(A) (closed domain and range inside
// the generic copy; any group element) to an automorphism of the witness.
// Coherent whenever the reduct bundle's extensions are.
FunctionExtension extend_function_pa(const FunctionWitness& W,
                                     const Morphism& phi,
                                     const Caps& caps = default_caps());

}  // namespace eppa
