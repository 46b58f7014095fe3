// Witness layer that makes a witness irreducible-structure faithful: in the
// result, every irreducible substructure can be carried into the
// distinguished copy of the base by an automorphism.
//
// Starting from a witness B0 for the base A, call an irreducible closed
// substructure I of B0 "bad" when no automorphism of B0 maps it into the
// copy of A.  A vertex of the new witness pairs a B0-vertex x with a
// "valuation structure": one valuation per member y of the function closure
// of x, each valuation assigning to every bad irreducible through y a value
// in {1..|I|-1}, with the whole family pairwise generic — two valuations
// sharing a bad irreducible must disagree on it.  Relation tuples survive
// only when their projections form a tuple of B0 and the valuations involved
// are generic.  A copy of a bad irreducible I would need |I| pairwise
// distinct values drawn from {1..|I|-1}, so none survives; everything else
// extends and certifies as before.

#pragma once

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "eppa/core.hpp"
#include "eppa/witness.hpp"

namespace eppa {

// Which irreducible substructures of B0 cannot be moved into the base copy.
struct BadIndex {
  // Vertex sets of the bad irreducibles, in deterministic order (size, then
  // lexicographic — the order enumerate_irreducible_substructures yields).
  std::vector<VertexSet> bads;
  // U(x): ascending indices into `bads` of the bad irreducibles through x.
  // Every vertex of B0 has an entry (possibly empty).
  std::map<Vertex, std::vector<int>> containing;
  // Every irreducible vertex set tested, with the automorphism into the base
  // image when one exists; nullopt records badness (the search is exhaustive,
  // so nullopt is a proof of nonexistence).
  std::map<VertexSet, std::optional<Morphism>> searched;
};

// Tests every closed irreducible substructure of B0 against `image` (the
// vertex set of the distinguished copy of the base).  Exponential in |B0|.
BadIndex enumerate_bad_irreducibles(const Structure& B0, const VertexSet& image,
                                    const Caps& caps = default_caps());

// A valuation: one value per bad irreducible through `owner`, stored
// parallel to BadIndex::containing[owner].  vals[i] is in {1..|I_i|-1}.
struct FaithfulValuation {
  Vertex owner = 0;
  std::vector<int> vals;
  bool operator==(const FaithfulValuation&) const = default;
  auto operator<=>(const FaithfulValuation&) const = default;
};

// A set of valuations.  Generic iff every two members are generic: equal, or
// with distinct owners and disagreeing on every shared bad irreducible.  A
// valuation structure is represented by the generic set of its valuations
// (one per closure member); the structure content is canonical, so the set
// determines it.
using GenericSet = std::set<FaithfulValuation>;

bool generic_pair(const BadIndex& bads, const FaithfulValuation& a,
                  const FaithfulValuation& b);
bool is_generic(const BadIndex& bads, const GenericSet& S);

struct FaithfulWitness {
  Structure base;  // A
  Witness b0;      // witness bundle for A (base == A, with psi: A -> B0)
  Structure witness;
  Morphism psi;  // A -> witness, identity symbol permutation
  BadIndex bads;
  std::vector<Vertex> projection;    // witness id -> B0 vertex (the owner)
  std::vector<GenericSet> valuation;  // witness id -> its valuation structure
  std::map<std::pair<Vertex, GenericSet>, Vertex> index;

  // Witness id of the pair (x, V); throws input_error when no such vertex.
  Vertex vertex_id(Vertex x, const GenericSet& V) const;
  // The owner's own valuation inside valuation[id].
  const FaithfulValuation& chi(Vertex id) const;
  // Union-genericity of the valuation structures of two witness vertices.
  bool generic_vertices(Vertex id1, Vertex id2) const;
};

// Builds the faithful witness on top of a witness bundle for A.  b0.base
// must equal A and b0.psi must embed A into b0.witness.
FaithfulWitness build_faithful_witness(const Structure& A, Witness b0,
                                       const Caps& caps = default_caps());

// The per-bad-irreducible bookkeeping of one extension: partial value
// permutations read off the map, their order-preserving completions, and the
// assembled permutation of all valuations in use.
struct LocalFlip {
  std::map<int, std::map<int, int>> tau;    // bad index -> partial value map
  std::map<int, std::map<int, int>> theta;  // bad index -> its order-preserving extension
  std::map<FaithfulValuation, FaithfulValuation> qhat;  // permutation of every valuation in use
};

struct FaithfulExtension {
  Morphism theta;  // automorphism of the witness extending phi
  Morphism phihat;  // the B0 automorphism it rides on (as passed in)
  LocalFlip flips;
};

// Extends a partial automorphism phi of the witness to an automorphism,
// given an automorphism phihat of B0 that extends the projection of phi and
// uses the same symbol permutation.  phi's domain and range may sit anywhere
// in the witness but must be generic (precondition_error otherwise); an
// unsuitable phihat is an input_error.  Coherent whenever phihat is chosen
// coherently (order-preserving completion keeps composition).
FaithfulExtension extend_faithful_pa(const FaithfulWitness& W, const Morphism& phi,
                                     const Morphism& phihat,
                                     const Caps& caps = default_caps());

// One certificate per irreducible substructure of the witness: the
// substructure is generic, its projection is not bad (an automorphism of B0
// moves it into the base image), and the extension lemma turns that into an
// automorphism of the witness carrying it into psi(A).
struct FaithfulnessCertificate {
  VertexSet d;          // irreducible substructure of the witness
  bool generic = false;
  VertexSet projected;  // its projection to B0
  Morphism phihat;      // automorphism of B0: phihat(projected) ⊆ base image
  Morphism theta;       // automorphism of the witness: theta(d) ⊆ psi(A)
  bool ok = false;
  std::string note;  // first failed step when !ok
};

struct FaithfulnessReport {
  bool ok = true;
  std::vector<FaithfulnessCertificate> certificates;
};

// Certifies irreducible-structure faithfulness constructively on every
// irreducible substructure of the witness.  Failures are reported, not
// thrown.  Exponential in |witness|.
FaithfulnessReport certify_faithfulness(const FaithfulWitness& W,
                                        const Caps& caps = default_caps());

}  // namespace eppa
