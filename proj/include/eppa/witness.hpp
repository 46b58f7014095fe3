// Uniform handle on a witness: a structure containing a distinguished copy of
// a base structure together with an operator extending partial automorphisms
// of that copy to automorphisms of the whole structure.  Layered
// constructions consume bundles of this shape and produce new ones, so the
// concrete witness types each provide an adapter.
//
// The extension operators packaged here are coherent: extending a composition
// of partial maps yields the composition of the extensions.

#pragma once

#include <functional>
#include <tuple>

#include "eppa/core.hpp"

namespace eppa {

struct Witness {
  Structure base;
  Structure witness;
  Morphism psi;  // embedding base -> witness
  // Maps a partial automorphism of psi(base) to an automorphism of witness
  // extending it; throws input_error on maps that are not of that shape.
  std::function<Morphism(const Morphism&)> extend;
};

// Strict weak order on structures by (vertices, relations, functions);
// language is assumed shared.  Used to key deduplication maps.
struct StructureLess {
  bool operator()(const Structure& a, const Structure& b) const {
    return std::tie(a.verts, a.rel, a.fun) < std::tie(b.verts, b.rel, b.fun);
  }
};

// Relational reduct: drop the function symbols, restrict the group to its
// action on relations (deduplicated).
Language relational_reduct(const Language& L);
Structure relational_reduct(const Structure& S);

struct GraphWitness;
struct RelationalWitness;
struct FunctionWitness;
struct FaithfulWitness;
struct UnwindWitness;

Witness as_witness(GraphWitness W);
Witness as_witness(RelationalWitness W);
Witness as_witness(FunctionWitness W);
Witness as_witness(FaithfulWitness W);
Witness as_witness(UnwindWitness W);

}  // namespace eppa
