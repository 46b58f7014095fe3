// Reduct helpers and bundle adapters for the concrete witness types.

#include "eppa/witness.hpp"

#include <memory>
#include <utility>

#include "eppa/witness_faithful.hpp"
#include "eppa/witness_functions.hpp"
#include "eppa/witness_graph.hpp"
#include "eppa/witness_relational.hpp"
#include "eppa/witness_unwind.hpp"

namespace eppa {

Language relational_reduct(const Language& L) {
  std::vector<SymbolPerm> restricted;
  for (const SymbolPerm& g : L.group) {
    SymbolPerm r;
    r.rel_map = g.rel_map;
    restricted.push_back(std::move(r));
  }
  return make_language(L.rel_names, L.rel_arity, {}, restricted);
}

Structure relational_reduct(const Structure& S) {
  Structure R;
  R.lang = relational_reduct(S.lang);
  R.verts = S.verts;
  R.rel = S.rel;
  R.fun.clear();
  R.finalize();
  return R;
}

Witness as_witness(GraphWitness W) {
  auto p = std::make_shared<GraphWitness>(std::move(W));
  Witness out;
  out.base = p->base;
  out.witness = p->witness;
  out.psi = p->psi;
  out.extend = [p](const Morphism& phi) { return extend_graph_pa(*p, phi).theta; };
  return out;
}

Witness as_witness(RelationalWitness W) {
  auto p = std::make_shared<RelationalWitness>(std::move(W));
  Witness out;
  out.base = p->base;
  out.witness = p->witness;
  out.psi = p->psi;
  out.extend = [p](const Morphism& phi) {
    return extend_relational_pa(*p, phi).theta;
  };
  return out;
}

Witness as_witness(FunctionWitness W) {
  auto p = std::make_shared<FunctionWitness>(std::move(W));
  Witness out;
  out.base = p->base;
  out.witness = p->witness;
  out.psi = p->psi;
  out.extend = [p](const Morphism& phi) {
    return extend_function_pa(*p, phi).theta;
  };
  return out;
}

Witness as_witness(FaithfulWitness W) {
  auto p = std::make_shared<FaithfulWitness>(std::move(W));
  Witness out;
  out.base = p->base;
  out.witness = p->witness;
  out.psi = p->psi;
  out.extend = [p](const Morphism& phi) {
    Morphism proj;
    proj.perm = phi.perm;
    for (const auto& [u, v] : phi.vmap) {
      if (u < 0 || (size_t)u >= p->projection.size() || v < 0 ||
          (size_t)v >= p->projection.size())
        throw input_error("faithful witness extension: unknown witness vertex");
      proj.vmap[p->projection[(size_t)u]] = p->projection[(size_t)v];
    }
    Morphism phihat = p->b0.extend(proj);
    return extend_faithful_pa(*p, phi, phihat).theta;
  };
  return out;
}

Witness as_witness(UnwindWitness W) {
  auto p = std::make_shared<UnwindWitness>(std::move(W));
  Witness out;
  out.base = p->base;
  out.witness = p->witness;
  out.psi = p->psi;
  out.extend = [p](const Morphism& phi) {
    Morphism proj;
    proj.perm = phi.perm;
    for (const auto& [u, v] : phi.vmap) {
      if (u < 0 || (size_t)u >= p->projection.size() || v < 0 ||
          (size_t)v >= p->projection.size())
        throw input_error("unwound witness extension: unknown witness vertex");
      proj.vmap[p->projection[(size_t)u]] = p->projection[(size_t)v];
    }
    Morphism phihat = p->b0.extend(proj);
    return extend_unwound_pa(*p, phi, phihat).theta;
  };
  return out;
}

}  // namespace eppa
