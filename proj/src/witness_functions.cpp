// Function witness construction and partial-automorphism extension.
//
// Valuation structures for a B0-vertex x are enumerated by picking a base
// vertex y, a group element g, and an injection of Cl_base(y) into B0 sending
// y to x whose image induces (in B0) exactly the g-relabelled relational
// content of the closure; the functions are pulled back along the injection.
// Deduplication is by structure equality; the recorded witness-iso is the
// least (anchor, vertex map, group element).

#include "eppa/witness_functions.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

#include "eppa/witness_relational.hpp"

namespace eppa {

namespace {

struct Candidate {
  Vertex anchor;
  std::vector<std::pair<Vertex, Vertex>> iso_pairs;  // carrier -> closure
  size_t group_index;
  bool operator<(const Candidate& o) const {
    return std::tie(anchor, iso_pairs, group_index) <
           std::tie(o.anchor, o.iso_pairs, o.group_index);
  }
};

// Enumerates every injection mu of `order` (pattern vertices, position 0
// pinned to x) into B0 whose image induces exactly the given (already
// g-relabelled) relational content; calls sink(mu).
template <typename Sink>
void enumerate_pattern_images(const Structure& B0,
                              const std::vector<Vertex>& order,
                              const std::vector<std::set<Tuple>>& pattern_rel,
                              Vertex x, Budget& budget, const Sink& sink) {
  std::vector<Vertex> mu(order.size());
  VertexSet used;
  std::map<Vertex, size_t> pos;
  for (size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;

  // All relation tuples over order[0..k] mentioning order[k]: the image must
  // hold in B0 exactly when the relabelled pattern does.
  auto consistent = [&](size_t k) {
    for (size_t r = 0; r < B0.lang.nrel(); ++r) {
      int a = B0.lang.rel_arity[r];
      std::vector<Vertex> avail(order.begin(), order.begin() + (long)k + 1);
      for (const Tuple& t : all_tuples(avail, a)) {
        if (std::find(t.begin(), t.end(), order[k]) == t.end()) continue;
        Tuple img(t.size());
        for (size_t i = 0; i < t.size(); ++i) img[i] = mu[pos.at(t[i])];
        if ((bool)pattern_rel[r].count(t) != (bool)B0.rel[r].count(img)) return false;
      }
    }
    return true;
  };

  std::function<void(size_t)> go = [&](size_t k) {
    if (k == order.size()) {
      sink(mu);
      return;
    }
    for (Vertex w : B0.verts) {
      if (used.count(w)) continue;
      budget.spend("valuation structure search");
      mu[k] = w;
      used.insert(w);
      if (consistent(k)) go(k + 1);
      used.erase(w);
    }
  };

  mu[0] = x;
  used.insert(x);
  if (consistent(0)) go(1);
}

}  // namespace

Vertex FunctionWitness::vertex_id(Vertex x, const Structure& V) const {
  auto it = index.find({x, V});
  if (it == index.end())
    throw input_error("no witness vertex with that owner and valuation structure");
  return it->second;
}

FunctionWitness build_function_witness(const Structure& A, Witness b0,
                                       const Caps& caps) {
  if (A.verts.empty())
    throw input_error("function witness requires a nonempty structure");
  Structure reduct = relational_reduct(A);
  if (!(b0.base == reduct))
    throw input_error("witness bundle is not over the relational reduct of the base");
  CheckResult ok =
      check_morphism(b0.psi, b0.base, b0.witness, MorphKind::embedding, caps);
  if (!ok)
    throw input_error("reduct bundle's generic map is not an embedding: " +
                      ok.violation);

  const Language& L = A.lang;
  Budget budget(caps);

  // Closure patterns of base vertices, relabelled per group element.
  std::vector<Structure> cl;  // per base vertex position
  for (Vertex y : A.verts) {
    VertexSet c = closure(A, {y});
    cl.push_back(induced_substructure(A, c));
  }

  FunctionWitness W;
  W.base = A;
  W.b0 = std::move(b0);
  const Structure& B0 = W.b0.witness;

  // Enumerate valuation structures per owner, deduplicating by structure.
  std::vector<std::map<Structure, Candidate, StructureLess>> found(B0.verts.size());
  for (size_t xp = 0; xp < B0.verts.size(); ++xp) {
    Vertex x = B0.verts[xp];
    for (size_t yp = 0; yp < A.verts.size(); ++yp) {
      Vertex y = A.verts[yp];
      // Pattern: closure of y with y listed first.
      const Structure& pattern = cl[yp];
      std::vector<Vertex> order = pattern.verts;
      order.erase(std::find(order.begin(), order.end(), y));
      order.insert(order.begin(), y);
      for (size_t gi = 0; gi < L.group.size(); ++gi) {
        const SymbolPerm& g = L.group[gi];
        // g-relabelled relational content of the pattern: tuple t is required
        // in the image at index r exactly when t is in the closure at g(r).
        std::vector<std::set<Tuple>> prel(L.nrel());
        for (size_t r = 0; r < L.nrel(); ++r)
          prel[r] = pattern.rel[g.rel_map[r]];
        enumerate_pattern_images(
            B0, order, prel, x, budget, [&](const std::vector<Vertex>& mu) {
              // carrier = image of mu; relations induced from B0, functions
              // pulled back along mu.
              std::vector<Vertex> carrier(mu.begin(), mu.end());
              std::sort(carrier.begin(), carrier.end());
              std::map<Vertex, Vertex> to_pattern;
              for (size_t i = 0; i < mu.size(); ++i) to_pattern[mu[i]] = order[i];
              std::vector<std::set<Tuple>> rel(L.nrel());
              {
                VertexSet cs(carrier.begin(), carrier.end());
                Structure ind = induced_substructure(B0, cs);
                for (size_t r = 0; r < L.nrel(); ++r) rel[r] = ind.rel[r];
              }
              std::map<Vertex, Vertex> from_pattern;
              for (size_t i = 0; i < mu.size(); ++i) from_pattern[order[i]] = mu[i];
              std::vector<std::map<Vertex, std::set<Vertex>>> fun(L.nfun());
              for (size_t f = 0; f < L.nfun(); ++f) {
                for (size_t i = 0; i < mu.size(); ++i) {
                  std::set<Vertex> img;
                  for (Vertex z : pattern.fun_image(g.fun_map[f], order[i]))
                    img.insert(from_pattern.at(z));
                  if (!img.empty()) fun[f][mu[i]] = std::move(img);
                }
              }
              Structure V = make_structure(L, carrier, rel, fun);
              Morphism iso;
              iso.perm = g;
              iso.vmap = to_pattern;
              CheckResult iso_ok =
                  check_morphism(iso, V, pattern, MorphKind::isomorphism, caps);
              if (!iso_ok)
                throw std::logic_error("enumerated valuation structure fails its "
                                       "witness isomorphism: " + iso_ok.violation);
              std::vector<std::pair<Vertex, Vertex>> pairs(iso.vmap.begin(),
                                                           iso.vmap.end());
              Candidate cand{y, std::move(pairs), gi};
              auto [it, fresh] = found[xp].emplace(std::move(V), cand);
              if (!fresh && cand < it->second) it->second = cand;
              budget.spend("valuation structures");
            });
      }
    }
  }

  // Assign dense ids: owners in B0 order, valuation structures in
  // deduplication order.
  Structure B;
  B.lang = L;
  for (size_t xp = 0; xp < B0.verts.size(); ++xp) {
    for (const auto& [V, cand] : found[xp]) {
      Vertex id = (Vertex)W.projection.size();
      if ((long long)id >= caps.max_witness_vertices)
        throw resource_limit_error("function witness exceeds the vertex cap");
      B.verts.push_back(id);
      W.projection.push_back(B0.verts[xp]);
      ValuationStructure vs;
      vs.owner = B0.verts[xp];
      vs.carrier = V;
      vs.anchor = cand.anchor;
      vs.iso.perm = L.group[cand.group_index];
      for (const auto& [u, v] : cand.iso_pairs) vs.iso.vmap[u] = v;
      W.valuation.push_back(std::move(vs));
      W.index[{B0.verts[xp], V}] = id;
    }
  }

  // Relations look only at projections: expand each B0 tuple along the
  // per-owner fibers.
  std::vector<std::vector<Vertex>> fiber;  // B0 vertex position -> witness ids
  fiber.resize(B0.verts.size());
  for (size_t id = 0; id < W.projection.size(); ++id)
    fiber[(size_t)B0.pos(W.projection[id])].push_back((Vertex)id);
  B.rel.resize(L.nrel());
  for (size_t r = 0; r < L.nrel(); ++r) {
    for (const Tuple& t : B0.rel[r]) {
      std::vector<const std::vector<Vertex>*> choices;
      bool empty = false;
      for (Vertex v : t) {
        choices.push_back(&fiber[(size_t)B0.pos(v)]);
        empty |= choices.back()->empty();
      }
      if (empty) continue;
      std::vector<size_t> idx(t.size(), 0);
      for (;;) {
        budget.spend("function witness relation tuples");
        Tuple bt(t.size());
        for (size_t i = 0; i < t.size(); ++i) bt[i] = (*choices[i])[idx[i]];
        B.rel[r].insert(std::move(bt));
        size_t i = t.size();
        while (i > 0 && ++idx[i - 1] == choices[i - 1]->size()) idx[--i] = 0;
        if (i == 0) break;
      }
    }
  }

  // Functions walk inside the valuation structure: the image of (x, V) under
  // F is every (z, Cl_V(z)) with z in F_V(x).
  B.fun.resize(L.nfun());
  for (size_t id = 0; id < W.valuation.size(); ++id) {
    const ValuationStructure& vs = W.valuation[id];
    for (size_t f = 0; f < L.nfun(); ++f) {
      std::set<Vertex> img;
      for (Vertex z : vs.carrier.fun_image(f, vs.owner)) {
        VertexSet zc = closure(vs.carrier, {z});
        Structure sub = induced_substructure(vs.carrier, zc);
        auto it = W.index.find({z, sub});
        if (it == W.index.end())
          throw std::logic_error("closure inside a valuation structure is not "
                                 "itself a valuation structure");
        img.insert(it->second);
      }
      if (!img.empty()) B.fun[f][(Vertex)id] = std::move(img);
    }
  }
  B.finalize();
  W.witness = std::move(B);

  // Generic embedding: x goes to (psi0(x), the renamed closure of x).
  W.psi.perm = identity_perm(L.nrel(), L.nfun());
  for (size_t yp = 0; yp < A.verts.size(); ++yp) {
    Vertex y = A.verts[yp];
    const Structure& c = cl[yp];
    std::vector<Vertex> carrier;
    for (Vertex v : c.verts) carrier.push_back(W.b0.psi.vmap.at(v));
    std::sort(carrier.begin(), carrier.end());
    std::map<Vertex, Vertex> rename;
    for (Vertex v : c.verts) rename[v] = W.b0.psi.vmap.at(v);
    std::vector<std::set<Tuple>> rel(L.nrel());
    for (size_t r = 0; r < L.nrel(); ++r)
      for (const Tuple& t : c.rel[r]) rel[r].insert(map_tuple(rename, t));
    std::vector<std::map<Vertex, std::set<Vertex>>> fun(L.nfun());
    for (size_t f = 0; f < L.nfun(); ++f)
      for (Vertex v : c.verts) {
        std::set<Vertex> img;
        for (Vertex z : c.fun_image(f, v)) img.insert(rename.at(z));
        if (!img.empty()) fun[f][rename.at(v)] = std::move(img);
      }
    Structure Vx = make_structure(L, carrier, rel, fun);
    auto it = W.index.find({W.b0.psi.vmap.at(y), Vx});
    if (it == W.index.end())
      throw std::logic_error("the renamed closure of a base vertex was not "
                             "enumerated as a valuation structure");
    W.psi.vmap[y] = it->second;
  }
  return W;
}

FunctionWitness build_function_witness(const Structure& A, const Caps& caps) {
  return build_function_witness(
      A, as_witness(build_relational_witness(relational_reduct(A), caps)), caps);
}

FunctionExtension extend_function_pa(const FunctionWitness& W, const Morphism& phi,
                                     const Caps& caps) {
  const Structure& B = W.witness;
  const Structure& B0 = W.b0.witness;
  const Language& L = W.base.lang;

  VertexSet image;
  for (const auto& [x, b] : W.psi.vmap) image.insert(b);
  for (const auto& [u, v] : phi.vmap)
    if (!B.has_vertex(u) || !image.count(u) || !B.has_vertex(v) || !image.count(v))
      throw input_error("extension domain must lie in the generic copy");
  CheckResult ok = check_morphism(phi, B, B, MorphKind::partial_automorphism, caps);
  if (!ok)
    throw input_error("not a partial automorphism of the generic copy: " +
                      ok.violation);

  // Project to the reduct witness and extend there.
  Morphism phi0;
  phi0.perm.rel_map = phi.perm.rel_map;
  for (const auto& [u, v] : phi.vmap)
    phi0.vmap[W.projection.at((size_t)u)] = W.projection.at((size_t)v);
  FunctionExtension E;
  E.phihat = W.b0.extend(phi0);

  // theta((x,V)) = (phihat(x), U) with U's carrier moved by phihat, relations
  // induced from B0, and functions pushed forward under phi's symbol perm.
  E.theta.perm = phi.perm;
  const SymbolPerm& g = phi.perm;
  for (size_t id = 0; id < W.valuation.size(); ++id) {
    const ValuationStructure& vs = W.valuation[id];
    std::vector<Vertex> carrier;
    std::map<Vertex, Vertex> moved;
    for (Vertex v : vs.carrier.verts) {
      moved[v] = E.phihat.vmap.at(v);
      carrier.push_back(moved[v]);
    }
    std::sort(carrier.begin(), carrier.end());
    std::vector<std::set<Tuple>> rel(L.nrel());
    {
      VertexSet cs(carrier.begin(), carrier.end());
      Structure ind = induced_substructure(B0, cs);
      for (size_t r = 0; r < L.nrel(); ++r) rel[r] = ind.rel[r];
    }
    std::vector<std::map<Vertex, std::set<Vertex>>> fun(L.nfun());
    for (size_t f = 0; f < L.nfun(); ++f) {
      size_t f2 = (size_t)g.fun_map[f];
      for (Vertex v : vs.carrier.verts) {
        std::set<Vertex> img;
        for (Vertex z : vs.carrier.fun_image(f, v)) img.insert(moved.at(z));
        if (!img.empty()) fun[f2][moved.at(v)] = std::move(img);
      }
    }
    Structure U = make_structure(L, carrier, rel, fun);
    auto it = W.index.find({E.phihat.vmap.at(vs.owner), U});
    if (it == W.index.end())
      throw std::logic_error("extension image is not a valuation structure");
    E.theta.vmap[(Vertex)id] = it->second;
  }
  return E;
}

}  // namespace eppa
