// Tree amalgamations (replay, verification, decomposition, completion),
// amalgamation through a witness, and the layered pipeline over an
// auxiliary complete edge relation.  See tree_pipeline.hpp for contracts.

#include "eppa/tree_pipeline.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <utility>

#include "eppa/witness_faithful.hpp"
#include "eppa/witness_unwind.hpp"

namespace eppa {

namespace {

std::string vertex_set_text(const VertexSet& X) {
  std::string out = "{";
  for (Vertex v : X) {
    if (out.size() > 1) out += ",";
    out += std::to_string(v);
  }
  return out + "}";
}

// BFS over the copy tree from copy 0.  Fills `order` (copy indices in visit
// order) and `parent_edge` (edge index used to reach each copy; -1 for the
// root).  Returns false when the edges do not form a tree on the copies.
bool copy_tree_order(size_t ncopies, const std::vector<TreeCopyEdge>& edges,
                     std::vector<int>& order, std::vector<int>& parent_edge) {
  if (ncopies == 0 || edges.size() != ncopies - 1) return false;
  std::vector<std::vector<int>> nbr(ncopies);
  for (size_t e = 0; e < edges.size(); ++e) {
    const TreeCopyEdge& te = edges[e];
    if (te.a < 0 || (size_t)te.a >= ncopies || te.b < 0 || (size_t)te.b >= ncopies ||
        te.a == te.b)
      return false;
    nbr[(size_t)te.a].push_back((int)e);
    nbr[(size_t)te.b].push_back((int)e);
  }
  order.assign(1, 0);
  parent_edge.assign(ncopies, -2);
  parent_edge[0] = -1;
  for (size_t q = 0; q < order.size(); ++q) {
    int c = order[q];
    for (int e : nbr[(size_t)c]) {
      int o = edges[(size_t)e].a == c ? edges[(size_t)e].b : edges[(size_t)e].a;
      if (parent_edge[(size_t)o] != -2) continue;
      parent_edge[(size_t)o] = e;
      order.push_back(o);
    }
  }
  return order.size() == ncopies;  // n-1 edges + connected == tree
}

}  // namespace

// ---------------------------------------------------------------------------
// Replay and verification
// ---------------------------------------------------------------------------

Structure replay_tree_amalgamation(const TreeAmalgamation& T) {
  const Language& L = T.pattern.lang;
  Structure R;
  R.lang = L;
  R.rel.resize(L.nrel());
  R.fun.resize(L.nfun());
  VertexSet verts;
  for (const Morphism& c : T.copies) {
    if (c.perm.rel_map.size() != L.nrel() || c.perm.fun_map.size() != L.nfun())
      throw input_error("replay_tree_amalgamation: copy symbol permutation has the wrong shape");
    for (Vertex v : T.pattern.verts) verts.insert(c(v));
    for (size_t r = 0; r < L.nrel(); ++r) {
      auto& target = R.rel[(size_t)c.perm.rel_map[r]];
      for (const Tuple& t : T.pattern.rel[r]) target.insert(map_tuple(c.vmap, t));
    }
    for (size_t f = 0; f < L.nfun(); ++f) {
      auto& target = R.fun[(size_t)c.perm.fun_map[f]];
      for (const auto& [v, img] : T.pattern.fun[f]) {
        std::set<Vertex>& out = target[c(v)];
        for (Vertex z : img) out.insert(c(z));
      }
    }
  }
  R.verts.assign(verts.begin(), verts.end());
  R.finalize();
  return R;
}

CheckResult verify_tree_amalgamation(const TreeAmalgamation& T, const Caps& caps) {
  auto fail = [](std::string why) { return CheckResult{false, std::move(why)}; };
  if (T.copies.empty()) return fail("trace has no copies");
  if (!(T.pattern.lang == T.result.lang))
    return fail("pattern and result are over different languages");
  if (T.pattern.verts.empty()) return fail("pattern has no vertices");

  const size_t n = T.copies.size();
  const VertexSet pattern_verts(T.pattern.verts.begin(), T.pattern.verts.end());

  std::vector<VertexSet> image(n);
  for (size_t i = 0; i < n; ++i) {
    if (T.copies[i].domain() != pattern_verts)
      return fail("copy " + std::to_string(i) + " is not defined on the whole pattern");
    CheckResult c = check_morphism(T.copies[i], T.pattern, T.result, MorphKind::embedding, caps);
    if (!c)
      return fail("copy " + std::to_string(i) + " is not an embedding: " + c.violation);
    image[i] = T.copies[i].range();
  }

  std::vector<int> order, parent_edge;
  if (!copy_tree_order(n, T.edges, order, parent_edge))
    return fail("trace edges do not form a tree on the copies");

  for (size_t e = 0; e < T.edges.size(); ++e) {
    const TreeCopyEdge& te = T.edges[e];
    const VertexSet& ia = image[(size_t)te.a];
    const VertexSet& ib = image[(size_t)te.b];
    VertexSet inter;
    std::set_intersection(ia.begin(), ia.end(), ib.begin(), ib.end(),
                          std::inserter(inter, inter.end()));
    if (inter != te.overlap)
      return fail("edge " + std::to_string(e) +
                  ": recorded overlap is not the intersection of its copy images");
    if (!te.overlap.empty()) {
      if (closure(T.result, te.overlap) != te.overlap)
        return fail("edge " + std::to_string(e) + ": overlap is not function-closed");
      if (!is_irreducible(induced_substructure(T.result, te.overlap), caps))
        return fail("edge " + std::to_string(e) + ": overlap is reducible");
    }
  }

  // Attaching copies in tree order must meet the earlier ones exactly in the
  // recorded overlap (so every attachment is a free amalgamation).
  {
    VertexSet seen = image[0];
    for (size_t q = 1; q < order.size(); ++q) {
      size_t c = (size_t)order[q];
      const TreeCopyEdge& te = T.edges[(size_t)parent_edge[c]];
      VertexSet inter;
      for (Vertex v : image[c])
        if (seen.count(v)) inter.insert(v);
      if (inter != te.overlap)
        return fail("copy " + std::to_string(c) +
                    " meets earlier copies outside its tree overlap");
      seen.insert(image[c].begin(), image[c].end());
    }
    if (seen != VertexSet(T.result.verts.begin(), T.result.verts.end()))
      return fail("copy images do not cover the result");
  }

  auto inside_one_copy = [&](const auto& members) {
    for (size_t i = 0; i < n; ++i) {
      bool all_in = true;
      for (Vertex v : members)
        if (!image[i].count(v)) {
          all_in = false;
          break;
        }
      if (all_in) return true;
    }
    return false;
  };

  for (size_t r = 0; r < T.result.lang.nrel(); ++r)
    for (const Tuple& t : T.result.rel[r])
      if (!inside_one_copy(t))
        return fail("a tuple of relation " + T.result.lang.rel_names[r] +
                    " lies in no single copy");
  for (size_t f = 0; f < T.result.lang.nfun(); ++f)
    for (const auto& [v, img] : T.result.fun[f])
      for (Vertex z : img)
        if (!inside_one_copy(std::vector<Vertex>{v, z}))
          return fail("a function edge of " + T.result.lang.fun_names[f] +
                      " lies in no single copy");

  for (const VertexSet& I : enumerate_irreducible_substructures(T.result, caps))
    if (!inside_one_copy(I))
      return fail("irreducible substructure " + vertex_set_text(I) +
                  " lies in no single copy");

  Structure replay = replay_tree_amalgamation(T);
  Structure sorted = T.result;
  std::sort(sorted.verts.begin(), sorted.verts.end());
  sorted.finalize();
  if (!(replay == sorted))
    return fail("replaying the trace does not reproduce the result");

  return {true, ""};
}

// ---------------------------------------------------------------------------
// Embedding search
// ---------------------------------------------------------------------------

std::optional<Morphism> find_embedding(const Structure& S, const Structure& T,
                                       const Caps& caps) {
  if (!(S.lang == T.lang))
    throw input_error("find_embedding: structures are over different languages");
  if (S.size() > T.size()) return std::nullopt;

  // For each vertex, the relation tuples that become fully assigned when it
  // is (keyed by the tuple member latest in carrier order).
  std::map<Vertex, std::vector<std::pair<int, const Tuple*>>> completed_at;
  for (size_t r = 0; r < S.lang.nrel(); ++r)
    for (const Tuple& t : S.rel[r]) {
      Vertex last = t[0];
      for (Vertex v : t)
        if (S.pos(v) > S.pos(last)) last = v;
      completed_at[last].push_back({(int)r, &t});
    }

  Budget budget(caps);
  std::map<Vertex, Vertex> f;
  std::set<Vertex> used;

  for (const SymbolPerm& g : S.lang.group) {
    std::function<std::optional<Morphism>(size_t)> go =
        [&](size_t k) -> std::optional<Morphism> {
      if (k == S.size()) {
        Morphism m;
        m.perm = g;
        m.vmap = f;
        if (check_morphism(m, S, T, MorphKind::embedding, caps)) return m;
        return std::nullopt;
      }
      Vertex v = S.verts[k];
      for (Vertex w : T.verts) {
        budget.spend("embedding search");
        if (used.count(w)) continue;
        bool ok = true;
        // An embedding carries function images exactly, so sizes must match.
        for (size_t fi = 0; fi < S.lang.nfun() && ok; ++fi)
          if (S.fun_image((int)fi, v).size() !=
              T.fun_image(g.fun_map[fi], w).size())
            ok = false;
        if (!ok) continue;
        f[v] = w;
        used.insert(w);
        auto it = completed_at.find(v);
        if (it != completed_at.end())
          for (const auto& [r, t] : it->second)
            if (!T.rel[(size_t)g.rel_map[(size_t)r]].count(map_tuple(f, *t))) {
              ok = false;
              break;
            }
        if (ok)
          if (auto res = go(k + 1)) return res;
        f.erase(v);
        used.erase(w);
      }
      return std::nullopt;
    };
    if (auto res = go(0)) return res;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Decomposition
// ---------------------------------------------------------------------------

namespace {

// Connected components of `rest` under the adjacency `adj` (which may
// mention vertices outside `rest`; they are ignored).  First component
// contains the smallest member of `rest`.
std::vector<VertexSet> components_of(const std::map<Vertex, VertexSet>& adj,
                                     const VertexSet& rest) {
  std::vector<VertexSet> comps;
  VertexSet todo = rest;
  while (!todo.empty()) {
    Vertex s = *todo.begin();
    todo.erase(s);
    VertexSet comp{s};
    std::deque<Vertex> queue{s};
    while (!queue.empty()) {
      Vertex u = queue.front();
      queue.pop_front();
      auto it = adj.find(u);
      if (it == adj.end()) continue;
      for (Vertex w : it->second) {
        if (!todo.count(w)) continue;
        todo.erase(w);
        comp.insert(w);
        queue.push_back(w);
      }
    }
    comps.push_back(std::move(comp));
  }
  return comps;
}

// Smallest (size, then lexicographic) function-closed vertex cut of P whose
// induced substructure is irreducible; the empty set when P is disconnected;
// nullopt when P has no such cut.  Exhaustive over subsets.
std::optional<VertexSet> find_minimal_closed_cut(const Structure& P, int e_rel,
                                                 const Caps& caps, Budget& budget) {
  const size_t n = P.size();
  if ((long long)n > caps.max_subset_bits)
    throw resource_limit_error(
        "decompose_tree_amalgamation: piece too large for the exhaustive cut search");
  std::map<Vertex, VertexSet> adj = relation_adjacency(P, e_rel);
  VertexSet all(P.verts.begin(), P.verts.end());
  if (components_of(adj, all).size() >= 2) return VertexSet{};

  std::vector<Vertex> vs(P.verts);
  std::sort(vs.begin(), vs.end());
  std::vector<VertexSet> cuts;
  for (std::uint64_t mask = 1; mask + 1 < (std::uint64_t(1) << n); ++mask) {
    budget.spend("closed cut enumeration");
    VertexSet X;
    for (size_t i = 0; i < n; ++i)
      if (mask >> i & 1) X.insert(vs[i]);
    if (closure(P, X) != X) continue;
    VertexSet rest;
    for (Vertex v : vs)
      if (!X.count(v)) rest.insert(v);
    if (components_of(adj, rest).size() < 2) continue;
    cuts.push_back(std::move(X));
  }

  std::vector<VertexSet> minimal;
  for (const VertexSet& c : cuts) {
    bool is_min = true;
    for (const VertexSet& d : cuts) {
      if (d.size() >= c.size()) continue;
      if (std::includes(c.begin(), c.end(), d.begin(), d.end())) {
        is_min = false;
        break;
      }
    }
    if (is_min) minimal.push_back(c);
  }
  std::sort(minimal.begin(), minimal.end(), [](const VertexSet& a, const VertexSet& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
  });
  for (const VertexSet& c : minimal)
    if (is_irreducible(induced_substructure(P, c), caps)) return c;
  return std::nullopt;
}

struct PieceTrace {
  TreeAmalgamation tree;
  Morphism inclusion;  // piece -> tree.result, identity symbol permutation
};

// Recursive decomposition of one function-closed piece.  Preconditions
// (checked by the caller on the whole structure): the edge relation is
// chordal and every closed irreducible substructure embeds into A; under
// them every split below is a free amalgamation and every leaf embeds, so
// violations are logic errors, not input errors.
PieceTrace decompose_piece(const Structure& P, const Structure& A, int e_rel,
                           const Caps& caps, Budget& budget) {
  const SymbolPerm id = identity_perm(A.lang.nrel(), A.lang.nfun());

  if (is_irreducible(P, caps)) {
    std::optional<Morphism> e = find_embedding(P, A, caps);
    if (!e)
      throw std::logic_error(
          "decompose_tree_amalgamation: an irreducible piece does not embed into "
          "the pattern although the preconditions held");
    PieceTrace out;
    SymbolPerm ginv = inverse(e->perm);
    out.tree.pattern = A;
    // Relabel the pattern copy so the inclusion keeps the identity symbol
    // permutation (free amalgamation glues with identity permutations only).
    out.tree.result = apply_relabelling(ginv, A);
    Morphism copy0;
    copy0.perm = ginv;
    for (Vertex v : A.verts) copy0.vmap[v] = v;
    out.tree.copies.push_back(std::move(copy0));
    out.inclusion.perm = id;
    out.inclusion.vmap = e->vmap;
    return out;
  }

  std::optional<VertexSet> cut = find_minimal_closed_cut(P, e_rel, caps, budget);
  if (!cut)
    throw std::logic_error(
        "decompose_tree_amalgamation: a reducible piece admits no irreducible "
        "closed cut although the preconditions held");
  const VertexSet& C = *cut;

  std::map<Vertex, VertexSet> adj = relation_adjacency(P, e_rel);
  VertexSet rest;
  for (Vertex v : P.verts)
    if (!C.count(v)) rest.insert(v);
  std::vector<VertexSet> comps = components_of(adj, rest);

  VertexSet p1 = comps[0];
  p1.insert(C.begin(), C.end());
  VertexSet p2 = C;
  for (size_t i = 1; i < comps.size(); ++i) p2.insert(comps[i].begin(), comps[i].end());

  Structure P1 = induced_substructure(P, p1);
  Structure P2 = induced_substructure(P, p2);
  PieceTrace T1 = decompose_piece(P1, A, e_rel, caps, budget);
  PieceTrace T2 = decompose_piece(P2, A, e_rel, caps, budget);

  Structure D = induced_substructure(P, C);
  Morphism r1, r2;
  r1.perm = id;
  r2.perm = id;
  for (Vertex c : C) {
    r1.vmap[c] = T1.inclusion(c);
    r2.vmap[c] = T2.inclusion(c);
  }
  Amalgam am = free_amalgamation(T1.tree.result, T2.tree.result, D, r1, r2);

  PieceTrace out;
  out.tree.pattern = A;
  out.tree.result = am.C;
  for (const Morphism& c : T1.tree.copies) out.tree.copies.push_back(compose(am.beta1, c));
  for (const Morphism& c : T2.tree.copies) out.tree.copies.push_back(compose(am.beta2, c));
  const int shift = (int)T1.tree.copies.size();
  for (const TreeCopyEdge& e : T1.tree.edges) {
    TreeCopyEdge ne;
    ne.a = e.a;
    ne.b = e.b;
    for (Vertex v : e.overlap) ne.overlap.insert(am.beta1(v));
    out.tree.edges.push_back(std::move(ne));
  }
  for (const TreeCopyEdge& e : T2.tree.edges) {
    TreeCopyEdge ne;
    ne.a = e.a + shift;
    ne.b = e.b + shift;
    for (Vertex v : e.overlap) ne.overlap.insert(am.beta2(v));
    out.tree.edges.push_back(std::move(ne));
  }

  // Bridge the two side traces over the cut: each side holds the cut's image
  // inside a single copy (the cut is irreducible).
  VertexSet ov1, ov2;
  for (Vertex c : C) {
    ov1.insert(r1(c));
    ov2.insert(r2(c));
  }
  auto find_host = [](const std::vector<Morphism>& copies, const VertexSet& ov) {
    for (size_t i = 0; i < copies.size(); ++i) {
      VertexSet img = copies[i].range();
      if (std::includes(img.begin(), img.end(), ov.begin(), ov.end())) return (int)i;
    }
    return -1;
  };
  int h1 = find_host(T1.tree.copies, ov1);
  int h2 = find_host(T2.tree.copies, ov2);
  if (h1 < 0 || h2 < 0)
    throw std::logic_error(
        "decompose_tree_amalgamation: a cut image lies in no single copy of a side trace");
  TreeCopyEdge bridge;
  bridge.a = h1;
  bridge.b = h2 + shift;
  for (Vertex v : ov1) bridge.overlap.insert(am.beta1(v));
  out.tree.edges.push_back(std::move(bridge));

  out.inclusion.perm = id;
  for (Vertex v : P1.verts) out.inclusion.vmap[v] = am.beta1(T1.inclusion(v));
  for (Vertex v : P2.verts) out.inclusion.vmap[v] = am.beta2(T2.inclusion(v));
  return out;
}

}  // namespace

TreeDecomposition decompose_tree_amalgamation(const Structure& B, const Structure& A,
                                              int e_rel, const Caps& caps) {
  if (!(B.lang == A.lang))
    throw input_error("decompose_tree_amalgamation: structures are over different languages");
  if (B.verts.empty())
    throw input_error("decompose_tree_amalgamation: structure has no vertices");
  if (A.verts.empty())
    throw input_error("decompose_tree_amalgamation: pattern has no vertices");
  e_rel = resolve_edge_relation(A, B, e_rel, "decompose_tree_amalgamation");

  TreeDecomposition out;

  std::map<Vertex, VertexSet> adj = relation_adjacency(B, e_rel);
  if (auto hole = find_induced_long_cycle(adj)) {
    out.note = "the edge relation has an induced cycle of length >= 4";
    out.cycle = std::move(hole);
    return out;
  }

  for (const VertexSet& I : enumerate_irreducible_substructures(B, caps))
    if (!find_embedding(induced_substructure(B, I), A, caps)) {
      out.note = "irreducible substructure " + vertex_set_text(I) +
                 " does not embed into the pattern";
      return out;
    }

  Budget budget(caps);
  PieceTrace t = decompose_piece(B, A, e_rel, caps, budget);
  out.tree = std::move(t.tree);
  out.inclusion = std::move(t.inclusion);

  CheckResult inc =
      check_morphism(out.inclusion, B, out.tree.result, MorphKind::embedding, caps);
  if (!inc)
    throw std::logic_error(
        "decompose_tree_amalgamation: assembled inclusion is not an embedding: " +
        inc.violation);
  out.ok = true;
  return out;
}

// ---------------------------------------------------------------------------
// Amalgamation through a witness
// ---------------------------------------------------------------------------

EppaAmalgam amalgamate_via_eppa(const Structure& B1, const Structure& B2,
                                const Structure& A, const Morphism& alpha1,
                                const Morphism& alpha2,
                                const std::function<Witness(const Structure&)>& provider,
                                const Caps& caps) {
  if (!(B1.lang == B2.lang) || !(B1.lang == A.lang))
    throw input_error("amalgamate_via_eppa: structures are over different languages");
  const VertexSet averts(A.verts.begin(), A.verts.end());
  if (alpha1.domain() != averts || alpha2.domain() != averts)
    throw input_error("amalgamate_via_eppa: the maps from the shared part must be total");
  {
    CheckResult c1 = check_morphism(alpha1, A, B1, MorphKind::embedding, caps);
    if (!c1) throw input_error("amalgamate_via_eppa: alpha1 is not an embedding: " + c1.violation);
    CheckResult c2 = check_morphism(alpha2, A, B2, MorphKind::embedding, caps);
    if (!c2) throw input_error("amalgamate_via_eppa: alpha2 is not an embedding: " + c2.violation);
  }

  EppaAmalgam out;
  Structure empty = make_structure(A.lang, {});
  Morphism none;
  none.perm = identity_perm(A.lang.nrel(), A.lang.nfun());
  Amalgam du = free_amalgamation(B1, B2, empty, none, none);
  out.joint = du.C;
  out.j1 = du.beta1;
  out.j2 = du.beta2;

  out.witness = provider(out.joint);
  if (!(out.witness.base == out.joint))
    throw input_error("amalgamate_via_eppa: the provider returned a witness for a different base");
  {
    CheckResult c = check_morphism(out.witness.psi, out.joint, out.witness.witness,
                                   MorphKind::embedding, caps);
    if (!c)
      throw input_error("amalgamate_via_eppa: the provider's distinguished copy is not an embedding: " +
                        c.violation);
  }

  Morphism e1 = compose(out.witness.psi, compose(out.j1, alpha1));
  Morphism e2 = compose(out.witness.psi, compose(out.j2, alpha2));
  Morphism phi;
  phi.perm = compose(e2.perm, inverse(e1.perm));
  for (Vertex a : A.verts) phi.vmap[e1(a)] = e2(a);
  {
    CheckResult c = check_morphism(phi, out.witness.witness, out.witness.witness,
                                   MorphKind::partial_automorphism, caps);
    if (!c)
      throw input_error(
          "amalgamate_via_eppa: the two copies of the shared part do not match "
          "inside the witness: " + c.violation);
  }
  Morphism theta = out.witness.extend(phi);

  out.beta1 = compose(theta, compose(out.witness.psi, out.j1));
  out.beta2 = compose(out.witness.psi, out.j2);
  {
    CheckResult c1 = check_morphism(out.beta1, B1, out.witness.witness, MorphKind::embedding, caps);
    if (!c1)
      throw std::logic_error("amalgamate_via_eppa: extension did not embed the first side: " +
                             c1.violation);
    CheckResult c2 = check_morphism(out.beta2, B2, out.witness.witness, MorphKind::embedding, caps);
    if (!c2)
      throw std::logic_error("amalgamate_via_eppa: extension did not embed the second side: " +
                             c2.violation);
    if (!(compose(out.beta1, alpha1) == compose(out.beta2, alpha2)))
      throw std::logic_error("amalgamate_via_eppa: the amalgamation square does not commute");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Completion along the trace
// ---------------------------------------------------------------------------

TreeCompletion completion_of_tree_amalgamation(const TreeAmalgamation& T,
                                               const Amalgamator& oracle,
                                               const Caps& caps) {
  if (T.copies.empty())
    throw input_error("completion_of_tree_amalgamation: trace has no copies");
  const size_t n = T.copies.size();
  for (size_t i = 0; i < n; ++i) {
    CheckResult c = check_morphism(T.copies[i], T.pattern, T.result, MorphKind::embedding, caps);
    if (!c)
      throw input_error("completion_of_tree_amalgamation: copy " + std::to_string(i) +
                        " is not an embedding: " + c.violation);
  }
  std::vector<int> order, parent_edge;
  if (!copy_tree_order(n, T.edges, order, parent_edge))
    throw input_error("completion_of_tree_amalgamation: trace edges do not form a tree");

  Structure E = T.pattern;
  Morphism e;  // chart from the covered part of T.result into E
  e.perm = inverse(T.copies[0].perm);
  for (Vertex v : T.pattern.verts) e.vmap[T.copies[0](v)] = v;

  for (size_t q = 1; q < order.size(); ++q) {
    size_t c = (size_t)order[q];
    const std::string stage = std::to_string(q);
    const TreeCopyEdge& te = T.edges[(size_t)parent_edge[c]];
    Structure D = induced_substructure(T.result, te.overlap);
    Morphism d1;
    d1.perm = e.perm;
    for (Vertex v : te.overlap) {
      if (!e.defined_on(v))
        throw input_error("completion_of_tree_amalgamation: stage " + stage +
                          ": overlap vertex not covered by earlier copies");
      d1.vmap[v] = e(v);
    }
    Morphism inv_c = inverse(T.copies[c]);
    Morphism d2;
    d2.perm = inv_c.perm;
    for (Vertex v : te.overlap) d2.vmap[v] = inv_c(v);

    AmalgamTriple am;
    try {
      am = oracle(E, T.pattern, D, d1, d2);
    } catch (const resource_limit_error&) {
      throw;
    } catch (const std::exception& ex) {
      throw input_error("completion_of_tree_amalgamation: the amalgamation oracle failed at stage " +
                        stage + ": " + ex.what());
    }
    CheckResult c1 = check_morphism(am.beta1, E, am.c, MorphKind::embedding, caps);
    if (!c1)
      throw input_error("completion_of_tree_amalgamation: stage " + stage +
                        ": the oracle's first side is not an embedding: " + c1.violation);
    CheckResult c2 = check_morphism(am.beta2, T.pattern, am.c, MorphKind::embedding, caps);
    if (!c2)
      throw input_error("completion_of_tree_amalgamation: stage " + stage +
                        ": the oracle's second side is not an embedding: " + c2.violation);
    if (!(compose(am.beta1, d1) == compose(am.beta2, d2)))
      throw input_error("completion_of_tree_amalgamation: stage " + stage +
                        ": the oracle's amalgamation square does not commute");

    Morphism enew;
    enew.perm = compose(am.beta1.perm, e.perm);
    for (const auto& [u, v] : e.vmap) enew.vmap[u] = am.beta1(v);
    for (Vertex v : T.pattern.verts) {
      Vertex u = T.copies[c](v);
      Vertex img = am.beta2(v);
      auto it = enew.vmap.find(u);
      if (it != enew.vmap.end() && it->second != img)
        throw std::logic_error(
            "completion_of_tree_amalgamation: charts disagree on an overlap vertex");
      enew.vmap[u] = img;
    }
    e = std::move(enew);
    E = std::move(am.c);
  }

  CheckResult he = check_morphism(e, T.result, E, MorphKind::hom_embedding, caps);
  if (!he)
    throw input_error(
        "completion_of_tree_amalgamation: the assembled map is not a homomorphism-embedding: " +
        he.violation);
  return {std::move(E), std::move(e)};
}

// ---------------------------------------------------------------------------
// The auxiliary edge relation
// ---------------------------------------------------------------------------

Language add_edge_relation(const Language& L) {
  for (const std::string& n : L.rel_names)
    if (n == kEdgeSymbol)
      throw input_error(std::string("add_edge_relation: relation name ") + kEdgeSymbol +
                        " is already taken");
  for (const std::string& n : L.fun_names)
    if (n == kEdgeSymbol)
      throw input_error(std::string("add_edge_relation: name ") + kEdgeSymbol +
                        " is already taken by a function");
  std::vector<std::string> rn = L.rel_names;
  rn.push_back(kEdgeSymbol);
  std::vector<int> ra = L.rel_arity;
  ra.push_back(2);
  std::vector<SymbolPerm> group;
  for (const SymbolPerm& g : L.group) {
    SymbolPerm h = g;
    h.rel_map.push_back((int)L.nrel());
    group.push_back(std::move(h));
  }
  return make_language(std::move(rn), std::move(ra), L.fun_names, std::move(group));
}

Structure with_complete_edges(const Structure& S, const Language& Lp) {
  bool shape_ok = Lp.nrel() == S.lang.nrel() + 1 && Lp.nfun() == S.lang.nfun() &&
                  Lp.rel_names.back() == kEdgeSymbol && Lp.rel_arity.back() == 2 &&
                  Lp.fun_names == S.lang.fun_names;
  for (size_t r = 0; shape_ok && r < S.lang.nrel(); ++r)
    shape_ok = Lp.rel_names[r] == S.lang.rel_names[r] &&
               Lp.rel_arity[r] == S.lang.rel_arity[r];
  if (!shape_ok)
    throw input_error(
        "with_complete_edges: the target language does not extend the structure's "
        "language by the edge relation");
  Structure R;
  R.lang = Lp;
  R.verts = S.verts;
  R.rel = S.rel;
  R.rel.emplace_back();
  for (Vertex u : S.verts)
    for (Vertex v : S.verts)
      if (u != v) R.rel.back().insert({u, v});
  R.fun = S.fun;
  R.finalize();
  return R;
}

Language drop_relation(const Language& L, int r) {
  if (r < 0 || (size_t)r >= L.nrel())
    throw input_error("drop_relation: relation index out of range");
  std::vector<SymbolPerm> group;
  for (const SymbolPerm& g : L.group) {
    if (g.rel_map[(size_t)r] != r)
      throw input_error("drop_relation: a symbol permutation moves the dropped relation");
    SymbolPerm h;
    h.fun_map = g.fun_map;
    for (size_t i = 0; i < L.nrel(); ++i) {
      if ((int)i == r) continue;
      int t = g.rel_map[i];
      h.rel_map.push_back(t > r ? t - 1 : t);
    }
    group.push_back(std::move(h));
  }
  std::vector<std::string> rn;
  std::vector<int> ra;
  for (size_t i = 0; i < L.nrel(); ++i) {
    if ((int)i == r) continue;
    rn.push_back(L.rel_names[i]);
    ra.push_back(L.rel_arity[i]);
  }
  return make_language(std::move(rn), std::move(ra), L.fun_names, std::move(group));
}

Structure drop_relation(const Structure& S, int r) {
  Language L = drop_relation(S.lang, r);
  Structure R;
  R.lang = std::move(L);
  R.verts = S.verts;
  for (size_t i = 0; i < S.lang.nrel(); ++i)
    if ((int)i != r) R.rel.push_back(S.rel[i]);
  R.fun = S.fun;
  R.finalize();
  return R;
}

Witness lift_witness_to_edge_language(const Witness& b0, const Language& Lp) {
  auto held = std::make_shared<Witness>(b0);
  const int e = (int)Lp.nrel() - 1;
  Witness out;
  out.base = with_complete_edges(b0.base, Lp);
  out.witness = with_complete_edges(b0.witness, Lp);
  out.psi.vmap = b0.psi.vmap;
  out.psi.perm = b0.psi.perm;
  out.psi.perm.rel_map.push_back(e);
  // Complete edges are preserved by every bijection: a partial automorphism
  // over the extended language restricts to one below, and the extension
  // below is an automorphism above.
  out.extend = [held, e](const Morphism& phi) {
    if ((int)phi.perm.rel_map.size() != e + 1 || phi.perm.rel_map[(size_t)e] != e)
      throw input_error(
          "lifted witness extension: the symbol permutation does not fix the added "
          "edge relation");
    Morphism low = phi;
    low.perm.rel_map.pop_back();
    Morphism th = held->extend(low);
    th.perm.rel_map.push_back(e);
    return th;
  };
  return out;
}

// ---------------------------------------------------------------------------
// The pipeline
// ---------------------------------------------------------------------------

PipelineWitness build_pipeline_witness(const Structure& A, Witness b0, int n,
                                       const Caps& caps) {
  if (A.verts.empty())
    throw input_error("build_pipeline_witness: base structure has no vertices");
  if (n < 1)
    throw input_error("build_pipeline_witness: the substructure size bound must be at least 1");
  if (!(b0.base == A))
    throw input_error("build_pipeline_witness: bundle is not a witness bundle for the base structure");
  {
    CheckResult c = check_morphism(b0.psi, A, b0.witness, MorphKind::embedding, caps);
    if (!c)
      throw input_error("build_pipeline_witness: bundle psi is not an embedding: " + c.violation);
  }
  if (!is_irreducible(A, caps))
    throw input_error("build_pipeline_witness: base structure is reducible");

  PipelineWitness P;
  P.lang_plus = add_edge_relation(A.lang);
  P.e_rel = (int)A.lang.nrel();
  P.base_plus = with_complete_edges(A, P.lang_plus);
  P.b0_plus = lift_witness_to_edge_language(b0, P.lang_plus);

  // Chasing a set of at most n vertices down the stages, its image can
  // shrink at most n-1 times and gain edges at most binom(n, 2) times per
  // size, so this many unwinding rounds leave some stage cycle-free.
  const long long rounds = (long long)(n - 1) * n * (n - 1) / 2 + 1;
  P.rounds = (int)rounds;

  {
    FaithfulWitness fw = build_faithful_witness(P.base_plus, P.b0_plus, caps);
    P.stage_maps.push_back(fw.projection);
    P.stages.push_back(as_witness(std::move(fw)));
  }
  for (long long i = 0; i < rounds; ++i) {
    UnwindWitness uw = build_unwound_witness(P.base_plus, P.stages.back(), P.e_rel, caps);
    P.stage_maps.push_back(uw.projection);
    P.stages.push_back(as_witness(std::move(uw)));
  }

  for (Vertex id : P.stages.back().witness.verts) {
    Vertex v = id;
    for (size_t j = P.stage_maps.size(); j-- > 0;) v = P.stage_maps[j][(size_t)v];
    P.to_b0[id] = v;
  }

  const int e = P.e_rel;
  auto drop_perm = [e](SymbolPerm g) {
    if (g.rel_map[(size_t)e] != e)
      throw input_error(
          "pipeline witness: a symbol permutation does not fix the auxiliary edge relation");
    g.rel_map.erase(g.rel_map.begin() + e);
    for (int& t : g.rel_map)
      if (t > e) --t;
    return g;
  };
  auto lift_perm = [e](SymbolPerm g) {
    for (int& t : g.rel_map)
      if (t >= e) ++t;
    g.rel_map.insert(g.rel_map.begin() + e, e);
    return g;
  };

  Witness last = P.stages.back();
  Witness R;
  R.base = A;
  R.witness = drop_relation(last.witness, e);
  R.psi.vmap = last.psi.vmap;
  R.psi.perm = drop_perm(last.psi.perm);
  // The distinguished copy carries complete edges, so a partial automorphism
  // over the original language lifts to one over the extended language.
  R.extend = [last, e, lift_perm, drop_perm](const Morphism& phi) {
    Morphism up = phi;
    up.perm = lift_perm(up.perm);
    Morphism th = last.extend(up);
    th.perm = drop_perm(th.perm);
    return th;
  };
  P.result = std::move(R);
  return P;
}

TreeLikenessCertificate certify_tree_likeness(const PipelineWitness& P,
                                              const VertexSet& C, const Caps& caps) {
  if (P.stages.empty())
    throw input_error("certify_tree_likeness: pipeline has no stages");
  TreeLikenessCertificate out;
  out.c = C;
  const Structure& top = P.result.witness;
  for (Vertex v : C)
    if (!top.has_vertex(v))
      throw input_error("certify_tree_likeness: vertex " + std::to_string(v) +
                        " is not in the delivered witness");
  if (closure(top, C) != C)
    throw input_error("certify_tree_likeness: the vertex set is not function-closed");
  if (C.empty()) throw input_error("certify_tree_likeness: the vertex set is empty");

  const int nstages = (int)P.stages.size();
  std::vector<VertexSet> images((size_t)nstages);
  images[(size_t)(nstages - 1)] = C;
  for (int j = nstages - 1; j >= 1; --j) {
    VertexSet img;
    for (Vertex v : images[(size_t)j]) img.insert(P.stage_maps[(size_t)j][(size_t)v]);
    images[(size_t)(j - 1)] = std::move(img);
  }
  for (int j = nstages - 1; j >= 0; --j)
    if (closure(P.stages[(size_t)j].witness, images[(size_t)j]) != images[(size_t)j])
      throw std::logic_error("certify_tree_likeness: a chased image is not function-closed");

  int found = -1;
  for (int j = nstages - 1; j >= 0; --j) {
    Structure piece = induced_substructure(P.stages[(size_t)j].witness, images[(size_t)j]);
    if (!find_induced_long_cycle(relation_adjacency(piece, P.e_rel))) {
      found = j;
      break;
    }
  }
  if (found < 0) {
    out.note = "every stage kept an induced long cycle in the image";
    return out;
  }
  out.stage = found;
  for (int j = found; j < nstages; ++j) out.chased.push_back(images[(size_t)j]);

  Structure piece = induced_substructure(P.stages[(size_t)found].witness, images[(size_t)found]);
  out.dec = decompose_tree_amalgamation(piece, P.base_plus, P.e_rel, caps);
  if (!out.dec.ok) {
    out.note = "decomposition failed: " + out.dec.note;
    return out;
  }

  out.hom_embedding.perm = identity_perm(P.lang_plus.nrel(), P.lang_plus.nfun());
  for (Vertex v : C) {
    Vertex u = v;
    for (int j = nstages - 1; j > found; --j) u = P.stage_maps[(size_t)j][(size_t)u];
    out.hom_embedding.vmap[v] = out.dec.inclusion(u);
  }

  Structure c_plus = induced_substructure(P.stages[(size_t)(nstages - 1)].witness, C);
  CheckResult over_plus = check_morphism(out.hom_embedding, c_plus, out.dec.tree.result,
                                         MorphKind::hom_embedding, caps);
  if (!over_plus) {
    out.note = "the chased map is not a homomorphism-embedding over the extended language: " +
               over_plus.violation;
    return out;
  }

  out.tree_reduct = drop_relation(out.dec.tree.result, P.e_rel);
  Structure c_orig = induced_substructure(P.result.witness, C);
  Morphism reduced = out.hom_embedding;
  reduced.perm = identity_perm(c_orig.lang.nrel(), c_orig.lang.nfun());
  CheckResult over_orig =
      check_morphism(reduced, c_orig, out.tree_reduct, MorphKind::hom_embedding, caps);
  if (!over_orig) {
    out.note = "the chased map is not a homomorphism-embedding over the original language: " +
               over_orig.violation;
    return out;
  }

  CheckResult tv = verify_tree_amalgamation(out.dec.tree, caps);
  if (!tv) {
    out.note = "the decomposition trace fails verification: " + tv.violation;
    return out;
  }
  out.ok = true;
  return out;
}

}  // namespace eppa
