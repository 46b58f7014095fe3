// core.cpp — structures, morphism checking, closure/amalgamation, and the
// exhaustive search oracles (partial automorphisms, automorphism search,
// homomorphism-embedding membership, irreducible-substructure enumeration).
//
// The searches here are deliberately brute-force with *sound* pruning only
// (profiles and incremental consistency never discard a valid completion),
// so a negative answer is a proof of nonexistence within the budget.

#include "eppa/core.hpp"

#include <algorithm>
#include <bit>
#include <queue>
#include <sstream>

namespace eppa {

namespace {

std::string tuple_str(const Tuple& t) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < t.size(); ++i) os << (i ? "," : "") << t[i];
  os << ")";
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Caps
// ---------------------------------------------------------------------------

const Caps& default_caps() {
  static const Caps caps{};
  return caps;
}

// ---------------------------------------------------------------------------
// SymbolPerm / Language
// ---------------------------------------------------------------------------

bool SymbolPerm::is_identity() const {
  for (size_t i = 0; i < rel_map.size(); ++i)
    if (rel_map[i] != (int)i) return false;
  for (size_t i = 0; i < fun_map.size(); ++i)
    if (fun_map[i] != (int)i) return false;
  return true;
}

SymbolPerm identity_perm(size_t nrel, size_t nfun) {
  SymbolPerm g;
  g.rel_map.resize(nrel);
  g.fun_map.resize(nfun);
  for (size_t i = 0; i < nrel; ++i) g.rel_map[i] = (int)i;
  for (size_t i = 0; i < nfun; ++i) g.fun_map[i] = (int)i;
  return g;
}

SymbolPerm compose(const SymbolPerm& g, const SymbolPerm& f) {
  if (g.rel_map.size() != f.rel_map.size() || g.fun_map.size() != f.fun_map.size())
    throw input_error("symbol permutation size mismatch in composition");
  SymbolPerm h;
  h.rel_map.resize(f.rel_map.size());
  h.fun_map.resize(f.fun_map.size());
  for (size_t i = 0; i < f.rel_map.size(); ++i) h.rel_map[i] = g.rel_map[f.rel_map[i]];
  for (size_t i = 0; i < f.fun_map.size(); ++i) h.fun_map[i] = g.fun_map[f.fun_map[i]];
  return h;
}

SymbolPerm inverse(const SymbolPerm& g) {
  SymbolPerm h;
  h.rel_map.resize(g.rel_map.size());
  h.fun_map.resize(g.fun_map.size());
  for (size_t i = 0; i < g.rel_map.size(); ++i) h.rel_map[g.rel_map[i]] = (int)i;
  for (size_t i = 0; i < g.fun_map.size(); ++i) h.fun_map[g.fun_map[i]] = (int)i;
  return h;
}

int Language::rel_index(const std::string& name) const {
  for (size_t i = 0; i < rel_names.size(); ++i)
    if (rel_names[i] == name) return (int)i;
  return -1;
}

int Language::fun_index(const std::string& name) const {
  for (size_t i = 0; i < fun_names.size(); ++i)
    if (fun_names[i] == name) return (int)i;
  return -1;
}

Language make_language(std::vector<std::string> rel_names, std::vector<int> rel_arity,
                       std::vector<std::string> fun_names,
                       std::vector<SymbolPerm> group_elements) {
  if (rel_names.size() != rel_arity.size())
    throw input_error("relation name/arity lists differ in length");
  std::set<std::string> seen;
  for (const auto& n : rel_names)
    if (!seen.insert(n).second) throw input_error("duplicate symbol name: " + n);
  for (const auto& n : fun_names)
    if (!seen.insert(n).second) throw input_error("duplicate symbol name: " + n);
  for (int a : rel_arity)
    if (a < 1) throw input_error("relation arity must be >= 1");

  Language L;
  L.rel_names = std::move(rel_names);
  L.rel_arity = std::move(rel_arity);
  L.fun_names = std::move(fun_names);

  auto check_shape = [&](const SymbolPerm& g) {
    if (g.rel_map.size() != L.nrel() || g.fun_map.size() != L.nfun())
      throw input_error("group element does not cover the symbol table");
    std::vector<bool> hit(L.nrel(), false);
    for (size_t i = 0; i < L.nrel(); ++i) {
      int j = g.rel_map[i];
      if (j < 0 || j >= (int)L.nrel() || hit[j])
        throw input_error("group element is not a permutation of the relations");
      if (L.rel_arity[j] != L.rel_arity[i])
        throw input_error("group element changes a relation arity");
      hit[j] = true;
    }
    std::vector<bool> fhit(L.nfun(), false);
    for (size_t i = 0; i < L.nfun(); ++i) {
      int j = g.fun_map[i];
      if (j < 0 || j >= (int)L.nfun() || fhit[j])
        throw input_error("group element is not a permutation of the functions");
      fhit[j] = true;
    }
  };

  // Identity first, dedup, then validate the group axioms extensionally.
  L.group.push_back(identity_perm(L.nrel(), L.nfun()));
  for (auto& g : group_elements) {
    check_shape(g);
    if (std::find(L.group.begin(), L.group.end(), g) == L.group.end())
      L.group.push_back(std::move(g));
  }
  auto member = [&](const SymbolPerm& g) {
    return std::find(L.group.begin(), L.group.end(), g) != L.group.end();
  };
  for (const auto& g : L.group)
    if (!member(inverse(g))) throw input_error("symbol group not closed under inverse");
  for (const auto& g : L.group)
    for (const auto& h : L.group)
      if (!member(compose(g, h))) throw input_error("symbol group not closed under composition");
  return L;
}

Language graph_language() { return make_language({"E"}, {2}, {}, {}); }

// ---------------------------------------------------------------------------
// Structure
// ---------------------------------------------------------------------------

void Structure::finalize() {
  vpos.clear();
  for (size_t i = 0; i < verts.size(); ++i) {
    if (!vpos.emplace(verts[i], (int)i).second)
      throw input_error("duplicate vertex id in vertex list");
  }
  if (rel.empty()) rel.resize(lang.nrel());
  if (fun.empty()) fun.resize(lang.nfun());
  if (rel.size() != lang.nrel()) throw input_error("relation table size mismatch");
  if (fun.size() != lang.nfun()) throw input_error("function table size mismatch");
  for (size_t r = 0; r < rel.size(); ++r) {
    for (const Tuple& t : rel[r]) {
      if ((int)t.size() != lang.rel_arity[r])
        throw input_error("tuple arity mismatch in relation " + lang.rel_names[r]);
      for (Vertex v : t)
        if (!vpos.count(v)) throw input_error("relation tuple uses undeclared vertex");
    }
  }
  for (size_t f = 0; f < fun.size(); ++f) {
    for (auto it = fun[f].begin(); it != fun[f].end();) {
      if (!vpos.count(it->first)) throw input_error("function input is an undeclared vertex");
      for (Vertex v : it->second)
        if (!vpos.count(v)) throw input_error("function output is an undeclared vertex");
      if (it->second.empty())
        it = fun[f].erase(it);
      else
        ++it;
    }
  }
}

int Structure::pos(Vertex v) const {
  auto it = vpos.find(v);
  if (it == vpos.end())
    throw input_error("unknown vertex id: " + std::to_string(v));
  return it->second;
}

const std::set<Vertex>& Structure::fun_image(int f, Vertex v) const {
  static const std::set<Vertex> empty;
  auto it = fun[f].find(v);
  return it == fun[f].end() ? empty : it->second;
}

Structure make_structure(Language lang, std::vector<Vertex> verts,
                         std::vector<std::set<Tuple>> rel,
                         std::vector<std::map<Vertex, std::set<Vertex>>> fun) {
  Structure S;
  S.lang = std::move(lang);
  S.verts = std::move(verts);
  S.rel = std::move(rel);
  S.fun = std::move(fun);
  S.finalize();
  return S;
}

Structure make_graph(std::vector<Vertex> verts,
                     const std::vector<std::pair<Vertex, Vertex>>& edges) {
  std::set<Tuple> E;
  for (auto [u, v] : edges) {
    if (u == v) throw input_error("graph edge may not be a loop");
    E.insert({u, v});
    E.insert({v, u});
  }
  return make_structure(graph_language(), std::move(verts), {std::move(E)});
}

bool is_symmetric_irreflexive(const Structure& S, int r) {
  if (S.lang.rel_arity[r] != 2) return false;
  for (const Tuple& t : S.rel[r]) {
    if (t[0] == t[1]) return false;
    if (!S.rel[r].count({t[1], t[0]})) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Morphism
// ---------------------------------------------------------------------------

Vertex Morphism::operator()(Vertex v) const {
  auto it = vmap.find(v);
  if (it == vmap.end())
    throw input_error("morphism undefined on vertex " + std::to_string(v));
  return it->second;
}

VertexSet Morphism::domain() const {
  VertexSet d;
  for (const auto& [x, y] : vmap) d.insert(x);
  return d;
}

VertexSet Morphism::range() const {
  VertexSet r;
  for (const auto& [x, y] : vmap) r.insert(y);
  return r;
}

Morphism identity_morphism(const Structure& S) {
  Morphism m;
  m.perm = identity_perm(S.lang.nrel(), S.lang.nfun());
  for (Vertex v : S.verts) m.vmap[v] = v;
  return m;
}

Morphism compose(const Morphism& g, const Morphism& f) {
  Morphism h;
  h.perm = compose(g.perm, f.perm);
  for (const auto& [x, y] : f.vmap) {
    auto it = g.vmap.find(y);
    if (it != g.vmap.end()) h.vmap[x] = it->second;
  }
  return h;
}

Morphism inverse(const Morphism& m) {
  Morphism h;
  h.perm = inverse(m.perm);
  for (const auto& [x, y] : m.vmap)
    if (!h.vmap.emplace(y, x).second)
      throw input_error("cannot invert a non-injective morphism");
  return h;
}

Tuple map_tuple(const std::map<Vertex, Vertex>& f, const Tuple& t) {
  Tuple out(t.size());
  for (size_t i = 0; i < t.size(); ++i) {
    auto it = f.find(t[i]);
    if (it == f.end())
      throw input_error("vertex map undefined on tuple entry " + std::to_string(t[i]));
    out[i] = it->second;
  }
  return out;
}

std::vector<Tuple> all_tuples(const std::vector<Vertex>& universe, int arity) {
  std::vector<Tuple> out;
  if (arity == 0) {
    out.push_back({});
    return out;
  }
  if (universe.empty()) return out;
  std::vector<int> idx(arity, 0);
  for (;;) {
    Tuple t(arity);
    for (int i = 0; i < arity; ++i) t[i] = universe[idx[i]];
    out.push_back(std::move(t));
    int i = arity - 1;
    while (i >= 0 && idx[i] + 1 == (int)universe.size()) idx[i--] = 0;
    if (i < 0) break;
    ++idx[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// check_morphism
// ---------------------------------------------------------------------------

namespace {

CheckResult fail(std::string why) { return {false, std::move(why)}; }
CheckResult pass() { return {true, ""}; }

// Homomorphism conditions: every tuple mapped into perm(R)'s content, every
// function image mapped inside perm(F)'s image of the mapped argument.
CheckResult check_hom_conditions(const Morphism& m, const Structure& S, const Structure& T) {
  for (size_t r = 0; r < S.lang.nrel(); ++r) {
    int r2 = m.perm.rel_map[r];
    for (const Tuple& t : S.rel[r]) {
      if (!T.rel[r2].count(map_tuple(m.vmap, t)))
        return fail("relation tuple not preserved: " + S.lang.rel_names[r] + tuple_str(t));
    }
  }
  for (size_t f = 0; f < S.lang.nfun(); ++f) {
    int f2 = m.perm.fun_map[f];
    for (const auto& [x, ys] : S.fun[f]) {
      const auto& timg = T.fun_image((int)f2, m(x));
      for (Vertex y : ys) {
        if (!timg.count(m(y)))
          return fail("function image not preserved: " + S.lang.fun_names[f] + "(" +
                      std::to_string(x) + ")");
      }
    }
  }
  return pass();
}

// Embedding extras: reflect tuples (iterating only the target content whose
// entries lie in the image) and match function images exactly.
CheckResult check_embedding_extras(const Morphism& m, const Structure& S, const Structure& T) {
  std::map<Vertex, Vertex> inv;
  for (const auto& [x, y] : m.vmap)
    if (!inv.emplace(y, x).second) return fail("vertex-map not injective");
  SymbolPerm gi = inverse(m.perm);
  for (size_t r2 = 0; r2 < T.lang.nrel(); ++r2) {
    int r = gi.rel_map[r2];
    for (const Tuple& t2 : T.rel[r2]) {
      bool in_image = true;
      for (Vertex v : t2)
        if (!inv.count(v)) {
          in_image = false;
          break;
        }
      if (!in_image) continue;
      if (!S.rel[r].count(map_tuple(inv, t2)))
        return fail("relation tuple not reflected: " + T.lang.rel_names[r2] + tuple_str(t2));
    }
  }
  for (size_t f = 0; f < S.lang.nfun(); ++f) {
    int f2 = m.perm.fun_map[f];
    for (const auto& [x, y] : m.vmap) {
      std::set<Vertex> mapped;
      for (Vertex z : S.fun_image((int)f, x)) mapped.insert(m(z));
      if (mapped != T.fun_image(f2, y))
        return fail("function image not exact: " + S.lang.fun_names[f] + "(" +
                    std::to_string(x) + ")");
    }
  }
  return pass();
}

CheckResult check_totality(const Morphism& m, const Structure& S) {
  for (Vertex v : S.verts)
    if (!m.defined_on(v)) return fail("vertex-map not total (missing " + std::to_string(v) + ")");
  return pass();
}

CheckResult check_injectivity(const Morphism& m) {
  std::set<Vertex> seen;
  for (const auto& [x, y] : m.vmap)
    if (!seen.insert(y).second) return fail("vertex-map not injective");
  return pass();
}

}  // namespace

CheckResult check_morphism(const Morphism& m, const Structure& S, const Structure& T,
                           MorphKind kind, const Caps& caps) {
  if (!(S.lang == T.lang)) throw input_error("morphism check across different languages");
  if (std::find(T.lang.group.begin(), T.lang.group.end(), m.perm) == T.lang.group.end())
    throw input_error("symbol permutation is not a group element");
  for (const auto& [x, y] : m.vmap) {
    if (!S.has_vertex(x)) throw input_error("morphism domain vertex not in source");
    if (!T.has_vertex(y)) throw input_error("morphism range vertex not in target");
  }

  switch (kind) {
    case MorphKind::homomorphism: {
      if (auto c = check_totality(m, S); !c) return c;
      return check_hom_conditions(m, S, T);
    }
    case MorphKind::monomorphism: {
      if (auto c = check_totality(m, S); !c) return c;
      if (auto c = check_injectivity(m); !c) return c;
      return check_hom_conditions(m, S, T);
    }
    case MorphKind::embedding: {
      if (auto c = check_totality(m, S); !c) return c;
      if (auto c = check_injectivity(m); !c) return c;
      if (auto c = check_hom_conditions(m, S, T); !c) return c;
      return check_embedding_extras(m, S, T);
    }
    case MorphKind::isomorphism: {
      if (auto c = check_totality(m, S); !c) return c;
      if (auto c = check_injectivity(m); !c) return c;
      if (m.vmap.size() != T.verts.size()) return fail("vertex-map not surjective");
      if (auto c = check_hom_conditions(m, S, T); !c) return c;
      return check_embedding_extras(m, S, T);
    }
    case MorphKind::automorphism: {
      if (&S != &T && !(S == T))
        throw input_error("automorphism check requires source = target");
      return check_morphism(m, S, S, MorphKind::isomorphism, caps);
    }
    case MorphKind::partial_automorphism: {
      if (&S != &T && !(S == T))
        throw input_error("partial automorphism check requires source = target");
      if (auto c = check_injectivity(m); !c) return c;
      VertexSet dom = m.domain(), rng = m.range();
      if (closure(S, dom) != dom) return fail("domain not closed under functions");
      if (closure(S, rng) != rng) return fail("range not closed under functions");
      Structure D = induced_substructure(S, dom);
      Structure R = induced_substructure(S, rng);
      return check_morphism(m, D, R, MorphKind::isomorphism, caps);
    }
    case MorphKind::hom_embedding: {
      if (auto c = check_totality(m, S); !c) return c;
      if (auto c = check_hom_conditions(m, S, T); !c) return c;
      for (const VertexSet& I : enumerate_irreducible_substructures(S, caps)) {
        Morphism mi;
        mi.perm = m.perm;
        std::set<Vertex> used;
        bool inj = true;
        for (Vertex v : I) {
          Vertex w = m(v);
          mi.vmap[v] = w;
          if (!used.insert(w).second) inj = false;
        }
        if (!inj) return fail("not injective on an irreducible substructure");
        Structure FI = induced_substructure(S, I);
        if (auto c = check_morphism(mi, FI, T, MorphKind::embedding, caps); !c)
          return fail("not an embedding on an irreducible substructure: " + c.violation);
      }
      return pass();
    }
  }
  throw input_error("unknown morphism kind");
}

// ---------------------------------------------------------------------------
// Closure / substructures / relabelling
// ---------------------------------------------------------------------------

VertexSet closure(const Structure& S, const VertexSet& X) {
  for (Vertex v : X) S.pos(v);
  VertexSet C = X;
  std::queue<Vertex> q;
  for (Vertex v : X) q.push(v);
  while (!q.empty()) {
    Vertex v = q.front();
    q.pop();
    for (size_t f = 0; f < S.lang.nfun(); ++f)
      for (Vertex y : S.fun_image((int)f, v))
        if (C.insert(y).second) q.push(y);
  }
  return C;
}

Structure induced_substructure(const Structure& S, const VertexSet& X) {
  for (Vertex v : X) S.pos(v);
  for (Vertex v : X)
    for (size_t f = 0; f < S.lang.nfun(); ++f)
      for (Vertex y : S.fun_image((int)f, v))
        if (!X.count(y))
          throw closure_violation("vertex set is not closed: " + std::to_string(v) +
                                  " has function image " + std::to_string(y) + " outside");
  Structure R;
  R.lang = S.lang;
  for (Vertex v : S.verts)
    if (X.count(v)) R.verts.push_back(v);
  R.rel.resize(S.lang.nrel());
  for (size_t r = 0; r < S.lang.nrel(); ++r) {
    for (const Tuple& t : S.rel[r]) {
      bool inside = true;
      for (Vertex v : t)
        if (!X.count(v)) {
          inside = false;
          break;
        }
      if (inside) R.rel[r].insert(t);
    }
  }
  R.fun.resize(S.lang.nfun());
  for (size_t f = 0; f < S.lang.nfun(); ++f)
    for (const auto& [x, ys] : S.fun[f])
      if (X.count(x)) R.fun[f][x] = ys;
  R.finalize();
  return R;
}

Structure apply_relabelling(const SymbolPerm& g, const Structure& S) {
  if (std::find(S.lang.group.begin(), S.lang.group.end(), g) == S.lang.group.end())
    throw input_error("relabelling permutation is not a group element");
  Structure R;
  R.lang = S.lang;
  R.verts = S.verts;
  R.rel.resize(S.lang.nrel());
  R.fun.resize(S.lang.nfun());
  for (size_t r = 0; r < S.lang.nrel(); ++r) R.rel[g.rel_map[r]] = S.rel[r];
  for (size_t f = 0; f < S.lang.nfun(); ++f) R.fun[g.fun_map[f]] = S.fun[f];
  R.finalize();
  return R;
}

std::vector<Structure> relabelling_orbit(const Structure& S) {
  std::vector<Structure> orbit;
  for (const SymbolPerm& g : S.lang.group) {
    Structure T = apply_relabelling(g, S);
    if (std::find(orbit.begin(), orbit.end(), T) == orbit.end()) orbit.push_back(std::move(T));
  }
  return orbit;
}

// ---------------------------------------------------------------------------
// Free amalgamation
// ---------------------------------------------------------------------------

Amalgam free_amalgamation(const Structure& B1, const Structure& B2, const Structure& A,
                          const Morphism& a1, const Morphism& a2) {
  if (!(A.lang == B1.lang) || !(A.lang == B2.lang))
    throw input_error("free amalgamation across different languages");
  if (!a1.perm.is_identity() || !a2.perm.is_identity())
    throw input_error("gluing maps must have identity symbol permutation");
  if (auto c = check_morphism(a1, A, B1, MorphKind::monomorphism); !c)
    throw input_error("first gluing map is not an injective homomorphism: " + c.violation);
  if (auto c = check_morphism(a2, A, B2, MorphKind::monomorphism); !c)
    throw input_error("second gluing map is not an injective homomorphism: " + c.violation);

  Morphism b1, b2;
  b1.perm = identity_perm(A.lang.nrel(), A.lang.nfun());
  b2.perm = b1.perm;
  // Shared copy of A first (in A's vertex order), then the B1-only part,
  // then the B2-only part, each in input order; ids are fresh 0..N-1.
  std::map<Vertex, Vertex> a1inv, a2inv;
  for (const auto& [x, y] : a1.vmap) a1inv[y] = x;
  for (const auto& [x, y] : a2.vmap) a2inv[y] = x;
  Vertex next = 0;
  std::map<Vertex, Vertex> shared_id;
  for (Vertex x : A.verts) shared_id[x] = next++;
  for (Vertex v : B1.verts)
    b1.vmap[v] = a1inv.count(v) ? shared_id[a1inv[v]] : next++;
  for (Vertex v : B2.verts)
    b2.vmap[v] = a2inv.count(v) ? shared_id[a2inv[v]] : next++;

  Structure C;
  C.lang = A.lang;
  for (Vertex v = 0; v < next; ++v) C.verts.push_back(v);
  C.rel.resize(A.lang.nrel());
  C.fun.resize(A.lang.nfun());
  for (size_t r = 0; r < A.lang.nrel(); ++r) {
    for (const Tuple& t : B1.rel[r]) C.rel[r].insert(map_tuple(b1.vmap, t));
    for (const Tuple& t : B2.rel[r]) C.rel[r].insert(map_tuple(b2.vmap, t));
  }
  for (size_t f = 0; f < A.lang.nfun(); ++f) {
    for (const auto& [x, ys] : B1.fun[f])
      for (Vertex y : ys) C.fun[f][b1.vmap.at(x)].insert(b1.vmap.at(y));
    for (const auto& [x, ys] : B2.fun[f])
      for (Vertex y : ys) C.fun[f][b2.vmap.at(x)].insert(b2.vmap.at(y));
  }
  C.finalize();
  return {std::move(C), std::move(b1), std::move(b2)};
}

// ---------------------------------------------------------------------------
// Gaifman graph, irreducibility
// ---------------------------------------------------------------------------

std::map<Vertex, VertexSet> gaifman_adjacency(const Structure& S) {
  std::map<Vertex, VertexSet> adj;
  for (Vertex v : S.verts) adj[v];
  for (size_t r = 0; r < S.lang.nrel(); ++r) {
    for (const Tuple& t : S.rel[r]) {
      for (size_t i = 0; i < t.size(); ++i)
        for (size_t j = i + 1; j < t.size(); ++j)
          if (t[i] != t[j]) {
            adj[t[i]].insert(t[j]);
            adj[t[j]].insert(t[i]);
          }
    }
  }
  for (size_t f = 0; f < S.lang.nfun(); ++f) {
    for (const auto& [x, ys] : S.fun[f])
      for (Vertex y : ys)
        if (y != x) {
          adj[x].insert(y);
          adj[y].insert(x);
        }
  }
  return adj;
}

namespace {

int max_rel_arity(const Language& L) {
  int a = 0;
  for (int x : L.rel_arity) a = std::max(a, x);
  return a;
}

// Position-indexed Gaifman adjacency as bitmasks (only for |S| <= 64).
std::vector<uint64_t> adjacency_masks(const Structure& S) {
  auto adj = gaifman_adjacency(S);
  std::vector<uint64_t> mask(S.size(), 0);
  for (const auto& [v, nbrs] : adj)
    for (Vertex w : nbrs) mask[S.pos(v)] |= (uint64_t)1 << S.pos(w);
  return mask;
}

int component_count(uint64_t vertices, const std::vector<uint64_t>& adj) {
  int comps = 0;
  uint64_t todo = vertices;
  while (todo) {
    ++comps;
    uint64_t frontier = todo & -todo;  // lowest remaining vertex
    uint64_t seen = 0;
    while (frontier) {
      seen |= frontier;
      uint64_t next = 0;
      uint64_t f = frontier;
      while (f) {
        int i = __builtin_ctzll(f);
        f &= f - 1;
        next |= adj[i] & vertices;
      }
      frontier = next & ~seen;
    }
    todo &= ~seen;
  }
  return comps;
}

}  // namespace

bool is_irreducible(const Structure& S, const Caps& caps) {
  size_t n = S.size();
  if (n == 0) return true;  // no pair of proper substructures can cover it
  if (S.lang.nfun() == 0 && max_rel_arity(S.lang) <= 2) {
    // Purely relational, arity <= 2: irreducible iff the Gaifman graph is a
    // clique (split off any non-adjacent pair, keep the rest as the overlap).
    auto adj = gaifman_adjacency(S);
    for (size_t i = 0; i < n; ++i)
      for (size_t j = i + 1; j < n; ++j)
        if (!adj[S.verts[i]].count(S.verts[j])) return false;
    return true;
  }
  if ((long long)n > caps.max_subset_bits)
    throw resource_limit_error("is_irreducible: structure too large for the subset sweep");

  // S is a free amalgam of proper closed parts U1, U2 over V = U1 ∩ U2 iff
  // for some function-closed V ⊊ S the Gaifman graph on S∖V splits into >= 2
  // components (the parts are then V plus a grouping of the components; each
  // part is automatically closed because function edges stay inside V or the
  // component of their source).
  auto adj = adjacency_masks(S);
  std::vector<uint64_t> fmask(n, 0);
  for (size_t f = 0; f < S.lang.nfun(); ++f)
    for (const auto& [x, ys] : S.fun[f])
      for (Vertex y : ys) fmask[S.pos(x)] |= (uint64_t)1 << S.pos(y);

  Budget budget(caps);
  uint64_t full = (n == 64) ? ~(uint64_t)0 : (((uint64_t)1 << n) - 1);
  for (uint64_t V = 0; V < full; ++V) {
    budget.spend("is_irreducible");
    bool closed = true;
    for (uint64_t m = V; m && closed; m &= m - 1)
      if (fmask[__builtin_ctzll(m)] & ~V) closed = false;
    if (!closed) continue;
    if (component_count(full & ~V, adj) >= 2) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Irreducible substructure enumeration
// ---------------------------------------------------------------------------

namespace {

// All nonempty cliques of the Gaifman graph, grown in position order.
void enumerate_cliques(const Structure& S, size_t max_size, Budget& budget,
                       std::vector<VertexSet>& out, long long max_items) {
  size_t n = S.size();
  auto adj = gaifman_adjacency(S);
  std::vector<std::vector<int>> nbr(n);
  for (size_t i = 0; i < n; ++i)
    for (Vertex w : adj[S.verts[i]])
      nbr[i].push_back(S.pos(w));

  std::vector<int> clique;
  auto emit = [&]() {
    VertexSet X;
    for (int i : clique) X.insert(S.verts[i]);
    out.push_back(std::move(X));
    if ((long long)out.size() > max_items)
      throw resource_limit_error("irreducible substructure enumeration exceeded item cap");
  };
  // Candidates for extension keep positions above the last member so each
  // clique is produced exactly once.
  std::function<void(std::vector<int>&)> grow = [&](std::vector<int>& cands) {
    if (clique.size() >= max_size) return;
    for (size_t ci = 0; ci < cands.size(); ++ci) {
      int u = cands[ci];
      budget.spend("enumerate_cliques");
      clique.push_back(u);
      emit();
      std::vector<int> next;
      for (size_t cj = ci + 1; cj < cands.size(); ++cj) {
        int w = cands[cj];
        if (std::find(nbr[u].begin(), nbr[u].end(), w) != nbr[u].end()) next.push_back(w);
      }
      grow(next);
      clique.pop_back();
    }
  };
  std::vector<int> all(n);
  for (size_t i = 0; i < n; ++i) all[i] = (int)i;
  grow(all);
}

// All connected vertex sets whose minimum-position vertex is `seed`,
// visited exactly once via the exclusion-list scheme; each set's closure is
// recorded as a candidate when it fits the size bound.
void grow_connected(const Structure& S, const std::vector<std::vector<int>>& nbr, int seed,
                    size_t max_size, Budget& budget, std::set<VertexSet>& cands,
                    long long max_items) {
  std::vector<int> cur = {seed};
  std::set<int> in_cur = {seed};

  std::function<void(std::vector<int>, std::set<int>)> rec = [&](std::vector<int> ext,
                                                                 std::set<int> banned) {
    budget.spend("enumerate_connected_sets");
    VertexSet X;
    for (int i : cur) X.insert(S.verts[i]);
    VertexSet C = closure(S, X);
    if (C.size() > max_size) return;  // closures only grow with the set
    cands.insert(std::move(C));
    if ((long long)cands.size() > max_items)
      throw resource_limit_error("irreducible substructure enumeration exceeded item cap");
    if (cur.size() >= max_size) return;
    for (size_t i = 0; i < ext.size(); ++i) {
      int u = ext[i];
      if (banned.count(u)) continue;
      cur.push_back(u);
      in_cur.insert(u);
      std::vector<int> next_ext(ext.begin() + i + 1, ext.end());
      for (int w : nbr[u])
        if (w > seed && !in_cur.count(w) && !banned.count(w) &&
            std::find(next_ext.begin(), next_ext.end(), w) == next_ext.end() &&
            std::find(ext.begin(), ext.begin() + i, w) == ext.begin() + i)
          next_ext.push_back(w);
      std::set<int> next_banned = banned;
      for (size_t j = 0; j < i; ++j) next_banned.insert(ext[j]);
      rec(std::move(next_ext), std::move(next_banned));
      cur.pop_back();
      in_cur.erase(u);
    }
  };
  std::vector<int> ext0;
  for (int w : nbr[seed])
    if (w > seed) ext0.push_back(w);
  rec(std::move(ext0), {});
}

}  // namespace

std::vector<VertexSet> enumerate_irreducible_substructures(const Structure& S, const Caps& caps,
                                                           size_t max_size) {
  Budget budget(caps);
  size_t bound = std::min(max_size, S.size());
  std::vector<VertexSet> result;
  if (S.lang.nfun() == 0 && max_rel_arity(S.lang) <= 2) {
    // Irreducible ⟺ Gaifman clique in this fragment.
    enumerate_cliques(S, bound, budget, result, caps.max_items);
  } else {
    // Irreducible sets are connected and function-closed, and every closed
    // connected set is reached as the closure of a connected set.
    auto adj = gaifman_adjacency(S);
    std::vector<std::vector<int>> nbr(S.size());
    for (size_t i = 0; i < S.size(); ++i) {
      for (Vertex w : adj[S.verts[i]]) nbr[i].push_back(S.pos(w));
      std::sort(nbr[i].begin(), nbr[i].end());
    }
    std::set<VertexSet> cands;
    for (size_t i = 0; i < S.size(); ++i)
      grow_connected(S, nbr, (int)i, bound, budget, cands, caps.max_items);
    for (const VertexSet& X : cands)
      if (is_irreducible(induced_substructure(S, X), caps)) result.push_back(X);
  }
  std::sort(result.begin(), result.end(), [](const VertexSet& a, const VertexSet& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  return result;
}

// ---------------------------------------------------------------------------
// Partial automorphism enumeration
// ---------------------------------------------------------------------------

std::vector<Morphism> enumerate_partial_automorphisms(const Structure& S, const Caps& caps) {
  std::vector<Morphism> out;
  Budget budget(caps);
  size_t n = S.size();

  for (const SymbolPerm& g : S.lang.group) {
    std::map<Vertex, Vertex> cur;
    std::set<Vertex> used;
    std::function<void(size_t)> rec = [&](size_t i) {
      if (i == n) {
        VertexSet dom, rng;
        for (const auto& [x, y] : cur) {
          dom.insert(x);
          rng.insert(y);
        }
        if (closure(S, dom) != dom || closure(S, rng) != rng) return;
        Morphism m{g, cur};
        if (check_morphism(m, S, S, MorphKind::partial_automorphism, caps)) {
          out.push_back(std::move(m));
          if ((long long)out.size() > caps.max_items)
            throw resource_limit_error("partial automorphism list exceeded item cap");
        }
        return;
      }
      budget.spend("enumerate_partial_automorphisms");
      Vertex v = S.verts[i];
      rec(i + 1);  // v outside the domain
      for (Vertex w : S.verts) {
        if (used.count(w)) continue;
        cur[v] = w;
        used.insert(w);
        rec(i + 1);
        used.erase(w);
        cur.erase(v);
      }
    };
    rec(0);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Automorphism search engine
// ---------------------------------------------------------------------------

namespace {

// Per-vertex incidence profile under a fixed symbol permutation g: matching
// f(v)=w requires source counts at (R,k) to equal target counts at (g(R),k),
// and function in/out-degrees to match across g. Sound (never excludes a
// valid image), not complete.
struct SearchContext {
  const Structure& S;
  SymbolPerm g, gi;
  size_t n;
  std::vector<std::vector<std::pair<int, const Tuple*>>> inc;  // per position
  std::vector<std::vector<std::pair<int, Vertex>>> in_edges;   // (fun, source)
  std::vector<std::vector<long long>> src_profile, tgt_profile;

  SearchContext(const Structure& s, const SymbolPerm& perm) : S(s), g(perm), gi(inverse(perm)) {
    n = S.size();
    inc.resize(n);
    in_edges.resize(n);
    for (size_t r = 0; r < S.lang.nrel(); ++r) {
      for (const Tuple& t : S.rel[r]) {
        std::set<int> positions;
        for (Vertex v : t) positions.insert(S.pos(v));
        for (int p : positions) inc[p].push_back({(int)r, &t});
      }
    }
    for (size_t f = 0; f < S.lang.nfun(); ++f)
      for (const auto& [x, ys] : S.fun[f])
        for (Vertex y : ys) in_edges[S.pos(y)].push_back({(int)f, x});

    // counts[v][(r,k)] = #tuples of R with v at slot k; plus fun degrees
    size_t slots = 0;
    for (size_t r = 0; r < S.lang.nrel(); ++r) slots += S.lang.rel_arity[r];
    src_profile.assign(n, std::vector<long long>(slots + 2 * S.lang.nfun(), 0));
    tgt_profile.assign(n, std::vector<long long>(slots + 2 * S.lang.nfun(), 0));
    std::vector<size_t> base(S.lang.nrel());
    {
      size_t acc = 0;
      for (size_t r = 0; r < S.lang.nrel(); ++r) {
        base[r] = acc;
        acc += S.lang.rel_arity[r];
      }
    }
    for (size_t r = 0; r < S.lang.nrel(); ++r) {
      size_t r2 = (size_t)g.rel_map[r];
      for (const Tuple& t : S.rel[r])
        for (size_t k = 0; k < t.size(); ++k) src_profile[S.pos(t[k])][base[r] + k]++;
      for (const Tuple& t : S.rel[r2])
        for (size_t k = 0; k < t.size(); ++k) tgt_profile[S.pos(t[k])][base[r] + k]++;
    }
    for (size_t f = 0; f < S.lang.nfun(); ++f) {
      size_t f2 = (size_t)g.fun_map[f];
      size_t out_slot = slots + 2 * f, in_slot = slots + 2 * f + 1;
      for (const auto& [x, ys] : S.fun[f]) {
        src_profile[S.pos(x)][out_slot] += (long long)ys.size();
        for (Vertex y : ys) src_profile[S.pos(y)][in_slot]++;
      }
      for (const auto& [x, ys] : S.fun[f2]) {
        tgt_profile[S.pos(x)][out_slot] += (long long)ys.size();
        for (Vertex y : ys) tgt_profile[S.pos(y)][in_slot]++;
      }
    }
  }

  // Incremental consistency after assigning position pv -> position pw,
  // given assignment/preimage arrays indexed by position (-1 = undecided).
  bool consistent(int pv, int pw, const std::vector<int>& img, const std::vector<int>& pre) const {
    Vertex v = S.verts[pv], w = S.verts[pw];
    for (const auto& [r, tp] : inc[pv]) {
      const Tuple& t = *tp;
      Tuple mapped(t.size());
      bool full = true;
      for (size_t k = 0; k < t.size(); ++k) {
        int ip = img[S.pos(t[k])];
        if (ip < 0) {
          full = false;
          break;
        }
        mapped[k] = S.verts[ip];
      }
      if (full && !S.rel[g.rel_map[r]].count(mapped)) return false;
    }
    for (const auto& [r2, tp] : inc[pw]) {
      const Tuple& t2 = *tp;
      Tuple back(t2.size());
      bool full = true;
      for (size_t k = 0; k < t2.size(); ++k) {
        int pp = pre[S.pos(t2[k])];
        if (pp < 0) {
          full = false;
          break;
        }
        back[k] = S.verts[pp];
      }
      if (full && !S.rel[gi.rel_map[r2]].count(back)) return false;
    }
    for (size_t f = 0; f < S.lang.nfun(); ++f) {
      int f2 = g.fun_map[f];
      for (Vertex y : S.fun_image((int)f, v)) {
        int ip = img[S.pos(y)];
        if (ip >= 0 && !S.fun_image(f2, w).count(S.verts[ip])) return false;
      }
    }
    for (const auto& [f, x] : in_edges[pv]) {
      int ip = img[S.pos(x)];
      if (ip >= 0 && !S.fun_image(g.fun_map[f], S.verts[ip]).count(w)) return false;
    }
    for (size_t f2 = 0; f2 < S.lang.nfun(); ++f2) {
      int f = gi.fun_map[f2];
      for (Vertex y2 : S.fun_image((int)f2, w)) {
        int pp = pre[S.pos(y2)];
        if (pp >= 0 && !S.fun_image(f, v).count(S.verts[pp])) return false;
      }
    }
    for (const auto& [f2, x2] : in_edges[pw]) {
      int pp = pre[S.pos(x2)];
      if (pp >= 0 && !S.fun_image(gi.fun_map[f2], S.verts[pp]).count(v)) return false;
    }
    return true;
  }
};

}  // namespace

std::optional<Morphism> search_automorphism(const Structure& S,
                                            const std::optional<SymbolPerm>& fixed_perm,
                                            const std::map<Vertex, Vertex>& must,
                                            const std::map<Vertex, VertexSet>& allowed,
                                            const Caps& caps) {
  for (const auto& [x, y] : must) {
    S.pos(x);
    S.pos(y);
  }
  for (const auto& [x, ys] : allowed) {
    S.pos(x);
    for (Vertex y : ys) S.pos(y);
  }
  Budget budget(caps);
  size_t n = S.size();
  auto adj = gaifman_adjacency(S);
  // Gaifman adjacency as packed bit rows: bit k of row i set iff vertices at
  // positions i and k share a tuple or a function edge.  An automorphism
  // preserves this graph exactly (tuples map onto tuples under any relation
  // permutation), so it drives the domain propagation below.
  size_t nb = (n + 63) / 64;
  std::vector<uint64_t> adjbits(n * nb, 0);
  for (size_t i = 0; i < n; ++i)
    for (Vertex w : adj[S.verts[i]]) {
      size_t k = (size_t)S.pos(w);
      adjbits[i * nb + k / 64] |= 1ull << (k % 64);
    }

  std::vector<SymbolPerm> perms;
  if (fixed_perm) {
    if (std::find(S.lang.group.begin(), S.lang.group.end(), *fixed_perm) == S.lang.group.end())
      throw input_error("fixed symbol permutation is not a group element");
    perms.push_back(*fixed_perm);
  } else {
    perms = S.lang.group;
  }

  for (const SymbolPerm& g : perms) {
    SearchContext ctx(S, g);
    // Initial image domains per position: allowed ∩ profile-compatible,
    // collapsed to a singleton by a forced pair.  Stored as bit rows.
    std::vector<uint64_t> dom(n * nb, 0);
    bool feasible = true;
    for (size_t i = 0; i < n && feasible; ++i) {
      Vertex v = S.verts[i];
      auto al = allowed.find(v);
      auto mu = must.find(v);
      size_t cnt = 0;
      for (size_t j = 0; j < n; ++j) {
        if (al != allowed.end() && !al->second.count(S.verts[j])) continue;
        if (mu != must.end() && (size_t)S.pos(mu->second) != j) continue;
        if (ctx.src_profile[i] != ctx.tgt_profile[j]) continue;
        dom[i * nb + j / 64] |= 1ull << (j % 64);
        ++cnt;
      }
      if (cnt == 0) feasible = false;
    }
    if (!feasible) continue;

    std::vector<int> img(n, -1), pre(n, -1);
    size_t decided = 0;

    // Commit position i -> j and forward-check: every undecided domain keeps
    // only images whose adjacency to j mirrors the vertex's adjacency to i,
    // and j itself is claimed.  Returns false on a wiped-out domain.
    auto assign = [&](int i, int j, std::vector<uint64_t>& d) -> bool {
      img[i] = j;
      pre[j] = i;
      ++decided;
      const uint64_t* jrow = &adjbits[(size_t)j * nb];
      for (size_t k = 0; k < n; ++k) {
        if (img[k] >= 0) continue;
        uint64_t* dk = &d[k * nb];
        bool aik = (adjbits[(size_t)i * nb + k / 64] >> (k % 64)) & 1ull;
        uint64_t any = 0;
        for (size_t b = 0; b < nb; ++b) {
          uint64_t m = aik ? jrow[b] : ~jrow[b];
          if (b == (size_t)j / 64) m &= ~(1ull << ((size_t)j % 64));
          dk[b] &= m;
          any |= dk[b];
        }
        if (any == 0) return false;
      }
      return true;
    };

    bool dead = false;
    // Seed with the forced pairs, propagating each one.
    for (size_t i = 0; i < n && !dead; ++i) {
      auto mu = must.find(S.verts[i]);
      if (mu == must.end()) continue;
      int j = (int)S.pos(mu->second);
      bool live = ((dom[i * nb + (size_t)j / 64] >> ((size_t)j % 64)) & 1ull) != 0;
      if (!live || pre[j] >= 0 || !ctx.consistent((int)i, j, img, pre) || !assign((int)i, j, dom))
        dead = true;
    }
    if (dead) continue;

    // Depth-first assignment over the propagated domains, branching on the
    // position with the fewest remaining images.
    std::function<bool(const std::vector<uint64_t>&)> rec =
        [&](const std::vector<uint64_t>& d) -> bool {
      if (decided == n) {
        Morphism m;
        m.perm = g;
        for (size_t i = 0; i < n; ++i) m.vmap[S.verts[i]] = S.verts[img[i]];
        return (bool)check_morphism(m, S, S, MorphKind::automorphism, caps);
      }
      int best = -1;
      size_t best_cnt = 0;
      for (size_t i = 0; i < n; ++i) {
        if (img[i] >= 0) continue;
        size_t c = 0;
        for (size_t b = 0; b < nb; ++b) c += (size_t)std::popcount(d[i * nb + b]);
        if (best < 0 || c < best_cnt) {
          best = (int)i;
          best_cnt = c;
        }
      }
      if (best_cnt == 0) return false;
      for (size_t b = 0; b < nb; ++b) {
        uint64_t bits = d[(size_t)best * nb + b];
        while (bits) {
          int j = (int)(b * 64 + (size_t)std::countr_zero(bits));
          bits &= bits - 1;
          budget.spend("search_automorphism");
          if (!ctx.consistent(best, j, img, pre)) continue;
          std::vector<uint64_t> d2 = d;
          if (assign(best, j, d2) && rec(d2)) return true;
          --decided;
          img[best] = -1;
          pre[j] = -1;
        }
      }
      return false;
    };
    if (rec(dom)) {
      Morphism m;
      m.perm = g;
      for (size_t i = 0; i < n; ++i) m.vmap[S.verts[i]] = S.verts[img[i]];
      return m;
    }
  }
  return std::nullopt;
}

std::optional<Morphism> find_automorphism_with_image(const Structure& S, const VertexSet& X,
                                                     const VertexSet& targets, const Caps& caps) {
  std::map<Vertex, VertexSet> allowed;
  for (Vertex x : X) allowed[x] = targets;
  return search_automorphism(S, std::nullopt, {}, allowed, caps);
}

std::optional<Morphism> extend_to_automorphism(const Structure& S, const Morphism& partial,
                                               const Caps& caps) {
  return search_automorphism(S, partial.perm, partial.vmap, {}, caps);
}

std::vector<Morphism> enumerate_automorphisms(const Structure& S, const Caps& caps) {
  std::vector<Morphism> out;
  Budget budget(caps);
  size_t n = S.size();

  for (const SymbolPerm& g : S.lang.group) {
    SearchContext ctx(S, g);
    std::vector<std::vector<int>> cand(n);
    bool feasible = true;
    for (size_t i = 0; i < n && feasible; ++i) {
      for (size_t j = 0; j < n; ++j)
        if (ctx.src_profile[i] == ctx.tgt_profile[j]) cand[i].push_back((int)j);
      if (cand[i].empty()) feasible = false;
    }
    if (!feasible) continue;
    std::vector<int> img(n, -1), pre(n, -1);
    std::function<void(size_t)> rec = [&](size_t i) {
      if (i == n) {
        Morphism m;
        m.perm = g;
        for (size_t k = 0; k < n; ++k) m.vmap[S.verts[k]] = S.verts[img[k]];
        if (check_morphism(m, S, S, MorphKind::automorphism, caps)) {
          out.push_back(std::move(m));
          if ((long long)out.size() > caps.max_items)
            throw resource_limit_error("automorphism list exceeded item cap");
        }
        return;
      }
      for (int j : cand[i]) {
        if (pre[j] >= 0) continue;
        budget.spend("enumerate_automorphisms");
        if (!ctx.consistent((int)i, j, img, pre)) continue;
        img[i] = j;
        pre[j] = (int)i;
        rec(i + 1);
        img[i] = -1;
        pre[j] = -1;
      }
    };
    rec(0);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Homomorphism-embedding existence
// ---------------------------------------------------------------------------

bool exists_homomorphism_embedding(const Structure& F, const Structure& B, const Caps& caps) {
  if (!(F.lang == B.lang)) throw input_error("homomorphism-embedding across different languages");
  if (F.size() == 0) return true;
  if (B.size() == 0) return false;
  Budget budget(caps);

  std::vector<VertexSet> irr = enumerate_irreducible_substructures(F, caps);
  std::vector<Structure> irr_sub;
  irr_sub.reserve(irr.size());
  for (const auto& I : irr) irr_sub.push_back(induced_substructure(F, I));

  size_t n = F.size();
  // Assignment order: breadth-first over the Gaifman graph so tuples become
  // fully decided (and thus checkable) as early as possible.
  auto adj = gaifman_adjacency(F);
  std::vector<int> order;
  {
    std::vector<bool> seen(n, false);
    for (size_t s = 0; s < n; ++s) {
      if (seen[s]) continue;
      std::queue<int> q;
      q.push((int)s);
      seen[s] = true;
      while (!q.empty()) {
        int i = q.front();
        q.pop();
        order.push_back(i);
        for (Vertex w : adj[F.verts[i]]) {
          int j = F.pos(w);
          if (!seen[j]) {
            seen[j] = true;
            q.push(j);
          }
        }
      }
    }
  }
  // Irreducible parts indexed by the order-position at which they complete.
  std::vector<int> order_rank(n);
  for (size_t k = 0; k < n; ++k) order_rank[order[k]] = (int)k;
  std::vector<std::vector<size_t>> complete_at(n);
  for (size_t ii = 0; ii < irr.size(); ++ii) {
    int last = -1;
    for (Vertex v : irr[ii]) last = std::max(last, order_rank[F.pos(v)]);
    complete_at[last].push_back(ii);
  }

  // Per-vertex incident tuples for early forward checks.
  std::vector<std::vector<std::pair<int, const Tuple*>>> inc(n);
  for (size_t r = 0; r < F.lang.nrel(); ++r)
    for (const Tuple& t : F.rel[r]) {
      std::set<int> ps;
      for (Vertex v : t) ps.insert(F.pos(v));
      for (int p : ps) inc[p].push_back({(int)r, &t});
    }

  for (const SymbolPerm& g : F.lang.group) {
    std::map<Vertex, Vertex> cur;
    std::function<bool(size_t)> rec = [&](size_t k) -> bool {
      if (k == n) {
        Morphism m{g, cur};
        return (bool)check_morphism(m, F, B, MorphKind::hom_embedding, caps);
      }
      int pv = order[k];
      Vertex v = F.verts[pv];
      for (Vertex w : B.verts) {
        budget.spend("exists_homomorphism_embedding");
        cur[v] = w;
        bool ok = true;
        for (const auto& [r, tp] : inc[pv]) {
          bool full = true;
          const Tuple& t = *tp;
          Tuple mapped(t.size());
          for (size_t q = 0; q < t.size(); ++q) {
            auto it = cur.find(t[q]);
            if (it == cur.end()) {
              full = false;
              break;
            }
            mapped[q] = it->second;
          }
          if (full && !B.rel[g.rel_map[r]].count(mapped)) {
            ok = false;
            break;
          }
        }
        if (ok) {
          for (size_t f = 0; f < F.lang.nfun() && ok; ++f) {
            for (Vertex y : F.fun_image((int)f, v)) {
              auto it = cur.find(y);
              if (it != cur.end() && !B.fun_image(g.fun_map[f], w).count(it->second)) {
                ok = false;
                break;
              }
            }
            for (const auto& [x, ys] : F.fun[f]) {
              if (!ys.count(v)) continue;
              auto it = cur.find(x);
              if (it != cur.end() && !B.fun_image(g.fun_map[f], it->second).count(w)) {
                ok = false;
                break;
              }
            }
          }
        }
        if (ok) {
          for (size_t ii : complete_at[k]) {
            Morphism mi;
            mi.perm = g;
            std::set<Vertex> used;
            bool inj = true;
            for (Vertex x : irr[ii]) {
              Vertex y = cur.at(x);
              mi.vmap[x] = y;
              if (!used.insert(y).second) {
                inj = false;
                break;
              }
            }
            if (!inj || !check_morphism(mi, irr_sub[ii], B, MorphKind::embedding, caps)) {
              ok = false;
              break;
            }
          }
        }
        if (ok && rec(k + 1)) return true;
        cur.erase(v);
      }
      return false;
    };
    if (rec(0)) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Order-preserving extension
// ---------------------------------------------------------------------------

std::map<int, int> order_preserving_extension(const std::vector<int>& carrier,
                                              const std::map<int, int>& p) {
  std::set<int> cset(carrier.begin(), carrier.end());
  if (cset.size() != carrier.size()) throw input_error("carrier has repeated elements");
  std::set<int> dom, rng;
  for (const auto& [x, y] : p) {
    if (!cset.count(x) || !cset.count(y))
      throw input_error("partial map leaves the carrier");
    dom.insert(x);
    if (!rng.insert(y).second) throw input_error("partial map is not injective");
  }
  std::vector<int> X, Y;
  for (int v : carrier) {
    if (!dom.count(v)) X.push_back(v);
    if (!rng.count(v)) Y.push_back(v);
  }
  std::map<int, int> total = p;
  for (size_t i = 0; i < X.size(); ++i) total[X[i]] = Y[i];
  return total;
}

}  // namespace eppa
