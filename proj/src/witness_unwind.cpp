// Construction of the cycle-unwinding witness layer.
//
// Layout invariants kept by this file:
//   * CycleIndex::containing has an entry for every vertex of B0, ascending.
//   * CycleIndex::cycles lists every rotation and reflection of an induced
//     cycle separately, sorted by (length, lexicographic).
//   * A valuation's vals vector is parallel to containing[owner].
//   * Witness ids are dense 0..N-1, grouped by owner in B0 vertex order,
//     then in lexicographic order of the valuation choices.
//   * Every witness vertex carries one valuation per member of the closure
//     of its owner; restriction to a member's closure is again a vertex.

#include "eppa/witness_unwind.hpp"

#include <algorithm>
#include <deque>
#include <functional>

namespace eppa {

// ---------------------------------------------------------------------------
// Edge-graph helpers
// ---------------------------------------------------------------------------

std::map<Vertex, VertexSet> relation_adjacency(const Structure& S, int r) {
  if (r < 0 || (size_t)r >= S.lang.nrel())
    throw input_error("relation_adjacency: relation index out of range");
  if (S.lang.rel_arity[(size_t)r] != 2)
    throw input_error("relation_adjacency: relation is not binary");
  std::map<Vertex, VertexSet> adj;
  for (Vertex v : S.verts) adj[v];
  for (const Tuple& t : S.rel[(size_t)r]) {
    if (t[0] == t[1]) continue;
    adj[t[0]].insert(t[1]);
    adj[t[1]].insert(t[0]);
  }
  return adj;
}

std::optional<Tuple> find_induced_long_cycle(const std::map<Vertex, VertexSet>& adj) {
  // Any induced cycle v=c2, x=c1, y=c3, c4..ck yields a neighbour pair x, y
  // of v that is non-adjacent and joined by a path avoiding the closed
  // neighbourhood of v; conversely the shortest such path closes, together
  // with v, to an induced cycle of length >= 4.
  for (const auto& [v, nv] : adj) {
    for (auto xi = nv.begin(); xi != nv.end(); ++xi) {
      auto yi = xi;
      for (++yi; yi != nv.end(); ++yi) {
        Vertex x = *xi, y = *yi;
        if (adj.at(x).count(y)) continue;
        std::map<Vertex, Vertex> parent;
        parent[x] = x;
        std::deque<Vertex> queue{x};
        while (!queue.empty() && !parent.count(y)) {
          Vertex u = queue.front();
          queue.pop_front();
          for (Vertex w : adj.at(u)) {
            if (parent.count(w)) continue;
            if (w != y && (w == v || nv.count(w))) continue;
            parent[w] = u;
            queue.push_back(w);
          }
        }
        if (!parent.count(y)) continue;
        Tuple tail;  // y back to x
        for (Vertex u = y; u != x; u = parent.at(u)) tail.push_back(u);
        tail.push_back(x);
        Tuple out{v};
        out.insert(out.end(), tail.rbegin(), tail.rend());
        return out;
      }
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Bad cycle sequences
// ---------------------------------------------------------------------------

CycleIndex enumerate_bad_cycle_sequences(const Structure& B0, int e_rel,
                                         const Caps& caps) {
  std::map<Vertex, VertexSet> adj = relation_adjacency(B0, e_rel);
  for (const Tuple& t : B0.rel[(size_t)e_rel]) {
    if (t[0] == t[1])
      throw input_error("enumerate_bad_cycle_sequences: edge relation has a loop");
    if (!B0.rel[(size_t)e_rel].count({t[1], t[0]}))
      throw input_error("enumerate_bad_cycle_sequences: edge relation is not symmetric");
  }

  CycleIndex out;
  out.e_rel = e_rel;
  for (Vertex v : B0.verts) out.containing[v];

  Budget budget(caps);

  // One canonical tuple per induced cycle: starts at its minimal vertex, and
  // the second entry is kept below the last to fix one direction.  The grown
  // path stays induced, with only its second vertex adjacent to the start.
  std::vector<Tuple> canon;
  Tuple path;
  std::function<void()> grow = [&]() {
    budget.spend("cycle sequence enumeration");
    Vertex s = path[0];
    for (Vertex w : adj.at(path.back())) {
      if (w <= s) continue;
      bool used = false;
      for (Vertex u : path) used = used || u == w;
      if (used) continue;
      bool chord = false;
      for (size_t i = 1; i + 1 < path.size() && !chord; ++i)
        chord = adj.at(w).count(path[i]) != 0;
      if (chord) continue;
      if (path.size() >= 2 && adj.at(w).count(s)) {
        // closing vertex; extending past it would leave the chord w ~ s
        if (path.size() >= 3 && path[1] < w) {
          Tuple c = path;
          c.push_back(w);
          canon.push_back(std::move(c));
        }
        continue;
      }
      path.push_back(w);
      grow();
      path.pop_back();
    }
  };
  for (Vertex s : B0.verts) {
    path.assign(1, s);
    grow();
  }

  for (const Tuple& c : canon) {
    int k = (int)c.size();
    for (int rot = 0; rot < k; ++rot)
      for (int dir : {1, -1}) {
        Tuple seq((size_t)k);
        for (int i = 0; i < k; ++i) seq[(size_t)i] = c[(size_t)((rot + dir * i + k) % k)];
        out.cycles.push_back(std::move(seq));
      }
  }
  std::sort(out.cycles.begin(), out.cycles.end(), [](const Tuple& a, const Tuple& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });

  out.positions.resize(out.cycles.size());
  for (size_t c = 0; c < out.cycles.size(); ++c)
    for (size_t i = 0; i < out.cycles[c].size(); ++i) {
      out.positions[c][out.cycles[c][i]] = (int)i;
      out.containing[out.cycles[c][i]].push_back((int)c);
    }
  return out;
}

// ---------------------------------------------------------------------------
// Genericity
// ---------------------------------------------------------------------------

bool generic_pair(const CycleIndex& cycles, const UnwindValuation& a,
                  const UnwindValuation& b) {
  if (a.owner == b.owner) return a.vals == b.vals;
  const std::vector<int>& ca = cycles.containing.at(a.owner);
  const std::vector<int>& cb = cycles.containing.at(b.owner);
  size_t i = 0, j = 0;
  while (i < ca.size() && j < cb.size()) {
    if (ca[i] == cb[j]) {
      size_t c = (size_t)ca[i];
      int k = (int)cycles.cycles[c].size();
      int pa = cycles.positions[c].at(a.owner);
      int pb = cycles.positions[c].at(b.owner);
      int lo = std::min(pa, pb), hi = std::max(pa, pb);
      if (hi - lo == 1) {
        // consecutive on the sequence: values must agree
        if (a.vals[i] != b.vals[j]) return false;
      } else if (lo == 0 && hi == k - 1) {
        // the sequence's two ends: values must differ
        if (a.vals[i] == b.vals[j]) return false;
      } else {
        return false;  // owners share the sequence without being adjacent on it
      }
      ++i;
      ++j;
    } else if (ca[i] < cb[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return true;
}

bool is_generic(const CycleIndex& cycles, const UnwindSet& S) {
  for (auto i = S.begin(); i != S.end(); ++i) {
    auto j = i;
    for (++j; j != S.end(); ++j)
      if (!generic_pair(cycles, *i, *j)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// UnwindWitness accessors
// ---------------------------------------------------------------------------

Vertex UnwindWitness::vertex_id(Vertex x, const UnwindSet& V) const {
  auto it = index.find(std::make_pair(x, V));
  if (it == index.end())
    throw input_error("UnwindWitness::vertex_id: no witness vertex with that owner and valuation structure");
  return it->second;
}

const UnwindValuation& UnwindWitness::chi(Vertex id) const {
  if (id < 0 || (size_t)id >= valuation.size())
    throw input_error("UnwindWitness::chi: unknown witness vertex");
  for (const UnwindValuation& fv : valuation[(size_t)id])
    if (fv.owner == projection[(size_t)id]) return fv;
  throw std::logic_error("UnwindWitness::chi: owner valuation missing");
}

bool UnwindWitness::generic_vertices(Vertex id1, Vertex id2) const {
  if (id1 < 0 || (size_t)id1 >= valuation.size() || id2 < 0 ||
      (size_t)id2 >= valuation.size())
    throw input_error("UnwindWitness::generic_vertices: unknown witness vertex");
  if (id1 == id2) return true;
  for (const UnwindValuation& a : valuation[(size_t)id1])
    for (const UnwindValuation& b : valuation[(size_t)id2])
      if (!generic_pair(cycles, a, b)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

std::string edge_relation_objection(const Structure& A, const Structure& B0, int r) {
  const Language& L = A.lang;
  if (r < 0 || (size_t)r >= L.nrel()) return "edge relation index out of range";
  if (L.rel_arity[(size_t)r] != 2) return "edge relation is not binary";
  for (const SymbolPerm& g : L.group)
    if (g.rel_map[(size_t)r] != r)
      return "edge relation is not fixed by every symbol permutation";
  for (const Tuple& t : B0.rel[(size_t)r]) {
    if (t[0] == t[1]) return "edge relation has a loop on the witness";
    if (!B0.rel[(size_t)r].count({t[1], t[0]}))
      return "edge relation is not symmetric on the witness";
  }
  for (Vertex u : A.verts)
    for (Vertex v : A.verts)
      if (u != v && !A.rel[(size_t)r].count({u, v}))
        return "edge relation is not complete on the base";
  return "";
}

int resolve_edge_relation(const Structure& A, const Structure& B0, int e_rel,
                          const std::string& who) {
  if (e_rel < 0) {
    std::vector<int> candidates;
    for (int r = 0; r < (int)A.lang.nrel(); ++r)
      if (edge_relation_objection(A, B0, r).empty()) candidates.push_back(r);
    if (candidates.empty())
      throw input_error(
          who +
          ": no relation qualifies as the edge relation "
          "(binary, fixed by the whole symbol group, a loopless undirected graph "
          "on the witness, complete on the base)");
    if (candidates.size() > 1)
      throw input_error(who + ": several relations qualify as the edge relation; pass one explicitly");
    return candidates[0];
  }
  std::string why = edge_relation_objection(A, B0, e_rel);
  if (!why.empty()) throw input_error(who + ": " + why);
  return e_rel;
}

UnwindWitness build_unwound_witness(const Structure& A, Witness b0, int e_rel,
                                    const Caps& caps) {
  if (A.verts.empty())
    throw input_error("build_unwound_witness: base structure has no vertices");
  if (!(b0.base == A))
    throw input_error("build_unwound_witness: bundle is not a witness bundle for the base structure");
  if (!(b0.witness.lang == A.lang))
    throw input_error("build_unwound_witness: bundle witness is over a different language");
  {
    CheckResult emb = check_morphism(b0.psi, A, b0.witness, MorphKind::embedding, caps);
    if (!emb)
      throw input_error("build_unwound_witness: bundle psi is not an embedding: " + emb.violation);
  }

  UnwindWitness W;
  W.base = A;
  W.b0 = std::move(b0);
  const Structure& B0 = W.b0.witness;

  e_rel = resolve_edge_relation(A, B0, e_rel, "build_unwound_witness");

  W.cycles = enumerate_bad_cycle_sequences(B0, e_rel, caps);

  Budget budget(caps);

  std::map<Vertex, VertexSet> cl;
  for (Vertex x : B0.verts) cl[x] = closure(B0, {x});

  // Vertices: per owner, a DFS over the closure members in ascending order;
  // per member, {0,1} valuation vectors in lexicographic order, pruned
  // against the members already chosen.
  for (Vertex x : B0.verts) {
    std::vector<Vertex> members(cl[x].begin(), cl[x].end());
    std::vector<UnwindValuation> chosen;
    std::function<void(size_t)> grow = [&](size_t k) {
      if (k == members.size()) {
        if ((long long)W.projection.size() >= caps.max_witness_vertices)
          throw resource_limit_error("build_unwound_witness: witness vertex cap exceeded");
        UnwindSet V(chosen.begin(), chosen.end());
        Vertex id = (Vertex)W.projection.size();
        W.projection.push_back(x);
        W.valuation.push_back(V);
        W.index.emplace(std::make_pair(x, std::move(V)), id);
        return;
      }
      Vertex y = members[k];
      const std::vector<int>& through = W.cycles.containing.at(y);
      UnwindValuation fv{y, std::vector<int>(through.size(), 0)};
      for (;;) {
        budget.spend("unwind valuation enumeration");
        bool fits = true;
        for (const UnwindValuation& prev : chosen)
          if (!generic_pair(W.cycles, prev, fv)) {
            fits = false;
            break;
          }
        if (fits) {
          chosen.push_back(fv);
          grow(k + 1);
          chosen.pop_back();
        }
        size_t i = fv.vals.size();
        while (i > 0 && fv.vals[i - 1] == 1) {
          fv.vals[i - 1] = 0;
          --i;
        }
        if (i == 0) break;
        ++fv.vals[i - 1];
      }
    };
    grow(0);
  }

  const size_t N = W.projection.size();

  Structure B;
  B.lang = A.lang;
  B.verts.resize(N);
  for (size_t i = 0; i < N; ++i) B.verts[i] = (Vertex)i;
  B.rel.assign(A.lang.nrel(), {});
  B.fun.assign(A.lang.nfun(), {});

  std::map<Vertex, std::vector<Vertex>> ids_of;
  for (Vertex x : B0.verts) ids_of[x];
  for (size_t i = 0; i < N; ++i) ids_of[W.projection[i]].push_back((Vertex)i);

  // Relations: fiber expansion of every B0 tuple, filtered by genericity.
  for (size_t r = 0; r < B0.lang.nrel(); ++r) {
    for (const Tuple& t : B0.rel[r]) {
      std::vector<const std::vector<Vertex>*> fibers(t.size());
      bool dead = false;
      for (size_t i = 0; i < t.size() && !dead; ++i) {
        fibers[i] = &ids_of.at(t[i]);
        dead = fibers[i]->empty();
      }
      if (dead) continue;
      Tuple pick(t.size());
      std::vector<size_t> odo(t.size(), 0);
      for (;;) {
        budget.spend("unwind relation expansion");
        for (size_t i = 0; i < t.size(); ++i) pick[i] = (*fibers[i])[odo[i]];
        bool ok = true;
        for (size_t i = 0; i < pick.size() && ok; ++i)
          for (size_t j = i + 1; j < pick.size() && ok; ++j)
            ok = W.generic_vertices(pick[i], pick[j]);
        if (ok) B.rel[r].insert(pick);
        size_t i = odo.size();
        while (i > 0 && odo[i - 1] + 1 == fibers[i - 1]->size()) {
          odo[i - 1] = 0;
          --i;
        }
        if (i == 0) break;
        ++odo[i - 1];
      }
    }
  }

  // Functions: images restrict the valuation structure to the image's closure.
  for (size_t i = 0; i < N; ++i) {
    Vertex x = W.projection[i];
    const UnwindSet& V = W.valuation[i];
    for (size_t f = 0; f < B0.lang.nfun(); ++f) {
      for (Vertex z : B0.fun_image((int)f, x)) {
        UnwindSet U;
        for (const UnwindValuation& fv : V)
          if (cl.at(z).count(fv.owner)) U.insert(fv);
        auto it = W.index.find(std::make_pair(z, U));
        if (it == W.index.end())
          throw std::logic_error("build_unwound_witness: function image is not a witness vertex");
        B.fun[f][(Vertex)i].insert(it->second);
      }
    }
  }
  B.finalize();
  W.witness = std::move(B);

  // psi: the valuation of closure member y values a sequence 1 exactly when
  // y is its first entry and its last entry lies in the base image.
  VertexSet image;
  for (const auto& [a, v] : W.b0.psi.vmap) image.insert(v);
  W.psi.perm = identity_perm(A.lang.nrel(), A.lang.nfun());
  for (Vertex a : A.verts) {
    Vertex x0 = W.b0.psi(a);
    UnwindSet V;
    for (Vertex y : cl.at(x0)) {
      if (!image.count(y))
        throw std::logic_error("build_unwound_witness: closure of a base vertex leaves the base image");
      const std::vector<int>& through = W.cycles.containing.at(y);
      UnwindValuation fv{y, std::vector<int>(through.size(), 0)};
      for (size_t i = 0; i < through.size(); ++i) {
        const Tuple& c = W.cycles.cycles[(size_t)through[i]];
        fv.vals[i] = (c[0] == y && image.count(c.back())) ? 1 : 0;
      }
      V.insert(std::move(fv));
    }
    auto it = W.index.find(std::make_pair(x0, V));
    if (it == W.index.end())
      throw std::logic_error("build_unwound_witness: canonical base valuation is not a witness vertex");
    W.psi.vmap[a] = it->second;
  }
  {
    CheckResult emb = check_morphism(W.psi, A, W.witness, MorphKind::embedding, caps);
    if (!emb)
      throw std::logic_error("build_unwound_witness: psi is not an embedding: " + emb.violation);
  }
  for (const auto& [a1, u1] : W.psi.vmap)
    for (const auto& [a2, u2] : W.psi.vmap)
      if (!W.generic_vertices(u1, u2))
        throw std::logic_error("build_unwound_witness: psi(A) is not generic");

  return W;
}

// ---------------------------------------------------------------------------
// Extension
// ---------------------------------------------------------------------------

UnwindExtension extend_unwound_pa(const UnwindWitness& W, const Morphism& phi,
                                  const Morphism& phihat, const Caps& caps) {
  const Structure& B = W.witness;
  const Structure& B0 = W.b0.witness;

  for (const auto& [u, v] : phi.vmap)
    if (!B.has_vertex(u) || !B.has_vertex(v))
      throw input_error("extend_unwound_pa: phi mentions unknown witness vertices");
  {
    CheckResult pa = check_morphism(phi, B, B, MorphKind::partial_automorphism, caps);
    if (!pa)
      throw input_error("extend_unwound_pa: phi is not a partial automorphism: " + pa.violation);
  }
  {
    std::vector<Vertex> dom, rng;
    for (const auto& [u, v] : phi.vmap) {
      dom.push_back(u);
      rng.push_back(v);
    }
    for (size_t i = 0; i < dom.size(); ++i)
      for (size_t j = i + 1; j < dom.size(); ++j) {
        if (!W.generic_vertices(dom[i], dom[j]))
          throw precondition_error("extend_unwound_pa: domain of phi is not generic");
        if (!W.generic_vertices(rng[i], rng[j]))
          throw precondition_error("extend_unwound_pa: range of phi is not generic");
      }
  }
  if (!(phihat.perm == phi.perm))
    throw input_error("extend_unwound_pa: phihat must use phi's symbol permutation");
  {
    CheckResult aut = check_morphism(phihat, B0, B0, MorphKind::automorphism, caps);
    if (!aut)
      throw input_error("extend_unwound_pa: phihat is not an automorphism of B0: " + aut.violation);
  }
  for (const auto& [u, v] : phi.vmap)
    if (phihat(W.projection[(size_t)u]) != W.projection[(size_t)v])
      throw input_error("extend_unwound_pa: phihat does not extend the projection of phi");

  // Where phihat moves each bad cycle sequence, pointwise (an automorphism
  // preserves the edge relation and induced cycles, hence badness).
  std::map<Tuple, int> cyclepos;
  for (size_t c = 0; c < W.cycles.cycles.size(); ++c) cyclepos[W.cycles.cycles[c]] = (int)c;
  std::vector<int> mapped(W.cycles.cycles.size());
  for (size_t c = 0; c < W.cycles.cycles.size(); ++c) {
    Tuple img = map_tuple(phihat.vmap, W.cycles.cycles[c]);
    auto it = cyclepos.find(img);
    if (it == cyclepos.end())
      throw std::logic_error("extend_unwound_pa: image of a bad cycle sequence is not a recorded bad cycle sequence");
    mapped[c] = it->second;
  }

  UnwindExtension E;
  E.phihat = phihat;

  // A sequence joins the flip set when some pair of phi changes its value.
  // Distinct pairs never disagree: at most two domain owners share a
  // sequence, they are then adjacent on it, and phihat keeps positions.
  std::map<int, bool> demand;
  for (const auto& [u, v] : phi.vmap) {
    const UnwindValuation& cu = W.chi(u);
    const UnwindValuation& cv = W.chi(v);
    const std::vector<int>& tu = W.cycles.containing.at(cu.owner);
    const std::vector<int>& tv = W.cycles.containing.at(cv.owner);
    for (size_t i = 0; i < tu.size(); ++i) {
      int c2 = mapped[(size_t)tu[i]];
      auto pos = std::lower_bound(tv.begin(), tv.end(), c2);
      if (pos == tv.end() || *pos != c2)
        throw std::logic_error("extend_unwound_pa: mapped bad cycle sequence misses the image owner");
      bool flip = cu.vals[i] != cv.vals[(size_t)(pos - tv.begin())];
      auto [it, inserted] = demand.emplace(tu[i], flip);
      if (!inserted && it->second != flip)
        throw std::logic_error("extend_unwound_pa: inconsistent flip demands on a bad cycle sequence");
    }
  }
  for (const auto& [c, flip] : demand)
    if (flip) E.flips.insert(c);

  // Transport of a single valuation: move the owner with phihat, move each
  // value to its sequence's image, flipping it on the flip set.
  auto transport = [&](const UnwindValuation& fv) {
    Vertex y2 = phihat(fv.owner);
    const std::vector<int>& ty = W.cycles.containing.at(fv.owner);
    const std::vector<int>& ty2 = W.cycles.containing.at(y2);
    if (ty.size() != ty2.size())
      throw std::logic_error("extend_unwound_pa: vertex and image lie in different numbers of bad cycle sequences");
    UnwindValuation out{y2, std::vector<int>(ty2.size(), 0)};
    for (size_t i = 0; i < ty.size(); ++i) {
      int c2 = mapped[(size_t)ty[i]];
      auto pos = std::lower_bound(ty2.begin(), ty2.end(), c2);
      if (pos == ty2.end() || *pos != c2)
        throw std::logic_error("extend_unwound_pa: mapped bad cycle sequence misses the image vertex");
      out.vals[(size_t)(pos - ty2.begin())] = fv.vals[i] ^ (E.flips.count(ty[i]) ? 1 : 0);
    }
    return out;
  };

  std::set<UnwindValuation> inuse;
  for (const UnwindSet& V : W.valuation) inuse.insert(V.begin(), V.end());
  std::set<UnwindValuation> imageset;
  for (const UnwindValuation& fv : inuse) {
    UnwindValuation out = transport(fv);
    if (!inuse.count(out))
      throw std::logic_error("extend_unwound_pa: transported valuation is not in use");
    imageset.insert(out);
    E.qhat.emplace(fv, std::move(out));
  }
  if (imageset.size() != inuse.size())
    throw std::logic_error("extend_unwound_pa: valuation transport is not a permutation");

  Budget budget(caps);
  E.theta.perm = phi.perm;
  for (size_t id = 0; id < W.projection.size(); ++id) {
    budget.spend("unwind extension");
    UnwindSet V2;
    for (const UnwindValuation& fv : W.valuation[id]) V2.insert(E.qhat.at(fv));
    auto it = W.index.find(std::make_pair(phihat(W.projection[id]), V2));
    if (it == W.index.end())
      throw std::logic_error("extend_unwound_pa: transported vertex is not a witness vertex");
    E.theta.vmap[(Vertex)id] = it->second;
  }
  for (const auto& [u, v] : phi.vmap)
    if (E.theta(u) != v) throw std::logic_error("extend_unwound_pa: extension disagrees with phi");
  {
    CheckResult aut = check_morphism(E.theta, B, B, MorphKind::automorphism, caps);
    if (!aut)
      throw std::logic_error("extend_unwound_pa: extension is not an automorphism: " + aut.violation);
  }
  return E;
}

// ---------------------------------------------------------------------------
// Faithfulness certification
// ---------------------------------------------------------------------------

FaithfulnessReport certify_unwind_faithfulness(const UnwindWitness& W, const Caps& caps) {
  const Structure& B0 = W.b0.witness;
  VertexSet image;
  std::map<Vertex, Vertex> back;  // B0 image vertex -> base vertex
  for (const auto& [a, v] : W.b0.psi.vmap) {
    image.insert(v);
    back[v] = a;
  }
  VertexSet psiA;
  for (const auto& [a, u] : W.psi.vmap) psiA.insert(u);

  std::vector<VertexSet> irr = enumerate_irreducible_substructures(W.witness, caps);
  FaithfulnessReport rep;
  rep.certificates.resize(irr.size());

  // Independent subproblems over immutable inputs.
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (long long k = 0; k < (long long)irr.size(); ++k) {
    FaithfulnessCertificate& cert = rep.certificates[(size_t)k];
    cert.d = irr[(size_t)k];
    try {
      cert.generic = true;
      for (auto i = cert.d.begin(); i != cert.d.end() && cert.generic; ++i) {
        auto j = i;
        for (++j; j != cert.d.end() && cert.generic; ++j)
          cert.generic = W.generic_vertices(*i, *j);
      }
      if (!cert.generic) {
        cert.note = "irreducible substructure is not generic";
        continue;
      }
      for (Vertex u : cert.d) cert.projected.insert(W.projection[(size_t)u]);
      std::optional<Morphism> fh = find_automorphism_with_image(B0, cert.projected, image, caps);
      if (!fh) {
        cert.note = "projection is bad: no automorphism of B0 carries it into the base image";
        continue;
      }
      cert.phihat = *fh;
      Morphism phi;
      phi.perm = cert.phihat.perm;
      for (Vertex u : cert.d)
        phi.vmap[u] = W.psi(back.at(cert.phihat(W.projection[(size_t)u])));
      cert.theta = extend_unwound_pa(W, phi, cert.phihat, caps).theta;
      bool inside = true;
      for (Vertex u : cert.d) inside = inside && psiA.count(cert.theta(u)) != 0;
      if (!inside) {
        cert.note = "extension does not carry the substructure into psi(A)";
        continue;
      }
      cert.ok = true;
    } catch (const std::exception& e) {
      cert.ok = false;
      cert.note = e.what();
    }
  }
  for (const FaithfulnessCertificate& c : rep.certificates) rep.ok = rep.ok && c.ok;
  return rep;
}

// ---------------------------------------------------------------------------
// The projection trichotomy
// ---------------------------------------------------------------------------

SparsenCase sparsen_case(const Structure& B, const Structure& B0, int e_rel,
                         const std::vector<Vertex>& f, const VertexSet& C) {
  std::map<Vertex, VertexSet> adj = relation_adjacency(B, e_rel);
  if ((size_t)e_rel >= B0.lang.nrel() || B0.lang.rel_arity[(size_t)e_rel] != 2)
    throw input_error("sparsen_case: edge relation is not binary on the projection target");
  for (Vertex u : C)
    if (!B.has_vertex(u) || u < 0 || (size_t)u >= f.size())
      throw input_error("sparsen_case: subset mentions vertices outside the projected structure");

  std::map<Vertex, VertexSet> sub;
  for (Vertex u : C) {
    VertexSet& nu = sub[u];
    for (Vertex w : adj.at(u))
      if (C.count(w)) nu.insert(w);
  }
  if (!find_induced_long_cycle(sub)) return SparsenCase::chordal;

  VertexSet img;
  for (Vertex u : C) img.insert(f[(size_t)u]);
  if (img.size() < C.size()) return SparsenCase::collapsed;

  auto undirected_count = [e_rel](const Structure& S, const VertexSet& X) {
    std::set<std::pair<Vertex, Vertex>> e;
    for (const Tuple& t : S.rel[(size_t)e_rel])
      if (t[0] != t[1] && X.count(t[0]) && X.count(t[1]))
        e.emplace(std::min(t[0], t[1]), std::max(t[0], t[1]));
    return e.size();
  };
  if (undirected_count(B0, img) > undirected_count(B, C)) return SparsenCase::denser;
  return SparsenCase::violated;
}

}  // namespace eppa
