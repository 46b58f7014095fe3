// Construction of the irreducible-structure-faithful witness layer.
//
// Layout invariants kept by this file:
//   * BadIndex::containing has an entry for every vertex of B0, ascending.
//   * A valuation's vals vector is parallel to containing[owner].
//   * Witness ids are dense 0..N-1, grouped by owner in B0 vertex order,
//     then in lexicographic order of the valuation choices.
//   * Every witness vertex carries one valuation per member of the closure
//     of its owner; restriction to a member's closure is again a vertex.

#include "eppa/witness_faithful.hpp"

#include <algorithm>
#include <functional>

namespace eppa {

// ---------------------------------------------------------------------------
// Genericity
// ---------------------------------------------------------------------------

bool generic_pair(const BadIndex& bads, const FaithfulValuation& a,
                  const FaithfulValuation& b) {
  if (a.owner == b.owner) return a.vals == b.vals;
  const std::vector<int>& ca = bads.containing.at(a.owner);
  const std::vector<int>& cb = bads.containing.at(b.owner);
  size_t i = 0, j = 0;
  while (i < ca.size() && j < cb.size()) {
    if (ca[i] == cb[j]) {
      if (a.vals[i] == b.vals[j]) return false;
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

bool is_generic(const BadIndex& bads, const GenericSet& S) {
  for (auto i = S.begin(); i != S.end(); ++i) {
    auto j = i;
    for (++j; j != S.end(); ++j)
      if (!generic_pair(bads, *i, *j)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// FaithfulWitness accessors
// ---------------------------------------------------------------------------

Vertex FaithfulWitness::vertex_id(Vertex x, const GenericSet& V) const {
  auto it = index.find(std::make_pair(x, V));
  if (it == index.end())
    throw input_error("FaithfulWitness::vertex_id: no witness vertex with that owner and valuation structure");
  return it->second;
}

const FaithfulValuation& FaithfulWitness::chi(Vertex id) const {
  if (id < 0 || (size_t)id >= valuation.size())
    throw input_error("FaithfulWitness::chi: unknown witness vertex");
  for (const FaithfulValuation& fv : valuation[(size_t)id])
    if (fv.owner == projection[(size_t)id]) return fv;
  throw std::logic_error("FaithfulWitness::chi: owner valuation missing");
}

bool FaithfulWitness::generic_vertices(Vertex id1, Vertex id2) const {
  if (id1 < 0 || (size_t)id1 >= valuation.size() || id2 < 0 ||
      (size_t)id2 >= valuation.size())
    throw input_error("FaithfulWitness::generic_vertices: unknown witness vertex");
  if (id1 == id2) return true;
  for (const FaithfulValuation& a : valuation[(size_t)id1])
    for (const FaithfulValuation& b : valuation[(size_t)id2])
      if (!generic_pair(bads, a, b)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Bad irreducibles
// ---------------------------------------------------------------------------

BadIndex enumerate_bad_irreducibles(const Structure& B0, const VertexSet& image,
                                    const Caps& caps) {
  for (Vertex v : image)
    if (!B0.has_vertex(v))
      throw input_error("enumerate_bad_irreducibles: image vertex is not in the structure");
  BadIndex out;
  for (Vertex v : B0.verts) out.containing[v];
  for (const VertexSet& I : enumerate_irreducible_substructures(B0, caps)) {
    std::optional<Morphism> f = find_automorphism_with_image(B0, I, image, caps);
    if (!f) {
      int idx = (int)out.bads.size();
      out.bads.push_back(I);
      for (Vertex v : I) out.containing[v].push_back(idx);
    }
    out.searched.emplace(I, std::move(f));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

FaithfulWitness build_faithful_witness(const Structure& A, Witness b0, const Caps& caps) {
  if (A.verts.empty())
    throw input_error("build_faithful_witness: base structure has no vertices");
  if (!(b0.base == A))
    throw input_error("build_faithful_witness: bundle is not a witness bundle for the base structure");
  if (!(b0.witness.lang == A.lang))
    throw input_error("build_faithful_witness: bundle witness is over a different language");
  {
    CheckResult emb = check_morphism(b0.psi, A, b0.witness, MorphKind::embedding, caps);
    if (!emb)
      throw input_error("build_faithful_witness: bundle psi is not an embedding: " + emb.violation);
  }

  FaithfulWitness W;
  W.base = A;
  W.b0 = std::move(b0);
  const Structure& B0 = W.b0.witness;

  VertexSet image;
  for (const auto& [a, v] : W.b0.psi.vmap) image.insert(v);

  W.bads = enumerate_bad_irreducibles(B0, image, caps);

  Budget budget(caps);

  std::map<Vertex, VertexSet> cl;
  for (Vertex x : B0.verts) cl[x] = closure(B0, {x});

  // Vertices: per owner, a DFS over the closure members in ascending order;
  // per member, valuation vectors in lexicographic order, pruned against the
  // members already chosen.
  for (Vertex x : B0.verts) {
    std::vector<Vertex> members(cl[x].begin(), cl[x].end());
    std::vector<FaithfulValuation> chosen;
    std::function<void(size_t)> grow = [&](size_t k) {
      if (k == members.size()) {
        if ((long long)W.projection.size() >= caps.max_witness_vertices)
          throw resource_limit_error("build_faithful_witness: witness vertex cap exceeded");
        GenericSet V(chosen.begin(), chosen.end());
        Vertex id = (Vertex)W.projection.size();
        W.projection.push_back(x);
        W.valuation.push_back(V);
        W.index.emplace(std::make_pair(x, std::move(V)), id);
        return;
      }
      Vertex y = members[k];
      const std::vector<int>& through = W.bads.containing.at(y);
      std::vector<int> limit(through.size());
      for (size_t i = 0; i < through.size(); ++i) {
        limit[i] = (int)W.bads.bads[(size_t)through[i]].size() - 1;
        if (limit[i] < 1) return;  // a bad irreducible of size 1 admits no valuation
      }
      FaithfulValuation fv{y, std::vector<int>(through.size(), 1)};
      for (;;) {
        budget.spend("faithful valuation enumeration");
        bool fits = true;
        for (const FaithfulValuation& prev : chosen)
          if (!generic_pair(W.bads, prev, fv)) {
            fits = false;
            break;
          }
        if (fits) {
          chosen.push_back(fv);
          grow(k + 1);
          chosen.pop_back();
        }
        size_t i = fv.vals.size();
        while (i > 0 && fv.vals[i - 1] == limit[i - 1]) {
          fv.vals[i - 1] = 1;
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
        budget.spend("faithful relation expansion");
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
    const GenericSet& V = W.valuation[i];
    for (size_t f = 0; f < B0.lang.nfun(); ++f) {
      for (Vertex z : B0.fun_image((int)f, x)) {
        GenericSet U;
        for (const FaithfulValuation& fv : V)
          if (cl.at(z).count(fv.owner)) U.insert(fv);
        auto it = W.index.find(std::make_pair(z, U));
        if (it == W.index.end())
          throw std::logic_error("build_faithful_witness: function image is not a witness vertex");
        B.fun[f][(Vertex)i].insert(it->second);
      }
    }
  }
  B.finalize();
  W.witness = std::move(B);

  // psi: per bad irreducible, members inside the base image get 1, 2, ... in
  // ascending vertex order; the copy of a base vertex uses those values.
  std::vector<std::map<Vertex, int>> fI(W.bads.bads.size());
  for (size_t b = 0; b < W.bads.bads.size(); ++b) {
    int next = 1;
    for (Vertex v : W.bads.bads[b])
      if (image.count(v)) fI[b][v] = next++;
    if (next > (int)W.bads.bads[b].size())
      throw std::logic_error("build_faithful_witness: bad irreducible lies inside the base image");
  }
  W.psi.perm = identity_perm(A.lang.nrel(), A.lang.nfun());
  for (Vertex a : A.verts) {
    Vertex x0 = W.b0.psi(a);
    GenericSet V;
    for (Vertex y : cl.at(x0)) {
      if (!image.count(y))
        throw std::logic_error("build_faithful_witness: closure of a base vertex leaves the base image");
      const std::vector<int>& through = W.bads.containing.at(y);
      FaithfulValuation fv{y, std::vector<int>(through.size(), 0)};
      for (size_t i = 0; i < through.size(); ++i)
        fv.vals[i] = fI[(size_t)through[i]].at(y);
      V.insert(std::move(fv));
    }
    auto it = W.index.find(std::make_pair(x0, V));
    if (it == W.index.end())
      throw std::logic_error("build_faithful_witness: canonical base valuation is not a witness vertex");
    W.psi.vmap[a] = it->second;
  }
  {
    CheckResult emb = check_morphism(W.psi, A, W.witness, MorphKind::embedding, caps);
    if (!emb)
      throw std::logic_error("build_faithful_witness: psi is not an embedding: " + emb.violation);
  }
  for (const auto& [a1, u1] : W.psi.vmap)
    for (const auto& [a2, u2] : W.psi.vmap)
      if (!W.generic_vertices(u1, u2))
        throw std::logic_error("build_faithful_witness: psi(A) is not generic");

  return W;
}

// ---------------------------------------------------------------------------
// Extension
// ---------------------------------------------------------------------------

FaithfulExtension extend_faithful_pa(const FaithfulWitness& W, const Morphism& phi,
                                     const Morphism& phihat, const Caps& caps) {
  const Structure& B = W.witness;
  const Structure& B0 = W.b0.witness;

  for (const auto& [u, v] : phi.vmap)
    if (!B.has_vertex(u) || !B.has_vertex(v))
      throw input_error("extend_faithful_pa: phi mentions unknown witness vertices");
  {
    CheckResult pa = check_morphism(phi, B, B, MorphKind::partial_automorphism, caps);
    if (!pa)
      throw input_error("extend_faithful_pa: phi is not a partial automorphism: " + pa.violation);
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
          throw precondition_error("extend_faithful_pa: domain of phi is not generic");
        if (!W.generic_vertices(rng[i], rng[j]))
          throw precondition_error("extend_faithful_pa: range of phi is not generic");
      }
  }
  if (!(phihat.perm == phi.perm))
    throw input_error("extend_faithful_pa: phihat must use phi's symbol permutation");
  {
    CheckResult aut = check_morphism(phihat, B0, B0, MorphKind::automorphism, caps);
    if (!aut)
      throw input_error("extend_faithful_pa: phihat is not an automorphism of B0: " + aut.violation);
  }
  for (const auto& [u, v] : phi.vmap)
    if (phihat(W.projection[(size_t)u]) != W.projection[(size_t)v])
      throw input_error("extend_faithful_pa: phihat does not extend the projection of phi");

  // Where phihat moves each bad irreducible (an automorphism keeps badness).
  std::map<VertexSet, int> badpos;
  for (size_t b = 0; b < W.bads.bads.size(); ++b) badpos[W.bads.bads[b]] = (int)b;
  std::vector<int> mapped(W.bads.bads.size());
  for (size_t b = 0; b < W.bads.bads.size(); ++b) {
    VertexSet img;
    for (Vertex v : W.bads.bads[b]) img.insert(phihat(v));
    auto it = badpos.find(img);
    if (it == badpos.end())
      throw std::logic_error("extend_faithful_pa: image of a bad irreducible is not a recorded bad irreducible");
    mapped[b] = it->second;
  }

  FaithfulExtension E;
  E.phihat = phihat;

  // Partial value maps, read off the owner valuations of the mapped pairs.
  // phi's domain is closed, so every valuation inside a domain valuation
  // structure is itself the owner valuation of another domain vertex.
  for (const auto& [u, v] : phi.vmap) {
    const FaithfulValuation& cu = W.chi(u);
    const FaithfulValuation& cv = W.chi(v);
    const std::vector<int>& tu = W.bads.containing.at(cu.owner);
    const std::vector<int>& tv = W.bads.containing.at(cv.owner);
    for (size_t i = 0; i < tu.size(); ++i) {
      int b2 = mapped[(size_t)tu[i]];
      auto pos = std::lower_bound(tv.begin(), tv.end(), b2);
      if (pos == tv.end() || *pos != b2)
        throw std::logic_error("extend_faithful_pa: mapped bad irreducible misses the image owner");
      int source = cu.vals[i];
      int target = cv.vals[(size_t)(pos - tv.begin())];
      auto [it, inserted] = E.flips.tau[tu[i]].emplace(source, target);
      if (!inserted && it->second != target)
        throw std::logic_error("extend_faithful_pa: inconsistent value map on a bad irreducible");
    }
  }
  for (const auto& [b, t] : E.flips.tau) {
    std::set<int> seen;
    for (const auto& [s, val] : t)
      if (!seen.insert(val).second)
        throw std::logic_error("extend_faithful_pa: value map on a bad irreducible is not injective");
  }

  // Order-preserving completion per bad irreducible.
  for (size_t b = 0; b < W.bads.bads.size(); ++b) {
    std::vector<int> carrier;
    for (int val = 1; val <= (int)W.bads.bads[b].size() - 1; ++val) carrier.push_back(val);
    std::map<int, int> t;
    auto it = E.flips.tau.find((int)b);
    if (it != E.flips.tau.end()) t = it->second;
    E.flips.theta[(int)b] = order_preserving_extension(carrier, t);
  }

  // Transport of a single valuation: move the owner with phihat, each value
  // with the completion attached to its bad irreducible.
  auto transport = [&](const FaithfulValuation& fv) {
    Vertex y2 = phihat(fv.owner);
    const std::vector<int>& ty = W.bads.containing.at(fv.owner);
    const std::vector<int>& ty2 = W.bads.containing.at(y2);
    if (ty.size() != ty2.size())
      throw std::logic_error("extend_faithful_pa: vertex and image lie in different numbers of bad irreducibles");
    FaithfulValuation out{y2, std::vector<int>(ty2.size(), 0)};
    for (size_t i = 0; i < ty.size(); ++i) {
      int b2 = mapped[(size_t)ty[i]];
      auto pos = std::lower_bound(ty2.begin(), ty2.end(), b2);
      if (pos == ty2.end() || *pos != b2)
        throw std::logic_error("extend_faithful_pa: mapped bad irreducible misses the image vertex");
      out.vals[(size_t)(pos - ty2.begin())] = E.flips.theta.at(ty[i]).at(fv.vals[i]);
    }
    return out;
  };

  std::set<FaithfulValuation> inuse;
  for (const GenericSet& V : W.valuation) inuse.insert(V.begin(), V.end());
  std::set<FaithfulValuation> imageset;
  for (const FaithfulValuation& fv : inuse) {
    FaithfulValuation out = transport(fv);
    if (!inuse.count(out))
      throw std::logic_error("extend_faithful_pa: transported valuation is not in use");
    imageset.insert(out);
    E.flips.qhat.emplace(fv, std::move(out));
  }
  if (imageset.size() != inuse.size())
    throw std::logic_error("extend_faithful_pa: valuation transport is not a permutation");

  Budget budget(caps);
  E.theta.perm = phi.perm;
  for (size_t id = 0; id < W.projection.size(); ++id) {
    budget.spend("faithful extension");
    GenericSet V2;
    for (const FaithfulValuation& fv : W.valuation[id]) V2.insert(E.flips.qhat.at(fv));
    auto it = W.index.find(std::make_pair(phihat(W.projection[id]), V2));
    if (it == W.index.end())
      throw std::logic_error("extend_faithful_pa: transported vertex is not a witness vertex");
    E.theta.vmap[(Vertex)id] = it->second;
  }
  for (const auto& [u, v] : phi.vmap)
    if (E.theta(u) != v) throw std::logic_error("extend_faithful_pa: extension disagrees with phi");
  {
    CheckResult aut = check_morphism(E.theta, B, B, MorphKind::automorphism, caps);
    if (!aut)
      throw std::logic_error("extend_faithful_pa: extension is not an automorphism: " + aut.violation);
  }
  return E;
}

// ---------------------------------------------------------------------------
// Faithfulness certification
// ---------------------------------------------------------------------------

FaithfulnessReport certify_faithfulness(const FaithfulWitness& W, const Caps& caps) {
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
      std::optional<Morphism> fh;
      auto memo = W.bads.searched.find(cert.projected);
      if (memo != W.bads.searched.end())
        fh = memo->second;
      else
        fh = find_automorphism_with_image(B0, cert.projected, image, caps);
      if (!fh) {
        cert.note = "projection is bad: no automorphism of B0 carries it into the base image";
        continue;
      }
      cert.phihat = *fh;
      Morphism phi;
      phi.perm = cert.phihat.perm;
      for (Vertex u : cert.d)
        phi.vmap[u] = W.psi(back.at(cert.phihat(W.projection[(size_t)u])));
      cert.theta = extend_faithful_pa(W, phi, cert.phihat, caps).theta;
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

}  // namespace eppa
