// witness_graph.cpp — see witness_graph.hpp for the construction summary.

#include "eppa/witness_graph.hpp"

#include <algorithm>

namespace eppa {

namespace {

void require_graph(const Structure& A) {
  if (A.lang.nrel() != 1 || A.lang.nfun() != 0 || A.lang.rel_arity[0] != 2 ||
      A.lang.group.size() != 1)
    throw input_error("graph witness requires a single binary relation and trivial group");
  if (!is_symmetric_irreflexive(A, 0))
    throw input_error("graph witness requires a symmetric irreflexive edge relation");
}

std::pair<Vertex, Vertex> ordered_pair(Vertex a, Vertex b) {
  return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

}  // namespace

uint8_t GraphWitness::bit_at(Vertex b, Vertex y) const {
  Vertex x = owner(b);
  int px = base.pos(x), py = base.pos(y);
  if (px == py) throw input_error("valuation bit requested at the owner vertex");
  return bits[(size_t)b][py < px ? (size_t)py : (size_t)py - 1];
}

Vertex GraphWitness::vertex_id(Vertex x, const std::vector<uint8_t>& b) const {
  size_t m = n() - 1;
  if (b.size() != m) throw input_error("valuation bit-vector has the wrong length");
  uint64_t mask = 0;
  for (size_t j = 0; j < m; ++j) mask = (mask << 1) | (b[j] ? 1 : 0);
  return (Vertex)((uint64_t)base.pos(x) * ((uint64_t)1 << m) + mask);
}

GraphWitness build_graph_witness(const Structure& A) {
  require_graph(A);
  size_t n = A.size();
  if (n == 0) throw input_error("graph witness requires a nonempty graph");
  size_t m = n - 1;
  uint64_t per_owner = (uint64_t)1 << m;
  uint64_t total = (uint64_t)n * per_owner;
  if ((long long)total > default_caps().max_witness_vertices)
    throw resource_limit_error("graph witness would exceed the vertex cap");

  GraphWitness W;
  W.base = A;
  W.projection.reserve(total);
  W.bits.reserve(total);
  for (size_t i = 0; i < n; ++i) {
    for (uint64_t mask = 0; mask < per_owner; ++mask) {
      std::vector<uint8_t> b(m);
      for (size_t j = 0; j < m; ++j) b[j] = (uint8_t)((mask >> (m - 1 - j)) & 1);
      W.projection.push_back(A.verts[i]);
      W.bits.push_back(std::move(b));
    }
  }

  Structure B;
  B.lang = A.lang;
  for (uint64_t v = 0; v < total; ++v) B.verts.push_back((Vertex)v);
  B.rel.resize(1);
  for (uint64_t u = 0; u < total; ++u) {
    for (uint64_t v = u + 1; v < total; ++v) {
      Vertex xu = W.projection[u], xv = W.projection[v];
      if (xu == xv) continue;
      if (W.bit_at((Vertex)u, xv) != W.bit_at((Vertex)v, xu)) {
        B.rel[0].insert({(Vertex)u, (Vertex)v});
        B.rel[0].insert({(Vertex)v, (Vertex)u});
      }
    }
  }
  B.finalize();
  W.witness = std::move(B);

  W.psi.perm = identity_perm(1, 0);
  for (size_t i = 0; i < n; ++i) {
    Vertex x = A.verts[i];
    std::vector<uint8_t> b;
    b.reserve(m);
    for (size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      Vertex y = A.verts[j];
      b.push_back((uint8_t)(i > j && A.rel[0].count({x, y}) ? 1 : 0));
    }
    W.psi.vmap[x] = W.vertex_id(x, b);
  }
  return W;
}

GraphExtension extend_graph_pa(const GraphWitness& W, const Morphism& phi) {
  const Structure& A = W.base;
  const Structure& B = W.witness;
  size_t n = W.n();

  VertexSet image;
  for (const auto& [x, b] : W.psi.vmap) image.insert(b);
  for (const auto& [u, v] : phi.vmap) {
    if (!image.count(u) || !image.count(v))
      throw input_error("partial automorphism must live on the generic copy");
  }
  Structure Acopy = induced_substructure(B, image);
  if (auto c = check_morphism(phi, Acopy, Acopy, MorphKind::partial_automorphism); !c)
    throw input_error("not a partial automorphism of the generic copy: " + c.violation);

  // Project to a partial permutation of A's positions and extend it.
  std::vector<int> carrier(n);
  for (size_t i = 0; i < n; ++i) carrier[i] = (int)i;
  std::map<int, int> proj;
  for (const auto& [u, v] : phi.vmap) proj[A.pos(W.owner(u))] = A.pos(W.owner(v));
  std::map<int, int> hat = order_preserving_extension(carrier, proj);

  GraphExtension ext;
  for (const auto& [i, j] : hat) ext.phihat[A.verts[i]] = A.verts[j];

  // Flipped pairs: {x,y} with (x,χ) in the domain and χ(y) ≠ χ′(φ̂(y)).
  // When both x and y carry domain vertices the two computations agree for a
  // genuine partial automorphism; we compute both and insist they do.
  std::map<std::pair<Vertex, Vertex>, int> vote;  // -1 = keep, +1 = flip
  for (const auto& [u, v] : phi.vmap) {
    Vertex x = W.owner(u);
    for (Vertex y : A.verts) {
      if (y == x) continue;
      bool flip = W.bit_at(u, y) != W.bit_at(v, ext.phihat.at(y));
      auto key = ordered_pair(x, y);
      int val = flip ? 1 : -1;
      auto [it, fresh] = vote.emplace(key, val);
      if (!fresh && it->second != val)
        throw input_error("inconsistent flip votes: map is not a partial automorphism");
    }
  }
  for (const auto& [key, val] : vote)
    if (val == 1) ext.flips.insert(key);

  // θ((x,χ)) = (φ̂(x), χ′), χ′(φ̂(y)) = χ(y) flipped on F-pairs.
  ext.theta.perm = identity_perm(1, 0);
  size_t m = n - 1;
  for (Vertex b : B.verts) {
    Vertex x = W.owner(b);
    Vertex x2 = ext.phihat.at(x);
    int px2 = A.pos(x2);
    std::vector<uint8_t> nb(m);
    for (Vertex y : A.verts) {
      if (y == x) continue;
      Vertex y2 = ext.phihat.at(y);
      uint8_t val = W.bit_at(b, y);
      if (ext.flips.count(ordered_pair(x, y))) val ^= 1;
      int py2 = A.pos(y2);
      nb[py2 < px2 ? (size_t)py2 : (size_t)py2 - 1] = val;
    }
    ext.theta.vmap[b] = W.vertex_id(x2, nb);
  }
  return ext;
}

Morphism graph_extension_inverse(const GraphWitness& W, const GraphExtension& ext) {
  const Structure& A = W.base;
  std::map<Vertex, Vertex> hatinv;
  for (const auto& [x, y] : ext.phihat) hatinv[y] = x;

  Morphism inv;
  inv.perm = identity_perm(1, 0);
  size_t m = W.n() - 1;
  for (Vertex b : W.witness.verts) {
    Vertex x = W.owner(b);
    Vertex x2 = hatinv.at(x);
    int px2 = A.pos(x2);
    std::vector<uint8_t> nb(m);
    for (Vertex y : A.verts) {
      if (y == x) continue;
      Vertex y2 = hatinv.at(y);
      uint8_t val = W.bit_at(b, y);
      if (ext.flips.count(ordered_pair(x2, y2))) val ^= 1;
      int py2 = A.pos(y2);
      nb[py2 < px2 ? (size_t)py2 : (size_t)py2 - 1] = val;
    }
    inv.vmap[b] = W.vertex_id(x2, nb);
  }
  return inv;
}

}  // namespace eppa
