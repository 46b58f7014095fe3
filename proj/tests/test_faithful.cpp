// Tests for the faithful witness layer: bad-irreducible enumeration, frozen
// small instances (path, edgeless pair, unary marks under a symbol group,
// function edges), genericity, the extension bookkeeping, coherence, and the
// constructive faithfulness certificates.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "eppa/core.hpp"
#include "eppa/witness.hpp"
#include "eppa/witness_faithful.hpp"
#include "eppa/witness_functions.hpp"
#include "eppa/witness_graph.hpp"
#include "eppa/witness_relational.hpp"

using namespace eppa;

namespace {

// A structure acting as its own witness: extensions found by backtracking.
// Not coherent in general, so coherence tests avoid it.
Witness self_witness(const Structure& A) {
  Witness w;
  w.base = A;
  w.witness = A;
  w.psi = identity_morphism(A);
  w.extend = [A](const Morphism& phi) {
    std::optional<Morphism> th = extend_to_automorphism(A, phi);
    if (!th) throw input_error("self witness: partial automorphism does not extend");
    return *th;
  };
  return w;
}

Morphism lift_to_copy(const FaithfulWitness& W, const Morphism& p) {
  Morphism out;
  out.perm = p.perm;
  for (const auto& [x, y] : p.vmap) out.vmap[W.psi.vmap.at(x)] = W.psi.vmap.at(y);
  return out;
}

// The chaining route: project phi to B0, extend there, ride the result.
FaithfulExtension extend_via_bundle(const FaithfulWitness& W, const Morphism& phi) {
  Morphism proj;
  proj.perm = phi.perm;
  for (const auto& [u, v] : phi.vmap)
    proj.vmap[W.projection[(size_t)u]] = W.projection[(size_t)v];
  return extend_faithful_pa(W, phi, W.b0.extend(proj));
}

Morphism projection_morphism(const FaithfulWitness& W) {
  Morphism pi;
  pi.perm = identity_perm(W.base.lang.nrel(), W.base.lang.nfun());
  for (size_t id = 0; id < W.projection.size(); ++id)
    pi.vmap[(Vertex)id] = W.projection[id];
  return pi;
}

void check_eppa(const FaithfulWitness& W) {
  CHECK(check_morphism(W.psi, W.base, W.witness, MorphKind::embedding).ok);
  for (Vertex x : W.base.verts)
    CHECK(W.projection[(size_t)W.psi.vmap.at(x)] == W.b0.psi.vmap.at(x));
  for (const Morphism& p : enumerate_partial_automorphisms(W.base)) {
    Morphism phi = lift_to_copy(W, p);
    FaithfulExtension E = extend_via_bundle(W, phi);
    CHECK(E.theta.perm == phi.perm);
    for (const auto& [u, v] : phi.vmap) CHECK(E.theta.vmap.at(u) == v);
    for (size_t id = 0; id < W.projection.size(); ++id)
      CHECK(W.projection[(size_t)E.theta.vmap.at((Vertex)id)] ==
            E.phihat.vmap.at(W.projection[id]));
    CHECK(check_morphism(E.theta, W.witness, W.witness, MorphKind::automorphism).ok);
  }
}

void check_coherence(const FaithfulWitness& W) {
  std::vector<Morphism> pas;
  for (const Morphism& p : enumerate_partial_automorphisms(W.base))
    pas.push_back(lift_to_copy(W, p));
  long long triples = 0;
  for (const Morphism& f : pas)
    for (const Morphism& g : pas) {
      if (f.range() != g.domain()) continue;
      Morphism h = compose(g, f);
      Morphism tf = extend_via_bundle(W, f).theta;
      Morphism tg = extend_via_bundle(W, g).theta;
      Morphism th = extend_via_bundle(W, h).theta;
      CHECK(th == compose(tg, tf));
      ++triples;
    }
  CHECK(triples > 0);
}

void check_projection(const FaithfulWitness& W) {
  Morphism pi = projection_morphism(W);
  CHECK(check_morphism(pi, W.witness, W.b0.witness, MorphKind::hom_embedding).ok);
}

// log2 of the closed-form vertex bound m * 2^|P|, where |P| <= m(m-1)^(2^m)
// counts the possible owner-valuation pairs.  Overflow saturates to +inf,
// which keeps the comparison sound.
long double vertex_bound_log2(size_t m) {
  long double P =
      (long double)m * powl((long double)m - 1.0L, powl(2.0L, (long double)m));
  return log2l((long double)m) + P;
}

bool adjacent(const Structure& G, Vertex a, Vertex b) {
  return G.rel[0].count(Tuple{a, b}) != 0;
}

}  // namespace

TEST_CASE("structure as its own witness: nothing is bad, nothing changes") {
  Structure A = make_graph({1, 2}, {{1, 2}});
  FaithfulWitness W = build_faithful_witness(A, self_witness(A));

  CHECK(W.bads.bads.empty());
  // singletons and the edge were all tested and all reach the image
  CHECK(W.bads.searched.size() == 3);
  for (const auto& [set, aut] : W.bads.searched) CHECK(aut.has_value());

  CHECK(W.witness.size() == 2);
  Morphism pi = projection_morphism(W);
  CHECK(check_morphism(pi, W.witness, W.b0.witness, MorphKind::isomorphism).ok);

  FaithfulnessReport rep = certify_faithfulness(W);
  CHECK(rep.ok);
  CHECK(rep.certificates.size() == 3);
  check_eppa(W);
  check_projection(W);

  // one-vertex graph: its witness is a single vertex, trivially transitive,
  // and the singleton is not bad
  Structure A1 = make_graph({1}, {});
  FaithfulWitness W1 = build_faithful_witness(A1, as_witness(build_graph_witness(A1)));
  CHECK(W1.witness.size() == 1);
  CHECK(W1.bads.bads.empty());
  CHECK(certify_faithfulness(W1).ok);
}

TEST_CASE("bad irreducibles of the path witness are exactly its triangles") {
  Structure A = make_graph({1, 2, 3}, {{1, 2}, {2, 3}});
  GraphWitness G = build_graph_witness(A);
  const Structure& B0 = G.witness;
  CHECK(B0.size() == 12);
  CHECK(B0.rel[0].size() == 48);  // 24 undirected edges

  VertexSet image;
  for (const auto& [a, v] : G.psi.vmap) image.insert(v);
  BadIndex bx = enumerate_bad_irreducibles(B0, image);

  std::set<VertexSet> triangles;
  for (Vertex a : B0.verts)
    for (Vertex b : B0.verts)
      for (Vertex c : B0.verts) {
        if (!(a < b && b < c)) continue;
        if (adjacent(B0, a, b) && adjacent(B0, b, c) && adjacent(B0, a, c))
          triangles.insert({a, b, c});
      }
  CHECK(triangles.size() == 8);

  std::set<VertexSet> bad(bx.bads.begin(), bx.bads.end());
  CHECK(bad == triangles);

  // vertices and edges always reach the image: the witness graph is
  // transitive on both under its flip-and-permute automorphisms
  for (const auto& [set, aut] : bx.searched) {
    if (set.size() <= 2) CHECK(aut.has_value());
    if (set.size() == 3) CHECK(!aut.has_value());
  }

  // each vertex lies in exactly two triangles
  for (Vertex v : B0.verts) CHECK(bx.containing.at(v).size() == 2);
}

TEST_CASE("faithful witness of the path is triangle-free") {
  Structure A = make_graph({1, 2, 3}, {{1, 2}, {2, 3}});
  FaithfulWitness W = build_faithful_witness(A, as_witness(build_graph_witness(A)));

  // 12 owners, two bad triangles each, valuations into {1,2}: 4 per owner
  CHECK(W.witness.size() == 48);
  // per ordered edge of the base witness: 2 generic choices on the shared
  // triangle, free on the other one
  CHECK(W.witness.rel[0].size() == 384);

  const Structure& B = W.witness;
  bool triangle = false;
  for (Vertex a : B.verts)
    for (Vertex b : B.verts)
      for (Vertex c : B.verts) {
        if (!(a < b && b < c)) continue;
        if (adjacent(B, a, b) && adjacent(B, b, c) && adjacent(B, a, c)) triangle = true;
      }
  CHECK(!triangle);

  check_projection(W);
  CHECK((long double)log2l((long double)W.witness.size()) <=
        vertex_bound_log2(W.b0.witness.size()));

  FaithfulnessReport rep = certify_faithfulness(W);
  CHECK(rep.ok);
  CHECK(rep.certificates.size() == 48 + 192);
  for (const FaithfulnessCertificate& c : rep.certificates) {
    CHECK(c.generic);
    CHECK(c.ok);
  }

  check_eppa(W);
  check_coherence(W);
}

TEST_CASE("edgeless base: the matching edges are bad and the witness is edgeless") {
  Structure A = make_graph({1, 2}, {});
  FaithfulWitness W = build_faithful_witness(A, as_witness(build_graph_witness(A)));

  // the base witness is a perfect matching on 4 vertices; its copy of A picks
  // one endpoint of each edge, so neither edge can reach the copy
  CHECK(W.bads.bads.size() == 2);
  for (const VertexSet& I : W.bads.bads) CHECK(I.size() == 2);

  // one value {1} per matching edge: a single valuation per owner
  CHECK(W.witness.size() == 4);
  for (size_t id = 0; id < 4; ++id) {
    CHECK(W.chi((Vertex)id).vals == std::vector<int>{1});
  }
  // both endpoints of a bad edge carry the same forced value, so no relation
  // tuple survives
  CHECK(W.witness.rel[0].empty());

  check_projection(W);
  FaithfulnessReport rep = certify_faithfulness(W);
  CHECK(rep.ok);
  CHECK(rep.certificates.size() == 4);
  check_eppa(W);
  check_coherence(W);
  CHECK((long double)log2l((long double)W.witness.size()) <=
        vertex_bound_log2(W.b0.witness.size()));
}

TEST_CASE("no bad irreducibles reproduces the base witness") {
  // the witness of an edge is two disjoint edges; the copy of the base is one
  // of them, and everything (vertices, edges) reaches it by an automorphism
  Structure A = make_graph({1, 2}, {{1, 2}});
  FaithfulWitness W = build_faithful_witness(A, as_witness(build_graph_witness(A)));

  CHECK(W.bads.bads.empty());
  CHECK(W.witness.size() == 4);
  for (size_t id = 0; id < 4; ++id) CHECK(W.chi((Vertex)id).vals.empty());

  Morphism pi = projection_morphism(W);
  CHECK(check_morphism(pi, W.witness, W.b0.witness, MorphKind::isomorphism).ok);

  CHECK(certify_faithfulness(W).ok);
  check_eppa(W);
  check_coherence(W);
}

TEST_CASE("unary marks under a symbol group keep one mark per vertex") {
  // language of three unary marks with the full symbol group; the base is a
  // single vertex marked R1.  The base witness has one vertex per subset of
  // marks; only the singleton-marked vertices survive the faithful layer.
  std::vector<SymbolPerm> group;
  std::vector<int> p{0, 1, 2};
  do {
    SymbolPerm g;
    g.rel_map = p;
    group.push_back(g);
  } while (std::next_permutation(p.begin(), p.end()));
  Language L = make_language({"R1", "R2", "R3"}, {1, 1, 1}, {}, group);

  std::vector<std::set<Tuple>> rel(3);
  rel[0].insert({0});
  Structure A = make_structure(L, {0}, rel);

  FaithfulWitness W = build_faithful_witness(A, as_witness(build_relational_witness(A)));
  CHECK(W.b0.witness.size() == 8);
  // bad: the five vertices whose mark count is not one
  CHECK(W.bads.bads.size() == 5);
  CHECK(W.witness.size() == 3);
  std::set<int> marks_seen;
  for (Vertex v : W.witness.verts) {
    int marks = 0;
    for (int r = 0; r < 3; ++r)
      if (W.witness.rel[(size_t)r].count({v})) {
        ++marks;
        marks_seen.insert(r);
      }
    CHECK(marks == 1);
  }
  CHECK(marks_seen.size() == 3);

  check_projection(W);
  CHECK(certify_faithfulness(W).ok);
  check_eppa(W);
  check_coherence(W);

  // trivial group: only the exact mark R1 survives; the base is its own
  // faithful witness
  Language L2 = make_language({"R1", "R2", "R3"}, {1, 1, 1}, {}, {});
  Structure A2 = make_structure(L2, {0}, rel);
  FaithfulWitness W2 = build_faithful_witness(A2, as_witness(build_relational_witness(A2)));
  CHECK(W2.bads.bads.size() == 7);
  CHECK(W2.witness.size() == 1);
  Vertex only = W2.witness.verts[0];
  CHECK(W2.witness.rel[0].count({only}));
  CHECK(W2.witness.rel[1].empty());
  CHECK(W2.witness.rel[2].empty());
  CHECK(certify_faithfulness(W2).ok);
  check_eppa(W2);
}

TEST_CASE("function edges ride through the faithful layer") {
  Language L = make_language({}, {}, {"F"}, {});
  Structure A = make_structure(L, {1, 2}, {}, {{{1, {2}}}});
  FaithfulWitness W = build_faithful_witness(A, as_witness(build_function_witness(A)));

  // the function witness is two disjoint F-edges and an automorphism swaps
  // them, so nothing is bad and the layer is an isomorphism
  CHECK(W.bads.bads.empty());
  CHECK(W.witness.size() == 4);
  Morphism pi = projection_morphism(W);
  CHECK(check_morphism(pi, W.witness, W.b0.witness, MorphKind::isomorphism).ok);

  // valuation structures span the whole closure
  CHECK(W.valuation[(size_t)W.psi.vmap.at(1)].size() == 2);
  CHECK(W.witness.fun_image(0, W.psi.vmap.at(1)) ==
        std::set<Vertex>{W.psi.vmap.at(2)});

  CHECK(certify_faithfulness(W).ok);
  check_eppa(W);
  check_coherence(W);
}

TEST_CASE("function edge with a unary mark") {
  Language L = make_language({"U"}, {1}, {"F"}, {});
  std::vector<std::set<Tuple>> rel(1);
  rel[0].insert({2});
  Structure A = make_structure(L, {1, 2}, rel, {{{1, {2}}}});
  FaithfulWitness W = build_faithful_witness(A, as_witness(build_function_witness(A)));

  check_projection(W);
  FaithfulnessReport rep = certify_faithfulness(W);
  CHECK(rep.ok);
  for (const FaithfulnessCertificate& c : rep.certificates) CHECK(c.generic);
  check_eppa(W);
  check_coherence(W);
  CHECK((long double)log2l((long double)W.witness.size()) <=
        vertex_bound_log2(W.b0.witness.size()));
}

TEST_CASE("extension bookkeeping and failure modes") {
  Structure A = make_graph({1, 2}, {});
  FaithfulWitness W = build_faithful_witness(A, as_witness(build_graph_witness(A)));
  const Structure& B0 = W.b0.witness;

  SUBCASE("empty map with the identity automorphism is the identity") {
    Morphism phi;
    phi.perm = identity_perm(1, 0);
    FaithfulExtension E = extend_faithful_pa(W, phi, identity_morphism(B0));
    CHECK(E.theta == identity_morphism(W.witness));
    for (const auto& [b, t] : E.flips.tau) CHECK(t.empty());
    for (const auto& [from, to] : E.flips.qhat) CHECK(from == to);
  }

  SUBCASE("swap of the base records value maps on both bad edges") {
    Morphism p;
    p.perm = identity_perm(1, 0);
    p.vmap[1] = 2;
    p.vmap[2] = 1;
    FaithfulExtension E = extend_via_bundle(W, lift_to_copy(W, p));
    CHECK(E.flips.tau.size() == 2);
    for (const auto& [b, t] : E.flips.tau) {
      CHECK(t == std::map<int, int>{{1, 1}});
      CHECK(E.flips.theta.at(b) == std::map<int, int>{{1, 1}});
    }
    CHECK(E.flips.qhat.size() == 4);
    std::set<FaithfulValuation> from, to;
    for (const auto& [a, b] : E.flips.qhat) {
      from.insert(a);
      to.insert(b);
    }
    CHECK(from == to);  // a permutation of the valuations in use
  }

  SUBCASE("non-generic domain is a precondition error") {
    // the two endpoints of one bad matching edge carry the same forced value
    const VertexSet& I = W.bads.bads[0];
    std::vector<Vertex> ids;
    for (size_t id = 0; id < W.projection.size(); ++id)
      if (I.count(W.projection[id])) ids.push_back((Vertex)id);
    REQUIRE(ids.size() == 2);
    Morphism phi;
    phi.perm = identity_perm(1, 0);
    phi.vmap[ids[0]] = ids[0];
    phi.vmap[ids[1]] = ids[1];
    CHECK_THROWS_AS(extend_faithful_pa(W, phi, identity_morphism(B0)), precondition_error);
  }

  SUBCASE("phihat must be an automorphism extending the projection") {
    // valid automorphism, wrong restriction
    Morphism p;
    p.perm = identity_perm(1, 0);
    p.vmap[1] = 2;
    Morphism phi = lift_to_copy(W, p);
    CHECK_THROWS_AS(extend_faithful_pa(W, phi, identity_morphism(B0)), input_error);

    // not an automorphism at all
    Morphism empty;
    empty.perm = identity_perm(1, 0);
    Morphism squash;
    squash.perm = identity_perm(1, 0);
    for (Vertex v : B0.verts) squash.vmap[v] = B0.verts[0];
    CHECK_THROWS_AS(extend_faithful_pa(W, empty, squash), input_error);
  }

  SUBCASE("phi must be a partial automorphism") {
    Morphism phi;
    phi.perm = identity_perm(1, 0);
    phi.vmap[W.psi.vmap.at(1)] = W.psi.vmap.at(1);
    phi.vmap[W.psi.vmap.at(2)] = W.psi.vmap.at(1);
    CHECK_THROWS_AS(extend_faithful_pa(W, phi, identity_morphism(B0)), input_error);
  }

  SUBCASE("bundle must belong to the base structure") {
    Structure K2 = make_graph({1, 2}, {{1, 2}});
    CHECK_THROWS_AS(build_faithful_witness(A, self_witness(K2)), input_error);
  }
}
