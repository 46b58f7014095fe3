// Tests for tree amalgamations and the layered pipeline: replay and
// verification of traces, decomposition into trees of pattern copies with
// honest precondition reporting, embedding search, amalgamation of two
// structures through a witness of their disjoint union, completion along a
// trace with an oracle, the auxiliary-edge language helpers, the pipeline on
// collapsing instances, and tree-likeness certificates for its output.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <set>
#include <string>
#include <vector>

#include "eppa/core.hpp"
#include "eppa/tree_pipeline.hpp"
#include "eppa/witness.hpp"
#include "eppa/witness_graph.hpp"

using namespace eppa;

namespace {

Witness backtracking_witness(const Structure& A, const Structure& B0,
                             const Morphism& psi) {
  Witness w;
  w.base = A;
  w.witness = B0;
  w.psi = psi;
  w.extend = [B0](const Morphism& phi) {
    std::optional<Morphism> th = extend_to_automorphism(B0, phi);
    if (!th) throw input_error("backtracking witness: partial automorphism does not extend");
    return *th;
  };
  return w;
}

Morphism inclusion_of(const Structure& A, const std::vector<Vertex>& image) {
  Morphism psi;
  psi.perm = identity_perm(A.lang.nrel(), A.lang.nfun());
  for (size_t i = 0; i < A.verts.size(); ++i) psi.vmap[A.verts[i]] = image[i];
  return psi;
}

Witness self_witness(const Structure& S) {
  std::vector<Vertex> image = S.verts;
  return backtracking_witness(S, S, inclusion_of(S, image));
}

Structure k2() { return make_graph({1, 2}, {{1, 2}}); }

// A free-amalgamation oracle for trivial symbol groups.
AmalgamTriple free_oracle(const Structure& B1, const Structure& B2, const Structure& D,
                          const Morphism& d1, const Morphism& d2) {
  Amalgam am = free_amalgamation(B1, B2, D, d1, d2);
  return {am.C, am.beta1, am.beta2};
}

// Lifts a partial automorphism of the base to the distinguished copy.
Morphism lift_pa(const Witness& W, const Morphism& p) {
  Morphism phi;
  phi.perm = p.perm;
  for (const auto& [x, y] : p.vmap) phi.vmap[W.psi.vmap.at(x)] = W.psi.vmap.at(y);
  return phi;
}

void check_bundle_eppa(const Witness& W) {
  REQUIRE(check_morphism(W.psi, W.base, W.witness, MorphKind::embedding).ok);
  for (const Morphism& p : enumerate_partial_automorphisms(W.base)) {
    Morphism phi = lift_pa(W, p);
    Morphism th = W.extend(phi);
    CHECK(th.perm == phi.perm);
    for (const auto& [u, v] : phi.vmap) CHECK(th.vmap.at(u) == v);
    CHECK(check_morphism(th, W.witness, W.witness, MorphKind::automorphism).ok);
  }
}

void check_bundle_coherence(const Witness& W) {
  std::vector<Morphism> pas;
  for (const Morphism& p : enumerate_partial_automorphisms(W.base))
    pas.push_back(lift_pa(W, p));
  long long triples = 0;
  for (const Morphism& f : pas)
    for (const Morphism& g : pas) {
      if (f.range() != g.domain()) continue;
      Morphism h = compose(g, f);
      CHECK(W.extend(h) == compose(W.extend(g), W.extend(f)));
      ++triples;
    }
  CHECK(triples > 0);
}

bool mentions(const std::string& text, const std::string& what) {
  return text.find(what) != std::string::npos;
}

}  // namespace

TEST_CASE("adjoining and dropping the auxiliary edge relation") {
  Language L = graph_language();
  Language Lp = add_edge_relation(L);
  CHECK(Lp.nrel() == 2);
  CHECK(Lp.rel_names[1] == kEdgeSymbol);
  CHECK(Lp.rel_arity[1] == 2);
  CHECK(Lp.group.size() == 1);
  CHECK(Lp.group[0].rel_map == std::vector<int>{0, 1});

  // Name collisions are rejected, for relations and functions alike.
  CHECK_THROWS_AS(add_edge_relation(Lp), input_error);
  Language withfun = make_language({"R"}, {2}, {kEdgeSymbol}, {});
  CHECK_THROWS_AS(add_edge_relation(withfun), input_error);

  Structure A = k2();
  Structure Ap = with_complete_edges(A, Lp);
  CHECK(Ap.verts == A.verts);
  CHECK(Ap.rel[0] == A.rel[0]);
  CHECK(Ap.rel[1] == std::set<Tuple>{{1, 2}, {2, 1}});
  CHECK_THROWS_AS(with_complete_edges(A, L), input_error);

  CHECK(drop_relation(Ap, 1) == A);
  CHECK_THROWS_AS(drop_relation(Ap.lang, 5), input_error);

  // A permutation moving the dropped relation blocks the reduct.
  SymbolPerm swap;
  swap.rel_map = {1, 0};
  Language L2 = make_language({"R", "S"}, {2, 2}, {}, {swap});
  CHECK_THROWS_AS(drop_relation(L2, 0), input_error);

  // Lifting a witness bundle to the extended language.
  Witness b0 = self_witness(A);
  Witness lifted = lift_witness_to_edge_language(b0, Lp);
  CHECK(lifted.base == with_complete_edges(A, Lp));
  CHECK(lifted.witness == with_complete_edges(A, Lp));
  CHECK(lifted.psi.perm.rel_map == std::vector<int>{0, 1});
  REQUIRE(check_morphism(lifted.psi, lifted.base, lifted.witness, MorphKind::embedding).ok);
  check_bundle_eppa(lifted);
  // A partial automorphism whose permutation has the un-extended shape.
  Morphism low;
  low.perm = identity_perm(1, 0);
  low.vmap = {{1, 1}};
  CHECK_THROWS_AS(lifted.extend(low), input_error);
}

TEST_CASE("replaying and verifying a hand-built tree trace") {
  Structure pattern = k2();
  // Two copies of an edge glued over a middle vertex: a path 1 - 0 - 2.
  Structure path = make_graph({0, 1, 2}, {{1, 0}, {0, 2}});
  TreeAmalgamation T;
  T.pattern = pattern;
  T.result = path;
  Morphism c0 = inclusion_of(pattern, {1, 0});
  Morphism c1 = inclusion_of(pattern, {0, 2});
  T.copies = {c0, c1};
  T.edges = {{0, 1, {0}}};

  CHECK(verify_tree_amalgamation(T).ok);
  Structure replay = replay_tree_amalgamation(T);
  CHECK(replay == path);

  // Out-of-order result vertices are tolerated (replay normalizes).
  {
    TreeAmalgamation T2 = T;
    T2.result = make_structure(graph_language(), {2, 0, 1},
                               {{{1, 0}, {0, 1}, {0, 2}, {2, 0}}});
    CHECK(verify_tree_amalgamation(T2).ok);
    CHECK(replay_tree_amalgamation(T2).verts == std::vector<Vertex>{0, 1, 2});
  }

  // A single-copy trace.
  {
    TreeAmalgamation S;
    S.pattern = pattern;
    S.result = pattern;
    S.copies = {inclusion_of(pattern, {1, 2})};
    CHECK(verify_tree_amalgamation(S).ok);
    CHECK(replay_tree_amalgamation(S) == pattern);
  }

  // Broken variants are named precisely.
  {
    TreeAmalgamation bad = T;
    bad.edges[0].overlap = {0, 1};
    CheckResult r = verify_tree_amalgamation(bad);
    CHECK(!r.ok);
    CHECK(mentions(r.violation, "intersection"));
  }
  {
    TreeAmalgamation bad = T;
    bad.result = make_graph({0, 1, 2}, {{1, 0}, {0, 2}, {1, 2}});  // extra edge
    CheckResult r = verify_tree_amalgamation(bad);
    CHECK(!r.ok);
  }
  {
    TreeAmalgamation bad = T;
    bad.edges.clear();
    CheckResult r = verify_tree_amalgamation(bad);
    CHECK(!r.ok);
    CHECK(mentions(r.violation, "tree"));
  }
  {
    TreeAmalgamation bad = T;
    bad.edges[0] = {0, 0, {0}};
    CHECK(!verify_tree_amalgamation(bad).ok);
  }
  {
    TreeAmalgamation bad = T;
    bad.copies = {c0};
    bad.edges.clear();
    CheckResult r = verify_tree_amalgamation(bad);
    CHECK(!r.ok);
    CHECK(mentions(r.violation, "cover"));
  }
  {
    TreeAmalgamation bad;
    CHECK(!verify_tree_amalgamation(bad).ok);
  }
}

TEST_CASE("finding embeddings") {
  Structure A = k2();
  Structure path = make_graph({1, 2, 3}, {{1, 2}, {2, 3}});

  std::optional<Morphism> e = find_embedding(A, path);
  REQUIRE(e.has_value());
  CHECK(check_morphism(*e, A, path, MorphKind::embedding).ok);
  CHECK(e->vmap == std::map<Vertex, Vertex>{{1, 1}, {2, 2}});  // first in order

  CHECK(!find_embedding(path, A).has_value());

  Structure c4 = make_graph({1, 2, 3, 4}, {{1, 2}, {2, 3}, {3, 4}, {4, 1}});
  std::optional<Morphism> id4 = find_embedding(c4, c4);
  REQUIRE(id4.has_value());
  CHECK(id4->vmap == std::map<Vertex, Vertex>{{1, 1}, {2, 2}, {3, 3}, {4, 4}});

  // A symbol permutation can carry one relation onto another.
  {
    SymbolPerm swap;
    swap.rel_map = {1, 0};
    Language L2 = make_language({"R", "S"}, {2, 2}, {}, {swap});
    Structure S = make_structure(L2, {1, 2}, {{{1, 2}, {2, 1}}, {}});
    Structure T = make_structure(L2, {5, 6}, {{}, {{5, 6}, {6, 5}}});
    std::optional<Morphism> m = find_embedding(S, T);
    REQUIRE(m.has_value());
    CHECK(m->perm.rel_map == std::vector<int>{1, 0});
    CHECK(check_morphism(*m, S, T, MorphKind::embedding).ok);
  }

  // Embeddings carry function images exactly, so a larger image blocks.
  {
    Language Lf = make_language({}, {}, {"F"}, {});
    Structure S = make_structure(Lf, {1, 2}, {}, {{{1, {2}}}});
    Structure T = make_structure(Lf, {5, 6}, {}, {{{5, {6}}}});
    Structure Tbig = make_structure(Lf, {5, 6, 7}, {}, {{{5, {6, 7}}}});
    REQUIRE(find_embedding(S, T).has_value());
    CHECK(!find_embedding(S, Tbig).has_value());
  }
}

TEST_CASE("decomposing chordal structures into trees of pattern copies") {
  Structure A = k2();
  Structure path = make_graph({1, 2, 3}, {{1, 2}, {2, 3}});

  TreeDecomposition dec = decompose_tree_amalgamation(path, A);
  REQUIRE(dec.ok);
  CHECK(dec.tree.copies.size() == 2);
  CHECK(dec.tree.edges.size() == 1);
  CHECK(dec.tree.result.size() == 3);
  CHECK(verify_tree_amalgamation(dec.tree).ok);
  CHECK(check_morphism(dec.inclusion, path, dec.tree.result, MorphKind::embedding).ok);
  // The tree edge overlap is exactly the image of the cut vertex 2.
  CHECK(dec.tree.edges[0].overlap == VertexSet{dec.inclusion(2)});

  // Longer path: one copy per edge, a path of copies.
  {
    Structure p5 = make_graph({1, 2, 3, 4, 5}, {{1, 2}, {2, 3}, {3, 4}, {4, 5}});
    TreeDecomposition d5 = decompose_tree_amalgamation(p5, A);
    REQUIRE(d5.ok);
    CHECK(d5.tree.copies.size() == 4);
    CHECK(d5.tree.edges.size() == 3);
    CHECK(verify_tree_amalgamation(d5.tree).ok);
  }

  // Star: three copies over the shared centre.
  {
    Structure star = make_graph({0, 1, 2, 3}, {{0, 1}, {0, 2}, {0, 3}});
    TreeDecomposition ds = decompose_tree_amalgamation(star, A);
    REQUIRE(ds.ok);
    CHECK(ds.tree.copies.size() == 3);
    CHECK(verify_tree_amalgamation(ds.tree).ok);
  }

  // An irreducible structure is a single copy.
  {
    TreeDecomposition d1 = decompose_tree_amalgamation(A, A);
    REQUIRE(d1.ok);
    CHECK(d1.tree.copies.size() == 1);
    CHECK(d1.tree.edges.empty());
    CHECK(verify_tree_amalgamation(d1.tree).ok);
  }

  // A disconnected structure splits over the empty cut.
  {
    Structure two = make_graph({1, 2, 3, 4}, {{1, 2}, {3, 4}});
    TreeDecomposition d2 = decompose_tree_amalgamation(two, A);
    REQUIRE(d2.ok);
    CHECK(d2.tree.copies.size() == 2);
    REQUIRE(d2.tree.edges.size() == 1);
    CHECK(d2.tree.edges[0].overlap.empty());
    CHECK(verify_tree_amalgamation(d2.tree).ok);
  }

  // A long induced cycle blocks, with the cycle as evidence.
  {
    Structure c4 = make_graph({1, 2, 3, 4}, {{1, 2}, {2, 3}, {3, 4}, {4, 1}});
    TreeDecomposition dc = decompose_tree_amalgamation(c4, A);
    CHECK(!dc.ok);
    CHECK(mentions(dc.note, "induced cycle"));
    REQUIRE(dc.cycle.has_value());
    CHECK(dc.cycle->size() == 4);
  }

  // An irreducible substructure too big for the pattern blocks, by name.
  {
    Structure tri = make_graph({1, 2, 3}, {{1, 2}, {2, 3}, {1, 3}});
    TreeDecomposition dt = decompose_tree_amalgamation(tri, A);
    CHECK(!dt.ok);
    CHECK(mentions(dt.note, "does not embed"));
    CHECK(mentions(dt.note, "{1,2,3}"));
    CHECK(!dt.cycle.has_value());
  }

  // Functions ride along: cuts must be function-closed.
  {
    Language Lf = make_language({"E"}, {2}, {"F"}, {});
    Structure Af = make_structure(Lf, {1, 2}, {{{1, 2}, {2, 1}}}, {{{1, {2}}}});
    Structure Bf = make_structure(Lf, {1, 2, 3},
                                  {{{1, 2}, {2, 1}, {2, 3}, {3, 2}}},
                                  {{{1, {2}}, {3, {2}}}});
    TreeDecomposition df = decompose_tree_amalgamation(Bf, Af);
    REQUIRE(df.ok);
    CHECK(df.tree.copies.size() == 2);
    CHECK(df.tree.edges[0].overlap == VertexSet{df.inclusion(2)});
    CHECK(verify_tree_amalgamation(df.tree).ok);

    // A function edge out of the would-be cut makes the piece irreducible
    // and too big for the pattern: reported, not mis-decomposed.
    Structure Bbad = make_structure(Lf, {1, 2, 3},
                                    {{{1, 2}, {2, 1}, {2, 3}, {3, 2}}},
                                    {{{2, {1}}}});
    TreeDecomposition db = decompose_tree_amalgamation(Bbad, Af);
    CHECK(!db.ok);
    CHECK(mentions(db.note, "does not embed"));
  }

  // Edge-relation selection: ambiguity is an error, explicit choice works.
  {
    Language L2 = make_language({"R", "S"}, {2, 2}, {}, {});
    Structure A2 = make_structure(L2, {1, 2},
                                  {{{1, 2}, {2, 1}}, {{1, 2}, {2, 1}}});
    CHECK_THROWS_AS(decompose_tree_amalgamation(A2, A2), input_error);
    TreeDecomposition d0 = decompose_tree_amalgamation(A2, A2, 0);
    CHECK(d0.ok);
  }

  CHECK_THROWS_AS(decompose_tree_amalgamation(make_structure(graph_language(), {}), A),
                  input_error);
}

TEST_CASE("amalgamating two structures through a witness of their disjoint union") {
  auto graph_provider = [](const Structure& S) { return as_witness(build_graph_witness(S)); };
  Structure A = k2();
  Language L = graph_language();

  // Empty shared part: the disjoint union embeds as-is, identity extension.
  {
    Structure none = make_structure(L, {});
    Morphism empty;
    empty.perm = identity_perm(1, 0);
    EppaAmalgam out = amalgamate_via_eppa(A, A, none, empty, empty, graph_provider);
    CHECK(out.joint.size() == 4);
    CHECK(out.joint.rel[0].size() == 4);  // two disjoint edges, both orientations
    CHECK(out.beta1 == compose(out.witness.psi, out.j1));
    CHECK(out.beta2 == compose(out.witness.psi, out.j2));
  }

  // One shared vertex.
  {
    Structure pt = make_structure(L, {7});
    Morphism a1 = inclusion_of(pt, {1});
    Morphism a2 = inclusion_of(pt, {1});
    EppaAmalgam out = amalgamate_via_eppa(A, A, pt, a1, a2, graph_provider);
    CHECK(out.beta1(a1(7)) == out.beta2(a2(7)));
    CHECK(compose(out.beta1, a1) == compose(out.beta2, a2));
    CHECK(check_morphism(out.beta1, A, out.witness.witness, MorphKind::embedding).ok);
    CHECK(check_morphism(out.beta2, A, out.witness.witness, MorphKind::embedding).ok);
    CHECK(out.beta1(2) != out.beta2(2));  // non-shared vertices stay apart
  }

  // A shared edge between a path and a triangle.
  {
    Structure path = make_graph({1, 2, 3}, {{1, 2}, {2, 3}});
    Structure tri = make_graph({1, 2, 3}, {{1, 2}, {2, 3}, {1, 3}});
    Morphism a1 = inclusion_of(A, {1, 2});
    Morphism a2 = inclusion_of(A, {1, 2});
    EppaAmalgam out = amalgamate_via_eppa(path, tri, A, a1, a2, graph_provider);
    CHECK(out.joint.size() == 6);
    CHECK(out.witness.witness.size() == 6 * 32);
    CHECK(compose(out.beta1, a1) == compose(out.beta2, a2));
  }

  // A provider answering for the wrong base is rejected.
  {
    Structure pt = make_structure(L, {7});
    auto bad_provider = [&](const Structure&) { return self_witness(k2()); };
    CHECK_THROWS_AS(amalgamate_via_eppa(A, A, pt, inclusion_of(pt, {1}),
                                        inclusion_of(pt, {2}), bad_provider),
                    input_error);
  }

  // Non-embedding glue maps are rejected.
  {
    Structure path = make_graph({1, 2, 3}, {{1, 2}, {2, 3}});
    Morphism a1 = inclusion_of(A, {1, 3});  // 1-3 is not an edge of the path
    CHECK_THROWS_AS(amalgamate_via_eppa(path, A, A, a1, inclusion_of(A, {1, 2}),
                                        graph_provider),
                    input_error);
  }
}

TEST_CASE("completing a tree amalgamation along its trace") {
  Structure A = k2();
  Structure path = make_graph({1, 2, 3}, {{1, 2}, {2, 3}});

  // A single copy completes to the pattern itself.
  {
    TreeDecomposition d = decompose_tree_amalgamation(A, A);
    REQUIRE(d.ok);
    TreeCompletion tc = completion_of_tree_amalgamation(d.tree, free_oracle);
    CHECK(tc.completed == A);
    CHECK(check_morphism(tc.hom_embedding, d.tree.result, tc.completed,
                         MorphKind::isomorphism).ok);
  }

  // Free completion of the path trace rebuilds the path.
  TreeDecomposition dec = decompose_tree_amalgamation(path, A);
  REQUIRE(dec.ok);
  {
    TreeCompletion tc = completion_of_tree_amalgamation(dec.tree, free_oracle);
    CHECK(tc.completed.size() == 3);
    CHECK(tc.completed.rel[0].size() == 4);
    CHECK(check_morphism(tc.hom_embedding, dec.tree.result, tc.completed,
                         MorphKind::isomorphism).ok);
  }

  // An oracle may glue more than freely: the result is then only a
  // homomorphism-embedding (non-edges may close), never an embedding.
  {
    auto chord_oracle = [](const Structure& B1, const Structure& B2, const Structure& D,
                           const Morphism& d1, const Morphism& d2) {
      Amalgam am = free_amalgamation(B1, B2, D, d1, d2);
      VertexSet shared;
      for (const auto& [u, v] : d1.vmap) shared.insert(am.beta1(v));
      std::optional<Vertex> s1, s2;
      for (const auto& [u, v] : am.beta1.vmap)
        if (!shared.count(v) && (!s1 || v < *s1)) s1 = v;
      for (const auto& [u, v] : am.beta2.vmap)
        if (!shared.count(v) && (!s2 || v < *s2)) s2 = v;
      if (s1 && s2) {
        am.C.rel[0].insert({*s1, *s2});
        am.C.rel[0].insert({*s2, *s1});
        am.C.finalize();
      }
      return AmalgamTriple{am.C, am.beta1, am.beta2};
    };
    TreeCompletion tc = completion_of_tree_amalgamation(dec.tree, chord_oracle);
    CHECK(tc.completed.rel[0].size() == 6);  // the path closed into a triangle
    CHECK(check_morphism(tc.hom_embedding, dec.tree.result, tc.completed,
                         MorphKind::hom_embedding).ok);
    CHECK(!check_morphism(tc.hom_embedding, dec.tree.result, tc.completed,
                          MorphKind::embedding).ok);
  }

  // Three copies fold in tree order.
  {
    Structure star = make_graph({0, 1, 2, 3}, {{0, 1}, {0, 2}, {0, 3}});
    TreeDecomposition ds = decompose_tree_amalgamation(star, A);
    REQUIRE(ds.ok);
    TreeCompletion tc = completion_of_tree_amalgamation(ds.tree, free_oracle);
    CHECK(tc.completed.size() == 4);
    CHECK(check_morphism(tc.hom_embedding, ds.tree.result, tc.completed,
                         MorphKind::isomorphism).ok);
  }

  // Oracle failures carry the stage index.
  {
    Structure star = make_graph({0, 1, 2, 3}, {{0, 1}, {0, 2}, {0, 3}});
    TreeDecomposition ds = decompose_tree_amalgamation(star, A);
    REQUIRE(ds.ok);
    int calls = 0;
    auto flaky = [&](const Structure& B1, const Structure& B2, const Structure& D,
                     const Morphism& d1, const Morphism& d2) {
      if (++calls == 2) throw std::runtime_error("deliberate failure");
      return free_oracle(B1, B2, D, d1, d2);
    };
    try {
      completion_of_tree_amalgamation(ds.tree, flaky);
      FAIL("expected an input_error");
    } catch (const input_error& ex) {
      CHECK(mentions(ex.what(), "stage 2"));
      CHECK(mentions(ex.what(), "deliberate failure"));
    }
  }

  // A non-commuting square is caught and labelled with its stage.
  {
    auto bad = [](const Structure& B1, const Structure& B2, const Structure& D,
                  const Morphism& d1, const Morphism& d2) {
      Amalgam am = free_amalgamation(B1, B2, D, d1, d2);
      return AmalgamTriple{am.C, am.beta1, am.beta1};
    };
    try {
      completion_of_tree_amalgamation(dec.tree, bad);
      FAIL("expected an input_error");
    } catch (const input_error& ex) {
      CHECK(mentions(ex.what(), "stage 1"));
    }
  }
}

TEST_CASE("the pipeline on a collapsing instance") {
  Structure A = k2();
  // The backtracking self-witness of an edge is coherent: the empty map
  // extends to the identity, every other partial map has a forced extension.
  {
    Morphism empty;
    empty.perm = identity_perm(1, 0);
    std::optional<Morphism> th = extend_to_automorphism(A, empty);
    REQUIRE(th.has_value());
    CHECK(th->vmap == std::map<Vertex, Vertex>{{1, 1}, {2, 2}});
    check_bundle_coherence(self_witness(A));
  }

  PipelineWitness P = build_pipeline_witness(A, self_witness(A), 2);
  CHECK(P.rounds == 2);
  CHECK(P.stages.size() == 3);
  CHECK(P.e_rel == 1);
  CHECK(P.base_plus.rel[1].size() == 2);
  for (const Witness& st : P.stages) CHECK(st.witness.size() == 2);

  // The delivered witness is back over the original language.
  CHECK(P.result.base == A);
  CHECK(P.result.witness.lang == graph_language());
  CHECK(P.result.witness.size() == 2);
  CHECK(P.result.witness.rel[0].size() == 2);
  check_bundle_eppa(P.result);
  check_bundle_coherence(P.result);

  // Stage maps are homomorphism-embeddings all the way down.
  for (size_t j = 0; j < P.stages.size(); ++j) {
    const Structure& src = P.stages[j].witness;
    const Structure& dst = j == 0 ? P.b0_plus.witness : P.stages[j - 1].witness;
    Morphism pi;
    pi.perm = identity_perm(P.lang_plus.nrel(), P.lang_plus.nfun());
    for (size_t id = 0; id < P.stage_maps[j].size(); ++id)
      pi.vmap[(Vertex)id] = P.stage_maps[j][id];
    CHECK(check_morphism(pi, src, dst, MorphKind::hom_embedding).ok);
  }

  // The composite projection lands in the lifted initial witness.
  for (const auto& [id, v] : P.to_b0) CHECK(P.b0_plus.witness.has_vertex(v));
  CHECK(P.to_b0.size() == 2);

  // Round count follows the size bound.
  {
    PipelineWitness P3 = build_pipeline_witness(A, self_witness(A), 3);
    CHECK(P3.rounds == 7);
    CHECK(P3.stages.size() == 8);
    CHECK(P3.result.witness.size() == 2);
  }

  // Input validation.
  CHECK_THROWS_AS(build_pipeline_witness(A, self_witness(A), 0), input_error);
  {
    Structure two = make_structure(graph_language(), {1, 2});  // reducible
    CHECK_THROWS_AS(build_pipeline_witness(two, self_witness(two), 2), input_error);
  }
  {
    Structure other = make_graph({3, 4}, {{3, 4}});
    CHECK_THROWS_AS(build_pipeline_witness(A, self_witness(other), 2), input_error);
  }
}

TEST_CASE("tree-likeness certificates for the delivered witness") {
  Structure A = k2();
  PipelineWitness P = build_pipeline_witness(A, self_witness(A), 2);
  const Structure& top = P.result.witness;
  REQUIRE(top.size() == 2);

  VertexSet all(top.verts.begin(), top.verts.end());
  TreeLikenessCertificate cert = certify_tree_likeness(P, all);
  REQUIRE(cert.ok);
  CHECK(cert.stage == (int)P.stages.size() - 1);
  CHECK(cert.chased.size() == 1);
  CHECK(cert.chased[0] == all);
  CHECK(cert.dec.tree.copies.size() == 1);
  CHECK(cert.tree_reduct.rel[0].size() == 2);
  CHECK(verify_tree_amalgamation(cert.dec.tree).ok);

  TreeLikenessCertificate single = certify_tree_likeness(P, {top.verts[0]});
  REQUIRE(single.ok);
  CHECK(single.dec.tree.copies.size() == 1);
  CHECK(single.dec.tree.result.size() == 2);  // a full pattern copy

  CHECK_THROWS_AS(certify_tree_likeness(P, {99}), input_error);
  CHECK_THROWS_AS(certify_tree_likeness(P, {}), input_error);

  // Seeded sweep over vertex subsets, all certified.
  std::mt19937 rng(20240818);
  for (int trial = 0; trial < 50; ++trial) {
    VertexSet C;
    for (Vertex v : top.verts)
      if (rng() % 2) C.insert(v);
    if (C.empty()) C.insert(top.verts[rng() % top.size()]);
    TreeLikenessCertificate c = certify_tree_likeness(P, C);
    CHECK(c.ok);
  }
}
