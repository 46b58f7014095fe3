// Brute-force verification sweeps: the extension property, coherence,
// faithfulness, the projection trichotomy, and size audits.  Exercises the
// pinned pass/fail examples, counterexample replay, determinism across
// re-runs, and serial/parallel agreement.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "eppa/core.hpp"
#include "eppa/verifier.hpp"
#include "eppa/witness.hpp"
#include "eppa/witness_faithful.hpp"
#include "eppa/witness_functions.hpp"
#include "eppa/witness_graph.hpp"
#include "eppa/witness_relational.hpp"
#include "eppa/witness_unwind.hpp"

using namespace eppa;

namespace {

Structure p3() { return make_graph({1, 2, 3}, {{1, 2}, {2, 3}}); }
Structure k2() { return make_graph({1, 2}, {{1, 2}}); }

Morphism inclusion_of(const Structure& A, const std::vector<Vertex>& image) {
  Morphism m;
  m.perm = identity_perm(A.lang.nrel(), A.lang.nfun());
  for (size_t i = 0; i < A.verts.size(); ++i) m.vmap[A.verts[i]] = image.at(i);
  return m;
}

// A bundle whose extension operator is exhaustive backtracking; it throws
// input_error when a partial automorphism has no extension at all.
Witness backtracking_bundle(Structure A, Structure W, Morphism psi) {
  Witness out;
  out.base = std::move(A);
  out.witness = std::move(W);
  out.psi = std::move(psi);
  Structure carrier = out.witness;
  out.extend = [carrier](const Morphism& p) -> Morphism {
    auto th = extend_to_automorphism(carrier, p);
    if (!th) throw input_error("backtracking bundle: partial automorphism does not extend");
    return *th;
  };
  return out;
}

bool mentions(const std::string& text, const std::string& what) {
  return text.find(what) != std::string::npos;
}

// The 1024-vertex unwound witness over the 4-cycle: base K2, reduct witness
// C4, every bad cycle sequence of the square unwound.  Built once.
struct UnwoundFixture {
  Structure base;
  Witness b0;
  UnwindWitness W;
  Morphism proj;
};

const UnwoundFixture& unwound_c4() {
  static const UnwoundFixture fx = [] {
    UnwoundFixture f;
    f.base = k2();
    Structure c4 = make_graph({1, 2, 3, 4}, {{1, 2}, {2, 3}, {3, 4}, {4, 1}});
    f.b0 = backtracking_bundle(f.base, c4, inclusion_of(f.base, {1, 2}));
    f.W = build_unwound_witness(f.base, f.b0);
    f.proj.perm = identity_perm(f.W.witness.lang.nrel(), f.W.witness.lang.nfun());
    for (Vertex v : f.W.witness.verts) f.proj.vmap[v] = f.W.projection[(size_t)v];
    return f;
  }();
  return fx;
}

}  // namespace

// ---------------------------------------------------------------------------
// Extension property
// ---------------------------------------------------------------------------

TEST_CASE("extension sweep accepts the canonical graph bundle in both modes") {
  Witness W = as_witness(build_graph_witness(k2()));

  VerifyReport with_op = verify_eppa_witness(W);
  CHECK(with_op.pass);
  CHECK(with_op.kind == "eppa");
  CHECK(with_op.checked > 0);
  CHECK(with_op.instance.at("mode") == "operator");
  CHECK(with_op.instance.at("extended") == std::to_string(with_op.checked));
  CHECK(with_op.counter_morphisms.empty());
  CHECK(!with_op.counter_subset.has_value());

  VerifyReport pure = verify_eppa_witness(W.base, W.witness, W.psi, std::nullopt);
  CHECK(pure.pass);
  CHECK(pure.instance.at("mode") == "backtracking");
  // Oracle equivalence: the operator and the exhaustive search agree, and
  // they examined the same partial automorphisms.
  CHECK(pure.checked == with_op.checked);

  // Serial and parallel sweeps produce identical reports.
  CHECK(verify_eppa_witness(W, default_caps(), false) == with_op);
}

TEST_CASE("extension sweep pins the endpoint-to-middle counterexample") {
  Structure A = p3();
  Morphism id = inclusion_of(A, {1, 2, 3});

  VerifyReport rep = verify_eppa_witness(A, A, id, std::nullopt);
  REQUIRE(!rep.pass);
  REQUIRE(rep.counter_morphisms.size() == 1);
  const Morphism& bad = rep.counter_morphisms[0];
  CHECK(bad.vmap == std::map<Vertex, Vertex>{{3, 2}});  // endpoint onto the middle
  CHECK(mentions(rep.detail, "no automorphism extends"));
  // Replay: the counterexample reproduces the failure with the public API.
  CHECK(!extend_to_automorphism(A, bad).has_value());

  // The same instance through a throwing operator fails on the same map.
  Witness self = backtracking_bundle(A, A, id);
  VerifyReport with_op = verify_eppa_witness(self);
  REQUIRE(!with_op.pass);
  CHECK(with_op.counter_morphisms[0] == bad);
  CHECK(mentions(with_op.detail, "operator threw"));
  CHECK(with_op.pass == rep.pass);

  // Determinism: a re-run reproduces the report exactly.
  CHECK(verify_eppa_witness(A, A, id, std::nullopt) == rep);
  CHECK(verify_eppa_witness(A, A, id, std::nullopt, default_caps(), false) == rep);
}

TEST_CASE("extension sweep vacuous, malformed, and dishonest-operator inputs") {
  Structure empty = make_graph({}, {});
  Morphism empty_psi;
  empty_psi.perm = identity_perm(1, 0);
  VerifyReport vac = verify_eppa_witness(empty, empty, empty_psi, std::nullopt);
  CHECK(vac.pass);
  CHECK(vac.checked == 1);  // only the empty partial automorphism

  // A base that does not embed fails the report up front.
  Structure A = k2();
  Structure b2 = make_graph({1, 2}, {});  // no edge
  VerifyReport notemb = verify_eppa_witness(A, b2, inclusion_of(A, {1, 2}), std::nullopt);
  CHECK(!notemb.pass);
  CHECK(mentions(notemb.detail, "not an embedding"));
  CHECK(notemb.counter_morphisms.size() == 1);

  // An operator that forgets its input is caught by the containment check.
  Structure c4 = make_graph({1, 2, 3, 4}, {{1, 2}, {2, 3}, {3, 4}, {4, 1}});
  Morphism psi = inclusion_of(A, {1, 2});
  ExtensionOperator lazy = [&](const Morphism& p) {
    Morphism th;
    th.perm = p.perm;
    for (Vertex v : c4.verts) th.vmap[v] = v;  // always the identity
    return th;
  };
  VerifyReport dishonest = verify_eppa_witness(A, c4, psi, lazy);
  REQUIRE(!dishonest.pass);
  CHECK(mentions(dishonest.detail, "does not extend"));
  REQUIRE(dishonest.counter_morphisms.size() == 2);  // the input and the faulty output
  CHECK(dishonest.counter_morphisms[1].vmap.at(1) == 1);
}

// ---------------------------------------------------------------------------
// Coherence
// ---------------------------------------------------------------------------

TEST_CASE("coherence sweep passes the constructive graph bundles") {
  for (Structure A : {k2(), p3()}) {
    Witness W = as_witness(build_graph_witness(A));
    VerifyReport rep = verify_coherence(W);
    CHECK(rep.pass);
    CHECK(rep.kind == "coherence");
    CHECK(rep.checked > 0);
    CHECK(rep.instance.at("coherent_triples") == std::to_string(rep.checked));
    CHECK(verify_coherence(W, default_caps(), false) == rep);
  }

  // Single-vertex base: all triples trivial, still a pass.
  Structure one = make_graph({7}, {});
  VerifyReport tiny = verify_coherence(as_witness(build_graph_witness(one)));
  CHECK(tiny.pass);
  CHECK(tiny.checked > 0);
}

TEST_CASE("coherence sweep pins a concrete triple against a twisted operator") {
  Witness W = as_witness(build_graph_witness(k2()));

  // The twist: on the empty partial automorphism (identity symbol
  // permutation) answer with the extension of the full swap instead of the
  // honest answer.  Every output is still a genuine automorphism extending
  // its input, but extending the empty map twice no longer composes.
  Morphism swap;
  swap.perm = identity_perm(1, 0);
  swap.vmap = {{W.psi.vmap.at(1), W.psi.vmap.at(2)}, {W.psi.vmap.at(2), W.psi.vmap.at(1)}};
  Morphism twist = W.extend(swap);
  REQUIRE(!(twist == W.extend(Morphism{identity_perm(1, 0), {}})));

  ExtensionOperator twisted = [&, twist](const Morphism& p) {
    if (p.vmap.empty() && p.perm == identity_perm(1, 0)) return twist;
    return W.extend(p);
  };
  VerifyReport rep = verify_coherence(W.base, W.witness, W.psi, twisted);
  REQUIRE(!rep.pass);
  REQUIRE(rep.counter_morphisms.size() == 3);  // the concrete triple f, g, h
  CHECK(rep.counter_morphisms[0].vmap.empty());
  CHECK(rep.counter_morphisms[1].vmap.empty());
  CHECK(rep.counter_morphisms[2].vmap.empty());
  CHECK(mentions(rep.detail, "coherence fails"));
  // Replay the equation on the reported triple.
  Morphism ef = twisted(rep.counter_morphisms[0]);
  Morphism eg = twisted(rep.counter_morphisms[1]);
  Morphism eh = twisted(rep.counter_morphisms[2]);
  CHECK(!(eh == compose(eg, ef)));
  CHECK(verify_coherence(W.base, W.witness, W.psi, twisted, default_caps(), false) == rep);
}

// ---------------------------------------------------------------------------
// Faithfulness
// ---------------------------------------------------------------------------

TEST_CASE("faithfulness sweep: identity copy and the faithful layer pass") {
  Structure A = p3();
  VerifyReport id_rep = verify_faithfulness(A, A, inclusion_of(A, {1, 2, 3}));
  CHECK(id_rep.pass);
  CHECK(id_rep.checked == 5);  // three vertices and two edges
  CHECK(id_rep.instance.at("movable") == "5");

  FaithfulWitness FW = build_faithful_witness(A, as_witness(build_graph_witness(A)));
  VerifyReport rep = verify_faithfulness(FW.base, FW.witness, FW.psi);
  CHECK(rep.pass);
  CHECK(rep.checked > 0);
  CHECK(verify_faithfulness(FW.base, FW.witness, FW.psi, default_caps(), false) == rep);
}

TEST_CASE("faithfulness sweep pins a triangle inside the plain graph witness") {
  Structure A = p3();  // triangle-free
  GraphWitness GW = build_graph_witness(A);
  VerifyReport rep = verify_faithfulness(GW.base, GW.witness, GW.psi);
  REQUIRE(!rep.pass);
  REQUIRE(rep.counter_subset.has_value());
  const VertexSet& C = *rep.counter_subset;
  CHECK(C.size() == 3);
  // The counterexample is a genuine triangle of the witness.
  for (Vertex u : C)
    for (Vertex v : C)
      if (u < v) CHECK(GW.witness.rel[0].count(Tuple{u, v}) == 1);
  // Replay: the exhaustive search really cannot move it into the copy.
  CHECK(!find_automorphism_with_image(GW.witness, C, GW.psi.range()).has_value());
  CHECK(mentions(rep.detail, "no automorphism moves"));
  CHECK(verify_faithfulness(GW.base, GW.witness, GW.psi, default_caps(), false) == rep);
}

// ---------------------------------------------------------------------------
// Projection trichotomy
// ---------------------------------------------------------------------------

TEST_CASE("trichotomy sweep: identity on an acyclic structure is all-chordal") {
  Structure path = make_graph({1, 2, 3, 4}, {{1, 2}, {2, 3}, {3, 4}});
  Morphism id = inclusion_of(path, {1, 2, 3, 4});
  VerifyReport rep = verify_unwind_property(path, path, id, 12, 1);
  CHECK(rep.pass);
  CHECK(rep.checked == 16);
  CHECK(rep.sampled == 0);
  CHECK(rep.instance.at("mode") == "exhaustive");
  CHECK(rep.instance.at("chordal") == "16");
  CHECK(rep.instance.at("collapsed") == "0");
  CHECK(rep.instance.at("denser") == "0");
  CHECK(rep.instance.at("violated") == "0");
}

TEST_CASE("trichotomy sweep passes the unwound witness over the square") {
  const UnwoundFixture& fx = unwound_c4();
  REQUIRE(fx.W.witness.size() == 1024);

  VerifyReport rep =
      verify_unwind_property(fx.W.witness, fx.b0.witness, fx.proj, 12, 20240818, -1, 400);
  CHECK(rep.pass);
  CHECK(rep.instance.at("mode") == "sampled");
  CHECK(rep.sampled == 400);
  CHECK(rep.checked == 400);
  CHECK(rep.instance.at("violated") == "0");
  CHECK(rep.instance.at("seed") == "20240818");
  CHECK(rep.instance.at("cap") == "12");
  CHECK(rep.instance.at("edge_relation") == "E");

  // Same seed, same report — including across the serial sweep.
  VerifyReport again =
      verify_unwind_property(fx.W.witness, fx.b0.witness, fx.proj, 12, 20240818, -1, 400);
  CHECK(again == rep);
  VerifyReport serial = verify_unwind_property(fx.W.witness, fx.b0.witness, fx.proj, 12,
                                               20240818, -1, 400, default_caps(), false);
  CHECK(serial == rep);
}

TEST_CASE("trichotomy sweep fails the identity on the square itself") {
  Structure c4 = make_graph({1, 2, 3, 4}, {{1, 2}, {2, 3}, {3, 4}, {4, 1}});
  Morphism id = inclusion_of(c4, {1, 2, 3, 4});
  VerifyReport rep = verify_unwind_property(c4, c4, id, 12, 1);
  REQUIRE(!rep.pass);
  REQUIRE(rep.counter_subset.has_value());
  CHECK(*rep.counter_subset == VertexSet{1, 2, 3, 4});
  CHECK(rep.instance.at("violated") == "1");
  CHECK(mentions(rep.detail, "escapes the trichotomy"));
  // Replay through the public trichotomy.
  std::vector<Vertex> fvec(5, 0);
  for (Vertex v : c4.verts) fvec[(size_t)v] = v;
  CHECK(sparsen_case(c4, c4, 0, fvec, *rep.counter_subset) == SparsenCase::violated);
  CHECK(verify_unwind_property(c4, c4, id, 12, 1, -1, 10000, default_caps(), false) == rep);
}

TEST_CASE("trichotomy sweep validates its inputs") {
  Structure c4 = make_graph({1, 2, 3, 4}, {{1, 2}, {2, 3}, {3, 4}, {4, 1}});
  Morphism id = inclusion_of(c4, {1, 2, 3, 4});

  // Ambiguous edge relation: two symmetric loopless binary relations.
  Language two = make_language({"E", "F"}, {2, 2}, {}, {});
  Structure both = make_structure(two, {1, 2}, {{{1, 2}, {2, 1}}, {{1, 2}, {2, 1}}});
  Morphism bid = inclusion_of(both, {1, 2});
  CHECK_THROWS_WITH_AS(verify_unwind_property(both, both, bid, 12, 1),
                       doctest::Contains("several relations qualify"), input_error);
  CHECK(verify_unwind_property(both, both, bid, 12, 1, 1).pass);  // explicit pick works

  // Partial projection map.
  Morphism partial = id;
  partial.vmap.erase(4);
  CHECK_THROWS_WITH_AS(verify_unwind_property(c4, c4, partial, 12, 1),
                       doctest::Contains("not total"), input_error);

  // Non-homomorphism projection.
  Structure empty_edges = make_graph({1, 2, 3, 4}, {});
  CHECK_THROWS_WITH_AS(verify_unwind_property(c4, empty_edges, id, 12, 1),
                       doctest::Contains("not a homomorphism"), input_error);

  // Exhaustive request beyond the subset cap.
  Caps tight = default_caps();
  tight.max_subset_bits = 3;
  CHECK_THROWS_AS(verify_unwind_property(c4, c4, id, 12, 1, -1, 10000, tight),
                  resource_limit_error);
}

// ---------------------------------------------------------------------------
// Size audit
// ---------------------------------------------------------------------------

TEST_CASE("size audit: exact graph count and the relational bound") {
  Structure A = p3();
  GraphWitness GW = build_graph_witness(A);
  VerifyReport rep = audit_witness_size("graph", A, GW.witness);
  CHECK(rep.pass);
  CHECK(rep.instance.at("expected") == "12");
  CHECK(rep.instance.at("actual") == "12");

  Structure one = make_graph({5}, {});
  VerifyReport tiny = audit_witness_size("graph", one, build_graph_witness(one).witness);
  CHECK(tiny.pass);
  CHECK(tiny.instance.at("expected") == "1");

  // Wrong-sized delivery fails the exact audit.
  VerifyReport off = audit_witness_size("graph", A, build_graph_witness(k2()).witness);
  CHECK(!off.pass);
  CHECK(off.counter_subset.has_value());
  CHECK(mentions(off.detail, "guarantees exactly"));

  Language rel = make_language({"R"}, {2}, {}, {});
  Structure A2 = make_structure(rel, {1, 2}, {{{1, 2}}});
  RelationalWitness RW = build_relational_witness(A2);
  VerifyReport rrep = audit_witness_size("relational", A2, RW.witness);
  CHECK(rrep.pass);
  CHECK(rrep.instance.at("expected") == "16");
  CHECK(rrep.instance.at("actual") == "16");
}

TEST_CASE("size audit: layered bounds need and use the carrier below") {
  // The unwound square attains its bound exactly: 4 * 2^8 = 1024.
  const UnwoundFixture& fx = unwound_c4();
  VerifyReport urep =
      audit_witness_size("unwind", fx.base, fx.W.witness, fx.b0.witness);
  CHECK(urep.pass);
  CHECK(urep.instance.at("expected") == "1024");
  CHECK(urep.instance.at("actual") == "1024");

  // The faithful layer over the plain graph witness respects its bound.
  Structure A = p3();
  GraphWitness GW = build_graph_witness(A);
  FaithfulWitness FW = build_faithful_witness(A, as_witness(GW));
  VerifyReport frep = audit_witness_size("faithful", A, FW.witness, GW.witness);
  CHECK(frep.pass);

  // The function witness respects its bound over the reduct carrier.
  Language funlang = make_language({}, {}, {"F"}, {});
  Structure AF = make_structure(funlang, {1, 2}, {}, {{{1, {2}}}});
  FunctionWitness FuW = build_function_witness(AF);
  VerifyReport fun_rep = audit_witness_size("functions", AF, FuW.witness, FuW.b0.witness);
  CHECK(fun_rep.pass);

  CHECK_THROWS_WITH_AS(audit_witness_size("faithful", A, FW.witness),
                       doctest::Contains("needs the carrier"), input_error);
  CHECK_THROWS_WITH_AS(audit_witness_size("mystery", A, GW.witness),
                       doctest::Contains("unknown construction"), input_error);
}

// ---------------------------------------------------------------------------
// Cross-cutting report properties
// ---------------------------------------------------------------------------

TEST_CASE("reports render morphisms and agree across oracle modes") {
  Morphism m;
  m.perm = identity_perm(2, 1);
  m.vmap = {{1, 2}, {3, 1}};
  std::string text = morphism_text(m);
  CHECK(mentions(text, "1->2"));
  CHECK(mentions(text, "3->1"));

  // Oracle equivalence across the suite's bundles: the constructive operator
  // and pure backtracking agree on pass/fail.
  for (Structure A : {k2(), p3()}) {
    Witness W = as_witness(build_graph_witness(A));
    VerifyReport a = verify_eppa_witness(W);
    VerifyReport b = verify_eppa_witness(W.base, W.witness, W.psi, std::nullopt);
    CHECK(a.pass == b.pass);
    CHECK(a.checked == b.checked);
  }
}
