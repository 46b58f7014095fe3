// Tests for the relational witness: frozen small examples, the parity rule,
// generic-copy embedding, extension of partial automorphisms (including
// symbol-permuting ones), flip-table invariants, and coherence.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "eppa/core.hpp"
#include "eppa/witness_relational.hpp"

#include <algorithm>
#include <set>
#include <vector>

using namespace eppa;

namespace {

Language binary_unary_language() { return make_language({"R", "U"}, {2, 1}, {}, {}); }

Language two_unary_swap_language() {
  SymbolPerm swap;
  swap.rel_map = {1, 0};
  return make_language({"U", "V"}, {1, 1}, {}, {swap});
}

// Lifts a partial automorphism of the base to the generic copy.
Morphism lift_to_copy(const RelationalWitness& W, const Morphism& p) {
  Morphism out;
  out.perm = p.perm;
  for (const auto& [x, y] : p.vmap) out.vmap[W.psi.vmap.at(x)] = W.psi.vmap.at(y);
  return out;
}

// Extends every partial automorphism of the base and verifies the result is
// an automorphism of the witness extending the lifted map.
void check_eppa(const Structure& A) {
  RelationalWitness W = build_relational_witness(A);
  CHECK(check_morphism(W.psi, A, W.witness, MorphKind::embedding).ok);
  for (const Morphism& p : enumerate_partial_automorphisms(A)) {
    Morphism phi = lift_to_copy(W, p);
    RelationalExtension E = extend_relational_pa(W, phi);
    CHECK(E.theta.perm == phi.perm);
    for (const auto& [u, v] : phi.vmap) CHECK(E.theta.vmap.at(u) == v);
    for (Vertex b : W.witness.verts)
      CHECK(W.owner(E.theta.vmap.at(b)) == E.phihat.at(W.owner(b)));
    CHECK(check_morphism(E.theta, W.witness, W.witness, MorphKind::automorphism).ok);
  }
}

}  // namespace

TEST_CASE("single vertex with one unary mark") {
  Language L = make_language({"U"}, {1}, {}, {});
  Structure A = make_structure(L, {1}, {{{1}}});
  RelationalWitness W = build_relational_witness(A);

  // Two valuations of the single slot; the generic vertex is the marked one.
  REQUIRE(W.witness.verts.size() == 2);
  CHECK(W.total_bits == 1);
  CHECK(W.psi.vmap.at(1) == 1);
  CHECK(W.witness.rel[0] == std::set<Tuple>{{1}});
  CHECK(W.owner(0) == 1);
  CHECK(W.owner(1) == 1);
}

TEST_CASE("witness sizes match the per-vertex valuation count") {
  // |B| = n * 2^(sum over R of n^a - (n-1)^a)
  Language LR = make_language({"R"}, {2}, {}, {});
  Structure A2 = make_structure(LR, {1, 2}, {{{1, 2}}});
  CHECK(build_relational_witness(A2).witness.verts.size() == 16);

  Structure A3 = make_structure(LR, {1, 2, 3}, {{{1, 2}}});
  CHECK(build_relational_witness(A3).witness.verts.size() == 96);

  Structure A3u = make_structure(binary_unary_language(), {1, 2, 3},
                                 {{{1, 2}, {2, 3}}, {{2}}});
  RelationalWitness W = build_relational_witness(A3u);
  CHECK(W.witness.verts.size() == 192);

  // Tuple universes: n^a - (n-1)^a tuples per owner.
  for (int p = 0; p < 3; ++p) {
    CHECK(W.universe[p][0].size() == 9 - 4);
    CHECK(W.universe[p][1].size() == 3 - 2);
  }
}

TEST_CASE("generic copy embeds and projects back") {
  Structure A = make_structure(binary_unary_language(), {1, 2, 3},
                               {{{1, 2}, {2, 3}, {1, 1}}, {{2}, {3}}});
  RelationalWitness W = build_relational_witness(A);
  CHECK(check_morphism(W.psi, A, W.witness, MorphKind::embedding).ok);
  for (Vertex x : A.verts) CHECK(W.owner(W.psi.vmap.at(x)) == x);
}

TEST_CASE("entries sharing a base vertex must share valuations") {
  Language LR = make_language({"R"}, {2}, {}, {});
  Structure A = make_structure(LR, {1, 2}, {{{1, 2}}});
  RelationalWitness W = build_relational_witness(A);
  for (const Tuple& t : W.witness.rel[0]) {
    CHECK_FALSE((W.owner(t[0]) == W.owner(t[1]) && t[0] != t[1]));
  }
  // Loops on a single witness vertex do occur when the vertex's own bit says
  // so; the rule only excludes distinct valuations over the same base vertex.
  bool some_loop = false;
  for (const Tuple& t : W.witness.rel[0]) some_loop |= (t[0] == t[1]);
  CHECK(some_loop);
}

TEST_CASE("empty map with identity permutation extends to the identity") {
  Structure A = make_structure(binary_unary_language(), {1, 2}, {{{1, 2}}, {{1}}});
  RelationalWitness W = build_relational_witness(A);
  Morphism phi;
  phi.perm = identity_perm(2, 0);
  RelationalExtension E = extend_relational_pa(W, phi);
  for (Vertex b : W.witness.verts) CHECK(E.theta.vmap.at(b) == b);
  for (const auto& [t, F] : E.flips[0])
    for (std::uint8_t f : F) CHECK(f == 0);
}

TEST_CASE("one-directed-edge witness: swap-flavoured extensions") {
  Language LR = make_language({"R"}, {2}, {}, {});
  Structure A = make_structure(LR, {1, 2}, {{{1, 2}}});
  RelationalWitness W = build_relational_witness(A);
  REQUIRE(W.witness.verts.size() == 16);
  Vertex g1 = W.psi.vmap.at(1), g2 = W.psi.vmap.at(2);

  // The literal two-point swap is not a partial automorphism: R holds on
  // (1,2) but not on (2,1).
  Morphism swap;
  swap.perm = identity_perm(1, 0);
  swap.vmap = {{g1, g2}, {g2, g1}};
  CHECK_THROWS_AS((void)extend_relational_pa(W, swap), input_error);

  // The one-point map between the generic images is one, and extends.
  Morphism one;
  one.perm = identity_perm(1, 0);
  one.vmap = {{g1, g2}};
  RelationalExtension E = extend_relational_pa(W, one);
  CHECK(E.theta.vmap.at(g1) == g2);
  CHECK(check_morphism(E.theta, W.witness, W.witness, MorphKind::automorphism).ok);

  // With symmetric content the full swap is a partial automorphism and
  // extends to a verified automorphism of the 16-vertex witness.
  Structure As = make_structure(LR, {1, 2}, {{{1, 2}, {2, 1}}});
  RelationalWitness Ws = build_relational_witness(As);
  Morphism full;
  full.perm = identity_perm(1, 0);
  full.vmap = {{Ws.psi.vmap.at(1), Ws.psi.vmap.at(2)},
               {Ws.psi.vmap.at(2), Ws.psi.vmap.at(1)}};
  RelationalExtension Es = extend_relational_pa(Ws, full);
  CHECK(Es.theta.vmap.at(Ws.psi.vmap.at(1)) == Ws.psi.vmap.at(2));
  CHECK(check_morphism(Es.theta, Ws.witness, Ws.witness, MorphKind::automorphism).ok);
}

TEST_CASE("symbol-swapping extensions move the marked copies") {
  Language L = two_unary_swap_language();
  const SymbolPerm& sw = L.group[1];

  // Base holds U(1).  The vertex map 1 -> 1 with the swap is not a partial
  // automorphism (U would have to map into V).
  Structure A = make_structure(L, {1}, {{{1}}, {}});
  RelationalWitness W = build_relational_witness(A);
  REQUIRE(W.witness.verts.size() == 4);
  Morphism bad;
  bad.perm = sw;
  bad.vmap = {{W.psi.vmap.at(1), W.psi.vmap.at(1)}};
  CHECK_THROWS_AS((void)extend_relational_pa(W, bad), input_error);

  // The empty map with the swap extends to an automorphism exchanging the
  // U-marked and V-marked vertices; psi(1) is the U-marked one.
  Morphism empty_swap;
  empty_swap.perm = sw;
  RelationalExtension E = extend_relational_pa(W, empty_swap);
  CHECK(check_morphism(E.theta, W.witness, W.witness, MorphKind::automorphism).ok);
  // Slots are (U,(1)), (V,(1)): U-marked has mask 10, V-marked mask 01.
  Vertex u_marked = W.vertex_id(1, {1, 0});
  Vertex v_marked = W.vertex_id(1, {0, 1});
  CHECK(W.psi.vmap.at(1) == u_marked);
  CHECK(E.theta.vmap.at(u_marked) == v_marked);
  CHECK(E.theta.vmap.at(v_marked) == u_marked);

  // On an unmarked base the identity vertex map with the swap is a genuine
  // partial automorphism, and its extension again exchanges the marks.
  Structure A0 = make_structure(L, {1}, {});
  RelationalWitness W0 = build_relational_witness(A0);
  Morphism fixed;
  fixed.perm = sw;
  fixed.vmap = {{W0.psi.vmap.at(1), W0.psi.vmap.at(1)}};
  RelationalExtension E0 = extend_relational_pa(W0, fixed);
  CHECK(check_morphism(E0.theta, W0.witness, W0.witness, MorphKind::automorphism).ok);
  CHECK(E0.theta.vmap.at(W0.vertex_id(1, {1, 0})) == W0.vertex_id(1, {0, 1}));
}

TEST_CASE("every partial automorphism extends: all bases on at most 2 vertices") {
  Language L = binary_unary_language();
  std::vector<Tuple> pairs = {{1, 1}, {1, 2}, {2, 1}, {2, 2}};
  for (int rm = 0; rm < 16; ++rm) {
    for (int um = 0; um < 4; ++um) {
      std::set<Tuple> R, U;
      for (int i = 0; i < 4; ++i)
        if (rm & (1 << i)) R.insert(pairs[i]);
      for (int i = 0; i < 2; ++i)
        if (um & (1 << i)) U.insert({i + 1});
      check_eppa(make_structure(L, {1, 2}, {R, U}));
    }
  }
  // single-vertex bases
  for (int rm = 0; rm < 2; ++rm)
    for (int um = 0; um < 2; ++um) {
      std::set<Tuple> R, U;
      if (rm) R.insert({1, 1});
      if (um) U.insert({1});
      check_eppa(make_structure(L, {1}, {R, U}));
    }
}

TEST_CASE("every partial automorphism extends: a 3-vertex base") {
  Structure A = make_structure(binary_unary_language(), {1, 2, 3},
                               {{{1, 2}, {2, 3}}, {{2}}});
  check_eppa(A);
}

TEST_CASE("every partial automorphism extends: swap group on 2 vertices") {
  Language L = two_unary_swap_language();
  for (int um = 0; um < 4; ++um)
    for (int vm = 0; vm < 4; ++vm) {
      std::set<Tuple> U, V;
      for (int i = 0; i < 2; ++i) {
        if (um & (1 << i)) U.insert({i + 1});
        if (vm & (1 << i)) V.insert({i + 1});
      }
      check_eppa(make_structure(L, {1, 2}, {U, V}));
    }
}

TEST_CASE("coherence: extensions compose on all 2-vertex bases") {
  Language L = binary_unary_language();
  std::vector<Tuple> pairs = {{1, 1}, {1, 2}, {2, 1}, {2, 2}};
  long long triples = 0;
  for (int rm = 0; rm < 16; ++rm) {
    for (int um = 0; um < 4; ++um) {
      std::set<Tuple> R, U;
      for (int i = 0; i < 4; ++i)
        if (rm & (1 << i)) R.insert(pairs[i]);
      for (int i = 0; i < 2; ++i)
        if (um & (1 << i)) U.insert({i + 1});
      Structure A = make_structure(L, {1, 2}, {R, U});
      RelationalWitness W = build_relational_witness(A);
      std::vector<Morphism> pas;
      for (const Morphism& p : enumerate_partial_automorphisms(A))
        pas.push_back(lift_to_copy(W, p));
      for (const Morphism& f : pas)
        for (const Morphism& g : pas) {
          if (f.range() != g.domain()) continue;
          Morphism h = compose(g, f);
          Morphism tf = extend_relational_pa(W, f).theta;
          Morphism tg = extend_relational_pa(W, g).theta;
          Morphism th = extend_relational_pa(W, h).theta;
          CHECK(th == compose(tg, tf));
          ++triples;
        }
    }
  }
  CHECK(triples > 0);
}

TEST_CASE("coherence: symbol group multiplies along composition") {
  Language L = two_unary_swap_language();
  Structure A = make_structure(L, {1, 2}, {{{1}}, {{2}}});
  RelationalWitness W = build_relational_witness(A);
  std::vector<Morphism> pas;
  for (const Morphism& p : enumerate_partial_automorphisms(A))
    pas.push_back(lift_to_copy(W, p));
  long long triples = 0;
  bool saw_nontrivial_product = false;
  for (const Morphism& f : pas)
    for (const Morphism& g : pas) {
      if (f.range() != g.domain()) continue;
      Morphism h = compose(g, f);
      CHECK(h.perm == compose(g.perm, f.perm));
      Morphism tf = extend_relational_pa(W, f).theta;
      Morphism tg = extend_relational_pa(W, g).theta;
      Morphism th = extend_relational_pa(W, h).theta;
      CHECK(th == compose(tg, tf));
      if (!f.perm.is_identity() && !g.perm.is_identity()) saw_nontrivial_product = true;
      ++triples;
    }
  CHECK(triples > 0);
  CHECK(saw_nontrivial_product);
}

TEST_CASE("rejections and caps") {
  // functions are not handled here
  Language LF = make_language({"R"}, {2}, {"F"}, {});
  Structure AF = make_structure(LF, {1, 2}, {{}}, {{{1, {2}}}});
  CHECK_THROWS_AS((void)build_relational_witness(AF), input_error);

  // empty base
  Language LR = make_language({"R"}, {2}, {}, {});
  CHECK_THROWS_AS((void)build_relational_witness(make_structure(LR, {}, {{}})),
                  input_error);

  // maps outside the generic copy are refused
  Structure A = make_structure(LR, {1, 2}, {{{1, 2}}});
  RelationalWitness W = build_relational_witness(A);
  Morphism stray;
  stray.perm = identity_perm(1, 0);
  Vertex non_generic = 0;
  while (non_generic == W.psi.vmap.at(1) || non_generic == W.psi.vmap.at(2))
    ++non_generic;
  stray.vmap = {{non_generic, non_generic}};
  CHECK_THROWS_AS((void)extend_relational_pa(W, stray), input_error);

  // a ternary relation on 4 vertices needs 2^37 valuations per vertex
  Language L3 = make_language({"T"}, {3}, {}, {});
  Structure A4 = make_structure(L3, {1, 2, 3, 4}, {{}});
  CHECK_THROWS_AS((void)build_relational_witness(A4), resource_limit_error);
}
