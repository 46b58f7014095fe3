// Relational witness construction and partial-automorphism extension.
//
// Flip tables: for each relation R of arity a and each base tuple x', the
// extension computes F_R(x') in {0,1}^a by three cases on how x' meets the
// projected domain D of phi:
//   (1) all entries in D: entry i is 1 iff the generic vertex over x'[i]
//       disagrees with its phi-image about slot (R, x') vs (phi_L(R),
//       phihat(x'));
//   (2) some but not all in D: in-domain entries as in (1); out-of-domain
//       entries are 0 except those equal to the first out-of-domain vertex
//       x_m, which are all-0 or all-1 so that the number of distinct vertices
//       flipped comes out even;
//   (3) no entry in D: all 0.
// Two invariants hold for every table: entries agree on equal vertices, and
// the number of distinct flipped vertices is even (in case (1) this follows
// from phi preserving the parity rule; violations indicate a logic error,
// not bad input).

#include "eppa/witness_relational.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace eppa {

namespace {

void require_relational(const Structure& A) {
  if (A.lang.nfun() != 0)
    throw input_error(
        "relational witness requires a language without function symbols");
  if (A.verts.empty())
    throw input_error("relational witness requires a nonempty structure");
}

}  // namespace

int RelationalWitness::bit_index(int owner_pos, int rel, const Tuple& t) const {
  const auto& rank = tuple_rank.at((size_t)owner_pos).at((size_t)rel);
  auto it = rank.find(t);
  if (it == rank.end())
    throw input_error("tuple does not contain the owner vertex");
  return rel_offset.at((size_t)rel) + it->second;
}

int RelationalWitness::bit_at(Vertex b, int rel, const Tuple& t) const {
  int p = base.pos(owner(b));
  return bits.at((size_t)b).at((size_t)bit_index(p, rel, t));
}

Vertex RelationalWitness::vertex_id(Vertex x,
                                    const std::vector<std::uint8_t>& valuation) const {
  if ((int)valuation.size() != total_bits)
    throw input_error("valuation has the wrong number of slots");
  std::uint64_t mask = 0;
  for (int j = 0; j < total_bits; ++j)
    if (valuation[(size_t)j]) mask |= (std::uint64_t)1 << (total_bits - 1 - j);
  return (Vertex)((std::uint64_t)base.pos(x) * ((std::uint64_t)1 << total_bits) +
                  mask);
}

RelationalWitness build_relational_witness(const Structure& A, const Caps& caps) {
  require_relational(A);
  RelationalWitness W;
  W.base = A;
  const int n = (int)A.verts.size();
  const int nrel = (int)A.lang.nrel();

  // Slot layout.  |{a-tuples over A containing x}| = n^a - (n-1)^a for every
  // x, so all owners share rel_offset and total_bits.
  W.rel_offset.assign((size_t)nrel, 0);
  long long total = 0;
  for (int r = 0; r < nrel; ++r) {
    W.rel_offset[(size_t)r] = (int)total;
    int a = A.lang.rel_arity[(size_t)r];
    long long with = 1, without = 1;
    for (int i = 0; i < a; ++i) {
      with *= n;
      without *= (n - 1);
      if (with > (1LL << 40))
        throw resource_limit_error("relation arity blows up the tuple universe");
    }
    total += with - without;
  }
  if (total >= 62 || (long long)n * (1LL << total) > caps.max_witness_vertices)
    throw resource_limit_error("relational witness would exceed the vertex cap");
  W.total_bits = (int)total;
  const std::uint64_t per_owner = (std::uint64_t)1 << W.total_bits;

  // Tuple universes per owner.
  W.universe.assign((size_t)n, {});
  W.tuple_rank.assign((size_t)n, {});
  for (int p = 0; p < n; ++p) {
    Vertex x = A.verts[(size_t)p];
    W.universe[(size_t)p].resize((size_t)nrel);
    W.tuple_rank[(size_t)p].resize((size_t)nrel);
    for (int r = 0; r < nrel; ++r) {
      int a = A.lang.rel_arity[(size_t)r];
      for (const Tuple& t : all_tuples(A.verts, a)) {
        if (std::find(t.begin(), t.end(), x) == t.end()) continue;
        W.tuple_rank[(size_t)p][(size_t)r][t] =
            (int)W.universe[(size_t)p][(size_t)r].size();
        W.universe[(size_t)p][(size_t)r].push_back(t);
      }
    }
  }

  // Vertices and their valuations.
  Budget budget(caps);
  Structure B;
  B.lang = A.lang;
  const std::uint64_t count = (std::uint64_t)n * per_owner;
  W.projection.resize(count);
  W.bits.resize(count);
  for (std::uint64_t v = 0; v < count; ++v) {
    B.verts.push_back((Vertex)v);
    int p = (int)(v / per_owner);
    std::uint64_t mask = v % per_owner;
    W.projection[v] = A.verts[(size_t)p];
    std::vector<std::uint8_t> val((size_t)W.total_bits, 0);
    for (int j = 0; j < W.total_bits; ++j)
      val[(size_t)j] = (std::uint8_t)((mask >> (W.total_bits - 1 - j)) & 1);
    W.bits[v] = std::move(val);
  }

  // Relations: entries sharing a base vertex must share valuations (i.e. be
  // the same witness vertex), and the XOR of the distinct entries' bits on
  // the projected tuple must be 1.
  B.rel.resize((size_t)nrel);
  for (int r = 0; r < nrel; ++r) {
    int a = A.lang.rel_arity[(size_t)r];
    long long ntuples = 1;
    for (int i = 0; i < a; ++i) {
      ntuples *= (long long)count;
      if (ntuples > caps.max_items)
        throw resource_limit_error("relational witness content exceeds the item cap");
    }
    std::vector<std::uint64_t> idx((size_t)a, 0);
    for (;;) {
      budget.spend("relational witness tuples");
      bool consistent = true;
      std::map<Vertex, std::uint64_t> seen;  // base vertex -> witness id
      Tuple proj((size_t)a);
      for (int i = 0; i < a && consistent; ++i) {
        Vertex x = W.projection[idx[(size_t)i]];
        proj[(size_t)i] = x;
        auto [it, fresh] = seen.emplace(x, idx[(size_t)i]);
        if (!fresh && it->second != idx[(size_t)i]) consistent = false;
      }
      if (consistent) {
        int parity = 0;
        for (const auto& [x, b] : seen) parity ^= W.bit_at((Vertex)b, r, proj);
        if (parity) {
          Tuple t((size_t)a);
          for (int i = 0; i < a; ++i) t[(size_t)i] = (Vertex)idx[(size_t)i];
          B.rel[(size_t)r].insert(std::move(t));
        }
      }
      int i = a - 1;
      while (i >= 0 && idx[(size_t)i] + 1 == count) idx[(size_t)i--] = 0;
      if (i < 0) break;
      ++idx[(size_t)i];
    }
  }
  B.finalize();
  W.witness = std::move(B);

  // Generic embedding: x's valuation marks exactly the base tuples that hold
  // in A and start with x.
  W.psi.perm = identity_perm((size_t)nrel, 0);
  for (int p = 0; p < n; ++p) {
    Vertex x = A.verts[(size_t)p];
    std::vector<std::uint8_t> val((size_t)W.total_bits, 0);
    for (int r = 0; r < nrel; ++r) {
      const auto& uni = W.universe[(size_t)p][(size_t)r];
      for (size_t k = 0; k < uni.size(); ++k)
        if (uni[k][0] == x && A.rel[(size_t)r].count(uni[k]))
          val[(size_t)(W.rel_offset[(size_t)r] + (int)k)] = 1;
    }
    W.psi.vmap[x] = W.vertex_id(x, val);
  }
  return W;
}

RelationalExtension extend_relational_pa(const RelationalWitness& W,
                                         const Morphism& phi, const Caps& caps) {
  const Structure& A = W.base;
  const Structure& B = W.witness;
  const int nrel = (int)A.lang.nrel();

  // Domain and range must lie in the generic copy.
  VertexSet image;
  for (const auto& [x, b] : W.psi.vmap) image.insert(b);
  for (const auto& [u, v] : phi.vmap) {
    if (!B.has_vertex(u) || !image.count(u) || !B.has_vertex(v) || !image.count(v))
      throw input_error("extension domain must lie in the generic copy");
  }
  CheckResult ok = check_morphism(phi, B, B, MorphKind::partial_automorphism, caps);
  if (!ok)
    throw input_error("not a partial automorphism of the generic copy: " +
                      ok.violation);

  // Project to the base and extend order-preservingly.
  std::map<Vertex, Vertex> proj_map;
  VertexSet dom_base;
  for (const auto& [u, v] : phi.vmap) {
    proj_map[W.owner(u)] = W.owner(v);
    dom_base.insert(W.owner(u));
  }
  RelationalExtension E;
  E.phihat = order_preserving_extension(A.verts, proj_map);
  const SymbolPerm& g = phi.perm;

  auto hat_tuple = [&](const Tuple& t) {
    Tuple out(t.size());
    for (size_t i = 0; i < t.size(); ++i) out[i] = E.phihat.at(t[i]);
    return out;
  };
  // Disagreement between the generic vertex over x and its phi-image about
  // slot (r, t) vs (g(r), phihat(t)); only meaningful for x in the projected
  // domain.
  auto slot_flip = [&](Vertex x, int r, const Tuple& t, const Tuple& hat_t) {
    Vertex u = W.psi.vmap.at(x);
    Vertex v = phi.vmap.at(u);
    return (std::uint8_t)(W.bit_at(u, r, t) ^
                          W.bit_at(v, g.rel_map[(size_t)r], hat_t));
  };

  // Flip tables.
  Budget budget(caps);
  E.flips.resize((size_t)nrel);
  for (int r = 0; r < nrel; ++r) {
    int a = A.lang.rel_arity[(size_t)r];
    for (const Tuple& t : all_tuples(A.verts, a)) {
      budget.spend("flip table entries");
      std::vector<std::uint8_t> F((size_t)a, 0);
      Tuple hat_t = hat_tuple(t);
      int m = -1;  // first index whose vertex misses the projected domain
      bool any_in = false;
      for (int i = 0; i < a; ++i) {
        if (dom_base.count(t[(size_t)i]))
          any_in = true;
        else if (m < 0)
          m = i;
      }
      if (any_in) {
        for (int i = 0; i < a; ++i)
          if (dom_base.count(t[(size_t)i]))
            F[(size_t)i] = slot_flip(t[(size_t)i], r, t, hat_t);
        if (m >= 0) {
          // Out-of-domain entries other than t[m] stay 0; by minimality of m
          // they all sit at indices > m.
          for (int j = 0; j < a; ++j)
            if (!dom_base.count(t[(size_t)j]) && t[(size_t)j] != t[(size_t)m] &&
                j < m)
              throw std::logic_error("flip case (2): index before the first "
                                     "out-of-domain entry escaped the domain");
          std::set<Vertex> flipped;
          for (int i = 0; i < a; ++i)
            if (F[(size_t)i]) flipped.insert(t[(size_t)i]);
          if (flipped.size() % 2 == 1)
            for (int j = 0; j < a; ++j)
              if (t[(size_t)j] == t[(size_t)m]) F[(size_t)j] = 1;
        }
      }
      // Invariants: equal vertices get equal entries; the number of distinct
      // flipped vertices is even.
      std::set<Vertex> flipped, unflipped;
      for (int i = 0; i < a; ++i)
        (F[(size_t)i] ? flipped : unflipped).insert(t[(size_t)i]);
      for (Vertex x : flipped)
        if (unflipped.count(x))
          throw std::logic_error("flip table disagrees on equal entries");
      if (flipped.size() % 2 == 1)
        throw std::logic_error("flip table flips an odd number of vertices");
      E.flips[(size_t)r][t] = std::move(F);
    }
  }

  // theta: re-address every witness vertex.  Slot (r, t) of the source
  // valuation lands in slot (g(r), phihat(t)) of the image valuation, XORed
  // with the flip entry for the owner.
  E.theta.perm = g;
  for (Vertex b : B.verts) {
    Vertex x = W.owner(b);
    int p = A.pos(x);
    Vertex x2 = E.phihat.at(x);
    int p2 = A.pos(x2);
    budget.spend("extension image vertices");
    std::vector<std::uint8_t> val((size_t)W.total_bits, 0);
    for (int r = 0; r < nrel; ++r) {
      int r2 = g.rel_map[(size_t)r];
      const auto& uni = W.universe[(size_t)p][(size_t)r];
      for (size_t k = 0; k < uni.size(); ++k) {
        const Tuple& t = uni[k];
        const std::vector<std::uint8_t>& F = E.flips[(size_t)r].at(t);
        std::uint8_t flip = 0;
        for (size_t i = 0; i < t.size(); ++i)
          if (t[i] == x) {
            flip = F[i];
            break;
          }
        std::uint8_t v =
            (std::uint8_t)(W.bits[(size_t)b]
                                 [(size_t)(W.rel_offset[(size_t)r] + (int)k)] ^
                           flip);
        val[(size_t)W.bit_index(p2, r2, hat_tuple(t))] = v;
      }
    }
    E.theta.vmap[b] = W.vertex_id(x2, val);
  }
  return E;
}

}  // namespace eppa
