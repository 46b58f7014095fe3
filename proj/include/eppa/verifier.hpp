// Independent brute-force checks that accept or refute the claims a witness
// construction makes: extendability of every partial automorphism of the
// distinguished copy, coherence of a constructive extension operator,
// irreducible-structure faithfulness, the projection trichotomy of a layered
// witness, and vertex-count guarantees.
//
// Every sweep produces a VerifyReport.  A failing report always carries a
// replayable counterexample: the exact partial automorphism, triple, vertex
// subset, or substructure on which the claim breaks, sufficient to reproduce
// the failure with the public API.  Reports are deterministic for a fixed
// seed, and the parallel sweeps produce reports identical to the serial ones
// (the first failure is the least-index failure regardless of schedule).

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eppa/core.hpp"
#include "eppa/witness.hpp"

namespace eppa {

// A constructive extension operator: maps a partial automorphism of the
// distinguished copy to an automorphism of the witness extending it.
using ExtensionOperator = std::function<Morphism(const Morphism&)>;

// Outcome of one verification sweep.
//   kind               "eppa" | "coherence" | "faithfulness" | "unwind" | "size"
//   pass               whether every checked item satisfied the claim
//   detail             human-readable verdict; names the violation on failure
//   instance           printable descriptors: input sizes, parameters (cap,
//                      seed, sample count), and outcome distributions
//   counter_morphisms  the failing partial automorphism (plus the operator's
//                      faulty output), or the failing triple (f, g, h)
//   counter_subset     the failing vertex subset or unmovable irreducible
//   checked            items examined (partial automorphisms, triples,
//                      substructures, subsets)
//   sampled            randomly sampled items; 0 when the sweep is exhaustive
struct VerifyReport {
  std::string kind;
  bool pass = false;
  std::string detail;
  std::map<std::string, std::string> instance;
  std::vector<Morphism> counter_morphisms;
  std::optional<VertexSet> counter_subset;
  long long checked = 0;
  long long sampled = 0;
  bool operator==(const VerifyReport&) const = default;
};

// One-line rendering of a morphism, used in report details and by the
// command-line reporter: "perm[r:.. f:..] {u->v, ...}".
std::string morphism_text(const Morphism& m);

// ---------------------------------------------------------------------------
// Extension property
// ---------------------------------------------------------------------------

// Checks that every partial automorphism of the copy psi(A) inside B extends
// to an automorphism of B.  psi must be an embedding A -> B (a failing psi
// fails the report rather than throwing).  When an extension operator is
// supplied, each of its outputs is verified: it must carry the same symbol
// permutation as its input, contain the input's vertex map, and pass the
// automorphism check on B.  Without an operator, exhaustive backtracking
// search decides extendability (nullopt is a proof of nonexistence).
//
// The sweep over partial automorphisms runs under OpenMP when `parallel` is
// true; a user-supplied operator must then be safe to invoke concurrently
// (stateless closures qualify).  Throws resource_limit_error when the
// enumeration exceeds the caps.
VerifyReport verify_eppa_witness(const Structure& A, const Structure& B,
                                 const Morphism& psi,
                                 const std::optional<ExtensionOperator>& extender,
                                 const Caps& caps = default_caps(),
                                 bool parallel = true);

// Bundle convenience: checks W.extend over W.psi(W.base) inside W.witness.
VerifyReport verify_eppa_witness(const Witness& W, const Caps& caps = default_caps(),
                                 bool parallel = true);

// ---------------------------------------------------------------------------
// Coherence
// ---------------------------------------------------------------------------

// Checks coherence of a deterministic extension operator: for every pair
// f, g of partial automorphisms of psi(A) with range(f) == domain(g), the
// triple (f, g, h = g after f) must satisfy
//     extender(h) == extender(g) after extender(f).
// A failing report carries the triple in counter_morphisms as {f, g, h}.
// An operator that throws on some partial automorphism fails the report at
// the first triple mentioning it.
VerifyReport verify_coherence(const Structure& A, const Structure& B,
                              const Morphism& psi, const ExtensionOperator& extender,
                              const Caps& caps = default_caps(), bool parallel = true);

VerifyReport verify_coherence(const Witness& W, const Caps& caps = default_caps(),
                              bool parallel = true);

// ---------------------------------------------------------------------------
// Faithfulness
// ---------------------------------------------------------------------------

// Checks irreducible-structure faithfulness: every nonempty closed
// irreducible substructure C of B must admit an automorphism of B moving C
// into psi(A).  The per-substructure search is find_automorphism_with_image,
// which is exhaustive, so a failure is a proof that C cannot be moved.  The
// failing report carries C in counter_subset.
VerifyReport verify_faithfulness(const Structure& A, const Structure& B,
                                 const Morphism& psi, const Caps& caps = default_caps(),
                                 bool parallel = true);

// ---------------------------------------------------------------------------
// Projection trichotomy
// ---------------------------------------------------------------------------

// Checks the projection trichotomy for a homomorphism-embedding f: B -> B0
// over a shared edge relation: for every vertex subset C of B, at least one
// of the following holds:
//   (a) the edge graph induced on C has no induced cycle of length >= 4,
//   (b) f is not injective on C,
//   (c) f(C) spans strictly more undirected edges in B0 than C does in B.
// A subset satisfying none of them fails the sweep and lands in
// counter_subset.  The outcome distribution (keys "chordal", "collapsed",
// "denser", "violated") is reported in the instance map.
//
// e_rel names the edge relation; pass -1 to auto-detect the unique binary
// relation fixed by every symbol permutation that is a loopless undirected
// graph on both B and B0 (input_error when none or several qualify).
//
// The sweep is exhaustive over all 2^|B| subsets when |B| <= cap (throwing
// resource_limit_error if that exceeds caps.max_subset_bits); when |B| > cap,
// `samples` subsets are drawn uniformly at random with the given seed.  Cap,
// seed, and sample count are recorded in the report.
VerifyReport verify_unwind_property(const Structure& B, const Structure& B0,
                                    const Morphism& f, int cap, std::uint64_t seed,
                                    int e_rel = -1, long long samples = 10000,
                                    const Caps& caps = default_caps(),
                                    bool parallel = true);

// ---------------------------------------------------------------------------
// Size audit
// ---------------------------------------------------------------------------

// Audits the vertex count of a delivered witness B against the size
// guarantee of the construction named by `kind`:
//
//   "graph"       exactly n * 2^(n-1) vertices, n = |A|.
//   "relational"  at most n * 2^(sum over relations of n^a - (n-1)^a),
//                 a the arity: per generic vertex, one bit per tuple
//                 through it.
//   "functions"   at most n * m^c * o: every vertex is determined by a base
//                 vertex, an injection of its closure (size <= c) into the
//                 carrier below (size m), and one of the o relabellings of A.
//                 Requires `below` = the carrier of the reduct witness.
//   "faithful"    at most sum over x in below of the product, over closure
//                 members y of x and irreducible substructures I of `below`
//                 through y, of max(1, |I| - 1): each vertex is a base
//                 vertex with one valuation per closure member.
//   "unwind"      same shape with factor 2^(cycle sequences through y);
//                 resolves the edge relation of `below` like
//                 verify_unwind_property (e_rel, -1 auto-detects).
//
// The expected count (exact value, or its base-2 logarithm when it does not
// fit a 64-bit integer) is recorded in instance["expected"]; pass means
// |B| equals the bound for "graph" and respects it for the other kinds.
// input_error on an unknown kind or a missing `below`.
VerifyReport audit_witness_size(const std::string& kind, const Structure& A,
                                const Structure& B,
                                const std::optional<Structure>& below = std::nullopt,
                                int e_rel = -1, const Caps& caps = default_caps());

}  // namespace eppa
