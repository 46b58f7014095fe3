// Witness layer that unwinds induced edge cycles: starting from an
// irreducible-structure-faithful witness B0 whose language carries a binary
// edge relation E (fixed by every symbol permutation, complete on the base),
// it builds a new faithful witness B whose projection to B0 strictly
// simplifies every long induced E-cycle.
//
// A "bad cycle sequence" is an ordered tuple (c_1..c_k), k >= 4, of distinct
// B0-vertices whose induced E-graph is exactly the cycle c_i ~ c_{i+1} (and
// c_k ~ c_1); every rotation and reflection is its own sequence.  A vertex of
// B pairs a B0-vertex x with one {0,1} valuation per member of the function
// closure of x, each valuation defined on the bad cycle sequences through its
// owner.  Two valuations with distinct owners are generic when, on every
// shared sequence, the owners are consecutive in it and the values agree, or
// the owners are the sequence's first and last entries and the values
// disagree.  Relation tuples survive only when their projections form a tuple
// of B0 and all valuations involved are pairwise generic.
//
// Walking a lifted copy of an induced cycle forces equality of values along
// every consecutive edge and inequality across the wrap-around edge of the
// matching sequence — a contradiction, so no subset of B both projects
// injectively onto a long induced cycle and keeps all of its edges.  That is
// the trichotomy: every subset C of B is chordal in E, or loses a vertex
// under the projection, or has strictly fewer E-edges than its image.

#pragma once

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "eppa/core.hpp"
#include "eppa/witness.hpp"
#include "eppa/witness_faithful.hpp"

namespace eppa {

// ---------------------------------------------------------------------------
// Edge-graph helpers (shared with the tree-decomposition machinery)
// ---------------------------------------------------------------------------

// Adjacency of the binary relation r, symmetrised, loops dropped.  Every
// vertex of S has an entry.  input_error if r is out of range or not binary.
std::map<Vertex, VertexSet> relation_adjacency(const Structure& S, int r);

// An induced cycle of length >= 4 in the given adjacency (returned as a
// vertex sequence whose consecutive entries and endpoints are the only
// edges), or nullopt when the graph is chordal.  Exact in both directions;
// deterministic.
std::optional<Tuple> find_induced_long_cycle(const std::map<Vertex, VertexSet>& adj);

// ---------------------------------------------------------------------------
// Bad cycle sequences and valuations
// ---------------------------------------------------------------------------

struct CycleIndex {
  int e_rel = 0;  // which relation of the language is the edge relation
  // All bad cycle sequences, sorted by (length, lexicographic).  Every
  // rotation and reflection of an induced cycle is listed separately.
  std::vector<Tuple> cycles;
  // positions[c][v]: index of v inside cycles[c] (vertices are distinct).
  std::vector<std::map<Vertex, int>> positions;
  // U(x): ascending indices into `cycles` of the sequences through x.
  // Every vertex of B0 has an entry (possibly empty).
  std::map<Vertex, std::vector<int>> containing;
};

// Enumerates every bad cycle sequence of the relation e_rel of B0.
// input_error if that relation is not a loopless undirected graph.
CycleIndex enumerate_bad_cycle_sequences(const Structure& B0, int e_rel,
                                         const Caps& caps = default_caps());

// Why relation r cannot serve as the edge relation for base A inside carrier
// B0 — it must be binary, fixed by every symbol permutation, a loopless
// undirected graph on B0, and complete on A.  Empty when it qualifies.
std::string edge_relation_objection(const Structure& A, const Structure& B0, int r);

// Resolves an edge-relation index: validates an explicit one, or finds the
// unique qualifying relation when passed -1.  input_error (prefixed by `who`)
// when the explicit one is objectionable, none qualifies, or several do.
int resolve_edge_relation(const Structure& A, const Structure& B0, int e_rel,
                          const std::string& who);

// One {0,1} value per bad cycle sequence through `owner`, stored parallel to
// CycleIndex::containing[owner].
struct UnwindValuation {
  Vertex owner = 0;
  std::vector<int> vals;
  bool operator==(const UnwindValuation&) const = default;
  auto operator<=>(const UnwindValuation&) const = default;
};

// A valuation structure is represented by the set of its valuations (one per
// closure member); the structure content is canonical, so the set determines
// it.
using UnwindSet = std::set<UnwindValuation>;

// Generic pair: equal, or distinct owners such that every shared sequence
// has the owners consecutive with equal values, or at its two ends with
// differing values.  Owners sharing a sequence without being adjacent on it
// are never generic.
bool generic_pair(const CycleIndex& cycles, const UnwindValuation& a,
                  const UnwindValuation& b);
bool is_generic(const CycleIndex& cycles, const UnwindSet& S);

// ---------------------------------------------------------------------------
// The unwound witness
// ---------------------------------------------------------------------------

struct UnwindWitness {
  Structure base;  // A
  Witness b0;      // witness bundle for A (base == A, with psi: A -> B0)
  Structure witness;
  Morphism psi;  // A -> witness, identity symbol permutation
  CycleIndex cycles;
  std::vector<Vertex> projection;    // witness id -> B0 vertex (the owner)
  std::vector<UnwindSet> valuation;  // witness id -> its valuation structure
  std::map<std::pair<Vertex, UnwindSet>, Vertex> index;

  // Witness id of the pair (x, V); throws input_error when no such vertex.
  Vertex vertex_id(Vertex x, const UnwindSet& V) const;
  // The owner's own valuation inside valuation[id].
  const UnwindValuation& chi(Vertex id) const;
  // Union-genericity of the valuation structures of two witness vertices.
  bool generic_vertices(Vertex id1, Vertex id2) const;
};

// Builds the unwound witness on top of a witness bundle for A.  Preconditions
// (all input_error): b0 is a bundle for A; e_rel names a binary relation
// fixed by every symbol permutation whose content is complete on A and a
// loopless undirected graph on b0.witness.  Pass e_rel = -1 to auto-detect
// the unique relation with those properties.  b0 is trusted to be
// irreducible-structure faithful (certify separately).
UnwindWitness build_unwound_witness(const Structure& A, Witness b0, int e_rel = -1,
                                    const Caps& caps = default_caps());

// ---------------------------------------------------------------------------
// Extension
// ---------------------------------------------------------------------------

struct UnwindExtension {
  Morphism theta;   // automorphism of the witness extending phi
  Morphism phihat;  // the B0 automorphism it rides on (as passed in)
  // Bad cycle sequences whose value some pair of phi flips; transporting a
  // valuation with phihat XORs the values on these sequences.
  std::set<int> flips;
  std::map<UnwindValuation, UnwindValuation> qhat;  // permutation of every valuation in use
};

// Extends a partial automorphism phi of the witness to an automorphism,
// given an automorphism phihat of B0 that extends the projection of phi and
// uses the same symbol permutation.  phi's domain and range may sit anywhere
// in the witness but must be generic (precondition_error otherwise); an
// unsuitable phihat is an input_error.  Coherent whenever phihat is chosen
// coherently (the flip sets compose by symmetric difference).
UnwindExtension extend_unwound_pa(const UnwindWitness& W, const Morphism& phi,
                                  const Morphism& phihat,
                                  const Caps& caps = default_caps());

// Certifies irreducible-structure faithfulness of the unwound witness
// constructively on every irreducible substructure (same certificate shape
// as the faithful layer).  Failures are reported, not thrown.
FaithfulnessReport certify_unwind_faithfulness(const UnwindWitness& W,
                                               const Caps& caps = default_caps());

// ---------------------------------------------------------------------------
// The projection trichotomy
// ---------------------------------------------------------------------------

// For a subset C of a structure B with a vertex map f into B0, exactly which
// escape the trichotomy grants: the induced edge graph on C is chordal
// (no induced cycle of length >= 4), or f collapses C, or f(C) spans
// strictly more edges in B0 than C does in B.  `violated` means none holds.
enum class SparsenCase { chordal, collapsed, denser, violated };

SparsenCase sparsen_case(const Structure& B, const Structure& B0, int e_rel,
                         const std::vector<Vertex>& f, const VertexSet& C);

}  // namespace eppa
