// Tree amalgamations and the layered witness pipeline.
//
// A tree amalgamation glues copies of one pattern structure along a tree:
// each copy embeds into the result, each tree edge records the overlap of
// its two copies, and attaching the copies in tree order performs one free
// amalgamation per edge.  This module verifies and replays such traces,
// decomposes a structure into one (possible exactly when its designated
// edge relation is chordal and every irreducible substructure embeds into
// the pattern), completes one by amalgamating along the trace, and
// amalgamates two structures over a common part through any witness of
// their disjoint union.
//
// The pipeline stacks the established layers: adjoin a fresh complete
// binary edge relation to the base and the initial witness, apply the
// faithfulness layer once, unwind long induced edge cycles enough times
// that every small substructure can be chased to a cycle-free stage, and
// finally drop the auxiliary relation again.  The result is a witness whose
// small substructures all carry tree-amalgamation certificates.

#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "eppa/core.hpp"
#include "eppa/witness.hpp"

namespace eppa {

// -----------------------------------------------------------------------
// Tree amalgamations
// -----------------------------------------------------------------------

// One tree edge between copies `a` and `b`; `overlap` is the shared vertex
// set in result ids (exactly the intersection of the two copy images).
struct TreeCopyEdge {
  int a = 0;
  int b = 0;
  VertexSet overlap;
};

// A replayable trace: `copies[i]` embeds `pattern` into `result`, and
// `edges` forms a tree on copy indices (empty for a single copy).
struct TreeAmalgamation {
  Structure pattern;
  Structure result;
  std::vector<Morphism> copies;
  std::vector<TreeCopyEdge> edges;
};

// Rebuilds the result from the trace alone: the union of the pattern's
// content pushed through every copy, vertices in ascending order.
Structure replay_tree_amalgamation(const TreeAmalgamation& T);

// Checks the whole contract: copies are embeddings, edges form a tree,
// every overlap is exactly the intersection of its two copy images and is
// empty or irreducible, attaching copies in tree order meets earlier copies
// only in the recorded overlap, copy images cover the result, every
// relation tuple lies inside one copy image, every irreducible substructure
// of the result lies inside one copy image, and the replay reproduces the
// result up to vertex order.
CheckResult verify_tree_amalgamation(const TreeAmalgamation& T,
                                     const Caps& caps = default_caps());

// -----------------------------------------------------------------------
// Decomposition into a tree amalgamation
// -----------------------------------------------------------------------

struct TreeDecomposition {
  bool ok = false;
  std::string note;  // on failure: which precondition broke and where
  // When the edge relation has a long induced cycle: one such cycle.
  std::optional<Tuple> cycle;
  TreeAmalgamation tree;  // pattern = A (up to relabelling of symbols)
  Morphism inclusion;     // embedding B -> tree.result, identity symbol perm
};

// Decomposes B into a tree amalgamation of copies of A.  Preconditions
// (reported, not thrown): the designated edge relation of B has no induced
// cycle of length >= 4, and every irreducible substructure of B embeds into
// A.  e_rel = -1 auto-detects the edge relation (binary, fixed by the whole
// symbol group, loopless undirected on B, complete on A).  Recursion: an
// irreducible piece becomes a single copy; otherwise the smallest minimal
// closed cut splits it into two pieces glued by free amalgamation over the
// cut.  Exponential in |B|; |B| is capped by caps.max_subset_bits.
TreeDecomposition decompose_tree_amalgamation(const Structure& B, const Structure& A,
                                              int e_rel = -1,
                                              const Caps& caps = default_caps());

// First embedding of S into T in deterministic order (symbol permutations
// in group order, vertices in carrier order), or nullopt when none exists
// (the search is exhaustive).
std::optional<Morphism> find_embedding(const Structure& S, const Structure& T,
                                       const Caps& caps = default_caps());

// -----------------------------------------------------------------------
// Amalgamation through a witness
// -----------------------------------------------------------------------

struct EppaAmalgam {
  Structure joint;   // disjoint union of B1 and B2
  Morphism j1, j2;   // canonical embeddings into the joint
  Witness witness;   // the provider's witness for the joint
  Morphism beta1, beta2;  // embeddings of B1, B2 into witness.witness
};

// Amalgamates B1 and B2 over A (alpha1: A -> B1, alpha2: A -> B2
// embeddings): embed both into the witness of their disjoint union, then
// extend the partial automorphism matching the two copies of A.  The
// returned beta1, beta2 satisfy beta1 . alpha1 == beta2 . alpha2.
EppaAmalgam amalgamate_via_eppa(const Structure& B1, const Structure& B2,
                                const Structure& A, const Morphism& alpha1,
                                const Morphism& alpha2,
                                const std::function<Witness(const Structure&)>& provider,
                                const Caps& caps = default_caps());

// -----------------------------------------------------------------------
// Completion of a tree amalgamation
// -----------------------------------------------------------------------

// One amalgamation step: given embeddings d1: D -> B1 and d2: D -> B2,
// produce C with embeddings beta1: B1 -> C and beta2: B2 -> C agreeing on D.
struct AmalgamTriple {
  Structure c;
  Morphism beta1, beta2;
};
using Amalgamator = std::function<AmalgamTriple(
    const Structure& B1, const Structure& B2, const Structure& D,
    const Morphism& d1, const Morphism& d2)>;

struct TreeCompletion {
  Structure completed;      // the final amalgam, built along the trace
  Morphism hom_embedding;   // result -> completed, verified
};

// Folds the trace in tree order, amalgamating the running structure with a
// fresh copy of the pattern over each recorded overlap.  Every oracle
// answer is verified (embeddings + commuting square); failures carry the
// stage index.  The returned map is a verified homomorphism-embedding.
TreeCompletion completion_of_tree_amalgamation(const TreeAmalgamation& T,
                                               const Amalgamator& oracle,
                                               const Caps& caps = default_caps());

// -----------------------------------------------------------------------
// The auxiliary edge relation
// -----------------------------------------------------------------------

// Name of the adjoined edge relation; an input language already using it is
// rejected rather than shadowed.
inline constexpr const char* kEdgeSymbol = "E+";

// L plus a fresh binary relation named kEdgeSymbol, fixed by every symbol
// permutation.  input_error when the name is already taken.
Language add_edge_relation(const Language& L);

// S over the extended language, with the new relation complete (all ordered
// pairs of distinct vertices).  Lp must be add_edge_relation(S.lang).
Structure with_complete_edges(const Structure& S, const Language& Lp);

// Language / structure with relation r removed.  Every symbol permutation
// must fix r (input_error otherwise).
Language drop_relation(const Language& L, int r);
Structure drop_relation(const Structure& S, int r);

// The bundle b0 moved to the extended language: base and witness get the
// complete edge relation, psi is unchanged on vertices, and extension strips
// the new relation from the symbol permutation, extends below, and puts it
// back.  Complete edges are preserved by every bijection, so the extension
// property and coherence carry over unchanged.
Witness lift_witness_to_edge_language(const Witness& b0, const Language& Lp);

// -----------------------------------------------------------------------
// The pipeline
// -----------------------------------------------------------------------

struct PipelineWitness {
  Language lang_plus;   // base language plus the auxiliary edge relation
  int e_rel = 0;        // its index in lang_plus
  Structure base_plus;  // A with complete edges
  Witness b0_plus;      // the initial bundle, lifted
  // stages[0] = the faithful layer over b0_plus; stages[i >= 1] = the i-th
  // unwinding.  All over lang_plus.
  std::vector<Witness> stages;
  // stage_maps[i][id] = the projection of stage-i witness vertex id into the
  // previous stage's witness (stage_maps[0] lands in b0_plus.witness).
  std::vector<std::vector<Vertex>> stage_maps;
  // Composite projection of the last stage into b0_plus.witness.
  std::map<Vertex, Vertex> to_b0;
  int rounds = 0;  // number of unwinding stages
  // The delivered witness over the original language: last stage with the
  // auxiliary relation dropped; extension lifts the symbol permutation,
  // extends in the last stage, and restricts back.
  Witness result;
};

// Runs the pipeline for substructures of up to n vertices: one faithfulness
// round, then (n-1) * binom(n, 2) + 1 unwinding rounds.  A must be
// irreducible (input_error otherwise), b0 a witness bundle for A, n >= 1.
// Witness sizes grow doubly exponentially per round; feasible inputs are
// ones whose stages collapse or stay tiny.
PipelineWitness build_pipeline_witness(const Structure& A, Witness b0, int n,
                                       const Caps& caps = default_caps());

// A tree-amalgamation certificate for one closed substructure C of the
// delivered witness: the stage whose chased image of C is cycle-free, the
// chased images along the way, the decomposition of that image into a tree
// of copies of base_plus, and the verified homomorphism-embedding of C into
// the tree's result (checked over both languages).
struct TreeLikenessCertificate {
  bool ok = false;
  std::string note;
  VertexSet c;
  int stage = -1;  // index into stages; -1 when every stage kept a cycle
  // chased[j] = image of C in stages[stage + j].witness, ending at C itself.
  std::vector<VertexSet> chased;
  TreeDecomposition dec;
  Morphism hom_embedding;  // C -> dec.tree.result, over lang_plus
  Structure tree_reduct;   // dec.tree.result with the auxiliary relation dropped
};

// Chases C down the stage maps from the top, finds the first stage whose
// image has no long induced edge cycle, and decomposes there.  C must be a
// closed subset of result.witness (input_error otherwise).
TreeLikenessCertificate certify_tree_likeness(const PipelineWitness& P,
                                              const VertexSet& C,
                                              const Caps& caps = default_caps());

}  // namespace eppa
