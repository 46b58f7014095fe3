// Integer-valued metric spaces treated as edge-labelled graphs: detection of
// non-metric cycles (a cycle whose longest edge exceeds the sum of the rest),
// the shortest-path completion that turns a labelled graph into a metric
// space on the same vertices, membership checks for classes described by
// finitely many forbidden irreducible substructures, and construction of
// metric witnesses with a forbidden unit-distance clique.
//
// An EdgeLabelledGraph carries at most one positive integer label per
// unordered vertex pair, drawn from a frozen finite label set `s`.  The
// relational encoding uses one binary symmetric irreflexive relation R1..Rm
// per distance value (trivial symbol group); conversions both ways are
// provided and validated.
//
// build_metric_witness(A, n) delivers a witness bundle for the metric space
// A among metric spaces with no n-point unit-distance clique.  Two routes:
// when the relational encoding of A is exhaustively verified to be its own
// witness, the layered pipeline runs literally and the delivered structure is
// the shortest-path completion of its output; otherwise a bounded search
// over circulant candidates (cyclic vertex set, distance = capped multiple of
// the circular step) finds a candidate that is verified exhaustively to be a
// metric space, clique-free, containing A, with every lifted partial map of A
// extendable.  The route taken is recorded on the result.

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "eppa/core.hpp"
#include "eppa/tree_pipeline.hpp"
#include "eppa/witness.hpp"

namespace eppa {

// ---------------------------------------------------------------------------
// Edge-labelled graphs.
// ---------------------------------------------------------------------------

struct EdgeLabelledGraph {
  std::vector<Vertex> verts;
  // Keyed by (min, max); values are positive integers from `s`.
  std::map<std::pair<Vertex, Vertex>, int> labels;
  // The frozen label set; every label used lies in it.
  std::set<int> s;

  size_t size() const { return verts.size(); }
  bool has_vertex(Vertex v) const;
  // The label of {u, v}, or 0 when the pair is unlabelled (or u == v).
  int label(Vertex u, Vertex v) const;
};

// Validates and assembles a labelled graph.  Each edge is (u, v, label) with
// u != v, both endpoints among `verts`, label >= 1, each unordered pair at
// most once.  When `s` is empty it is frozen as the set of labels actually
// used; otherwise every label (and every member of `s`) must be positive and
// the labels must lie in `s`.  input_error on any violation.
EdgeLabelledGraph make_edge_labelled_graph(
    const std::vector<Vertex>& verts,
    const std::vector<std::tuple<Vertex, Vertex, int>>& edges,
    const std::set<int>& s = {});

// The distance cap m = max(2, max s).
int metric_bound(const EdgeLabelledGraph& G);

// Whether G is a metric space: every pair labelled and every triangle
// inequality satisfied.  The violation names the offending pair or triple.
CheckResult check_metric_space(const EdgeLabelledGraph& G);

// Whether some n vertices are pairwise at distance 1.
bool contains_unit_clique(const EdgeLabelledGraph& G, int n);

// All label-preserving vertex bijections G -> G, in lexicographic image
// order.  Exhaustive backtracking; intended for small graphs.
std::vector<std::map<Vertex, Vertex>> enumerate_graph_automorphisms(
    const EdgeLabelledGraph& G);

// ---------------------------------------------------------------------------
// Non-metric cycles and the shortest-path completion.
// ---------------------------------------------------------------------------

// A cycle c_1 .. c_t (t >= 3, consecutive pairs and {c_t, c_1} labelled)
// whose closing label exceeds the sum of the path labels:
//   long_label = d(c_1, c_t)  >  sum of path_labels,
// where path_labels[i] = d(c_{i}, c_{i+1}) along the path c_1 .. c_t.
struct NonMetricCycle {
  std::vector<Vertex> cycle;
  int long_label = 0;
  std::vector<int> path_labels;
};

// Finds a non-metric cycle, or nullopt when none exists.  An edge lies in a
// non-metric cycle exactly when some path between its endpoints avoiding the
// edge is strictly shorter than its label; edges are scanned in order and the
// witness cycle is the first such edge together with its shortest bypass.
std::optional<NonMetricCycle> detect_non_metric_cycle(const EdgeLabelledGraph& G);

// The shortest-path completion: a metric space on the same vertices with
//   d'(x, y) = min(m, min over x-y paths of the sum of labels),
// m = max(2, max s).  Unreachable pairs get m.  The result is complete, has
// label set {1..m}, agrees with G on labelled edges exactly when G has no
// non-metric cycle, and every automorphism of G is an automorphism of it.
EdgeLabelledGraph shortest_path_completion(const EdgeLabelledGraph& G);

// The largest vertex count of a non-metric cycle with labels from s: the
// biggest t >= 3 with (t - 1) * min(s) < max(s), or 0 when no such cycle
// exists (fewer than two distinct values, or min too large).
int non_metric_cycle_vertex_bound(const std::set<int>& s);

// ---------------------------------------------------------------------------
// Relational encoding.
// ---------------------------------------------------------------------------

// The language {R1, .., Rm}, all binary, trivial symbol group.  m >= 1.
Language metric_language(int m);

// Encodes G over metric_language(m): (u, v) and (v, u) lie in R_d exactly
// when {u, v} carries label d.  input_error when m < 1 or a label exceeds m.
Structure to_structure(const EdgeLabelledGraph& G, int m);

// Decodes a structure over a metric-shaped language (no functions, all
// relations binary, content symmetric irreflexive, every pair in at most one
// relation); the frozen label set becomes {1..nrel}.  input_error otherwise.
EdgeLabelledGraph to_edge_labelled_graph(const Structure& S);

// ---------------------------------------------------------------------------
// Forbidden-substructure membership.
// ---------------------------------------------------------------------------

// True exactly when no member of `forbidden` embeds into B.  Every forbidden
// structure must be irreducible and over B's language (input_error).
bool check_free_amalgamation_membership(const std::vector<Structure>& forbidden,
                                        const Structure& B,
                                        const Caps& caps = default_caps());

// ---------------------------------------------------------------------------
// Metric witnesses.
// ---------------------------------------------------------------------------

// The circulant candidate on vertices 0..k-1 with d(i, j) = min(m, scale *
// circular step between i and j) and label set {1..m}.
EdgeLabelledGraph circulant_metric(int k, int scale, int m);

// Candidate orders tried by the fallback search.
inline constexpr int kMaxCirculantOrder = 12;

struct MetricWitness {
  EdgeLabelledGraph base;        // the validated input space A
  std::set<int> s;               // its frozen label set
  int m = 2;                     // distance cap max(2, max s)
  int clique_bound = 0;          // the forbidden unit-clique size n
  int pipeline_bound = 0;        // max(n, non-metric-cycle vertex bound of s)
  std::string route;             // "pipeline" or "search"
  std::optional<PipelineWitness> pipeline;  // set on the pipeline route
  EdgeLabelledGraph pre_completion;  // pipeline output / found candidate
  EdgeLabelledGraph completed;       // the delivered metric space
  Witness result;                // bundle over metric_language(m)
};

// Builds a verified witness for A among integer metric spaces with no
// n-point unit-distance clique (n >= 2).  A must be a metric space without
// such a clique (input_error otherwise).  The delivered bundle is verified
// exhaustively at build time: the completion is a metric space, clique-free,
// the base embeds, and every lifted partial map of the base extends to an
// automorphism.  Search exhaustion is a resource_limit_error; a verification
// failure after a successful construction is a logic_error.
MetricWitness build_metric_witness(const EdgeLabelledGraph& A, int n,
                                   const Caps& caps = default_caps());

}  // namespace eppa
