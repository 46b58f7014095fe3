// core.hpp — finite relational structures with unary set-valued functions,
// over languages equipped with a finite permutation group on the symbols.
//
// Conventions used throughout the library:
//
//   * Language: relation symbols (arity >= 1) and function symbols (arity
//     fixed to 1; functions map a vertex to a *subset* of the vertices).
//     The permutation group on symbols is stored extensionally (every
//     element listed); validation checks it preserves symbol kind and arity,
//     contains the identity, and is closed under composition and inverse.
//
//   * Structure: the vertex list is ordered and the order is part of the
//     value. It fixes every canonical enumeration downstream (valuation bit
//     layouts, witness vertex ids) and the order-preserving extension of
//     partial maps. Equality is exact: same language, same vertex list in
//     the same order, same content.
//
//   * Morphism: a symbol permutation (from the group) paired with a vertex
//     map, possibly partial. check_morphism() decides the kind-specific
//     conditions; a homomorphism maps relation tuples of R into the content
//     of perm(R) and satisfies f(F_S(x)) ⊆ perm(F)_T(f(x)); an embedding is
//     injective, reflects tuples (iff) and carries function images exactly.
//     A partial automorphism is an isomorphism between two function-closed
//     induced substructures of one structure.
//
//   * All operations are pure; values are immutable after construction.
//     Exponential searches take a Caps budget and throw resource_limit_error
//     when it is exhausted, never silently truncating.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace eppa {

using Vertex = int;
using Tuple = std::vector<Vertex>;
using VertexSet = std::set<Vertex>;

// ---------------------------------------------------------------------------
// Errors and resource budgets
// ---------------------------------------------------------------------------

// Malformed input: unknown vertex, arity mismatch, group not closed, ...
struct input_error : std::runtime_error {
  explicit input_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A vertex set that must be function-closed is not.
struct closure_violation : input_error {
  explicit closure_violation(const std::string& msg) : input_error(msg) {}
};

// A checked semantic precondition of an operation does not hold (e.g. a
// partial map whose domain must be generic is handed one that is not).
struct precondition_error : input_error {
  explicit precondition_error(const std::string& msg) : input_error(msg) {}
};

// An exponential search exceeded its configured budget.
struct resource_limit_error : std::runtime_error {
  explicit resource_limit_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Budgets for the exponential searches. "nodes" counts backtracking states /
// enumerated candidates; "items" caps produced collections (partial
// automorphisms, irreducible substructures, valuations, ...).
struct Caps {
  long long search_nodes = 200'000'000;
  long long max_items = 5'000'000;
  long long max_witness_vertices = 2'000'000;
  long long max_subset_bits = 22;  // exhaustive subset sweeps allowed up to 2^this
};

const Caps& default_caps();

// Mutable budget cursor handed through a single search.
struct Budget {
  const Caps* caps;
  long long nodes = 0;
  explicit Budget(const Caps& c) : caps(&c) {}
  void spend(const char* what, long long n = 1) {
    nodes += n;
    if (nodes > caps->search_nodes)
      throw resource_limit_error(std::string("search budget exhausted in ") + what);
  }
};

// ---------------------------------------------------------------------------
// Language
// ---------------------------------------------------------------------------

// A permutation of the symbol table; relation symbols map to relation
// symbols of the same arity, function symbols to function symbols.
struct SymbolPerm {
  std::vector<int> rel_map;  // relation index -> relation index
  std::vector<int> fun_map;  // function index -> function index
  bool operator==(const SymbolPerm&) const = default;
  auto operator<=>(const SymbolPerm&) const = default;
  bool is_identity() const;
};

SymbolPerm identity_perm(size_t nrel, size_t nfun);
SymbolPerm compose(const SymbolPerm& g, const SymbolPerm& f);  // g after f
SymbolPerm inverse(const SymbolPerm& g);

struct Language {
  std::vector<std::string> rel_names;
  std::vector<int> rel_arity;
  std::vector<std::string> fun_names;  // every function is unary
  std::vector<SymbolPerm> group;       // extensional; identity stored first

  bool operator==(const Language&) const = default;
  size_t nrel() const { return rel_names.size(); }
  size_t nfun() const { return fun_names.size(); }
  int rel_index(const std::string& name) const;  // -1 if absent
  int fun_index(const std::string& name) const;  // -1 if absent
};

// Validates names distinct, relation arities >= 1, and the group axioms
// (kind/arity preservation, identity, closure under composition & inverse).
// The identity element is added if missing and sorted to the front;
// duplicates are removed. Throws input_error on violation.
Language make_language(std::vector<std::string> rel_names, std::vector<int> rel_arity,
                       std::vector<std::string> fun_names,
                       std::vector<SymbolPerm> group_elements);

// Convenience: language of plain graphs — one binary relation "E", trivial group.
Language graph_language();

// ---------------------------------------------------------------------------
// Structure
// ---------------------------------------------------------------------------

struct Structure {
  Language lang;
  std::vector<Vertex> verts;  // ordered, distinct
  std::vector<std::set<Tuple>> rel;  // per relation symbol
  std::vector<std::map<Vertex, std::set<Vertex>>> fun;  // per function symbol; empty images not stored

  // Derived vertex -> position index; rebuilt by finalize().
  std::map<Vertex, int> vpos;

  // Validates content (arity, declared vertices), drops empty function
  // entries, rebuilds vpos. Throws input_error on violation.
  void finalize();

  bool has_vertex(Vertex v) const { return vpos.count(v) != 0; }
  int pos(Vertex v) const;  // throws input_error on unknown vertex
  size_t size() const { return verts.size(); }

  // Function image of v under function index f; empty set if none stored.
  const std::set<Vertex>& fun_image(int f, Vertex v) const;

  bool operator==(const Structure& o) const {
    return lang == o.lang && verts == o.verts && rel == o.rel && fun == o.fun;
  }
};

Structure make_structure(Language lang, std::vector<Vertex> verts,
                         std::vector<std::set<Tuple>> rel = {},
                         std::vector<std::map<Vertex, std::set<Vertex>>> fun = {});

// Convenience builder for graphs: one symmetric irreflexive binary relation.
// Edges are stored in both orientations.
Structure make_graph(std::vector<Vertex> verts, const std::vector<std::pair<Vertex, Vertex>>& edges);

// True when the binary relation `r` of S is symmetric and irreflexive.
bool is_symmetric_irreflexive(const Structure& S, int r);

// ---------------------------------------------------------------------------
// Morphisms
// ---------------------------------------------------------------------------

enum class MorphKind {
  homomorphism,
  monomorphism,
  embedding,
  isomorphism,
  automorphism,
  hom_embedding,
  partial_automorphism,
};

struct Morphism {
  SymbolPerm perm;              // f_L
  std::map<Vertex, Vertex> vmap;  // f_A (partial or total)
  bool operator==(const Morphism&) const = default;
  auto operator<=>(const Morphism&) const = default;

  bool defined_on(Vertex v) const { return vmap.count(v) != 0; }
  Vertex operator()(Vertex v) const;  // throws input_error if undefined
  VertexSet domain() const;
  VertexSet range() const;
};

Morphism identity_morphism(const Structure& S);
// g after f: vertex map x -> g(f(x)) on {x : f(x) in Dom(g)}, perm composed.
Morphism compose(const Morphism& g, const Morphism& f);
Morphism inverse(const Morphism& m);  // vmap must be injective

struct CheckResult {
  bool ok;
  std::string violation;  // empty when ok; names the first violated condition
  explicit operator bool() const { return ok; }
};

// Decides whether m is a morphism S -> T of the given kind (for
// partial_automorphism and automorphism, T must be the same structure as S).
// The check for hom_embedding enumerates irreducible substructures of S and
// is exponential; guard with caps.
CheckResult check_morphism(const Morphism& m, const Structure& S, const Structure& T,
                           MorphKind kind, const Caps& caps = default_caps());

// ---------------------------------------------------------------------------
// Core operations
// ---------------------------------------------------------------------------

// Least superset of X closed under all function images.
VertexSet closure(const Structure& S, const VertexSet& X);

// Induced substructure on X; X must be function-closed (closure_violation
// otherwise). Vertex order is inherited from S.
Structure induced_substructure(const Structure& S, const VertexSet& X);

// The relabelling action: (g, id)(S). Relation content of symbol g(R) in the
// result is the content of R in S; likewise for functions.
Structure apply_relabelling(const SymbolPerm& g, const Structure& S);

// Orbit of S under apply_relabelling, deduplicated by exact equality,
// in first-reached order over the stored group order.
std::vector<Structure> relabelling_orbit(const Structure& S);

// Free amalgamation of B1 and B2 over A with respect to a1: A -> B1 and
// a2: A -> B2 (injective homomorphisms with identity symbol permutation;
// embeddings always qualify). The result C carries fresh vertex ids
// 0..|C|-1 (shared copy of A first, then B1-only, then B2-only, each in
// input order); beta1, beta2 are the canonical embeddings. Mixed pairs
// carry no relation tuples and no function edges.
struct Amalgam {
  Structure C;
  Morphism beta1, beta2;
};
Amalgam free_amalgamation(const Structure& B1, const Structure& B2, const Structure& A,
                          const Morphism& a1, const Morphism& a2);

// True iff S is not a free amalgamation of two proper closed substructures
// covering S. Exponential in |S|.
bool is_irreducible(const Structure& S, const Caps& caps = default_caps());

// All partial automorphisms (g, p) of S: p a partial injective vertex map
// with function-closed domain and range that is an isomorphism between the
// induced substructures under g. Deterministic order: group order first,
// then lexicographic on the map-building decisions in vertex order.
std::vector<Morphism> enumerate_partial_automorphisms(const Structure& S,
                                                      const Caps& caps = default_caps());

// Exhaustive backtracking for an automorphism theta of S with
// theta(X) ⊆ targets. nullopt is a proof of nonexistence.
std::optional<Morphism> find_automorphism_with_image(const Structure& S, const VertexSet& X,
                                                     const VertexSet& targets,
                                                     const Caps& caps = default_caps());

// Exhaustive backtracking for an automorphism of S extending the given
// partial morphism (symbol permutation fixed to partial.perm).
std::optional<Morphism> extend_to_automorphism(const Structure& S, const Morphism& partial,
                                               const Caps& caps = default_caps());

// True iff some (g, f) is a homomorphism F -> B that restricts to an
// embedding on every irreducible substructure of F.
bool exists_homomorphism_embedding(const Structure& F, const Structure& B,
                                   const Caps& caps = default_caps());

// The order-preserving extension of a partial injective map p on an ordered
// carrier: enumerate X = carrier∖Dom(p) and Y = carrier∖Range(p) in carrier
// order and match them up. Returns a total permutation of the carrier.
std::map<int, int> order_preserving_extension(const std::vector<int>& carrier,
                                              const std::map<int, int>& p);

// ---------------------------------------------------------------------------
// Shared search helpers (used by the witness layers and the verifier)
// ---------------------------------------------------------------------------

// Gaifman neighbourhood: u ~ v iff some relation tuple or function edge
// contains both. Returned as adjacency sets keyed by vertex.
std::map<Vertex, VertexSet> gaifman_adjacency(const Structure& S);

// Vertex sets of all nonempty closed irreducible substructures of S with at
// most max_size vertices. Uses clique enumeration on the Gaifman graph when
// the language is purely relational with arity <= 2 (where irreducible ⟺
// Gaifman clique); otherwise grows connected closed sets and filters with
// is_irreducible. Deterministic order (size, then lexicographic).
std::vector<VertexSet> enumerate_irreducible_substructures(const Structure& S,
                                                           const Caps& caps = default_caps(),
                                                           size_t max_size = SIZE_MAX);

// Exhaustive automorphism backtracking engine. Searches for theta = (g, f)
// with: g = fixed_perm if given (else every group element in order); f ⊇ must;
// f(v) ∈ allowed[v] for every constrained v. Sound pruning only (per-symbol
// incidence profiles and incremental content checks), so nullopt proves
// nonexistence within the budget.
std::optional<Morphism> search_automorphism(const Structure& S,
                                            const std::optional<SymbolPerm>& fixed_perm,
                                            const std::map<Vertex, Vertex>& must,
                                            const std::map<Vertex, VertexSet>& allowed,
                                            const Caps& caps = default_caps());

// All automorphisms of S (cap-guarded; deterministic order).
std::vector<Morphism> enumerate_automorphisms(const Structure& S, const Caps& caps = default_caps());

// Helper for building tuples: apply a vertex map entrywise.
Tuple map_tuple(const std::map<Vertex, Vertex>& f, const Tuple& t);

// All tuples of the given arity over `universe` (with repeats), in
// lexicographic order of positions within `universe`.
std::vector<Tuple> all_tuples(const std::vector<Vertex>& universe, int arity);

}  // namespace eppa
