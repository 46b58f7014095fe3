// witness_graph.hpp — coherent EPPA-witness for a finite graph.
//
// For a graph A on vertices enumerated 1..n (the structure's vertex order),
// the witness B has one vertex per pair (x, χ) where x ∈ A and χ maps
// A∖{x} to {0,1}; vertices (x,χ), (x′,χ′) are adjacent iff x ≠ x′ and
// χ(x′) ≠ χ′(x). The generic copy is ψ(x) = (x, χ_x) with χ_x(y) = 1 exactly
// when x comes after y in the vertex order and {x,y} is an edge of A.
//
// A partial automorphism φ of ψ(A) extends to θ ∈ Aut(B): project φ to a
// partial permutation of A, take its order-preserving extension φ̂, compute
// the set F of flipped pairs ({x,y} ∈ F iff some (x,χ) ∈ Dom(φ) maps to
// (φ̂(x),χ′) with χ(y) ≠ χ′(φ̂(y))), and flip each valuation bit along its
// F-pairs. The assignment φ ↦ θ is coherent: composing partial
// automorphisms composes the extensions.

#pragma once

#include "eppa/core.hpp"

namespace eppa {

struct GraphWitness {
  Structure base;     // A: one symmetric irreflexive binary relation, trivial group
  Structure witness;  // B with dense vertex ids 0..n·2^(n-1)-1
  Morphism psi;       // generic embedding A -> B
  std::vector<Vertex> projection;  // B-id -> owner vertex of A

  // Valuation payload per B-id: bits over A∖{owner} in A's vertex order.
  std::vector<std::vector<uint8_t>> bits;

  size_t n() const { return base.size(); }
  Vertex owner(Vertex b) const { return projection[(size_t)b]; }
  // χ value of B-vertex b at base vertex y (y ≠ owner(b)).
  uint8_t bit_at(Vertex b, Vertex y) const;
  // B-id of the pair (x, bit-vector); ids are lexicographic in
  // (position of x, bit-vector read in vertex order).
  Vertex vertex_id(Vertex x, const std::vector<uint8_t>& b) const;
};

// Builds the witness; throws input_error unless A is a graph (single binary
// symmetric irreflexive relation, trivial group).
GraphWitness build_graph_witness(const Structure& A);

struct GraphExtension {
  Morphism theta;                              // automorphism of B extending φ
  std::set<std::pair<Vertex, Vertex>> flips;   // flipped pairs {x,y} of A, x < y in id
  std::map<Vertex, Vertex> phihat;             // order-preserving extension, permutation of A
};

// Extends a partial automorphism φ of the generic copy ψ(A) (given on B's
// vertex ids) to an automorphism of B. Throws input_error if φ is not a
// partial automorphism of ψ(A).
GraphExtension extend_graph_pa(const GraphWitness& W, const Morphism& phi);

// The closed-form inverse of the extension: the automorphism sending (x,χ)
// to (φ̂⁻¹(x), χ′) with χ′(φ̂⁻¹(y)) = χ(y) flipped exactly on pairs
// {φ̂⁻¹(x), φ̂⁻¹(y)} ∈ F. Equals the functional inverse of ext.theta.
Morphism graph_extension_inverse(const GraphWitness& W, const GraphExtension& ext);

}  // namespace eppa
