// Coherent EPPA witness for purely relational languages (arbitrary finite
// symbol group).  A witness vertex pairs a base vertex x with a bit-valuation
// assigning 0/1 to every (relation symbol, tuple-containing-x) slot.  A tuple
// of witness vertices is in R_B exactly when entries sharing a base vertex
// share their valuation and the XOR over the distinct valuations' bits on the
// projected base tuple is 1.  Partial automorphisms of the generic copy
// extend to automorphisms of the witness via per-relation flip tables; the
// tables always flip an even number of distinct vertices per tuple, which is
// what makes the extension relation-preserving and coherent.
//
// Conventions:
//   - valuation slots: relations in language order, then tuples containing
//     the owner in lexicographic order (base vertices ascending);
//   - witness vertex ids are dense: owner position * 2^total_bits + mask,
//     where the first slot is the most significant bit of the mask.

#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "eppa/core.hpp"

namespace eppa {

struct RelationalWitness {
  Structure base;     // A: finite structure over a relations-only language
  Structure witness;  // B
  Morphism psi;       // generic embedding A -> B, identity symbol perm
  std::vector<Vertex> projection;  // witness vertex id -> base vertex

  // Slot layout shared by every owner (universe sizes depend only on |A|).
  std::vector<std::vector<std::uint8_t>> bits;  // witness id -> valuation
  std::vector<int> rel_offset;                  // relation -> first slot
  int total_bits = 0;
  // Per owner position and relation: tuples containing the owner, in
  // lexicographic order, plus each tuple's rank within that list.
  std::vector<std::vector<std::vector<Tuple>>> universe;
  std::vector<std::vector<std::map<Tuple, int>>> tuple_rank;

  int n() const { return (int)base.verts.size(); }
  Vertex owner(Vertex b) const { return projection.at((size_t)b); }
  int bit_index(int owner_pos, int rel, const Tuple& t) const;
  int bit_at(Vertex b, int rel, const Tuple& t) const;
  Vertex vertex_id(Vertex x, const std::vector<std::uint8_t>& valuation) const;
};

// Builds the witness for a structure over a relations-only language.  Throws
// input_error if the language has function symbols or A is empty, and
// resource_limit_error if the witness would exceed the caps.
RelationalWitness build_relational_witness(const Structure& A,
                                           const Caps& caps = default_caps());

// Result of extending a partial automorphism of the generic copy:
//   theta   - automorphism of the witness (symbol perm = phi's),
//   flips   - per relation symbol, one 0/1 vector per base tuple; entry i
//             says whether slot (R, tuple) flips when the owner is tuple[i],
//   phihat  - order-preserving extension of the projected vertex map.
struct RelationalExtension {
  Morphism theta;
  std::vector<std::map<Tuple, std::vector<std::uint8_t>>> flips;
  std::map<Vertex, Vertex> phihat;
};

// Extends a partial automorphism phi of the generic copy (domain and range
// inside psi(A); any group element as symbol perm) to an automorphism of the
// witness.  Extensions compose: if h = g .after. f as partial maps, the
// extension of h is the composition of the extensions.
RelationalExtension extend_relational_pa(const RelationalWitness& W,
                                         const Morphism& phi,
                                         const Caps& caps = default_caps());

}  // namespace eppa
