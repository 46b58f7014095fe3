// Text interchange for structures and morphisms.
//
// A structure document is line-oriented:
//
//     # an edge-coloured graph with swappable colours
//     language: E/2 U/1 F!1
//     group: (E U)
//     vertices: 1 2 3
//     rel E: (1 2) (2 3)
//     rel U: (2)
//     fun F: 1 -> {2} 2 -> {1 3}
//
// `language:` declares relation symbols as `name/arity` and unary function
// symbols as `name!1`, in index order.  Each `group:` line is one symbol
// permutation in cycle notation; the identity is always implied, and the
// listed permutations together with it must form a group.  `vertices:` fixes
// the carrier and its order.  Every `rel`/`fun` line fills one symbol;
// symbols without a line are empty.  `#` starts a comment anywhere.
//
// A morphism document has an optional `perm:` line (cycle notation, omitted
// means the identity) followed by `map:` lines `u -> v`; the map must be
// injective.
//
// Serialization is canonical: symbols in declared order, tuples sorted,
// vertex sets ascending, one line per non-empty symbol, the group's
// non-identity elements in stored order.  Parsing a canonical document and
// serializing the result reproduces the document text.

#pragma once

#include <string>

#include "eppa/core.hpp"

namespace eppa {

// Parses a structure document.  Throws input_error with a line-positioned
// message on malformed text, unknown or duplicate symbols, arity mismatches,
// undeclared vertices, or a group block that is not closed.
Structure parse_structure(const std::string& text);

// Canonical text for a structure.  Symbol names must be plain identifiers
// ([A-Za-z_][A-Za-z0-9_]*); input_error otherwise.
std::string serialize_structure(const Structure& S);

// Parses a morphism document against a language (for symbol names).  Throws
// input_error on malformed text, unknown symbols, a permutation that does
// not preserve symbol kind and arity, or — unless `require_injective` is
// cleared, as for projection documents — a non-injective vertex map.
Morphism parse_morphism(const std::string& text, const Language& L,
                        bool require_injective = true);

// Canonical text for a morphism: a `perm:` line when the symbol permutation
// is not the identity, then `map:` lines in ascending order.
std::string serialize_morphism(const Morphism& m, const Language& L);

}  // namespace eppa
