#pragma once

#include "compatkit/hom.hpp"
#include "compatkit/permgroup.hpp"

#include <cstdint>
#include <utility>

namespace compatkit {

// ---- products ----

// A on points 1..deg(A), B shifted behind it. Generators are A's followed
// by B's, which projections and quotient shortcuts rely on.
PermGroup direct_product(PermGroup const &a, PermGroup const &b);

// Left and right coordinate projections of a group built by direct_product.
Homomorphism dp_projection(PermGroup const &g, int side);

// Imprimitive action on deg(bottom) * deg(top) points: one bottom copy per
// point of top, top permuting the blocks. Generators are bottom's (in the
// first block) followed by the block lifts of top's.
PermGroup wreath_product(PermGroup const &bottom, PermGroup const &top);

// The subgroup fixing every block of a wreath product, as a chain of
// direct products (so its own construction tags stay usable).
PermGroup wreath_base(PermGroup const &w);

// Projection of a wreath product onto its top group.
Homomorphism wreath_top_map(PermGroup const &w);

// ---- subgroup machinery ----

// Orbits of g on its points, each sorted, ordered by smallest element.
std::vector<std::vector<unsigned>> orbits(PermGroup const &g);

// Simplicity. Prime orders short-circuit; otherwise every nontrivial class
// representative must have full normal closure, so |g| <= cap is required
// (ResourceError past it). Trivial groups are not simple.
bool is_simple(PermGroup const &g, std::uint64_t cap = 100000);

// Smallest normal subgroup of g containing h; h <= g required.
PermGroup normal_closure(PermGroup const &g, PermGroup const &h);

// Subnormality of h in g by iterated normal closures; returns the defect
// (0 when h == g). The chain strictly shrinks, so this terminates.
std::pair<bool, unsigned> is_subnormal(PermGroup const &g, PermGroup const &h);

PermGroup join(PermGroup const &a, PermGroup const &b);

// Exact intersection via the action of a on the right cosets of b; the
// BFS is capped by the index |a : a meet b|.
PermGroup intersection(PermGroup const &a, PermGroup const &b,
                       std::uint64_t coset_cap = 2000000);

PermGroup derived_subgroup(PermGroup const &g);
bool is_perfect(PermGroup const &g);
bool is_solvable(PermGroup const &g);
bool is_nilpotent(PermGroup const &g);

// Center; recurses through product and wreath tags, otherwise enumerates
// (cap applies to the enumeration path only).
PermGroup center(PermGroup const &g, std::uint64_t cap = 100000);

// ---- coset actions and quotients ----

// Action of g on the right cosets of h by right multiplication; cosets are
// identified by a canonical representative computed from h's chain. Coset 1
// is h itself. Throws ResourceError beyond max_cosets.
Homomorphism coset_action(PermGroup const &g, PermGroup const &h,
                          std::uint64_t max_cosets = 2000000);

// Kernel of the coset action: the largest normal subgroup of g inside h.
PermGroup core(PermGroup const &g, PermGroup const &h,
               std::uint64_t max_cosets = 2000000);

// G/N as a permutation group, up to isomorphism. Product and wreath tags
// split off structured cases; the fallback is the regular action on cosets,
// capped at regular_cap points.
PermGroup quotient(PermGroup const &g, PermGroup const &n,
                   std::uint64_t regular_cap = 100000);

// The projection g -> g/n itself; always takes the regular route, so it is
// only for quotients of manageable index.
Homomorphism quotient_map(PermGroup const &g, PermGroup const &n,
                          std::uint64_t regular_cap = 100000);

} // namespace compatkit
