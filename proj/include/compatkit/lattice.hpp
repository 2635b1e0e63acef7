#pragma once

#include "compatkit/errors.hpp"
#include "compatkit/permgroup.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace compatkit {

// All normal subgroups of a group, with containment. `complete` is a hard
// gate: radicals, residues, and certificate-producing callers must refuse a
// lattice that is not flagged complete.
struct NormalLattice {
  PermGroup group;
  // ascending order; nodes.front() is trivial, nodes.back() is the group
  std::vector<PermGroup> nodes;
  std::vector<std::vector<bool>> leq; // leq[i][j]: nodes[i] <= nodes[j]
  bool complete = false;
  std::string method; // "generic" | "goursat" | "wreath-rule"

  std::size_t index_of(PermGroup const &n) const; // InputError if absent
};

// Enumeration overflow. Whatever was found so far rides along, flagged
// incomplete; only non-certifying callers may look at it.
class LatticeError : public ResourceError {
public:
  LatticeError(std::string const &what, NormalLattice partial_lattice)
      : ResourceError(what), partial(std::move(partial_lattice)) {}

  NormalLattice partial;
};

// Complete normal-subgroup lattice. Direct products go through Goursat
// matching of their factors' lattices; wreath products with a nonabelian
// simple bottom and a transitive top use the base-preimage rule; everything
// else is generic join closure of per-class normal closures, which needs
// |g| <= 10^5. `cap` bounds the node count at every recursion level.
NormalLattice normal_subgroups(PermGroup const &g, std::size_t cap = 1024);

} // namespace compatkit
