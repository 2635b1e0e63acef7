#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "compatkit/iso.hpp"
#include "compatkit/permgroup.hpp"

namespace compatkit {

// Orders 64 and up are unsupported: the 2-group count explodes and the
// cyclic-extension generator would grind through millions of candidates.
constexpr std::uint64_t CATALOG_HARD_LIMIT = 63;
constexpr std::uint64_t CATALOG_DEFAULT_BOUND = 32;

struct CatalogEntry {
  std::uint64_t order = 0;
  std::uint64_t index = 0; // 1-based within the order, assigned after dedup
  PermGroup group;         // regular or reduced-degree faithful representation
  IsoFingerprint fp;       // as computed at build/load time
  bool adjoined = false;   // outside the solvable enumeration (Alt(5))
};

// Complete isomorphism-deduplicated store of all groups up to a bound.
// Immutable once built; copies share nothing mutable.
class Catalog {
public:
  Catalog(std::uint64_t completeness_bound, std::uint64_t max_order,
          std::map<std::uint64_t, std::vector<CatalogEntry>> by_order);

  // Every group of order <= completeness_bound is isomorphic to exactly one
  // entry. Entries of larger order exist (adjunctions and the solvable
  // range past the bound) but carry no exhaustiveness claim.
  std::uint64_t completeness_bound() const { return bound_; }
  std::uint64_t max_order() const { return max_order_; }

  std::vector<std::uint64_t> orders() const;
  std::vector<CatalogEntry> const &at(std::uint64_t order) const;
  CatalogEntry const &lookup(std::uint64_t order, std::uint64_t index) const;
  std::vector<CatalogEntry const *> adjoined_entries() const;
  std::size_t size() const;

private:
  std::uint64_t bound_;
  std::uint64_t max_order_;
  std::map<std::uint64_t, std::vector<CatalogEntry>> by_order_;
};

// Recursive cyclic-extension enumeration. Every group of order < 60 is
// solvable and every nontrivial solvable group has a normal subgroup of
// prime index, so extending each smaller group N by each prime p (over
// automorphisms alpha with alpha^p inner) reaches every solvable group;
// Alt(5) is adjoined at order 60 and is the only nonsolvable group within
// the hard limit. Entry counts are validated against the published table
// per order. Throws ResourceError past the hard limit.
Catalog build_catalog(std::uint64_t max_order,
                      std::uint64_t hard_limit = CATALOG_HARD_LIMIT);

// Line-delimited JSON: a header object recording the bounds and generator
// version, then one entry object per line.
void save_catalog(Catalog const &c, std::string const &path);
Catalog load_catalog(std::string const &path);

// Recomputes what a catalog claims: per-order counts against the published
// table up to the completeness bound, fingerprint consistency, pairwise
// non-isomorphism within each order. Throws InputError on any violation.
void validate_catalog(Catalog const &c);

// COMPATKIT_CATALOG environment override, else a fixed name in the working
// directory.
std::string default_catalog_path();

// Published number of isomorphism classes per order; [n-1] is order n.
std::vector<std::uint64_t> const &published_group_counts();

} // namespace compatkit
