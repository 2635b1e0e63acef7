#pragma once

#include "compatkit/bigint.hpp"
#include "compatkit/perm.hpp"

#include <cstdint>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <utility>
#include <vector>

namespace compatkit {

// Base and strong generating set via Schreier-Sims.
//
// Construction is incremental sifting followed by a full Schreier generator
// sweep. When the caller knows the group order up front, random subproducts
// are inserted first and the build stops as soon as the product of
// fundamental orbit lengths reaches that order: distinct transversal
// products are distinct elements, so the product is always a lower bound
// and equality proves the chain complete.
class StabChain {
public:
  struct Level {
    unsigned beta = 0;
    std::vector<unsigned> gen_ids;     // strong gens fixing all earlier betas
    std::vector<unsigned> orbit;       // BFS order, orbit[0] == beta
    std::vector<unsigned> pos;         // point -> 1 + orbit index, 0 if absent
    std::vector<std::pair<unsigned, unsigned>> via; // orbit idx -> (parent pt, gen id)
    std::vector<Perm> trans;           // cached transversal, parallel to orbit
    bool cache_trans = false;
    mutable std::unordered_map<unsigned, Perm> umemo; // walk cache, capped
  };

  StabChain() = default;

  // base_hint: points to prefer (in order) when a new base point is needed.
  // With fixed_prefix, a level is created up front for every hint point, in
  // hint order, possibly with a singleton orbit; the tail of the chain past
  // the prefix is then exactly the pointwise stabilizer of those points.
  static StabChain build(unsigned degree, std::vector<Perm> const &gens,
                         BigInt const *known_order = nullptr,
                         std::vector<unsigned> const *base_hint = nullptr,
                         std::uint64_t seed = 0x9e3779b97f4a7c15ull,
                         bool fixed_prefix = false);

  unsigned degree() const { return degree_; }
  BigInt const &order() const { return order_; }
  std::size_t num_levels() const { return levels_.size(); }
  Level const &level(std::size_t i) const { return levels_[i]; }
  Perm const &strong_gen(unsigned id) const { return sgens_[id]; }
  // The generators listed at a level, materialized.
  std::vector<Perm> level_gens(std::size_t i) const;

  bool contains(Perm const &p) const;
  Perm sift(Perm const &p) const;
  // Residue after stripping from the given level on, and the level at which
  // stripping stopped (== num_levels() when it ran through).
  std::pair<Perm, std::size_t> strip(Perm const &p, std::size_t from = 0) const;

  // Transversal element mapping level's beta to pt; pt must be in the orbit.
  Perm transversal(std::size_t level, unsigned pt) const;

  std::vector<unsigned> base() const;
  std::vector<Perm> strong_gens() const;

  // All group elements in a fixed deterministic order; throws ResourceError
  // if the order exceeds cap.
  std::vector<Perm> elements(std::uint64_t cap) const;

  // Uniformly random element, one transversal pick per level.
  Perm random_element(std::uint64_t &state) const;

private:
  void recompute_order();
  void push_level(unsigned beta);
  // Appends g to levels 0..last, extending orbits; g must fix the betas of
  // all levels before its drop level.
  void add_strong_gen(std::size_t last, Perm const &g,
                      std::vector<unsigned> const *base_hint);
  void extend_orbit(std::size_t lvl, std::size_t first_new_gen);
  bool insert(Perm const &g, std::vector<unsigned> const *base_hint);
  void sweep(std::vector<unsigned> const *base_hint, BigInt const *target);

  unsigned degree_ = 1;
  BigInt order_ = 1;
  std::vector<Perm> sgens_; // all strong generators, levels refer by index
  std::vector<Level> levels_;
  // Guards the umemo walk caches; chains are otherwise immutable once built.
  std::unique_ptr<std::mutex> walk_mu_;
};

inline std::uint64_t splitmix64(std::uint64_t &state)
{
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

} // namespace compatkit
