#pragma once

#include "compatkit/bigint.hpp"
#include "compatkit/perm.hpp"
#include "compatkit/stabchain.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace compatkit {

class PermGroup;
struct PermGroupImpl;

// Records how a group was assembled. Quotients, normal-subgroup lattices and
// isomorphism tests exploit this instead of working from raw generators.
struct Construction {
  enum class Kind { DirectProduct, Wreath, CosetImage, QuotientImage };

  Kind kind;
  // DirectProduct: {left, right}; Wreath: {bottom, top};
  // CosetImage/QuotientImage: {parent, subgroup}.
  std::vector<PermGroup> children;
};

constexpr std::uint64_t DEFAULT_SEED = 0x2545f4914f6cdd1dull;

// Immutable permutation group with an eagerly built stabilizer chain.
// Copies share state; lazily computed caches are shared as well.
class PermGroup {
public:
  PermGroup(); // trivial group on one point

  static PermGroup from_gens(unsigned degree, std::vector<Perm> gens,
                             BigInt const *known_order = nullptr,
                             std::uint64_t seed = DEFAULT_SEED);
  static PermGroup trivial(unsigned degree);
  static PermGroup cyclic(unsigned n);
  static PermGroup symmetric(unsigned n);
  static PermGroup alternating(unsigned n);
  static PermGroup dihedral(unsigned order);   // order >= 4, even
  static PermGroup quaternion(unsigned order); // generalized, order >= 8, 2^k

  unsigned degree() const;
  BigInt const &order() const;
  bool is_trivial() const { return order() == 1; }
  std::vector<Perm> const &gens() const;
  StabChain const &chain() const;

  bool contains(Perm const &p) const;
  bool subgroup_of(PermGroup const &other) const;
  bool same_group(PermGroup const &other) const;
  // Assumes this <= other holds; checks closure under conjugation.
  bool normal_in(PermGroup const &other) const;
  bool abelian() const;
  bool transitive() const;

  std::vector<Perm> const &elements(std::uint64_t cap) const;
  // (representative, class size) pairs in a deterministic order.
  std::vector<std::pair<Perm, std::uint64_t>> const &
  conjugacy_classes(std::uint64_t cap) const;
  Perm random_element(std::uint64_t &state) const;

  std::optional<Construction> const &construction() const;
  // Reconstruction recipe in expression syntax; defaults to a Perm() literal.
  std::string const &expr() const;

  PermGroup with_expr(std::string expr) const;
  PermGroup with_construction(Construction c, std::string expr) const;

  // Stable identity of the shared state, usable as a cache key for the
  // lifetime of this process.
  void const *id() const;

  // Opaque per-group cache slots for higher layers (lattice, factors, ...).
  std::shared_ptr<void> cache_get(int slot) const;
  void cache_put(int slot, std::shared_ptr<void> value) const;

private:
  explicit PermGroup(std::shared_ptr<PermGroupImpl> impl)
      : impl_(std::move(impl)) {}

  std::shared_ptr<PermGroupImpl> impl_;
};

enum CacheSlot {
  CACHE_FINGERPRINT = 0,
  CACHE_LATTICE = 1,
  CACHE_FACTORS = 2,
  CACHE_FACTOR_SEQS = 3,
  CACHE_DERIVED = 4,
  CACHE_WREATH_BASE = 5,
  CACHE_STRUCTURE = 6,
  CACHE_COUNT = 7,
};

} // namespace compatkit
