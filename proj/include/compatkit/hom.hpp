#pragma once

#include "compatkit/permgroup.hpp"

#include <memory>
#include <optional>
#include <utility>
#include <vector>

namespace compatkit {

// Homomorphism between permutation groups, stored as generator/image pairs.
// All questions (well-definedness, evaluation, kernel, preimage) reduce to
// stabilizer chains of the graph group {(x, f(x))} acting on the disjoint
// union of the two domains, so every answer is exact.
struct HomImpl;

class Homomorphism {
public:
  // Throws InputError unless the pairs define a map on all of `domain`:
  // the first components must generate it and every relation among them
  // must hold among the second components.
  static Homomorphism build(PermGroup domain, PermGroup codomain,
                            std::vector<std::pair<Perm, Perm>> pairs);
  static std::optional<Homomorphism>
  try_build(PermGroup domain, PermGroup codomain,
            std::vector<std::pair<Perm, Perm>> pairs);

  static Homomorphism identity(PermGroup const &g);

  PermGroup const &domain() const;
  PermGroup const &codomain() const;
  std::vector<std::pair<Perm, Perm>> const &pairs() const;

  Perm apply(Perm const &g) const; // g must lie in the domain
  PermGroup map(PermGroup const &sub) const;
  PermGroup const &image() const;
  PermGroup const &kernel() const;
  Perm preimage(Perm const &y) const; // y must lie in the image
  bool surjective() const;
  bool injective() const;

  Homomorphism then(Homomorphism const &next) const;
  Homomorphism restricted_to(PermGroup sub) const;
  Homomorphism inverse_iso() const; // requires a bijection

private:
  explicit Homomorphism(std::shared_ptr<HomImpl const> impl)
      : impl_(std::move(impl)) {}

  std::shared_ptr<HomImpl const> impl_;
};

} // namespace compatkit
