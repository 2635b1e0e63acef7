#pragma once

#include "compatkit/bigint.hpp"
#include "compatkit/hom.hpp"
#include "compatkit/permgroup.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace compatkit {

// Largest order for which element-order counts and class sizes are taken
// exactly (subject to an order*degree memory guard); bigger groups get a
// fixed random sample instead, and sampled numbers never take part in
// separation decisions or in the canonical string.
inline constexpr std::uint64_t FP_EXACT_BOUND = 32768;

// Largest order the generator-image search accepts.
inline constexpr std::uint64_t ISO_BACKTRACK_BOUND = 100000;

// derived_length value for groups whose derived series stalls above 1.
inline constexpr int DERIVED_UNBOUNDED = -1;

struct IsoFingerprint {
  BigInt order;

  // Invariant factors of the abelianization, ascending, each dividing the
  // next; empty for perfect groups. abelian_known = false means the field
  // could not be computed and must be skipped in comparisons.
  std::vector<BigInt> abelian_invariants;
  bool abelian_known = false;

  std::map<std::uint64_t, std::uint64_t> element_orders;
  std::vector<std::uint64_t> class_sizes; // ascending
  bool exact_counts = false;

  int derived_length = 0;

  // Composition factor labels, sorted; filled in by the structure layer.
  std::vector<std::string> factors;
  bool factors_known = false;

  // Canonical serialization, versioned. Unknown fields render as "?",
  // sampled counts as "~".
  std::string str() const;
};

// Deterministic for all exact fields; cached on the group.
IsoFingerprint fingerprint(PermGroup const &g);

// True when some field that is exact on both sides disagrees; such groups
// cannot be isomorphic.
bool fingerprints_separate(IsoFingerprint const &a, IsoFingerprint const &b);

struct IsoResult {
  enum class Verdict { Isomorphic, Distinct, Undecided };
  Verdict verdict = Verdict::Undecided;
  std::optional<Homomorphism> iso; // set exactly when Isomorphic
  std::string reason;

  bool isomorphic() const { return verdict == Verdict::Isomorphic; }
  bool distinct() const { return verdict == Verdict::Distinct; }
  bool undecided() const { return verdict == Verdict::Undecided; }
};

// Invariant separation, then a factor-matching fast path for direct
// products of simple groups, then exhaustive generator-image search up to
// ISO_BACKTRACK_BOUND, then normal-lattice shape comparison for tagged
// groups. Undecided is a real outcome; callers must not read it as "no".
IsoResult is_isomorphic(PermGroup const &a, PermGroup const &b);

// Every isomorphism a -> b in a deterministic order; automorphism groups
// via all_isomorphisms(g, g). Backtracking-based, so both groups must be
// within ISO_BACKTRACK_BOUND; throws ResourceError past cap.
std::vector<Homomorphism> all_isomorphisms(PermGroup const &a,
                                           PermGroup const &b,
                                           std::size_t cap = 100000);

} // namespace compatkit
