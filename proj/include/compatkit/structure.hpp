#pragma once

#include "compatkit/bigint.hpp"
#include "compatkit/lattice.hpp"
#include "compatkit/permgroup.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace compatkit {

// A simple group pinned up to isomorphism. At the orders this library
// handles, the order alone identifies a simple group except at 20160,
// where the element-order profile breaks the tie.
struct SimpleType {
  enum class Label { Cyclic, Alternating, OtherSimple };

  Label label = Label::Cyclic;
  std::uint64_t param = 0; // Cyclic: the prime; Alternating: n; else 0
  BigInt order = 0;
  std::string fingerprint; // OtherSimple only

  static SimpleType cyclic(std::uint64_t p); // p must be prime
  static SimpleType alternating(unsigned n); // n >= 5
  static SimpleType of(PermGroup const &g);  // g must be simple

  // g simple and of this isomorphism type? Never throws on a wrong guess.
  bool matches(PermGroup const &g) const;

  std::string str() const; // "C2", "A5", "S#<order>"

  bool operator==(SimpleType const &o) const;
  bool operator!=(SimpleType const &o) const { return !(*this == o); }
  bool operator<(SimpleType const &o) const;
};

// A class of finite groups cut out by a set delta of allowed composition
// factors; such classes are closed under normal subgroups, quotients, and
// extensions. delta = all prime cyclics is spelled via the solvable flag.
struct MelnikovFormation {
  std::vector<SimpleType> delta; // sorted, unique; ignored when all_primes
  bool all_primes = false;
  std::string name;

  static MelnikovFormation solvable();
  static MelnikovFormation of_types(std::vector<SimpleType> types,
                                    std::string name = "");

  bool admits(SimpleType const &t) const;
  bool contains(PermGroup const &g) const;
  std::string str() const;
};

// Factors of one composition series, bottom factor first.
using FactorSequence = std::vector<SimpleType>;

std::string sequence_str(FactorSequence const &seq);

// Multiset of composition factors, sorted. Also stamps the factor labels
// into the group's cached fingerprint. [memoized per group]
std::vector<SimpleType> composition_factor_multiset(PermGroup const &g);

// Every factor ordering achievable by some composition series, via
// recursion over maximal normal subgroups. All members share one multiset.
std::set<FactorSequence> composition_factor_sequences(PermGroup const &g);

// Join of all normal subgroups lying in k; the result lies in k.
// UndecidedError when the lattice cannot be completed.
PermGroup melnikov_radical(PermGroup const &g, MelnikovFormation const &k);

// Intersection of all normal subgroups with quotient in k; g modulo the
// result lies in k.
PermGroup melnikov_residue(PermGroup const &g, MelnikovFormation const &k);

// Join of all subnormal subgroups isomorphic to t; isomorphic to a direct
// power of t and normal in g. t must be nonabelian.
PermGroup s_t_subgroup(PermGroup const &g, SimpleType const &t);

// The subnormal simple subgroups. (Quasisimple would be the general
// notion; every group this library builds is center-free there.)
std::vector<PermGroup> components(PermGroup const &g);

// A subgroup-valued map commuting with every isomorphism.
struct CharacteristicFunctor {
  enum class Kind {
    Center,
    Derived,
    Fitting,
    Radical,
    Residue,
    RadicalOf,
    SubnormalJoin
  };

  Kind kind = Kind::Center;
  std::optional<MelnikovFormation> formation; // Residue | RadicalOf
  std::optional<SimpleType> type;             // SubnormalJoin

  static CharacteristicFunctor center();
  static CharacteristicFunctor derived();
  static CharacteristicFunctor fitting();
  static CharacteristicFunctor radical();
  static CharacteristicFunctor residue(MelnikovFormation k);
  static CharacteristicFunctor radical_of(MelnikovFormation k);
  static CharacteristicFunctor subnormal_join(SimpleType t);

  PermGroup apply(PermGroup const &g) const;
  std::string str() const;
};

} // namespace compatkit
