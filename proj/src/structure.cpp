#include "compatkit/structure.hpp"

#include "compatkit/errors.hpp"
#include "compatkit/iso.hpp"
#include "compatkit/ops.hpp"

#include <algorithm>
#include <cstddef>
#include <mutex>
#include <set>
#include <sstream>
#include <unordered_map>
#include <utility>

namespace compatkit {

namespace {

constexpr std::uint64_t STRUCT_ORDER_BOUND = 100000;

bool is_prime_u64(std::uint64_t n) {
  if (n < 2)
    return false;
  for (std::uint64_t p = 2; p <= n / p; ++p)
    if (n % p == 0)
      return false;
  return true;
}

BigInt half_factorial(unsigned n) {
  BigInt f = 1;
  for (unsigned i = 2; i <= n; ++i)
    f *= i;
  return f / 2;
}

// The two simple groups of order 20160 differ in 15-torsion.
bool has_order_fifteen(PermGroup const &g) {
  IsoFingerprint const fp = fingerprint(g);
  if (!fp.exact_counts)
    throw UndecidedError("order 20160 needs exact element-order counts to "
                         "pin the simple type");
  return fp.element_orders.count(15) != 0;
}

} // namespace

SimpleType SimpleType::cyclic(std::uint64_t p) {
  if (!is_prime_u64(p))
    throw InputError("cyclic simple type needs a prime order");
  SimpleType t;
  t.label = Label::Cyclic;
  t.param = p;
  t.order = p;
  return t;
}

SimpleType SimpleType::alternating(unsigned n) {
  if (n < 5)
    throw InputError("alternating simple type needs n >= 5");
  SimpleType t;
  t.label = Label::Alternating;
  t.param = n;
  t.order = half_factorial(n);
  return t;
}

SimpleType SimpleType::of(PermGroup const &g) {
  BigInt const &o = g.order();
  if (o == 1)
    throw InputError("the trivial group has no simple type");
  if (g.abelian()) {
    if (!fits_u64(o) || !is_prime_u64(to_u64(o)))
      throw InputError("abelian group of composite order is not simple");
    return cyclic(to_u64(o));
  }
  for (unsigned n = 5; n <= 25; ++n) {
    BigInt const f = half_factorial(n);
    if (f > o)
      break;
    if (f == o && (o != 20160 || has_order_fifteen(g)))
      return alternating(n);
  }
  SimpleType t;
  t.label = Label::OtherSimple;
  t.order = o;
  // order identifies the type everywhere in range except the one clash
  if (o == 20160)
    t.fingerprint = "no-15-torsion";
  return t;
}

bool SimpleType::matches(PermGroup const &g) const {
  if (g.order() != order)
    return false;
  try {
    if (!is_simple(g, STRUCT_ORDER_BOUND))
      return false;
    return of(g) == *this;
  } catch (InputError const &) {
    return false;
  }
}

std::string SimpleType::str() const {
  std::ostringstream os;
  switch (label) {
  case Label::Cyclic:
    os << "C" << param;
    break;
  case Label::Alternating:
    os << "A" << param;
    break;
  case Label::OtherSimple:
    os << "S#" << big_str(order);
    break;
  }
  return os.str();
}

bool SimpleType::operator==(SimpleType const &o) const {
  return label == o.label && param == o.param && order == o.order &&
         fingerprint == o.fingerprint;
}

bool SimpleType::operator<(SimpleType const &o) const {
  if (order != o.order)
    return order < o.order;
  if (label != o.label)
    return label < o.label;
  if (param != o.param)
    return param < o.param;
  return fingerprint < o.fingerprint;
}

MelnikovFormation MelnikovFormation::solvable() {
  MelnikovFormation k;
  k.all_primes = true;
  k.name = "solvable";
  return k;
}

MelnikovFormation MelnikovFormation::of_types(std::vector<SimpleType> types,
                                              std::string name) {
  MelnikovFormation k;
  std::sort(types.begin(), types.end());
  types.erase(std::unique(types.begin(), types.end()), types.end());
  k.delta = std::move(types);
  k.name = std::move(name);
  return k;
}

bool MelnikovFormation::admits(SimpleType const &t) const {
  if (all_primes)
    return t.label == SimpleType::Label::Cyclic;
  for (SimpleType const &d : delta)
    if (d == t)
      return true;
  return false;
}

bool MelnikovFormation::contains(PermGroup const &g) const {
  if (all_primes)
    return is_solvable(g);
  for (SimpleType const &t : composition_factor_multiset(g))
    if (!admits(t))
      return false;
  return true;
}

std::string MelnikovFormation::str() const {
  if (!name.empty())
    return name;
  std::ostringstream os;
  os << "{";
  for (std::size_t i = 0; i < delta.size(); ++i)
    os << (i ? "," : "") << delta[i].str();
  os << "}";
  return os.str();
}

std::string sequence_str(FactorSequence const &seq) {
  std::ostringstream os;
  for (std::size_t i = 0; i < seq.size(); ++i)
    os << (i ? "," : "") << seq[i].str();
  return os.str();
}

std::vector<SimpleType> composition_factor_multiset(PermGroup const &g) {
  if (auto cached = g.cache_get(CACHE_FACTORS))
    return *std::static_pointer_cast<std::vector<SimpleType>>(cached);

  std::vector<SimpleType> out;
  auto const &c = g.construction();
  if (g.is_trivial()) {
    // empty
  } else if (c && c->kind == Construction::Kind::DirectProduct) {
    out = composition_factor_multiset(c->children[0]);
    auto more = composition_factor_multiset(c->children[1]);
    out.insert(out.end(), more.begin(), more.end());
  } else if (c && c->kind == Construction::Kind::Wreath) {
    auto const bottom = composition_factor_multiset(c->children[0]);
    auto const top = composition_factor_multiset(c->children[1]);
    for (unsigned i = 0; i < c->children[1].degree(); ++i)
      out.insert(out.end(), bottom.begin(), bottom.end());
    out.insert(out.end(), top.begin(), top.end());
  } else if (fits_u64(g.order()) && is_solvable(g)) {
    std::uint64_t n = to_u64(g.order());
    for (std::uint64_t p = 2; p <= n / p; ++p)
      while (n % p == 0) {
        out.push_back(SimpleType::cyclic(p));
        n /= p;
      }
    if (n > 1)
      out.push_back(SimpleType::cyclic(n));
  } else if ([&] {
               try {
                 return is_simple(g, STRUCT_ORDER_BOUND);
               } catch (ResourceError const &) {
                 return false;
               }
             }()) {
    out.push_back(SimpleType::of(g));
  } else {
    NormalLattice const lat = normal_subgroups(g);
    if (lat.nodes.size() == 2) {
      out.push_back(SimpleType::of(g));
    } else {
      // any proper normal subgroup splits the multiset; take the largest
      PermGroup const &m = lat.nodes[lat.nodes.size() - 2];
      out = composition_factor_multiset(m);
      auto more =
          composition_factor_multiset(quotient(g, m, STRUCT_ORDER_BOUND));
      out.insert(out.end(), more.begin(), more.end());
    }
  }
  std::sort(out.begin(), out.end());

  IsoFingerprint fp = fingerprint(g);
  if (!fp.factors_known) {
    std::vector<std::string> labels;
    for (SimpleType const &t : out)
      labels.push_back(t.str());
    std::sort(labels.begin(), labels.end());
    fp.factors = std::move(labels);
    fp.factors_known = true;
    g.cache_put(CACHE_FINGERPRINT,
                std::make_shared<IsoFingerprint>(std::move(fp)));
  }

  g.cache_put(CACHE_FACTORS,
              std::make_shared<std::vector<SimpleType>>(out));
  return out;
}

namespace {

struct SeqEntry {
  PermGroup g;
  std::set<FactorSequence> seqs;
};

std::unordered_map<std::string, std::vector<SeqEntry>> seq_memo;
std::mutex seq_mu;

std::vector<std::size_t> maximal_proper_nodes(NormalLattice const &lat) {
  std::vector<std::size_t> out;
  BigInt const &go = lat.group.order();
  for (std::size_t i = 0; i < lat.nodes.size(); ++i) {
    if (lat.nodes[i].order() == go)
      continue;
    bool maximal = true;
    for (std::size_t j = 0; j < lat.nodes.size() && maximal; ++j)
      if (j != i && lat.nodes[j].order() != go &&
          lat.nodes[j].order() != lat.nodes[i].order() && lat.leq[i][j])
        maximal = false;
    if (maximal)
      out.push_back(i);
  }
  return out;
}

} // namespace

std::set<FactorSequence> composition_factor_sequences(PermGroup const &g) {
  if (auto cached = g.cache_get(CACHE_FACTOR_SEQS))
    return *std::static_pointer_cast<std::set<FactorSequence>>(cached);

  // sequence sets are isomorphism invariants; reuse across iso classes,
  // with a real isomorphism check since fingerprints may collide
  std::string const key = fingerprint(g).str();
  std::vector<SeqEntry> entries;
  {
    std::lock_guard<std::mutex> lock(seq_mu);
    auto it = seq_memo.find(key);
    if (it != seq_memo.end())
      entries = it->second;
  }
  for (SeqEntry const &e : entries)
    if (e.g.id() == g.id() || is_isomorphic(g, e.g).isomorphic()) {
      g.cache_put(CACHE_FACTOR_SEQS,
                  std::make_shared<std::set<FactorSequence>>(e.seqs));
      return e.seqs;
    }

  std::set<FactorSequence> out;
  if (g.is_trivial()) {
    out.insert(FactorSequence{});
  } else {
    NormalLattice const lat = normal_subgroups(g);
    for (std::size_t i : maximal_proper_nodes(lat)) {
      PermGroup const &m = lat.nodes[i];
      SimpleType const t =
          SimpleType::of(quotient(g, m, STRUCT_ORDER_BOUND));
      for (FactorSequence seq : composition_factor_sequences(m)) {
        seq.push_back(t);
        out.insert(std::move(seq));
      }
    }
  }

  {
    std::lock_guard<std::mutex> lock(seq_mu);
    seq_memo[key].push_back({g, out});
  }
  g.cache_put(CACHE_FACTOR_SEQS,
              std::make_shared<std::set<FactorSequence>>(out));
  return out;
}

PermGroup melnikov_radical(PermGroup const &g, MelnikovFormation const &k) {
  NormalLattice lat;
  try {
    lat = normal_subgroups(g);
  } catch (LatticeError const &e) {
    throw UndecidedError(std::string("radical needs the full normal "
                                     "lattice: ") +
                         e.what());
  }
  PermGroup res = PermGroup::trivial(g.degree());
  try {
    for (PermGroup const &n : lat.nodes)
      if (k.contains(n))
        res = join(res, n);
  } catch (UndecidedError const &) {
    throw;
  } catch (ResourceError const &e) {
    // an unclassifiable node could silently shrink the join
    throw UndecidedError(std::string("radical membership test failed: ") +
                         e.what());
  }
  return res;
}

PermGroup melnikov_residue(PermGroup const &g, MelnikovFormation const &k) {
  NormalLattice lat;
  try {
    lat = normal_subgroups(g);
  } catch (LatticeError const &e) {
    throw UndecidedError(std::string("residue needs the full normal "
                                     "lattice: ") +
                         e.what());
  }
  PermGroup res = lat.nodes.back();
  try {
    for (PermGroup const &n : lat.nodes) {
      if (n.order() == g.order())
        continue;
      if (!k.contains(quotient(g, n, STRUCT_ORDER_BOUND)))
        continue;
      if (res.subgroup_of(n))
        continue;
      res = n.subgroup_of(res) ? n : intersection(res, n);
    }
  } catch (UndecidedError const &) {
    throw;
  } catch (ResourceError const &e) {
    // a node with unknowable quotient type could silently widen the result
    throw UndecidedError(std::string("residue quotient test failed: ") +
                         e.what());
  }
  return res;
}

namespace {

// Every subnormal subgroup isomorphic to t is reachable by descending
// through normal subgroups, one lattice at a time; collect the hits.
void s_t_gather(PermGroup const &g, SimpleType const &t,
                std::vector<PermGroup> &leaves,
                std::set<void const *> &visited) {
  if (g.order() < t.order || !visited.insert(g.id()).second)
    return;
  NormalLattice lat;
  try {
    lat = normal_subgroups(g);
  } catch (LatticeError const &e) {
    throw UndecidedError(std::string("subnormal join needs full lattices "
                                     "along the descent: ") +
                         e.what());
  }
  for (PermGroup const &n : lat.nodes)
    if (n.order() > 1 && n.order() < g.order())
      s_t_gather(n, t, leaves, visited);
  if (t.matches(g)) {
    for (PermGroup const &seen : leaves)
      if (seen.same_group(g))
        return;
    leaves.push_back(g);
  }
}

} // namespace

PermGroup s_t_subgroup(PermGroup const &g, SimpleType const &t) {
  if (t.label == SimpleType::Label::Cyclic)
    throw InputError("subnormal join is defined for nonabelian simple "
                     "types");
  std::vector<PermGroup> leaves;
  std::set<void const *> visited;
  s_t_gather(g, t, leaves, visited);
  std::vector<Perm> gens;
  for (PermGroup const &l : leaves)
    for (Perm const &x : l.gens())
      gens.push_back(x);
  if (gens.empty())
    return PermGroup::trivial(g.degree());
  return PermGroup::from_gens(g.degree(), std::move(gens));
}

std::vector<PermGroup> components(PermGroup const &g) {
  std::vector<SimpleType> types;
  try {
    for (SimpleType const &t : composition_factor_multiset(g))
      if (t.label != SimpleType::Label::Cyclic &&
          (types.empty() || types.back() != t))
        types.push_back(t); // multiset is sorted, duplicates are adjacent
  } catch (ResourceError const &e) {
    throw UndecidedError(std::string("component search needs the factor "
                                     "multiset: ") +
                         e.what());
  }
  std::vector<PermGroup> leaves;
  for (SimpleType const &t : types) {
    std::set<void const *> visited;
    s_t_gather(g, t, leaves, visited);
  }
  return leaves;
}

CharacteristicFunctor CharacteristicFunctor::center() {
  CharacteristicFunctor f;
  f.kind = Kind::Center;
  return f;
}

CharacteristicFunctor CharacteristicFunctor::derived() {
  CharacteristicFunctor f;
  f.kind = Kind::Derived;
  return f;
}

CharacteristicFunctor CharacteristicFunctor::fitting() {
  CharacteristicFunctor f;
  f.kind = Kind::Fitting;
  return f;
}

CharacteristicFunctor CharacteristicFunctor::radical() {
  CharacteristicFunctor f;
  f.kind = Kind::Radical;
  return f;
}

CharacteristicFunctor CharacteristicFunctor::residue(MelnikovFormation k) {
  CharacteristicFunctor f;
  f.kind = Kind::Residue;
  f.formation = std::move(k);
  return f;
}

CharacteristicFunctor CharacteristicFunctor::radical_of(MelnikovFormation k) {
  CharacteristicFunctor f;
  f.kind = Kind::RadicalOf;
  f.formation = std::move(k);
  return f;
}

CharacteristicFunctor CharacteristicFunctor::subnormal_join(SimpleType t) {
  CharacteristicFunctor f;
  f.kind = Kind::SubnormalJoin;
  f.type = std::move(t);
  return f;
}

PermGroup CharacteristicFunctor::apply(PermGroup const &g) const {
  switch (kind) {
  case Kind::Center:
    return compatkit::center(g);
  case Kind::Derived:
    return derived_subgroup(g);
  case Kind::Fitting: {
    NormalLattice lat;
    try {
      lat = normal_subgroups(g);
    } catch (LatticeError const &e) {
      throw UndecidedError(std::string("fitting subgroup needs the full "
                                       "normal lattice: ") +
                           e.what());
    }
    PermGroup res = PermGroup::trivial(g.degree());
    for (PermGroup const &n : lat.nodes)
      if (is_nilpotent(n))
        res = join(res, n);
    return res;
  }
  case Kind::Radical:
    return melnikov_radical(g, MelnikovFormation::solvable());
  case Kind::Residue:
    if (!formation)
      throw InputError("residue functor needs a formation");
    return melnikov_residue(g, *formation);
  case Kind::RadicalOf:
    if (!formation)
      throw InputError("radical functor needs a formation");
    return melnikov_radical(g, *formation);
  case Kind::SubnormalJoin:
    if (!type)
      throw InputError("subnormal join functor needs a simple type");
    return s_t_subgroup(g, *type);
  }
  throw InputError("unknown functor kind");
}

std::string CharacteristicFunctor::str() const {
  switch (kind) {
  case Kind::Center:
    return "center";
  case Kind::Derived:
    return "derived";
  case Kind::Fitting:
    return "fitting";
  case Kind::Radical:
    return "solvable-radical";
  case Kind::Residue:
    return "residue:" + (formation ? formation->str() : std::string("?"));
  case Kind::RadicalOf:
    return "radical:" + (formation ? formation->str() : std::string("?"));
  case Kind::SubnormalJoin:
    return "subnormal-join:" + (type ? type->str() : std::string("?"));
  }
  return "?";
}

} // namespace compatkit
