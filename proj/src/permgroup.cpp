#include "compatkit/permgroup.hpp"

#include "compatkit/errors.hpp"

#include <array>
#include <mutex>
#include <sstream>
#include <unordered_set>

namespace compatkit {

struct PermGroupImpl {
  unsigned degree = 1;
  std::vector<Perm> gens;
  std::shared_ptr<StabChain const> chain;
  std::optional<Construction> construction;
  std::string expr;

  mutable std::mutex mu;
  mutable bool elements_ready = false;
  mutable std::vector<Perm> elements;
  mutable bool classes_ready = false;
  mutable std::vector<std::pair<Perm, std::uint64_t>> classes;
  mutable std::array<std::shared_ptr<void>, CACHE_COUNT> slots;
};

namespace {

std::string default_expr(unsigned degree, std::vector<Perm> const &gens) {
  std::ostringstream out;
  out << "Perm(" << degree;
  for (Perm const &g : gens)
    out << ", " << g.str();
  out << ")";
  return out.str();
}

std::shared_ptr<PermGroupImpl>
make_impl(unsigned degree, std::vector<Perm> gens, BigInt const *known_order,
          std::uint64_t seed) {
  if (degree == 0)
    throw InputError("group degree must be at least 1");
  std::vector<Perm> kept;
  for (Perm &g : gens) {
    if (g.degree() != degree)
      throw InputError("generator degree does not match group degree");
    if (g.id())
      continue;
    bool dup = false;
    for (Perm const &k : kept)
      if (k == g) {
        dup = true;
        break;
      }
    if (!dup)
      kept.push_back(std::move(g));
  }
  auto impl = std::make_shared<PermGroupImpl>();
  impl->degree = degree;
  impl->gens = std::move(kept);
  impl->chain = std::make_shared<StabChain const>(
      StabChain::build(degree, impl->gens, known_order, nullptr, seed));
  impl->expr = default_expr(degree, impl->gens);
  return impl;
}

} // namespace

PermGroup::PermGroup() {
  static std::shared_ptr<PermGroupImpl> const shared = make_impl(1, {}, nullptr, DEFAULT_SEED);
  impl_ = shared;
}

PermGroup PermGroup::from_gens(unsigned degree, std::vector<Perm> gens,
                               BigInt const *known_order, std::uint64_t seed) {
  return PermGroup(make_impl(degree, std::move(gens), known_order, seed));
}

PermGroup PermGroup::trivial(unsigned degree) {
  return from_gens(degree, {});
}

PermGroup PermGroup::cyclic(unsigned n) {
  if (n == 0)
    throw InputError("cyclic group needs order >= 1");
  if (n == 1)
    return trivial(1);
  std::vector<unsigned> im(n);
  for (unsigned i = 0; i < n; ++i)
    im[i] = 1u + (i + 1u) % n;
  BigInt const ord = n;
  return from_gens(n, {Perm(std::move(im))}, &ord);
}

PermGroup PermGroup::symmetric(unsigned n) {
  if (n == 0)
    throw InputError("symmetric group needs degree >= 1");
  if (n == 1)
    return trivial(1);
  BigInt ord = 1;
  for (unsigned i = 2; i <= n; ++i)
    ord *= i;
  std::vector<Perm> gens;
  std::vector<unsigned> cyc(n);
  for (unsigned i = 0; i < n; ++i)
    cyc[i] = 1u + (i + 1u) % n;
  gens.emplace_back(std::move(cyc));
  if (n > 2)
    gens.push_back(Perm::parse(n, "(1 2)"));
  return from_gens(n, std::move(gens), &ord);
}

PermGroup PermGroup::alternating(unsigned n) {
  if (n == 0)
    throw InputError("alternating group needs degree >= 1");
  if (n <= 2)
    return trivial(n);
  BigInt ord = 1; // 3*4*...*n == n!/2
  for (unsigned i = 3; i <= n; ++i)
    ord *= i;
  std::vector<Perm> gens;
  for (unsigned i = 1; i + 2 <= n; ++i) {
    std::ostringstream c;
    c << "(" << i << " " << i + 1 << " " << i + 2 << ")";
    gens.push_back(Perm::parse(n, c.str()));
  }
  return from_gens(n, std::move(gens), &ord);
}

PermGroup PermGroup::dihedral(unsigned order) {
  if (order < 4 || order % 2 != 0)
    throw InputError("dihedral group needs even order >= 4");
  unsigned const m = order / 2;
  if (m == 2) {
    BigInt const ord = 4;
    return from_gens(4, {Perm::parse(4, "(1 2)"), Perm::parse(4, "(3 4)")},
                     &ord);
  }
  std::vector<unsigned> rot(m), flip(m);
  for (unsigned i = 0; i < m; ++i)
    rot[i] = 1u + (i + 1u) % m;
  flip[0] = 1;
  for (unsigned i = 1; i < m; ++i)
    flip[i] = m + 1u - i;
  BigInt const ord = order;
  return from_gens(m, {Perm(std::move(rot)), Perm(std::move(flip))}, &ord);
}

PermGroup PermGroup::quaternion(unsigned order) {
  // Dicyclic presentation <a, b | a^(2m) = 1, b^2 = a^m, b^-1 a b = a^-1>,
  // realized by right multiplication on the 4m elements a^i b^e.
  if (order < 8 || order % 4 != 0)
    throw InputError("quaternion group needs order divisible by 4, >= 8");
  unsigned const m = order / 4;
  unsigned const two_m = 2 * m;
  auto pt = [&](unsigned i, unsigned e) { return 1u + i + two_m * e; };
  std::vector<unsigned> by_a(order), by_b(order);
  for (unsigned i = 0; i < two_m; ++i) {
    by_a[pt(i, 0) - 1u] = pt((i + 1u) % two_m, 0);
    by_a[pt(i, 1) - 1u] = pt((i + two_m - 1u) % two_m, 1);
    by_b[pt(i, 0) - 1u] = pt(i, 1);
    by_b[pt(i, 1) - 1u] = pt((i + m) % two_m, 0);
  }
  BigInt const ord = order;
  return from_gens(order, {Perm(std::move(by_a)), Perm(std::move(by_b))},
                   &ord);
}

unsigned PermGroup::degree() const { return impl_->degree; }

BigInt const &PermGroup::order() const { return impl_->chain->order(); }

std::vector<Perm> const &PermGroup::gens() const { return impl_->gens; }

StabChain const &PermGroup::chain() const { return *impl_->chain; }

bool PermGroup::contains(Perm const &p) const {
  if (p.degree() != impl_->degree)
    throw InputError("membership test needs matching degrees");
  return impl_->chain->contains(p);
}

bool PermGroup::subgroup_of(PermGroup const &other) const {
  if (degree() != other.degree())
    throw InputError("subgroup test needs matching degrees");
  if (order() > other.order())
    return false;
  for (Perm const &g : gens())
    if (!other.contains(g))
      return false;
  return true;
}

bool PermGroup::same_group(PermGroup const &other) const {
  if (impl_ == other.impl_)
    return true;
  return degree() == other.degree() && order() == other.order() &&
         subgroup_of(other);
}

bool PermGroup::normal_in(PermGroup const &other) const {
  if (!subgroup_of(other))
    return false;
  for (Perm const &og : other.gens())
    for (Perm const &g : gens())
      if (!contains(g.conjugated_by(og)))
        return false;
  return true;
}

bool PermGroup::abelian() const {
  auto const &gs = gens();
  for (std::size_t i = 0; i < gs.size(); ++i)
    for (std::size_t j = i + 1; j < gs.size(); ++j)
      if (!(gs[i] * gs[j] == gs[j] * gs[i]))
        return false;
  return true;
}

bool PermGroup::transitive() const {
  unsigned const n = degree();
  if (n == 1)
    return true;
  std::vector<char> seen(n + 1u, 0);
  std::vector<unsigned> queue{1u};
  seen[1] = 1;
  std::size_t covered = 1;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    unsigned const p = queue[head];
    for (Perm const &g : gens()) {
      unsigned const q = g[p];
      if (!seen[q]) {
        seen[q] = 1;
        ++covered;
        queue.push_back(q);
      }
    }
  }
  return covered == n;
}

std::vector<Perm> const &PermGroup::elements(std::uint64_t cap) const {
  std::lock_guard<std::mutex> lock(impl_->mu);
  if (!impl_->elements_ready) {
    impl_->elements = impl_->chain->elements(cap);
    impl_->elements_ready = true;
  }
  return impl_->elements;
}

std::vector<std::pair<Perm, std::uint64_t>> const &
PermGroup::conjugacy_classes(std::uint64_t cap) const {
  {
    std::lock_guard<std::mutex> lock(impl_->mu);
    if (impl_->classes_ready)
      return impl_->classes;
  }
  auto const &elts = elements(cap);
  std::lock_guard<std::mutex> lock(impl_->mu);
  if (impl_->classes_ready)
    return impl_->classes;
  std::unordered_set<Perm, PermHash> seen;
  seen.reserve(elts.size());
  for (Perm const &e : elts) {
    if (seen.count(e))
      continue;
    std::vector<Perm> orbit{e};
    seen.insert(e);
    for (std::size_t head = 0; head < orbit.size(); ++head)
      for (Perm const &g : gens()) {
        Perm c = orbit[head].conjugated_by(g);
        if (seen.insert(c).second)
          orbit.push_back(std::move(c));
      }
    impl_->classes.emplace_back(e, static_cast<std::uint64_t>(orbit.size()));
  }
  impl_->classes_ready = true;
  return impl_->classes;
}

Perm PermGroup::random_element(std::uint64_t &state) const {
  return impl_->chain->random_element(state);
}

std::optional<Construction> const &PermGroup::construction() const {
  return impl_->construction;
}

std::string const &PermGroup::expr() const { return impl_->expr; }

PermGroup PermGroup::with_expr(std::string expr) const {
  auto impl = std::make_shared<PermGroupImpl>();
  impl->degree = impl_->degree;
  impl->gens = impl_->gens;
  impl->chain = impl_->chain;
  impl->construction = impl_->construction;
  impl->expr = std::move(expr);
  return PermGroup(std::move(impl));
}

PermGroup PermGroup::with_construction(Construction c, std::string expr) const {
  auto impl = std::make_shared<PermGroupImpl>();
  impl->degree = impl_->degree;
  impl->gens = impl_->gens;
  impl->chain = impl_->chain;
  impl->construction = std::move(c);
  impl->expr = std::move(expr);
  return PermGroup(std::move(impl));
}

void const *PermGroup::id() const { return impl_.get(); }

std::shared_ptr<void> PermGroup::cache_get(int slot) const {
  std::lock_guard<std::mutex> lock(impl_->mu);
  return impl_->slots[static_cast<std::size_t>(slot)];
}

void PermGroup::cache_put(int slot, std::shared_ptr<void> value) const {
  std::lock_guard<std::mutex> lock(impl_->mu);
  impl_->slots[static_cast<std::size_t>(slot)] = std::move(value);
}

} // namespace compatkit
