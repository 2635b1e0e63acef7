#include "compatkit/perm.hpp"

#include "compatkit/errors.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace compatkit {

Perm::Perm(unsigned degree) : images_(degree)
{
  if (degree == 0u)
    throw InputError("permutation degree must be positive");
  std::iota(images_.begin(), images_.end(), 1u);
}

Perm::Perm(std::vector<unsigned> images) : images_(std::move(images))
{
  if (images_.empty())
    throw InputError("permutation degree must be positive");

  std::vector<bool> seen(images_.size(), false);
  for (unsigned x : images_) {
    if (x < 1u || x > images_.size() || seen[x - 1u])
      throw InputError("image table is not a bijection");
    seen[x - 1u] = true;
  }
}

bool Perm::id() const
{
  for (unsigned i = 0u; i < images_.size(); ++i)
    if (images_[i] != i + 1u)
      return false;
  return true;
}

Perm Perm::operator*(Perm const &other) const
{
  Perm res(*this);
  res *= other;
  return res;
}

Perm &Perm::operator*=(Perm const &other)
{
  if (other.degree() != degree())
    throw InputError("degree mismatch in permutation product");
  if (this == &other) { // p *= p must not read entries it already overwrote
    std::vector<unsigned> sq(images_.size());
    for (unsigned i = 0u; i < images_.size(); ++i)
      sq[i] = images_[images_[i] - 1u];
    images_ = std::move(sq);
    return *this;
  }
  for (auto &x : images_)
    x = other.images_[x - 1u];
  return *this;
}

Perm Perm::inverse() const
{
  std::vector<unsigned> inv(images_.size());
  for (unsigned i = 0u; i < images_.size(); ++i)
    inv[images_[i] - 1u] = i + 1u;

  Perm res(1u);
  res.images_ = std::move(inv);
  return res;
}

Perm Perm::commutator_with(Perm const &g) const
{
  return inverse() * g.inverse() * *this * g;
}

std::uint64_t Perm::order() const
{
  std::uint64_t ord = 1u;
  std::vector<bool> done(images_.size(), false);

  for (unsigned i = 0u; i < images_.size(); ++i) {
    if (done[i])
      continue;
    std::uint64_t len = 0u;
    unsigned j = i;
    while (!done[j]) {
      done[j] = true;
      j = images_[j] - 1u;
      ++len;
    }
    ord = std::lcm(ord, len);
  }
  return ord;
}

unsigned Perm::smallest_moved_point() const
{
  for (unsigned i = 0u; i < images_.size(); ++i)
    if (images_[i] != i + 1u)
      return i + 1u;
  return 0u;
}

Perm Perm::extended(unsigned degree) const
{
  if (degree < this->degree())
    throw InputError("cannot extend permutation to smaller degree");
  std::vector<unsigned> images(images_);
  images.resize(degree);
  std::iota(images.begin() + this->degree(), images.end(),
            this->degree() + 1u);
  Perm res(1u);
  res.images_ = std::move(images);
  return res;
}

Perm Perm::shifted(unsigned offset, unsigned degree) const
{
  if (offset + this->degree() > degree)
    throw InputError("shifted permutation exceeds degree");
  std::vector<unsigned> images(degree);
  std::iota(images.begin(), images.end(), 1u);
  for (unsigned i = 0u; i < this->degree(); ++i)
    images[offset + i] = images_[i] + offset;
  Perm res(1u);
  res.images_ = std::move(images);
  return res;
}

Perm Perm::restricted(unsigned degree) const
{
  if (degree > this->degree())
    throw InputError("cannot restrict permutation to larger degree");
  for (unsigned i = degree; i < this->degree(); ++i)
    if (images_[i] != i + 1u)
      throw InputError("permutation moves points beyond restriction degree");
  std::vector<unsigned> images(images_.begin(), images_.begin() + degree);
  for (unsigned x : images)
    if (x > degree)
      throw InputError("permutation does not preserve restriction range");
  Perm res(1u);
  res.images_ = std::move(images);
  return res;
}

std::string Perm::str() const
{
  std::ostringstream os;
  std::vector<bool> done(images_.size(), false);
  bool any = false;

  for (unsigned i = 0u; i < images_.size(); ++i) {
    if (done[i] || images_[i] == i + 1u)
      continue;
    any = true;
    os << '(' << i + 1u;
    done[i] = true;
    unsigned j = images_[i] - 1u;
    while (j != i) {
      os << ' ' << j + 1u;
      done[j] = true;
      j = images_[j] - 1u;
    }
    os << ')';
  }

  return any ? os.str() : "()";
}

Perm Perm::parse(unsigned degree, std::string const &cycles)
{
  std::vector<unsigned> images(degree);
  std::iota(images.begin(), images.end(), 1u);

  std::size_t i = 0u;
  auto skip_ws = [&]() {
    while (i < cycles.size() &&
           (cycles[i] == ' ' || cycles[i] == '\t'))
      ++i;
  };

  skip_ws();
  bool any_cycle = false;
  while (i < cycles.size()) {
    if (cycles[i] != '(')
      throw InputError("expected '(' in cycle notation at position " +
                       std::to_string(i));
    ++i;
    any_cycle = true;

    std::vector<unsigned> cyc;
    for (;;) {
      skip_ws();
      if (i < cycles.size() && cycles[i] == ',') { // tolerated separator
        ++i;
        skip_ws();
      }
      if (i >= cycles.size())
        throw InputError("unterminated cycle");
      if (cycles[i] == ')') {
        ++i;
        break;
      }
      if (!isdigit(static_cast<unsigned char>(cycles[i])))
        throw InputError("expected point at position " + std::to_string(i));
      unsigned pt = 0u;
      while (i < cycles.size() && isdigit(static_cast<unsigned char>(cycles[i])))
        pt = pt * 10u + static_cast<unsigned>(cycles[i++] - '0');
      if (pt < 1u || pt > degree)
        throw InputError("point " + std::to_string(pt) +
                         " out of range 1.." + std::to_string(degree));
      cyc.push_back(pt);
    }

    for (std::size_t k = 0u; k < cyc.size(); ++k) {
      unsigned from = cyc[k];
      unsigned to = cyc[(k + 1u) % cyc.size()];
      if (cyc.size() > 1u) {
        if (images[from - 1u] != from)
          throw InputError("cycles are not disjoint at point " +
                           std::to_string(from));
        images[from - 1u] = to;
      }
    }
    skip_ws();
  }

  if (!any_cycle) {
    // allow "" and "()" for the identity; "()" already consumed above
  }

  return Perm(std::move(images));
}

std::size_t Perm::hash() const
{
  std::size_t h = 1469598103934665603ull;
  for (unsigned x : images_) {
    h ^= x;
    h *= 1099511628211ull;
  }
  return h;
}

} // namespace compatkit
