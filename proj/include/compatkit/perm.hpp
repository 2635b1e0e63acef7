#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace compatkit {

// Permutation of {1, ..., degree}, stored as a dense image table.
// Points are 1-based everywhere in the API; composition is left-to-right,
// i.e. (a * b)[x] == b[a[x]].
class Perm {
public:
  explicit Perm(unsigned degree = 1);
  explicit Perm(std::vector<unsigned> images);

  unsigned degree() const { return static_cast<unsigned>(images_.size()); }
  unsigned operator[](unsigned pt) const { return images_[pt - 1u]; }

  bool id() const;
  bool operator==(Perm const &other) const { return images_ == other.images_; }
  bool operator!=(Perm const &other) const { return !(*this == other); }
  bool operator<(Perm const &other) const { return images_ < other.images_; }

  Perm operator*(Perm const &other) const;
  Perm &operator*=(Perm const &other);
  Perm inverse() const;

  // this * other * this^-1
  Perm conjugated_by(Perm const &g) const { return g.inverse() * *this * g; }
  Perm commutator_with(Perm const &g) const;

  std::uint64_t order() const;
  unsigned smallest_moved_point() const; // 0 if identity
  std::vector<unsigned> const &images() const { return images_; }

  // Same mapping on a larger point set; new points are fixed.
  Perm extended(unsigned degree) const;
  // Mapping shifted by `offset` points, embedded in the given degree.
  Perm shifted(unsigned offset, unsigned degree) const;
  // Restriction to {1, ..., degree}; requires the permutation to fix the rest
  // setwise point by point.
  Perm restricted(unsigned degree) const;

  std::string str() const; // disjoint cycles, e.g. "(1 2 3)(4 5)", "()" for id
  static Perm parse(unsigned degree, std::string const &cycles);

  std::size_t hash() const;

private:
  std::vector<unsigned> images_;
};

struct PermHash {
  std::size_t operator()(Perm const &p) const { return p.hash(); }
};

} // namespace compatkit
