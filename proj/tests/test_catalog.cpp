#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "compatkit/catalog.hpp"
#include "compatkit/errors.hpp"
#include "compatkit/iso.hpp"
#include "compatkit/ops.hpp"

using namespace compatkit;

namespace {

// Isomorphism-class counts for orders 1..24, copied from the published
// table independently of the library's own copy.
std::vector<std::uint64_t> const kCounts = {
    1, 1, 1, 2, 1, 2, 1, 5, 2, 2,  1, 5,
    1, 2, 1, 14, 1, 5, 1, 5, 2, 2, 1, 15,
};

// Number of partitions of k, by the standard recurrence.
std::uint64_t partitions(unsigned k) {
  std::vector<std::uint64_t> p(k + 1, 0);
  p[0] = 1;
  for (unsigned i = 1; i <= k; ++i)
    for (unsigned j = i; j <= k; ++j)
      p[j] += p[j - i];
  return p[k];
}

// Abelian groups of order n biject with tuples of partitions of the
// prime exponents.
std::uint64_t abelian_count(std::uint64_t n) {
  std::uint64_t total = 1;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    unsigned e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    if (e)
      total *= partitions(e);
  }
  if (n > 1)
    total *= partitions(1);
  return total;
}

Catalog const &cat24() {
  static Catalog c = build_catalog(24);
  return c;
}

Catalog const &cat16() {
  static Catalog c = build_catalog(16);
  return c;
}

// Index of the unique entry isomorphic to g, or 0 if none.
std::uint64_t find_in(Catalog const &c, PermGroup const &g) {
  std::uint64_t found = 0;
  for (CatalogEntry const &e : c.at(g.order().convert_to<std::uint64_t>())) {
    if (is_isomorphic(e.group, g).isomorphic()) {
      REQUIRE(found == 0);
      found = e.index;
    }
  }
  return found;
}

unsigned involutions(PermGroup const &g) {
  unsigned n = 0;
  for (Perm const &x : g.elements(100))
    if (!x.id() && (x * x).id())
      ++n;
  return n;
}

std::string tmp_path(char const *name) {
  return std::string("/tmp/compatkit-test-") + name + ".jsonl";
}

} // namespace

TEST_CASE("catalog counts match the published table") {
  Catalog const &c = cat24();
  CHECK(c.completeness_bound() == 24);
  CHECK(c.max_order() == 24);
  CHECK(c.size() == 74);
  REQUIRE(c.orders().size() == 24);
  for (std::uint64_t n = 1; n <= 24; ++n)
    CHECK(c.at(n).size() == kCounts[n - 1]);
  auto const &table = published_group_counts();
  REQUIRE(table.size() >= 24);
  for (std::uint64_t n = 1; n <= 24; ++n)
    CHECK(table[n - 1] == kCounts[n - 1]);
}

TEST_CASE("abelian class counts follow the partition rule") {
  for (std::uint64_t n = 1; n <= 24; ++n) {
    std::uint64_t got = 0;
    for (CatalogEntry const &e : cat24().at(n))
      if (e.group.abelian())
        ++got;
    CHECK(got == abelian_count(n));
  }
}

TEST_CASE("small orders identify the expected groups") {
  Catalog const &c = cat24();
  CHECK(c.at(1)[0].group.order() == BigInt(1));
  CHECK(find_in(c, PermGroup::cyclic(6)) == 1);
  CHECK(find_in(c, PermGroup::symmetric(3)) == 2);

  // order 8: all five classes, one entry each
  std::vector<PermGroup> eights = {
      PermGroup::cyclic(8),
      direct_product(PermGroup::cyclic(4), PermGroup::cyclic(2)),
      direct_product(direct_product(PermGroup::cyclic(2), PermGroup::cyclic(2)),
                     PermGroup::cyclic(2)),
      PermGroup::dihedral(8),
      PermGroup::quaternion(8),
  };
  std::set<std::uint64_t> hit;
  for (PermGroup const &g : eights) {
    std::uint64_t idx = find_in(c, g);
    CHECK(idx != 0);
    hit.insert(idx);
  }
  CHECK(hit.size() == 5);

  // order 12: four classes by construction, the dicyclic one by its
  // involution count (the only nonabelian class with a single involution)
  std::set<std::uint64_t> twelve;
  twelve.insert(find_in(c, PermGroup::cyclic(12)));
  twelve.insert(find_in(c, direct_product(PermGroup::cyclic(6),
                                          PermGroup::cyclic(2))));
  twelve.insert(find_in(c, PermGroup::dihedral(12)));
  twelve.insert(find_in(c, PermGroup::alternating(4)));
  CHECK(twelve.size() == 4);
  CHECK(twelve.count(0) == 0);
  for (CatalogEntry const &e : c.at(12)) {
    if (twelve.count(e.index))
      continue;
    CHECK_FALSE(e.group.abelian());
    CHECK(involutions(e.group) == 1);
  }

  CHECK(find_in(c, PermGroup::symmetric(4)) != 0);
  CHECK(find_in(c, PermGroup::cyclic(16)) != 0);
}

TEST_CASE("entries within an order are pairwise distinct") {
  for (std::uint64_t n : {12u, 16u}) {
    auto const &v = cat24().at(n);
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = i + 1; j < v.size(); ++j)
        CHECK(is_isomorphic(v[i].group, v[j].group).distinct());
  }
}

TEST_CASE("construction is deterministic") {
  Catalog a = build_catalog(12);
  Catalog b = build_catalog(12);
  REQUIRE(a.size() == b.size());
  for (std::uint64_t n = 1; n <= 12; ++n) {
    auto const &va = a.at(n);
    auto const &vb = b.at(n);
    REQUIRE(va.size() == vb.size());
    for (std::size_t i = 0; i < va.size(); ++i) {
      CHECK(va[i].group.degree() == vb[i].group.degree());
      CHECK(va[i].fp.str() == vb[i].fp.str());
      REQUIRE(va[i].group.gens().size() == vb[i].group.gens().size());
      for (std::size_t k = 0; k < va[i].group.gens().size(); ++k)
        CHECK(va[i].group.gens()[k].str() == vb[i].group.gens()[k].str());
    }
  }
}

TEST_CASE("degrees are reduced where a faithful coset action exists") {
  Catalog const &c = cat24();
  auto degree_of = [&](PermGroup const &g) {
    return c.lookup(g.order().convert_to<std::uint64_t>(), find_in(c, g))
        .group.degree();
  };
  CHECK(degree_of(PermGroup::symmetric(3)) == 3);
  CHECK(degree_of(PermGroup::symmetric(4)) == 4);
  CHECK(degree_of(PermGroup::alternating(4)) == 4);
  // no faithful action below the regular one for these
  CHECK(degree_of(PermGroup::cyclic(6)) == 6);
  CHECK(degree_of(PermGroup::quaternion(8)) == 8);
  CHECK(degree_of(PermGroup::dihedral(12)) == 12);
}

TEST_CASE("lookup and bound errors") {
  CHECK_THROWS_AS(cat16().lookup(17, 1), InputError);
  CHECK_THROWS_AS(cat16().lookup(16, 15), InputError);
  CHECK_THROWS_AS(cat16().lookup(16, 0), InputError);
  CHECK(cat16().lookup(16, 14).group.order() == BigInt(16));
  CHECK_THROWS_AS(build_catalog(0), InputError);
  CHECK_THROWS_AS(build_catalog(64), ResourceError);
  CHECK_THROWS_AS(build_catalog(40, 36), ResourceError);
  CHECK(cat16().adjoined_entries().empty());
}

TEST_CASE("save and load round-trip") {
  std::string path = tmp_path("roundtrip");
  save_catalog(cat16(), path);
  Catalog loaded = load_catalog(path);
  CHECK(loaded.completeness_bound() == 16);
  CHECK(loaded.max_order() == 16);
  REQUIRE(loaded.size() == cat16().size());
  for (std::uint64_t n = 1; n <= 16; ++n) {
    auto const &va = cat16().at(n);
    auto const &vb = loaded.at(n);
    REQUIRE(va.size() == vb.size());
    for (std::size_t i = 0; i < va.size(); ++i) {
      CHECK(va[i].group.degree() == vb[i].group.degree());
      CHECK(va[i].group.order() == vb[i].group.order());
      REQUIRE(va[i].group.gens().size() == vb[i].group.gens().size());
      for (std::size_t k = 0; k < va[i].group.gens().size(); ++k)
        CHECK(va[i].group.gens()[k].str() == vb[i].group.gens()[k].str());
    }
  }
  CHECK_NOTHROW(validate_catalog(loaded));
  CHECK_NOTHROW(validate_catalog(cat16()));
  std::remove(path.c_str());
}

TEST_CASE("malformed catalog files are rejected") {
  auto write_file = [](std::string const &path, std::string const &text) {
    std::ofstream out(path);
    out << text;
  };
  std::string path = tmp_path("malformed");

  write_file(path, "");
  CHECK_THROWS_AS(load_catalog(path), InputError);
  write_file(path, "{\"something\":1}\n");
  CHECK_THROWS_AS(load_catalog(path), InputError);
  write_file(path, "{\"compatkit-catalog\":2,\"completeness_bound\":8,"
                   "\"max_order\":8}\n");
  CHECK_THROWS_AS(load_catalog(path), InputError);

  // a good file, then broken in targeted ways
  std::string good = tmp_path("good");
  save_catalog(build_catalog(8), good);
  std::vector<std::string> lines;
  {
    std::ifstream in(good);
    std::string line;
    while (std::getline(in, line))
      lines.push_back(line);
  }
  REQUIRE(lines.size() >= 5);

  {
    std::ofstream out(path);
    for (std::size_t i = 0; i < lines.size(); ++i)
      out << (i == 3 ? "{not json" : lines[i]) << "\n";
  }
  CHECK_THROWS_AS(load_catalog(path), InputError);

  {
    // drop one record: the next index arrives out of sequence
    std::ofstream out(path);
    for (std::size_t i = 0; i < lines.size(); ++i)
      if (i != lines.size() - 2)
        out << lines[i] << "\n";
  }
  CHECK_THROWS_AS(load_catalog(path), InputError);

  CHECK_THROWS_AS(load_catalog("/tmp/compatkit-no-such-file.jsonl"),
                  InputError);
  std::remove(path.c_str());
  std::remove(good.c_str());
}

TEST_CASE("environment override picks the catalog path") {
  setenv("COMPATKIT_CATALOG", "/tmp/somewhere/else.jsonl", 1);
  CHECK(default_catalog_path() == "/tmp/somewhere/else.jsonl");
  unsetenv("COMPATKIT_CATALOG");
  CHECK(default_catalog_path() == "compatkit-catalog.jsonl");
}
