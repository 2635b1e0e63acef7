#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "compatkit/errors.hpp"
#include "compatkit/ops.hpp"

#include <unordered_set>

using namespace compatkit;

namespace {

PermGroup klein4() {
  return PermGroup::from_gens(
      4, {Perm::parse(4, "(1 2)(3 4)"), Perm::parse(4, "(1 3)(2 4)")});
}

PermGroup dihedral_in_s4() {
  return PermGroup::from_gens(
      4, {Perm::parse(4, "(1 2 3 4)"), Perm::parse(4, "(1 3)")});
}

// Oracle: intersect by filtering an element list.
std::vector<Perm> brute_meet(PermGroup const &a, PermGroup const &b) {
  std::vector<Perm> out;
  for (Perm const &e : a.elements(200000))
    if (b.contains(e))
      out.push_back(e);
  return out;
}

} // namespace

TEST_CASE("direct products and their projections") {
  PermGroup g = direct_product(PermGroup::symmetric(3), PermGroup::cyclic(4));
  CHECK(g.degree() == 7);
  CHECK(g.order() == 24);
  CHECK(g.expr() == "DP(Perm(3, (1 2 3), (1 2)), Perm(4, (1 2 3 4)))");
  REQUIRE(g.construction().has_value());

  Homomorphism left = dp_projection(g, 0);
  Homomorphism right = dp_projection(g, 1);
  CHECK(left.surjective());
  CHECK(left.kernel().order() == 4);  // 1 x C4
  CHECK(right.kernel().order() == 6); // S3 x 1
  CHECK(right.kernel().same_group(
      PermGroup::from_gens(7, {Perm::parse(7, "(1 2 3)"),
                               Perm::parse(7, "(1 2)")})));
}

TEST_CASE("wreath products") {
  PermGroup w = wreath_product(PermGroup::cyclic(2), PermGroup::cyclic(3));
  CHECK(w.degree() == 6);
  CHECK(w.order() == 24); // 2^3 * 3

  PermGroup base = wreath_base(w);
  CHECK(base.order() == 8);
  CHECK(base.subgroup_of(w));
  CHECK(base.normal_in(w));

  Homomorphism top = wreath_top_map(w);
  CHECK(top.surjective());
  CHECK(top.kernel().same_group(base));

  // Intransitive top still yields the full base.
  PermGroup t = PermGroup::from_gens(
      4, {Perm::parse(4, "(1 2)"), Perm::parse(4, "(3 4)")});
  PermGroup w2 = wreath_product(PermGroup::cyclic(3), t);
  CHECK(w2.order() == 81 * 4);
  CHECK(wreath_base(w2).order() == 81);
}

TEST_CASE("normal closure in Sym(4)") {
  PermGroup s4 = PermGroup::symmetric(4);
  PermGroup dbl = PermGroup::from_gens(4, {Perm::parse(4, "(1 2)(3 4)")});
  CHECK(normal_closure(s4, dbl).same_group(klein4()));

  PermGroup swap2 = PermGroup::from_gens(4, {Perm::parse(4, "(1 2)")});
  CHECK(normal_closure(s4, swap2).order() == 24);

  PermGroup three = PermGroup::from_gens(4, {Perm::parse(4, "(1 2 3)")});
  CHECK(normal_closure(s4, three).order() == 12);
}

TEST_CASE("subnormality and defects") {
  PermGroup s4 = PermGroup::symmetric(4);
  PermGroup a4 = PermGroup::alternating(4);
  PermGroup v4 = klein4();
  PermGroup dbl = PermGroup::from_gens(4, {Perm::parse(4, "(1 2)(3 4)")});
  PermGroup swap2 = PermGroup::from_gens(4, {Perm::parse(4, "(1 2)")});
  PermGroup three = PermGroup::from_gens(4, {Perm::parse(4, "(1 2 3)")});

  CHECK(is_subnormal(s4, s4) == std::pair{true, 0u});
  CHECK(is_subnormal(s4, a4) == std::pair{true, 1u});
  CHECK(is_subnormal(s4, v4) == std::pair{true, 1u});
  // closure series: s4, then klein4, then dbl itself
  CHECK(is_subnormal(s4, dbl) == std::pair{true, 2u});
  CHECK_FALSE(is_subnormal(s4, swap2).first);
  CHECK_FALSE(is_subnormal(s4, three).first);
  CHECK_FALSE(is_subnormal(a4, three).first);
}

TEST_CASE("join and intersection against the oracle") {
  PermGroup s4 = PermGroup::symmetric(4);
  PermGroup a4 = PermGroup::alternating(4);
  PermGroup d8 = dihedral_in_s4();

  CHECK(join(a4, d8).same_group(s4));

  PermGroup meet = intersection(a4, d8);
  auto oracle = brute_meet(a4, d8);
  CHECK(meet.order() == oracle.size());
  CHECK(meet.same_group(klein4()));
  for (Perm const &e : oracle)
    CHECK(meet.contains(e));

  // Point stabilizer intersections on five points.
  PermGroup a5 = PermGroup::alternating(5);
  PermGroup s4in5 = PermGroup::from_gens(
      5, {Perm::parse(5, "(2 3)"), Perm::parse(5, "(2 3 4 5)")});
  PermGroup meet2 = intersection(a5, s4in5);
  CHECK(meet2.order() == 12);
  for (Perm const &e : brute_meet(s4in5, a5))
    CHECK(meet2.contains(e));

  CHECK(intersection(a4, s4).same_group(a4));
}

TEST_CASE("derived series, solvability, nilpotence") {
  PermGroup s4 = PermGroup::symmetric(4);
  PermGroup d1 = derived_subgroup(s4);
  CHECK(d1.same_group(PermGroup::alternating(4)));
  PermGroup d2 = derived_subgroup(d1);
  CHECK(d2.same_group(klein4()));
  CHECK(derived_subgroup(d2).is_trivial());

  CHECK(is_solvable(s4));
  CHECK_FALSE(is_solvable(PermGroup::alternating(5)));
  CHECK(is_perfect(PermGroup::alternating(5)));
  CHECK_FALSE(is_perfect(s4));

  CHECK(is_nilpotent(dihedral_in_s4()));
  CHECK(is_nilpotent(PermGroup::quaternion(8)));
  CHECK_FALSE(is_nilpotent(PermGroup::symmetric(3)));
  CHECK(is_nilpotent(PermGroup::cyclic(12)));

  // Tag-aware paths agree with the flat ones.
  PermGroup prod = direct_product(PermGroup::symmetric(3),
                                  PermGroup::cyclic(4));
  CHECK(is_solvable(prod));
  CHECK_FALSE(is_nilpotent(prod));
  CHECK_FALSE(is_solvable(wreath_product(PermGroup::alternating(5),
                                         PermGroup::cyclic(3))));
}

TEST_CASE("centers") {
  CHECK(center(PermGroup::symmetric(4)).is_trivial());
  CHECK(center(dihedral_in_s4()).order() == 2);
  CHECK(center(PermGroup::quaternion(8)).order() == 2);
  CHECK(center(PermGroup::cyclic(6)).order() == 6);

  PermGroup prod = direct_product(PermGroup::symmetric(3),
                                  PermGroup::cyclic(4));
  PermGroup z = center(prod);
  CHECK(z.order() == 4);

  // Diagonal rule on a wreath, cross-checked by enumeration.
  PermGroup w = wreath_product(PermGroup::cyclic(4), PermGroup::cyclic(3));
  PermGroup zw = center(w);
  CHECK(zw.order() == 4);
  for (Perm const &e : w.elements(200)) {
    bool central = true;
    for (Perm const &g : w.gens())
      if (!(e * g == g * e))
        central = false;
    CHECK(zw.contains(e) == central);
  }
}

TEST_CASE("coset action on Sym(4) mod dihedral") {
  PermGroup s4 = PermGroup::symmetric(4);
  PermGroup d8 = dihedral_in_s4();
  Homomorphism act = coset_action(s4, d8);
  CHECK(act.codomain().degree() == 3);
  CHECK(act.image().order() == 6);
  CHECK(act.kernel().same_group(klein4()));
  CHECK(core(s4, d8).same_group(klein4()));

  // Stabilizer of the trivial coset is the subgroup itself.
  for (Perm const &e : s4.elements(30))
    CHECK((act.apply(e)[1] == 1) == d8.contains(e));
}

TEST_CASE("quotients") {
  PermGroup s4 = PermGroup::symmetric(4);
  PermGroup q1 = quotient(s4, klein4());
  CHECK(q1.order() == 6);
  CHECK_FALSE(q1.abelian()); // so it is Sym(3)

  CHECK(quotient(s4, PermGroup::alternating(4)).order() == 2);
  CHECK(quotient(s4, s4).is_trivial());
  CHECK(quotient(s4, PermGroup::trivial(4)).same_group(s4));

  // Product splitting keeps the construction tags.
  PermGroup prod = direct_product(s4, PermGroup::cyclic(2));
  PermGroup v4ext = PermGroup::from_gens(
      6, {Perm::parse(6, "(1 2)(3 4)"), Perm::parse(6, "(1 3)(2 4)")});
  PermGroup q2 = quotient(prod, v4ext);
  CHECK(q2.order() == 12);
  REQUIRE(q2.construction().has_value());
  CHECK(q2.construction()->kind == Construction::Kind::DirectProduct);

  // Wreath shortcuts.
  PermGroup w = wreath_product(PermGroup::cyclic(2), PermGroup::cyclic(3));
  CHECK(quotient(w, wreath_base(w)).same_group(PermGroup::cyclic(3)));

  CHECK_THROWS_AS(quotient(s4, dihedral_in_s4()), InputError);
}

TEST_CASE("quotient maps evaluate correctly") {
  PermGroup s4 = PermGroup::symmetric(4);
  Homomorphism pi = quotient_map(s4, klein4());
  CHECK(pi.surjective());
  CHECK(pi.kernel().same_group(klein4()));
  CHECK(pi.codomain().order() == 6);
  for (Perm const &e : s4.elements(30)) {
    CHECK(pi.apply(e).id() == klein4().contains(e));
    Perm back = pi.preimage(pi.apply(e));
    CHECK(pi.apply(back) == pi.apply(e));
  }

  // Homomorphic over products.
  auto elts = s4.elements(30);
  for (std::size_t i = 0; i < elts.size(); i += 5)
    for (std::size_t j = 0; j < elts.size(); j += 7)
      CHECK(pi.apply(elts[i] * elts[j]) ==
            pi.apply(elts[i]) * pi.apply(elts[j]));
}

TEST_CASE("maps that are not homomorphisms are rejected") {
  PermGroup s3 = PermGroup::symmetric(3);
  PermGroup c2 = PermGroup::cyclic(2);
  Perm t = Perm::parse(2, "(1 2)");

  // The sign map works.
  auto sign = Homomorphism::try_build(
      s3, c2,
      {{Perm::parse(3, "(1 2 3)"), Perm(2)}, {Perm::parse(3, "(1 2)"), t}});
  CHECK(sign.has_value());
  CHECK(sign->surjective());
  CHECK(sign->kernel().order() == 3);

  // Sending a 3-cycle to an involution violates its relation.
  auto bad = Homomorphism::try_build(
      s3, c2,
      {{Perm::parse(3, "(1 2 3)"), t}, {Perm::parse(3, "(1 2)"), t}});
  CHECK_FALSE(bad.has_value());

  // First components must generate the domain.
  auto partial = Homomorphism::try_build(
      s3, c2, {{Perm::parse(3, "(1 2)"), t}});
  CHECK_FALSE(partial.has_value());
}

TEST_CASE("isomorphisms invert and compose") {
  PermGroup c6 = PermGroup::cyclic(6);
  PermGroup prod = direct_product(PermGroup::cyclic(2),
                                  PermGroup::cyclic(3));
  Perm g6 = Perm::parse(6, "(1 2 3 4 5 6)");
  Perm img = Perm::parse(5, "(1 2)(3 4 5)");
  Homomorphism iso = Homomorphism::build(c6, prod, {{g6, img}});
  CHECK(iso.surjective());
  CHECK(iso.injective());

  Homomorphism back = iso.inverse_iso();
  Homomorphism round = iso.then(back);
  for (Perm const &e : c6.elements(10))
    CHECK(round.apply(e) == e);

  Homomorphism ident = Homomorphism::identity(c6);
  CHECK(ident.apply(g6) == g6);
}

TEST_CASE("orbits and simplicity") {
  PermGroup g = PermGroup::from_gens(
      6, {Perm::parse(6, "(1 4)"), Perm::parse(6, "(2 5 6)")});
  auto os = orbits(g);
  REQUIRE(os.size() == 3);
  CHECK(os[0] == std::vector<unsigned>{1, 4});
  CHECK(os[1] == std::vector<unsigned>{2, 5, 6});
  CHECK(os[2] == std::vector<unsigned>{3});

  CHECK(is_simple(PermGroup::alternating(5)));
  CHECK(is_simple(PermGroup::alternating(6)));
  CHECK(is_simple(PermGroup::cyclic(7)));
  CHECK(is_simple(PermGroup::cyclic(2)));
  CHECK_FALSE(is_simple(PermGroup::trivial(3)));
  CHECK_FALSE(is_simple(PermGroup::cyclic(6)));
  CHECK_FALSE(is_simple(PermGroup::symmetric(4)));
  CHECK_FALSE(is_simple(PermGroup::alternating(4)));
  CHECK_THROWS_AS((void)is_simple(PermGroup::symmetric(9), 100000),
                  ResourceError);
}
