#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "compatkit/errors.hpp"
#include "compatkit/iso.hpp"
#include "compatkit/lattice.hpp"
#include "compatkit/ops.hpp"
#include "compatkit/structure.hpp"

using namespace compatkit;

namespace {

using ESet = std::set<Perm>;

ESet closure_of(ESet s) {
  std::vector<Perm> work(s.begin(), s.end());
  while (!work.empty()) {
    Perm x = work.back();
    work.pop_back();
    for (Perm const &y : std::vector<Perm>(s.begin(), s.end())) {
      for (Perm const &p : {x * y, y * x}) {
        if (s.insert(p).second)
          work.push_back(p);
      }
    }
  }
  return s;
}

// Every subgroup, by closing each current subgroup with each element.
// Only usable on tiny groups.
std::vector<ESet> all_subgroups(PermGroup const &g) {
  std::vector<Perm> const &elems = g.elements(200);
  std::set<ESet> seen;
  std::vector<ESet> work;
  ESet triv{Perm(g.degree())};
  seen.insert(triv);
  work.push_back(triv);
  while (!work.empty()) {
    ESet h = work.back();
    work.pop_back();
    for (Perm const &x : elems) {
      if (h.count(x))
        continue;
      ESet e = h;
      e.insert(x);
      ESet c = closure_of(std::move(e));
      if (seen.insert(c).second)
        work.push_back(c);
    }
  }
  return std::vector<ESet>(seen.begin(), seen.end());
}

bool subset_of(ESet const &a, ESet const &b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

bool normal_in_set(ESet const &h, ESet const &k) {
  for (Perm const &a : k)
    for (Perm const &x : h)
      if (!h.count(a.inverse() * x * a))
        return false;
  return true;
}

// Factor orders along every maximal chain of normal subgroups, top down,
// emitted bottom-first. At this scale each factor order is prime.
void chain_rec(std::vector<ESet> const &subs, std::size_t cur,
               std::vector<std::vector<bool>> const &nrm,
               std::vector<std::uint64_t> &acc,
               std::set<std::vector<std::uint64_t>> &out) {
  if (subs[cur].size() == 1) {
    std::vector<std::uint64_t> seq(acc.rbegin(), acc.rend());
    out.insert(seq);
    return;
  }
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (i == cur || !subset_of(subs[i], subs[cur]) ||
        subs[i].size() == subs[cur].size() || !nrm[i][cur])
      continue;
    bool maximal = true;
    for (std::size_t j = 0; j < subs.size() && maximal; ++j) {
      if (j == i || j == cur || !nrm[j][cur])
        continue;
      if (subset_of(subs[i], subs[j]) && subset_of(subs[j], subs[cur]) &&
          subs[j].size() != subs[i].size() &&
          subs[j].size() != subs[cur].size())
        maximal = false;
    }
    if (!maximal)
      continue;
    acc.push_back(subs[cur].size() / subs[i].size());
    chain_rec(subs, i, nrm, acc, out);
    acc.pop_back();
  }
}

std::set<std::string> brute_sequences(PermGroup const &g) {
  std::vector<ESet> subs = all_subgroups(g);
  std::size_t n = subs.size();
  std::vector<std::vector<bool>> nrm(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (subset_of(subs[i], subs[j]))
        nrm[i][j] = normal_in_set(subs[i], subs[j]);
  std::size_t top = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (subs[i].size() > subs[top].size())
      top = i;
  std::vector<std::uint64_t> acc;
  std::set<std::vector<std::uint64_t>> chains;
  chain_rec(subs, top, nrm, acc, chains);
  std::set<std::string> out;
  for (auto const &ch : chains) {
    std::string s;
    for (std::size_t i = 0; i < ch.size(); ++i)
      s += (i ? "," : "") + ("C" + std::to_string(ch[i]));
    out.insert(s);
  }
  return out;
}

std::set<std::string> seq_strings(std::set<FactorSequence> const &seqs) {
  std::set<std::string> out;
  for (FactorSequence const &s : seqs)
    out.insert(sequence_str(s));
  return out;
}

bool order_supported(std::uint64_t n, std::vector<std::uint64_t> const &ps) {
  for (std::uint64_t p : ps)
    while (n % p == 0)
      n /= p;
  return n == 1;
}

// Below order 60 every group is solvable, so membership in a formation
// generated by prime cyclics is decided by the prime support of the order.
ESet brute_radical_set(PermGroup const &g,
                       std::vector<std::uint64_t> const &ps) {
  std::vector<ESet> subs = all_subgroups(g);
  ESet whole;
  for (Perm const &x : g.elements(200))
    whole.insert(x);
  ESet u{Perm(g.degree())};
  for (ESet const &h : subs)
    if (normal_in_set(h, whole) && order_supported(h.size(), ps))
      u.insert(h.begin(), h.end());
  return closure_of(u);
}

ESet brute_residue_set(PermGroup const &g,
                       std::vector<std::uint64_t> const &ps) {
  std::vector<ESet> subs = all_subgroups(g);
  ESet whole;
  for (Perm const &x : g.elements(200))
    whole.insert(x);
  ESet r = whole;
  for (ESet const &h : subs) {
    if (!normal_in_set(h, whole) ||
        !order_supported(whole.size() / h.size(), ps))
      continue;
    ESet nr;
    for (Perm const &x : r)
      if (h.count(x))
        nr.insert(x);
    r = nr;
  }
  return r;
}

void check_equals_set(PermGroup const &got, ESet const &want) {
  REQUIRE(got.order() == BigInt(want.size()));
  for (Perm const &x : want)
    CHECK(got.contains(x));
}

PermGroup relabeled(PermGroup const &g, Perm const &t) {
  std::vector<Perm> gens;
  for (Perm const &x : g.gens())
    gens.push_back(t.inverse() * x * t);
  return PermGroup::from_gens(g.degree(), std::move(gens));
}

std::vector<std::string> factor_labels(PermGroup const &g) {
  std::vector<std::string> out;
  for (SimpleType const &t : composition_factor_multiset(g))
    out.push_back(t.str());
  return out;
}

// A sample of subgroups of g: normal lattice nodes, their nodes, and a few
// cyclic subgroups. Mixed subnormal and non-subnormal.
std::vector<PermGroup> subgroup_sample(PermGroup const &g) {
  std::vector<PermGroup> out;
  NormalLattice lat = normal_subgroups(g);
  for (PermGroup const &n : lat.nodes) {
    out.push_back(n);
    if (n.order() > 1 && n.order() < g.order())
      for (PermGroup const &m : normal_subgroups(n).nodes)
        out.push_back(m);
  }
  std::vector<Perm> const &elems = g.elements(200000);
  for (std::size_t i = 0; i < elems.size() && i < 8; ++i)
    out.push_back(PermGroup::from_gens(g.degree(), {elems[i]}));
  return out;
}

PermGroup a5() { return PermGroup::alternating(5); }

PermGroup example_left() {
  // A5 acting on the six cosets of a dihedral point stabiliser.
  PermGroup d10 = PermGroup::from_gens(
      5, {Perm::parse(5, "(1 2 3 4 5)"), Perm::parse(5, "(2 5)(3 4)")});
  PermGroup on_six = coset_action(a5(), d10).image();
  return direct_product(wreath_product(a5(), on_six), PermGroup::cyclic(7));
}

PermGroup example_right() {
  return wreath_product(a5(), PermGroup::cyclic(7));
}

} // namespace

TEST_CASE("simple type recognition") {
  SimpleType c2 = SimpleType::cyclic(2);
  SimpleType c7 = SimpleType::cyclic(7);
  SimpleType alt5 = SimpleType::alternating(5);
  CHECK(c2.str() == "C2");
  CHECK(c7.str() == "C7");
  CHECK(alt5.str() == "A5");
  CHECK(alt5.order == BigInt(60));
  CHECK_THROWS_AS(SimpleType::cyclic(6), InputError);
  CHECK_THROWS_AS(SimpleType::alternating(4), InputError);

  CHECK(c2 < c7);
  CHECK(c7 < alt5); // by order
  CHECK(SimpleType::alternating(5) == alt5);

  CHECK(SimpleType::of(PermGroup::cyclic(7)) == c7);
  CHECK(SimpleType::of(a5()) == alt5);
  CHECK(SimpleType::of(PermGroup::alternating(7)) ==
        SimpleType::alternating(7));

  // 20160 is the one order below a million shared by two simple groups;
  // Alt(8) is the one with elements of order 15.
  CHECK(SimpleType::of(PermGroup::alternating(8)) ==
        SimpleType::alternating(8));

  CHECK(alt5.matches(a5()));
  Perm t = Perm::parse(7, "(1 6 2 7)");
  CHECK(alt5.matches(relabeled(direct_product(a5(), PermGroup::trivial(2)), t)));
  CHECK_FALSE(alt5.matches(PermGroup::cyclic(60)));
  CHECK_FALSE(alt5.matches(PermGroup::alternating(6)));
  CHECK_FALSE(c2.matches(PermGroup::cyclic(4)));
  CHECK(c2.matches(PermGroup::cyclic(2)));

  CHECK_THROWS_AS(SimpleType::of(PermGroup::trivial(3)), InputError);
}

TEST_CASE("formations admit and contain") {
  MelnikovFormation solv = MelnikovFormation::solvable();
  MelnikovFormation just2 = MelnikovFormation::of_types({SimpleType::cyclic(2)});
  MelnikovFormation p23 = MelnikovFormation::of_types(
      {SimpleType::cyclic(2), SimpleType::cyclic(3)});
  MelnikovFormation fa5 = MelnikovFormation::of_types({SimpleType::alternating(5)});
  MelnikovFormation mixed = MelnikovFormation::of_types(
      {SimpleType::cyclic(2), SimpleType::alternating(5)});

  CHECK(solv.str() == "solvable");
  CHECK(just2.str() == "{C2}");
  CHECK(p23.str() == "{C2,C3}");
  CHECK(mixed.str() == "{C2,A5}");

  CHECK(solv.admits(SimpleType::cyclic(13)));
  CHECK_FALSE(solv.admits(SimpleType::alternating(5)));
  CHECK(just2.admits(SimpleType::cyclic(2)));
  CHECK_FALSE(just2.admits(SimpleType::cyclic(3)));
  CHECK(mixed.admits(SimpleType::alternating(5)));
  CHECK_FALSE(mixed.admits(SimpleType::alternating(6)));

  CHECK(solv.contains(PermGroup::symmetric(4)));
  CHECK_FALSE(solv.contains(a5()));
  CHECK(just2.contains(PermGroup::quaternion(8)));
  CHECK_FALSE(just2.contains(PermGroup::symmetric(3)));
  CHECK(p23.contains(PermGroup::symmetric(4)));
  CHECK_FALSE(p23.contains(PermGroup::cyclic(10)));
  CHECK(fa5.contains(a5()));
  CHECK(fa5.contains(direct_product(a5(), a5())));
  CHECK_FALSE(fa5.contains(PermGroup::symmetric(5)));
  CHECK(mixed.contains(PermGroup::symmetric(5)));
  CHECK(mixed.contains(PermGroup::trivial(1)));
}

TEST_CASE("composition factor multisets follow construction tags") {
  CHECK(factor_labels(PermGroup::symmetric(4)) ==
        std::vector<std::string>{"C2", "C2", "C2", "C3"});
  CHECK(factor_labels(PermGroup::symmetric(5)) ==
        std::vector<std::string>{"C2", "A5"});
  CHECK(factor_labels(PermGroup::trivial(4)).empty());
  CHECK(factor_labels(PermGroup::cyclic(12)) ==
        std::vector<std::string>{"C2", "C2", "C3"});

  // Tag-driven paths: no element enumeration at these orders.
  PermGroup w = example_right();
  std::vector<std::string> want{"C7"};
  for (int i = 0; i < 7; ++i)
    want.push_back("A5");
  CHECK(factor_labels(w) == want);
  CHECK(factor_labels(example_left()) == want); // same multiset, either side

  // The multiset call stamps factor labels into the cached fingerprint.
  PermGroup s4 = PermGroup::symmetric(4);
  CHECK_FALSE(fingerprint(s4).factors_known);
  composition_factor_multiset(s4);
  IsoFingerprint fp = fingerprint(s4);
  CHECK(fp.factors_known);
  CHECK(fp.factors == std::vector<std::string>{"C2", "C2", "C2", "C3"});
  CHECK(fp.str().find("cf=C2,C2,C2,C3") != std::string::npos);
}

TEST_CASE("factor sequences match exhaustive chain enumeration") {
  std::vector<PermGroup> corpus;
  corpus.push_back(PermGroup::cyclic(12));
  corpus.push_back(PermGroup::alternating(4));
  corpus.push_back(PermGroup::symmetric(3));
  corpus.push_back(PermGroup::symmetric(4));
  corpus.push_back(PermGroup::dihedral(8));
  corpus.push_back(PermGroup::quaternion(8));
  corpus.push_back(PermGroup::cyclic(8));
  corpus.push_back(direct_product(PermGroup::cyclic(2), PermGroup::cyclic(2)));
  corpus.push_back(wreath_product(PermGroup::cyclic(2), PermGroup::cyclic(3)));
  corpus.push_back(direct_product(PermGroup::symmetric(3), PermGroup::cyclic(2)));
  for (PermGroup const &g : corpus) {
    CAPTURE(big_str(g.order()));
    CHECK(seq_strings(composition_factor_sequences(g)) == brute_sequences(g));
  }
}

TEST_CASE("factor sequences on structured groups") {
  CHECK(seq_strings(composition_factor_sequences(PermGroup::cyclic(12))) ==
        std::set<std::string>{"C2,C2,C3", "C2,C3,C2", "C3,C2,C2"});
  CHECK(seq_strings(composition_factor_sequences(PermGroup::alternating(4))) ==
        std::set<std::string>{"C2,C2,C3"});
  CHECK(seq_strings(composition_factor_sequences(PermGroup::symmetric(3))) ==
        std::set<std::string>{"C3,C2"});
  CHECK(seq_strings(composition_factor_sequences(PermGroup::symmetric(5))) ==
        std::set<std::string>{"A5,C2"});
  CHECK(seq_strings(composition_factor_sequences(
            direct_product(a5(), PermGroup::cyclic(2)))) ==
        std::set<std::string>{"A5,C2", "C2,A5"});
  CHECK(seq_strings(composition_factor_sequences(
            wreath_product(a5(), PermGroup::cyclic(2)))) ==
        std::set<std::string>{"A5,A5,C2"});

  // In the regular wreath product the base is the only proper normal
  // subgroup, so the cyclic factor can only come last.
  std::string seven_a5;
  for (int i = 0; i < 7; ++i)
    seven_a5 += (i ? ",A5" : "A5");
  CHECK(seq_strings(composition_factor_sequences(example_right())) ==
        std::set<std::string>{seven_a5 + ",C7"});

  // The direct factor C7 commutes past every subgroup in the other factor,
  // so it can sit at any of the eight positions.
  std::set<std::string> want;
  for (int pos = 0; pos <= 7; ++pos) {
    std::string s;
    for (int i = 0; i < 8; ++i) {
      if (i)
        s += ",";
      s += (i == pos) ? "C7" : "A5";
    }
    want.insert(s);
  }
  std::set<std::string> got = seq_strings(composition_factor_sequences(example_left()));
  CHECK(got == want);
  CHECK(got.size() == 8);
}

TEST_CASE("radical and residue match exhaustive enumeration") {
  std::vector<PermGroup> corpus;
  corpus.push_back(PermGroup::symmetric(4));
  corpus.push_back(PermGroup::alternating(4));
  corpus.push_back(PermGroup::cyclic(12));
  corpus.push_back(PermGroup::dihedral(8));
  corpus.push_back(PermGroup::quaternion(8));
  corpus.push_back(PermGroup::symmetric(3));
  corpus.push_back(PermGroup::cyclic(6));
  corpus.push_back(wreath_product(PermGroup::cyclic(2), PermGroup::cyclic(3)));
  corpus.push_back(direct_product(PermGroup::symmetric(3), PermGroup::cyclic(2)));

  struct Model {
    MelnikovFormation k;
    std::vector<std::uint64_t> primes;
  };
  std::vector<Model> models;
  models.push_back({MelnikovFormation::solvable(), {2, 3, 5, 7, 11, 13, 17, 19, 23}});
  models.push_back({MelnikovFormation::of_types({SimpleType::cyclic(2)}), {2}});
  models.push_back({MelnikovFormation::of_types(
                        {SimpleType::cyclic(2), SimpleType::cyclic(3)}),
                    {2, 3}});
  models.push_back({MelnikovFormation::of_types({SimpleType::cyclic(3)}), {3}});

  for (PermGroup const &g : corpus) {
    for (Model const &m : models) {
      CAPTURE(big_str(g.order()));
      CAPTURE(m.k.str());
      check_equals_set(melnikov_radical(g, m.k), brute_radical_set(g, m.primes));
      check_equals_set(melnikov_residue(g, m.k), brute_residue_set(g, m.primes));
    }
  }
}

TEST_CASE("radical and residue on structured groups") {
  MelnikovFormation solv = MelnikovFormation::solvable();
  MelnikovFormation just2 = MelnikovFormation::of_types({SimpleType::cyclic(2)});

  PermGroup s4 = PermGroup::symmetric(4);
  CHECK(melnikov_radical(s4, solv).same_group(s4));
  CHECK(melnikov_radical(a5(), solv).is_trivial());
  CHECK(melnikov_residue(s4, solv).is_trivial());
  CHECK(melnikov_residue(s4, just2).same_group(PermGroup::alternating(4)));

  PermGroup a5c6 = direct_product(a5(), PermGroup::cyclic(6));
  PermGroup c6_inside = direct_product(PermGroup::trivial(5), PermGroup::cyclic(6));
  CHECK(melnikov_radical(a5c6, solv).same_group(c6_inside));

  PermGroup a5c2 = direct_product(a5(), PermGroup::cyclic(2));
  PermGroup a5_inside = direct_product(a5(), PermGroup::trivial(2));
  CHECK(melnikov_residue(a5c2, solv).same_group(a5_inside));

  // Without a complete lattice neither bound is certified.
  CHECK_THROWS_AS(melnikov_radical(PermGroup::symmetric(9), solv), UndecidedError);
  CHECK_THROWS_AS(melnikov_residue(PermGroup::symmetric(9), solv), UndecidedError);
}

TEST_CASE("subnormal joins of a fixed simple type") {
  SimpleType alt5 = SimpleType::alternating(5);
  CHECK(s_t_subgroup(a5(), alt5).same_group(a5()));
  CHECK(s_t_subgroup(PermGroup::symmetric(5), alt5)
            .same_group(PermGroup::alternating(5)));
  CHECK(s_t_subgroup(PermGroup::symmetric(4), alt5).is_trivial());

  PermGroup w = wreath_product(a5(), PermGroup::cyclic(2));
  CHECK(s_t_subgroup(w, alt5).same_group(wreath_base(w)));

  PermGroup aa = direct_product(a5(), a5());
  CHECK(s_t_subgroup(aa, alt5).same_group(aa));

  // Type selectivity: only the matching factor contributes.
  PermGroup mixed = direct_product(PermGroup::alternating(6), a5());
  CHECK(s_t_subgroup(mixed, SimpleType::alternating(6))
            .same_group(direct_product(PermGroup::alternating(6),
                                       PermGroup::trivial(5))));
  CHECK(s_t_subgroup(mixed, alt5)
            .same_group(direct_product(PermGroup::trivial(6), a5())));

  CHECK_THROWS_AS(s_t_subgroup(PermGroup::cyclic(4), SimpleType::cyclic(2)),
                  InputError);
}

TEST_CASE("components are the subnormal simple factors") {
  CHECK(components(PermGroup::symmetric(4)).empty());
  CHECK(components(PermGroup::cyclic(12)).empty());

  PermGroup aa = direct_product(a5(), a5());
  std::vector<PermGroup> comps = aa.degree() ? components(aa) : std::vector<PermGroup>{};
  REQUIRE(comps.size() == 2);
  PermGroup left = direct_product(a5(), PermGroup::trivial(5));
  PermGroup right = direct_product(PermGroup::trivial(5), a5());
  CHECK(((comps[0].same_group(left) && comps[1].same_group(right)) ||
         (comps[0].same_group(right) && comps[1].same_group(left))));

  PermGroup w = wreath_product(a5(), PermGroup::cyclic(2));
  std::vector<PermGroup> wc = components(w);
  REQUIRE(wc.size() == 2);
  PermGroup base = wreath_base(w);
  for (PermGroup const &k : wc) {
    CHECK(k.order() == BigInt(60));
    CHECK(k.subgroup_of(base));
  }
  CHECK(join(wc[0], wc[1]).same_group(base));

  std::vector<PermGroup> sc = components(PermGroup::symmetric(5));
  REQUIRE(sc.size() == 1);
  CHECK(sc[0].same_group(PermGroup::alternating(5)));
}

TEST_CASE("closure laws for formation radicals and residues") {
  std::vector<PermGroup> corpus;
  corpus.push_back(PermGroup::symmetric(3));
  corpus.push_back(PermGroup::alternating(4));
  corpus.push_back(PermGroup::symmetric(4));
  corpus.push_back(PermGroup::dihedral(8));
  corpus.push_back(PermGroup::cyclic(12));
  corpus.push_back(wreath_product(PermGroup::cyclic(2), PermGroup::cyclic(3)));
  corpus.push_back(direct_product(PermGroup::symmetric(3), PermGroup::cyclic(2)));
  corpus.push_back(PermGroup::symmetric(5));
  corpus.push_back(direct_product(a5(), PermGroup::cyclic(2)));

  std::vector<MelnikovFormation> formations;
  formations.push_back(MelnikovFormation::solvable());
  formations.push_back(MelnikovFormation::of_types({SimpleType::cyclic(2)}));
  formations.push_back(MelnikovFormation::of_types(
      {SimpleType::cyclic(2), SimpleType::cyclic(3)}));
  formations.push_back(MelnikovFormation::of_types({SimpleType::alternating(5)}));
  formations.push_back(MelnikovFormation::of_types(
      {SimpleType::cyclic(2), SimpleType::alternating(5)}));

  for (PermGroup const &g : corpus) {
    NormalLattice lat = normal_subgroups(g);
    REQUIRE(lat.complete);
    for (MelnikovFormation const &k : formations) {
      CAPTURE(big_str(g.order()));
      CAPTURE(k.str());

      // Intersections and joins of normal members stay members, and the
      // same holds for kernels of quotients in the class.
      for (PermGroup const &n1 : lat.nodes)
        for (PermGroup const &n2 : lat.nodes) {
          if (k.contains(n1) && k.contains(n2)) {
            CHECK(k.contains(intersection(n1, n2)));
            CHECK(k.contains(join(n1, n2)));
          }
          if (k.contains(quotient(g, n1)) && k.contains(quotient(g, n2)))
            CHECK(k.contains(quotient(g, intersection(n1, n2))));
        }

      PermGroup rad = melnikov_radical(g, k);
      PermGroup res = melnikov_residue(g, k);
      CHECK(k.contains(rad));
      CHECK(k.contains(quotient(g, res)));
      CHECK(rad.normal_in(g));
      CHECK(res.normal_in(g));

      for (PermGroup const &n : lat.nodes) {
        // The residue is unchanged inside any normal subgroup containing it.
        if (res.subgroup_of(n))
          CHECK(melnikov_residue(n, k).same_group(res));
        // The radical meets a normal subgroup in its radical.
        CHECK(intersection(rad, n).same_group(melnikov_radical(n, k)));
        // Surjections carry residues onto residues and radicals into radicals.
        Homomorphism f = quotient_map(g, n);
        CHECK(f.map(res).same_group(melnikov_residue(f.image(), k)));
        CHECK(f.map(rad).subgroup_of(melnikov_radical(f.image(), k)));
      }
      if (g.construction() &&
          g.construction()->kind == Construction::Kind::DirectProduct) {
        for (int side = 0; side < 2; ++side) {
          Homomorphism f = dp_projection(g, side);
          CHECK(f.map(res).same_group(melnikov_residue(f.image(), k)));
          CHECK(f.map(rad).subgroup_of(melnikov_radical(f.image(), k)));
        }
      }
    }

    // One Jordan-Holder multiset, however the chain is ordered.
    std::set<FactorSequence> seqs = composition_factor_sequences(g);
    REQUIRE(!seqs.empty());
    FactorSequence first = *seqs.begin();
    std::sort(first.begin(), first.end());
    for (FactorSequence s : seqs) {
      std::sort(s.begin(), s.end());
      CHECK(s == first);
    }
  }
}

TEST_CASE("joins of subnormal subgroups stay subnormal") {
  std::vector<PermGroup> corpus;
  corpus.push_back(PermGroup::symmetric(4));
  corpus.push_back(wreath_product(PermGroup::cyclic(2), PermGroup::cyclic(3)));
  corpus.push_back(direct_product(PermGroup::symmetric(3), PermGroup::cyclic(2)));
  corpus.push_back(PermGroup::dihedral(12));

  for (PermGroup const &g : corpus) {
    CAPTURE(big_str(g.order()));
    std::vector<PermGroup> subs = subgroup_sample(g);
    std::vector<PermGroup> subnormal;
    for (PermGroup const &h : subs)
      if (is_subnormal(g, h).first)
        subnormal.push_back(h);
    REQUIRE(subnormal.size() >= 3);
    for (std::size_t i = 0; i < subnormal.size(); ++i)
      for (std::size_t j = i + 1; j < subnormal.size(); ++j)
        CHECK(is_subnormal(g, join(subnormal[i], subnormal[j])).first);
  }

  // A component either lies inside a subnormal subgroup or commutes with
  // it elementwise.
  std::vector<PermGroup> comp_corpus;
  comp_corpus.push_back(direct_product(a5(), PermGroup::cyclic(2)));
  comp_corpus.push_back(direct_product(a5(), a5()));
  for (PermGroup const &g : comp_corpus) {
    std::vector<PermGroup> comps = components(g);
    REQUIRE(!comps.empty());
    for (PermGroup const &h : subgroup_sample(g)) {
      if (!is_subnormal(g, h).first)
        continue;
      for (PermGroup const &kcomp : comps) {
        if (kcomp.subgroup_of(h))
          continue;
        bool commutes = true;
        for (Perm const &a : kcomp.gens())
          for (Perm const &b : h.gens())
            if (!(a * b == b * a))
              commutes = false;
        CHECK(commutes);
      }
    }
  }
}

TEST_CASE("subnormal join structure") {
  SimpleType alt5 = SimpleType::alternating(5);
  std::vector<PermGroup> corpus;
  corpus.push_back(direct_product(a5(), PermGroup::cyclic(2)));
  corpus.push_back(direct_product(a5(), a5()));
  corpus.push_back(PermGroup::symmetric(5));
  corpus.push_back(wreath_product(a5(), PermGroup::cyclic(2)));

  for (PermGroup const &g : corpus) {
    CAPTURE(big_str(g.order()));
    PermGroup s = s_t_subgroup(g, alt5);
    REQUIRE(!s.is_trivial());

    // The join is a direct power of the type.
    std::uint64_t so = to_u64(s.order());
    unsigned i = 0;
    while (so > 1) {
      REQUIRE(so % 60 == 0);
      so /= 60;
      ++i;
    }
    PermGroup power = a5();
    for (unsigned j = 1; j < i; ++j)
      power = direct_product(power, a5());
    CHECK(is_isomorphic(s, power).isomorphic());
    CHECK(is_subnormal(g, s).first);

    NormalLattice lat = normal_subgroups(g);
    std::vector<PermGroup> leaves;
    for (PermGroup const &c : components(g))
      if (c.order() == BigInt(60))
        leaves.push_back(c);
    CHECK(leaves.size() == i);

    for (PermGroup const &n : lat.nodes) {
      if (n.order() == g.order())
        continue;
      // Meets of the join with normal subgroups recurse.
      PermGroup meet = intersection(s, n);
      if (n.abelian() && n.order() > 1) {
        CHECK(meet.is_trivial());
      } else if (n.order() > 1) {
        CHECK(meet.same_group(s_t_subgroup(n, alt5)));
      }

      // Factors avoiding n assemble a normal complement of n inside sn.
      PermGroup comp = PermGroup::trivial(g.degree());
      for (PermGroup const &l : leaves)
        if (intersection(l, n).is_trivial())
          comp = comp.is_trivial() ? l : join(comp, l);
      PermGroup sn = join(s, n);
      CHECK(intersection(comp, n).is_trivial());
      CHECK(comp.normal_in(sn));
      CHECK(join(comp, n).order() == comp.order() * n.order());
    }
  }
}

TEST_CASE("characteristic images commute with isomorphisms") {
  struct Pair {
    PermGroup x, y;
  };
  std::vector<Pair> pairs;
  {
    PermGroup d8 = PermGroup::dihedral(8);
    pairs.push_back({d8, relabeled(d8, Perm::parse(4, "(1 4 2)"))});
    PermGroup d12 = direct_product(PermGroup::symmetric(3), PermGroup::cyclic(2));
    pairs.push_back({d12, relabeled(d12, Perm::parse(5, "(1 5 3)"))});
    PermGroup w = wreath_product(PermGroup::cyclic(2), PermGroup::cyclic(3));
    pairs.push_back({w, relabeled(w, Perm::parse(6, "(2 6)(3 5)"))});
    PermGroup ac = direct_product(a5(), PermGroup::cyclic(2));
    pairs.push_back({ac, relabeled(ac, Perm::parse(7, "(1 7 4 2)"))});
  }

  std::vector<CharacteristicFunctor> functors;
  functors.push_back(CharacteristicFunctor::center());
  functors.push_back(CharacteristicFunctor::derived());
  functors.push_back(CharacteristicFunctor::fitting());
  functors.push_back(CharacteristicFunctor::radical());
  functors.push_back(CharacteristicFunctor::residue(
      MelnikovFormation::of_types({SimpleType::cyclic(2)})));
  functors.push_back(CharacteristicFunctor::radical_of(
      MelnikovFormation::of_types({SimpleType::cyclic(2)})));
  functors.push_back(
      CharacteristicFunctor::subnormal_join(SimpleType::alternating(5)));

  CHECK(functors[0].str() == "center");
  CHECK(functors[4].str() == "residue:{C2}");
  CHECK(functors[6].str() == "subnormal-join:A5");

  for (Pair const &p : pairs) {
    IsoResult r = is_isomorphic(p.x, p.y);
    REQUIRE(r.isomorphic());
    REQUIRE(r.iso.has_value());
    for (CharacteristicFunctor const &f : functors) {
      CAPTURE(f.str());
      CAPTURE(big_str(p.x.order()));
      PermGroup fx = f.apply(p.x);
      PermGroup fy = f.apply(p.y);
      std::vector<Perm> mapped;
      for (Perm const &z : fx.gens())
        mapped.push_back(r.iso->apply(z));
      PermGroup image = PermGroup::from_gens(p.y.degree(), std::move(mapped));
      CHECK(image.same_group(fy));
    }
  }

  CharacteristicFunctor bare;
  bare.kind = CharacteristicFunctor::Kind::Residue;
  CHECK_THROWS_AS(bare.apply(PermGroup::symmetric(3)), InputError);
}
