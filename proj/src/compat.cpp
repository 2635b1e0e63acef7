#include "compatkit/compat.hpp"

#include <algorithm>
#include <chrono>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "compatkit/errors.hpp"
#include "compatkit/iso.hpp"
#include "compatkit/lattice.hpp"
#include "compatkit/ops.hpp"

namespace compatkit {
namespace {

using nlohmann::json;

// Factor stamping rewrites the cf suffix of a cached fingerprint, so memo
// keys use the prefix that never changes.
std::string stable_fp(PermGroup const &g) {
  std::string s = fingerprint(g).str();
  auto cut = s.find("|cf=");
  return cut == std::string::npos ? s : s.substr(0, cut);
}

std::string memo_key(PermGroup const &a, PermGroup const &b) {
  std::string x = stable_fp(a), y = stable_fp(b);
  if (y < x)
    std::swap(x, y);
  return x + "\n" + y;
}

// A hit must match the queried pair in the stored orientation; fingerprint
// equality alone is not identity, so the cheap id check is backed by real
// isomorphism tests.
bool same_pair(Certificate const &cert, PermGroup const &a,
               PermGroup const &b) {
  if (cert.l1.id() == a.id() && cert.l2.id() == b.id())
    return true;
  return is_isomorphic(cert.l1, a).isomorphic() &&
         is_isomorphic(cert.l2, b).isomorphic();
}

bool budget_covers(Budget const &stored, Budget const &wanted) {
  if (stored.witness_bound < wanted.witness_bound)
    return false;
  if (stored.depth < wanted.depth)
    return false;
  if (stored.time_ms != 0 && (wanted.time_ms == 0 ||
                              stored.time_ms < wanted.time_ms))
    return false;
  return true;
}

CertPtr memo_find(DecideMemo &memo, PermGroup const &a, PermGroup const &b,
                  Budget const &wanted) {
  std::vector<CertPtr> bucket;
  {
    std::lock_guard<std::mutex> lock(memo.mu);
    auto it = memo.buckets.find(memo_key(a, b));
    if (it == memo.buckets.end())
      return nullptr;
    bucket = it->second;
  }
  for (CertPtr const &cert : bucket) {
    if (!same_pair(*cert, a, b))
      continue;
    if (cert->verdict != Verdict::Unknown)
      return cert;
    if (budget_covers(cert->budget, wanted))
      return cert;
  }
  return nullptr;
}

void memo_store(DecideMemo &memo, CertPtr cert) {
  std::lock_guard<std::mutex> lock(memo.mu);
  auto &bucket = memo.buckets[memo_key(cert->l1, cert->l2)];
  for (CertPtr const &prev : bucket)
    if (prev->l1.id() == cert->l1.id() && prev->l2.id() == cert->l2.id() &&
        prev->verdict == cert->verdict)
      return;
  bucket.push_back(std::move(cert));
}

struct Deadline {
  bool armed = false;
  std::chrono::steady_clock::time_point at;

  static Deadline in(std::uint64_t ms) {
    Deadline d;
    if (ms) {
      d.armed = true;
      d.at = std::chrono::steady_clock::now() + std::chrono::milliseconds(ms);
    }
    return d;
  }
  bool expired() const {
    return armed && std::chrono::steady_clock::now() >= at;
  }
};

WitnessSystem identity_witness(PermGroup const &l1, PermGroup const &l2,
                               Homomorphism iso) {
  PermGroup triv = PermGroup::trivial(l1.degree());
  Homomorphism kiso = Homomorphism::build(triv, triv, {});
  return WitnessSystem{l1, Homomorphism::identity(l1), std::move(iso), triv,
                       triv, std::move(kiso)};
}

// Surjection of `sub` onto its image under f, with the image as codomain.
Homomorphism onto_image(PermGroup const &sub, Homomorphism const &f) {
  PermGroup img = f.map(sub);
  std::vector<std::pair<Perm, Perm>> pairs;
  for (Perm const &x : sub.gens())
    pairs.emplace_back(x, f.apply(x));
  return Homomorphism::build(sub, img, std::move(pairs));
}

bool has_abelian_factor(PermGroup const &g) {
  for (SimpleType const &t : composition_factor_multiset(g))
    if (t.label == SimpleType::Label::Cyclic)
      return true;
  return false;
}

std::string factors_str(PermGroup const &g) {
  return sequence_str(composition_factor_multiset(g));
}

std::set<SimpleType> factor_set(PermGroup const &g) {
  auto m = composition_factor_multiset(g);
  return std::set<SimpleType>(m.begin(), m.end());
}

// All (n1, n2) with n1, n2 nontrivial normal and n1 isomorphic to n2,
// ascending lattice order on both sides. Undecided comparisons set the
// flag; the caller must then refuse to treat the list as complete.
std::vector<std::pair<PermGroup, PermGroup>>
isomorphic_normal_pairs(NormalLattice const &lat1, NormalLattice const &lat2,
                        bool &undecided) {
  std::vector<std::pair<PermGroup, PermGroup>> out;
  for (std::size_t i = 1; i < lat1.nodes.size(); ++i)
    for (std::size_t j = 1; j < lat2.nodes.size(); ++j) {
      if (lat1.nodes[i].order() != lat2.nodes[j].order())
        continue;
      IsoResult r = is_isomorphic(lat1.nodes[i], lat2.nodes[j]);
      if (r.undecided())
        undecided = true;
      else if (r.isomorphic())
        out.emplace_back(lat1.nodes[i], lat2.nodes[j]);
    }
  return out;
}

std::vector<std::string> const kDefaultRuleOrder = {
    "R-FACTORS", "R-NORMSERIES", "R-SIMS", "R-RADCOMP"};

struct DecideCtx {
  Budget budget;
  Catalog const *catalog;
  DecideMemo *memo;
  std::vector<std::string> const *rules;
  Deadline deadline;
};

CertPtr decide_impl(PermGroup const &a, PermGroup const &b, DecideCtx &ctx,
                    unsigned depth);

// Evaluates one candidate pair recursively, translating the certificate
// into a member status.
MemberStatus member_status_of(CertPtr const &cert) {
  switch (cert->verdict) {
  case Verdict::Compatible:
    return MemberStatus::ProvedCompatible;
  case Verdict::Incompatible:
    return MemberStatus::Refuted;
  default:
    return MemberStatus::Unknown;
  }
}

} // namespace

std::string verdict_str(Verdict v) {
  switch (v) {
  case Verdict::Compatible:
    return "COMPATIBLE";
  case Verdict::Incompatible:
    return "INCOMPATIBLE";
  default:
    return "UNKNOWN";
  }
}

bool MinimalWitnessReport::all_pass() const {
  for (Check const &c : checks)
    if (!c.pass)
      return false;
  return true;
}

bool verify_witness(WitnessSystem const &w, std::string *reason) {
  auto fail = [&](std::string const &why) {
    if (reason)
      *reason = why;
    return false;
  };
  if (!w.p1.domain().same_group(w.g) || !w.p2.domain().same_group(w.g))
    return fail("a projection is not defined on the witness group");
  if (!w.p1.surjective())
    return fail("p1 is not surjective");
  if (!w.p2.surjective())
    return fail("p2 is not surjective");
  if (!w.p1.kernel().same_group(w.n1))
    return fail("n1 is not the kernel of p1");
  if (!w.p2.kernel().same_group(w.n2))
    return fail("n2 is not the kernel of p2");
  if (w.g.order() != w.p1.codomain().order() * w.n1.order())
    return fail("orders of kernel and image do not multiply to |G|");
  if (!w.kernel_iso.domain().same_group(w.n1))
    return fail("kernel map is not defined on n1");
  if (!w.kernel_iso.injective() ||
      !w.kernel_iso.image().same_group(w.n2))
    return fail("kernel map is not a bijection onto n2");
  IsoResult fresh = is_isomorphic(w.n1, w.n2);
  if (!fresh.isomorphic())
    return fail("kernels could not be confirmed isomorphic: " + fresh.reason);
  return true;
}

std::optional<WitnessSystem> search_witness(PermGroup const &l1,
                                            PermGroup const &l2,
                                            Catalog const &catalog,
                                            std::uint64_t max_witness_order) {
  if (l1.order() != l2.order())
    throw InputError("witness search needs groups of equal order");

  IsoResult top = is_isomorphic(l1, l2);
  if (top.isomorphic())
    return identity_witness(l1, l2, *top.iso);

  // An undecided test below the order of a later find would void the
  // smallest-witness claim, so it poisons everything above it.
  bool undecided_below = top.undecided();

  if (fits_u64(l1.order())) {
    std::uint64_t base = to_u64(l1.order());
    for (std::uint64_t m = base; base != 0 && m <= max_witness_order &&
                                 m <= catalog.max_order();
         m += base) {
      std::uint64_t k = m / base;
      if (k == 1)
        continue; // trivial kernel means isomorphic quotients, handled above
      if (undecided_below)
        throw UndecidedError("witness search could not rank order " +
                             std::to_string(m) +
                             " against an undecided smaller order");
      bool undecided_here = false;
      std::optional<WitnessSystem> found;
      for (CatalogEntry const &e : catalog.at(m)) {
        if (found)
          break;
        NormalLattice lat = normal_subgroups(e.group);
        struct Kernel {
          PermGroup node;
          Homomorphism qm;
          IsoResult to_l1, to_l2;
        };
        std::vector<Kernel> kernels;
        for (PermGroup const &n : lat.nodes) {
          if (n.order() != BigInt(k))
            continue;
          Homomorphism qm = quotient_map(e.group, n);
          IsoResult r1 = is_isomorphic(qm.codomain(), l1);
          IsoResult r2 = is_isomorphic(qm.codomain(), l2);
          if (r1.undecided() || r2.undecided())
            undecided_here = true;
          kernels.push_back(Kernel{n, std::move(qm), std::move(r1),
                                   std::move(r2)});
        }
        for (Kernel const &k1 : kernels) {
          if (found || !k1.to_l1.isomorphic())
            continue;
          for (Kernel const &k2 : kernels) {
            if (!k2.to_l2.isomorphic())
              continue;
            IsoResult ki = is_isomorphic(k1.node, k2.node);
            if (ki.undecided()) {
              undecided_here = true;
              continue;
            }
            if (!ki.isomorphic())
              continue;
            found = WitnessSystem{e.group,
                                  k1.qm.then(*k1.to_l1.iso),
                                  k2.qm.then(*k2.to_l2.iso),
                                  k1.node,
                                  k2.node,
                                  *ki.iso};
            break;
          }
        }
      }
      if (found)
        return found; // same-order ties cannot beat it, smaller orders are clean
      undecided_below = undecided_below || undecided_here;
    }
  }
  if (undecided_below)
    throw UndecidedError(
        "witness search hit an undecided isomorphism test and found nothing");
  return std::nullopt;
}

std::vector<SimsPairCandidate> candidate_sims_pairs(PermGroup const &l1,
                                                    PermGroup const &l2,
                                                    DecideMemo *knowledge) {
  NormalLattice lat1 = normal_subgroups(l1);
  NormalLattice lat2 = normal_subgroups(l2);
  std::vector<SimsPairCandidate> out;
  for (std::size_t i = 0; i + 1 < lat1.nodes.size(); ++i) {
    BigInt q1_order = l1.order() / lat1.nodes[i].order();
    PermGroup q1 = quotient(l1, lat1.nodes[i]);
    for (std::size_t j = 0; j + 1 < lat2.nodes.size(); ++j) {
      if (l2.order() / lat2.nodes[j].order() != q1_order)
        continue;
      PermGroup q2 = quotient(l2, lat2.nodes[j]);
      IsoResult r = is_isomorphic(q1, q2);
      if (r.distinct())
        continue;
      SimsPairCandidate cand;
      cand.m1 = lat1.nodes[i];
      cand.m2 = lat2.nodes[j];
      if (r.isomorphic())
        cand.quotient_iso = r.iso;
      cand.member_status = MemberStatus::Unknown;
      if (knowledge) {
        if (CertPtr hit = memo_find(*knowledge, cand.m1, cand.m2, Budget{0, 0, 0}))
          cand.member_status = member_status_of(hit);
      }
      out.push_back(std::move(cand));
    }
  }
  return out;
}

std::optional<FactorSequence>
compatible_subnormal_series(PermGroup const &l1, PermGroup const &l2) {
  std::set<FactorSequence> const &s1 = composition_factor_sequences(l1);
  std::set<FactorSequence> s2 = composition_factor_sequences(l2);
  for (FactorSequence const &seq : s1)
    if (s2.count(seq))
      return seq;
  return std::nullopt;
}

std::optional<PairedChains> compatible_normal_series(PermGroup const &l1,
                                                     PermGroup const &l2) {
  NormalLattice lat1 = normal_subgroups(l1);
  NormalLattice lat2 = normal_subgroups(l2);
  std::size_t top1 = lat1.nodes.size() - 1, top2 = lat2.nodes.size() - 1;
  bool undecided = false;
  std::set<std::pair<std::size_t, std::size_t>> dead;
  std::vector<std::pair<std::size_t, std::size_t>> path;

  // sections of huge tagged groups can still overflow the quotient caps;
  // such an edge is unusable, not absent
  auto section_iso = [&](PermGroup const &big1, PermGroup const &small1,
                         PermGroup const &big2, PermGroup const &small2) {
    try {
      IsoResult r = is_isomorphic(quotient(big1, small1),
                                  quotient(big2, small2));
      if (r.undecided()) {
        undecided = true;
        return false;
      }
      return r.isomorphic();
    } catch (ResourceError const &) {
      undecided = true;
      return false;
    }
  };

  std::function<bool(std::size_t, std::size_t)> dfs = [&](std::size_t i,
                                                          std::size_t j) {
    if (i == top1 && j == top2)
      return true;
    if (dead.count({i, j}))
      return false;
    for (std::size_t i2 = i + 1; i2 < lat1.nodes.size(); ++i2) {
      if (!lat1.leq[i][i2])
        continue;
      BigInt sec = lat1.nodes[i2].order() / lat1.nodes[i].order();
      for (std::size_t j2 = j + 1; j2 < lat2.nodes.size(); ++j2) {
        if (!lat2.leq[j][j2])
          continue;
        if (lat2.nodes[j2].order() / lat2.nodes[j].order() != sec)
          continue;
        if (!section_iso(lat1.nodes[i2], lat1.nodes[i], lat2.nodes[j2],
                         lat2.nodes[j]))
          continue;
        path.emplace_back(i2, j2);
        if (dfs(i2, j2))
          return true;
        path.pop_back();
      }
    }
    dead.insert({i, j});
    return false;
  };

  if (dfs(0, 0)) {
    PairedChains out;
    out.chain1.push_back(lat1.nodes[0]);
    out.chain2.push_back(lat2.nodes[0]);
    for (auto const &[i, j] : path) {
      out.chain1.push_back(lat1.nodes[i]);
      out.chain2.push_back(lat2.nodes[j]);
    }
    return out;
  }
  if (undecided)
    throw UndecidedError("normal series search hit an undecided section");
  return std::nullopt;
}

namespace {

CertPtr decide_impl(PermGroup const &a, PermGroup const &b, DecideCtx &ctx,
                    unsigned depth) {
  Budget here = ctx.budget;
  here.depth = depth;
  if (CertPtr hit = memo_find(*ctx.memo, a, b, here))
    return hit;

  auto cert = std::make_shared<Certificate>();
  cert->l1 = a;
  cert->l2 = b;
  cert->budget = here;
  std::vector<std::string> notes;

  auto finish = [&](Verdict v) {
    cert->verdict = v;
    CertPtr out = cert;
    memo_store(*ctx.memo, out);
    return out;
  };
  auto refuted = [&](RefutationNode node) {
    cert->refutation = std::move(node);
    return finish(Verdict::Incompatible);
  };

  // orders must agree before anything else can
  if (a.order() != b.order()) {
    RefutationNode node;
    node.rule = "R-ORDER";
    node.facts["left_order"] = big_str(a.order());
    node.facts["right_order"] = big_str(b.order());
    return refuted(std::move(node));
  }

  IsoResult top = is_isomorphic(a, b);
  if (top.isomorphic()) {
    cert->witness = identity_witness(a, b, *top.iso);
    return finish(Verdict::Compatible);
  }
  bool iso_undecided = top.undecided();
  if (iso_undecided)
    notes.push_back("top-level isomorphism undecided");

  if (ctx.catalog && !ctx.deadline.expired()) {
    try {
      if (auto w = search_witness(a, b, *ctx.catalog,
                                  ctx.budget.witness_bound)) {
        cert->witness = std::move(*w);
        return finish(Verdict::Compatible);
      }
    } catch (UndecidedError const &e) {
      notes.push_back(e.what());
    } catch (ResourceError const &e) {
      notes.push_back(e.what());
    }
  }

  for (std::string const &rule : *ctx.rules) {
    if (ctx.deadline.expired()) {
      notes.push_back("time budget exhausted");
      break;
    }
    if (rule == "R-FACTORS") {
      try {
        if (composition_factor_multiset(a) != composition_factor_multiset(b)) {
          RefutationNode node;
          node.rule = "R-FACTORS";
          node.facts["left_factors"] = factors_str(a);
          node.facts["right_factors"] = factors_str(b);
          return refuted(std::move(node));
        }
        if (!compatible_subnormal_series(a, b)) {
          RefutationNode node;
          node.rule = "R-SUBSERIES";
          node.facts["left_sequences"] =
              std::to_string(composition_factor_sequences(a).size());
          node.facts["right_sequences"] =
              std::to_string(composition_factor_sequences(b).size());
          return refuted(std::move(node));
        }
      } catch (ResourceError const &e) {
        notes.push_back(e.what());
      } catch (UndecidedError const &e) {
        notes.push_back(e.what());
      }
    } else if (rule == "R-NORMSERIES") {
      try {
        if (!has_abelian_factor(a) && !has_abelian_factor(b) &&
            !compatible_normal_series(a, b)) {
          RefutationNode node;
          node.rule = "R-NORMSERIES";
          node.facts["left_factors"] = factors_str(a);
          node.facts["right_factors"] = factors_str(b);
          return refuted(std::move(node));
        }
      } catch (ResourceError const &e) {
        notes.push_back(e.what());
      } catch (UndecidedError const &e) {
        notes.push_back(e.what());
      }
    } else if (rule == "R-SIMS") {
      // sound only against a proved non-isomorphism and for nontrivial
      // groups (a compatible nontrivial pair always has a Sims pair)
      if (iso_undecided || depth == 0 || a.is_trivial() || b.is_trivial()) {
        if (depth == 0)
          notes.push_back("recursion depth exhausted");
        continue;
      }
      try {
        std::vector<SimsPairCandidate> cands =
            candidate_sims_pairs(a, b, ctx.memo);
        std::vector<CertPtr> children;
        bool all_refuted = true;
        for (SimsPairCandidate const &c : cands) {
          if (ctx.deadline.expired()) {
            all_refuted = false;
            notes.push_back("time budget exhausted");
            break;
          }
          CertPtr sub = decide_impl(c.m1, c.m2, ctx, depth - 1);
          if (sub->verdict != Verdict::Incompatible) {
            all_refuted = false;
            break;
          }
          children.push_back(sub);
        }
        if (all_refuted) {
          RefutationNode node;
          node.rule = "R-SIMS";
          node.facts["candidates"] = std::to_string(cands.size());
          node.children = std::move(children);
          return refuted(std::move(node));
        }
      } catch (ResourceError const &e) {
        notes.push_back(e.what());
      } catch (UndecidedError const &e) {
        notes.push_back(e.what());
      }
    } else if (rule == "R-RADCOMP") {
      if (iso_undecided || depth == 0 || a.is_trivial() || b.is_trivial()) {
        if (depth == 0)
          notes.push_back("recursion depth exhausted");
        continue;
      }
      try {
        std::vector<SimsPairCandidate> cands =
            candidate_sims_pairs(a, b, ctx.memo);
        std::vector<CertPtr> excluded;
        bool rad_ok = true;
        MelnikovFormation solv = MelnikovFormation::solvable();
        for (SimsPairCandidate const &c : cands) {
          if (c.member_status == MemberStatus::Refuted) {
            CertPtr sub = memo_find(*ctx.memo, c.m1, c.m2, Budget{0, 0, 0});
            if (sub && sub->verdict == Verdict::Incompatible) {
              excluded.push_back(sub);
              continue;
            }
          }
          if (!melnikov_radical(c.m1, solv).is_trivial() &&
              !melnikov_radical(c.m2, solv).is_trivial()) {
            rad_ok = false;
            break;
          }
        }
        if (rad_ok) {
          NormalLattice lat1 = normal_subgroups(a);
          NormalLattice lat2 = normal_subgroups(b);
          bool pair_undecided = false;
          auto pairs = isomorphic_normal_pairs(lat1, lat2, pair_undecided);
          if (!pair_undecided) {
            std::vector<CertPtr> children = excluded;
            bool all_refuted = true;
            for (auto const &[n1, n2] : pairs) {
              if (ctx.deadline.expired()) {
                all_refuted = false;
                notes.push_back("time budget exhausted");
                break;
              }
              CertPtr sub = decide_impl(quotient(a, n1), quotient(b, n2),
                                        ctx, depth - 1);
              if (sub->verdict != Verdict::Incompatible) {
                all_refuted = false;
                break;
              }
              children.push_back(sub);
            }
            if (all_refuted) {
              RefutationNode node;
              node.rule = "R-RADCOMP";
              node.facts["excluded"] = std::to_string(excluded.size());
              node.facts["survivors"] =
                  std::to_string(cands.size() - excluded.size());
              node.facts["normal_pairs"] = std::to_string(pairs.size());
              node.children = std::move(children);
              return refuted(std::move(node));
            }
          } else {
            notes.push_back("normal pair enumeration undecided");
          }
        }
      } catch (ResourceError const &e) {
        notes.push_back(e.what());
      } catch (UndecidedError const &e) {
        notes.push_back(e.what());
      }
    } else {
      throw InputError("unknown refutation rule: " + rule);
    }
  }

  std::ostringstream note;
  note << "bounds exhausted: witness_bound=" << ctx.budget.witness_bound
       << " depth=" << depth;
  for (std::string const &n : notes)
    note << "; " << n;
  cert->note = note.str();
  return finish(Verdict::Unknown);
}

} // namespace

Certificate decide(PermGroup const &l1, PermGroup const &l2,
                   DecideOptions const &opts) {
  DecideMemo local;
  DecideCtx ctx;
  ctx.budget = opts.budget;
  ctx.catalog = opts.catalog;
  ctx.memo = opts.memo ? opts.memo : &local;
  std::vector<std::string> rules =
      opts.rule_order.empty() ? kDefaultRuleOrder : opts.rule_order;
  for (std::string const &r : rules)
    if (r != "R-FACTORS" && r != "R-NORMSERIES" && r != "R-SIMS" &&
        r != "R-RADCOMP")
      throw InputError("unknown refutation rule: " + r);
  ctx.rules = &rules;
  ctx.deadline = Deadline::in(opts.budget.time_ms);
  return *decide_impl(l1, l2, ctx, opts.budget.depth);
}

namespace {

bool verify_node(PermGroup const &a, PermGroup const &b,
                 RefutationNode const &node, std::string *reason);

bool fail_reason(std::string *reason, std::string const &why) {
  if (reason)
    *reason = why;
  return false;
}

bool verify_child(CertPtr const &child, PermGroup const &x,
                  PermGroup const &y, std::string *reason) {
  if (!child)
    return fail_reason(reason, "missing sub-certificate");
  if (child->verdict != Verdict::Incompatible)
    return fail_reason(reason, "sub-certificate is not a refutation");
  if (!is_isomorphic(child->l1, x).isomorphic() ||
      !is_isomorphic(child->l2, y).isomorphic())
    return fail_reason(reason, "sub-certificate covers a different pair");
  return verify_certificate(*child, reason);
}

bool verify_node(PermGroup const &a, PermGroup const &b,
                 RefutationNode const &node, std::string *reason) {
  try {
    if (node.rule == "R-ORDER")
      return a.order() != b.order() ||
             fail_reason(reason, "orders are equal");

    if (node.rule == "R-FACTORS")
      return composition_factor_multiset(a) !=
                 composition_factor_multiset(b) ||
             fail_reason(reason, "factor multisets agree");

    if (node.rule == "R-SUBSERIES")
      return !compatible_subnormal_series(a, b) ||
             fail_reason(reason, "sequence sets intersect");

    if (node.rule == "R-NORMSERIES") {
      if (has_abelian_factor(a) || has_abelian_factor(b))
        return fail_reason(reason, "an abelian factor is present");
      return !compatible_normal_series(a, b) ||
             fail_reason(reason, "a compatible normal series exists");
    }

    if (node.rule == "R-SIMS") {
      if (a.is_trivial() || b.is_trivial())
        return fail_reason(reason, "trivial group in a Sims refutation");
      if (!is_isomorphic(a, b).distinct())
        return fail_reason(reason, "groups not proved non-isomorphic");
      auto cands = candidate_sims_pairs(a, b, nullptr);
      if (node.children.size() != cands.size())
        return fail_reason(reason, "candidate count mismatch");
      for (std::size_t i = 0; i < cands.size(); ++i)
        if (!verify_child(node.children[i], cands[i].m1, cands[i].m2, reason))
          return false;
      return true;
    }

    if (node.rule == "R-RADCOMP") {
      if (a.is_trivial() || b.is_trivial())
        return fail_reason(reason, "trivial group in a radical refutation");
      if (!is_isomorphic(a, b).distinct())
        return fail_reason(reason, "groups not proved non-isomorphic");
      auto cands = candidate_sims_pairs(a, b, nullptr);
      std::size_t excluded = node.facts.count("excluded")
                                 ? std::stoull(node.facts.at("excluded"))
                                 : 0;
      if (excluded > node.children.size() || excluded > cands.size())
        return fail_reason(reason, "exclusion count out of range");
      // the first `excluded` children refute candidates; whichever
      // candidates they cover are exempt from the radical condition
      std::vector<bool> covered(cands.size(), false);
      for (std::size_t c = 0; c < excluded; ++c) {
        bool matched = false;
        for (std::size_t i = 0; i < cands.size() && !matched; ++i) {
          if (covered[i])
            continue;
          std::string sub_reason;
          if (verify_child(node.children[c], cands[i].m1, cands[i].m2,
                           &sub_reason)) {
            covered[i] = true;
            matched = true;
          }
        }
        if (!matched)
          return fail_reason(reason,
                             "an exclusion certificate matches no candidate");
      }
      MelnikovFormation solv = MelnikovFormation::solvable();
      for (std::size_t i = 0; i < cands.size(); ++i) {
        if (covered[i])
          continue;
        if (!melnikov_radical(cands[i].m1, solv).is_trivial() &&
            !melnikov_radical(cands[i].m2, solv).is_trivial())
          return fail_reason(reason,
                             "a surviving candidate has nontrivial radicals");
      }
      NormalLattice lat1 = normal_subgroups(a);
      NormalLattice lat2 = normal_subgroups(b);
      bool undecided = false;
      auto pairs = isomorphic_normal_pairs(lat1, lat2, undecided);
      if (undecided)
        return fail_reason(reason, "normal pair enumeration undecided");
      if (node.children.size() != excluded + pairs.size())
        return fail_reason(reason, "normal pair count mismatch");
      for (std::size_t i = 0; i < pairs.size(); ++i)
        if (!verify_child(node.children[excluded + i],
                          quotient(a, pairs[i].first),
                          quotient(b, pairs[i].second), reason))
          return false;
      return true;
    }

    return fail_reason(reason, "unknown rule: " + node.rule);
  } catch (std::exception const &e) {
    return fail_reason(reason, std::string("verification error: ") + e.what());
  }
}

} // namespace

bool verify_certificate(Certificate const &cert, std::string *reason) {
  switch (cert.verdict) {
  case Verdict::Unknown:
    return true;
  case Verdict::Compatible: {
    if (!cert.witness)
      return fail_reason(reason, "compatible verdict without a witness");
    if (!verify_witness(*cert.witness, reason))
      return false;
    if (!cert.witness->p1.codomain().same_group(cert.l1) ||
        !cert.witness->p2.codomain().same_group(cert.l2))
      return fail_reason(reason, "witness projections target other groups");
    return true;
  }
  case Verdict::Incompatible: {
    if (!cert.refutation)
      return fail_reason(reason, "incompatible verdict without a refutation");
    return verify_node(cert.l1, cert.l2, *cert.refutation, reason);
  }
  }
  return fail_reason(reason, "corrupt verdict");
}

MinimalWitnessReport minimal_witness_checks(WitnessSystem const &w,
                                            Catalog const &catalog) {
  MinimalWitnessReport report;
  auto add = [&](std::string name, bool pass, std::string detail) {
    report.checks.push_back({std::move(name), pass, std::move(detail)});
  };

  std::string why;
  if (!verify_witness(w, &why)) {
    report.advisory_only = true;
    add("witness well-formed", false, why);
    return report;
  }
  add("witness well-formed", true, "");

  // minimality: nothing smaller exists within the completeness bound
  report.advisory_only = true;
  if (fits_u64(w.g.order()) &&
      to_u64(w.g.order()) <= catalog.completeness_bound()) {
    try {
      auto smallest = search_witness(w.p1.codomain(), w.p2.codomain(),
                                     catalog, to_u64(w.g.order()));
      if (smallest && smallest->g.order() == w.g.order())
        report.advisory_only = false;
    } catch (std::exception const &) {
    }
  }

  PermGroup const &l1 = w.p1.codomain();
  PermGroup const &l2 = w.p2.codomain();

  std::vector<MelnikovFormation> formations = {
      MelnikovFormation::solvable(),
      MelnikovFormation::of_types({SimpleType::cyclic(2)}),
      MelnikovFormation::of_types(
          {SimpleType::cyclic(2), SimpleType::cyclic(3)}),
      MelnikovFormation::of_types({SimpleType::alternating(5)}),
      MelnikovFormation::of_types(
          {SimpleType::cyclic(2), SimpleType::alternating(5)}),
  };

  std::vector<CharacteristicFunctor> functors = {
      CharacteristicFunctor::center(),
      CharacteristicFunctor::derived(),
      CharacteristicFunctor::fitting(),
      CharacteristicFunctor::radical(),
      CharacteristicFunctor::subnormal_join(SimpleType::alternating(5)),
  };
  for (MelnikovFormation const &k : formations) {
    functors.push_back(CharacteristicFunctor::residue(k));
    functors.push_back(CharacteristicFunctor::radical_of(k));
  }

  for (CharacteristicFunctor const &f : functors) {
    std::string name = "functor " + f.str() + " vanishes when it agrees";
    try {
      PermGroup fa = f.apply(w.n1);
      PermGroup fb = f.apply(w.n2);
      if (fa.same_group(fb))
        add(name, fa.is_trivial(),
            fa.is_trivial() ? "" : "agrees on the kernels but is nontrivial");
      else
        add(name, true, "premise not met");
    } catch (std::exception const &e) {
      add(name, false, std::string("could not evaluate: ") + e.what());
    }
  }

  PermGroup m1 = w.p1.map(w.n2); // p1(N2)
  PermGroup m2 = w.p2.map(w.n1); // p2(N1)

  for (MelnikovFormation const &k : formations) {
    try {
      bool premise = k.contains(m2) || k.contains(m1);
      bool ok = !premise || (k.contains(w.n1) && k.contains(w.n2));
      add("membership in " + k.str() + " transfers", ok,
          premise ? "" : "premise not met");
    } catch (std::exception const &e) {
      add("membership in " + k.str() + " transfers", false, e.what());
    }
    try {
      MelnikovFormation const &kk = k;
      bool premise = melnikov_radical(m2, kk).is_trivial() ||
                     melnikov_radical(m1, kk).is_trivial();
      bool ok = !premise || (melnikov_radical(w.n1, kk).is_trivial() &&
                             melnikov_radical(w.n2, kk).is_trivial());
      add("radical triviality for " + k.str() + " transfers", ok,
          premise ? "" : "premise not met");
    } catch (std::exception const &e) {
      add("radical triviality for " + k.str() + " transfers", false,
          e.what());
    }
  }

  try {
    bool ok = factor_set(w.n1) == factor_set(m2);
    add("kernel matches its projection on factor sets", ok,
        ok ? "" : sequence_str(composition_factor_multiset(w.n1)) + " vs " +
                      sequence_str(composition_factor_multiset(m2)));
  } catch (std::exception const &e) {
    add("kernel matches its projection on factor sets", false, e.what());
  }
  try {
    bool ok = factor_set(l2) == factor_set(w.g);
    add("target matches the witness on factor sets", ok, "");
  } catch (std::exception const &e) {
    add("target matches the witness on factor sets", false, e.what());
  }

  // the projected kernels form a Sims pair, with the join of the kernels
  // as the witness for the members
  if (l1.is_trivial()) {
    add("projected kernels form a Sims pair", true, "trivial targets");
  } else {
    try {
      PermGroup q1 = quotient(l1, m1);
      PermGroup q2 = quotient(l2, m2);
      IsoResult qi = is_isomorphic(q1, q2);
      if (!qi.isomorphic() || q1.is_trivial()) {
        add("projected kernels form a Sims pair", false,
            q1.is_trivial() ? "quotient is trivial"
                            : "quotients not isomorphic");
      } else {
        PermGroup joined = join(w.n1, w.n2);
        WitnessSystem member{joined, onto_image(joined, w.p1),
                             onto_image(joined, w.p2), w.n1, w.n2,
                             w.kernel_iso};
        std::string mw;
        bool ok = verify_witness(member, &mw);
        add("projected kernels form a Sims pair", ok, ok ? "" : mw);
      }
    } catch (std::exception const &e) {
      add("projected kernels form a Sims pair", false, e.what());
    }
  }

  return report;
}

namespace {

json group_json(PermGroup const &g) {
  return json{{"expr", g.expr()}, {"fingerprint", fingerprint(g).str()}};
}

json hom_json(Homomorphism const &h) {
  json pairs = json::array();
  for (auto const &[x, y] : h.pairs())
    pairs.push_back(json::array({x.str(), y.str()}));
  return pairs;
}

json gens_json(PermGroup const &g) {
  json out = json::array();
  for (Perm const &p : g.gens())
    out.push_back(p.str());
  return out;
}

json node_json(RefutationNode const &node);

json cert_json(Certificate const &cert) {
  json out;
  out["version"] = 1;
  out["verdict"] = verdict_str(cert.verdict);
  out["groups"] = json::array({group_json(cert.l1), group_json(cert.l2)});
  out["budget"] = json{{"witness_bound", cert.budget.witness_bound},
                       {"depth", cert.budget.depth},
                       {"time_ms", cert.budget.time_ms}};
  if (cert.witness) {
    WitnessSystem const &w = *cert.witness;
    out["witness"] = json{
        {"G", json{{"expr", w.g.expr()},
                   {"degree", w.g.degree()},
                   {"gens", gens_json(w.g)}}},
        {"p1", hom_json(w.p1)},
        {"p2", hom_json(w.p2)},
        {"N1", json{{"degree", w.n1.degree()}, {"gens", gens_json(w.n1)}}},
        {"N2", json{{"degree", w.n2.degree()}, {"gens", gens_json(w.n2)}}},
        {"kernel_iso", hom_json(w.kernel_iso)}};
  }
  if (cert.refutation)
    out["refutation"] = node_json(*cert.refutation);
  if (!cert.note.empty())
    out["note"] = cert.note;
  return out;
}

json node_json(RefutationNode const &node) {
  json facts = json::object();
  for (auto const &[k, v] : node.facts)
    facts[k] = v;
  json children = json::array();
  for (CertPtr const &c : node.children)
    children.push_back(cert_json(*c));
  return json{{"rule", node.rule}, {"facts", facts}, {"children", children}};
}

} // namespace

std::string certificate_json(Certificate const &cert) {
  return cert_json(cert).dump();
}

} // namespace compatkit
