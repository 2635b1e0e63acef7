#include "compatkit/catalog.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <fstream>
#include <future>
#include <mutex>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>

#include <json.hpp>

#include "compatkit/errors.hpp"
#include "compatkit/ops.hpp"

namespace compatkit {
namespace {

using nlohmann::json;

// Published isomorphism-class counts per order, [n-1] for order n.
// Validation table only, never a source of groups.
std::vector<std::uint64_t> const kPublishedCounts = {
    1, 1,  1, 2,  1, 2,  1, 5, 2, 2,  // 1..10
    1, 5,  1, 2,  1, 14, 1, 5, 1, 5,  // 11..20
    2, 2,  1, 15, 2, 2,  5, 4, 1, 4,  // 21..30
    1, 51, 1, 2,  1, 14, 1, 2, 2, 14, // 31..40
    1, 6,  1, 4,  2, 2,  1, 52, 2, 5, // 41..50
    1, 5,  1, 15, 2, 13, 2, 2, 1, 13, // 51..60
    1, 2,  4,                         // 61..63
};

std::vector<std::uint64_t> prime_divisors(std::uint64_t n) {
  std::vector<std::uint64_t> ps;
  for (std::uint64_t p = 2; p * p <= n; ++p)
    if (n % p == 0) {
      ps.push_back(p);
      while (n % p == 0)
        n /= p;
    }
  if (n > 1)
    ps.push_back(n);
  return ps;
}

bool is_prime_power(std::uint64_t n) {
  return n > 1 && prime_divisors(n).size() == 1;
}

// Multiplication of n reduced to index arithmetic over its element list.
// Automorphisms become index tables, so the (alpha, n0) sweep below never
// touches a stabilizer chain.
struct ExtCtx {
  std::vector<Perm> const *elems = nullptr;
  unsigned m = 0;
  unsigned id_idx = 0;
  std::vector<std::vector<unsigned>> mult; // mult[i][j] = elems[i]*elems[j]
  std::vector<unsigned> inv;
  std::vector<unsigned> own_gens;            // indices of n.gens()
  std::vector<unsigned> seq_gens;            // indices of the aut pair gens
  std::vector<std::array<unsigned, 3>> bfs;  // (node, parent, seq gen#)
};

ExtCtx build_ext_ctx(PermGroup const &n, Homomorphism const &first_aut) {
  ExtCtx c;
  c.elems = &n.elements(64);
  auto const &elems = *c.elems;
  c.m = static_cast<unsigned>(elems.size());
  std::unordered_map<Perm, unsigned, PermHash> pos;
  for (unsigned k = 0; k < c.m; ++k)
    pos.emplace(elems[k], k);
  c.id_idx = pos.at(Perm(n.degree()));
  c.mult.assign(c.m, std::vector<unsigned>(c.m));
  c.inv.resize(c.m);
  for (unsigned i = 0; i < c.m; ++i) {
    c.inv[i] = pos.at(elems[i].inverse());
    for (unsigned j = 0; j < c.m; ++j)
      c.mult[i][j] = pos.at(elems[i] * elems[j]);
  }
  for (Perm const &g : n.gens())
    c.own_gens.push_back(pos.at(g));
  for (auto const &[x, y] : first_aut.pairs()) {
    (void)y;
    c.seq_gens.push_back(pos.at(x));
  }
  std::vector<bool> seen(c.m, false);
  seen[c.id_idx] = true;
  std::vector<unsigned> queue{c.id_idx};
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    unsigned x = queue[qi];
    for (unsigned j = 0; j < c.seq_gens.size(); ++j) {
      unsigned y = c.mult[x][c.seq_gens[j]];
      if (!seen[y]) {
        seen[y] = true;
        c.bfs.push_back({y, x, j});
        queue.push_back(y);
      }
    }
  }
  return c;
}

using AutTable = std::vector<unsigned>;

// The automorphism's action on every element, grown from its generator
// images along the BFS spanning tree.
AutTable aut_table(ExtCtx const &c, Homomorphism const &alpha,
                   std::unordered_map<Perm, unsigned, PermHash> const &pos) {
  AutTable t(c.m);
  t[c.id_idx] = c.id_idx;
  std::vector<unsigned> img;
  for (auto const &[x, y] : alpha.pairs()) {
    (void)x;
    img.push_back(pos.at(y));
  }
  for (auto const &[node, parent, j] : c.bfs)
    t[node] = c.mult[t[parent]][img[j]];
  return t;
}

// Right regular representation of <N, t | t^p = n0, x^t = alpha(x)>.
// Slot i*m + k holds the element t^i * elems[k]; the generators are right
// multiplications, matching the left-to-right composition convention.
PermGroup realize_extension(ExtCtx const &c, AutTable const &alpha,
                            unsigned n0, unsigned p) {
  unsigned const m = c.m;
  unsigned const deg = p * m;
  std::vector<Perm> gens;
  for (unsigned gi : c.own_gens) {
    std::vector<unsigned> img(deg);
    for (unsigned k = 0; k < m; ++k) {
      unsigned to = c.mult[k][gi];
      for (unsigned i = 0; i < p; ++i)
        img[i * m + k] = i * m + to + 1;
    }
    gens.emplace_back(std::move(img));
  }
  {
    // (t^i y) * t = t^(i+1) alpha(y), with t^p folded into n0
    std::vector<unsigned> img(deg);
    for (unsigned k = 0; k < m; ++k) {
      unsigned moved = alpha[k];
      for (unsigned i = 0; i < p; ++i)
        img[i * m + k] =
            (i + 1 == p) ? c.mult[n0][moved] + 1 : (i + 1) * m + moved + 1;
    }
    gens.emplace_back(std::move(img));
  }
  PermGroup g = PermGroup::from_gens(deg, std::move(gens));
  if (g.order() != BigInt(deg))
    throw std::logic_error("cyclic extension realized with wrong order");
  return g;
}

// Every extension of n by a cyclic group of prime order p, up to obvious
// redundancy: the data is an automorphism alpha and an alpha-fixed element
// n0 with alpha^p equal to conjugation by n0. Conjugate automorphisms give
// isomorphic extensions (gamma carries (alpha, n0) to (gamma alpha
// gamma^-1, gamma(n0)) with the valid n0 sets in bijection), so only one
// representative per conjugacy class of Aut(n) is realized, with its full
// n0 sweep.
std::vector<PermGroup> extensions_of(PermGroup const &n,
                                     std::vector<Homomorphism> const &auts,
                                     unsigned p) {
  ExtCtx const c = build_ext_ctx(n, auts.front());
  std::unordered_map<Perm, unsigned, PermHash> pos;
  for (unsigned k = 0; k < c.m; ++k)
    pos.emplace((*c.elems)[k], k);

  std::vector<AutTable> tables;
  tables.reserve(auts.size());
  for (Homomorphism const &alpha : auts)
    tables.push_back(aut_table(c, alpha, pos));
  std::vector<AutTable> inverses;
  inverses.reserve(tables.size());
  for (AutTable const &t : tables) {
    AutTable ti(c.m);
    for (unsigned i = 0; i < c.m; ++i)
      ti[t[i]] = i;
    inverses.push_back(std::move(ti));
  }

  // conj[a][x] = a^-1 x a
  std::vector<std::vector<unsigned>> conj(c.m, std::vector<unsigned>(c.m));
  for (unsigned a = 0; a < c.m; ++a)
    for (unsigned x = 0; x < c.m; ++x)
      conj[a][x] = c.mult[c.mult[c.inv[a]][x]][a];

  std::set<AutTable> covered;
  std::vector<PermGroup> out;
  for (AutTable const &t : tables) {
    AutTable powered(c.m);
    for (unsigned i = 0; i < c.m; ++i) {
      unsigned y = i;
      for (unsigned step = 0; step < p; ++step)
        y = t[y];
      powered[i] = y;
    }
    std::vector<unsigned> valid;
    for (unsigned n0 = 0; n0 < c.m; ++n0)
      if (t[n0] == n0 && powered == conj[n0])
        valid.push_back(n0);
    if (valid.empty())
      continue;
    if (covered.count(t))
      continue;
    // retire the whole conjugacy class of t, keeping its stabilizer: any
    // gamma commuting with t maps (t, n0) extensions isomorphically onto
    // (t, gamma(n0)) ones, so one n0 per stabilizer orbit suffices
    std::vector<std::size_t> stab;
    for (std::size_t g = 0; g < tables.size(); ++g) {
      AutTable beta(c.m);
      for (unsigned i = 0; i < c.m; ++i)
        beta[i] = tables[g][t[inverses[g][i]]];
      if (beta == t)
        stab.push_back(g);
      covered.insert(std::move(beta));
    }
    std::set<unsigned> remaining(valid.begin(), valid.end());
    for (unsigned n0 : valid) {
      if (!remaining.count(n0))
        continue;
      std::vector<unsigned> orbit{n0};
      remaining.erase(n0);
      for (std::size_t qi = 0; qi < orbit.size(); ++qi)
        for (std::size_t g : stab) {
          unsigned y = tables[g][orbit[qi]];
          if (remaining.erase(y))
            orbit.push_back(y);
        }
      out.push_back(realize_extension(c, t, n0, p));
    }
  }
  return out;
}

// Isomorphism-class index: fingerprint buckets, then pairwise tests within
// the bucket. Inserts are idempotent and safe to run concurrently.
class DedupIndex {
public:
  bool insert(PermGroup const &g) {
    std::string key = fingerprint(g).str();
    std::lock_guard<std::mutex> lk(mu_);
    std::vector<PermGroup> &bucket = buckets_[key];
    for (PermGroup const &h : bucket) {
      IsoResult r = is_isomorphic(h, g);
      if (r.undecided())
        throw std::logic_error("catalog dedup could not decide isomorphism");
      if (r.isomorphic())
        return false;
    }
    bucket.push_back(g);
    return true;
  }

private:
  std::mutex mu_;
  std::unordered_map<std::string, std::vector<PermGroup>> buckets_;
};

// All proper subgroups, as sorted element vectors in a deterministic order.
std::vector<std::vector<Perm>> proper_subgroups(PermGroup const &g) {
  std::vector<Perm> const &elems = g.elements(64);
  std::set<std::vector<Perm>> seen;
  std::vector<std::vector<Perm>> work;
  std::vector<Perm> triv{Perm(g.degree())};
  seen.insert(triv);
  work.push_back(triv);
  while (!work.empty()) {
    std::vector<Perm> h = work.back();
    work.pop_back();
    for (Perm const &x : elems) {
      std::set<Perm> c(h.begin(), h.end());
      if (c.count(x))
        continue;
      c.insert(x);
      std::vector<Perm> q(c.begin(), c.end());
      while (!q.empty()) {
        Perm a = q.back();
        q.pop_back();
        for (Perm const &b : std::vector<Perm>(c.begin(), c.end()))
          for (Perm const &pr : {a * b, b * a})
            if (c.insert(pr).second)
              q.push_back(pr);
      }
      if (c.size() == elems.size())
        continue;
      std::vector<Perm> v(c.begin(), c.end());
      if (seen.insert(v).second)
        work.push_back(v);
    }
  }
  return {seen.begin(), seen.end()};
}

// Smallest faithful degree among the regular action and coset actions on
// maximal subgroups. Best-effort: abelian groups and p-groups are skipped
// outright, since every maximal subgroup there is normal and no proper
// coset action can be faithful.
PermGroup reduce_degree(PermGroup const &g) {
  std::uint64_t const m = to_u64(g.order());
  if (m <= 3 || g.abelian() || is_prime_power(m))
    return g;

  std::vector<std::vector<Perm>> subs = proper_subgroups(g);
  std::vector<std::size_t> maximal;
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (subs[i].size() == 1)
      continue;
    bool top = true;
    for (std::size_t j = 0; j < subs.size() && top; ++j)
      if (j != i && subs[j].size() > subs[i].size() &&
          std::includes(subs[j].begin(), subs[j].end(), subs[i].begin(),
                        subs[i].end()))
        top = false;
    if (top)
      maximal.push_back(i);
  }
  std::sort(maximal.begin(), maximal.end(), [&](std::size_t a, std::size_t b) {
    if (subs[a].size() != subs[b].size())
      return subs[a].size() > subs[b].size();
    return subs[a] < subs[b];
  });

  PermGroup best = g;
  for (std::size_t i : maximal) {
    unsigned deg = static_cast<unsigned>(m / subs[i].size());
    if (deg >= best.degree())
      continue;
    PermGroup h = PermGroup::from_gens(g.degree(), subs[i]);
    Homomorphism act = coset_action(g, h);
    if (act.image().order() == g.order())
      best = act.image();
  }
  return best;
}

std::string stable_fp_prefix(std::string const &s) {
  std::size_t cut = s.find("|cf=");
  return cut == std::string::npos ? s : s.substr(0, cut);
}

} // namespace

Catalog::Catalog(std::uint64_t completeness_bound, std::uint64_t max_order,
                 std::map<std::uint64_t, std::vector<CatalogEntry>> by_order)
    : bound_(completeness_bound), max_order_(max_order),
      by_order_(std::move(by_order)) {}

std::vector<std::uint64_t> Catalog::orders() const {
  std::vector<std::uint64_t> out;
  for (auto const &[o, v] : by_order_)
    if (!v.empty())
      out.push_back(o);
  return out;
}

std::vector<CatalogEntry> const &Catalog::at(std::uint64_t order) const {
  static std::vector<CatalogEntry> const empty;
  auto it = by_order_.find(order);
  return it == by_order_.end() ? empty : it->second;
}

CatalogEntry const &Catalog::lookup(std::uint64_t order,
                                    std::uint64_t index) const {
  auto const &v = at(order);
  if (index == 0 || index > v.size())
    throw InputError("no catalog entry with order " + std::to_string(order) +
                     ", index " + std::to_string(index));
  return v[index - 1];
}

std::vector<CatalogEntry const *> Catalog::adjoined_entries() const {
  std::vector<CatalogEntry const *> out;
  for (auto const &[o, v] : by_order_) {
    (void)o;
    for (CatalogEntry const &e : v)
      if (e.adjoined)
        out.push_back(&e);
  }
  return out;
}

std::size_t Catalog::size() const {
  std::size_t n = 0;
  for (auto const &[o, v] : by_order_) {
    (void)o;
    n += v.size();
  }
  return n;
}

Catalog build_catalog(std::uint64_t max_order, std::uint64_t hard_limit) {
  if (max_order == 0)
    throw InputError("catalog bound must be positive");
  if (hard_limit > CATALOG_HARD_LIMIT)
    hard_limit = CATALOG_HARD_LIMIT; // orders past 63 are never supported
  if (max_order > hard_limit)
    throw ResourceError("catalog bound " + std::to_string(max_order) +
                        " exceeds the hard limit " +
                        std::to_string(hard_limit));

  std::map<std::uint64_t, std::vector<CatalogEntry>> by_order;
  {
    PermGroup t = PermGroup::trivial(1);
    IsoFingerprint fp = fingerprint(t);
    by_order[1].push_back({1, 1, t, std::move(fp), false});
  }

  std::unordered_map<void const *, std::vector<Homomorphism>> aut_cache;

  for (std::uint64_t level = 2; level <= max_order; ++level) {
    struct Task {
      PermGroup const *n;
      std::vector<Homomorphism> const *auts;
      unsigned p;
    };
    std::vector<Task> tasks;
    for (std::uint64_t p : prime_divisors(level)) {
      for (CatalogEntry const &e : by_order[level / p]) {
        if (e.adjoined)
          continue; // the solvable recursion never extends adjunctions
        auto it = aut_cache.find(e.group.id());
        if (it == aut_cache.end())
          it = aut_cache
                   .emplace(e.group.id(),
                            all_isomorphisms(e.group, e.group))
                   .first;
        tasks.push_back({&e.group, &it->second, static_cast<unsigned>(p)});
      }
    }

    std::vector<std::future<std::vector<PermGroup>>> futs;
    futs.reserve(tasks.size());
    for (Task const &t : tasks)
      futs.push_back(std::async(std::launch::async, [t] {
        return extensions_of(*t.n, *t.auts, t.p);
      }));

    DedupIndex idx;
    std::vector<CatalogEntry> &out = by_order[level];
    for (auto &f : futs)
      for (PermGroup &cand : f.get()) {
        if (!idx.insert(cand))
          continue;
        PermGroup stored = reduce_degree(cand);
        IsoFingerprint fp = fingerprint(stored);
        out.push_back(
            {level, out.size() + 1, std::move(stored), std::move(fp), false});
      }

    if (level == 60) {
      PermGroup a5 = PermGroup::alternating(5);
      IsoFingerprint fp = fingerprint(a5);
      out.push_back({level, out.size() + 1, a5, std::move(fp), true});
    }

    if (out.size() != kPublishedCounts[level - 1])
      throw std::logic_error("catalog generation found " +
                             std::to_string(out.size()) +
                             " classes at order " + std::to_string(level) +
                             ", published count is " +
                             std::to_string(kPublishedCounts[level - 1]));
  }

  return Catalog(std::min<std::uint64_t>(max_order, 59), max_order,
                 std::move(by_order));
}

void save_catalog(Catalog const &c, std::string const &path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out)
    throw InputError("cannot write catalog file: " + path);
  json header = {
      {"compatkit-catalog", 1},
      {"completeness_bound", c.completeness_bound()},
      {"max_order", c.max_order()},
      {"generator", "cyclic-extension/1"},
      {"note",
       "every group of order < 60 is solvable and every nontrivial solvable "
       "group has a normal subgroup of prime index, so prime cyclic "
       "extensions reach every class up to the bound; Alt(5) is adjoined at "
       "order 60"},
  };
  out << header.dump() << "\n";
  for (std::uint64_t o : c.orders())
    for (CatalogEntry const &e : c.at(o)) {
      json gens = json::array();
      for (Perm const &g : e.group.gens())
        gens.push_back(g.str());
      json rec = {{"order", e.order},
                  {"index", e.index},
                  {"degree", e.group.degree()},
                  {"gens", std::move(gens)},
                  {"fp", e.fp.str()}};
      if (e.adjoined)
        rec["adjoined"] = true;
      out << rec.dump() << "\n";
    }
  if (!out)
    throw InputError("short write on catalog file: " + path);
}

Catalog load_catalog(std::string const &path) {
  std::ifstream in(path);
  if (!in)
    throw InputError("cannot open catalog file: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw InputError("empty catalog file: " + path);
  json header = json::parse(line, nullptr, false);
  if (header.is_discarded() || !header.is_object() ||
      !header.contains("compatkit-catalog"))
    throw InputError("not a catalog file: " + path);
  if (header["compatkit-catalog"].get<int>() != 1)
    throw InputError("unsupported catalog version in " + path);
  std::uint64_t bound = header.value("completeness_bound", std::uint64_t{0});
  std::uint64_t maxo = header.value("max_order", bound);

  std::map<std::uint64_t, std::vector<CatalogEntry>> by_order;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty())
      continue;
    json rec = json::parse(line, nullptr, false);
    std::string const where = path + ":" + std::to_string(lineno);
    if (rec.is_discarded() || !rec.is_object())
      throw InputError("bad catalog record at " + where);
    try {
      std::uint64_t order = rec.at("order").get<std::uint64_t>();
      std::uint64_t index = rec.at("index").get<std::uint64_t>();
      unsigned degree = rec.at("degree").get<unsigned>();
      std::vector<Perm> gens;
      for (auto const &s : rec.at("gens"))
        gens.push_back(Perm::parse(degree, s.get<std::string>()));
      PermGroup g = PermGroup::from_gens(degree, std::move(gens));
      if (g.order() != BigInt(order))
        throw InputError("group order mismatch at " + where);
      IsoFingerprint fp = fingerprint(g);
      std::string stored = rec.at("fp").get<std::string>();
      if (stable_fp_prefix(fp.str()) != stable_fp_prefix(stored))
        throw InputError("fingerprint mismatch at " + where);
      std::vector<CatalogEntry> &vec = by_order[order];
      if (index != vec.size() + 1)
        throw InputError("entry index out of sequence at " + where);
      vec.push_back({order, index, std::move(g), std::move(fp),
                     rec.value("adjoined", false)});
    } catch (json::exception const &) {
      throw InputError("bad catalog record at " + where);
    }
  }
  return Catalog(bound, maxo, std::move(by_order));
}

void validate_catalog(Catalog const &c) {
  if (c.completeness_bound() > 59)
    throw InputError("catalog claims completeness past order 59");
  for (std::uint64_t o = 1; o <= c.completeness_bound(); ++o)
    if (c.at(o).size() != kPublishedCounts[o - 1])
      throw InputError("catalog has " + std::to_string(c.at(o).size()) +
                       " entries at order " + std::to_string(o) +
                       ", published count is " +
                       std::to_string(kPublishedCounts[o - 1]));
  for (std::uint64_t o : c.orders()) {
    std::vector<CatalogEntry> const &v = c.at(o);
    for (std::size_t i = 0; i < v.size(); ++i) {
      CatalogEntry const &e = v[i];
      if (e.order != o || e.index != i + 1)
        throw InputError("misfiled catalog entry at order " +
                         std::to_string(o));
      if (e.group.order() != BigInt(o))
        throw InputError("catalog entry order " + std::to_string(o) +
                         ", index " + std::to_string(e.index) +
                         " has a group of the wrong order");
      if (stable_fp_prefix(fingerprint(e.group).str()) !=
          stable_fp_prefix(e.fp.str()))
        throw InputError("stale fingerprint at order " + std::to_string(o) +
                         ", index " + std::to_string(e.index));
      for (std::size_t j = i + 1; j < v.size(); ++j) {
        IsoResult r = is_isomorphic(e.group, v[j].group);
        if (r.isomorphic())
          throw InputError("duplicate catalog entries at order " +
                           std::to_string(o) + ": indices " +
                           std::to_string(e.index) + " and " +
                           std::to_string(v[j].index));
        if (r.undecided())
          throw InputError("cannot certify distinctness at order " +
                           std::to_string(o));
      }
    }
  }
}

std::string default_catalog_path() {
  if (char const *env = std::getenv("COMPATKIT_CATALOG"))
    return env;
  return "compatkit-catalog.jsonl";
}

std::vector<std::uint64_t> const &published_group_counts() {
  return kPublishedCounts;
}

} // namespace compatkit
