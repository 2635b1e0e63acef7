#include "compatkit/iso.hpp"

#include "compatkit/errors.hpp"
#include "compatkit/lattice.hpp"
#include "compatkit/ops.hpp"

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <unordered_map>
#include <utility>

namespace compatkit {

namespace {

Perm perm_pow(Perm const &x, std::uint64_t e) {
  Perm r(x.degree());
  Perm base = x;
  while (e) {
    if (e & 1u)
      r *= base;
    base *= base;
    e >>= 1;
  }
  return r;
}

std::vector<std::pair<std::uint64_t, unsigned>> factor_u64(std::uint64_t n) {
  std::vector<std::pair<std::uint64_t, unsigned>> fs;
  for (std::uint64_t p = 2; p <= n / p; ++p) {
    if (n % p)
      continue;
    unsigned e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    fs.emplace_back(p, e);
  }
  if (n > 1)
    fs.emplace_back(n, 1u);
  return fs;
}

// ---- abelianization invariants ----

// Exponents of the cyclic factors, grouped by prime. {2:[2,1], 3:[1]} is
// C4 x C2 x C3.
using PrimeParts = std::map<std::uint64_t, std::vector<unsigned>>;

std::vector<BigInt> assemble_invariants(PrimeParts pp) {
  std::size_t m = 0;
  for (auto &[p, es] : pp) {
    (void)p;
    std::sort(es.rbegin(), es.rend());
    m = std::max(m, es.size());
  }
  std::vector<BigInt> out;
  for (std::size_t j = 0; j < m; ++j) {
    BigInt d = 1;
    for (auto const &[p, es] : pp)
      if (j < es.size())
        d *= big_pow(p, es[j]);
    out.push_back(d);
  }
  // largest-first pairing above; flip to ascending divisibility order
  std::reverse(out.begin(), out.end());
  return out;
}

// For abelian g, the p^k-torsion count is |g| / |g^(p^k)|, and the power
// image is generated by generator powers; the exponent partition of the
// p-part falls out of those counts.
bool abelian_layer_counts(PermGroup const &g, PrimeParts &pp) {
  std::set<std::uint64_t> primes;
  for (Perm const &x : g.gens())
    for (auto const &[p, e] : factor_u64(x.order())) {
      (void)e;
      primes.insert(p);
    }
  for (std::uint64_t p : primes) {
    std::vector<unsigned> lam;
    unsigned fprev = 0;
    std::uint64_t pk = 1;
    for (unsigned k = 1; k <= 64; ++k) {
      if (pk > UINT64_MAX / p)
        return false;
      pk *= p;
      std::vector<Perm> pow_gens;
      for (Perm const &x : g.gens())
        pow_gens.push_back(perm_pow(x, pk));
      PermGroup s = PermGroup::from_gens(g.degree(), std::move(pow_gens));
      BigInt t = g.order() / s.order();
      unsigned fk = 0;
      while (t % p == 0) {
        t /= p;
        ++fk;
      }
      if (t != 1)
        return false;
      unsigned const ge = fk - fprev; // parts of the partition that are >= k
      if (k == 1)
        lam.assign(ge, 0u);
      if (ge == 0)
        break;
      for (unsigned i = 0; i < ge; ++i)
        lam[i] += 1u;
      fprev = fk;
    }
    for (unsigned e : lam)
      pp[p].push_back(e);
  }
  return true;
}

bool gather_abelian_parts(PermGroup const &g, PrimeParts &pp, int depth) {
  if (depth > 32)
    return false;
  if (g.is_trivial())
    return true;
  auto const &c = g.construction();
  if (c && c->kind == Construction::Kind::DirectProduct)
    return gather_abelian_parts(c->children[0], pp, depth + 1) &&
           gather_abelian_parts(c->children[1], pp, depth + 1);
  if (c && c->kind == Construction::Kind::Wreath) {
    // Commutators collapse each top orbit's base coordinates to one
    // diagonal copy, so the abelianization is bottom_ab^(#orbits) x top_ab.
    PermGroup const &bottom = c->children[0];
    PermGroup const &top = c->children[1];
    std::size_t const r = orbits(top).size();
    PrimeParts sub;
    if (!gather_abelian_parts(bottom, sub, depth + 1))
      return false;
    for (std::size_t i = 0; i < r; ++i)
      for (auto const &[p, es] : sub)
        pp[p].insert(pp[p].end(), es.begin(), es.end());
    return gather_abelian_parts(top, pp, depth + 1);
  }
  if (g.abelian())
    return abelian_layer_counts(g, pp);
  PermGroup d = derived_subgroup(g);
  if (d.order() == g.order())
    return true; // perfect
  try {
    PermGroup q = quotient(g, d, 20000);
    return gather_abelian_parts(q, pp, depth + 1);
  } catch (ResourceError const &) {
    return false;
  }
}

int derived_length_of(PermGroup const &g) {
  PermGroup cur = g;
  for (int len = 0; len <= 100; ++len) {
    if (cur.is_trivial())
      return len;
    PermGroup nxt = derived_subgroup(cur);
    if (nxt.order() == cur.order())
      return DERIVED_UNBOUNDED;
    cur = nxt;
  }
  return DERIVED_UNBOUNDED;
}

// Which exact field separates a and b, if any.
char const *separating_field(IsoFingerprint const &a, IsoFingerprint const &b) {
  if (a.order != b.order)
    return "order";
  if (a.derived_length != b.derived_length)
    return "derived length";
  if (a.abelian_known && b.abelian_known &&
      a.abelian_invariants != b.abelian_invariants)
    return "abelianization";
  if (a.exact_counts && b.exact_counts) {
    if (a.element_orders != b.element_orders)
      return "element orders";
    if (a.class_sizes != b.class_sizes)
      return "class sizes";
  }
  if (a.factors_known && b.factors_known && a.factors != b.factors)
    return "composition factors";
  return nullptr;
}

// ---- verdict memo ----

struct MemoHit {
  void const *ida;
  void const *idb;
  IsoResult res;
};

std::mutex memo_mu;
std::unordered_map<std::string, std::vector<MemoHit>> &memo_table() {
  static std::unordered_map<std::string, std::vector<MemoHit>> m;
  return m;
}

std::optional<IsoResult> memo_find(std::string const &key, void const *ida,
                                   void const *idb) {
  std::lock_guard<std::mutex> lock(memo_mu);
  auto it = memo_table().find(key);
  if (it == memo_table().end())
    return std::nullopt;
  for (MemoHit const &h : it->second)
    if (h.ida == ida && h.idb == idb)
      return h.res;
  return std::nullopt;
}

void memo_store(std::string const &key, void const *ida, void const *idb,
                IsoResult const &res) {
  std::lock_guard<std::mutex> lock(memo_mu);
  auto &bucket = memo_table()[key];
  for (MemoHit const &h : bucket)
    if (h.ida == ida && h.idb == idb)
      return;
  bucket.push_back({ida, idb, res});
}

// ---- direct products of simple groups ----

struct Chunk {
  PermGroup abs;              // the factor on its own points
  std::vector<Perm> embedded; // abs.gens() embedded in the ambient group
};

bool chunk_simple(PermGroup const &g) {
  try {
    return is_simple(g, FP_EXACT_BOUND);
  } catch (ResourceError const &) {
    return false;
  }
}

// Splits node (living at point offset off inside a degree-`ambient` group)
// into simple internal factors: product tags first, then the orbit
// decomposition when the orbit restrictions multiply back to |node|.
bool split_chunks(PermGroup const &node, unsigned off, unsigned ambient,
                  std::vector<Chunk> &out) {
  if (node.is_trivial())
    return true;
  auto const &c = node.construction();
  if (c && c->kind == Construction::Kind::DirectProduct)
    return split_chunks(c->children[0], off, ambient, out) &&
           split_chunks(c->children[1], off + c->children[0].degree(), ambient,
                        out);
  if (chunk_simple(node)) {
    Chunk ch{node, {}};
    for (Perm const &x : node.gens())
      ch.embedded.push_back(x.shifted(off, ambient));
    out.push_back(std::move(ch));
    return true;
  }
  auto orbs = orbits(node);
  orbs.erase(std::remove_if(orbs.begin(), orbs.end(),
                            [](auto const &o) { return o.size() < 2; }),
             orbs.end());
  if (orbs.size() < 2)
    return false;
  std::vector<PermGroup> restr;
  BigInt prod = 1;
  for (auto const &ob : orbs) {
    std::vector<unsigned> back(node.degree() + 1u, 0);
    for (std::size_t i = 0; i < ob.size(); ++i)
      back[ob[i]] = static_cast<unsigned>(i) + 1u;
    std::vector<Perm> rg;
    for (Perm const &x : node.gens()) {
      std::vector<unsigned> im(ob.size());
      for (std::size_t i = 0; i < ob.size(); ++i)
        im[i] = back[x[ob[i]]];
      rg.push_back(Perm(std::move(im)));
    }
    restr.push_back(PermGroup::from_gens(static_cast<unsigned>(ob.size()),
                                         std::move(rg)));
    prod *= restr.back().order();
  }
  // Equality proves the orbit constituents assemble node as a direct
  // product, so each constituent sits inside node as an internal factor.
  if (prod != node.order())
    return false;
  for (std::size_t oi = 0; oi < orbs.size(); ++oi) {
    if (!chunk_simple(restr[oi]))
      return false;
    auto const &ob = orbs[oi];
    Chunk ch{restr[oi], {}};
    for (Perm const &x : restr[oi].gens()) {
      std::vector<unsigned> im(ambient);
      for (unsigned t = 0; t < ambient; ++t)
        im[t] = t + 1u;
      for (std::size_t j = 0; j < ob.size(); ++j)
        im[off + ob[j] - 1u] = off + ob[x[static_cast<unsigned>(j) + 1u] - 1u];
      ch.embedded.push_back(Perm(std::move(im)));
    }
    out.push_back(std::move(ch));
  }
  return true;
}

std::optional<std::vector<Chunk>> decompose_semisimple(PermGroup const &g) {
  std::vector<Chunk> out;
  if (!split_chunks(g, 0, g.degree(), out) || out.empty())
    return std::nullopt;
  return out;
}

// Simple groups of equal order below 10^7 are isomorphic except at 20160,
// where the fingerprint settles it.
std::string chunk_key(Chunk const &c) {
  std::string key = big_str(c.abs.order());
  if (c.abs.order() == 20160)
    key += "#" + fingerprint(c.abs).str();
  return key;
}

std::optional<Homomorphism> backtrack_iso(PermGroup const &a,
                                          PermGroup const &b);

PermGroup fold_product(std::vector<Chunk> const &chunks) {
  PermGroup acc = chunks.back().abs;
  for (std::size_t i = chunks.size() - 1; i-- > 0;)
    acc = direct_product(chunks[i].abs, acc);
  return acc;
}

// Assumes the chunk key multisets agree. Routes a -> external model ->
// matched external model -> b through verified homomorphisms.
std::optional<Homomorphism> semisimple_iso(PermGroup const &a,
                                           std::vector<Chunk> const &ca,
                                           PermGroup const &b,
                                           std::vector<Chunk> const &cb) {
  std::map<std::string, std::vector<std::size_t>> pool;
  for (std::size_t j = 0; j < cb.size(); ++j)
    pool[chunk_key(cb[j])].push_back(j);
  std::vector<std::size_t> match(ca.size());
  for (std::size_t i = 0; i < ca.size(); ++i) {
    auto &v = pool[chunk_key(ca[i])];
    if (v.empty())
      return std::nullopt;
    match[i] = v.front();
    v.erase(v.begin());
  }

  PermGroup ea = fold_product(ca);
  PermGroup eb = fold_product(cb);
  std::vector<unsigned> offa(ca.size()), offb(cb.size());
  for (std::size_t i = 0, o = 0; i < ca.size(); ++i) {
    offa[i] = static_cast<unsigned>(o);
    o += ca[i].abs.degree();
  }
  for (std::size_t j = 0, o = 0; j < cb.size(); ++j) {
    offb[j] = static_cast<unsigned>(o);
    o += cb[j].abs.degree();
  }

  // external model onto the internal factors
  std::vector<std::pair<Perm, Perm>> epairs, fpairs, mpairs;
  for (std::size_t i = 0; i < ca.size(); ++i)
    for (std::size_t k = 0; k < ca[i].abs.gens().size(); ++k)
      epairs.emplace_back(ca[i].abs.gens()[k].shifted(offa[i], ea.degree()),
                          ca[i].embedded[k]);
  for (std::size_t j = 0; j < cb.size(); ++j)
    for (std::size_t k = 0; k < cb[j].abs.gens().size(); ++k)
      fpairs.emplace_back(cb[j].abs.gens()[k].shifted(offb[j], eb.degree()),
                          cb[j].embedded[k]);
  auto e = Homomorphism::try_build(ea, a, std::move(epairs));
  if (!e || e->image().order() != a.order())
    return std::nullopt;
  auto f = Homomorphism::try_build(eb, b, std::move(fpairs));
  if (!f || f->image().order() != b.order())
    return std::nullopt;

  for (std::size_t i = 0; i < ca.size(); ++i) {
    auto sigma = backtrack_iso(ca[i].abs, cb[match[i]].abs);
    if (!sigma)
      return std::nullopt;
    for (Perm const &g : ca[i].abs.gens())
      mpairs.emplace_back(
          g.shifted(offa[i], ea.degree()),
          sigma->apply(g).shifted(offb[match[i]], eb.degree()));
  }
  auto m = Homomorphism::try_build(ea, eb, std::move(mpairs));
  if (!m || m->image().order() != eb.order())
    return std::nullopt;
  return e->inverse_iso().then(*m).then(*f);
}

// ---- generator-image search ----

struct BtCtx {
  PermGroup const &a;
  PermGroup const &b;
  std::vector<Perm> seq;
  std::vector<BigInt> suborders;
  std::map<std::uint64_t, std::vector<Perm>> buckets;
  std::vector<Perm> first_level; // class representatives, single-find mode
  bool collect_all = false;
  std::size_t cap = 0;
  std::vector<Homomorphism> found;
};

// Remove generators lying in the span of the rest; prefix subgroup orders
// of any arrangement of the survivors then grow strictly.
std::vector<Perm> irredundant_gens(PermGroup const &a) {
  std::vector<Perm> gens = a.gens();
  for (std::size_t i = 0; i < gens.size();) {
    std::vector<Perm> rest;
    for (std::size_t j = 0; j < gens.size(); ++j)
      if (j != i)
        rest.push_back(gens[j]);
    if (PermGroup::from_gens(a.degree(), rest).order() == a.order())
      gens.erase(gens.begin() + static_cast<std::ptrdiff_t>(i));
    else
      ++i;
  }
  return gens;
}

bool bt_dfs(BtCtx &ctx, std::size_t level, std::vector<Perm> &chosen) {
  if (level == ctx.seq.size()) {
    std::vector<std::pair<Perm, Perm>> pairs;
    for (std::size_t i = 0; i < ctx.seq.size(); ++i)
      pairs.emplace_back(ctx.seq[i], chosen[i]);
    // chosen already generates all of b (prefix order checks), so a
    // well-defined map here is onto, hence an isomorphism.
    if (auto h = Homomorphism::try_build(ctx.a, ctx.b, std::move(pairs))) {
      ctx.found.push_back(std::move(*h));
      if (!ctx.collect_all)
        return true;
      if (ctx.found.size() > ctx.cap)
        throw ResourceError("isomorphism enumeration exceeded cap");
    }
    return false;
  }
  std::uint64_t const want = ctx.seq[level].order();
  std::vector<Perm> const &cands =
      (level == 0 && !ctx.collect_all && !ctx.first_level.empty())
          ? ctx.first_level
          : ctx.buckets[want];
  for (Perm const &cand : cands) {
    if (level == 0 && !ctx.collect_all && cand.order() != want)
      continue;
    chosen.push_back(cand);
    if (PermGroup::from_gens(ctx.b.degree(), chosen).order() ==
        ctx.suborders[level]) {
      if (bt_dfs(ctx, level + 1, chosen))
        return true;
    }
    chosen.pop_back();
  }
  return false;
}

void bt_prepare(BtCtx &ctx) {
  BigInt const n = ctx.a.order();
  if (!fits_u64(n) || to_u64(n) > ISO_BACKTRACK_BOUND ||
      n * ctx.b.degree() > (BigInt(1) << 26))
    throw ResourceError("group too large for generator-image search");
  for (Perm const &x : ctx.b.elements(ISO_BACKTRACK_BOUND))
    ctx.buckets[x.order()].push_back(x);
  for (auto &[o, v] : ctx.buckets) {
    (void)o;
    std::sort(v.begin(), v.end());
  }
  ctx.seq = irredundant_gens(ctx.a);
  std::sort(ctx.seq.begin(), ctx.seq.end(),
            [&](Perm const &x, Perm const &y) {
              auto sx = ctx.buckets[x.order()].size();
              auto sy = ctx.buckets[y.order()].size();
              return sx != sy ? sx < sy : x < y;
            });
  std::vector<Perm> prefix;
  for (Perm const &g : ctx.seq) {
    prefix.push_back(g);
    ctx.suborders.push_back(
        PermGroup::from_gens(ctx.a.degree(), prefix).order());
  }
  if (!ctx.collect_all && !ctx.seq.empty()) {
    // images of the first generator only matter up to conjugacy in b
    for (auto const &[rep, size] : ctx.b.conjugacy_classes(ISO_BACKTRACK_BOUND)) {
      (void)size;
      if (rep.order() == ctx.seq[0].order())
        ctx.first_level.push_back(rep);
    }
    std::sort(ctx.first_level.begin(), ctx.first_level.end());
  }
}

std::optional<Homomorphism> backtrack_iso(PermGroup const &a,
                                          PermGroup const &b) {
  BtCtx ctx{a, b, {}, {}, {}, {}, false, 0, {}};
  bt_prepare(ctx);
  std::vector<Perm> chosen;
  bt_dfs(ctx, 0, chosen);
  if (ctx.found.empty())
    return std::nullopt;
  return std::move(ctx.found.front());
}

std::vector<Homomorphism> backtrack_all(PermGroup const &a, PermGroup const &b,
                                        std::size_t cap) {
  BtCtx ctx{a, b, {}, {}, {}, {}, true, cap, {}};
  bt_prepare(ctx);
  std::vector<Perm> chosen;
  bt_dfs(ctx, 0, chosen);
  return std::move(ctx.found);
}

} // namespace

std::string IsoFingerprint::str() const {
  std::ostringstream os;
  os << "fp/1|o=" << big_str(order) << "|dl=";
  if (derived_length == DERIVED_UNBOUNDED)
    os << "inf";
  else
    os << derived_length;
  os << "|ab=";
  if (!abelian_known)
    os << "?";
  else
    for (std::size_t i = 0; i < abelian_invariants.size(); ++i)
      os << (i ? "," : "") << big_str(abelian_invariants[i]);
  os << "|eo=";
  if (!exact_counts)
    os << "~";
  else {
    bool first = true;
    for (auto const &[o, n] : element_orders) {
      os << (first ? "" : ",") << o << ":" << n;
      first = false;
    }
  }
  os << "|cs=";
  if (!exact_counts)
    os << "~";
  else
    for (std::size_t i = 0; i < class_sizes.size(); ++i)
      os << (i ? "," : "") << class_sizes[i];
  os << "|cf=";
  if (!factors_known)
    os << "?";
  else
    for (std::size_t i = 0; i < factors.size(); ++i)
      os << (i ? "," : "") << factors[i];
  return os.str();
}

IsoFingerprint fingerprint(PermGroup const &g) {
  if (auto cached = g.cache_get(CACHE_FINGERPRINT))
    return *std::static_pointer_cast<IsoFingerprint>(cached);
  IsoFingerprint fp;
  fp.order = g.order();
  bool const small = fits_u64(fp.order) && to_u64(fp.order) <= FP_EXACT_BOUND &&
                     fp.order * g.degree() <= (BigInt(1) << 26);
  if (small) {
    for (Perm const &x : g.elements(FP_EXACT_BOUND))
      ++fp.element_orders[x.order()];
    for (auto const &[rep, size] : g.conjugacy_classes(FP_EXACT_BOUND)) {
      (void)rep;
      fp.class_sizes.push_back(size);
    }
    std::sort(fp.class_sizes.begin(), fp.class_sizes.end());
    fp.exact_counts = true;
  } else {
    std::uint64_t state = DEFAULT_SEED ^ (0x5bull * g.degree());
    for (int i = 0; i < 48; ++i)
      ++fp.element_orders[g.random_element(state).order()];
    fp.exact_counts = false;
  }
  fp.derived_length = derived_length_of(g);
  PrimeParts pp;
  fp.abelian_known = gather_abelian_parts(g, pp, 0);
  if (fp.abelian_known)
    fp.abelian_invariants = assemble_invariants(std::move(pp));
  g.cache_put(CACHE_FINGERPRINT, std::make_shared<IsoFingerprint>(fp));
  return fp;
}

bool fingerprints_separate(IsoFingerprint const &a, IsoFingerprint const &b) {
  return separating_field(a, b) != nullptr;
}

IsoResult is_isomorphic(PermGroup const &a, PermGroup const &b) {
  if (a.order() != b.order())
    return {IsoResult::Verdict::Distinct, std::nullopt, "orders differ"};
  if (a.degree() == b.degree() && a.same_group(b)) {
    std::vector<std::pair<Perm, Perm>> pairs;
    for (Perm const &g : a.gens())
      pairs.emplace_back(g, g);
    return {IsoResult::Verdict::Isomorphic,
            Homomorphism::build(a, b, std::move(pairs)), "equal groups"};
  }
  IsoFingerprint const fa = fingerprint(a);
  IsoFingerprint const fb = fingerprint(b);
  if (char const *field = separating_field(fa, fb))
    return {IsoResult::Verdict::Distinct, std::nullopt,
            std::string("fingerprints differ: ") + field};
  std::string const key = fa.str() + "||" + fb.str();
  if (auto hit = memo_find(key, a.id(), b.id()))
    return *hit;

  IsoResult res{IsoResult::Verdict::Undecided, std::nullopt,
                "bounds exhausted"};
  bool done = false;

  auto da = decompose_semisimple(a);
  auto db = decompose_semisimple(b);
  if (da && db) {
    std::vector<std::string> ka, kb;
    for (Chunk const &c : *da)
      ka.push_back(chunk_key(c));
    for (Chunk const &c : *db)
      kb.push_back(chunk_key(c));
    std::sort(ka.begin(), ka.end());
    std::sort(kb.begin(), kb.end());
    if (ka != kb) {
      res = {IsoResult::Verdict::Distinct, std::nullopt,
             "simple factor multisets differ"};
      done = true;
    } else {
      try {
        if (auto h = semisimple_iso(a, *da, b, *db)) {
          res = {IsoResult::Verdict::Isomorphic, std::move(h),
                 "matched simple factors"};
          done = true;
        }
      } catch (ResourceError const &) {
      } catch (InputError const &) {
      }
    }
  }

  if (!done && fits_u64(a.order()) &&
      to_u64(a.order()) <= ISO_BACKTRACK_BOUND) {
    try {
      if (auto h = backtrack_iso(a, b))
        res = {IsoResult::Verdict::Isomorphic, std::move(h),
               "generator image search"};
      else
        res = {IsoResult::Verdict::Distinct, std::nullopt,
               "no generator image assignment works"};
      done = true;
    } catch (ResourceError const &) {
    }
  }

  if (!done) {
    // Last resort for large structured groups: an isomorphism maps normal
    // subgroups onto normal subgroups, preserving order. Only complete
    // lattices give evidence; equal multisets prove nothing.
    try {
      NormalLattice la = normal_subgroups(a);
      NormalLattice lb = normal_subgroups(b);
      if (la.complete && lb.complete) {
        auto orders_of = [](NormalLattice const &l) {
          std::vector<std::string> v;
          for (PermGroup const &n : l.nodes)
            v.push_back(big_str(n.order()));
          std::sort(v.begin(), v.end());
          return v;
        };
        if (orders_of(la) != orders_of(lb)) {
          res = {IsoResult::Verdict::Distinct, std::nullopt,
                 "normal subgroup orders differ"};
          done = true;
        }
      }
    } catch (ResourceError const &) {
    }
  }

  memo_store(key, a.id(), b.id(), res);
  return res;
}

std::vector<Homomorphism> all_isomorphisms(PermGroup const &a,
                                           PermGroup const &b,
                                           std::size_t cap) {
  if (a.order() != b.order())
    return {};
  if (fingerprints_separate(fingerprint(a), fingerprint(b)))
    return {};
  return backtrack_all(a, b, cap);
}

} // namespace compatkit
