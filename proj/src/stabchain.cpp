#include "compatkit/stabchain.hpp"

#include "compatkit/errors.hpp"

#include <algorithm>
#include <cassert>

namespace compatkit {

namespace {

// Full transversals are cached while orbit * degree stays below this; beyond
// it, transversal elements are rebuilt by walking the Schreier tree.
constexpr std::uint64_t TRANS_CACHE_CAP = 1ull << 24;

} // namespace

StabChain StabChain::build(unsigned degree, std::vector<Perm> const &gens,
                           BigInt const *known_order,
                           std::vector<unsigned> const *base_hint,
                           std::uint64_t seed, bool fixed_prefix)
{
  StabChain c;
  c.degree_ = degree;
  c.walk_mu_ = std::make_unique<std::mutex>();

  if (fixed_prefix) {
    if (base_hint == nullptr)
      throw std::logic_error("fixed_prefix needs a base hint");
    for (unsigned beta : *base_hint)
      c.push_level(beta);
  }

  for (auto const &g : gens) {
    if (g.degree() != degree)
      throw InputError("generator degree mismatch");
    c.insert(g, base_hint);
  }

  if (known_order != nullptr && c.order_ != *known_order) {
    // Randomized fill: product-replacement words, sifted in.
    std::vector<Perm> pool;
    for (auto const &g : gens)
      if (!g.id())
        pool.push_back(g);
    if (!pool.empty()) {
      std::size_t const distinct = pool.size();
      while (pool.size() < 8u)
        pool.push_back(pool[pool.size() % distinct]);
      std::uint64_t state = seed;
      for (auto const &g : gens) {
        state ^= g.hash();
        (void)splitmix64(state);
      }
      Perm acc(degree);
      unsigned stall = 0;
      while (c.order_ != *known_order && stall < 256u) {
        std::size_t i = splitmix64(state) % pool.size();
        std::size_t j = splitmix64(state) % pool.size();
        if (i != j)
          pool[i] = (splitmix64(state) & 1u) ? pool[i] * pool[j]
                                             : pool[j] * pool[i];
        acc = acc * pool[i];
        if (c.insert(acc, base_hint))
          stall = 0;
        else
          ++stall;
      }
    }
  }

  if (known_order == nullptr || c.order_ != *known_order)
    c.sweep(base_hint, known_order);

  if (known_order != nullptr && c.order_ != *known_order)
    throw std::logic_error("stabilizer chain order " + c.order_.str() +
                           " contradicts declared order " +
                           known_order->str());
  return c;
}

void StabChain::recompute_order()
{
  order_ = 1;
  for (auto const &lvl : levels_)
    order_ *= static_cast<std::uint64_t>(lvl.orbit.size());
}

void StabChain::extend_orbit(std::size_t li, std::size_t first_new_gen)
{
  Level &lvl = levels_[li];

  // Old orbit points only need the new generators applied; points added
  // below get the full generator list.
  std::size_t const old_size = lvl.orbit.size();

  auto push = [&](unsigned p, unsigned q, unsigned id) {
    lvl.orbit.push_back(q);
    lvl.pos[q] = static_cast<unsigned>(lvl.orbit.size());
    lvl.via.emplace_back(p, id);
    if (lvl.cache_trans) {
      if (static_cast<std::uint64_t>(lvl.orbit.size()) * degree_ >
          TRANS_CACHE_CAP) {
        lvl.cache_trans = false;
        lvl.trans.clear();
      } else {
        lvl.trans.push_back(lvl.trans[lvl.pos[p] - 1u] * sgens_[id]);
      }
    }
  };

  for (std::size_t k = 0; k < old_size; ++k) {
    unsigned p = lvl.orbit[k];
    for (std::size_t gi = first_new_gen; gi < lvl.gen_ids.size(); ++gi) {
      unsigned const id = lvl.gen_ids[gi];
      unsigned q = sgens_[id][p];
      if (lvl.pos[q] == 0u)
        push(p, q, id);
    }
  }
  for (std::size_t k = old_size; k < lvl.orbit.size(); ++k) {
    unsigned p = lvl.orbit[k];
    for (std::size_t gi = 0; gi < lvl.gen_ids.size(); ++gi) {
      unsigned const id = lvl.gen_ids[gi];
      unsigned q = sgens_[id][p];
      if (lvl.pos[q] == 0u)
        push(p, q, id);
    }
  }
  lvl.umemo.clear();
}

void StabChain::push_level(unsigned beta)
{
  assert(beta != 0u && beta <= degree_);
  Level lvl;
  lvl.beta = beta;
  lvl.pos.assign(degree_ + 1u, 0u);
  lvl.orbit.push_back(beta);
  lvl.pos[beta] = 1u;
  lvl.via.emplace_back(beta, 0u);
  lvl.cache_trans = degree_ <= 4096u;
  if (lvl.cache_trans)
    lvl.trans.push_back(Perm(degree_));
  levels_.push_back(std::move(lvl));
}

void StabChain::add_strong_gen(std::size_t last, Perm const &g,
                               std::vector<unsigned> const *base_hint)
{
  if (last == levels_.size()) {
    unsigned beta = 0;
    if (base_hint != nullptr) {
      for (unsigned cand : *base_hint) {
        if (g[cand] != cand) {
          beta = cand;
          break;
        }
      }
    }
    if (beta == 0u)
      beta = g.smallest_moved_point();
    assert(beta != 0u);
    push_level(beta);
  }

  unsigned const id = static_cast<unsigned>(sgens_.size());
  sgens_.push_back(g);
  for (std::size_t l = 0; l <= last; ++l) {
    levels_[l].gen_ids.push_back(id);
    extend_orbit(l, levels_[l].gen_ids.size() - 1u);
  }
  recompute_order();
}

bool StabChain::insert(Perm const &g, std::vector<unsigned> const *base_hint)
{
  auto [r, j] = strip(g);
  if (r.id())
    return false;
  add_strong_gen(j, r, base_hint);
  return true;
}

// Classic bottom-up Schreier generator sweep. Levels deeper than i are
// complete when we test level i; a failed sift extends the chain and resumes
// from the deepest modified level.
void StabChain::sweep(std::vector<unsigned> const *base_hint,
                      BigInt const *target)
{
  if (levels_.empty())
    return;

  std::size_t i = levels_.size() - 1u;
  for (;;) {
    bool dirty = false;
    // Orbits and gens can grow while we scan; index loops re-read sizes.
    for (std::size_t oi = 0; oi < levels_[i].orbit.size() && !dirty; ++oi) {
      for (std::size_t gi = 0; gi < levels_[i].gen_ids.size() && !dirty;
           ++gi) {
        unsigned p = levels_[i].orbit[oi];
        Perm const &s = sgens_[levels_[i].gen_ids[gi]];
        Perm schreier =
            transversal(i, p) * s * transversal(i, s[p]).inverse();
        if (schreier.id())
          continue;
        auto [r, j] = strip(schreier, i + 1u);
        if (r.id())
          continue;
        add_strong_gen(j, r, base_hint);
        if (target != nullptr && order_ == *target)
          return;
        i = j;
        dirty = true;
      }
    }
    if (dirty)
      continue;
    if (i == 0u)
      break;
    --i;
  }
}

std::pair<Perm, std::size_t> StabChain::strip(Perm const &p,
                                              std::size_t from) const
{
  Perm h = p;
  for (std::size_t i = from; i < levels_.size(); ++i) {
    unsigned gamma = h[levels_[i].beta];
    if (levels_[i].pos[gamma] == 0u)
      return {h, i};
    h *= transversal(i, gamma).inverse();
  }
  return {h, levels_.size()};
}

Perm StabChain::sift(Perm const &p) const { return strip(p).first; }

bool StabChain::contains(Perm const &p) const
{
  if (p.degree() != degree_)
    return false;
  return sift(p).id();
}

Perm StabChain::transversal(std::size_t li, unsigned pt) const
{
  Level const &lvl = levels_[li];
  unsigned idx = lvl.pos[pt];
  if (idx == 0u)
    throw InputError("point not in fundamental orbit");
  if (lvl.cache_trans)
    return lvl.trans[idx - 1u];

  std::unique_lock<std::mutex> lock;
  if (walk_mu_ != nullptr)
    lock = std::unique_lock<std::mutex>(*walk_mu_);

  if (auto it = lvl.umemo.find(pt); it != lvl.umemo.end())
    return it->second;

  // Walk to the root collecting edges, then multiply root-to-pt.
  std::vector<unsigned> path; // generator ids, pt-side first
  unsigned cur = pt;
  while (cur != lvl.beta) {
    if (auto it = lvl.umemo.find(cur); it != lvl.umemo.end())
      break;
    auto [par, id] = lvl.via[lvl.pos[cur] - 1u];
    path.push_back(id);
    cur = par;
  }

  Perm u(degree_);
  if (cur != lvl.beta)
    u = lvl.umemo.at(cur);
  std::uint64_t memo_cap =
      std::max<std::uint64_t>(8u, TRANS_CACHE_CAP / degree_ / 32u);
  for (auto it = path.rbegin(); it != path.rend(); ++it) {
    u *= sgens_[*it];
    cur = sgens_[*it][cur];
    if (lvl.umemo.size() < memo_cap)
      lvl.umemo.emplace(cur, u);
  }
  return u;
}

std::vector<unsigned> StabChain::base() const
{
  std::vector<unsigned> b;
  for (auto const &lvl : levels_)
    b.push_back(lvl.beta);
  return b;
}

std::vector<Perm> StabChain::strong_gens() const { return sgens_; }

std::vector<Perm> StabChain::level_gens(std::size_t i) const
{
  std::vector<Perm> out;
  out.reserve(levels_[i].gen_ids.size());
  for (unsigned id : levels_[i].gen_ids)
    out.push_back(sgens_[id]);
  return out;
}

std::vector<Perm> StabChain::elements(std::uint64_t cap) const
{
  if (order_ > cap)
    throw ResourceError("group too large to enumerate (order " +
                        order_.str() + ", cap " + std::to_string(cap) + ")");

  std::vector<Perm> out;
  out.reserve(static_cast<std::size_t>(to_u64(order_)));

  // element = u_{k-1} * ... * u_0; recursion depth == number of levels.
  auto rec = [&](auto &&self, std::size_t level, Perm const &prefix) -> void {
    if (level == 0u) {
      out.push_back(prefix);
      return;
    }
    std::size_t li = level - 1u;
    for (unsigned pt : levels_[li].orbit)
      self(self, li, prefix * transversal(li, pt));
  };
  rec(rec, levels_.size(), Perm(degree_));
  return out;
}

Perm StabChain::random_element(std::uint64_t &state) const
{
  Perm g(degree_);
  for (std::size_t li = levels_.size(); li-- > 0;) {
    auto const &orbit = levels_[li].orbit;
    unsigned pt = orbit[splitmix64(state) % orbit.size()];
    g *= transversal(li, pt);
  }
  return g;
}

} // namespace compatkit
