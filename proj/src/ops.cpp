#include "compatkit/ops.hpp"

#include "compatkit/errors.hpp"

#include <sstream>
#include <unordered_map>

namespace compatkit {

namespace {

Perm upper_part(Perm const &g, unsigned off, unsigned d) {
  std::vector<unsigned> im(d);
  for (unsigned j = 1; j <= d; ++j)
    im[j - 1u] = g[off + j] - off;
  return Perm(std::move(im));
}

// First d images of g, regardless of what g does past d.  Only valid for
// elements that map the initial block to itself.
Perm lower_part(Perm const &g, unsigned d) {
  std::vector<unsigned> im(d);
  for (unsigned i = 1; i <= d; ++i)
    im[i - 1u] = g[i];
  return Perm(std::move(im));
}

Perm graph_pair(Perm const &x, Perm const &y) {
  unsigned const dx = x.degree();
  unsigned const dy = y.degree();
  std::vector<unsigned> im(dx + dy);
  for (unsigned i = 1; i <= dx; ++i)
    im[i - 1u] = x[i];
  for (unsigned j = 1; j <= dy; ++j)
    im[dx + j - 1u] = dx + y[j];
  return Perm(std::move(im));
}

std::string gens_list(std::vector<Perm> const &gens) {
  std::ostringstream out;
  out << "[";
  for (std::size_t i = 0; i < gens.size(); ++i) {
    if (i > 0)
      out << ", ";
    out << gens[i].str();
  }
  out << "]";
  return out.str();
}

struct CosetTable {
  std::vector<Perm> reps;   // canonical representatives, index order
  std::vector<Perm> action; // one permutation of the cosets per actor
};

// Orbit of the coset sub*1 under right multiplication by the actors. Cosets
// are keyed by a canonical representative: descending sub's chain, greedily
// minimize the image of the level's orbit, which pins down one element of
// the coset.
CosetTable coset_bfs(PermGroup const &sub, std::vector<Perm> const &actors,
                     std::uint64_t cap) {
  StabChain const &hc = sub.chain();
  unsigned const deg = sub.degree();

  auto canon = [&](Perm x) {
    for (std::size_t i = 0; i < hc.num_levels(); ++i) {
      auto const &lvl = hc.level(i);
      unsigned best_p = lvl.orbit[0];
      unsigned best_v = x[best_p];
      for (unsigned p : lvl.orbit) {
        unsigned const v = x[p];
        if (v < best_v) {
          best_v = v;
          best_p = p;
        }
      }
      if (best_p != lvl.beta)
        x = hc.transversal(i, best_p) * x;
    }
    return x;
  };

  std::unordered_map<Perm, unsigned, PermHash> index;
  std::vector<Perm> reps;
  reps.push_back(canon(Perm(deg)));
  index.emplace(reps[0], 0u);

  std::vector<std::vector<unsigned>> nb(actors.size());
  for (std::size_t head = 0; head < reps.size(); ++head) {
    for (std::size_t gi = 0; gi < actors.size(); ++gi) {
      Perm c = canon(reps[head] * actors[gi]);
      auto [it, fresh] = index.emplace(std::move(c), static_cast<unsigned>(reps.size()));
      if (fresh) {
        reps.push_back(it->first);
        if (reps.size() > cap)
          throw ResourceError("coset enumeration passed " +
                              std::to_string(cap) + " cosets");
      }
      nb[gi].push_back(it->second + 1u);
    }
  }

  CosetTable t;
  t.reps = std::move(reps);
  for (std::size_t gi = 0; gi < actors.size(); ++gi)
    t.action.emplace_back(std::move(nb[gi]));
  return t;
}

} // namespace

PermGroup direct_product(PermGroup const &a, PermGroup const &b) {
  unsigned const da = a.degree();
  unsigned const deg = da + b.degree();
  std::vector<Perm> gens;
  for (Perm const &g : a.gens())
    gens.push_back(g.extended(deg));
  for (Perm const &g : b.gens())
    gens.push_back(g.shifted(da, deg));
  BigInt const ord = a.order() * b.order();
  PermGroup p = PermGroup::from_gens(deg, std::move(gens), &ord);
  return p.with_construction(
      Construction{Construction::Kind::DirectProduct, {a, b}},
      "DP(" + a.expr() + ", " + b.expr() + ")");
}

Homomorphism dp_projection(PermGroup const &g, int side) {
  auto const &c = g.construction();
  if (!c || c->kind != Construction::Kind::DirectProduct)
    throw InputError("projection needs a direct product");
  unsigned const da = c->children[0].degree();
  unsigned const db = c->children[1].degree();
  std::vector<std::pair<Perm, Perm>> pairs;
  for (Perm const &x : g.gens())
    pairs.emplace_back(x, side == 0 ? lower_part(x, da)
                                    : upper_part(x, da, db));
  return Homomorphism::build(g, c->children[side == 0 ? 0 : 1],
                             std::move(pairs));
}

PermGroup wreath_product(PermGroup const &bottom, PermGroup const &top) {
  unsigned const m = bottom.degree();
  unsigned const n = top.degree();
  unsigned const deg = m * n;

  // One bottom copy per orbit representative of top; the block lifts
  // conjugate them across the orbit, so together they generate the full
  // base. With a transitive top this is just the first block.
  std::vector<unsigned> block_rep;
  {
    std::vector<char> seen(n + 1u, 0);
    for (unsigned b = 1; b <= n; ++b) {
      if (seen[b])
        continue;
      block_rep.push_back(b);
      std::vector<unsigned> queue{b};
      seen[b] = 1;
      for (std::size_t head = 0; head < queue.size(); ++head)
        for (Perm const &t : top.gens()) {
          unsigned const q = t[queue[head]];
          if (!seen[q]) {
            seen[q] = 1;
            queue.push_back(q);
          }
        }
    }
  }

  std::vector<Perm> gens;
  for (unsigned b : block_rep)
    for (Perm const &g : bottom.gens())
      gens.push_back(g.shifted((b - 1u) * m, deg));
  for (Perm const &t : top.gens()) {
    std::vector<unsigned> im(deg);
    for (unsigned b = 1; b <= n; ++b)
      for (unsigned j = 1; j <= m; ++j)
        im[(b - 1u) * m + j - 1u] = (t[b] - 1u) * m + j;
    gens.emplace_back(std::move(im));
  }

  BigInt const ord = big_pow(bottom.order(), n) * top.order();
  PermGroup w = PermGroup::from_gens(deg, std::move(gens), &ord);
  std::ostringstream expr;
  expr << "Wr(" << bottom.expr() << ", " << top.expr() << "@" << n << ")";
  return w.with_construction(
      Construction{Construction::Kind::Wreath, {bottom, top}}, expr.str());
}

PermGroup wreath_base(PermGroup const &w) {
  auto const &c = w.construction();
  if (!c || c->kind != Construction::Kind::Wreath)
    throw InputError("not a wreath product");
  if (auto cached = w.cache_get(CACHE_WREATH_BASE))
    return *std::static_pointer_cast<PermGroup>(cached);
  PermGroup const &a = c->children[0];
  unsigned const n = c->children[1].degree();
  PermGroup base = a;
  for (unsigned i = 1; i < n; ++i)
    base = direct_product(a, base);
  w.cache_put(CACHE_WREATH_BASE, std::make_shared<PermGroup>(base));
  return base;
}

Homomorphism wreath_top_map(PermGroup const &w) {
  auto const &c = w.construction();
  if (!c || c->kind != Construction::Kind::Wreath)
    throw InputError("not a wreath product");
  unsigned const m = c->children[0].degree();
  unsigned const n = c->children[1].degree();
  std::vector<std::pair<Perm, Perm>> pairs;
  for (Perm const &g : w.gens()) {
    std::vector<unsigned> im(n);
    for (unsigned b = 1; b <= n; ++b)
      im[b - 1u] = (g[(b - 1u) * m + 1u] - 1u) / m + 1u;
    pairs.emplace_back(g, Perm(std::move(im)));
  }
  return Homomorphism::build(w, c->children[1], std::move(pairs));
}

std::vector<std::vector<unsigned>> orbits(PermGroup const &g) {
  std::vector<char> seen(g.degree() + 1u, 0);
  std::vector<std::vector<unsigned>> out;
  for (unsigned s = 1; s <= g.degree(); ++s) {
    if (seen[s])
      continue;
    std::vector<unsigned> orb{s};
    seen[s] = 1;
    for (std::size_t i = 0; i < orb.size(); ++i)
      for (Perm const &x : g.gens()) {
        unsigned const y = x[orb[i]];
        if (!seen[y]) {
          seen[y] = 1;
          orb.push_back(y);
        }
      }
    std::sort(orb.begin(), orb.end());
    out.push_back(std::move(orb));
  }
  return out;
}

namespace {

bool is_prime_u64(std::uint64_t n) {
  if (n < 2)
    return false;
  // Any prime divisor of a permutation group's order is at most the degree,
  // so trial division never runs far here.
  for (std::uint64_t p = 2; p <= n / p; ++p)
    if (n % p == 0)
      return false;
  return true;
}

} // namespace

bool is_simple(PermGroup const &g, std::uint64_t cap) {
  if (g.is_trivial())
    return false;
  BigInt const o = g.order();
  if (fits_u64(o) && is_prime_u64(to_u64(o)))
    return true;
  if (g.abelian())
    return false;
  if (!fits_u64(o) || to_u64(o) > cap)
    throw ResourceError("group too large for a simplicity check");
  for (auto const &[rep, size] : g.conjugacy_classes(cap)) {
    (void)size;
    if (rep.id())
      continue;
    PermGroup cl = normal_closure(g, PermGroup::from_gens(g.degree(), {rep}));
    if (cl.order() != o)
      return false;
  }
  return true;
}

PermGroup normal_closure(PermGroup const &g, PermGroup const &h) {
  if (!h.subgroup_of(g))
    throw InputError("closure argument is not a subgroup");
  std::vector<Perm> gens = h.gens();
  PermGroup k = h;
  std::vector<Perm> frontier = h.gens();
  while (!frontier.empty()) {
    std::vector<Perm> next;
    for (Perm const &cg : g.gens())
      for (Perm const &x : frontier) {
        Perm c = x.conjugated_by(cg);
        if (!k.contains(c)) {
          bool pending = false;
          for (Perm const &p : next)
            if (p == c) {
              pending = true;
              break;
            }
          if (!pending)
            next.push_back(std::move(c));
        }
      }
    if (next.empty())
      break;
    gens.insert(gens.end(), next.begin(), next.end());
    k = PermGroup::from_gens(g.degree(), gens);
    frontier = std::move(next);
  }
  return k;
}

std::pair<bool, unsigned> is_subnormal(PermGroup const &g,
                                       PermGroup const &h) {
  if (!h.subgroup_of(g))
    return {false, 0};
  PermGroup cur = g;
  unsigned defect = 0;
  while (!cur.same_group(h)) {
    PermGroup nc = normal_closure(cur, h);
    if (nc.order() == cur.order())
      return {false, 0};
    cur = std::move(nc);
    ++defect;
  }
  return {true, defect};
}

PermGroup join(PermGroup const &a, PermGroup const &b) {
  if (a.degree() != b.degree())
    throw InputError("join needs matching degrees");
  std::vector<Perm> gens = a.gens();
  for (Perm const &g : b.gens())
    gens.push_back(g);
  return PermGroup::from_gens(a.degree(), std::move(gens));
}

PermGroup intersection(PermGroup const &a, PermGroup const &b,
                       std::uint64_t coset_cap) {
  if (a.degree() != b.degree())
    throw InputError("intersection needs matching degrees");
  if (a.subgroup_of(b))
    return a;
  if (b.subgroup_of(a))
    return b;

  unsigned const da = a.degree();
  CosetTable tbl = coset_bfs(b, a.gens(), coset_cap);
  unsigned const n = static_cast<unsigned>(tbl.reps.size());

  // The stabilizer of coset 1 in a's action is exactly a meet b; pull it
  // out of the graph chain of the action, whose first base point is the
  // coset-1 point.
  std::vector<Perm> ggens;
  for (std::size_t i = 0; i < a.gens().size(); ++i)
    ggens.push_back(graph_pair(a.gens()[i], tbl.action[i]));
  std::vector<unsigned> hint{da + 1u};
  StabChain chain = StabChain::build(da + n, ggens, &a.order(), &hint,
                                     DEFAULT_SEED, true);

  std::vector<Perm> igens;
  if (chain.num_levels() > 1)
    for (Perm const &g : chain.level_gens(1))
      igens.push_back(lower_part(g, da));
  BigInt const iord = a.order() / n;
  return PermGroup::from_gens(da, std::move(igens), &iord);
}

PermGroup derived_subgroup(PermGroup const &g) {
  if (auto cached = g.cache_get(CACHE_DERIVED))
    return *std::static_pointer_cast<PermGroup>(cached);
  PermGroup result = [&] {
    auto const &c = g.construction();
    if (c && c->kind == Construction::Kind::DirectProduct)
      return direct_product(derived_subgroup(c->children[0]),
                            derived_subgroup(c->children[1]));
    auto const &gs = g.gens();
    std::vector<Perm> comms;
    for (std::size_t i = 0; i < gs.size(); ++i)
      for (std::size_t j = i + 1; j < gs.size(); ++j) {
        Perm c2 = gs[i].commutator_with(gs[j]);
        if (!c2.id())
          comms.push_back(std::move(c2));
      }
    return normal_closure(g, PermGroup::from_gens(g.degree(), comms));
  }();
  g.cache_put(CACHE_DERIVED, std::make_shared<PermGroup>(result));
  return result;
}

bool is_perfect(PermGroup const &g) {
  return derived_subgroup(g).order() == g.order();
}

bool is_solvable(PermGroup const &g) {
  auto const &c = g.construction();
  if (c && c->kind == Construction::Kind::DirectProduct)
    return is_solvable(c->children[0]) && is_solvable(c->children[1]);
  if (c && c->kind == Construction::Kind::Wreath)
    return is_solvable(c->children[0]) && is_solvable(c->children[1]);
  PermGroup cur = g;
  for (;;) {
    if (cur.is_trivial())
      return true;
    PermGroup d = derived_subgroup(cur);
    if (d.order() == cur.order())
      return false;
    cur = std::move(d);
  }
}

bool is_nilpotent(PermGroup const &g) {
  auto const &c = g.construction();
  if (c && c->kind == Construction::Kind::DirectProduct)
    return is_nilpotent(c->children[0]) && is_nilpotent(c->children[1]);
  if (!is_solvable(g))
    return false;
  PermGroup cur = derived_subgroup(g);
  for (;;) {
    if (cur.is_trivial())
      return true;
    std::vector<Perm> comms;
    for (Perm const &x : cur.gens())
      for (Perm const &y : g.gens()) {
        Perm c2 = x.commutator_with(y);
        if (!c2.id())
          comms.push_back(std::move(c2));
      }
    PermGroup next =
        normal_closure(g, PermGroup::from_gens(g.degree(), comms));
    if (next.order() == cur.order())
      return false;
    cur = std::move(next);
  }
}

PermGroup center(PermGroup const &g, std::uint64_t cap) {
  auto const &c = g.construction();
  if (c && c->kind == Construction::Kind::DirectProduct) {
    return direct_product(center(c->children[0], cap),
                          center(c->children[1], cap));
  }
  if (c && c->kind == Construction::Kind::Wreath) {
    PermGroup const &a = c->children[0];
    PermGroup const &t = c->children[1];
    unsigned const m = a.degree();
    unsigned const n = t.degree();
    unsigned const deg = g.degree();
    if (a.is_trivial()) {
      // The wreath is just the block action of top.
      PermGroup zt = center(t, cap);
      std::vector<Perm> lifts;
      for (Perm const &z : zt.gens()) {
        std::vector<unsigned> im(deg);
        for (unsigned b = 1; b <= n; ++b)
          for (unsigned j = 1; j <= m; ++j)
            im[(b - 1u) * m + j - 1u] = (z[b] - 1u) * m + j;
        lifts.emplace_back(std::move(im));
      }
      return PermGroup::from_gens(deg, std::move(lifts), &zt.order());
    }
    if (t.is_trivial()) {
      // Base only: the center is the product of the coordinate centers.
      PermGroup za = center(a, cap);
      std::vector<Perm> gens;
      for (unsigned b = 1; b <= n; ++b)
        for (Perm const &z : za.gens())
          gens.push_back(z.shifted((b - 1u) * m, deg));
      BigInt const ord = big_pow(za.order(), n);
      return PermGroup::from_gens(deg, std::move(gens), &ord);
    }
    if (n >= 2 && t.transitive()) {
      // Central elements have no block part and constant diagonal value:
      // the center is the diagonal copy of the bottom group's center.
      PermGroup za = center(a, cap);
      std::vector<Perm> diags;
      for (Perm const &z : za.gens()) {
        std::vector<unsigned> im(deg);
        for (unsigned b = 1; b <= n; ++b)
          for (unsigned j = 1; j <= m; ++j)
            im[(b - 1u) * m + j - 1u] = (b - 1u) * m + z[j];
        diags.emplace_back(std::move(im));
      }
      return PermGroup::from_gens(deg, std::move(diags), &za.order());
    }
  }
  if (g.order() > cap)
    throw ResourceError("center needs element enumeration (order " +
                        big_str(g.order()) + ", cap " + std::to_string(cap) +
                        ")");
  auto const &classes = g.conjugacy_classes(cap);
  std::vector<Perm> zgens;
  BigInt zorder = 0;
  for (auto const &[rep, size] : classes)
    if (size == 1u) {
      zorder += 1;
      if (!rep.id())
        zgens.push_back(rep);
    }
  return PermGroup::from_gens(g.degree(), std::move(zgens), &zorder);
}

Homomorphism coset_action(PermGroup const &g, PermGroup const &h,
                          std::uint64_t max_cosets) {
  if (!h.subgroup_of(g))
    throw InputError("coset action needs a subgroup");
  CosetTable tbl = coset_bfs(h, g.gens(), max_cosets);
  unsigned const n = static_cast<unsigned>(tbl.reps.size());
  PermGroup image = PermGroup::from_gens(n, tbl.action);
  image = image.with_construction(
      Construction{Construction::Kind::CosetImage, {g, h}},
      "CosetAct(" + g.expr() + ", " + gens_list(h.gens()) + ")");
  std::vector<std::pair<Perm, Perm>> pairs;
  for (std::size_t i = 0; i < g.gens().size(); ++i)
    pairs.emplace_back(g.gens()[i], tbl.action[i]);
  return Homomorphism::build(g, std::move(image), std::move(pairs));
}

PermGroup core(PermGroup const &g, PermGroup const &h,
               std::uint64_t max_cosets) {
  return coset_action(g, h, max_cosets).kernel();
}

PermGroup quotient(PermGroup const &g, PermGroup const &n,
                   std::uint64_t regular_cap) {
  if (!n.normal_in(g))
    throw InputError("quotient needs a normal subgroup");
  if (n.order() == g.order())
    return PermGroup::trivial(1);
  if (n.is_trivial())
    return g;

  auto const &c = g.construction();
  if (c && c->kind == Construction::Kind::DirectProduct) {
    PermGroup const &a = c->children[0];
    PermGroup const &b = c->children[1];
    unsigned const da = a.degree();
    unsigned const db = b.degree();
    std::vector<Perm> pa, pb;
    for (Perm const &x : n.gens()) {
      pa.push_back(lower_part(x, da));
      pb.push_back(upper_part(x, da, db));
    }
    PermGroup qa = PermGroup::from_gens(da, std::move(pa));
    PermGroup qb = PermGroup::from_gens(db, std::move(pb));
    // n splits over the factors exactly when the projection orders multiply
    // back to |n|; then G/n is the product of the coordinate quotients.
    if (qa.order() * qb.order() == n.order())
      return direct_product(quotient(a, qa, regular_cap),
                            quotient(b, qb, regular_cap));
  }
  if (c && c->kind == Construction::Kind::Wreath) {
    PermGroup base = wreath_base(g);
    if (n.same_group(base))
      return c->children[1];
    if (base.subgroup_of(n)) {
      Homomorphism tm = wreath_top_map(g);
      return quotient(c->children[1], tm.map(n), regular_cap);
    }
  }

  BigInt const index = g.order() / n.order();
  if (index > regular_cap)
    throw ResourceError("quotient of index " + big_str(index) +
                        " exceeds the regular action cap " +
                        std::to_string(regular_cap));
  CosetTable tbl = coset_bfs(n, g.gens(), to_u64(index));
  PermGroup q = PermGroup::from_gens(static_cast<unsigned>(tbl.reps.size()),
                                     tbl.action, &index);
  return q.with_construction(
      Construction{Construction::Kind::QuotientImage, {g, n}},
      "Quot(" + g.expr() + ", " + gens_list(n.gens()) + ")");
}

Homomorphism quotient_map(PermGroup const &g, PermGroup const &n,
                          std::uint64_t regular_cap) {
  if (!n.normal_in(g))
    throw InputError("quotient needs a normal subgroup");
  BigInt const index = g.order() / n.order();
  if (index > regular_cap)
    throw ResourceError("quotient of index " + big_str(index) +
                        " exceeds the regular action cap " +
                        std::to_string(regular_cap));
  CosetTable tbl = coset_bfs(n, g.gens(), to_u64(index));
  PermGroup q = PermGroup::from_gens(static_cast<unsigned>(tbl.reps.size()),
                                     tbl.action, &index);
  q = q.with_construction(
      Construction{Construction::Kind::QuotientImage, {g, n}},
      "Quot(" + g.expr() + ", " + gens_list(n.gens()) + ")");
  std::vector<std::pair<Perm, Perm>> pairs;
  for (std::size_t i = 0; i < g.gens().size(); ++i)
    pairs.emplace_back(g.gens()[i], tbl.action[i]);
  return Homomorphism::build(g, std::move(q), std::move(pairs));
}

} // namespace compatkit
