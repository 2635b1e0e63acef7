#include "compatkit/lattice.hpp"

#include "compatkit/bigint.hpp"
#include "compatkit/hom.hpp"
#include "compatkit/iso.hpp"
#include "compatkit/ops.hpp"

#include <algorithm>
#include <utility>

namespace compatkit {

namespace {

constexpr std::uint64_t GENERIC_ORDER_BOUND = 100000;

struct Builder {
  PermGroup const &g;
  char const *method;
  std::size_t cap;
  std::vector<PermGroup> nodes;

  NormalLattice finish(bool complete) {
    NormalLattice lat;
    lat.group = g;
    lat.nodes = nodes;
    std::stable_sort(lat.nodes.begin(), lat.nodes.end(),
                     [](PermGroup const &x, PermGroup const &y) {
                       return x.order() < y.order();
                     });
    std::size_t const n = lat.nodes.size();
    lat.leq.assign(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        lat.leq[i][j] = lat.nodes[i].subgroup_of(lat.nodes[j]);
    lat.complete = complete;
    lat.method = method;
    return lat;
  }

  bool add(PermGroup cand) {
    for (PermGroup const &n : nodes)
      if (n.order() == cand.order() && n.same_group(cand))
        return false;
    nodes.push_back(std::move(cand));
    if (nodes.size() > cap)
      throw LatticeError("normal subgroup count exceeded cap", finish(false));
    return true;
  }
};

NormalLattice generic(PermGroup const &g, std::size_t cap) {
  Builder b{g, "generic", cap, {}};
  b.add(PermGroup::trivial(g.degree()));
  if (!fits_u64(g.order()) || to_u64(g.order()) > GENERIC_ORDER_BOUND)
    throw LatticeError("group too large for generic normal subgroup "
                       "enumeration",
                       b.finish(false));
  // Every normal subgroup is a join of normal closures of single elements,
  // and the closure is constant on a conjugacy class.
  for (auto const &[rep, size] : g.conjugacy_classes(GENERIC_ORDER_BOUND)) {
    (void)size;
    if (rep.id())
      continue;
    b.add(normal_closure(g, PermGroup::from_gens(g.degree(), {rep})));
  }
  for (std::size_t i = 1; i < b.nodes.size(); ++i)
    for (std::size_t j = 1; j < i; ++j)
      b.add(join(b.nodes[i], b.nodes[j]));
  return b.finish(true);
}

// One side of a Goursat candidate: a normal pair N0 <= N1 whose section
// N1/N0 is central in G/N0, together with the projection onto it.
struct Section {
  std::size_t top;
  std::size_t bot;
  Homomorphism onto;
};

std::vector<Section> central_sections(PermGroup const &g,
                                      NormalLattice const &lat) {
  std::vector<Section> out;
  for (std::size_t t = 0; t < lat.nodes.size(); ++t)
    for (std::size_t bo = 0; bo < lat.nodes.size(); ++bo) {
      if (!lat.leq[bo][t] || lat.nodes[bo].order() == lat.nodes[t].order())
        continue;
      bool central = true;
      for (Perm const &x : lat.nodes[t].gens()) {
        for (Perm const &a : g.gens())
          if (!lat.nodes[bo].contains(x.commutator_with(a))) {
            central = false;
            break;
          }
        if (!central)
          break;
      }
      if (!central)
        continue;
      out.push_back({t, bo, quotient_map(lat.nodes[t], lat.nodes[bo], 20000)});
    }
  return out;
}

NormalLattice goursat(PermGroup const &g, std::size_t cap) {
  PermGroup const &a = g.construction()->children[0];
  PermGroup const &bgrp = g.construction()->children[1];
  unsigned const da = a.degree();
  unsigned const dg = g.degree();

  Builder b{g, "goursat", cap, {}};
  NormalLattice la, lb;
  try {
    la = normal_subgroups(a, cap);
    lb = normal_subgroups(bgrp, cap);
  } catch (LatticeError const &) {
    throw LatticeError("factor lattice exceeded cap", b.finish(false));
  }

  auto embed = [&](PermGroup const &ma, PermGroup const &mb,
                   std::vector<Perm> extra) {
    std::vector<Perm> gens = std::move(extra);
    for (Perm const &x : ma.gens())
      gens.push_back(x.extended(dg));
    for (Perm const &y : mb.gens())
      gens.push_back(y.shifted(da, dg));
    if (gens.empty())
      return PermGroup::trivial(dg);
    return PermGroup::from_gens(dg, std::move(gens));
  };

  for (PermGroup const &ma : la.nodes)
    for (PermGroup const &mb : lb.nodes) {
      // keep product nodes tagged so recursive callers get fast paths
      if (ma.order() == a.order() && mb.order() == bgrp.order())
        b.add(g);
      else
        b.add(direct_product(ma, mb));
    }

  // Nontrivial Goursat graphs: both sections are central (so any matching
  // is automatically conjugation-invariant) and get glued along every
  // isomorphism between them.
  std::vector<Section> sa, sb;
  std::vector<std::vector<Homomorphism>> isos_cache;
  try {
    sa = central_sections(a, la);
    sb = central_sections(bgrp, lb);
    for (Section const &x : sa)
      for (Section const &y : sb) {
        PermGroup const &qa = x.onto.image();
        PermGroup const &qb = y.onto.image();
        if (qa.order() != qb.order())
          continue;
        for (Homomorphism const &phi : all_isomorphisms(qa, qb)) {
          std::vector<Perm> glue;
          for (Perm const &xg : la.nodes[x.top].gens()) {
            Perm img = y.onto.preimage(phi.apply(x.onto.apply(xg)));
            glue.push_back(xg.extended(dg) * img.shifted(da, dg));
          }
          b.add(embed(la.nodes[x.bot], lb.nodes[y.bot], std::move(glue)));
        }
      }
  } catch (LatticeError const &) {
    throw;
  } catch (ResourceError const &e) {
    throw LatticeError(std::string("section matching failed: ") + e.what(),
                       b.finish(false));
  }
  return b.finish(la.complete && lb.complete);
}

NormalLattice wreath_rule(PermGroup const &g, std::size_t cap) {
  PermGroup const &top = g.construction()->children[1];
  Builder b{g, "wreath-rule", cap, {}};
  NormalLattice lt;
  try {
    lt = normal_subgroups(top, cap);
  } catch (LatticeError const &) {
    throw LatticeError("top lattice exceeded cap", b.finish(false));
  }
  b.add(PermGroup::trivial(g.degree()));
  // Every nontrivial normal subgroup contains the base (see the docs note),
  // so the rest of the lattice is pulled back from the top group.
  PermGroup const base = wreath_base(g);
  Homomorphism const proj = wreath_top_map(g);
  for (PermGroup const &m : lt.nodes) {
    if (m.is_trivial()) {
      b.add(base);
      continue;
    }
    if (m.order() == top.order()) {
      b.add(g);
      continue;
    }
    std::vector<Perm> gens = base.gens();
    for (Perm const &y : m.gens())
      gens.push_back(proj.preimage(y));
    b.add(PermGroup::from_gens(g.degree(), std::move(gens)));
  }
  return b.finish(lt.complete);
}

} // namespace

std::size_t NormalLattice::index_of(PermGroup const &n) const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].order() == n.order() && nodes[i].same_group(n))
      return i;
  throw InputError("subgroup is not a lattice node");
}

NormalLattice normal_subgroups(PermGroup const &g, std::size_t cap) {
  if (cap == 0)
    throw InputError("lattice cap must be positive");
  if (auto cached = g.cache_get(CACHE_LATTICE))
    return *std::static_pointer_cast<NormalLattice>(cached);
  auto const &c = g.construction();
  NormalLattice lat;
  if (c && c->kind == Construction::Kind::DirectProduct) {
    lat = goursat(g, cap);
  } else if (c && c->kind == Construction::Kind::Wreath &&
             !c->children[0].abelian() && c->children[1].order() > 1 &&
             orbits(c->children[1]).size() == 1 &&
             [&] {
               try {
                 return is_simple(c->children[0], GENERIC_ORDER_BOUND);
               } catch (ResourceError const &) {
                 return false;
               }
             }()) {
    lat = wreath_rule(g, cap);
  } else {
    lat = generic(g, cap);
  }
  g.cache_put(CACHE_LATTICE, std::make_shared<NormalLattice>(lat));
  return lat;
}

} // namespace compatkit
