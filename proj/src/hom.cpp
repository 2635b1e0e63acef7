#include "compatkit/hom.hpp"

#include "compatkit/errors.hpp"

#include <mutex>

namespace compatkit {

namespace {

// Element of Sym(dd + cd) acting as x on the first dd points and as y,
// shifted, on the rest.
Perm graph_perm(Perm const &x, Perm const &y) {
  unsigned const dd = x.degree();
  unsigned const cd = y.degree();
  std::vector<unsigned> im(dd + cd);
  for (unsigned i = 1; i <= dd; ++i)
    im[i - 1u] = x[i];
  for (unsigned j = 1; j <= cd; ++j)
    im[dd + j - 1u] = dd + y[j];
  return Perm(std::move(im));
}

Perm cod_part(Perm const &g, unsigned dd, unsigned cd) {
  std::vector<unsigned> im(cd);
  for (unsigned j = 1; j <= cd; ++j)
    im[j - 1u] = g[dd + j] - dd;
  return Perm(std::move(im));
}

// Unlike Perm::restricted this ignores whatever g does past dd; fine here
// because graph elements act on the two blocks separately.
Perm dom_part(Perm const &g, unsigned dd) {
  std::vector<unsigned> im(dd);
  for (unsigned i = 1; i <= dd; ++i)
    im[i - 1u] = g[i];
  return Perm(std::move(im));
}

} // namespace

struct HomImpl {
  PermGroup domain;
  PermGroup codomain;
  std::vector<std::pair<Perm, Perm>> pairs;
  std::vector<Perm> graph_gens;
  // Base runs through all domain points first; for a valid map the chain has
  // exactly one level per domain point and evaluation is a sift that tracks
  // only the domain action.
  StabChain dom_first;

  mutable std::mutex mu;
  mutable std::optional<StabChain> cod_first;
  mutable std::optional<PermGroup> image_group;
  mutable std::optional<PermGroup> kernel_group;

  // Callers must hold mu.
  StabChain const &cod_chain() const {
    if (!cod_first) {
      unsigned const dd = domain.degree();
      unsigned const cd = codomain.degree();
      std::vector<unsigned> hint(cd);
      for (unsigned j = 0; j < cd; ++j)
        hint[j] = dd + 1u + j;
      cod_first = StabChain::build(dd + cd, graph_gens, &domain.order(),
                                   &hint, DEFAULT_SEED, true);
    }
    return *cod_first;
  }
};

namespace {

std::shared_ptr<HomImpl>
make_hom(PermGroup domain, PermGroup codomain,
         std::vector<std::pair<Perm, Perm>> pairs, std::string &err) {
  unsigned const dd = domain.degree();
  unsigned const cd = codomain.degree();

  for (auto const &[x, y] : pairs) {
    if (x.degree() != dd || y.degree() != cd) {
      err = "generator pair degrees do not match the groups";
      return nullptr;
    }
    if (!domain.contains(x)) {
      err = "pair component is not in the domain";
      return nullptr;
    }
    if (!codomain.contains(y)) {
      err = "pair component is not in the codomain";
      return nullptr;
    }
  }

  std::vector<Perm> graph_gens;
  for (auto const &[x, y] : pairs) {
    Perm g = graph_perm(x, y);
    if (!g.id())
      graph_gens.push_back(std::move(g));
  }

  // No declared order here: the point of this chain is to measure the graph
  // group honestly. The product over the prefix levels is the order of the
  // subgroup the first components generate, and any level past the prefix
  // holds elements trivial on the domain side, i.e. conflicting images for
  // the same element.
  std::vector<unsigned> hint(dd);
  for (unsigned i = 0; i < dd; ++i)
    hint[i] = i + 1u;
  StabChain dom_first = StabChain::build(dd + cd, graph_gens, nullptr, &hint,
                                         DEFAULT_SEED, true);
  BigInt span = 1;
  for (std::size_t i = 0; i < dd && i < dom_first.num_levels(); ++i)
    span *= static_cast<std::uint64_t>(dom_first.level(i).orbit.size());
  if (span != domain.order()) {
    err = "first components do not generate the domain";
    return nullptr;
  }
  if (dom_first.order() != domain.order()) {
    err = "images are not compatible with the relations of the domain";
    return nullptr;
  }

  auto impl = std::make_shared<HomImpl>();
  impl->domain = std::move(domain);
  impl->codomain = std::move(codomain);
  impl->pairs = std::move(pairs);
  impl->graph_gens = std::move(graph_gens);
  impl->dom_first = std::move(dom_first);
  return impl;
}

} // namespace

Homomorphism Homomorphism::build(PermGroup domain, PermGroup codomain,
                                 std::vector<std::pair<Perm, Perm>> pairs) {
  std::string err;
  auto impl =
      make_hom(std::move(domain), std::move(codomain), std::move(pairs), err);
  if (!impl)
    throw InputError(err);
  return Homomorphism(std::move(impl));
}

std::optional<Homomorphism>
Homomorphism::try_build(PermGroup domain, PermGroup codomain,
                        std::vector<std::pair<Perm, Perm>> pairs) {
  std::string err;
  auto impl =
      make_hom(std::move(domain), std::move(codomain), std::move(pairs), err);
  if (!impl)
    return std::nullopt;
  return Homomorphism(std::move(impl));
}

Homomorphism Homomorphism::identity(PermGroup const &g) {
  std::vector<std::pair<Perm, Perm>> pairs;
  for (Perm const &x : g.gens())
    pairs.emplace_back(x, x);
  return build(g, g, std::move(pairs));
}

PermGroup const &Homomorphism::domain() const { return impl_->domain; }

PermGroup const &Homomorphism::codomain() const { return impl_->codomain; }

std::vector<std::pair<Perm, Perm>> const &Homomorphism::pairs() const {
  return impl_->pairs;
}

Perm Homomorphism::apply(Perm const &g) const {
  auto const &I = *impl_;
  unsigned const dd = I.domain.degree();
  unsigned const cd = I.codomain.degree();
  if (g.degree() != dd)
    throw InputError("element degree does not match the domain");

  Perm gd = g;
  std::vector<Perm> used;
  for (std::size_t i = 0; i < I.dom_first.num_levels(); ++i) {
    auto const &lvl = I.dom_first.level(i);
    unsigned const gamma = gd[lvl.beta];
    if (gamma == lvl.beta)
      continue;
    if (lvl.pos[gamma] == 0u)
      throw InputError("element is not in the domain");
    Perm u = I.dom_first.transversal(i, gamma);
    gd *= dom_part(u, dd).inverse();
    used.push_back(std::move(u));
  }
  if (!gd.id())
    throw InputError("element is not in the domain");

  Perm acc(dd + cd);
  for (auto it = used.rbegin(); it != used.rend(); ++it)
    acc *= *it;
  return cod_part(acc, dd, cd);
}

PermGroup Homomorphism::map(PermGroup const &sub) const {
  std::vector<Perm> images;
  for (Perm const &g : sub.gens())
    images.push_back(apply(g));
  return PermGroup::from_gens(impl_->codomain.degree(), std::move(images));
}

PermGroup const &Homomorphism::image() const {
  auto const &I = *impl_;
  std::lock_guard<std::mutex> lock(I.mu);
  if (!I.image_group) {
    StabChain const &cc = I.cod_chain();
    unsigned const cd = I.codomain.degree();
    BigInt iorder = 1;
    for (std::size_t i = 0; i < cd && i < cc.num_levels(); ++i)
      iorder *= static_cast<std::uint64_t>(cc.level(i).orbit.size());
    std::vector<Perm> gens;
    for (auto const &[x, y] : I.pairs)
      gens.push_back(y);
    I.image_group = PermGroup::from_gens(cd, std::move(gens), &iorder);
  }
  return *I.image_group;
}

PermGroup const &Homomorphism::kernel() const {
  auto const &I = *impl_;
  std::lock_guard<std::mutex> lock(I.mu);
  if (!I.kernel_group) {
    StabChain const &cc = I.cod_chain();
    unsigned const dd = I.domain.degree();
    unsigned const cd = I.codomain.degree();
    BigInt korder = 1;
    std::vector<Perm> gens;
    if (cc.num_levels() > cd) {
      for (std::size_t i = cd; i < cc.num_levels(); ++i)
        korder *= static_cast<std::uint64_t>(cc.level(i).orbit.size());
      // Past the codomain prefix every graph element acts trivially there,
      // so the domain parts generate the kernel.
      for (Perm const &g : cc.level_gens(cd))
        gens.push_back(g.restricted(dd));
    }
    I.kernel_group = PermGroup::from_gens(dd, std::move(gens), &korder);
  }
  return *I.kernel_group;
}

Perm Homomorphism::preimage(Perm const &y) const {
  auto const &I = *impl_;
  unsigned const dd = I.domain.degree();
  unsigned const cd = I.codomain.degree();
  if (y.degree() != cd)
    throw InputError("element degree does not match the codomain");

  std::vector<Perm> used;
  Perm yd = y;
  {
    std::lock_guard<std::mutex> lock(I.mu);
    StabChain const &cc = I.cod_chain();
    for (std::size_t i = 0; i < cd && i < cc.num_levels(); ++i) {
      auto const &lvl = cc.level(i);
      unsigned const gamma = dd + yd[lvl.beta - dd];
      if (gamma == lvl.beta)
        continue;
      if (lvl.pos[gamma] == 0u)
        throw InputError("element is not in the image");
      Perm u = cc.transversal(i, gamma);
      yd *= cod_part(u, dd, cd).inverse();
      used.push_back(std::move(u));
    }
  }
  if (!yd.id())
    throw InputError("element is not in the image");

  Perm acc(dd + cd);
  for (auto it = used.rbegin(); it != used.rend(); ++it)
    acc *= *it;
  return dom_part(acc, dd);
}

bool Homomorphism::surjective() const {
  return image().order() == impl_->codomain.order();
}

bool Homomorphism::injective() const {
  return image().order() == impl_->domain.order();
}

Homomorphism Homomorphism::then(Homomorphism const &next) const {
  std::vector<std::pair<Perm, Perm>> np;
  for (auto const &[x, y] : impl_->pairs)
    np.emplace_back(x, next.apply(y));
  return build(impl_->domain, next.codomain(), std::move(np));
}

Homomorphism Homomorphism::restricted_to(PermGroup sub) const {
  std::vector<std::pair<Perm, Perm>> np;
  for (Perm const &g : sub.gens())
    np.emplace_back(g, apply(g));
  return build(std::move(sub), impl_->codomain, std::move(np));
}

Homomorphism Homomorphism::inverse_iso() const {
  if (!surjective() || !injective())
    throw InputError("only bijections can be inverted");
  std::vector<std::pair<Perm, Perm>> np;
  for (auto const &[x, y] : impl_->pairs)
    np.emplace_back(y, x);
  return build(impl_->codomain, impl_->domain, std::move(np));
}

} // namespace compatkit
