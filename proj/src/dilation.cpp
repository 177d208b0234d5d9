#include "semimod/dilation.hpp"

#include <algorithm>
#include <cmath>

#include "semimod/eig.hpp"

namespace semimod {

namespace {

double rel_tol(double base, const CMatrix& m) { return base * (1.0 + m.frobenius_norm()); }

CMatrix embed_u_corner(const ModuleShape& shape, const CMatrix& u) {
  CMatrix m(shape.linking_dim(), shape.linking_dim());
  m.set_block(0, 0, u);
  return m;
}

CMatrix embed_a_corner(const ModuleShape& shape, const CMatrix& a) {
  CMatrix m(shape.linking_dim(), shape.linking_dim());
  m.set_block(shape.p, shape.p, a);
  return m;
}

CMatrix embed_x_corner(const ModuleShape& shape, const CMatrix& x) {
  CMatrix m(shape.linking_dim(), shape.linking_dim());
  m.set_block(0, shape.p, x);
  return m;
}

}  // namespace

double PairResiduals::max_structural() const {
  return std::max({rep_mult, rep_adjoint, rep_unital, psi_rho_map});
}

double PairResiduals::max_reconstruction() const { return std::max(recon_phi, recon_phi_mod); }

PairResiduals validate_pair(const DilationPair& pair, const ModuleMap& phi_mod, const CpMap& phi) {
  const std::size_t n = pair.shape.n;
  PairResiduals res;

  // rho is a unital *-homomorphism.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const CMatrix prod = pair.rho.image(i, 0) * pair.rho.image(0, j);
      res.rep_mult = std::max(res.rep_mult, (prod - pair.rho.image(i, j)).frobenius_norm());
      res.rep_adjoint = std::max(
          res.rep_adjoint, (pair.rho.image(i, j).adjoint() - pair.rho.image(j, i)).frobenius_norm());
    }
  CMatrix unit = pair.rho.apply(CMatrix::identity(n));
  unit -= CMatrix::identity(pair.k1_dim());
  res.rep_unital = unit.frobenius_norm();

  // Psi is a rho-map.
  const std::size_t ne = pair.shape.dim_e();
  for (std::size_t m = 0; m < ne; ++m)
    for (std::size_t l = 0; l < ne; ++l) {
      const CMatrix lhs = pair.psi.image(m).adjoint() * pair.psi.image(l);
      const CMatrix rhs = pair.rho.apply(
          inner_product(pair.shape, e_basis(pair.shape, m), e_basis(pair.shape, l)));
      res.psi_rho_map = std::max(res.psi_rho_map, (lhs - rhs).frobenius_norm());
    }

  // Reconstruction of the source pair.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const CMatrix got = pair.v.adjoint() * pair.rho.image(i, j) * pair.v;
      res.recon_phi = std::max(res.recon_phi, (got - phi.image(i, j)).frobenius_norm());
    }
  for (std::size_t m = 0; m < ne; ++m) {
    const CMatrix got = pair.w.adjoint() * pair.psi.image(m) * pair.v;
    res.recon_phi_mod = std::max(res.recon_phi_mod, (got - phi_mod.image(m)).frobenius_norm());
  }

  CMatrix wtw = pair.w.adjoint() * pair.w;
  wtw -= CMatrix::identity(pair.d2);
  res.w_isometry = wtw.frobenius_norm();
  return res;
}

CpMap sigma_of(const ModuleMap& psi) {
  const std::size_t p = psi.shape.p, n = psi.shape.n, k2 = psi.d2;
  std::vector<CMatrix> images;
  images.reserve(p * p);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t k = 0; k < p; ++k) {
      CMatrix img(k2, k2);
      for (std::size_t j = 0; j < n; ++j)
        img += psi.image(i * n + j) * psi.image(k * n + j).adjoint();
      images.push_back(Complex(inv_n) * img);
    }
  return CpMap::from_images(p, k2, images);
}

CornerParts corner_decompose(const CpMap& rep, const CMatrix& v_raw, const ModuleShape& shape,
                             std::size_t d1, std::size_t d2) {
  const std::size_t p = shape.p, n = shape.n, dm = shape.linking_dim();
  if (rep.dom_dim != dm) throw ShapeMismatch("corner_decompose: rep domain");
  const std::size_t kdim = rep.cod_dim;
  if (v_raw.rows() != kdim || v_raw.cols() != d2 + d1)
    throw ShapeMismatch("corner_decompose: v_raw must be dim(K) x (d2+d1)");

  // Spot-check multiplicativity, adjoints and unitality of the claimed
  // representation before trusting its corner projections.
  double rep_defect = 0.0;
  for (std::size_t i = 0; i < dm; ++i)
    for (std::size_t j = 0; j < dm; ++j) {
      const CMatrix prod = rep.image(i, 0) * rep.image(0, j);
      rep_defect = std::max(rep_defect, (prod - rep.image(i, j)).frobenius_norm());
      rep_defect = std::max(rep_defect,
                            (rep.image(i, j).adjoint() - rep.image(j, i)).frobenius_norm());
    }
  CMatrix unital = rep.apply(CMatrix::identity(dm));
  unital -= CMatrix::identity(kdim);
  rep_defect = std::max(rep_defect, unital.frobenius_norm());
  if (rep_defect > 1e-9 * (1.0 + static_cast<double>(kdim)))
    throw NotRepresentation("corner_decompose: representation defect " + std::to_string(rep_defect));

  const CMatrix p2 = rep.apply(embed_u_corner(shape, CMatrix::identity(p)));
  const CMatrix p1 = rep.apply(embed_a_corner(shape, CMatrix::identity(n)));
  const CMatrix b2 = orthonormal_range(p2, defaults::kRankTol);
  const CMatrix b1 = orthonormal_range(p1, defaults::kRankTol);
  if (b2.cols() + b1.cols() != kdim)
    throw ProjectionLeak("corner_decompose: corner projections do not split K");
  const std::size_t k2 = b2.cols(), k1 = b1.cols();

  CornerParts parts;
  double leak = 0.0;

  std::vector<CMatrix> sigma_images;
  sigma_images.reserve(p * p);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) {
      const CMatrix img = rep.apply(embed_u_corner(shape, CMatrix::unit(p, p, i, j)));
      sigma_images.push_back(b2.adjoint() * img * b2);
      leak = std::max(leak, (b1.adjoint() * img * b1).frobenius_norm());
      leak = std::max(leak, (b1.adjoint() * img * b2).frobenius_norm());
    }
  parts.sigma = CpMap::from_images(p, k2, sigma_images);

  std::vector<CMatrix> rho_images;
  rho_images.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const CMatrix img = rep.apply(embed_a_corner(shape, CMatrix::unit(n, n, i, j)));
      rho_images.push_back(b1.adjoint() * img * b1);
      leak = std::max(leak, (b2.adjoint() * img * b2).frobenius_norm());
      leak = std::max(leak, (b2.adjoint() * img * b1).frobenius_norm());
    }
  parts.rho = CpMap::from_images(n, k1, rho_images);

  std::vector<CMatrix> psi_images;
  psi_images.reserve(p * n);
  for (std::size_t m = 0; m < p * n; ++m) {
    const CMatrix img = rep.apply(embed_x_corner(shape, e_basis(shape, m)));
    psi_images.push_back(b2.adjoint() * img * b1);
    leak = std::max(leak, (b2.adjoint() * img * b2).frobenius_norm());
    leak = std::max(leak, (b1.adjoint() * img * b1).frobenius_norm());
  }
  parts.psi = ModuleMap::from_images(shape, k1, k2, psi_images);

  if (leak > 1e-8 * (1.0 + static_cast<double>(kdim)))
    throw ProjectionLeak("corner_decompose: off-corner mass " + std::to_string(leak));

  const CMatrix top = b2.adjoint() * v_raw;     // K2 x (d2+d1)
  const CMatrix bottom = b1.adjoint() * v_raw;  // K1 x (d2+d1)
  parts.w = top.block(0, 0, k2, d2);
  parts.v = bottom.block(0, d2, k1, d1);
  parts.offcorner_max = std::max(top.block(0, d2, k2, d1).frobenius_norm(),
                                 bottom.block(0, 0, k1, d2).frobenius_norm());
  if (parts.offcorner_max > rel_tol(1e-8, v_raw))
    throw ProjectionLeak("corner_decompose: W2/W3 blocks " + std::to_string(parts.offcorner_max));
  return parts;
}

namespace {

// Dilation pair through the block extension: Stinespring of Theta, then the
// corner split of the linking representation.
DilationPair dilate_via_extension(const CpMap& psi_corner, const ModuleMap& phi_mod,
                                  const CpMap& phi) {
  CpMap theta = assemble_block(psi_corner, phi_mod, phi);
  theta.choi = psd_project(hermitize(theta.choi));
  const Stinespring st = stinespring_minimal(theta);
  const CpMap rep = CpMap::multiplicity_rep(phi_mod.shape.linking_dim(), st.multiplicity);
  CornerParts parts = corner_decompose(rep, st.v, phi_mod.shape, phi_mod.d1, phi_mod.d2);

  DilationPair pair;
  pair.shape = phi_mod.shape;
  pair.d1 = phi_mod.d1;
  pair.d2 = phi_mod.d2;
  pair.rho = std::move(parts.rho);
  pair.rho_multiplicity = st.multiplicity;
  pair.v = std::move(parts.v);
  pair.psi = std::move(parts.psi);
  pair.w = std::move(parts.w);
  return pair;
}

// Dilation pair on the minimal Stinespring of phi alone: rho = id (x) I_r,
// Psi the canonical module representation padded by an unused summand so
// that W can be completed to an isometry. Solving W against the exact
// instance data sidesteps the extension solver's tolerance entirely.
DilationPair dilate_via_phi_stinespring(const ModuleMap& phi_mod, const CpMap& phi) {
  const ModuleShape shape = phi_mod.shape;
  const std::size_t p = shape.p, n = shape.n, d1 = phi_mod.d1, d2 = phi_mod.d2;
  const Stinespring st = stinespring_minimal(phi);
  const std::size_t r = std::max<std::size_t>(st.multiplicity, 1);

  CMatrix v(n * r, d1);
  if (st.multiplicity > 0) v = st.v;

  // W0 solves W0^* (e_m (x) I_r) V = Phi(e_m) over the module basis.
  const CMatrix ir = CMatrix::identity(r);
  CMatrix family(p * r, shape.dim_e() * d1);
  CMatrix targets(d2, shape.dim_e() * d1);
  for (std::size_t m = 0; m < shape.dim_e(); ++m) {
    family.set_block(0, m * d1, kron(e_basis(shape, m), ir) * v);
    targets.set_block(0, m * d1, phi_mod.image(m));
  }
  const CMatrix w0 = solve_lstsq(family.adjoint(), targets.adjoint());  // (p r) x d2

  // Complete to an isometry on a padded summand.
  CMatrix gap = CMatrix::identity(d2) - w0.adjoint() * w0;
  const CMatrix wc = psd_sqrt(psd_project(hermitize(gap)));
  const bool pad = wc.frobenius_norm() > 1e-12 * (1.0 + w0.frobenius_norm());
  const std::size_t k2 = p * r + (pad ? d2 : 0);

  DilationPair pair;
  pair.shape = shape;
  pair.d1 = d1;
  pair.d2 = d2;
  pair.rho = CpMap::multiplicity_rep(n, r);
  pair.rho_multiplicity = r;
  pair.v = v;
  std::vector<CMatrix> psi_images;
  psi_images.reserve(shape.dim_e());
  for (std::size_t m = 0; m < shape.dim_e(); ++m) {
    CMatrix img(k2, n * r);
    img.set_block(0, 0, kron(e_basis(shape, m), ir));
    psi_images.push_back(img);
  }
  pair.psi = ModuleMap::from_images(shape, n * r, k2, psi_images);
  pair.w = CMatrix(k2, d2);
  pair.w.set_block(0, 0, w0);
  if (pad) pair.w.set_block(p * r, 0, wc);
  return pair;
}

double pair_quality(const DilationPair& pair, const ModuleMap& phi_mod, const CpMap& phi) {
  const PairResiduals r = validate_pair(pair, phi_mod, phi);
  return std::max({r.max_reconstruction(), r.max_structural(), r.w_isometry});
}

}  // namespace

DilationPair dilate(const ModuleMap& phi_mod, const CpMap& phi, const SolverOptions& opts) {
  Certificate cert = certify(phi_mod, phi, opts);
  if (cert.verdict == Verdict::kNotSemiPhi)
    throw NotSemiPhi("dilate: gram min eigenvalue " + std::to_string(cert.gram_min_eig));
  if (cert.verdict != Verdict::kCompletelySemiPhi || !cert.psi)
    throw NoConvergence("dilate: extension solver exhausted its budget");

  DilationPair pair = dilate_via_extension(*cert.psi, phi_mod, phi);
  // The extension route inherits the solver tolerance; when that leaves a
  // visible residual, rebuild on the minimal Stinespring of phi, which only
  // touches exact instance data.
  if (pair_quality(pair, phi_mod, phi) > 2.5e-9) {
    DilationPair direct = dilate_via_phi_stinespring(phi_mod, phi);
    if (pair_quality(direct, phi_mod, phi) < pair_quality(pair, phi_mod, phi))
      pair = std::move(direct);
  }

  CMatrix wtw = pair.w.adjoint() * pair.w;
  wtw -= CMatrix::identity(pair.d2);
  pair.w_isometry = wtw.frobenius_norm() <= 1e-8;
  return pair;
}

namespace {

// Stage-one compression for a multiplicity-form rho: [rho(A) V H1] equals
// C^n (x) S for the profile span S, so the compressed rho stays an exact
// multiplicity representation.
DilationPair minimize_multiplicity(const DilationPair& pair) {
  const std::size_t n = pair.shape.n, r = pair.rho_multiplicity, d1 = pair.d1;
  CMatrix profiles(r, n * d1);
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t h = 0; h < d1; ++h)
      for (std::size_t s = 0; s < r; ++s) profiles(s, b * d1 + h) = pair.v(b * r + s, h);
  const CMatrix bs = orthonormal_range(profiles, defaults::kRankTol);  // r x r'
  const std::size_t rp = bs.cols();
  const CMatrix embed = kron(CMatrix::identity(n), bs);  // K1 x (n r')

  DilationPair out = pair;
  out.rho = CpMap::multiplicity_rep(n, rp);
  out.rho_multiplicity = rp;
  out.v = embed.adjoint() * pair.v;
  std::vector<CMatrix> psi_images;
  psi_images.reserve(pair.shape.dim_e());
  for (std::size_t m = 0; m < pair.shape.dim_e(); ++m)
    psi_images.push_back(pair.psi.image(m) * embed);
  out.psi = ModuleMap::from_images(pair.shape, n * rp, pair.k2_dim(), psi_images);
  return out;
}

DilationPair minimize_generic(const DilationPair& pair) {
  const std::size_t n = pair.shape.n, d1 = pair.d1;
  std::vector<CMatrix> family;
  family.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) family.push_back(pair.rho.image(i, j) * pair.v);
  const CMatrix b1 = orthonormal_range(family, defaults::kRankTol);  // K1 x k1'
  (void)d1;

  DilationPair out = pair;
  std::vector<CMatrix> rho_images;
  rho_images.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      rho_images.push_back(b1.adjoint() * pair.rho.image(i, j) * b1);
  out.rho = CpMap::from_images(n, b1.cols(), rho_images);
  out.rho_multiplicity = 0;
  out.v = b1.adjoint() * pair.v;
  std::vector<CMatrix> psi_images;
  psi_images.reserve(pair.shape.dim_e());
  for (std::size_t m = 0; m < pair.shape.dim_e(); ++m)
    psi_images.push_back(pair.psi.image(m) * b1);
  out.psi = ModuleMap::from_images(pair.shape, b1.cols(), pair.k2_dim(), psi_images);
  return out;
}

}  // namespace

DilationPair minimize(const DilationPair& pair, const ModuleMap& phi_mod, const CpMap& phi) {
  const PairResiduals input_res = validate_pair(pair, phi_mod, phi);
  if (input_res.max_reconstruction() > 1e-7 || input_res.max_structural() > 1e-7)
    throw InvariantViolation("minimize: input pair residual " +
                             std::to_string(std::max(input_res.max_reconstruction(),
                                                     input_res.max_structural())));

  auto [cond_i, cond_ii] = check_minimal(pair);
  if (cond_i && cond_ii) {
    DilationPair out = pair;
    out.minimal = true;
    return out;
  }

  DilationPair stage1 =
      pair.rho_multiplicity > 0 ? minimize_multiplicity(pair) : minimize_generic(pair);

  // Stage two: compress K2 to [Psi(E) K1] and replace W by the contraction
  // S = T^* with T = W^* restricted to that subspace.
  std::vector<CMatrix> cols;
  cols.reserve(stage1.shape.dim_e());
  for (std::size_t m = 0; m < stage1.shape.dim_e(); ++m) cols.push_back(stage1.psi.image(m));
  const CMatrix q = orthonormal_range(cols, defaults::kRankTol);  // K2 x k2'

  DilationPair out = stage1;
  std::vector<CMatrix> psi_images;
  psi_images.reserve(stage1.shape.dim_e());
  for (std::size_t m = 0; m < stage1.shape.dim_e(); ++m)
    psi_images.push_back(q.adjoint() * stage1.psi.image(m));
  out.psi = ModuleMap::from_images(stage1.shape, stage1.psi.d1, q.cols(), psi_images);
  out.w = q.adjoint() * stage1.w;
  out.minimal = true;
  CMatrix wtw = out.w.adjoint() * out.w;
  wtw -= CMatrix::identity(out.d2);
  out.w_isometry = wtw.frobenius_norm() <= 1e-8;

  const PairResiduals out_res = validate_pair(out, phi_mod, phi);
  if (out_res.max_reconstruction() > 1e-7)
    throw InvariantViolation("minimize: reconstruction lost, residual " +
                             std::to_string(out_res.max_reconstruction()));
  return out;
}

std::pair<bool, bool> check_minimal(const DilationPair& pair) {
  const std::size_t n = pair.shape.n;
  std::vector<CMatrix> family;
  family.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) family.push_back(pair.rho.image(i, j) * pair.v);
  bool cond_i;
  if (pair.k1_dim() == 0) {
    cond_i = true;
  } else {
    const CMatrix b = orthonormal_range(family, defaults::kRankTol);
    cond_i = b.cols() == pair.k1_dim();
  }

  bool cond_ii;
  if (pair.k2_dim() == 0) {
    cond_ii = true;
  } else {
    std::vector<CMatrix> cols;
    cols.reserve(pair.shape.dim_e());
    for (std::size_t m = 0; m < pair.shape.dim_e(); ++m) cols.push_back(pair.psi.image(m));
    const CMatrix q = orthonormal_range(cols, defaults::kRankTol);
    cond_ii = q.cols() == pair.k2_dim();
  }
  return {cond_i, cond_ii};
}

namespace {

CMatrix nearest_unitary(const CMatrix& t) {
  const EigResult e = eig_hermitian(hermitize(t.adjoint() * t));
  const std::size_t k = e.values.size();
  CMatrix inv_half(k, k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      Complex sum = 0.0;
      for (std::size_t s = 0; s < k; ++s) {
        const double lam = std::max(e.values[s], 1e-24);
        sum += e.vectors(i, s) * (1.0 / std::sqrt(lam)) * std::conj(e.vectors(j, s));
      }
      inv_half(i, j) = sum;
    }
  return t * inv_half;
}

// Solve T A = B in the least-squares sense, then snap to the polar unitary.
CMatrix intertwiner(const CMatrix& a, const CMatrix& b) {
  const CMatrix x = solve_lstsq(a.adjoint(), b.adjoint());
  return nearest_unitary(x.adjoint());
}

}  // namespace

EquivalenceResult equivalence_unitaries(const DilationPair& a, const DilationPair& b,
                                        const ModuleMap& phi_mod, const CpMap& phi) {
  if (a.k1_dim() != b.k1_dim() || a.k2_dim() != b.k2_dim())
    throw NotEquivalent("dilation space dimensions differ");
  const std::size_t n = a.shape.n, d1 = a.d1, ne = a.shape.dim_e();
  (void)phi_mod;
  (void)phi;

  auto k1_family = [&](const DilationPair& pair) {
    CMatrix fam(pair.k1_dim(), n * n * d1);
    std::size_t at = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const CMatrix cols = pair.rho.image(i, j) * pair.v;
        fam.set_block(0, at, cols);
        at += d1;
      }
    return fam;
  };

  const CMatrix fam_a = k1_family(a);
  const CMatrix fam_b = k1_family(b);
  const CMatrix gram_a = fam_a.adjoint() * fam_a;
  const CMatrix gram_b = fam_b.adjoint() * fam_b;
  if ((gram_a - gram_b).frobenius_norm() > 1e-6 * (1.0 + gram_a.frobenius_norm()))
    throw NotEquivalent("K1 spanning families have different Gram matrices");

  EquivalenceResult res;
  res.t1 = intertwiner(fam_a, fam_b);

  auto k2_family = [&](const DilationPair& pair, const CMatrix& right) {
    CMatrix fam(pair.k2_dim(), ne * pair.k1_dim());
    std::size_t at = 0;
    for (std::size_t m = 0; m < ne; ++m) {
      const CMatrix cols = pair.psi.image(m) * right;
      fam.set_block(0, at, cols);
      at += cols.cols();
    }
    return fam;
  };

  const CMatrix fam2_a = k2_family(a, CMatrix::identity(a.k1_dim()));
  const CMatrix fam2_b = k2_family(b, res.t1);
  const CMatrix gram2_a = fam2_a.adjoint() * fam2_a;
  const CMatrix gram2_b = fam2_b.adjoint() * fam2_b;
  if ((gram2_a - gram2_b).frobenius_norm() > 1e-6 * (1.0 + gram2_a.frobenius_norm()))
    throw NotEquivalent("K2 spanning families have different Gram matrices");
  res.t2 = intertwiner(fam2_a, fam2_b);

  double r = 0.0;
  r = std::max(r, (res.t1 * a.v - b.v).frobenius_norm());
  r = std::max(r, (res.t2 * a.w - b.w).frobenius_norm());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      r = std::max(r, (res.t1 * a.rho.image(i, j) - b.rho.image(i, j) * res.t1).frobenius_norm());
  for (std::size_t m = 0; m < ne; ++m)
    r = std::max(r, (res.t2 * a.psi.image(m) - b.psi.image(m) * res.t1).frobenius_norm());
  const CpMap sigma_a = sigma_of(a.psi);
  const CpMap sigma_b = sigma_of(b.psi);
  for (std::size_t i = 0; i < a.shape.p; ++i)
    for (std::size_t j = 0; j < a.shape.p; ++j)
      r = std::max(r, (res.t2 * sigma_a.image(i, j) * res.t2.adjoint() - sigma_b.image(i, j))
                          .frobenius_norm());
  CMatrix u1 = res.t1.adjoint() * res.t1;
  u1 -= CMatrix::identity(a.k1_dim());
  CMatrix u2 = res.t2.adjoint() * res.t2;
  u2 -= CMatrix::identity(a.k2_dim());
  r = std::max({r, u1.frobenius_norm(), u2.frobenius_norm()});
  res.max_residual = r;
  return res;
}

std::size_t invariant_pair_dimension(const ModuleMap& psi) {
  const std::size_t k1 = psi.d1, k2 = psi.d2, ne = psi.shape.dim_e();
  if (k1 == 0 && k2 == 0) return 0;
  const std::size_t vars = k2 * k2 + k1 * k1;
  CMatrix system(ne * 2 * k2 * k1, vars);
  std::size_t row = 0;
  for (std::size_t m = 0; m < ne; ++m) {
    const CMatrix pm = psi.image(m);  // k2 x k1
    // P Psi - Psi Q = 0
    for (std::size_t al = 0; al < k2; ++al)
      for (std::size_t be = 0; be < k1; ++be, ++row) {
        for (std::size_t ga = 0; ga < k2; ++ga) system(row, al * k2 + ga) += pm(ga, be);
        for (std::size_t de = 0; de < k1; ++de)
          system(row, k2 * k2 + de * k1 + be) -= pm(al, de);
      }
    // Q Psi^* - Psi^* P = 0
    const CMatrix pma = pm.adjoint();  // k1 x k2
    for (std::size_t al = 0; al < k1; ++al)
      for (std::size_t be = 0; be < k2; ++be, ++row) {
        for (std::size_t de = 0; de < k1; ++de)
          system(row, k2 * k2 + al * k1 + de) += pma(de, be);
        for (std::size_t ga = 0; ga < k2; ++ga) system(row, ga * k2 + be) -= pma(al, ga);
      }
  }
  return nullspace(system, defaults::kRankTol).cols();
}

ModuleMap as_module_map(const CpMap& phi) {
  const std::size_t m = phi.dom_dim, d = phi.cod_dim;
  const ModuleShape shape{m, m};
  std::vector<CMatrix> images;
  images.reserve(m * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) images.push_back(phi.image(i, j));
  return ModuleMap::from_images(shape, d, d, images);
}

bool is_pure_ucp(const CpMap& phi, const SolverOptions& opts) {
  if (!phi.is_unital(1e-8)) throw NotUnital("is_pure_ucp: phi(I) != I");
  const ModuleMap as_map = as_module_map(phi);
  const DilationPair pair = minimize(dilate(as_map, phi, opts), as_map, phi);
  return invariant_pair_dimension(pair.psi) == 1;
}

}  // namespace semimod
