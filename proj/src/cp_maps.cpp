#include "semimod/cp_maps.hpp"

#include <cmath>

#include "semimod/eig.hpp"

namespace semimod {

CpMap CpMap::from_images(std::size_t m, std::size_t d, const std::vector<CMatrix>& images) {
  if (images.size() != m * m) throw ShapeMismatch("from_images: need m*m basis images");
  CpMap f{m, d, CMatrix(m * d, m * d)};
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const CMatrix& img = images[i * m + j];
      if (img.rows() != d || img.cols() != d) throw ShapeMismatch("from_images: image size");
      f.choi.set_block(i * d, j * d, img);
    }
  return f;
}

CpMap CpMap::identity(std::size_t n) {
  std::vector<CMatrix> images;
  images.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) images.push_back(CMatrix::unit(n, n, i, j));
  return from_images(n, n, images);
}

CpMap CpMap::normalized_trace(std::size_t m, std::size_t d) {
  std::vector<CMatrix> images;
  images.reserve(m * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      CMatrix img(d, d);
      if (i == j) img = Complex(1.0 / static_cast<double>(m)) * CMatrix::identity(d);
      images.push_back(img);
    }
  return from_images(m, d, images);
}

CpMap CpMap::multiplicity_rep(std::size_t m, std::size_t r) {
  std::vector<CMatrix> images;
  images.reserve(m * m);
  const CMatrix ir = CMatrix::identity(r);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) images.push_back(kron(CMatrix::unit(m, m, i, j), ir));
  return from_images(m, m * r, images);
}

CpMap CpMap::from_kraus(std::size_t m, std::size_t d, const std::vector<CMatrix>& kraus_ops) {
  std::vector<CMatrix> images(m * m, CMatrix(d, d));
  for (const auto& k : kraus_ops) {
    if (k.rows() != d || k.cols() != m) throw ShapeMismatch("from_kraus: operator size");
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        images[i * m + j] += k.col(i) * k.col(j).adjoint();
  }
  return from_images(m, d, images);
}

CMatrix CpMap::apply(const CMatrix& x) const {
  if (x.rows() != dom_dim || x.cols() != dom_dim)
    throw ShapeMismatch("CpMap::apply: input must be " + std::to_string(dom_dim) + " square");
  CMatrix out(cod_dim, cod_dim);
  for (std::size_t i = 0; i < dom_dim; ++i)
    for (std::size_t j = 0; j < dom_dim; ++j) {
      const Complex xij = x(i, j);
      if (xij == Complex(0.0)) continue;
      for (std::size_t r = 0; r < cod_dim; ++r)
        for (std::size_t c = 0; c < cod_dim; ++c)
          out(r, c) += xij * choi(i * cod_dim + r, j * cod_dim + c);
    }
  return out;
}

CMatrix CpMap::image(std::size_t i, std::size_t j) const {
  return choi.block(i * cod_dim, j * cod_dim, cod_dim, cod_dim);
}

bool CpMap::is_unital(double tol) const {
  CMatrix u = apply(CMatrix::identity(dom_dim));
  u -= CMatrix::identity(cod_dim);
  return u.frobenius_norm() <= tol;
}

CpMap CpMap::scaled(double factor) const {
  CpMap f = *this;
  f.choi *= Complex(factor);
  return f;
}

CpMap& CpMap::operator+=(const CpMap& o) {
  if (dom_dim != o.dom_dim || cod_dim != o.cod_dim) throw ShapeMismatch("CpMap::operator+=");
  choi += o.choi;
  return *this;
}

bool is_cp(const CpMap& f, CpWitness* witness) {
  EigResult e = eig_hermitian(f.choi);
  const double min_eig = e.values.empty() ? 0.0 : e.values.front();
  if (witness) {
    witness->min_eig = min_eig;
    witness->eigvec = e.values.empty() ? CMatrix(0, 1) : e.vectors.col(0);
  }
  return min_eig >= -defaults::kPsdTol * (1.0 + f.choi.frobenius_norm());
}

CpMap amplify(const CpMap& f, std::size_t k) {
  if (k == 0) throw Error("amplify: k must be >= 1");
  if (k == 1) return f;
  const std::size_t m = f.dom_dim, d = f.cod_dim;
  CpMap g{k * m, k * d, CMatrix(k * m * k * d, k * m * k * d)};
  // g(E_{ab} (x) E_{ij}) = E_{ab} (x) f(E_{ij})
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b)
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
          const CMatrix img = f.image(i, j);
          const std::size_t row0 = (a * m + i) * (k * d) + a * d;
          const std::size_t col0 = (b * m + j) * (k * d) + b * d;
          g.choi.set_block(row0, col0, img);
        }
  return g;
}

std::vector<CMatrix> kraus(const CpMap& f) {
  CpWitness w;
  if (!is_cp(f, &w)) throw NotCp("kraus: choi min eigenvalue " + std::to_string(w.min_eig));
  EigResult e = eig_hermitian(f.choi);
  const std::size_t m = f.dom_dim, d = f.cod_dim;
  const double lam_max = e.values.empty() ? 0.0 : e.values.back();
  std::vector<CMatrix> ops;
  if (lam_max <= 0.0) return ops;
  const double cut = 1e-9 * lam_max;
  // Largest eigenvalues first for a deterministic, stable ordering.
  for (std::size_t idx = e.values.size(); idx-- > 0;) {
    const double lam = e.values[idx];
    if (lam <= cut) break;
    const double scale = std::sqrt(lam);
    CMatrix k(d, m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t r = 0; r < d; ++r) k(r, i) = scale * e.vectors(i * d + r, idx);
    ops.push_back(k);
  }
  return ops;
}

Stinespring stinespring_minimal(const CpMap& f) {
  const std::vector<CMatrix> ops = kraus(f);
  const std::size_t m = f.dom_dim, d = f.cod_dim, r = ops.size();
  Stinespring st;
  st.multiplicity = r;
  st.v = CMatrix(m * r, d);
  for (std::size_t s = 0; s < r; ++s) {
    const CMatrix ks_adj = ops[s].adjoint();  // m x d
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t h = 0; h < d; ++h) st.v(i * r + s, h) = ks_adj(i, h);
  }
  if (r == 0) return st;

  // Certify minimality: {(E_{ij} (x) I_r) v e_h} spans C^{m r}.
  std::vector<CMatrix> family;
  family.reserve(m * m * d);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      // (E_{ij} (x) I_r) v places row block j of v into row block i.
      CMatrix w(m * r, d);
      for (std::size_t s = 0; s < r; ++s)
        for (std::size_t h = 0; h < d; ++h) w(i * r + s, h) = st.v(j * r + s, h);
      family.push_back(w);
    }
  const CMatrix basis = orthonormal_range(family, defaults::kRankTol);
  if (basis.cols() != m * r)
    throw InvariantViolation("stinespring_minimal: dilation space not minimal, rank " +
                             std::to_string(basis.cols()) + " of " + std::to_string(m * r));
  return st;
}

bool cp_leq(const CpMap& f, const CpMap& g) {
  if (f.dom_dim != g.dom_dim || f.cod_dim != g.cod_dim)
    throw ShapeMismatch("cp_leq: mismatched dimensions");
  CMatrix diff = g.choi - f.choi;
  return is_psd(hermitize(diff));
}

}  // namespace semimod
