#include "semimod/eig.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace semimod {

namespace {

struct Rotation {
  double c = 1.0;
  double s = 0.0;
  Complex phase = 1.0;  // e^{-i arg(beta)}
};

// Unitary J = [[c, -s], [s*phase, c*phase]] diagonalizing the Hermitian
// 2x2 [[alpha, beta], [conj(beta), gamma]] via J^* A J.
Rotation make_rotation(double alpha, double gamma, Complex beta) {
  Rotation r;
  const double b = std::abs(beta);
  if (b == 0.0) return r;
  r.phase = std::conj(beta) / b;
  const double tau = (gamma - alpha) / (2.0 * b);
  const double sign = tau >= 0.0 ? 1.0 : -1.0;
  const double t = -sign / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
  r.c = 1.0 / std::sqrt(1.0 + t * t);
  r.s = t * r.c;
  return r;
}

double off_diag_norm(const CMatrix& a) {
  double s = 0.0;
  const std::size_t n = a.rows();
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q < n; ++q)
      if (p != q) s += std::norm(a(p, q));
  return std::sqrt(s);
}

constexpr int kMaxSweeps = 100;
constexpr int kMaxSvdSweeps = 60;

}  // namespace

EigResult eig_hermitian(const CMatrix& m) {
  if (m.rows() != m.cols()) throw NotHermitian("matrix is not square");
  const double defect = hermiticity_defect(m);
  if (defect > defaults::kHermTol * (1.0 + m.max_abs()))
    throw NotHermitian("hermiticity defect " + std::to_string(defect));

  const std::size_t n = m.rows();
  EigResult res;
  res.vectors = CMatrix::identity(n);
  if (n == 0) return res;

  CMatrix a = hermitize(m);
  CMatrix& u = res.vectors;
  const double scale = a.frobenius_norm();
  const double stop = 1e-14 * scale;

  bool converged = off_diag_norm(a) <= stop;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const Complex beta = a(p, q);
        if (std::abs(beta) == 0.0) continue;
        const double alpha = a(p, p).real();
        const double gamma = a(q, q).real();
        const Rotation r = make_rotation(alpha, gamma, beta);
        const Complex jpp = r.c, jpq = -r.s;
        const Complex jqp = r.s * r.phase, jqq = r.c * r.phase;

        // Columns p, q of A and U pick up J on the right.
        for (std::size_t k = 0; k < n; ++k) {
          const Complex akp = a(k, p), akq = a(k, q);
          a(k, p) = akp * jpp + akq * jqp;
          a(k, q) = akp * jpq + akq * jqq;
          const Complex ukp = u(k, p), ukq = u(k, q);
          u(k, p) = ukp * jpp + ukq * jqp;
          u(k, q) = ukp * jpq + ukq * jqq;
        }
        // Rows p, q pick up J^* on the left.
        for (std::size_t k = 0; k < n; ++k) {
          const Complex apk = a(p, k), aqk = a(q, k);
          a(p, k) = std::conj(jpp) * apk + std::conj(jqp) * aqk;
          a(q, k) = std::conj(jpq) * apk + std::conj(jqq) * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
      }
    }
    converged = off_diag_norm(a) <= stop;
  }
  if (!converged) throw NoConvergence("jacobi sweep budget exhausted");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });

  res.values.resize(n);
  CMatrix sorted(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    res.values[k] = a(order[k], order[k]).real();
    for (std::size_t i = 0; i < n; ++i) sorted(i, k) = u(i, order[k]);
  }
  res.vectors = sorted;
  return res;
}

double min_eig_hermitian(const CMatrix& m) {
  if (m.rows() == 0) return 0.0;
  return eig_hermitian(m).values.front();
}

bool is_psd(const CMatrix& m, double tol) {
  return min_eig_hermitian(m) >= -tol * (1.0 + m.frobenius_norm());
}

namespace {

CMatrix assemble_from_eig(const EigResult& e, const std::vector<double>& lam) {
  const std::size_t n = e.values.size();
  CMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Complex s = 0.0;
      for (std::size_t k = 0; k < n; ++k)
        s += e.vectors(i, k) * lam[k] * std::conj(e.vectors(j, k));
      out(i, j) = s;
    }
  return out;
}

}  // namespace

CMatrix psd_project(const CMatrix& m) {
  EigResult e = eig_hermitian(m);
  std::vector<double> lam = e.values;
  for (auto& v : lam) v = std::max(v, 0.0);
  return assemble_from_eig(e, lam);
}

CMatrix psd_sqrt(const CMatrix& m) {
  EigResult e = eig_hermitian(m);
  const double floor = -defaults::kPsdTol * (1.0 + m.frobenius_norm());
  std::vector<double> lam = e.values;
  for (auto& v : lam) {
    if (v < floor) throw NotPositive("eigenvalue " + std::to_string(v) + " below PSD tolerance");
    v = std::sqrt(std::max(v, 0.0));
  }
  return assemble_from_eig(e, lam);
}

SvdResult svd(const CMatrix& a) {
  const std::size_t h = a.rows(), w = a.cols();
  CMatrix cols = a;
  CMatrix v = CMatrix::identity(w);

  for (int sweep = 0; sweep < kMaxSvdSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t i = 0; i + 1 < w; ++i) {
      for (std::size_t j = i + 1; j < w; ++j) {
        double ni = 0.0, nj = 0.0;
        Complex beta = 0.0;
        for (std::size_t k = 0; k < h; ++k) {
          ni += std::norm(cols(k, i));
          nj += std::norm(cols(k, j));
          beta += std::conj(cols(k, i)) * cols(k, j);
        }
        if (ni == 0.0 || nj == 0.0) continue;
        if (std::abs(beta) <= 1e-15 * std::sqrt(ni * nj)) continue;
        rotated = true;
        const Rotation r = make_rotation(ni, nj, beta);
        const Complex jii = r.c, jij = -r.s;
        const Complex jji = r.s * r.phase, jjj = r.c * r.phase;
        for (std::size_t k = 0; k < h; ++k) {
          const Complex ci = cols(k, i), cj = cols(k, j);
          cols(k, i) = ci * jii + cj * jji;
          cols(k, j) = ci * jij + cj * jjj;
        }
        for (std::size_t k = 0; k < w; ++k) {
          const Complex vi = v(k, i), vj = v(k, j);
          v(k, i) = vi * jii + vj * jji;
          v(k, j) = vi * jij + vj * jjj;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> norms(w);
  for (std::size_t j = 0; j < w; ++j) {
    double s = 0.0;
    for (std::size_t k = 0; k < h; ++k) s += std::norm(cols(k, j));
    norms[j] = std::sqrt(s);
  }
  std::vector<std::size_t> order(w);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return norms[i] > norms[j]; });

  SvdResult res;
  const std::size_t k = std::min(h, w);
  res.sigma.resize(k);
  res.u = CMatrix(h, k);
  res.v = CMatrix(w, w);
  for (std::size_t c = 0; c < w; ++c) {
    const std::size_t src = order[c];
    for (std::size_t r = 0; r < w; ++r) res.v(r, c) = v(r, src);
    if (c < k) {
      res.sigma[c] = norms[src];
      if (norms[src] > 0.0)
        for (std::size_t r = 0; r < h; ++r) res.u(r, c) = cols(r, src) / norms[src];
    }
  }
  return res;
}

std::size_t numeric_rank(const CMatrix& a, double rank_tol) {
  if (a.rows() == 0 || a.cols() == 0) return 0;
  const SvdResult s = svd(a);
  if (s.sigma.empty() || s.sigma[0] == 0.0) return 0;
  const double cut = rank_tol * s.sigma[0];
  std::size_t r = 0;
  while (r < s.sigma.size() && s.sigma[r] >= cut) ++r;
  return r;
}

CMatrix orthonormal_range(const CMatrix& a, double rank_tol) {
  if (rank_tol <= 0.0) throw Error("rank_tol must be positive");
  if (a.cols() == 0) return CMatrix(a.rows(), 0);
  const SvdResult s = svd(a);
  if (s.sigma.empty() || s.sigma[0] == 0.0) return CMatrix(a.rows(), 0);
  const double cut = rank_tol * s.sigma[0];
  std::size_t r = 0;
  while (r < s.sigma.size() && s.sigma[r] >= cut) ++r;
  return s.u.block(0, 0, a.rows(), r);
}

CMatrix orthonormal_range(const std::vector<CMatrix>& columns, double rank_tol) {
  if (columns.empty()) throw EmptyInput("orthonormal_range needs at least one vector");
  const std::size_t h = columns.front().rows();
  std::size_t total = 0;
  for (const auto& c : columns) {
    if (c.rows() != h) throw ShapeMismatch("orthonormal_range vector heights differ");
    total += c.cols();
  }
  CMatrix a(h, total);
  std::size_t at = 0;
  for (const auto& c : columns) {
    a.set_block(0, at, c);
    at += c.cols();
  }
  return orthonormal_range(a, rank_tol);
}

CMatrix nullspace(const CMatrix& a, double rank_tol) {
  if (a.cols() == 0) return CMatrix(0, 0);
  if (a.rows() == 0) return CMatrix::identity(a.cols());
  const SvdResult s = svd(a);
  const std::size_t w = a.cols();
  std::size_t r = 0;
  if (!s.sigma.empty() && s.sigma[0] > 0.0) {
    const double cut = rank_tol * s.sigma[0];
    while (r < s.sigma.size() && s.sigma[r] >= cut) ++r;
  }
  return s.v.block(0, r, w, w - r);
}

CMatrix pinv(const CMatrix& a, double rel_cutoff) {
  if (a.rows() == 0 || a.cols() == 0) return CMatrix(a.cols(), a.rows());
  const SvdResult s = svd(a);
  CMatrix out(a.cols(), a.rows());
  if (s.sigma.empty() || s.sigma[0] == 0.0) return out;
  const double cut = rel_cutoff * s.sigma[0];
  for (std::size_t k = 0; k < s.sigma.size(); ++k) {
    if (s.sigma[k] < cut || s.sigma[k] == 0.0) continue;
    const double inv = 1.0 / s.sigma[k];
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const Complex vik = s.v(i, k) * inv;
      if (vik == Complex(0.0)) continue;
      for (std::size_t j = 0; j < a.rows(); ++j) out(i, j) += vik * std::conj(s.u(j, k));
    }
  }
  return out;
}

CMatrix solve_lstsq(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows())
    throw ShapeMismatch("solve_lstsq row counts " + std::to_string(a.rows()) + " vs " +
                        std::to_string(b.rows()));
  return pinv(a) * b;
}

double condition_at_rank(const CMatrix& a, std::size_t expected_rank) {
  if (expected_rank == 0) return 1.0;
  const SvdResult s = svd(a);
  if (s.sigma.empty() || s.sigma[0] == 0.0 || expected_rank > s.sigma.size()) return 1e300;
  const double sk = s.sigma[expected_rank - 1];
  if (sk <= 0.0) return 1e300;
  return s.sigma[0] / sk;
}

double spectral_norm(const CMatrix& a) {
  if (a.rows() == 0 || a.cols() == 0) return 0.0;
  const SvdResult s = svd(a);
  return s.sigma.empty() ? 0.0 : s.sigma[0];
}

}  // namespace semimod
