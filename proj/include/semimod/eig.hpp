#pragma once

#include <cstddef>
#include <vector>

#include "semimod/cmatrix.hpp"

namespace semimod {

struct EigResult {
  std::vector<double> values;  // ascending
  CMatrix vectors;             // unitary, column k pairs with values[k]
};

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
/// Deterministic sweep order (row-major upper triangle), so identical inputs
/// give bit-identical output.
EigResult eig_hermitian(const CMatrix& m);

double min_eig_hermitian(const CMatrix& m);

/// PSD decision at the repo-wide relative tolerance.
bool is_psd(const CMatrix& m, double tol = defaults::kPsdTol);

/// Frobenius-nearest PSD matrix: clamp negative eigenvalues to zero.
CMatrix psd_project(const CMatrix& m);

/// Square root of a PSD matrix; eigenvalues in [-kPsdTol*(1+norm), 0) are
/// clamped to zero, values below that range throw NotPositive.
CMatrix psd_sqrt(const CMatrix& m);

struct SvdResult {
  CMatrix u;                  // rows(a) x k, orthonormal columns
  std::vector<double> sigma;  // descending, length k = min(rows, cols)
  CMatrix v;                  // cols(a) x cols(a), unitary
};

/// Singular value decomposition via one-sided Jacobi; a = u * diag(sigma) * v^*
/// restricted to the leading min(rows, cols) columns of v.
SvdResult svd(const CMatrix& a);

std::size_t numeric_rank(const CMatrix& a, double rank_tol = defaults::kRankTol);

/// Orthonormal basis of the numerical column span; singular values below
/// rank_tol * sigma_max are discarded. Throws EmptyInput when no vectors.
CMatrix orthonormal_range(const std::vector<CMatrix>& columns, double rank_tol = defaults::kRankTol);
CMatrix orthonormal_range(const CMatrix& a, double rank_tol = defaults::kRankTol);

/// Orthonormal basis of the right nullspace.
CMatrix nullspace(const CMatrix& a, double rank_tol = defaults::kRankTol);

/// Moore-Penrose pseudoinverse with a relative singular-value cutoff.
CMatrix pinv(const CMatrix& a, double rel_cutoff = 1e-12);

/// Minimum-norm least-squares solution of A X = B.
CMatrix solve_lstsq(const CMatrix& a, const CMatrix& b);

/// sigma_max / sigma_k where k is the expected rank (1-based); infinity-like
/// values are returned as a large number when sigma_k vanishes.
double condition_at_rank(const CMatrix& a, std::size_t expected_rank);

/// Operator (spectral) norm.
double spectral_norm(const CMatrix& a);

}  // namespace semimod
