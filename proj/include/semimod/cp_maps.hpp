#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "semimod/cmatrix.hpp"

namespace semimod {

/// Linear map M_m -> M_d stored by its Choi matrix: the (m*d) x (m*d)
/// block matrix whose (i,j) block is the image of E_{ij}. The Choi matrix is
/// the single source of truth; Kraus and Stinespring forms are derived views.
struct CpMap {
  std::size_t dom_dim = 0;  // m
  std::size_t cod_dim = 0;  // d
  CMatrix choi;             // (m*d) x (m*d)

  static CpMap from_images(std::size_t m, std::size_t d, const std::vector<CMatrix>& images);
  static CpMap identity(std::size_t n);
  /// X -> tr(X)/m * I_d; unital and CP.
  static CpMap normalized_trace(std::size_t m, std::size_t d);
  /// X -> X (x) I_r on C^m (x) C^r; the multiplicity-r representation of M_m.
  static CpMap multiplicity_rep(std::size_t m, std::size_t r);
  static CpMap from_kraus(std::size_t m, std::size_t d, const std::vector<CMatrix>& kraus_ops);
  static CpMap zero(std::size_t m, std::size_t d) { return CpMap{m, d, CMatrix(m * d, m * d)}; }

  CMatrix apply(const CMatrix& x) const;
  /// Image of the matrix unit E_{ij}.
  CMatrix image(std::size_t i, std::size_t j) const;
  bool is_unital(double tol = 1e-7) const;
  CpMap scaled(double factor) const;  // factor * map

  CpMap& operator+=(const CpMap& o);
  friend CpMap operator-(CpMap a, const CpMap& b) {
    a.choi -= b.choi;
    return a;
  }
};

struct CpWitness {
  double min_eig = 0.0;
  CMatrix eigvec;  // (m*d) column
};

/// Choi criterion; witness is filled with the bottom eigenpair either way.
bool is_cp(const CpMap& f, CpWitness* witness = nullptr);

/// f_k = id_{M_k} (x) f, acting blockwise on M_k(M_m).
CpMap amplify(const CpMap& f, std::size_t k);

/// Kraus decomposition; requires is_cp. Operators are d x m, count equals the
/// numerical Choi rank (eigenvalues > 1e-9 * lambda_max).
std::vector<CMatrix> kraus(const CpMap& f);

/// Minimal Stinespring form f(X) = v^* (X (x) I_r) v with r the Kraus rank.
/// Minimality (the dilation space is spanned by (X (x) I_r) v h) is verified,
/// not assumed.
struct Stinespring {
  std::size_t multiplicity = 0;  // r
  CMatrix v;                     // (m*r) x d
};
Stinespring stinespring_minimal(const CpMap& f);

/// f <= g in the CP order: choi(g) - choi(f) is PSD at tolerance.
bool cp_leq(const CpMap& f, const CpMap& g);

}  // namespace semimod
