#pragma once

#include <cstddef>
#include <tuple>
#include <vector>

#include "semimod/cmatrix.hpp"

namespace semimod {

/// The concrete model: A = M_n, E = M_{p x n} as a right Hilbert A-module
/// with <x,y> = x^* y, K(E) = M_p, linking algebra L_1(E) = M_{p+n}.
struct ModuleShape {
  std::size_t p = 1;  // K(E) side
  std::size_t n = 1;  // algebra side

  std::size_t dim_e() const { return p * n; }
  std::size_t linking_dim() const { return p + n; }
  bool operator==(const ModuleShape&) const = default;
};

/// Element of L_1(E): (p+n) x (p+n) block matrix [[u, x], [y^*, a]].
struct LinkingElement {
  ModuleShape shape;
  CMatrix u;  // p x p
  CMatrix x;  // p x n
  CMatrix y;  // p x n
  CMatrix a;  // n x n
};

/// Element of the operator system S_A(E): [[lambda I_p, x], [y^*, a]].
struct SystemElement {
  ModuleShape shape;
  Complex lambda = 0.0;
  CMatrix x;  // p x n
  CMatrix y;  // p x n
  CMatrix a;  // n x n
};

/// Standard basis of E, row-major: m = i*n + j -> E_{ij}.
CMatrix e_basis(const ModuleShape& shape, std::size_t m);

/// <x,y> = x^* y, conjugate-linear in the first slot.
CMatrix inner_product(const ModuleShape& shape, const CMatrix& x, const CMatrix& y);

/// Inner product of k x k matrices over E: block (i,j) = sum_s <X_si, Y_sj>.
CMatrix amplify_inner(const ModuleShape& shape, std::size_t k,
                      const std::vector<std::vector<CMatrix>>& x,
                      const std::vector<std::vector<CMatrix>>& y);

/// Rank-one module operator x (x) y acting as z -> x<y,z>; concretely x y^*.
CMatrix rank_one_op(const ModuleShape& shape, const CMatrix& x, const CMatrix& y);

/// Whether [[I_p, x], [x^*, a]] >= 0; equivalent to <x,x> <= a.
bool lemma_two_by_two_positive(const ModuleShape& shape, const CMatrix& x, const CMatrix& a);

CMatrix embed_linking(const LinkingElement& el);
CMatrix embed_linking(const SystemElement& el);

/// Inverse of embed_linking: corners (u, x, y, a) of a (p+n) square matrix.
LinkingElement extract_corners(const ModuleShape& shape, const CMatrix& m);

}  // namespace semimod
