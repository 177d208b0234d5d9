#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "semimod/cp_maps.hpp"
#include "semimod/module_algebra.hpp"

namespace semimod {

/// Linear map Phi: E = M_{p x n} -> B(H1, H2) stored over the standard basis
/// of E; column m of mat is the row-major vectorization of Phi(e_m).
struct ModuleMap {
  ModuleShape shape;
  std::size_t d1 = 0;  // dim H1
  std::size_t d2 = 0;  // dim H2
  CMatrix mat;         // (d2*d1) x (p*n)

  static ModuleMap from_images(const ModuleShape& shape, std::size_t d1, std::size_t d2,
                               const std::vector<CMatrix>& images);
  static ModuleMap zero(const ModuleShape& shape, std::size_t d1, std::size_t d2) {
    return ModuleMap{shape, d1, d2, CMatrix(d2 * d1, shape.dim_e())};
  }

  /// Phi(e_m) as a d2 x d1 matrix.
  CMatrix image(std::size_t m) const;
  CMatrix eval(const CMatrix& x) const;
  ModuleMap scaled(double factor) const;
};

enum class Verdict { kCompletelySemiPhi, kNotSemiPhi, kUndecided };

/// A matrix-level element exhibiting a semi-phi violation together with the
/// direction along which the defect is negative.
struct SemiPhiWitness {
  std::size_t level = 0;                      // k
  std::vector<std::vector<CMatrix>> element;  // k x k array over E
  CMatrix direction;                          // (k*d1) x 1
  double defect_value = 0.0;                  // direction^* defect direction
};

struct SolveReport {
  bool feasible = false;
  double residual = 0.0;  // negative part of the final Choi min eigenvalue
  std::size_t iterations = 0;
};

struct SolverOptions {
  double tol = 1e-9;             // successive-iterate Frobenius stop
  std::size_t max_iter = 50000;  // Dykstra iteration budget
  int init_kind = 0;             // 0: normalized-trace start; 1: seeded random unital start
  std::uint64_t init_seed = 0;
};

struct Certificate {
  Verdict verdict = Verdict::kUndecided;
  double gram_min_eig = 0.0;
  std::optional<SemiPhiWitness> witness;  // present for NotSemiPhi
  std::optional<CpMap> psi;               // present for CompletelySemiPhi
  SolveReport solve;
};

/// phi_k(<X,X>) - Phi_k(X)^* Phi_k(X) for a k x k element X over E.
CMatrix defect_level(const ModuleMap& phi_mod, const CpMap& phi, std::size_t k,
                     const std::vector<std::vector<CMatrix>>& x);

struct GramResult {
  CMatrix gram;  // (p*n*d1) square, blocks phi(<e_m,e_l>) - Phi(e_m)^* Phi(e_l)
  double min_eig = 0.0;
  Verdict verdict = Verdict::kUndecided;
  std::optional<SemiPhiWitness> witness;
};

/// Finite criterion for the completely semi-phi property: the basis Gram
/// matrix of the defect kernel is PSD iff the defect is positive at every
/// matrix level. A negative eigenvector folds into a level-d1 witness whose
/// quadratic form reproduces the minimum eigenvalue exactly.
GramResult gram_kernel(const ModuleMap& phi_mod, const CpMap& phi);

/// Block map Theta on L_1(E) = M_{p+n} with corners (psi, Phi, phi).
CpMap assemble_block(const CpMap& psi, const ModuleMap& phi_mod, const CpMap& phi);

/// Constraint on the 11-corner when solving for a CP extension.
enum class CornerTarget { kUnital, kZeroSum, kFree };

/// Orthogonal projection onto the affine set of Choi matrices of block maps
/// with outer corners (Phi, phi) and the stated 11-corner sum constraint.
CMatrix project_corner_affine(CMatrix choi, const ModuleMap& phi_mod, const CpMap& phi,
                              CornerTarget target);

/// 11-corner map read off a block Choi matrix.
CpMap psi_from_choi(const CMatrix& choi, const ModuleShape& shape, std::size_t d1, std::size_t d2);

struct ExtensionResult {
  SolveReport report;
  std::optional<CpMap> psi;
};

/// Dykstra alternating projections between the PSD cone and the corner
/// constraints; feasibility semantics are one-sided (failure means the budget
/// was exhausted, not that no extension exists).
ExtensionResult cp_extension_solve(const ModuleMap& phi_mod, const CpMap& phi,
                                   const SolverOptions& opts = {},
                                   CornerTarget target = CornerTarget::kUnital);

/// gram_kernel, then cp_extension_solve when the Gram verdict is PSD.
Certificate certify(const ModuleMap& phi_mod, const CpMap& phi, const SolverOptions& opts = {});

}  // namespace semimod
