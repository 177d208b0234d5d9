#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "semimod/dilation.hpp"

namespace semimod {

/// Block-diagonal element P + Q of the commutant of a dilated module map:
/// P Psi(x) = Psi(x) Q and Q Psi(x)^* = Psi(x)^* P for all x.
struct CommutantElement {
  CMatrix p;  // on K2
  CMatrix q;  // on K1
};

/// Basis of the commutant as the nullspace of the stacked intertwining
/// relations. The span is a *-algebra; closure under products is a property
/// checked by tests, not enforced here.
std::vector<CommutantElement> commutant_basis(const ModuleMap& psi);

/// Same commutant through the representation structure of a dilation pair:
/// for an exact multiplicity-form rho the K1 side is I_n (x) M_r and the K2
/// side is solved per basis element. Falls back to the generic nullspace.
std::vector<CommutantElement> commutant_basis(const DilationPair& pair);

double commutant_residual(const ModuleMap& psi, const CommutantElement& el);

struct OrderReport {
  bool leq = false;
  /// True when the negative answer is certified by a necessary condition
  /// (Choi eigenvalue) rather than by budget exhaustion.
  bool certified_negative = false;
  SolveReport solve;
};

/// Literal order: the difference on the operator system (scalar 11-corner
/// pinned to zero) admits a CP extension to the linking algebra.
OrderReport order_leq_literal(const CpMap& phi1, const ModuleMap& phi_mod1, const CpMap& phi2,
                              const ModuleMap& phi_mod2, const SolverOptions& opts = {});

struct RelaxedOrderReport {
  bool leq = false;
  bool certified_negative = false;
  SolveReport solve;
  std::optional<CpMap> theta1;  // CP extension of (phi1, Phi1), 11-corner free
  std::optional<CpMap> theta2;  // CP extension of (phi2, Phi2) with theta2 - theta1 CP
};

/// Relaxed order: joint feasibility over two Choi variables, C1 PSD and
/// C2 - C1 PSD, with fixed outer corners and free 11-corners.
RelaxedOrderReport order_leq_relaxed(const CpMap& phi1, const ModuleMap& phi_mod1,
                                     const CpMap& phi2, const ModuleMap& phi_mod2,
                                     const SolverOptions& opts = {});

struct Subordinate {
  CpMap phi_s;          // a -> V^* S rho(a) V
  ModuleMap phi_mod_ts; // x -> W^* T^{1/2} Psi(x) S^{1/2} V
  CpMap extension;      // the explicit CP extension witnessing CP-extendability
};

/// Forward construction of a subordinate pair from a positive T + S in the
/// commutant of the pair's module map.
Subordinate construct_subordinate(const DilationPair& pair, const CMatrix& t, const CMatrix& s);

struct RnResiduals {
  double commutant = 0.0;        // derivative against the commutant relations
  double recon_phi_mod = 0.0;    // Phi1 = W^* T^{1/2} Psi S^{1/2} W'
  double recon_phi = 0.0;        // phi1 = W'^* S rho W'
  double route_agreement = 0.0;  // two independent solves of the sesquilinear system
  double condition = 0.0;        // spanning-family condition number
  double band_excursion = 0.0;   // worst eigenvalue distance outside [0, 1]
  std::size_t order_iterations = 0;
};

struct RnResult {
  DilationPair pair;            // dilation pair for (phi2, Phi2), Psi nondegenerate
  CommutantElement derivative;  // the positive contraction T + S
  RnResiduals residuals;
};

/// Radon-Nikodym derivative of (phi1, Phi1) with respect to (phi2, Phi2):
/// the unique positive contraction in the commutant expressing the smaller
/// pair through a dilation of the larger one.
RnResult rn_derivative(const CpMap& phi1, const ModuleMap& phi_mod1, const CpMap& phi2,
                       const ModuleMap& phi_mod2, const SolverOptions& opts = {});

}  // namespace semimod
