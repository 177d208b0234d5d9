#pragma once

#include <cstddef>
#include <utility>

#include "semimod/semiphi.hpp"

namespace semimod {

/// Dilation pair ((rho, K1, V), (Psi, K2, W)) for a pair (phi, Phi):
/// rho a unital *-representation of M_n on K1, Psi a rho-map E -> B(K1, K2),
/// Phi(x) = W^* Psi(x) V and phi(a) = V^* rho(a) V.
struct DilationPair {
  ModuleShape shape;
  std::size_t d1 = 0;  // dim H1
  std::size_t d2 = 0;  // dim H2

  CpMap rho;                         // M_n -> B(K1)
  std::size_t rho_multiplicity = 0;  // > 0 when rho(a) = a (x) I_r in these coordinates
  CMatrix v;                         // K1 x d1
  ModuleMap psi;                     // E -> B(K1, K2); psi.d1 = dim K1, psi.d2 = dim K2
  CMatrix w;                         // K2 x d2
  bool minimal = false;
  bool w_isometry = false;

  std::size_t k1_dim() const { return rho.cod_dim; }
  std::size_t k2_dim() const { return psi.d2; }
  CMatrix rho_apply(const CMatrix& a) const { return rho.apply(a); }
};

struct PairResiduals {
  double rep_mult = 0.0;     // rho(E_I0)rho(E_0J) vs rho(E_IJ)
  double rep_adjoint = 0.0;  // rho(X)^* vs rho(X^*)
  double rep_unital = 0.0;
  double psi_rho_map = 0.0;  // Psi(x)^*Psi(y) vs rho(<x,y>)
  double recon_phi = 0.0;    // V^* rho(a) V vs phi(a)
  double recon_phi_mod = 0.0;  // W^* Psi(x) V vs Phi(x)
  double w_isometry = 0.0;   // ||W^*W - I||

  double max_structural() const;
  double max_reconstruction() const;
};

PairResiduals validate_pair(const DilationPair& pair, const ModuleMap& phi_mod, const CpMap& phi);

/// The representation of K(E) = M_p induced on K2 by a nondegenerate rho-map:
/// sigma(x (x) y) = Psi(x) Psi(y)^*, averaged over the module basis.
CpMap sigma_of(const ModuleMap& psi);

struct CornerParts {
  CpMap sigma;  // M_p -> B(K2)
  CpMap rho;    // M_n -> B(K1)
  ModuleMap psi;
  CMatrix w;  // K2 x d2
  CMatrix v;  // K1 x d1
  double offcorner_max = 0.0;
};

/// Split a unital representation of the linking algebra M_{p+n} along the two
/// corner projections and carve the raw Stinespring operator into the W/V
/// blocks; the off-corner blocks must vanish.
CornerParts corner_decompose(const CpMap& rep, const CMatrix& v_raw, const ModuleShape& shape,
                             std::size_t d1, std::size_t d2);

/// Certify, extend, Stinespring-dilate, and decompose into a dilation pair;
/// W is an isometry, and so is V when phi is unital.
DilationPair dilate(const ModuleMap& phi_mod, const CpMap& phi, const SolverOptions& opts = {});

/// Two-stage compression to a minimal dilation pair: restrict K1 to
/// [rho(A) V H1], then K2 to [Psi(E) K1]. The replacement W stays contractive.
DilationPair minimize(const DilationPair& pair, const ModuleMap& phi_mod, const CpMap& phi);

/// (i) [rho(A) V H1] = K1 and (ii) [Psi(E) K1] = K2, decided at rank_tol.
std::pair<bool, bool> check_minimal(const DilationPair& pair);

struct EquivalenceResult {
  CMatrix t1;  // K1(a) -> K1(b)
  CMatrix t2;  // K2(a) -> K2(b)
  double max_residual = 0.0;  // worst intertwining/unitarity residual
};

/// Unitaries linking two minimal dilation pairs of the same (phi, Phi):
/// T1 V = V', T1 rho = rho' T1, T2 W = W', T2 Psi = Psi' T1, and conjugation
/// carries sigma to sigma'.
EquivalenceResult equivalence_unitaries(const DilationPair& a, const DilationPair& b,
                                        const ModuleMap& phi_mod, const CpMap& phi);

/// Dimension of the block-diagonal commutant {P + Q : P Psi(x) = Psi(x) Q,
/// Q Psi(x)^* = Psi(x)^* P}; computed as a nullspace of the stacked
/// intertwining system. The map is irreducible iff this is 1.
std::size_t invariant_pair_dimension(const ModuleMap& psi);

/// A unital CP map is pure iff the module map of its minimal dilation pair
/// over E = A is irreducible.
bool is_pure_ucp(const CpMap& phi, const SolverOptions& opts = {});

/// View a CP map M_n -> M_d as a module map on E = A = M_n.
ModuleMap as_module_map(const CpMap& phi);

}  // namespace semimod
