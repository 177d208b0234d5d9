#include <doctest.h>

#include "semimod/dilation.hpp"
#include "semimod/eig.hpp"
#include "semimod/instance.hpp"
#include "semimod/rng.hpp"

using namespace semimod;

namespace {

DilationPair conjugated(const DilationPair& pair, const CMatrix& u1, const CMatrix& u2) {
  DilationPair out = pair;
  out.rho_multiplicity = 0;
  std::vector<CMatrix> rho_images;
  for (std::size_t i = 0; i < pair.shape.n; ++i)
    for (std::size_t j = 0; j < pair.shape.n; ++j)
      rho_images.push_back(u1 * pair.rho.image(i, j) * u1.adjoint());
  out.rho = CpMap::from_images(pair.shape.n, pair.k1_dim(), rho_images);
  out.v = u1 * pair.v;
  std::vector<CMatrix> psi_images;
  for (std::size_t m = 0; m < pair.shape.dim_e(); ++m)
    psi_images.push_back(u2 * pair.psi.image(m) * u1.adjoint());
  out.psi = ModuleMap::from_images(pair.shape, pair.k1_dim(), pair.k2_dim(), psi_images);
  out.w = u2 * pair.w;
  return out;
}

CMatrix random_unitary(Rng& rng, std::size_t n) {
  const CMatrix q = orthonormal_range(rng.gaussian_matrix(n, n), 1e-12);
  REQUIRE(q.cols() == n);
  return q;
}

// Pad a multiplicity-form pair with an orthogonal summand carrying the
// canonical module representation; V and W stay supported on the original.
DilationPair padded(const DilationPair& pair) {
  REQUIRE(pair.rho_multiplicity > 0);
  const std::size_t n = pair.shape.n, p = pair.shape.p, r = pair.rho_multiplicity;
  const std::size_t k2 = pair.k2_dim(), d1 = pair.d1;
  DilationPair out = pair;
  out.rho_multiplicity = r + 1;
  out.rho = CpMap::multiplicity_rep(n, r + 1);
  out.v = CMatrix(n * (r + 1), d1);
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t s = 0; s < r; ++s)
      for (std::size_t h = 0; h < d1; ++h) out.v(b * (r + 1) + s, h) = pair.v(b * r + s, h);
  std::vector<CMatrix> psi_images;
  for (std::size_t m = 0; m < pair.shape.dim_e(); ++m) {
    const CMatrix old = pair.psi.image(m);
    const CMatrix canon = e_basis(pair.shape, m);
    CMatrix img(k2 + p, n * (r + 1));
    for (std::size_t b = 0; b < n; ++b) {
      for (std::size_t s = 0; s < r; ++s)
        for (std::size_t row = 0; row < k2; ++row)
          img(row, b * (r + 1) + s) = old(row, b * r + s);
      for (std::size_t row = 0; row < p; ++row)
        img(k2 + row, b * (r + 1) + r) = canon(row, b);
    }
    psi_images.push_back(img);
  }
  out.psi = ModuleMap::from_images(pair.shape, n * (r + 1), k2 + p, psi_images);
  CMatrix w(k2 + p, pair.d2);
  w.set_block(0, 0, pair.w);
  out.w = w;
  out.minimal = false;
  return out;
}

ModuleMap doubled(const ModuleMap& psi) {
  std::vector<CMatrix> images;
  for (std::size_t m = 0; m < psi.shape.dim_e(); ++m)
    images.push_back(direct_sum(psi.image(m), psi.image(m)));
  return ModuleMap::from_images(psi.shape, 2 * psi.d1, 2 * psi.d2, images);
}

CpMap vector_state(const CMatrix& v) {
  const std::size_t n = v.rows();
  std::vector<CMatrix> images;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      CMatrix img(1, 1);
      img(0, 0) = std::conj(v(i, 0)) * v(j, 0);
      images.push_back(img);
    }
  return CpMap::from_images(n, 1, images);
}

}  // namespace

TEST_SUITE("dilation") {

TEST_CASE("corner_decompose of the identity representation") {
  const CpMap rep = CpMap::identity(2);
  const CornerParts parts = corner_decompose(rep, CMatrix::identity(2), ModuleShape{1, 1}, 1, 1);
  CHECK(parts.psi.d1 == 1);
  CHECK(parts.psi.d2 == 1);
  CHECK(std::abs(parts.psi.image(0)(0, 0) - Complex(1.0)) <= 1e-14);
  CHECK(std::abs(parts.w(0, 0) - Complex(1.0)) <= 1e-14);
  CHECK(std::abs(parts.v(0, 0) - Complex(1.0)) <= 1e-14);
  CHECK(parts.offcorner_max <= 1e-14);
}

TEST_CASE("corner_decompose with multiplicity two doubles the corners") {
  Rng rng(51);
  const CpMap rep = CpMap::multiplicity_rep(2, 2);
  CMatrix v_raw(4, 2);
  CMatrix w0 = rng.gaussian_matrix(2, 1), v0 = rng.gaussian_matrix(2, 1);
  v_raw.set_block(0, 0, w0);
  v_raw.set_block(2, 1, v0);
  const CornerParts parts = corner_decompose(rep, v_raw, ModuleShape{1, 1}, 1, 1);
  CHECK(parts.psi.d1 == 2);
  CHECK(parts.psi.d2 == 2);
  CHECK((parts.psi.image(0) - CMatrix::identity(2)).frobenius_norm() <= 1e-13);
  CHECK((parts.w - w0).frobenius_norm() <= 1e-13);
  CHECK((parts.v - v0).frobenius_norm() <= 1e-13);
}

TEST_CASE("corner_decompose rejects non-representations") {
  Rng rng(53);
  std::vector<CMatrix> images;
  for (std::size_t k = 0; k < 4; ++k) images.push_back(rng.gaussian_matrix(2, 2));
  const CpMap fake = CpMap::from_images(2, 2, images);
  CHECK_THROWS_AS(corner_decompose(fake, CMatrix::identity(2), ModuleShape{1, 1}, 1, 1),
                  NotRepresentation);
}

TEST_CASE("corner_decompose flags raw operators with off-corner mass") {
  const CpMap rep = CpMap::identity(2);
  CMatrix v_raw(2, 2);
  v_raw(0, 0) = 1.0;
  v_raw(0, 1) = 1.0;  // K2 row hit from the H1 column
  CHECK_THROWS_AS(corner_decompose(rep, v_raw, ModuleShape{1, 1}, 1, 1), ProjectionLeak);
}

TEST_CASE("corner_decompose reconstructs through the full extension pipeline") {
  // Explicit end-to-end route: solver extension -> block map -> Stinespring
  // -> corner split, checked against the instance corners.
  for (std::uint64_t seed : {201, 202, 203}) {
    const InstanceFile inst = gen("phi_map", ModuleShape{2, 1}, 2, 2, seed);
    const ExtensionResult ext = cp_extension_solve(inst.phi_mod, inst.phi);
    REQUIRE(ext.report.feasible);
    CpMap theta = assemble_block(*ext.psi, inst.phi_mod, inst.phi);
    theta.choi = psd_project(hermitize(theta.choi));
    const Stinespring st = stinespring_minimal(theta);
    const CpMap rep = CpMap::multiplicity_rep(inst.shape.linking_dim(), st.multiplicity);
    const CornerParts parts = corner_decompose(rep, st.v, inst.shape, inst.d1, inst.d2);
    double resid = 0.0;
    for (std::size_t m = 0; m < inst.shape.dim_e(); ++m) {
      const CMatrix got = parts.w.adjoint() * parts.psi.image(m) * parts.v;
      resid = std::max(resid, (got - inst.phi_mod.image(m)).frobenius_norm());
    }
    for (std::size_t i = 0; i < inst.shape.n; ++i)
      for (std::size_t j = 0; j < inst.shape.n; ++j) {
        const CMatrix got = parts.v.adjoint() * parts.rho.image(i, j) * parts.v;
        resid = std::max(resid, (got - inst.phi.image(i, j)).frobenius_norm());
      }
    CHECK(resid <= 1e-7);
  }
}

TEST_CASE("dilate on the scalar identity model") {
  CMatrix one(1, 1);
  one(0, 0) = 1.0;
  const ModuleMap phi_mod = ModuleMap::from_images(ModuleShape{1, 1}, 1, 1, {one});
  const CpMap phi = CpMap::identity(1);
  const DilationPair pair = dilate(phi_mod, phi);
  const PairResiduals res = validate_pair(pair, phi_mod, phi);
  CHECK(res.max_reconstruction() <= 1e-8);
  CHECK(res.max_structural() <= 1e-9);
  CHECK(pair.w_isometry);
  CHECK(res.w_isometry <= 1e-8);
}

TEST_CASE("dilate refuses instances that are not completely semi-phi") {
  CMatrix two(1, 1);
  two(0, 0) = 2.0;
  const ModuleMap phi_mod = ModuleMap::from_images(ModuleShape{1, 1}, 1, 1, {two});
  CHECK_THROWS_AS(dilate(phi_mod, CpMap::identity(1)), NotSemiPhi);
}

TEST_CASE("dilate handles the zero module map") {
  const ModuleShape shape{1, 1};
  const ModuleMap zero = ModuleMap::zero(shape, 1, 1);
  const CpMap phi = CpMap::identity(1);
  const DilationPair pair = dilate(zero, phi);
  const PairResiduals res = validate_pair(pair, zero, phi);
  CHECK(res.max_reconstruction() <= 1e-8);
  CHECK(pair.w_isometry);
  // phi unital implies V is an isometry.
  CMatrix vtv = pair.v.adjoint() * pair.v;
  vtv -= CMatrix::identity(1);
  CHECK(vtv.frobenius_norm() <= 1e-8);
}

TEST_CASE("dilate reconstructs generated instances with isometric W and V") {
  Rng rng(57);
  for (int rep = 0; rep < 3; ++rep) {
    const ModuleShape shape{1 + rng.below(2), 1 + rng.below(2)};
    const std::size_t d1 = 1 + rng.below(2), d2 = shape.p + rng.below(2);
    const InstanceFile inst = gen("phi_map", shape, d1, d2, 100 + rep);
    const DilationPair pair = dilate(inst.phi_mod, inst.phi);
    const PairResiduals res = validate_pair(pair, inst.phi_mod, inst.phi);
    CHECK(res.max_reconstruction() <= 1e-7);
    CHECK(res.max_structural() <= 1e-9);
    CHECK(res.w_isometry <= 1e-8);
    if (inst.phi.is_unital(1e-9)) {
      CMatrix vtv = pair.v.adjoint() * pair.v;
      vtv -= CMatrix::identity(pair.d1);
      CHECK(vtv.frobenius_norm() <= 1e-8);
    }
  }
}

TEST_CASE("minimize is the identity on already-minimal pairs") {
  const InstanceFile inst = gen("phi_map", ModuleShape{2, 2}, 2, 2, 7);
  const DilationPair pair = minimize(dilate(inst.phi_mod, inst.phi), inst.phi_mod, inst.phi);
  const DilationPair again = minimize(pair, inst.phi_mod, inst.phi);
  CHECK(again.k1_dim() == pair.k1_dim());
  CHECK(again.k2_dim() == pair.k2_dim());
  const auto [ci, cii] = check_minimal(pair);
  CHECK(ci);
  CHECK(cii);
}

TEST_CASE("minimize shrinks padded pairs back") {
  const InstanceFile inst = gen("phi_map", ModuleShape{2, 2}, 2, 2, 9);
  const DilationPair minimal =
      minimize(dilate(inst.phi_mod, inst.phi), inst.phi_mod, inst.phi);
  const DilationPair pad = padded(minimal);
  const PairResiduals pad_res = validate_pair(pad, inst.phi_mod, inst.phi);
  REQUIRE(pad_res.max_reconstruction() <= 1e-8);
  REQUIRE(pad_res.max_structural() <= 1e-8);
  const auto [ci, cii] = check_minimal(pad);
  CHECK_FALSE(ci);
  const DilationPair shrunk = minimize(pad, inst.phi_mod, inst.phi);
  CHECK(shrunk.k1_dim() == minimal.k1_dim());
  CHECK(shrunk.k2_dim() == minimal.k2_dim());
}

TEST_CASE("minimize collapses the zero pair to zero dilation spaces") {
  const ModuleShape shape{1, 1};
  const ModuleMap zero_mod = ModuleMap::zero(shape, 1, 1);
  const CpMap zero_phi = CpMap::zero(1, 1);
  const DilationPair pair = dilate(zero_mod, zero_phi);
  const DilationPair min_pair = minimize(pair, zero_mod, zero_phi);
  CHECK(min_pair.k1_dim() == 0);
  CHECK(min_pair.k2_dim() == 0);
  const auto [ci, cii] = check_minimal(min_pair);
  CHECK(ci);
  CHECK(cii);
}

TEST_CASE("minimized phi-map instances have coisometric W") {
  for (std::uint64_t seed : {21, 22, 23}) {
    const InstanceFile inst = gen("phi_map", ModuleShape{2, 1}, 2, 2, seed);
    const DilationPair pair =
        minimize(dilate(inst.phi_mod, inst.phi), inst.phi_mod, inst.phi);
    CMatrix wwt = pair.w * pair.w.adjoint();
    wwt -= CMatrix::identity(pair.k2_dim());
    CHECK(wwt.frobenius_norm() <= 1e-7);
    // The replacement W is a contraction either way.
    CHECK(spectral_norm(pair.w) <= 1.0 + 1e-9);
  }
}

TEST_CASE("equivalence of a pair with itself") {
  const InstanceFile inst = gen("phi_map", ModuleShape{2, 2}, 2, 2, 31);
  const DilationPair pair = minimize(dilate(inst.phi_mod, inst.phi), inst.phi_mod, inst.phi);
  const EquivalenceResult eq = equivalence_unitaries(pair, pair, inst.phi_mod, inst.phi);
  CHECK(eq.max_residual <= 1e-8);
  CMatrix id_check = eq.t1 - CMatrix::identity(pair.k1_dim());
  CHECK(id_check.frobenius_norm() <= 1e-7);
}

TEST_CASE("equivalence holds after conjugation by planted block unitaries") {
  Rng rng(61);
  const InstanceFile inst = gen("phi_map", ModuleShape{2, 2}, 2, 2, 33);
  const DilationPair pair = minimize(dilate(inst.phi_mod, inst.phi), inst.phi_mod, inst.phi);
  const CMatrix u1 = random_unitary(rng, pair.k1_dim());
  const CMatrix u2 = random_unitary(rng, pair.k2_dim());
  const DilationPair other = conjugated(pair, u1, u2);
  const PairResiduals res = validate_pair(other, inst.phi_mod, inst.phi);
  REQUIRE(res.max_reconstruction() <= 1e-8);
  const EquivalenceResult eq = equivalence_unitaries(pair, other, inst.phi_mod, inst.phi);
  CHECK(eq.max_residual <= 1e-7);
}

TEST_CASE("equivalence links two independent solver runs") {
  const InstanceFile inst = gen("phi_map", ModuleShape{2, 2}, 2, 2, 35);
  SolverOptions first;
  SolverOptions second;
  second.init_kind = 1;
  second.init_seed = 99;
  const DilationPair a =
      minimize(dilate(inst.phi_mod, inst.phi, first), inst.phi_mod, inst.phi);
  const DilationPair b =
      minimize(dilate(inst.phi_mod, inst.phi, second), inst.phi_mod, inst.phi);
  CHECK(a.k1_dim() == b.k1_dim());
  CHECK(a.k2_dim() == b.k2_dim());
  const EquivalenceResult eq = equivalence_unitaries(a, b, inst.phi_mod, inst.phi);
  CHECK(eq.max_residual <= 1e-6);
}

TEST_CASE("equivalence rejects pairs from different instances") {
  const InstanceFile one = gen("phi_map", ModuleShape{2, 2}, 2, 2, 41);
  const InstanceFile two = gen("phi_map", ModuleShape{2, 2}, 2, 2, 42);
  const DilationPair a = minimize(dilate(one.phi_mod, one.phi), one.phi_mod, one.phi);
  const DilationPair b = minimize(dilate(two.phi_mod, two.phi), two.phi_mod, two.phi);
  CHECK_THROWS_AS(equivalence_unitaries(a, b, one.phi_mod, one.phi), NotEquivalent);
}

TEST_CASE("invariant pair dimension of the scalar identity model is one") {
  CMatrix one(1, 1);
  one(0, 0) = 1.0;
  const ModuleMap psi = ModuleMap::from_images(ModuleShape{1, 1}, 1, 1, {one});
  CHECK(invariant_pair_dimension(psi) == 1);
}

TEST_CASE("invariant pair dimension of a doubled map is four") {
  CMatrix one(1, 1);
  one(0, 0) = 1.0;
  const ModuleMap psi = ModuleMap::from_images(ModuleShape{1, 1}, 1, 1, {one});
  CHECK(invariant_pair_dimension(doubled(psi)) == 4);
}

TEST_CASE("canonical multiplicity-one module representation is irreducible") {
  const ModuleShape shape{2, 2};
  std::vector<CMatrix> images;
  for (std::size_t m = 0; m < shape.dim_e(); ++m) images.push_back(e_basis(shape, m));
  const ModuleMap canon = ModuleMap::from_images(shape, 2, 2, images);
  CHECK(invariant_pair_dimension(canon) == 1);
}

TEST_CASE("identity map is pure") { CHECK(is_pure_ucp(CpMap::identity(2))); }

TEST_CASE("depolarizing map is not pure") {
  CHECK_FALSE(is_pure_ucp(CpMap::normalized_trace(2, 2)));
}

TEST_CASE("vector states are pure") {
  Rng rng(63);
  CMatrix v = rng.gaussian_matrix(2, 1);
  v *= Complex(1.0 / v.frobenius_norm());
  CHECK(is_pure_ucp(vector_state(v)));
}

TEST_CASE("purity requires unitality") {
  CHECK_THROWS_AS(is_pure_ucp(CpMap::normalized_trace(2, 2).scaled(0.5)), NotUnital);
}

}  // TEST_SUITE
