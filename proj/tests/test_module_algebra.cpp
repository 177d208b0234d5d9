#include <doctest.h>

#include "semimod/eig.hpp"
#include "semimod/module_algebra.hpp"
#include "semimod/rng.hpp"

using namespace semimod;

TEST_SUITE("module_algebra") {

TEST_CASE("inner products of column vectors") {
  const ModuleShape shape{2, 1};
  CMatrix x(2, 1), y(2, 1);
  x(0, 0) = 1.0;
  y(1, 0) = 1.0;
  CHECK(std::abs(inner_product(shape, x, y)(0, 0)) <= 1e-15);

  CMatrix both(2, 1);
  both(0, 0) = 1.0;
  both(1, 0) = 1.0;
  CHECK(std::abs(inner_product(shape, both, both)(0, 0) - Complex(2.0)) <= 1e-15);

  CMatrix xi(2, 1), e1(2, 1);
  xi(0, 0) = Complex(0.0, 1.0);
  e1(0, 0) = 1.0;
  CHECK(std::abs(inner_product(shape, xi, e1)(0, 0) - Complex(0.0, -1.0)) <= 1e-15);
}

TEST_CASE("amplify_inner at level one reduces to the inner product") {
  Rng rng(3);
  const ModuleShape shape{2, 2};
  const CMatrix x = rng.gaussian_matrix(2, 2), y = rng.gaussian_matrix(2, 2);
  const CMatrix amp = amplify_inner(shape, 1, {{x}}, {{y}});
  CHECK((amp - inner_product(shape, x, y)).frobenius_norm() <= 1e-14);
}

TEST_CASE("amplify_inner of a block-diagonal element") {
  Rng rng(5);
  const ModuleShape shape{2, 2};
  const CMatrix x = rng.gaussian_matrix(2, 2);
  const CMatrix zero(2, 2);
  const CMatrix amp = amplify_inner(shape, 2, {{x, zero}, {zero, x}}, {{x, zero}, {zero, x}});
  const CMatrix gram = inner_product(shape, x, x);
  CHECK((amp.block(0, 0, 2, 2) - gram).frobenius_norm() <= 1e-13);
  CHECK((amp.block(2, 2, 2, 2) - gram).frobenius_norm() <= 1e-13);
  CHECK(amp.block(0, 2, 2, 2).frobenius_norm() <= 1e-13);
}

TEST_CASE("amplify_inner agrees with the flattened inner product") {
  Rng rng(7);
  const ModuleShape shape{2, 2};
  const std::size_t k = 2;
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<std::vector<CMatrix>> x(k, std::vector<CMatrix>(k)), y = x;
    CMatrix flat_x(k * shape.p, k * shape.n), flat_y(k * shape.p, k * shape.n);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        x[i][j] = rng.gaussian_matrix(shape.p, shape.n);
        y[i][j] = rng.gaussian_matrix(shape.p, shape.n);
        flat_x.set_block(i * shape.p, j * shape.n, x[i][j]);
        flat_y.set_block(i * shape.p, j * shape.n, y[i][j]);
      }
    const CMatrix amp = amplify_inner(shape, k, x, y);
    const CMatrix flat = flat_x.adjoint() * flat_y;
    CHECK((amp - flat).frobenius_norm() <= 1e-12 * (1.0 + flat.frobenius_norm()));
  }
}

TEST_CASE("cauchy-schwarz block matrix is PSD") {
  Rng rng(9);
  for (int rep = 0; rep < 25; ++rep) {
    const ModuleShape shape{1 + rng.below(3), 1 + rng.below(3)};
    const CMatrix x = rng.gaussian_matrix(shape.p, shape.n);
    const CMatrix y = rng.gaussian_matrix(shape.p, shape.n);
    CMatrix block(2 * shape.n, 2 * shape.n);
    block.set_block(0, 0, inner_product(shape, x, x));
    block.set_block(0, shape.n, inner_product(shape, x, y));
    block.set_block(shape.n, 0, inner_product(shape, y, x));
    block.set_block(shape.n, shape.n, inner_product(shape, y, y));
    CHECK(is_psd(hermitize(block)));
  }
}

TEST_CASE("rank one operators on standard vectors") {
  const ModuleShape shape{2, 1};
  CMatrix e1(2, 1), e2(2, 1);
  e1(0, 0) = 1.0;
  e2(1, 0) = 1.0;
  const CMatrix e11 = rank_one_op(shape, e1, e1);
  CHECK(std::abs(e11(0, 0) - Complex(1.0)) <= 1e-15);
  CHECK(e11.frobenius_norm() == doctest::Approx(1.0));
  const CMatrix e12 = rank_one_op(shape, e1, e2);
  CHECK(std::abs(e12(0, 1) - Complex(1.0)) <= 1e-15);
}

TEST_CASE("rank one adjoint symmetry") {
  Rng rng(11);
  const ModuleShape shape{3, 2};
  const CMatrix x = rng.gaussian_matrix(3, 2), y = rng.gaussian_matrix(3, 2);
  const CMatrix lhs = rank_one_op(shape, x, y).adjoint();
  const CMatrix rhs = rank_one_op(shape, y, x);
  CHECK((lhs - rhs).frobenius_norm() == 0.0);
}

TEST_CASE("rank one operators over the basis span all of M_p") {
  const ModuleShape shape{2, 2};
  std::vector<CMatrix> vecs;
  for (std::size_t m = 0; m < shape.dim_e(); ++m)
    for (std::size_t l = 0; l < shape.dim_e(); ++l)
      vecs.push_back(rank_one_op(shape, e_basis(shape, m), e_basis(shape, l)).vec());
  CHECK(orthonormal_range(vecs, defaults::kRankTol).cols() == shape.p * shape.p);
}

TEST_CASE("two-by-two positivity lemma, scalar cases") {
  const ModuleShape shape{1, 1};
  CMatrix x(1, 1), a(1, 1);
  x(0, 0) = 1.0;
  a(0, 0) = 1.0;
  CHECK(lemma_two_by_two_positive(shape, x, a));
  a(0, 0) = 0.5;
  CHECK_FALSE(lemma_two_by_two_positive(shape, x, a));
}

TEST_CASE("two-by-two positivity matches the schur criterion") {
  Rng rng(13);
  for (std::size_t p = 1; p <= 3; ++p)
    for (std::size_t n = 1; n <= 3; ++n) {
      const ModuleShape shape{p, n};
      for (int rep = 0; rep < 100; ++rep) {
        const CMatrix x = rng.gaussian_matrix(p, n);
        const CMatrix gram = inner_product(shape, x, x);
        const bool shifted_up = rep % 2 == 0;
        const CMatrix a = shifted_up ? gram + CMatrix::identity(n)
                                     : gram - Complex(0.1) * CMatrix::identity(n);
        CHECK(lemma_two_by_two_positive(shape, x, a) == shifted_up);
        // Direct equivalence with min-eig(a - <x,x>).
        const double me = min_eig_hermitian(hermitize(a - gram));
        const bool schur = me >= -defaults::kPsdTol * (1.0 + a.frobenius_norm());
        CHECK(lemma_two_by_two_positive(shape, x, a) == schur);
      }
    }
}

TEST_CASE("embedding round trip") {
  Rng rng(17);
  const ModuleShape shape{2, 3};
  LinkingElement el;
  el.shape = shape;
  el.u = rng.gaussian_matrix(2, 2);
  el.x = rng.gaussian_matrix(2, 3);
  el.y = rng.gaussian_matrix(2, 3);
  el.a = rng.gaussian_matrix(3, 3);
  const LinkingElement back = extract_corners(shape, embed_linking(el));
  CHECK((back.u - el.u).frobenius_norm() == 0.0);
  CHECK((back.x - el.x).frobenius_norm() == 0.0);
  CHECK((back.y - el.y).frobenius_norm() == 0.0);
  CHECK((back.a - el.a).frobenius_norm() == 0.0);
}

TEST_CASE("identity of the linking algebra has identity corners") {
  const ModuleShape shape{2, 2};
  const LinkingElement el = extract_corners(shape, CMatrix::identity(4));
  CHECK((el.u - CMatrix::identity(2)).frobenius_norm() == 0.0);
  CHECK(el.x.frobenius_norm() == 0.0);
  CHECK(el.y.frobenius_norm() == 0.0);
  CHECK((el.a - CMatrix::identity(2)).frobenius_norm() == 0.0);
}

TEST_CASE("system element embeds with scalar upper corner") {
  const ModuleShape shape{2, 1};
  SystemElement el;
  el.shape = shape;
  el.lambda = Complex(2.0, 1.0);
  el.x = CMatrix(2, 1);
  el.y = CMatrix(2, 1);
  el.a = CMatrix::identity(1);
  const CMatrix m = embed_linking(el);
  CHECK(std::abs(m(0, 0) - el.lambda) <= 1e-15);
  CHECK(std::abs(m(1, 1) - el.lambda) <= 1e-15);
  CHECK(std::abs(m(0, 1)) <= 1e-15);
}

}  // TEST_SUITE
