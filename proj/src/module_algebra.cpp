#include "semimod/module_algebra.hpp"

#include "semimod/eig.hpp"

namespace semimod {

namespace {

void require_e_shape(const ModuleShape& shape, const CMatrix& x, const char* who) {
  if (x.rows() != shape.p || x.cols() != shape.n)
    throw ShapeMismatch(std::string(who) + ": expected " + std::to_string(shape.p) + "x" +
                        std::to_string(shape.n));
}

}  // namespace

CMatrix e_basis(const ModuleShape& shape, std::size_t m) {
  return CMatrix::unit(shape.p, shape.n, m / shape.n, m % shape.n);
}

CMatrix inner_product(const ModuleShape& shape, const CMatrix& x, const CMatrix& y) {
  require_e_shape(shape, x, "inner_product");
  require_e_shape(shape, y, "inner_product");
  return x.adjoint() * y;
}

CMatrix amplify_inner(const ModuleShape& shape, std::size_t k,
                      const std::vector<std::vector<CMatrix>>& x,
                      const std::vector<std::vector<CMatrix>>& y) {
  if (x.size() != k || y.size() != k)
    throw ShapeMismatch("amplify_inner: outer dimension is not k");
  for (const auto& row : x)
    if (row.size() != k) throw ShapeMismatch("amplify_inner: ragged x");
  for (const auto& row : y)
    if (row.size() != k) throw ShapeMismatch("amplify_inner: ragged y");

  const std::size_t n = shape.n;
  CMatrix out(k * n, k * n);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      CMatrix block(n, n);
      for (std::size_t s = 0; s < k; ++s) block += inner_product(shape, x[s][i], y[s][j]);
      out.set_block(i * n, j * n, block);
    }
  return out;
}

CMatrix rank_one_op(const ModuleShape& shape, const CMatrix& x, const CMatrix& y) {
  require_e_shape(shape, x, "rank_one_op");
  require_e_shape(shape, y, "rank_one_op");
  return x * y.adjoint();
}

bool lemma_two_by_two_positive(const ModuleShape& shape, const CMatrix& x, const CMatrix& a) {
  require_e_shape(shape, x, "lemma_two_by_two_positive");
  if (a.rows() != shape.n || a.cols() != shape.n)
    throw ShapeMismatch("lemma_two_by_two_positive: a must be n x n");
  if (hermiticity_defect(a) > defaults::kHermTol * (1.0 + a.max_abs()))
    throw NotHermitian("lemma_two_by_two_positive: a");

  SystemElement el{shape, 1.0, x, x, a};
  return is_psd(embed_linking(el));
}

CMatrix embed_linking(const LinkingElement& el) {
  const std::size_t p = el.shape.p, n = el.shape.n;
  CMatrix m(p + n, p + n);
  m.set_block(0, 0, el.u);
  m.set_block(0, p, el.x);
  m.set_block(p, 0, el.y.adjoint());
  m.set_block(p, p, el.a);
  return m;
}

CMatrix embed_linking(const SystemElement& el) {
  LinkingElement lk{el.shape, el.lambda * CMatrix::identity(el.shape.p), el.x, el.y, el.a};
  return embed_linking(lk);
}

LinkingElement extract_corners(const ModuleShape& shape, const CMatrix& m) {
  const std::size_t p = shape.p, n = shape.n;
  if (m.rows() != p + n || m.cols() != p + n)
    throw ShapeMismatch("extract_corners: expected dimension " + std::to_string(p + n));
  LinkingElement el;
  el.shape = shape;
  el.u = m.block(0, 0, p, p);
  el.x = m.block(0, p, p, n);
  el.y = m.block(p, 0, n, p).adjoint();
  el.a = m.block(p, p, n, n);
  return el;
}

}  // namespace semimod
