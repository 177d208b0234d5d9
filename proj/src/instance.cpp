#include "semimod/instance.hpp"

#include <fstream>

#include "semimod/dilation.hpp"
#include "semimod/eig.hpp"
#include "semimod/radon.hpp"
#include "semimod/rng.hpp"

namespace semimod {

Json matrix_to_json(const CMatrix& m) {
  Json data = Json::array();
  for (const auto& z : m.data()) data.push_back(Json::array({z.real(), z.imag()}));
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

CMatrix matrix_from_json(const Json& j) {
  const std::size_t rows = j.at("rows").get<std::size_t>();
  const std::size_t cols = j.at("cols").get<std::size_t>();
  const Json& data = j.at("data");
  if (data.size() != rows * cols) throw ParseError("matrix data length != rows*cols");
  CMatrix m(rows, cols);
  for (std::size_t k = 0; k < rows * cols; ++k)
    m.data()[k] = Complex(data[k].at(0).get<double>(), data[k].at(1).get<double>());
  return m;
}

Json instance_to_json(const InstanceFile& inst) {
  Json j{{"schema_version", inst.schema_version},
         {"shape", Json{{"p", inst.shape.p}, {"n", inst.shape.n}}},
         {"h_dims", Json{{"d1", inst.d1}, {"d2", inst.d2}}},
         {"phi_choi", matrix_to_json(inst.phi.choi)},
         {"Phi_mat", matrix_to_json(inst.phi_mod.mat)}};
  if (inst.ground_truth) {
    j["ground_truth"] = Json{{"kind", inst.ground_truth->kind},
                             {"seed", inst.ground_truth->seed},
                             {"planted", inst.ground_truth->planted}};
  }
  return j;
}

InstanceFile instance_from_json(const Json& j) {
  InstanceFile inst;
  inst.schema_version = j.at("schema_version").get<std::string>();
  inst.shape.p = j.at("shape").at("p").get<std::size_t>();
  inst.shape.n = j.at("shape").at("n").get<std::size_t>();
  inst.d1 = j.at("h_dims").at("d1").get<std::size_t>();
  inst.d2 = j.at("h_dims").at("d2").get<std::size_t>();
  if (inst.shape.p < 1 || inst.shape.n < 1 || inst.d1 < 1 || inst.d2 < 1)
    throw ParseError("dimensions must be positive");

  const CMatrix choi = matrix_from_json(j.at("phi_choi"));
  const std::size_t nd = inst.shape.n * inst.d1;
  if (choi.rows() != nd || choi.cols() != nd) throw ParseError("phi_choi has inconsistent size");
  inst.phi = CpMap{inst.shape.n, inst.d1, choi};

  const CMatrix mat = matrix_from_json(j.at("Phi_mat"));
  if (mat.rows() != inst.d2 * inst.d1 || mat.cols() != inst.shape.dim_e())
    throw ParseError("Phi_mat has inconsistent size");
  inst.phi_mod = ModuleMap{inst.shape, inst.d1, inst.d2, mat};

  if (j.contains("ground_truth")) {
    GroundTruth gt;
    gt.kind = j.at("ground_truth").at("kind").get<std::string>();
    gt.seed = j.at("ground_truth").at("seed").get<std::uint64_t>();
    gt.planted = j.at("ground_truth").value("planted", Json::object());
    inst.ground_truth = std::move(gt);
  }
  return inst;
}

void save_instance(const InstanceFile& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << instance_to_json(inst).dump(2) << "\n";
}

InstanceFile load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string(e.what()));
  }
  try {
    return instance_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string(e.what()));
  }
}

namespace {

InstanceFile gen_phi_map(const ModuleShape& shape, std::size_t d1, std::size_t d2,
                         std::uint64_t seed) {
  const std::size_t p = shape.p, n = shape.n;
  if (d2 < p)
    throw UnsupportedDims("phi_map generation needs d2 >= p for a coisometric dilation");
  Rng rng(Rng::mix(seed, 0xa11ce));
  const std::size_t r_max = std::min<std::size_t>(d2 / p, 2);
  const std::size_t r = 1 + rng.below(r_max);

  // W^* has orthonormal columns, so W W^* = I on K2 and the generated map is a
  // genuine phi-map, not merely completely semi-phi.
  CMatrix q(0, 0);
  do {
    q = orthonormal_range(rng.gaussian_matrix(d2, p * r), 1e-12);
  } while (q.cols() != p * r);
  const CMatrix w = q.adjoint();  // (p r) x d2

  const bool unital = d1 <= n * r && rng.uniform() < 0.7;
  CMatrix v;
  if (unital) {
    do {
      v = orthonormal_range(rng.gaussian_matrix(n * r, d1), 1e-12);
    } while (v.cols() != d1);
  } else {
    v = rng.gaussian_matrix(n * r, d1);
    v *= Complex(1.0 / spectral_norm(v));
  }

  std::vector<CMatrix> phi_images;
  phi_images.reserve(n * n);
  const CMatrix ir = CMatrix::identity(r);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      phi_images.push_back(v.adjoint() * kron(CMatrix::unit(n, n, i, j), ir) * v);
  CpMap phi = CpMap::from_images(n, d1, phi_images);
  phi.choi = hermitize(phi.choi);

  std::vector<CMatrix> mod_images;
  mod_images.reserve(p * n);
  for (std::size_t m = 0; m < p * n; ++m)
    mod_images.push_back(w.adjoint() * kron(e_basis(shape, m), ir) * v);
  ModuleMap phi_mod = ModuleMap::from_images(shape, d1, d2, mod_images);

  InstanceFile inst;
  inst.shape = shape;
  inst.d1 = d1;
  inst.d2 = d2;
  inst.phi = std::move(phi);
  inst.phi_mod = std::move(phi_mod);
  inst.ground_truth = GroundTruth{"phi_map", seed,
                                  Json{{"multiplicity", r}, {"unital", unital}}};
  return inst;
}

InstanceFile gen_adversarial(const ModuleShape& shape, std::size_t d1, std::size_t d2,
                             std::uint64_t seed) {
  InstanceFile base;
  std::uint64_t sub = Rng::mix(seed, 0xbad);
  for (int attempt = 0;; ++attempt) {
    base = gen_phi_map(shape, d1, d2, sub);
    if (base.phi_mod.mat.frobenius_norm() > 1e-6) break;
    if (attempt >= 16) throw UnsupportedDims("adversarial generation: degenerate phi-map");
    sub = Rng::mix(sub, 0x5eed);
  }

  double scale = 2.0;
  for (int step = 0; step < 12; ++step) {
    const GramResult gram = gram_kernel(base.phi_mod.scaled(scale), base.phi);
    if (gram.min_eig <= -1e-3 * (1.0 + gram.gram.frobenius_norm())) break;
    scale *= 2.0;
  }
  base.phi_mod = base.phi_mod.scaled(scale);
  base.ground_truth = GroundTruth{"adversarial", seed,
                                  Json{{"base_seed", sub}, {"scale", scale}}};
  return base;
}

InstanceFile gen_subordinate(const ModuleShape& shape, std::size_t d1, std::size_t d2,
                             std::uint64_t seed, const SolverOptions& opts) {
  // First attempt uses the plain seed, so gen("phi_map", ..., seed) is the
  // parent whenever that attempt has enough strictness margin.
  std::uint64_t sub = seed;
  InstanceFile best;
  double best_margin = -1.0;
  std::uint64_t best_parent = 0;

  for (int attempt = 0; attempt < 8; ++attempt, sub = Rng::mix(sub, 0x5eed)) {
    const InstanceFile parent = gen_phi_map(shape, d1, d2, sub);
    DilationPair pair;
    try {
      pair = minimize(dilate(parent.phi_mod, parent.phi, opts), parent.phi_mod, parent.phi);
    } catch (const Error&) {
      continue;
    }
    const std::vector<CommutantElement> basis = commutant_basis(pair);
    Rng rng(Rng::mix(sub, 0xc0ef));
    CommutantElement el{CMatrix(pair.k2_dim(), pair.k2_dim()),
                        CMatrix(pair.k1_dim(), pair.k1_dim())};
    for (const auto& b : basis) {
      const Complex c = rng.uniform(-1.0, 1.0);
      el.p += c * b.p;
      el.q += c * b.q;
    }
    el.p = hermitize(el.p);
    el.q = hermitize(el.q);
    const double norm = std::max(spectral_norm(el.p), spectral_norm(el.q));
    el.p += Complex(norm + 0.1) * CMatrix::identity(pair.k2_dim());
    el.q += Complex(norm + 0.1) * CMatrix::identity(pair.k1_dim());
    const double total = std::max(spectral_norm(el.p), spectral_norm(el.q));
    const Complex factor = Complex(0.9 / total);
    el.p *= factor;
    el.q *= factor;

    Subordinate sb = construct_subordinate(pair, el.p, el.q);

    // Strictness margin: the generated pair must be visibly not a phi-map so
    // that the coisometry separation has room.
    const std::size_t ne = shape.dim_e();
    CMatrix defect(ne * d1, ne * d1);
    for (std::size_t m = 0; m < ne; ++m)
      for (std::size_t l = 0; l < ne; ++l) {
        const CMatrix block = sb.phi_s.apply(inner_product(shape, e_basis(shape, m),
                                                           e_basis(shape, l))) -
                              sb.phi_mod_ts.image(m).adjoint() * sb.phi_mod_ts.image(l);
        defect.set_block(m * d1, l * d1, block);
      }
    const double margin = defect.frobenius_norm();
    if (margin > best_margin) {
      best_margin = margin;
      best_parent = sub;
      best = InstanceFile{};
      best.shape = shape;
      best.d1 = d1;
      best.d2 = d2;
      best.phi = sb.phi_s;
      best.phi_mod = sb.phi_mod_ts;
    }
    if (margin >= 3e-2) break;
  }
  if (best_margin < 0.0) throw UnsupportedDims("subordinate generation failed for these dims");
  best.ground_truth = GroundTruth{"subordinate", seed,
                                  Json{{"parent_seed", best_parent},
                                       {"t_norm_cap", 0.9},
                                       {"margin", best_margin}}};
  return best;
}

}  // namespace

InstanceFile gen(const std::string& kind, const ModuleShape& shape, std::size_t d1, std::size_t d2,
                 std::uint64_t seed, const SolverOptions& opts) {
  if (shape.p < 1 || shape.n < 1 || d1 < 1 || d2 < 1)
    throw UnsupportedDims("all dimensions must be >= 1");
  if (shape.p > 4 || shape.n > 4 || d1 > 4 || d2 > 4)
    throw UnsupportedDims("generator dims are capped at 4");
  if (kind == "phi_map") return gen_phi_map(shape, d1, d2, seed);
  if (kind == "adversarial") return gen_adversarial(shape, d1, d2, seed);
  if (kind == "subordinate") return gen_subordinate(shape, d1, d2, seed, opts);
  throw UnsupportedDims("unknown instance kind: " + kind);
}

}  // namespace semimod
