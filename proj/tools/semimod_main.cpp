#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "semimod/dilation.hpp"
#include "semimod/eig.hpp"
#include "semimod/instance.hpp"
#include "semimod/radon.hpp"

namespace {

using semimod::Json;

struct CommonFlags {
  double tol = 1e-9;
  std::size_t max_iter = 50000;
  std::uint64_t seed = 0;
  std::string json_out;
};

void add_common(CLI::App* cmd, CommonFlags* flags) {
  cmd->add_option("--tol", flags->tol, "solver stop tolerance");
  cmd->add_option("--max-iter", flags->max_iter, "solver iteration budget");
  cmd->add_option("--seed", flags->seed, "seed for randomized choices");
  cmd->add_option("--json-out", flags->json_out, "write the JSON report to this file");
}

semimod::SolverOptions solver_options(const CommonFlags& flags) {
  semimod::SolverOptions opts;
  opts.tol = flags.tol;
  opts.max_iter = flags.max_iter;
  opts.init_seed = flags.seed;
  return opts;
}

void emit(const Json& report, const CommonFlags& flags) {
  const std::string text = report.dump(2);
  std::cout << text << "\n";
  if (!flags.json_out.empty()) {
    std::ofstream out(flags.json_out);
    if (!out) throw semimod::Error("cannot open " + flags.json_out);
    out << text << "\n";
  }
}

const char* verdict_name(semimod::Verdict v) {
  switch (v) {
    case semimod::Verdict::kCompletelySemiPhi: return "CompletelySemiPhi";
    case semimod::Verdict::kNotSemiPhi: return "NotSemiPhi";
    default: return "Undecided";
  }
}

Json solve_json(const semimod::SolveReport& r) {
  return Json{{"feasible", r.feasible}, {"residual", r.residual}, {"iterations", r.iterations}};
}

Json dims_json(const semimod::InstanceFile& inst) {
  return Json{{"p", inst.shape.p}, {"n", inst.shape.n}, {"d1", inst.d1}, {"d2", inst.d2}};
}

Json pair_json(const semimod::DilationPair& pair) {
  return Json{{"k1_dim", pair.k1_dim()},
              {"k2_dim", pair.k2_dim()},
              {"multiplicity", pair.rho_multiplicity},
              {"minimal", pair.minimal},
              {"w_isometry", pair.w_isometry}};
}

double env_default_tol() {
  // SEMIMOD_TOL overrides the default solver stop tolerance.
  if (const char* env = std::getenv("SEMIMOD_TOL")) {
    try {
      return std::stod(env);
    } catch (...) {
      throw semimod::Error("SEMIMOD_TOL is not a number");
    }
  }
  return 1e-9;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical toolkit for completely semi-phi maps on matrix Hilbert modules"};
  app.require_subcommand(1);

  CommonFlags flags;

  // gen
  auto* gen_cmd = app.add_subcommand("gen", "generate a seeded instance file");
  std::string gen_kind = "phi_map", gen_out = "instance.json";
  std::size_t gp = 1, gn = 1, gd1 = 1, gd2 = 1;
  gen_cmd->add_option("--kind", gen_kind, "phi_map | subordinate | adversarial");
  gen_cmd->add_option("--p", gp, "module height p");
  gen_cmd->add_option("--n", gn, "algebra dimension n");
  gen_cmd->add_option("--d1", gd1, "dim H1");
  gen_cmd->add_option("--d2", gd2, "dim H2");
  gen_cmd->add_option("--out", gen_out, "output path");
  add_common(gen_cmd, &flags);

  auto add_instance_cmd = [&](const char* name, const char* help, std::string* path) {
    auto* cmd = app.add_subcommand(name, help);
    cmd->add_option("instance", *path, "instance file")->required();
    add_common(cmd, &flags);
    return cmd;
  };

  std::string in_check, in_dilate, in_minimize, in_equiv, in_commutant, in_purity;
  add_instance_cmd("check", "certify the completely semi-phi property", &in_check);
  add_instance_cmd("dilate", "build a dilation pair", &in_dilate);
  add_instance_cmd("minimize", "build the minimal dilation pair", &in_minimize);
  add_instance_cmd("equiv", "compare two independently built minimal pairs", &in_equiv);
  add_instance_cmd("commutant", "commutant of the minimal dilation's module map", &in_commutant);
  add_instance_cmd("purity", "purity of the instance's phi as a unital CP map", &in_purity);

  auto* order_cmd = app.add_subcommand("order", "order relation between two instances");
  std::string order_a, order_b;
  bool order_relaxed = false;
  order_cmd->add_option("first", order_a, "candidate smaller instance")->required();
  order_cmd->add_option("second", order_b, "candidate larger instance")->required();
  order_cmd->add_flag("--relaxed", order_relaxed, "use the relaxed order");
  add_common(order_cmd, &flags);

  auto* rn_cmd = app.add_subcommand("rn", "Radon-Nikodym derivative of first w.r.t. second");
  std::string rn_a, rn_b;
  rn_cmd->add_option("first", rn_a, "subordinate instance")->required();
  rn_cmd->add_option("second", rn_b, "dominating instance")->required();
  add_common(rn_cmd, &flags);

  flags.tol = 1e-9;
  try {
    flags.tol = env_default_tol();
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const semimod::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    const semimod::SolverOptions opts = solver_options(flags);

    if (gen_cmd->parsed()) {
      const semimod::InstanceFile inst =
          semimod::gen(gen_kind, semimod::ModuleShape{gp, gn}, gd1, gd2, flags.seed, opts);
      semimod::save_instance(inst, gen_out);
      emit(Json{{"kind", gen_kind}, {"out", gen_out}, {"dims", dims_json(inst)},
                {"seed", flags.seed}},
           flags);
      return 0;
    }

    if (app.get_subcommand("check")->parsed()) {
      const semimod::InstanceFile inst = semimod::load_instance(in_check);
      const semimod::Certificate cert = semimod::certify(inst.phi_mod, inst.phi, opts);
      Json report{{"verdict", verdict_name(cert.verdict)},
                  {"gram_min_eig", cert.gram_min_eig},
                  {"tol", flags.tol},
                  {"solve", solve_json(cert.solve)},
                  {"dims", dims_json(inst)}};
      if (cert.witness)
        report["witness"] = Json{{"level", cert.witness->level},
                                 {"defect_value", cert.witness->defect_value}};
      emit(report, flags);
      return 0;
    }

    if (app.get_subcommand("dilate")->parsed()) {
      const semimod::InstanceFile inst = semimod::load_instance(in_dilate);
      const semimod::DilationPair pair = semimod::dilate(inst.phi_mod, inst.phi, opts);
      const semimod::PairResiduals res = semimod::validate_pair(pair, inst.phi_mod, inst.phi);
      emit(Json{{"pair", pair_json(pair)},
                {"residuals", Json{{"reconstruction", res.max_reconstruction()},
                                   {"structural", res.max_structural()},
                                   {"w_isometry", res.w_isometry}}},
                {"dims", dims_json(inst)}},
           flags);
      return 0;
    }

    if (app.get_subcommand("minimize")->parsed()) {
      const semimod::InstanceFile inst = semimod::load_instance(in_minimize);
      const semimod::DilationPair big = semimod::dilate(inst.phi_mod, inst.phi, opts);
      const semimod::DilationPair pair = semimod::minimize(big, inst.phi_mod, inst.phi);
      const auto [ci, cii] = semimod::check_minimal(pair);
      semimod::CMatrix wwt = pair.w * pair.w.adjoint();
      wwt -= semimod::CMatrix::identity(pair.k2_dim());
      emit(Json{{"before", pair_json(big)},
                {"after", pair_json(pair)},
                {"minimal", Json{{"cond_i", ci}, {"cond_ii", cii}}},
                {"coisometry_defect", wwt.frobenius_norm()},
                {"dims", dims_json(inst)}},
           flags);
      return 0;
    }

    if (app.get_subcommand("equiv")->parsed()) {
      const semimod::InstanceFile inst = semimod::load_instance(in_equiv);
      semimod::SolverOptions alt = opts;
      alt.init_kind = 1;
      alt.init_seed = flags.seed + 1;
      const semimod::DilationPair a =
          semimod::minimize(semimod::dilate(inst.phi_mod, inst.phi, opts), inst.phi_mod, inst.phi);
      const semimod::DilationPair b =
          semimod::minimize(semimod::dilate(inst.phi_mod, inst.phi, alt), inst.phi_mod, inst.phi);
      const semimod::EquivalenceResult eq =
          semimod::equivalence_unitaries(a, b, inst.phi_mod, inst.phi);
      emit(Json{{"dims_first", pair_json(a)},
                {"dims_second", pair_json(b)},
                {"max_residual", eq.max_residual}},
           flags);
      return 0;
    }

    if (app.get_subcommand("commutant")->parsed()) {
      const semimod::InstanceFile inst = semimod::load_instance(in_commutant);
      const semimod::DilationPair pair = semimod::minimize(
          semimod::dilate(inst.phi_mod, inst.phi, opts), inst.phi_mod, inst.phi);
      const auto basis = semimod::commutant_basis(pair);
      double worst = 0.0;
      for (const auto& el : basis)
        worst = std::max(worst, semimod::commutant_residual(pair.psi, el));
      emit(Json{{"dimension", basis.size()},
                {"relation_residual", worst},
                {"nullspace_dimension", semimod::invariant_pair_dimension(pair.psi)},
                {"pair", pair_json(pair)}},
           flags);
      return 0;
    }

    if (app.get_subcommand("purity")->parsed()) {
      const semimod::InstanceFile inst = semimod::load_instance(in_purity);
      const bool pure = semimod::is_pure_ucp(inst.phi, opts);
      const semimod::ModuleMap as_map = semimod::as_module_map(inst.phi);
      const semimod::DilationPair pair =
          semimod::minimize(semimod::dilate(as_map, inst.phi, opts), as_map, inst.phi);
      emit(Json{{"pure", pure},
                {"commutant_dimension", semimod::invariant_pair_dimension(pair.psi)},
                {"pair", pair_json(pair)}},
           flags);
      return 0;
    }

    if (order_cmd->parsed()) {
      const semimod::InstanceFile a = semimod::load_instance(order_a);
      const semimod::InstanceFile b = semimod::load_instance(order_b);
      if (order_relaxed) {
        const semimod::RelaxedOrderReport rep =
            semimod::order_leq_relaxed(a.phi, a.phi_mod, b.phi, b.phi_mod, opts);
        emit(Json{{"leq", rep.leq},
                  {"relaxed", true},
                  {"certified_negative", rep.certified_negative},
                  {"solve", solve_json(rep.solve)}},
             flags);
      } else {
        const semimod::OrderReport rep =
            semimod::order_leq_literal(a.phi, a.phi_mod, b.phi, b.phi_mod, opts);
        emit(Json{{"leq", rep.leq},
                  {"relaxed", false},
                  {"certified_negative", rep.certified_negative},
                  {"solve", solve_json(rep.solve)}},
             flags);
      }
      return 0;
    }

    if (rn_cmd->parsed()) {
      const semimod::InstanceFile a = semimod::load_instance(rn_a);
      const semimod::InstanceFile b = semimod::load_instance(rn_b);
      try {
        const semimod::RnResult rn =
            semimod::rn_derivative(a.phi, a.phi_mod, b.phi, b.phi_mod, opts);
        emit(Json{{"order_holds", true},
                  {"pair", pair_json(rn.pair)},
                  {"residuals", Json{{"commutant", rn.residuals.commutant},
                                     {"reconstruction_Phi", rn.residuals.recon_phi_mod},
                                     {"reconstruction_phi", rn.residuals.recon_phi},
                                     {"route_agreement", rn.residuals.route_agreement},
                                     {"condition", rn.residuals.condition},
                                     {"band_excursion", rn.residuals.band_excursion},
                                     {"order_iterations", rn.residuals.order_iterations}}}},
             flags);
      } catch (const semimod::OrderFails&) {
        // A failed order is a computed verdict, not an operational error.
        emit(Json{{"order_holds", false}}, flags);
      }
      return 0;
    }
  } catch (const semimod::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
