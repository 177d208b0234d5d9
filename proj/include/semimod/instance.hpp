#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "semimod/semiphi.hpp"

namespace semimod {

using Json = nlohmann::ordered_json;

struct GroundTruth {
  std::string kind;  // "phi_map" | "subordinate" | "adversarial"
  std::uint64_t seed = 0;
  Json planted;  // generator parameters, informational
};

/// On-disk instance: a pair (phi, Phi) with optional generation provenance.
struct InstanceFile {
  std::string schema_version = "1";
  ModuleShape shape;
  std::size_t d1 = 0;
  std::size_t d2 = 0;
  CpMap phi;
  ModuleMap phi_mod;
  std::optional<GroundTruth> ground_truth;
};

Json matrix_to_json(const CMatrix& m);
CMatrix matrix_from_json(const Json& j);

Json instance_to_json(const InstanceFile& inst);
InstanceFile instance_from_json(const Json& j);

void save_instance(const InstanceFile& inst, const std::string& path);
InstanceFile load_instance(const std::string& path);

/// Deterministic seeded generation; identical (kind, dims, seed) give
/// bit-identical files. "phi_map" instances certify CompletelySemiPhi,
/// "adversarial" ones certify NotSemiPhi, and "subordinate" ones are built
/// from a parent phi-map through a planted commutant contraction of norm 0.9.
InstanceFile gen(const std::string& kind, const ModuleShape& shape, std::size_t d1, std::size_t d2,
                 std::uint64_t seed, const SolverOptions& opts = {});

}  // namespace semimod
