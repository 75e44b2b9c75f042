#pragma once

#include "malin/cli/expression.hpp"
#include "malin/solver.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace malin::cli {

// Invalid configuration; `path` locates the offending field ("$.data.b[1]").
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

enum class Kind { Geometry, Solve, Harnack, Hoelder, Moser, Sobolev, GlobalLinf, InteriorL2, Sweep };

std::string to_string(Kind kind);
std::optional<Kind> kind_from_string(const std::string& name);

struct PotentialConfig {
  std::string family = "Quadratic";
  int n = 2;
  std::vector<double> axes;       // AnisotropicQuadratic
  double amplitude = 0.0;         // PerturbedQuadratic
  std::vector<double> frequency;  // PerturbedQuadratic
  double exponent = 2.0;          // RadialPower
  std::optional<Box> domain;
  std::string label;
};

struct RandomData {
  int degree = 3;
  double margin = 0.1;
};

struct DataConfig {
  std::vector<Expression> b, B, F;  // empty: zero field
  std::optional<Expression> f;
  std::optional<Expression> g;
  std::optional<RandomData> random_g;  // g from RandomBoundaryData seeded per repeat
  std::optional<Expression> exact;     // exact solution for error reporting
  std::string divB = "sampled";        // sampled | analytic | unknown
};

struct MeshConfig {
  double relative_size = 0.1;
  int refinements = 0;
  int resolution = 0;
};

struct AssertConfig {
  std::optional<double> max_quotient;
  std::optional<double> max_band;
  std::optional<double> ratio_value;
  double ratio_tolerance = 1e-9;
  std::optional<double> min_gamma;
};

struct ExperimentConfig {
  Kind kind = Kind::Geometry;
  std::string name;
  PotentialConfig potential;
  std::vector<double> center;  // x0; defaults to the domain centre
  DataConfig data;
  std::vector<double> scales;
  MeshConfig mesh;
  std::uint64_t seed = 0;
  int repeats = 1;  // seeds seed, seed + 1, ...
  std::string output = "results";
  double t_ratio = 0.5;
  int depth = 6;
  double q = 2.0;
  double r = 0.0;  // 0: n
  double alpha = 1.0;
  int pairs = 200;
  int random_members = 20;
  AssertConfig checks;
  std::vector<ExperimentConfig> experiments;  // sweep members
  nlohmann::json source;                      // the validated JSON, for hashing
};

// Validates against the published schema and builds the config. Sweep
// members are merged over the parent's fields (JSON merge patch).
ExperimentConfig parse_config(const nlohmann::json& j);
// Throws SchemaError with path "$" for unreadable files or malformed JSON.
ExperimentConfig load_config(const std::filesystem::path& file);

PotentialPtr make_potential(const PotentialConfig& config);
Vector default_center(const ExperimentConfig& config, const PotentialPtr& potential);
// Coefficients from expressions; div B comes from the exact derivatives.
ProblemData make_problem(const DataConfig& config, const PotentialPtr& potential, const Vector& center,
                         std::uint64_t seed);

std::uint64_t config_hash(const nlohmann::json& j);

}  // namespace malin::cli
