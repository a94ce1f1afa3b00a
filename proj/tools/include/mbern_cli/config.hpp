#pragma once

// Experiment configuration: JSON in, canonical JSON out.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mbern/bounds.hpp"
#include "mbern/ensembles.hpp"
#include "mbern/kernelops.hpp"

namespace mbern::cli {

// Any schema violation. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Kind { bound, simulate, compare, kernel, inequalities };
std::string_view to_string(Kind k);

enum class Format { csv, json };
Format format_from_string(std::string_view s);
std::string_view to_string(Format f);

// Ensemble description as written in the config. `family` is one of the
// matrix families or "SphereVector".
struct EnsembleConfig {
  std::string family;
  std::int64_t d = 0;
  std::int64_t n = 0;
  std::vector<Matrix> basis;  // FixedBasisRademacher
  std::vector<std::pair<Matrix, double>> atoms;  // FiniteSupport
  std::optional<Matrix> direction;  // SubExpScaled, MartingaleAdapted

  bool is_vector() const { return family == "SphereVector"; }
  EnsembleSpec build() const;
  SphereVectorSpec build_vector() const;
};

// Explicit bound parameters; unset values come from the ensemble.
struct BoundConfig {
  std::optional<Regime> regime;
  std::optional<std::int64_t> n;
  std::optional<std::int64_t> d;
  std::optional<double> sigma2;
  std::optional<double> U;
  std::optional<double> trace_var;
  std::optional<Matrix> expected_w;  // martingale
  std::optional<double> kappa;       // kernel
  std::optional<double> lk_norm;
  std::optional<double> xi_intdim;
};

struct SimSection {
  std::uint64_t trials = 100000;
  std::uint64_t seed = 0;
  double confidence = 0.99;
  bool exact = false;
};

struct KernelSection {
  KernelSpec spec;
  std::int64_t n = 200;
  std::int64_t m = 4000;
  std::uint64_t samples = 2000;
};

struct OutputSection {
  std::string path;  // empty: standard output
  Format format = Format::csv;
};

struct ExperimentConfig {
  Kind kind = Kind::bound;
  std::string id;
  std::optional<EnsembleConfig> ensemble;
  BoundConfig bound;
  SimSection sim;
  std::optional<KernelSection> kernel;
  std::vector<double> t_grid;
  OutputSection output;

  std::string ensemble_id() const;
};

// Throws ConfigError on unknown fields, wrong types, or invariant violations.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
// Canonical form: every field explicit, grids expanded, keys sorted.
nlohmann::json serialize_config(const ExperimentConfig& cfg);

}  // namespace mbern::cli
