#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <cyllevy/driver.hpp>
#include <cyllevy/modular.hpp>

namespace cyllevy::verify {

struct Budgets {
  std::size_t n_mc = 10000;
  int gamma_search = 16;
  int l_search = 64;
};

/// Base integrand: an explicit step function or a named family.
///   {"kind": "step", "step": <step function JSON>}
///   {"kind": "family", "family": "random-step", "params": {"intervals": 4, "hs_norm": 1.0}}
///   {"kind": "family", "family": "power", "params": {"exponent": -0.25, "hs_norm": 1.0, "level": 6}}
struct IntegrandSpec {
  std::string kind;
  std::optional<StepFunction> step;
  std::string family;
  int intervals = 4;
  double hs_norm = 1.0;
  double exponent = 0.0;
  int level = 6;
};

struct SimulateSpec {
  std::size_t paths = 1000;
};

/// Experiment configuration. Unknown fields are rejected; the seed may come
/// from the file, the CYLLEVY_SEED variable or the command line.
struct ExperimentConfig {
  std::optional<std::uint64_t> seed;
  int dim = 8;
  std::optional<Driver> driver;
  std::optional<IntegrandSpec> integrand;
  Budgets budgets;
  std::optional<std::size_t> battery;  // overrides the per-check battery size
  std::string output = "out";
  SimulateSpec simulate;
};

/// Throws FormatError on malformed input.
ExperimentConfig parse_config(std::string_view text);

/// Canonical JSON of the effective configuration (sorted keys, seed
/// included); the config hash is FNV-1a 64 of this text.
std::string canonical_json(const ExperimentConfig& config);
std::string config_hash(const ExperimentConfig& config);

/// The base integrand as a step function of shape dim x dim.
StepFunction base_integrand(const ExperimentConfig& config, const Stream& rng);

}  // namespace cyllevy::verify
