#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <cyllevy/rng.hpp>

#include "verify/config.hpp"
#include "verify/report.hpp"

namespace cyllevy::verify {

using CheckFn = std::function<CheckResult(const ExperimentConfig&, const Stream&)>;

struct CheckSpec {
  std::string id;
  std::string anchor;  // location and statement of the verified result
  CheckFn run;
};

/// All checks in a fixed order.
const std::vector<CheckSpec>& registry();

/// Throws std::invalid_argument for unknown ids.
const CheckSpec& find_check(std::string_view id);

/// Runs one check on the stream (seed, kCli, registry index).
CheckResult run_check(const CheckSpec& spec, const ExperimentConfig& config, std::uint64_t seed);

// Individual batteries.
CheckResult limit_characteristics(const ExperimentConfig& config, const Stream& rng);
CheckResult pushforward_consistency(const ExperimentConfig& config, const Stream& rng);
CheckResult contraction_composition(const ExperimentConfig& config, const Stream& rng);
CheckResult modular_growth(const ExperimentConfig& config, const Stream& rng);
CheckResult metrization_sandwich(const ExperimentConfig& config, const Stream& rng);
CheckResult stable_equivalence(const ExperimentConfig& config, const Stream& rng);
CheckResult integration_equivalence(const ExperimentConfig& config, const Stream& rng);
CheckResult supremum_equivalency(const ExperimentConfig& config, const Stream& rng);
CheckResult predictable_equivalence(const ExperimentConfig& config, const Stream& rng);
CheckResult tangent_laws(const ExperimentConfig& config, const Stream& rng);
CheckResult decoupling_ratio_check(const ExperimentConfig& config, const Stream& rng);
CheckResult semimartingale_bound(const ExperimentConfig& config, const Stream& rng);
CheckResult dominated_convergence(const ExperimentConfig& config, const Stream& rng);
CheckResult enumeration_oracle(const ExperimentConfig& config, const Stream& rng);

}  // namespace cyllevy::verify
