#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "debias/domain.hpp"
#include "debias/estimators.hpp"
#include "debias/experiment.hpp"
#include "debias/fields.hpp"
#include "debias/gaussian_mixture.hpp"

namespace debias {

using Json = nlohmann::ordered_json;

Json domain_to_json(const Domain& domain);
Domain domain_from_json(const Json& j);

/// Mixture document: {components:[{mean:[.,.],cov:[[.,.],[.,.]],weight:.}], domain:{...}}.
Json mixture_to_json(const GaussianMixture& g);
GaussianMixture mixture_from_json(const Json& j,
                                  int quadrature_resolution = kDefaultQuadratureResolution);

Json field_to_json(const Field& field);
Field field_from_json(const Json& j);

Json field_pair_to_json(const FieldPair& pair);
FieldPair field_pair_from_json(const Json& j);

Json risk_estimate_to_json(const RiskEstimate& est);

Json experiment_config_to_json(const ExperimentConfig& config);

/// Config file contents: an ExperimentConfig plus the sweep sizes. Parsing is
/// strict; unknown keys raise std::invalid_argument naming the key.
struct LoadedConfig {
    ExperimentConfig experiment;
    std::vector<int> sweep_sizes = {100, 316, 1000, 3162, 10000};
};

LoadedConfig config_from_json(const Json& j);
LoadedConfig load_config_file(const std::string& path);

Json report_to_json(const ExperimentConfig& config, const ExperimentReport& report);
Json sweep_report_to_json(const ExperimentConfig& config, const std::vector<int>& sizes,
                          const SweepReport& report);

Json load_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

} // namespace debias
