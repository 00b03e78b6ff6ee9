#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "debias/domain.hpp"
#include "debias/estimators.hpp"
#include "debias/fields.hpp"
#include "debias/gaussian_mixture.hpp"
#include "debias/gradient_boost.hpp"
#include "debias/kde.hpp"

namespace debias {

enum class FunctionFamily {
    Linear,
    GmmRbf,
};

enum class PredictorFamily {
    RandomLinear,
    GradientBoost,
    Identity, // predictor := truth; diagnostic config with e == 0 everywhere
};

std::string to_string(FunctionFamily family);
FunctionFamily parse_function_family(const std::string& name);
std::string to_string(PredictorFamily family);
PredictorFamily parse_predictor_family(const std::string& name);

struct MixtureSpec {
    int k = 20;
    double min_eigenvalue = 100.0;
    double eig_max_factor = 4.0;
};

struct ExperimentConfig {
    Domain domain{};
    MixtureSpec mixture{};
    /// When set, used verbatim instead of drawing a random mixture.
    std::optional<GaussianMixture> explicit_mixture;
    FunctionFamily function_family = FunctionFamily::Linear;
    PredictorFamily predictor_family = PredictorFamily::RandomLinear;
    int n_eval = 10000;
    int n_train = 2000;
    int n_runs = 100;
    int rbf_centers = 10;
    BoostParams boost{};
    BandwidthRule kde_rule = BandwidthRule::Silverman;
    /// Fit the ISE_e KDE on an independent draw instead of the eval sample.
    bool kde_fit_independent = false;
    int quadrature_resolution = kDefaultQuadratureResolution;
    std::uint64_t master_seed = 20240815;
    /// Pin g, f and f-hat across trials (used for the sample-size sweep).
    bool freeze = false;
    int coverage_grid = 20;
    std::vector<EstimatorKind> estimators = {EstimatorKind::Mce, EstimatorKind::Ise,
                                             EstimatorKind::IseEstimated};
    int jobs = 0; // worker cap; 0 means hardware concurrency

    void validate() const;
};

/// FNV-1a hash of the canonical config text; pins a report to its config.
std::string config_digest(const ExperimentConfig& config);

struct TrialResult {
    std::uint64_t seed = 0;
    double true_risk = 0.0;
    std::optional<RiskEstimate> mce;
    std::optional<RiskEstimate> ise;
    std::optional<RiskEstimate> ise_e;
    double coverage_fraction = 0.0;

    const std::optional<RiskEstimate>& estimate(EstimatorKind kind) const;
};

struct EstimatorMetrics {
    EstimatorKind kind = EstimatorKind::Mce;
    double mape = 0.0; // percent
    double rmse = 0.0;
};

struct ExperimentReport {
    std::string config_digest;
    std::vector<EstimatorMetrics> metrics; // in config estimator order
    std::size_t n_runs = 0;
    std::size_t excluded_from_mape = 0; // trials with true_risk < 1e-12
    std::vector<TrialResult> trials;
};

struct SweepRow {
    int n = 0;
    EstimatorKind kind = EstimatorKind::Mce;
    double mean_bias = 0.0; // mean of (est - true) / true, signed
    double mape = 0.0;      // percent
};

struct SweepReport {
    std::string config_digest;
    std::vector<SweepRow> rows; // sizes ascending, estimators in config order
};

/// The mixture, fields and quadrature risk shared by one trial.
struct TrialStructure {
    GaussianMixture g;
    FieldPair pair;
    double risk = 0.0;
};

/// Draws g, f and f-hat from the structure seed's sub-streams and computes
/// the quadrature true risk.
TrialStructure build_structure(const ExperimentConfig& config, std::uint64_t structure_seed);

/// One seeded trial: builds (or reuses) the structure, draws the evaluation
/// sample, and computes true risk, the selected estimators and the coverage
/// diagnostic. Bitwise deterministic in (config, trial_seed).
TrialResult run_trial(const ExperimentConfig& config, std::uint64_t trial_seed,
                      const TrialStructure* shared_structure = nullptr);

/// Pure aggregation of a trial table into MAPE/RMSE metrics; separated so the
/// metric arithmetic is testable on injected trials.
ExperimentReport aggregate_report(const ExperimentConfig& config,
                                  std::vector<TrialResult> trials);

/// Runs n_runs trials with seeds master_seed + 0 .. n_runs-1, possibly on
/// several workers; results are merged in trial-index order, so the report is
/// identical for any worker count.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Per-size signed relative bias and MAPE with eval points resampled per run
/// and the structure shared per run seed (or pinned globally under freeze).
SweepReport sample_size_sweep(const ExperimentConfig& config, const std::vector<int>& sizes);

/// Fraction of grid cells holding at least one point. Diagnostic for the
/// no-holes assumption; never enforced.
double coverage_check(std::span<const Vec2> points, const Domain& domain, int grid);

} // namespace debias
