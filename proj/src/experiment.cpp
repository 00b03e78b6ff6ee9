#include "debias/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

#include "debias/parallel.hpp"
#include "debias/quadrature.hpp"
#include "debias/rng.hpp"

namespace debias {

namespace {

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Field make_predictor(const ExperimentConfig& config, const GaussianMixture& g, const Field& truth,
                     std::uint64_t structure_seed) {
    switch (config.predictor_family) {
    case PredictorFamily::RandomLinear:
        return make_random_linear(config.domain,
                                  derive_seed(structure_seed, SeedStream::PredictorField));
    case PredictorFamily::GradientBoost: {
        const auto train_x = g.sample(static_cast<std::size_t>(config.n_train),
                                      derive_seed(structure_seed, SeedStream::TrainDraw));
        std::vector<double> train_y(train_x.size());
        for (std::size_t i = 0; i < train_x.size(); ++i)
            train_y[i] = predict(truth, train_x[i]);
        return fit_gradient_boost(train_x, train_y, config.boost);
    }
    case PredictorFamily::Identity:
        return truth;
    }
    throw std::logic_error("unknown predictor family");
}

} // namespace

std::string to_string(FunctionFamily family) {
    return family == FunctionFamily::Linear ? "linear" : "gmm_rbf";
}

FunctionFamily parse_function_family(const std::string& name) {
    if (name == "linear") return FunctionFamily::Linear;
    if (name == "gmm_rbf") return FunctionFamily::GmmRbf;
    throw std::invalid_argument("unknown function family: " + name);
}

std::string to_string(PredictorFamily family) {
    switch (family) {
    case PredictorFamily::RandomLinear: return "random_linear";
    case PredictorFamily::GradientBoost: return "gradient_boost";
    case PredictorFamily::Identity: return "identity";
    }
    throw std::logic_error("unknown predictor family");
}

PredictorFamily parse_predictor_family(const std::string& name) {
    if (name == "random_linear") return PredictorFamily::RandomLinear;
    if (name == "gradient_boost") return PredictorFamily::GradientBoost;
    if (name == "identity") return PredictorFamily::Identity;
    throw std::invalid_argument("unknown predictor family: " + name);
}

void ExperimentConfig::validate() const {
    if (n_eval < 1 || n_train < 1 || n_runs < 1 || rbf_centers < 1)
        throw std::invalid_argument("config: counts must be >= 1");
    if (!explicit_mixture && mixture.k < 1)
        throw std::invalid_argument("config: mixture.k must be >= 1");
    if (!explicit_mixture && !(mixture.min_eigenvalue > 0.0))
        throw std::invalid_argument("config: mixture.min_eigenvalue must be > 0");
    if (quadrature_resolution < 100)
        throw std::invalid_argument("config: quadrature_resolution must be >= 100");
    if (coverage_grid < 2)
        throw std::invalid_argument("config: coverage_grid must be >= 2");
    if (estimators.empty())
        throw std::invalid_argument("config: at least one estimator required");
}

std::string config_digest(const ExperimentConfig& config) {
    // Canonical key=value text; every field that affects results appears.
    std::ostringstream os;
    os << "domain=" << format_double(config.domain.x_min) << ',' << format_double(config.domain.y_min)
       << ',' << format_double(config.domain.x_max) << ',' << format_double(config.domain.y_max)
       << ";mixture=";
    if (config.explicit_mixture) {
        os << "explicit:";
        for (const auto& c : config.explicit_mixture->components()) {
            os << format_double(c.mean().x) << ',' << format_double(c.mean().y) << ','
               << format_double(c.covariance().xx) << ',' << format_double(c.covariance().xy) << ','
               << format_double(c.covariance().yy) << ',' << format_double(c.weight()) << '|';
        }
    } else {
        os << config.mixture.k << ',' << format_double(config.mixture.min_eigenvalue) << ','
           << format_double(config.mixture.eig_max_factor);
    }
    os << ";function_family=" << to_string(config.function_family)
       << ";predictor_family=" << to_string(config.predictor_family) << ";n_eval=" << config.n_eval
       << ";n_train=" << config.n_train << ";n_runs=" << config.n_runs
       << ";rbf_centers=" << config.rbf_centers << ";boost=" << config.boost.n_trees << ','
       << config.boost.max_depth << ',' << format_double(config.boost.learning_rate) << ','
       << config.boost.min_leaf << ";kde_rule=" << to_string(config.kde_rule)
       << ";kde_fit_independent=" << (config.kde_fit_independent ? 1 : 0)
       << ";quadrature_resolution=" << config.quadrature_resolution
       << ";master_seed=" << config.master_seed << ";freeze=" << (config.freeze ? 1 : 0)
       << ";coverage_grid=" << config.coverage_grid << ";estimators=";
    for (auto kind : config.estimators)
        os << to_string(kind) << ',';

    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a(os.str())));
    return buf;
}

const std::optional<RiskEstimate>& TrialResult::estimate(EstimatorKind kind) const {
    switch (kind) {
    case EstimatorKind::Mce: return mce;
    case EstimatorKind::Ise: return ise;
    case EstimatorKind::IseEstimated: return ise_e;
    }
    throw std::logic_error("unknown estimator kind");
}

TrialStructure build_structure(const ExperimentConfig& config, std::uint64_t structure_seed) {
    GaussianMixture g =
        config.explicit_mixture
            ? *config.explicit_mixture
            : GaussianMixture::random(config.mixture.k, config.domain,
                                      config.mixture.min_eigenvalue,
                                      derive_seed(structure_seed, SeedStream::Mixture),
                                      config.mixture.eig_max_factor,
                                      config.quadrature_resolution);

    Field truth;
    if (config.function_family == FunctionFamily::Linear)
        truth = make_random_linear(config.domain,
                                   derive_seed(structure_seed, SeedStream::TruthField));
    else
        truth = make_random_rbf(config.domain, config.rbf_centers,
                                derive_seed(structure_seed, SeedStream::TruthField));

    Field predictor = make_predictor(config, g, truth, structure_seed);

    TrialStructure s{std::move(g), FieldPair{std::move(truth), std::move(predictor)}, 0.0};
    const Domain domain = config.domain;
    s.risk = true_risk(
        s.pair, [domain](Vec2 x) { return pdf_uniform(domain, x); }, domain,
        config.quadrature_resolution);
    return s;
}

TrialResult run_trial(const ExperimentConfig& config, std::uint64_t trial_seed,
                      const TrialStructure* shared_structure) {
    config.validate();

    std::optional<TrialStructure> own;
    const TrialStructure* s = shared_structure;
    if (s == nullptr) {
        const std::uint64_t structure_seed = config.freeze ? config.master_seed : trial_seed;
        own.emplace(build_structure(config, structure_seed));
        s = &*own;
    }

    const auto points = s->g.sample(static_cast<std::size_t>(config.n_eval),
                                    derive_seed(trial_seed, SeedStream::EvalDraw));
    EvaluationSample sample;
    sample.points = points;
    sample.errors.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        sample.errors[i] = pointwise_error(s->pair, points[i]);

    const Domain domain = config.domain;
    const DensityFn p = [domain](Vec2 x) { return pdf_uniform(domain, x); };

    TrialResult result;
    result.seed = trial_seed;
    result.true_risk = s->risk;
    result.coverage_fraction = coverage_check(sample.points, domain, config.coverage_grid);

    for (EstimatorKind kind : config.estimators) {
        switch (kind) {
        case EstimatorKind::Mce:
            result.mce = mce(sample);
            break;
        case EstimatorKind::Ise: {
            const GaussianMixture& g = s->g;
            result.ise = ise(sample, p, [&g](Vec2 x) { return g.pdf(x, /*truncated=*/true); });
            break;
        }
        case EstimatorKind::IseEstimated: {
            std::vector<Vec2> kde_points;
            if (config.kde_fit_independent)
                kde_points = s->g.sample(static_cast<std::size_t>(config.n_eval),
                                         derive_seed(trial_seed, SeedStream::KdeDraw));
            const auto& anchors = config.kde_fit_independent ? kde_points : sample.points;
            const KdeModel kde =
                kde_fit(anchors, config.kde_rule, domain, config.quadrature_resolution);
            result.ise_e = ise_estimated(sample, p, kde);
            break;
        }
        }
    }
    return result;
}

ExperimentReport aggregate_report(const ExperimentConfig& config,
                                  std::vector<TrialResult> trials) {
    ExperimentReport report;
    report.config_digest = config_digest(config);
    report.n_runs = trials.size();

    for (const auto& t : trials)
        if (t.true_risk < 1e-12)
            ++report.excluded_from_mape;

    for (EstimatorKind kind : config.estimators) {
        EstimatorMetrics m;
        m.kind = kind;
        double abs_rel_sum = 0.0;
        double sq_sum = 0.0;
        std::size_t mape_count = 0;
        for (const auto& t : trials) {
            const auto& est = t.estimate(kind);
            if (!est)
                throw std::runtime_error("aggregate_report: trial missing estimator " +
                                         to_string(kind));
            const double diff = est->value - t.true_risk;
            sq_sum += diff * diff;
            if (t.true_risk >= 1e-12) {
                abs_rel_sum += std::abs(diff) / t.true_risk;
                ++mape_count;
            }
        }
        m.mape = mape_count > 0 ? 100.0 * abs_rel_sum / static_cast<double>(mape_count) : 0.0;
        m.rmse = trials.empty() ? 0.0 : std::sqrt(sq_sum / static_cast<double>(trials.size()));
        report.metrics.push_back(m);
    }

    report.trials = std::move(trials);
    return report;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
    config.validate();

    std::optional<TrialStructure> shared;
    if (config.freeze)
        shared.emplace(build_structure(config, config.master_seed));
    const TrialStructure* shared_ptr = shared ? &*shared : nullptr;

    const std::size_t n_runs = static_cast<std::size_t>(config.n_runs);
    std::vector<TrialResult> trials(n_runs);
    std::vector<std::string> failures(n_runs);

    parallel_for(n_runs, config.jobs, [&](std::size_t r) {
        const std::uint64_t trial_seed = config.master_seed + r;
        try {
            trials[r] = run_trial(config, trial_seed, shared_ptr);
        } catch (const std::exception& e) {
            failures[r] = "trial " + std::to_string(r) + " (seed " + std::to_string(trial_seed) +
                          "): " + e.what();
        }
    });

    std::string all_failures;
    for (const auto& f : failures)
        if (!f.empty())
            all_failures += (all_failures.empty() ? "" : "\n") + f;
    if (!all_failures.empty())
        throw std::runtime_error("run_experiment failed:\n" + all_failures);

    return aggregate_report(config, std::move(trials));
}

SweepReport sample_size_sweep(const ExperimentConfig& config, const std::vector<int>& sizes) {
    config.validate();
    if (sizes.empty())
        throw std::invalid_argument("sample_size_sweep: sizes must be non-empty");
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] < 1)
            throw std::invalid_argument("sample_size_sweep: sizes must be >= 1");
        if (i > 0 && sizes[i] <= sizes[i - 1])
            throw std::invalid_argument("sample_size_sweep: sizes must be ascending");
    }

    std::optional<TrialStructure> frozen;
    if (config.freeze)
        frozen.emplace(build_structure(config, config.master_seed));

    const std::size_t n_runs = static_cast<std::size_t>(config.n_runs);
    const std::size_t n_sizes = sizes.size();

    // rel[s * n_runs + r] = (est - true) / true for each selected estimator.
    std::vector<std::vector<double>> rel(config.estimators.size(),
                                         std::vector<double>(n_sizes * n_runs, 0.0));

    parallel_for(n_runs, config.jobs, [&](std::size_t r) {
        const std::uint64_t run_seed = config.master_seed + r;
        std::optional<TrialStructure> own;
        const TrialStructure* s = frozen ? &*frozen : nullptr;
        if (s == nullptr) {
            own.emplace(build_structure(config, run_seed));
            s = &*own;
        }

        const Domain domain = config.domain;
        const DensityFn p = [domain](Vec2 x) { return pdf_uniform(domain, x); };
        const GaussianMixture& g = s->g;
        const DensityFn g_pdf = [&g](Vec2 x) { return g.pdf(x, /*truncated=*/true); };

        for (std::size_t si = 0; si < n_sizes; ++si) {
            const std::uint64_t eval_seed =
                derive_seed(derive_seed(run_seed, SeedStream::EvalDraw), si);
            EvaluationSample sample;
            sample.points = g.sample(static_cast<std::size_t>(sizes[si]), eval_seed);
            sample.errors.resize(sample.points.size());
            for (std::size_t i = 0; i < sample.points.size(); ++i)
                sample.errors[i] = pointwise_error(s->pair, sample.points[i]);

            for (std::size_t e = 0; e < config.estimators.size(); ++e) {
                RiskEstimate est;
                switch (config.estimators[e]) {
                case EstimatorKind::Mce:
                    est = mce(sample);
                    break;
                case EstimatorKind::Ise:
                    est = ise(sample, p, g_pdf);
                    break;
                case EstimatorKind::IseEstimated: {
                    const KdeModel kde = kde_fit(sample.points, config.kde_rule, domain,
                                                 config.quadrature_resolution);
                    est = ise_estimated(sample, p, kde);
                    break;
                }
                }
                rel[e][si * n_runs + r] = (est.value - s->risk) / s->risk;
            }
        }
    });

    SweepReport report;
    report.config_digest = config_digest(config);
    for (std::size_t si = 0; si < n_sizes; ++si) {
        for (std::size_t e = 0; e < config.estimators.size(); ++e) {
            SweepRow row;
            row.n = sizes[si];
            row.kind = config.estimators[e];
            double bias_sum = 0.0, abs_sum = 0.0;
            for (std::size_t r = 0; r < n_runs; ++r) {
                const double v = rel[e][si * n_runs + r];
                bias_sum += v;
                abs_sum += std::abs(v);
            }
            row.mean_bias = bias_sum / static_cast<double>(n_runs);
            row.mape = 100.0 * abs_sum / static_cast<double>(n_runs);
            report.rows.push_back(row);
        }
    }
    return report;
}

double coverage_check(std::span<const Vec2> points, const Domain& domain, int grid) {
    if (grid < 2)
        throw std::invalid_argument("coverage_check: grid must be >= 2");
    std::set<int> occupied;
    for (const Vec2& p : points) {
        if (!domain.contains(p))
            continue;
        const int ix = std::min(grid - 1, static_cast<int>((p.x - domain.x_min) / domain.width() *
                                                           grid));
        const int iy = std::min(grid - 1, static_cast<int>((p.y - domain.y_min) / domain.height() *
                                                           grid));
        occupied.insert(iy * grid + ix);
    }
    return static_cast<double>(occupied.size()) / (static_cast<double>(grid) * grid);
}

} // namespace debias
