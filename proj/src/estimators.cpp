#include "debias/estimators.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "debias/quadrature.hpp"

namespace debias {

namespace {

void validate(const EvaluationSample& sample) {
    if (sample.points.empty())
        throw std::invalid_argument("estimator: empty sample");
    if (sample.points.size() != sample.errors.size())
        throw std::invalid_argument("estimator: points/errors size mismatch");
    for (std::size_t i = 0; i < sample.errors.size(); ++i)
        if (!(sample.errors[i] >= 0.0) || !std::isfinite(sample.errors[i]))
            throw std::invalid_argument("estimator: error at index " + std::to_string(i) +
                                        " is negative or non-finite");
}

RiskEstimate weighted_estimate(const EvaluationSample& sample, const std::vector<double>& weights,
                               EstimatorKind kind) {
    const std::size_t n = sample.points.size();
    double weighted_sum = 0.0;
    double w_sum = 0.0;
    double w_sq_sum = 0.0;
    double w_min = std::numeric_limits<double>::infinity();
    double w_max = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double w = weights[i];
        if (!std::isfinite(w))
            throw std::runtime_error("estimator: non-finite importance weight at point index " +
                                     std::to_string(i));
        weighted_sum += sample.errors[i] * w;
        w_sum += w;
        w_sq_sum += w * w;
        w_min = std::min(w_min, w);
        w_max = std::max(w_max, w);
    }
    RiskEstimate est;
    est.kind = kind;
    est.n = n;
    est.value = weighted_sum / static_cast<double>(n);
    est.weight_stats.min = w_min;
    est.weight_stats.max = w_max;
    est.weight_stats.mean = w_sum / static_cast<double>(n);
    est.weight_stats.effective_sample_size = w_sq_sum > 0.0 ? w_sum * w_sum / w_sq_sum : 0.0;
    return est;
}

} // namespace

std::string to_string(EstimatorKind kind) {
    switch (kind) {
    case EstimatorKind::Mce: return "mce";
    case EstimatorKind::Ise: return "ise";
    case EstimatorKind::IseEstimated: return "ise_e";
    }
    throw std::logic_error("unknown estimator kind");
}

EstimatorKind parse_estimator_kind(const std::string& name) {
    if (name == "mce") return EstimatorKind::Mce;
    if (name == "ise") return EstimatorKind::Ise;
    if (name == "ise_e") return EstimatorKind::IseEstimated;
    throw std::invalid_argument("unknown estimator kind: " + name);
}

RiskEstimate mce(const EvaluationSample& sample) {
    validate(sample);
    const std::size_t n = sample.points.size();
    double sum = 0.0;
    for (double e : sample.errors)
        sum += e;
    RiskEstimate est;
    est.kind = EstimatorKind::Mce;
    est.n = n;
    est.value = sum / static_cast<double>(n);
    est.weight_stats = {1.0, 1.0, 1.0, static_cast<double>(n)};
    return est;
}

RiskEstimate ise(const EvaluationSample& sample, const DensityFn& p, const DensityFn& g) {
    validate(sample);
    std::vector<double> weights(sample.points.size());
    for (std::size_t i = 0; i < weights.size(); ++i)
        weights[i] = p(sample.points[i]) / g(sample.points[i]);
    return weighted_estimate(sample, weights, EstimatorKind::Ise);
}

RiskEstimate ise_estimated(const EvaluationSample& sample, const DensityFn& p,
                           const DensityFn& g_hat) {
    validate(sample);
    std::vector<double> weights(sample.points.size());
    for (std::size_t i = 0; i < weights.size(); ++i)
        weights[i] = p(sample.points[i]) / g_hat(sample.points[i]);
    return weighted_estimate(sample, weights, EstimatorKind::IseEstimated);
}

RiskEstimate ise_estimated(const EvaluationSample& sample, const DensityFn& p,
                           const KdeModel& kde) {
    validate(sample);
    const std::vector<double> g_hat = kde.pdf_many(sample.points, /*truncated=*/true);
    std::vector<double> weights(sample.points.size());
    for (std::size_t i = 0; i < weights.size(); ++i)
        weights[i] = p(sample.points[i]) / g_hat[i];
    return weighted_estimate(sample, weights, EstimatorKind::IseEstimated);
}

double true_risk(const FieldPair& pair, const DensityFn& p, const Domain& domain, int resolution) {
    if (resolution < 100)
        throw std::invalid_argument("true_risk: resolution must be >= 100 per axis");
    return integrate_midpoint(domain, resolution,
                              [&](Vec2 x) { return pointwise_error(pair, x) * p(x); });
}

} // namespace debias
