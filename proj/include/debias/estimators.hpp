#pragma once

#include <functional>
#include <string>
#include <vector>

#include "debias/domain.hpp"
#include "debias/fields.hpp"
#include "debias/geometry.hpp"
#include "debias/kde.hpp"

namespace debias {

/// Density evaluator over the plane; densities are immutable, so these are
/// safe to share across concurrent trials.
using DensityFn = std::function<double(Vec2)>;

/// Points drawn from the sampling density g with their pointwise errors.
struct EvaluationSample {
    std::vector<Vec2> points;
    std::vector<double> errors;
};

enum class EstimatorKind {
    Mce,
    Ise,
    IseEstimated,
};

std::string to_string(EstimatorKind kind);
EstimatorKind parse_estimator_kind(const std::string& name);

struct WeightStats {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double effective_sample_size = 0.0;
};

struct RiskEstimate {
    double value = 0.0;
    EstimatorKind kind = EstimatorKind::Mce;
    std::size_t n = 0;
    WeightStats weight_stats;
};

/// Monte Carlo error: the plain mean of the pointwise errors. Unbiased for
/// the g-risk, biased for the target risk whenever g differs from p.
RiskEstimate mce(const EvaluationSample& sample);

/// Importance-sampling error: mean of e(x_i) * p(x_i) / g(x_i). Unbiased for
/// the target risk when the sample is drawn from g. Summation over points is
/// left-to-right, so results are bit-reproducible.
RiskEstimate ise(const EvaluationSample& sample, const DensityFn& p, const DensityFn& g);

/// ISE with an estimated density g-hat in place of g.
RiskEstimate ise_estimated(const EvaluationSample& sample, const DensityFn& p,
                           const DensityFn& g_hat);

/// Convenience overload: g-hat is the truncated KDE, evaluated in batch.
RiskEstimate ise_estimated(const EvaluationSample& sample, const DensityFn& p,
                           const KdeModel& kde);

/// Quadrature oracle for the true risk R(e, p) = integral of e(x) p(x) over
/// the domain (midpoint rule, resolution cells per axis).
double true_risk(const FieldPair& pair, const DensityFn& p, const Domain& domain,
                 int resolution = kDefaultQuadratureResolution);

} // namespace debias
