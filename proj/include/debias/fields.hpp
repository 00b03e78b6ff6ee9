#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "debias/domain.hpp"
#include "debias/geometry.hpp"
#include "debias/gradient_boost.hpp"

namespace debias {

/// Affine field a1*x + a2*y + b.
struct LinearField {
    double a1 = 0.0;
    double a2 = 0.0;
    double b = 0.0;

    double value(Vec2 x) const { return a1 * x.x + a2 * x.y + b; }
};

/// Sum of isotropic Gaussian bumps: sum_j amp_j * exp(-|x-c_j|^2 / (2 w_j^2)).
struct RbfField {
    std::vector<Vec2> centers;
    std::vector<double> amplitudes;
    std::vector<double> widths;

    double value(Vec2 x) const;
};

using Field = std::variant<LinearField, RbfField, GradientBoostPredictor>;

double predict(const Field& field, Vec2 x);

/// Ground truth f paired with a fitted (or drawn) predictor f-hat.
struct FieldPair {
    Field truth;
    Field predictor;
};

/// Pointwise squared error e(x) = (f(x) - fhat(x))^2.
inline double pointwise_error(const FieldPair& pair, Vec2 x) {
    const double d = predict(pair.truth, x) - predict(pair.predictor, x);
    return d * d;
}

/// Random linear field: slopes uniform in [-1, 1] per 100 coordinate units,
/// intercept uniform in [0, 1]. Keeps the field range O(1) on the default
/// 100 x 100 domain.
LinearField make_random_linear(const Domain& domain, std::uint64_t seed);

/// Random RBF mixture: m centers uniform over the domain, amplitudes uniform
/// in [-1, 1], widths uniform in [10, 40] coordinate units.
RbfField make_random_rbf(const Domain& domain, int m, std::uint64_t seed);

} // namespace debias
