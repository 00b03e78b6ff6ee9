#include "debias/fields.hpp"

#include <cmath>
#include <stdexcept>

#include "debias/rng.hpp"

namespace debias {

double RbfField::value(Vec2 x) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < centers.size(); ++j) {
        const double r2 = squared_norm(x - centers[j]);
        acc += amplitudes[j] * std::exp(-r2 / (2.0 * widths[j] * widths[j]));
    }
    return acc;
}

double predict(const Field& field, Vec2 x) {
    return std::visit([x](const auto& f) { return f.value(x); }, field);
}

LinearField make_random_linear(const Domain& domain, std::uint64_t seed) {
    (void)domain; // slopes are per 100 coordinate units regardless of extent
    Rng rng(seed);
    LinearField f;
    f.a1 = rng.uniform(-1.0, 1.0) / 100.0;
    f.a2 = rng.uniform(-1.0, 1.0) / 100.0;
    f.b = rng.uniform(0.0, 1.0);
    return f;
}

RbfField make_random_rbf(const Domain& domain, int m, std::uint64_t seed) {
    if (m < 1)
        throw std::invalid_argument("make_random_rbf: m must be >= 1");
    Rng rng(seed);
    RbfField f;
    f.centers.reserve(m);
    f.amplitudes.reserve(m);
    f.widths.reserve(m);
    for (int j = 0; j < m; ++j) {
        f.centers.push_back({rng.uniform(domain.x_min, domain.x_max),
                             rng.uniform(domain.y_min, domain.y_max)});
        f.amplitudes.push_back(rng.uniform(-1.0, 1.0));
        f.widths.push_back(rng.uniform(10.0, 40.0));
    }
    return f;
}

} // namespace debias
