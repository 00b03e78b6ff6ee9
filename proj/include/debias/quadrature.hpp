#pragma once

#include <stdexcept>

#include "debias/domain.hpp"

namespace debias {

/// Compensated (Kahan) accumulator; keeps long midpoint sums near 1 ulp.
class KahanSum {
  public:
    void add(double x) {
        const double y = x - comp_;
        const double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Midpoint-rule quadrature of f over the domain on an nx-by-ny cell grid.
///
/// This is the one integration rule used for all density normalizers and
/// true-risk oracles; the default resolution is 400 per axis.
template <class F>
double integrate_midpoint(const Domain& domain, int nx, int ny, F&& f) {
    if (nx < 1 || ny < 1)
        throw std::invalid_argument("integrate_midpoint: grid must be at least 1x1");
    const double dx = domain.width() / nx;
    const double dy = domain.height() / ny;
    const double cell = dx * dy;
    KahanSum acc;
    for (int iy = 0; iy < ny; ++iy) {
        const double y = domain.y_min + (iy + 0.5) * dy;
        for (int ix = 0; ix < nx; ++ix) {
            const double x = domain.x_min + (ix + 0.5) * dx;
            acc.add(f(Vec2{x, y}) * cell);
        }
    }
    return acc.value();
}

template <class F>
double integrate_midpoint(const Domain& domain, int resolution, F&& f) {
    return integrate_midpoint(domain, resolution, resolution, std::forward<F>(f));
}

inline constexpr int kDefaultQuadratureResolution = 400;

} // namespace debias
