#pragma once

#include <stdexcept>

#include "debias/geometry.hpp"

namespace debias {

/// Axis-aligned study region X. Edges are half-open: [min, max) on each axis.
struct Domain {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 100.0;
    double y_max = 100.0;

    Domain() = default;
    Domain(double x0, double y0, double x1, double y1)
        : x_min(x0), y_min(y0), x_max(x1), y_max(y1) {
        if (!(x_min < x_max) || !(y_min < y_max))
            throw std::invalid_argument("Domain: require x_min < x_max and y_min < y_max");
    }

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double area() const { return width() * height(); }

    bool contains(Vec2 p) const {
        return p.x >= x_min && p.x < x_max && p.y >= y_min && p.y < y_max;
    }
};

/// Uniform target density p: 1/area inside the (half-open) domain, 0 outside.
inline double pdf_uniform(const Domain& domain, Vec2 x) {
    return domain.contains(x) ? 1.0 / domain.area() : 0.0;
}

} // namespace debias
