#pragma once

#include <cmath>
#include <stdexcept>

namespace debias {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double squared_norm(Vec2 v) { return dot(v, v); }

/// Symmetric 2x2 matrix, stored as the three distinct entries.
struct SymMat2 {
    double xx = 1.0;
    double xy = 0.0;
    double yy = 1.0;

    double det() const { return xx * yy - xy * xy; }
    double trace() const { return xx + yy; }

    /// Eigenvalues in descending order (closed form for the symmetric case).
    struct Eigenvalues {
        double max;
        double min;
    };
    Eigenvalues eigenvalues() const {
        const double mid = 0.5 * (xx + yy);
        const double half_diff = 0.5 * (xx - yy);
        const double radius = std::sqrt(half_diff * half_diff + xy * xy);
        return {mid + radius, mid - radius};
    }

    bool positive_definite() const {
        return xx > 0.0 && det() > 0.0;
    }
};

/// Lower-triangular Cholesky factor of a symmetric positive-definite 2x2 matrix.
struct Chol2 {
    double l11;
    double l21;
    double l22;

    Vec2 apply(Vec2 z) const { return {l11 * z.x, l21 * z.x + l22 * z.y}; }
};

inline Chol2 cholesky(const SymMat2& m) {
    if (!m.positive_definite())
        throw std::invalid_argument("cholesky: matrix is not positive definite");
    const double l11 = std::sqrt(m.xx);
    const double l21 = m.xy / l11;
    const double l22 = std::sqrt(m.yy - l21 * l21);
    return {l11, l21, l22};
}

inline SymMat2 inverse(const SymMat2& m) {
    const double d = m.det();
    if (d <= 0.0)
        throw std::invalid_argument("inverse: matrix is singular or indefinite");
    return {m.yy / d, -m.xy / d, m.xx / d};
}

/// R^T diag(d1, d2) R for a rotation by `angle`; always symmetric.
inline SymMat2 rotated_diagonal(double d1, double d2, double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {d1 * c * c + d2 * s * s, (d1 - d2) * c * s, d1 * s * s + d2 * c * c};
}

/// Quadratic form v^T m v.
inline double quad_form(const SymMat2& m, Vec2 v) {
    return m.xx * v.x * v.x + 2.0 * m.xy * v.x * v.y + m.yy * v.y * v.y;
}

} // namespace debias
