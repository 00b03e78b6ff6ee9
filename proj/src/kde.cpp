#include "debias/kde.hpp"

#include <cmath>
#include <stdexcept>

#include "debias/gaussian_mixture.hpp"

namespace debias {

namespace {
constexpr double kTwoPi = 2.0 * 3.141592653589793238462643383279502884;

// Midpoint sums of the two kernel factors along one axis, one per anchor.
std::vector<double> axis_factor(std::span<const Vec2> anchors, bool y_axis, double h, double lo,
                                double hi, int cells) {
    const double step = (hi - lo) / cells;
    std::vector<double> grid(cells);
    for (int i = 0; i < cells; ++i)
        grid[i] = lo + (i + 0.5) * step;

    std::vector<double> sums(anchors.size());
    for (std::size_t j = 0; j < anchors.size(); ++j) {
        const double a = y_axis ? anchors[j].y : anchors[j].x;
        KahanSum acc;
        for (int i = 0; i < cells; ++i) {
            const double d = (grid[i] - a) / h;
            acc.add(std::exp(-0.5 * d * d) * step);
        }
        sums[j] = acc.value();
    }
    return sums;
}
} // namespace

BandwidthRule parse_bandwidth_rule(const std::string& name) {
    if (name == "silverman") return BandwidthRule::Silverman;
    if (name == "scott") return BandwidthRule::Scott;
    throw std::invalid_argument("unknown bandwidth rule: " + name);
}

std::string to_string(BandwidthRule rule) {
    return rule == BandwidthRule::Silverman ? "silverman" : "scott";
}

KdeModel::KdeModel(std::vector<Vec2> anchors, double bandwidth_x, double bandwidth_y, Domain domain,
                   int quadrature_resolution)
    : anchors_(std::move(anchors)), h1_(bandwidth_x), h2_(bandwidth_y), domain_(domain) {
    if (anchors_.empty())
        throw std::invalid_argument("KdeModel: at least one anchor point required");
    if (!(h1_ > 0.0) || !(h2_ > 0.0))
        throw std::invalid_argument("KdeModel: bandwidths must be strictly positive");

    // mass_in_domain is the 2-D midpoint quadrature of the raw pdf, factored
    // over the product kernel: per anchor, (sum over x cells) * (sum over y
    // cells). Same rule and grid as the generic integrator, O(n * cells).
    const auto sx = axis_factor(anchors_, false, h1_, domain_.x_min, domain_.x_max,
                                quadrature_resolution);
    const auto sy = axis_factor(anchors_, true, h2_, domain_.y_min, domain_.y_max,
                                quadrature_resolution);
    KahanSum acc;
    for (std::size_t j = 0; j < anchors_.size(); ++j)
        acc.add(sx[j] * sy[j]);
    mass_in_domain_ =
        acc.value() / (kTwoPi * h1_ * h2_ * static_cast<double>(anchors_.size()));
    if (!(mass_in_domain_ > 0.0))
        throw std::invalid_argument("KdeModel: domain carries no kernel mass");
    mass_in_domain_ = std::min(mass_in_domain_, 1.0);
}

double KdeModel::pdf(Vec2 x, bool truncated) const {
    // One exp per anchor: prod_i (1/h_i) phi(d_i) = exp(-(d1^2+d2^2)/2) / (2 pi h1 h2).
    double sum = 0.0;
    for (const Vec2& a : anchors_) {
        const double dx = (x.x - a.x) / h1_;
        const double dy = (x.y - a.y) / h2_;
        sum += std::exp(-0.5 * (dx * dx + dy * dy));
    }
    const double raw = sum / (kTwoPi * h1_ * h2_ * static_cast<double>(anchors_.size()));
    if (!truncated)
        return raw;
    if (!domain_.contains(x))
        return 0.0;
    return std::max(raw / mass_in_domain_, kDensityFloor);
}

std::vector<double> KdeModel::pdf_many(std::span<const Vec2> points, bool truncated) const {
    std::vector<double> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        out[i] = pdf(points[i], truncated);
    return out;
}

std::vector<double> KdeModel::pdf_grid(const Domain& domain, int nx, int ny) const {
    if (nx < 1 || ny < 1)
        throw std::invalid_argument("pdf_grid: grid must be at least 1x1");
    const std::size_t n = anchors_.size();
    const double dx_step = domain.width() / nx;
    const double dy_step = domain.height() / ny;

    // Product kernel: each anchor contributes a rank-1 outer product of its
    // per-axis factor rows, accumulated over anchors. O(nx + ny) extra memory.
    std::vector<double> grid(static_cast<std::size_t>(nx) * ny, 0.0);
    std::vector<double> fx(nx), fy(ny);
    for (std::size_t j = 0; j < n; ++j) {
        for (int i = 0; i < nx; ++i) {
            const double d = (domain.x_min + (i + 0.5) * dx_step - anchors_[j].x) / h1_;
            fx[i] = std::exp(-0.5 * d * d);
        }
        for (int i = 0; i < ny; ++i) {
            const double d = (domain.y_min + (i + 0.5) * dy_step - anchors_[j].y) / h2_;
            fy[i] = std::exp(-0.5 * d * d);
        }
        for (int iy = 0; iy < ny; ++iy) {
            double* out_row = &grid[static_cast<std::size_t>(iy) * nx];
            const double ky = fy[iy];
            for (int ix = 0; ix < nx; ++ix)
                out_row[ix] += ky * fx[ix];
        }
    }

    const double scale = 1.0 / (kTwoPi * h1_ * h2_ * static_cast<double>(n));
    for (double& v : grid)
        v *= scale;
    return grid;
}

KdeModel kde_fit(std::span<const Vec2> points, BandwidthRule rule, Domain domain,
                 int quadrature_resolution) {
    const std::size_t n = points.size();
    if (n < 2)
        throw std::invalid_argument("kde_fit: at least 2 points required");

    double mean_x = 0.0, mean_y = 0.0;
    for (const Vec2& p : points) {
        mean_x += p.x;
        mean_y += p.y;
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);

    double ss_x = 0.0, ss_y = 0.0;
    for (const Vec2& p : points) {
        ss_x += (p.x - mean_x) * (p.x - mean_x);
        ss_y += (p.y - mean_y) * (p.y - mean_y);
    }
    const double sigma_x = std::sqrt(ss_x / static_cast<double>(n));
    const double sigma_y = std::sqrt(ss_y / static_cast<double>(n));
    if (!(sigma_x > 0.0) || !(sigma_y > 0.0))
        throw std::invalid_argument("kde_fit: degenerate axis with zero standard deviation");

    // d = 2: Silverman prefactor (4/(d+2))^(1/(d+4)) = 1, Scott prefactor = 1.
    constexpr double d = 2.0;
    const double prefactor =
        rule == BandwidthRule::Silverman ? std::pow(4.0 / (d + 2.0), 1.0 / (d + 4.0)) : 1.0;
    // n^(-1/(d+4)) = n^(-1/6) for d = 2, computed as 1/cbrt(sqrt(n)) so that
    // perfect sixth powers (the closed-form bandwidth cases) round exactly.
    const double n_factor = 1.0 / std::cbrt(std::sqrt(static_cast<double>(n)));
    const double h1 = prefactor * sigma_x * n_factor;
    const double h2 = prefactor * sigma_y * n_factor;

    return KdeModel(std::vector<Vec2>(points.begin(), points.end()), h1, h2, domain,
                    quadrature_resolution);
}

} // namespace debias
