#pragma once

#include <span>
#include <string>
#include <vector>

#include "debias/domain.hpp"
#include "debias/geometry.hpp"
#include "debias/quadrature.hpp"

namespace debias {

/// Bandwidth selection rule for kde_fit. Both rules share the form
/// h_i = prefactor * sigma_i * n^(-1/(d+4)); for d = 2 the Silverman
/// prefactor (4/(d+2))^(1/(d+4)) is exactly 1, so the rules coincide.
enum class BandwidthRule {
    Silverman,
    Scott,
};

BandwidthRule parse_bandwidth_rule(const std::string& name);
std::string to_string(BandwidthRule rule);

/// Gaussian-kernel density estimate with per-dimension bandwidths,
/// restricted to a rectangular domain like the mixtures it estimates.
class KdeModel {
  public:
    KdeModel(std::vector<Vec2> anchors, double bandwidth_x, double bandwidth_y, Domain domain,
             int quadrature_resolution = kDefaultQuadratureResolution);

    const std::vector<Vec2>& anchors() const { return anchors_; }
    double bandwidth_x() const { return h1_; }
    double bandwidth_y() const { return h2_; }
    const Domain& domain() const { return domain_; }
    double mass_in_domain() const { return mass_in_domain_; }

    /// Kernel density at x: (1/n) sum_j prod_i (1/h_i) phi((x_i - a_ji)/h_i).
    /// Truncated form renormalizes by mass_in_domain inside the domain and
    /// is 0 outside (floored at kDensityFloor inside).
    double pdf(Vec2 x, bool truncated = true) const;

    /// pdf at many points; each value is bit-identical to the pointwise call.
    std::vector<double> pdf_many(std::span<const Vec2> points, bool truncated = true) const;

    /// Raw (untruncated) pdf on the midpoint grid of the given domain,
    /// row-major with x fastest. Exploits the product-kernel structure, so it
    /// is cheap enough for dense oracles against large anchor sets.
    std::vector<double> pdf_grid(const Domain& domain, int nx, int ny) const;

  private:
    std::vector<Vec2> anchors_;
    double h1_;
    double h2_;
    Domain domain_;
    double mass_in_domain_;
};

/// Fits a KDE to sample points with the given bandwidth rule.
///
/// sigma_i is the population standard deviation (divide by n) of axis i,
/// which keeps the closed-form bandwidth exact for symmetric test inputs.
/// Requires at least 2 points and a nonzero spread on both axes.
KdeModel kde_fit(std::span<const Vec2> points, BandwidthRule rule, Domain domain,
                 int quadrature_resolution = kDefaultQuadratureResolution);

} // namespace debias
