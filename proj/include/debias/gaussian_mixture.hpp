#pragma once

#include <cstdint>
#include <vector>

#include "debias/domain.hpp"
#include "debias/geometry.hpp"
#include "debias/quadrature.hpp"
#include "debias/rng.hpp"

namespace debias {

/// Floor applied to truncated densities evaluated inside the domain, so
/// downstream importance ratios never divide by zero.
inline constexpr double kDensityFloor = 1e-300;

/// One weighted 2-D Gaussian. Covariance must be symmetric positive definite;
/// that is enforced here, at construction, never at evaluation time.
class GaussianComponent {
  public:
    GaussianComponent(Vec2 mean, SymMat2 covariance, double weight);

    Vec2 mean() const { return mean_; }
    const SymMat2& covariance() const { return covariance_; }
    double weight() const { return weight_; }
    const Chol2& chol() const { return chol_; }

    /// Unweighted N(x; mean, covariance).
    double density(Vec2 x) const {
        const Vec2 d = x - mean_;
        return norm_const_ * std::exp(-0.5 * quad_form(precision_, d));
    }

  private:
    Vec2 mean_;
    SymMat2 covariance_;
    double weight_;
    SymMat2 precision_;
    Chol2 chol_;
    double norm_const_;
};

/// Gaussian mixture sampling density g, restricted to a rectangular domain.
///
/// The restriction is truncate-and-renormalize: mass_in_domain is the
/// midpoint-quadrature integral of the raw mixture over the domain, the
/// truncated pdf divides by it, and sampling rejects points outside.
class GaussianMixture {
  public:
    GaussianMixture(std::vector<GaussianComponent> components, Domain domain,
                    int quadrature_resolution = kDefaultQuadratureResolution);

    /// Mixture with k random components: means uniform over the domain,
    /// covariance R^T D R with a uniform rotation and eigenvalues uniform in
    /// [min_eigenvalue, eig_max_factor * min_eigenvalue], weights uniform
    /// then normalized to sum 1.
    static GaussianMixture random(int k, const Domain& domain, double min_eigenvalue,
                                  std::uint64_t seed, double eig_max_factor = 4.0,
                                  int quadrature_resolution = kDefaultQuadratureResolution);

    const std::vector<GaussianComponent>& components() const { return components_; }
    const Domain& domain() const { return domain_; }
    double mass_in_domain() const { return mass_in_domain_; }

    /// Mixture density. Raw form sums the weighted component Gaussians;
    /// the truncated form renormalizes by mass_in_domain inside the domain
    /// and is 0 outside (floored at kDensityFloor inside).
    double pdf(Vec2 x, bool truncated = true) const;

    /// Draws n points from the truncated mixture by rejection. Deterministic
    /// for a fixed generator state.
    std::vector<Vec2> sample(std::size_t n, Rng& rng) const;
    std::vector<Vec2> sample(std::size_t n, std::uint64_t seed) const;

  private:
    std::vector<GaussianComponent> components_;
    std::vector<double> weight_cdf_;
    Domain domain_;
    double mass_in_domain_;
};

} // namespace debias
