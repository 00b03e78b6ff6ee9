#include "debias/gaussian_mixture.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace debias {

namespace {
constexpr double kTwoPi = 2.0 * 3.141592653589793238462643383279502884;

// Acceptance probability below which rejection sampling is refused.
constexpr double kMinAcceptance = 1e-3;
} // namespace

GaussianComponent::GaussianComponent(Vec2 mean, SymMat2 covariance, double weight)
    : mean_(mean), covariance_(covariance), weight_(weight),
      precision_(inverse(covariance)), chol_(cholesky(covariance)),
      norm_const_(1.0 / (kTwoPi * std::sqrt(covariance.det()))) {
    if (!(weight > 0.0) || weight > 1.0)
        throw std::invalid_argument("GaussianComponent: weight must be in (0, 1]");
    if (!std::isfinite(mean.x) || !std::isfinite(mean.y))
        throw std::invalid_argument("GaussianComponent: mean must be finite");
}

GaussianMixture::GaussianMixture(std::vector<GaussianComponent> components, Domain domain,
                                 int quadrature_resolution)
    : components_(std::move(components)), domain_(domain) {
    if (components_.empty())
        throw std::invalid_argument("GaussianMixture: at least one component required");

    double weight_sum = 0.0;
    weight_cdf_.reserve(components_.size());
    for (const auto& c : components_) {
        weight_sum += c.weight();
        weight_cdf_.push_back(weight_sum);
    }
    if (std::abs(weight_sum - 1.0) > 1e-12)
        throw std::invalid_argument("GaussianMixture: component weights must sum to 1, got " +
                                    std::to_string(weight_sum));

    mass_in_domain_ = integrate_midpoint(domain_, quadrature_resolution,
                                         [this](Vec2 x) { return pdf(x, /*truncated=*/false); });
    if (!(mass_in_domain_ > 0.0) || mass_in_domain_ > 1.0 + 1e-9)
        throw std::invalid_argument("GaussianMixture: mass_in_domain outside (0, 1]: " +
                                    std::to_string(mass_in_domain_));
    mass_in_domain_ = std::min(mass_in_domain_, 1.0);
}

GaussianMixture GaussianMixture::random(int k, const Domain& domain, double min_eigenvalue,
                                        std::uint64_t seed, double eig_max_factor,
                                        int quadrature_resolution) {
    if (k < 1)
        throw std::invalid_argument("random_gmm: k must be >= 1");
    if (!(min_eigenvalue > 0.0))
        throw std::invalid_argument("random_gmm: min_eigenvalue must be > 0");
    if (!(eig_max_factor >= 1.0))
        throw std::invalid_argument("random_gmm: eig_max_factor must be >= 1");

    Rng rng(seed);
    const double eig_max = eig_max_factor * min_eigenvalue;

    struct Draw {
        Vec2 mean;
        SymMat2 cov;
    };
    std::vector<Draw> draws;
    draws.reserve(k);
    for (int i = 0; i < k; ++i) {
        const Vec2 mean{rng.uniform(domain.x_min, domain.x_max),
                        rng.uniform(domain.y_min, domain.y_max)};
        const double angle = rng.uniform(0.0, Rng::pi());
        const double d1 = rng.uniform(min_eigenvalue, eig_max);
        const double d2 = rng.uniform(min_eigenvalue, eig_max);
        draws.push_back({mean, rotated_diagonal(d1, d2, angle)});
    }

    std::vector<double> weights(k);
    double sum = 0.0;
    for (auto& w : weights) {
        w = rng.uniform01_pos();
        sum += w;
    }

    std::vector<GaussianComponent> components;
    components.reserve(k);
    for (int i = 0; i < k; ++i)
        components.emplace_back(draws[i].mean, draws[i].cov, weights[i] / sum);

    return GaussianMixture(std::move(components), domain, quadrature_resolution);
}

double GaussianMixture::pdf(Vec2 x, bool truncated) const {
    double raw = 0.0;
    for (const auto& c : components_)
        raw += c.weight() * c.density(x);
    if (!truncated)
        return raw;
    if (!domain_.contains(x))
        return 0.0;
    return std::max(raw / mass_in_domain_, kDensityFloor);
}

std::vector<Vec2> GaussianMixture::sample(std::size_t n, Rng& rng) const {
    if (n < 1)
        throw std::invalid_argument("sample_gmm: n must be >= 1");
    if (mass_in_domain_ < kMinAcceptance)
        throw std::runtime_error(
            "sample_gmm: degenerate mixture, acceptance probability below 1e-3 "
            "(mass_in_domain = " +
            std::to_string(mass_in_domain_) + ")");

    // Safety cap on rejection attempts per point; with acceptance >= 1e-3
    // exhausting it is practically impossible.
    constexpr int kMaxAttemptsPerPoint = 1000000;

    std::vector<Vec2> points;
    points.reserve(n);
    while (points.size() < n) {
        bool accepted = false;
        for (int attempt = 0; attempt < kMaxAttemptsPerPoint; ++attempt) {
            const std::size_t k = rng.categorical(weight_cdf_);
            const auto [z0, z1] = rng.normal_pair();
            const Vec2 x = components_[k].mean() + components_[k].chol().apply(Vec2{z0, z1});
            if (domain_.contains(x)) {
                points.push_back(x);
                accepted = true;
                break;
            }
        }
        if (!accepted)
            throw std::runtime_error("sample_gmm: rejection sampling failed to accept a point");
    }
    return points;
}

std::vector<Vec2> GaussianMixture::sample(std::size_t n, std::uint64_t seed) const {
    Rng rng(seed);
    return sample(n, rng);
}

} // namespace debias
