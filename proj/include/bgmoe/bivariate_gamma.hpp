#ifndef BGMOE_BIVARIATE_GAMMA_HPP
#define BGMOE_BIVARIATE_GAMMA_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bgmoe/quadrature.hpp"

namespace bgmoe {

/// Parameters of one bivariate gamma component: Y = (X1+X3, X2+X3) with
/// independent X_k ~ Gamma(alpha_k, beta) sharing the rate beta.
struct BGParams {
    double alpha1 = 1.0;
    double alpha2 = 1.0;
    double alpha3 = 1.0;
    double beta = 1.0;

    /// Smallest admissible alpha3. Below this the shared-shape component is
    /// numerically indistinguishable from independence and loggamma blows
    /// up, so such parameters are rejected instead of clamped.
    static constexpr double kAlpha3Floor = 1e-8;

    void validate() const;  // throws DomainError
};

/// Conditional expectations of the latent split given an observed (y1, y2).
struct ConditionalMoments {
    double e_x3 = 0.0;
    double e_x1 = 0.0;      // y1 - e_x3, exact
    double e_x2 = 0.0;      // y2 - e_x3, exact
    double e_log_x3 = 0.0;
    double e_log_x1 = 0.0;
    double e_log_x2 = 0.0;
};

struct BGMoments {
    Eigen::Vector2d mean;
    Eigen::Matrix2d cov;
};

/// log f(y1, y2). The latent integral over x3 in (0, min(y1, y2)) is
/// evaluated in log space on tanh-sinh nodes, so claim-scale magnitudes
/// (beta*y in the hundreds) and shapes below one are both safe.
double log_density(double y1, double y2, const BGParams& p,
                   const QuadratureConfig& q = {});

/// Conditional moments of (X1, X2, X3) given (y1, y2). e_x3 is computed both
/// through the density-ratio identity (alpha3/beta * f(alpha3+1)/f(alpha3))
/// and by direct quadrature of the x3-weighted integrand; the two routes run
/// on independently refined meshes and must agree, the ratio form is
/// returned. Log-moments come from the quadrature route.
ConditionalMoments conditional_moments(double y1, double y2, const BGParams& p,
                                       const QuadratureConfig& q = {});

/// Conditional moments together with log f(y1, y2); shares the quadrature
/// sweeps, which is what the E-step wants per (i, g) cell.
std::pair<ConditionalMoments, double> conditional_moments_with_density(
    double y1, double y2, const BGParams& p, const QuadratureConfig& q = {});

/// Analytic mean and covariance of Y.
BGMoments moments(const BGParams& p);

/// n independent draws of (Y1, Y2); deterministic given seed.
std::vector<std::pair<double, double>> sample(const BGParams& p, std::size_t n,
                                              std::uint64_t seed);

struct RectProb {
    double joint = 0.0;    // P(c1 <= Y1 <= c2, c1 <= Y2 <= c2)
    double product = 0.0;  // P(c1 <= Y1 <= c2) * P(c1 <= Y2 <= c2)
};

/// Monte-Carlo rectangle probabilities from one shared sample stream.
RectProb joint_rect_prob_mc(const BGParams& p, double c1, double c2,
                            std::size_t n, std::uint64_t seed);

/// Univariate Gamma(shape, rate) log-density.
double gamma_logpdf(double x, double shape, double rate);

}  // namespace bgmoe

#endif
