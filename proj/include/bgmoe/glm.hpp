#ifndef BGMOE_GLM_HPP
#define BGMOE_GLM_HPP

#include <Eigen/Dense>

namespace bgmoe {

/// Univariate gamma GLM with log link, the independent-modeling baseline.
struct GlmFit {
    Eigen::VectorXd coefficients;
    double dispersion = 1.0;  // Pearson estimator
    double loglik = 0.0;
    int iterations = 0;
    double deviance = 0.0;
};

/// IRLS to convergence (relative deviance change < 1e-10, at most 100
/// iterations). X must have full column rank and include the intercept.
GlmFit fit_gamma_glm(const Eigen::VectorXd& y, const Eigen::MatrixXd& x);

/// exp(X beta).
Eigen::VectorXd predict_glm(const GlmFit& fit, const Eigen::MatrixXd& x);

}  // namespace bgmoe

#endif
