#include "bgmoe/glm.hpp"

#include <cmath>
#include <sstream>

#include "bgmoe/bivariate_gamma.hpp"
#include "bgmoe/errors.hpp"

namespace bgmoe {

GlmFit fit_gamma_glm(const Eigen::VectorXd& y, const Eigen::MatrixXd& x) {
    const Eigen::Index n = y.size();
    const Eigen::Index p = x.cols();
    if (n != x.rows()) throw DataError("glm: response/design size mismatch");
    if (n <= p) throw DataError("glm: need more observations than coefficients");
    if ((y.array() <= 0.0).any()) throw DomainError("glm: responses must be positive");

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < p) throw DataError("glm: design matrix is rank deficient");

    // Log link with gamma variance gives unit IRLS weights, so each step is
    // an ordinary least-squares solve on the working response.
    Eigen::VectorXd eta = y.array().log();
    Eigen::VectorXd beta = qr.solve(eta);
    double deviance = std::numeric_limits<double>::infinity();
    int it = 0;
    std::ostringstream history;
    for (; it < 100; ++it) {
        eta = x * beta;
        const Eigen::VectorXd mu = eta.array().exp();
        const Eigen::VectorXd z = eta.array() + (y - mu).array() / mu.array();
        beta = qr.solve(z);
        const Eigen::VectorXd mu_new = (x * beta).array().exp();
        const double dev =
            2.0 * (-(y.array() / mu_new.array()).log() + (y - mu_new).array() / mu_new.array())
                      .sum();
        history << " " << dev;
        if (std::abs(dev - deviance) < 1e-10 * (std::abs(dev) + 0.1)) {
            deviance = dev;
            ++it;
            break;
        }
        deviance = dev;
    }
    if (it >= 100) {
        throw NumericalError("glm: IRLS did not converge; deviance trace:" + history.str());
    }

    GlmFit fit;
    fit.coefficients = beta;
    fit.iterations = it;
    fit.deviance = deviance;
    const Eigen::VectorXd mu = (x * beta).array().exp();
    fit.dispersion = ((y - mu).array() / mu.array()).square().sum() / static_cast<double>(n - p);
    const double shape = 1.0 / fit.dispersion;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        ll += gamma_logpdf(y(i), shape, shape / mu(i));
    }
    fit.loglik = ll;
    return fit;
}

Eigen::VectorXd predict_glm(const GlmFit& fit, const Eigen::MatrixXd& x) {
    if (x.cols() != fit.coefficients.size()) {
        throw DataError("glm predict: design dimension mismatch");
    }
    return (x * fit.coefficients).array().exp();
}

}  // namespace bgmoe
