#ifndef BGMOE_MSTEP_HPP
#define BGMOE_MSTEP_HPP

#include <Eigen/Dense>

namespace bgmoe {

/// Result of one inner optimisation. When no improving step exists the
/// previous value is kept and improved is false.
struct CoefUpdate {
    Eigen::VectorXd coefs;
    int iterations = 0;
    bool improved = true;
    bool converged = true;
};

struct GatingUpdate {
    Eigen::MatrixXd coefs;  // (G-1) x d, reference component last
    int iterations = 0;
    bool converged = true;
};

// ---- gating network -------------------------------------------------------

/// Column means of the responsibilities (gating kind C).
Eigen::VectorXd m_step_gating_proportions(const Eigen::MatrixXd& z);

/// Weighted multinomial logistic fit by damped Newton with step halving;
/// ridge added only when the system is singular. Coefficients are not
/// capped.
GatingUpdate m_step_gating_logistic(const Eigen::MatrixXd& z, const Eigen::MatrixXd& w0,
                                    Eigen::MatrixXd warm_start);

double gating_objective(const Eigen::MatrixXd& coefs, const Eigen::MatrixXd& z,
                        const Eigen::MatrixXd& w0);
Eigen::VectorXd gating_gradient(const Eigen::MatrixXd& coefs, const Eigen::MatrixXd& z,
                                const Eigen::MatrixXd& w0);

// ---- alpha networks -------------------------------------------------------

/// V/E-type update: ascend sum_i c_i [a_i b_i - lgamma(a_i)] with
/// a_i = exp(w_i . gamma) and b_i = log beta_i + E[log x]_i.
CoefUpdate m_step_alpha_regression(const Eigen::VectorXd& weights, const Eigen::MatrixXd& w,
                                   const Eigen::VectorXd& log_beta, const Eigen::VectorXd& lx,
                                   Eigen::VectorXd warm_start);

/// C/I-type update: the unique root of digamma(a) = weighted mean of
/// (log beta + E[log x]).
double m_step_alpha_constant(const Eigen::VectorXd& weights, const Eigen::VectorXd& log_beta,
                             const Eigen::VectorXd& lx);

double alpha_objective(const Eigen::VectorXd& coefs, const Eigen::VectorXd& weights,
                       const Eigen::MatrixXd& w, const Eigen::VectorXd& log_beta,
                       const Eigen::VectorXd& lx);
Eigen::VectorXd alpha_gradient(const Eigen::VectorXd& coefs, const Eigen::VectorXd& weights,
                               const Eigen::MatrixXd& w, const Eigen::VectorXd& log_beta,
                               const Eigen::VectorXd& lx);

// ---- beta network ---------------------------------------------------------

/// V/E-type update on the concave objective
/// sum_i c_i [A_i (w_i . gamma) - exp(w_i . gamma) X_i], with A_i the summed
/// shapes and X_i the summed conditional means.
CoefUpdate m_step_beta_regression(const Eigen::VectorXd& weights, const Eigen::MatrixXd& w,
                                  const Eigen::VectorXd& alpha_sum, const Eigen::VectorXd& x_sum,
                                  Eigen::VectorXd warm_start);

/// C/I-type closed form: sum c A / sum c X.
double m_step_beta_constant(const Eigen::VectorXd& weights, const Eigen::VectorXd& alpha_sum,
                            const Eigen::VectorXd& x_sum);

double beta_objective(const Eigen::VectorXd& coefs, const Eigen::VectorXd& weights,
                      const Eigen::MatrixXd& w, const Eigen::VectorXd& alpha_sum,
                      const Eigen::VectorXd& x_sum);
Eigen::VectorXd beta_gradient(const Eigen::VectorXd& coefs, const Eigen::VectorXd& weights,
                              const Eigen::MatrixXd& w, const Eigen::VectorXd& alpha_sum,
                              const Eigen::VectorXd& x_sum);

/// Starting point for the digamma root (standard inverse-digamma
/// approximation).
double inverse_digamma(double s);

}  // namespace bgmoe

#endif
