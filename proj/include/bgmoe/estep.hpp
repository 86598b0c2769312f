#ifndef BGMOE_ESTEP_HPP
#define BGMOE_ESTEP_HPP

#include <Eigen/Dense>

#include "bgmoe/model.hpp"
#include "bgmoe/quadrature.hpp"

namespace bgmoe {

/// Per-observation, per-component conditional expectations plus the
/// observed-data log-likelihood of the parameters that produced them.
struct EStepCache {
    Eigen::MatrixXd z;                       // responsibilities, rows sum to 1
    Eigen::MatrixXd x1, x2, x3;              // conditional means of the latent split
    Eigen::MatrixXd lx1, lx2, lx3;           // conditional means of the logs
    Eigen::MatrixXd logf;                    // per-cell log component density
    Eigen::MatrixXd logtau;                  // per-cell log mixing probability
    double loglik = 0.0;
};

/// E-step over all (i, g) cells; the cell loop is OpenMP-parallel and the
/// reductions run in a fixed order, so results are bit-identical for any
/// worker count.
EStepCache e_step(const Dataset& data, const DesignSet& design,
                  const FittedModel& model, const QuadratureConfig& q);

/// Serial reference implementation kept for testing and benchmarking.
EStepCache e_step_serial(const Dataset& data, const DesignSet& design,
                         const FittedModel& model, const QuadratureConfig& q);

/// Fixed-order pairwise sum (used for the loglik reduction).
double pairwise_sum(const double* v, std::size_t n);

/// Worker cap honouring the BGMOE_THREADS environment variable.
int effective_threads();

}  // namespace bgmoe

#endif
