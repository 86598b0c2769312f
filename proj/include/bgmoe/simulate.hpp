#ifndef BGMOE_SIMULATE_HPP
#define BGMOE_SIMULATE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "bgmoe/model.hpp"

namespace bgmoe {

/// One simulated dataset with its generating truth. Per-observation
/// substreams make generation order-independent: output is bit-identical
/// across runs and worker counts.
struct SimOutput {
    Eigen::MatrixXd responses;   // n x 2
    Eigen::MatrixXd covariates;  // n x d
    std::vector<std::string> covariate_names;
    std::vector<int> true_labels;  // 1-based
    std::vector<std::vector<BGParams>> true_params;  // per observation, per component

    Dataset to_dataset(bool include_labels = true) const;
};

/// Gating-network study: Gaussian covariates (variance 0.3), membership from
/// logit(p) = 1 + 2 w1 - 2 w2 + 3 w3, two fixed bivariate gamma components.
SimOutput simulate_study1(std::size_t n, std::uint64_t seed);

/// Full-MoE study: all eight expert parameters are log-linear in the
/// covariates and the gating is the steep logit(p) = 10 + 40 w1 + 30 w2 +
/// 100 w3.
SimOutput simulate_study2(std::size_t n, std::uint64_t seed);

/// Generic generator: draws component from the fitted gating, then the
/// component's bivariate gamma, using the covariates of `data`.
SimOutput simulate_from_model(const FittedModel& model, const Dataset& data,
                              std::uint64_t seed);

}  // namespace bgmoe

#endif
