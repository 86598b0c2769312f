#ifndef BGMOE_METRICS_HPP
#define BGMOE_METRICS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bgmoe/glm.hpp"
#include "bgmoe/model.hpp"

namespace bgmoe {

/// CRPS of one observation against an m-sample from the predictive
/// distribution: mean|s - y| - mean|s - s'|/2. O(m log m).
double crps_empirical(std::vector<double> samples, double observation);

double rmse(const Eigen::VectorXd& predictions, const Eigen::VectorXd& actuals);

/// Ordered (concentration-curve) Gini: twice the area between the diagonal
/// and the curve of cumulative actual shares sorted by ascending prediction;
/// tied predictions are pooled. Larger is better; 0 when the actuals are all
/// equal.
double gini_ordered(const Eigen::VectorXd& predictions, const Eigen::VectorXd& actuals);

/// Order-1 Wasserstein distance between two empirical distributions via the
/// quantile-function integral with mass splitting when sizes differ.
double wasserstein_1d(std::vector<double> a, std::vector<double> b);

double adjusted_rand(const std::vector<int>& labels_a, const std::vector<int>& labels_b);

/// Minimum error rate over label permutations (exhaustive; up to 8 groups).
double misclassification(const std::vector<int>& labels_a, const std::vector<int>& labels_b);

/// Draws from the fitted mixture at observation i: component from the gating,
/// then the component's bivariate gamma. Deterministic given seed.
std::vector<std::pair<double, double>> predictive_samples(const FittedModel& model,
                                                          const DesignSet& d, Eigen::Index i,
                                                          std::size_t m, std::uint64_t seed);

/// Gamma draws with the GLM mean and Pearson dispersion; same role as
/// predictive_samples for the baseline model.
std::vector<double> glm_predictive_samples(const GlmFit& fit, const Eigen::MatrixXd& x,
                                           Eigen::Index i, std::size_t m, std::uint64_t seed);

/// Score table mirroring the paper-style comparison layout: one row each for
/// Y1+Y2, Y1 and Y2.
struct ScoreReport {
    struct Row {
        std::string target;
        double crps = 0.0, rmse = 0.0, gini = 0.0, wasserstein = 0.0;
    };
    std::vector<Row> rows;
    void to_csv(const std::string& path) const;
};

}  // namespace bgmoe

#endif
