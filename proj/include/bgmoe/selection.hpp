#ifndef BGMOE_SELECTION_HPP
#define BGMOE_SELECTION_HPP

#include <array>
#include <string>
#include <vector>

#include "bgmoe/em.hpp"

namespace bgmoe {

double aic(double loglik, int k);
double bic(double loglik, int k, std::size_t n);
/// ICL = BIC + 2 * responsibility entropy (0 log 0 = 0).
double icl(double bic_value, const Eigen::MatrixXd& z);

enum class Criterion { AIC, BIC, ICL };
Criterion criterion_from_string(const std::string& s);

struct SearchConfig {
    int max_g = 7;
    Criterion criterion = Criterion::AIC;
    /// Candidate covariates per network: gating, alpha1, alpha2, alpha3, beta.
    std::array<std::vector<std::string>, 5> candidates;
    int max_steps = 100;
    std::uint64_t seed = 1;

    /// Same candidate list everywhere.
    static SearchConfig with_candidates(const std::vector<std::string>& covs);
};

struct SearchStep {
    int step = 0;
    std::string move;
    std::string spec_signature;
    double loglik = 0.0;
    double criterion = 0.0;
    bool accepted = false;
};

struct SearchTrace {
    std::vector<SearchStep> steps;
    void to_csv(const std::string& path) const;
};

/// Forward stepwise search. Starts at the G=1 no-covariate model; each step
/// tries adding a component, the single-slot model-type changes reachable
/// with the covariates already selected, and every single-covariate addition
/// (expert networks always, gating once G >= 2); accepts the best strictly
/// improving move.
std::pair<FittedModel, SearchTrace> stepwise(const Dataset& data, const SearchConfig& cfg,
                                             const EMConfig& em_cfg,
                                             const QuadratureConfig& q = {});

}  // namespace bgmoe

#endif
