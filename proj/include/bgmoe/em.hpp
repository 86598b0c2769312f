#ifndef BGMOE_EM_HPP
#define BGMOE_EM_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "bgmoe/estep.hpp"
#include "bgmoe/model.hpp"

namespace bgmoe {

struct EMConfig {
    double tol = 1e-5;            // relative loglik change
    int max_iter = 1000;
    int restarts = 5;
    std::uint64_t seed = 1;
    double allow_decrease = 1e-6; // relative slack before a drop aborts
    bool use_aitken = false;

    void validate() const;
};

struct IterationRecord {
    int iteration = 0;
    double loglik = 0.0;
    double rel_change = 0.0;
    int gating_iters = 0;
    std::array<int, 4> expert_iters{0, 0, 0, 0};
};

struct FitReport {
    std::vector<IterationRecord> trace;     // champion restart
    std::vector<std::string> restart_log;   // one line per restart
    int champion = -1;
};

/// Best-of-restarts ECM fit. Sweep order per iteration: gating, alpha1,
/// alpha2, alpha3, beta (the beta updates consume the freshly updated
/// shapes). Output is canonicalised by ascending fitted mean of Y1+Y2.
FittedModel fit(const Dataset& data, const ModelSpec& spec, const EMConfig& cfg,
                const QuadratureConfig& q = {}, FitReport* report = nullptr);

/// Single EM run from a given starting model (no restarts, no
/// reinitialisation).
FittedModel fit_from(const Dataset& data, const FittedModel& start, const EMConfig& cfg,
                     const QuadratureConfig& q = {}, FitReport* report = nullptr);

/// Starting point: k-means on (log y1, log y2) for the memberships, latent
/// split initialised at min(y1, y2)/2, coefficients from one conditional
/// M-step sweep.
FittedModel initialize(const Dataset& data, const ModelSpec& spec, std::uint64_t seed);

struct IdentifiabilityReport {
    struct Block {
        std::string name;
        double min_eigenvalue = 0.0;  // of the information (negative Hessian)
        bool pass = false;
    };
    std::vector<Block> blocks;
    bool pass = false;

    double min_eigenvalue() const;
};

/// Central finite-difference Hessian of the expected complete-data objective
/// per coefficient block; the fit is locally identifiable when every block's
/// information matrix is positive definite.
IdentifiabilityReport check_identifiability(const FittedModel& model, const Dataset& data,
                                            const QuadratureConfig& q = {});

}  // namespace bgmoe

#endif
