#include "bgmoe/estep.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "bgmoe/errors.hpp"

namespace bgmoe {

double pairwise_sum(const double* v, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

int effective_threads() {
#ifdef _OPENMP
    int max = omp_get_max_threads();
#else
    int max = 1;
#endif
    if (const char* env = std::getenv("BGMOE_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1 && cap < max) max = cap;
    }
    return max;
}

namespace {

struct CellFailure {
    bool failed = false;
    Eigen::Index i = 0, g = 0;
    std::string message;
};

template <bool Parallel>
EStepCache e_step_impl(const Dataset& data, const DesignSet& design,
                       const FittedModel& model, const QuadratureConfig& q) {
    const Eigen::Index n = static_cast<Eigen::Index>(data.n());
    const Eigen::Index g_count = model.spec.g;
    EStepCache c;
    c.z.resize(n, g_count);
    c.x1.resize(n, g_count);
    c.x2.resize(n, g_count);
    c.x3.resize(n, g_count);
    c.lx1.resize(n, g_count);
    c.lx2.resize(n, g_count);
    c.lx3.resize(n, g_count);
    c.logf.resize(n, g_count);
    c.logtau.resize(n, g_count);

    CellFailure failure;

    // Conditional moments per cell. Each cell is independent; results land in
    // preallocated slots, so the schedule cannot change the numbers.
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8) num_threads(effective_threads()) if (Parallel)
#endif
    for (Eigen::Index i = 0; i < n; ++i) {
        if (failure.failed) continue;
        try {
            const double y1 = data.y()(i, 0);
            const double y2 = data.y()(i, 1);
            const auto params = model.params_at(design, i);
            const Eigen::VectorXd tau = model.gating_probs_at(design.w[0].row(i).transpose());
            for (Eigen::Index g = 0; g < g_count; ++g) {
                const auto [cm, log_f] = conditional_moments_with_density(y1, y2, params[g], q);
                c.x1(i, g) = cm.e_x1;
                c.x2(i, g) = cm.e_x2;
                c.x3(i, g) = cm.e_x3;
                c.lx1(i, g) = cm.e_log_x1;
                c.lx2(i, g) = cm.e_log_x2;
                c.lx3(i, g) = cm.e_log_x3;
                c.logf(i, g) = log_f;
                c.logtau(i, g) = std::log(tau(g));
            }
        } catch (const std::exception& e) {
#ifdef _OPENMP
#pragma omp critical
#endif
            {
                if (!failure.failed) {
                    failure.failed = true;
                    failure.i = i;
                    failure.message = e.what();
                }
            }
        }
    }
    if (failure.failed) {
        throw FitError("E-step failed at observation " + std::to_string(failure.i) +
                       ": " + failure.message);
    }

    // Responsibilities and loglik; serial fixed-order pass.
    Eigen::VectorXd per_obs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::VectorXd l = (c.logtau.row(i) + c.logf.row(i)).transpose();
        const double shift = l.maxCoeff();
        const Eigen::VectorXd e = (l.array() - shift).exp();
        const double total = e.sum();
        c.z.row(i) = (e / total).transpose();
        per_obs(i) = shift + std::log(total);
    }
    c.loglik = pairwise_sum(per_obs.data(), static_cast<std::size_t>(n));
    return c;
}

}  // namespace

EStepCache e_step(const Dataset& data, const DesignSet& design,
                  const FittedModel& model, const QuadratureConfig& q) {
    return e_step_impl<true>(data, design, model, q);
}

EStepCache e_step_serial(const Dataset& data, const DesignSet& design,
                         const FittedModel& model, const QuadratureConfig& q) {
    return e_step_impl<false>(data, design, model, q);
}

}  // namespace bgmoe
