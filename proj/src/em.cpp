#include "bgmoe/em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "bgmoe/errors.hpp"
#include "bgmoe/mstep.hpp"
#include "bgmoe/rng.hpp"

namespace bgmoe {

void EMConfig::validate() const {
    if (!(tol >= 1e-8)) throw DomainError("EM tolerance must be >= 1e-8");
    if (restarts < 1) throw DomainError("EM needs at least one restart");
    if (max_iter < 1) throw DomainError("EM needs at least one iteration");
    if (allow_decrease < 0.0) throw DomainError("allow_decrease must be >= 0");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

FittedModel make_skeleton(const ModelSpec& spec, const DesignSet& design) {
    FittedModel m;
    m.spec = spec;
    m.design_names = design.names;
    m.mixing = Eigen::VectorXd::Constant(spec.g, 1.0 / spec.g);
    if (spec.gating.kind == NetworkKind::V && spec.g > 1) {
        m.gating_coefs = Eigen::MatrixXd::Zero(spec.g - 1, design.w[0].cols());
    }
    const NetworkKind kinds[4] = {spec.alpha[0].kind, spec.alpha[1].kind,
                                  spec.alpha[2].kind, spec.beta.kind};
    for (int k = 0; k < 4; ++k) {
        ExpertNetwork& net = m.experts[k];
        net.kind = kinds[k];
        const Eigen::Index d = design.w[k + 1].cols();
        switch (net.kind) {
            case NetworkKind::V:
                net.coefs.assign(spec.g, Eigen::VectorXd::Zero(d));
                break;
            case NetworkKind::E:
                net.coefs.assign(1, Eigen::VectorXd::Zero(d));
                break;
            case NetworkKind::C:
                net.values = Eigen::VectorXd::Ones(spec.g);
                break;
            case NetworkKind::I:
                net.values = Eigen::VectorXd::Ones(1);
                break;
        }
    }
    m.n_params = param_count(spec, design.dims());
    return m;
}

// Per-observation, per-component resolved values of one expert network.
Eigen::MatrixXd resolve_network(const FittedModel& m, const DesignSet& d, int k) {
    const Eigen::Index n = d.w[k + 1].rows();
    const ExpertNetwork& net = m.experts[k];
    Eigen::MatrixXd out(n, m.spec.g);
    switch (net.kind) {
        case NetworkKind::V:
            for (int g = 0; g < m.spec.g; ++g) {
                out.col(g) = (d.w[k + 1] * net.coefs[g]).array().exp();
            }
            break;
        case NetworkKind::E: {
            const Eigen::VectorXd v = (d.w[k + 1] * net.coefs[0]).array().exp();
            for (int g = 0; g < m.spec.g; ++g) out.col(g) = v;
            break;
        }
        case NetworkKind::C:
            for (int g = 0; g < m.spec.g; ++g) out.col(g).setConstant(net.values(g));
            break;
        case NetworkKind::I:
            out.setConstant(net.values(0));
            break;
    }
    if (!out.allFinite()) {
        throw NumericalError("expert network overflowed the log link");
    }
    return out;
}

// Stack the G columns of per-component quantities for pooled (E/I) updates.
Eigen::VectorXd stack_cols(const Eigen::MatrixXd& m) {
    Eigen::VectorXd v(m.rows() * m.cols());
    for (Eigen::Index g = 0; g < m.cols(); ++g) {
        v.segment(g * m.rows(), m.rows()) = m.col(g);
    }
    return v;
}

Eigen::MatrixXd stack_design(const Eigen::MatrixXd& w, int g) {
    Eigen::MatrixXd out(w.rows() * g, w.cols());
    for (int j = 0; j < g; ++j) out.middleRows(j * w.rows(), w.rows()) = w;
    return out;
}

struct SweepStats {
    int gating_iters = 0;
    std::array<int, 4> expert_iters{0, 0, 0, 0};
};

// One conditional-maximisation sweep: gating, alpha1..3 (using beta from the
// previous iteration), then beta (using the fresh alphas).
SweepStats m_step_sweep(FittedModel& m, const EStepCache& cache, const DesignSet& design) {
    SweepStats stats;
    const int g_count = m.spec.g;
    const Eigen::MatrixXd& z = cache.z;

    // gating
    if (g_count == 1) {
        m.mixing = Eigen::VectorXd::Ones(1);
    } else {
        switch (m.spec.gating.kind) {
            case NetworkKind::C:
                m.mixing = m_step_gating_proportions(z);
                break;
            case NetworkKind::V: {
                auto r = m_step_gating_logistic(z, design.w[0], m.gating_coefs);
                m.gating_coefs = r.coefs;
                stats.gating_iters = r.iterations;
                break;
            }
            case NetworkKind::E:
                m.mixing = Eigen::VectorXd::Constant(g_count, 1.0 / g_count);
                break;
            default:
                throw DomainError("invalid gating kind");
        }
    }

    const Eigen::MatrixXd log_beta = resolve_network(m, design, 3).array().log();

    // alpha networks
    const Eigen::MatrixXd* lx[3] = {&cache.lx1, &cache.lx2, &cache.lx3};
    for (int k = 0; k < 3; ++k) {
        ExpertNetwork& net = m.experts[k];
        const Eigen::MatrixXd& w = design.w[k + 1];
        switch (net.kind) {
            case NetworkKind::V:
                for (int g = 0; g < g_count; ++g) {
                    auto r = m_step_alpha_regression(z.col(g), w, log_beta.col(g),
                                                     lx[k]->col(g), net.coefs[g]);
                    if (r.improved) net.coefs[g] = r.coefs;
                    stats.expert_iters[k] += r.iterations;
                }
                break;
            case NetworkKind::E: {
                auto r = m_step_alpha_regression(stack_cols(z), stack_design(w, g_count),
                                                 stack_cols(log_beta), stack_cols(*lx[k]),
                                                 net.coefs[0]);
                if (r.improved) net.coefs[0] = r.coefs;
                stats.expert_iters[k] = r.iterations;
                break;
            }
            case NetworkKind::C:
                for (int g = 0; g < g_count; ++g) {
                    const double a =
                        m_step_alpha_constant(z.col(g), log_beta.col(g), lx[k]->col(g));
                    if (k != 2 || a >= BGParams::kAlpha3Floor) net.values(g) = a;
                }
                break;
            case NetworkKind::I: {
                const double a = m_step_alpha_constant(stack_cols(z), stack_cols(log_beta),
                                                       stack_cols(*lx[k]));
                if (k != 2 || a >= BGParams::kAlpha3Floor) net.values(0) = a;
                break;
            }
        }
    }

    // beta network, consuming the just-updated alphas
    const Eigen::MatrixXd alpha_sum = resolve_network(m, design, 0) +
                                      resolve_network(m, design, 1) +
                                      resolve_network(m, design, 2);
    const Eigen::MatrixXd x_sum = cache.x1 + cache.x2 + cache.x3;
    ExpertNetwork& bnet = m.experts[3];
    switch (bnet.kind) {
        case NetworkKind::V:
            for (int g = 0; g < g_count; ++g) {
                auto r = m_step_beta_regression(z.col(g), design.w[4], alpha_sum.col(g),
                                                x_sum.col(g), bnet.coefs[g]);
                if (r.improved) bnet.coefs[g] = r.coefs;
                stats.expert_iters[3] += r.iterations;
            }
            break;
        case NetworkKind::E: {
            auto r = m_step_beta_regression(stack_cols(z), stack_design(design.w[4], g_count),
                                            stack_cols(alpha_sum), stack_cols(x_sum),
                                            bnet.coefs[0]);
            if (r.improved) bnet.coefs[0] = r.coefs;
            stats.expert_iters[3] = r.iterations;
            break;
        }
        case NetworkKind::C:
            for (int g = 0; g < g_count; ++g) {
                bnet.values(g) = m_step_beta_constant(z.col(g), alpha_sum.col(g), x_sum.col(g));
            }
            break;
        case NetworkKind::I:
            bnet.values(0) = m_step_beta_constant(stack_cols(z), stack_cols(alpha_sum),
                                                  stack_cols(x_sum));
            break;
    }
    return stats;
}

void canonicalize(FittedModel& m, const DesignSet& design) {
    const int g_count = m.spec.g;
    if (g_count == 1) return;
    const Eigen::MatrixXd mean_sum =
        ((resolve_network(m, design, 0) + resolve_network(m, design, 1) +
          2.0 * resolve_network(m, design, 2))
             .array() /
         resolve_network(m, design, 3).array())
            .matrix();
    std::vector<int> order(g_count);
    std::iota(order.begin(), order.end(), 0);
    const Eigen::VectorXd key = mean_sum.colwise().mean().transpose();
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return key(a) < key(b); });
    if (std::is_sorted(order.begin(), order.end())) return;

    for (auto& net : m.experts) {
        if (net.kind == NetworkKind::V) {
            std::vector<Eigen::VectorXd> coefs(g_count);
            for (int g = 0; g < g_count; ++g) coefs[g] = net.coefs[order[g]];
            net.coefs = std::move(coefs);
        } else if (net.kind == NetworkKind::C) {
            Eigen::VectorXd values(g_count);
            for (int g = 0; g < g_count; ++g) values(g) = net.values(order[g]);
            net.values = values;
        }
    }
    if (m.responsibilities.cols() == g_count) {
        Eigen::MatrixXd z(m.responsibilities.rows(), g_count);
        for (int g = 0; g < g_count; ++g) z.col(g) = m.responsibilities.col(order[g]);
        m.responsibilities = z;
    }
    if (m.spec.gating.kind == NetworkKind::V) {
        // permute the implicit full coefficient matrix, then re-zero the new
        // reference (softmax shift invariance keeps the probabilities exact)
        const Eigen::Index d = m.gating_coefs.cols();
        Eigen::MatrixXd full = Eigen::MatrixXd::Zero(g_count, d);
        full.topRows(g_count - 1) = m.gating_coefs;
        Eigen::MatrixXd permuted(g_count, d);
        for (int g = 0; g < g_count; ++g) permuted.row(g) = full.row(order[g]);
        permuted.rowwise() -= permuted.row(g_count - 1).eval();
        m.gating_coefs = permuted.topRows(g_count - 1);
    } else {
        Eigen::VectorXd mixing(g_count);
        for (int g = 0; g < g_count; ++g) mixing(g) = m.mixing(order[g]);
        m.mixing = mixing;
    }
}

// ---- k-means initialisation -------------------------------------------------

std::vector<int> kmeans_log_scale(const Eigen::MatrixXd& y, int g_count, Rng& rng) {
    const Eigen::Index n = y.rows();
    Eigen::MatrixXd f(n, 2);
    f.col(0) = y.col(0).array().log();
    f.col(1) = y.col(1).array().log();
    for (int j = 0; j < 2; ++j) {
        const double mu = f.col(j).mean();
        const double sd = std::sqrt((f.col(j).array() - mu).square().mean());
        f.col(j) = (f.col(j).array() - mu) / (sd > 0 ? sd : 1.0);
    }

    // k-means++ seeding
    std::vector<Eigen::Vector2d> centers;
    centers.push_back(f.row(static_cast<Eigen::Index>(rng.next_u64() % n)).transpose());
    Eigen::VectorXd d2(n);
    while (static_cast<int>(centers.size()) < g_count) {
        for (Eigen::Index i = 0; i < n; ++i) {
            double best = kInf;
            for (const auto& c : centers) {
                best = std::min(best, (f.row(i).transpose() - c).squaredNorm());
            }
            d2(i) = best;
        }
        const double total = d2.sum();
        double u = rng.uniform() * total;
        Eigen::Index pick = n - 1;
        for (Eigen::Index i = 0; i < n; ++i) {
            u -= d2(i);
            if (u <= 0) {
                pick = i;
                break;
            }
        }
        centers.push_back(f.row(pick).transpose());
    }

    std::vector<int> label(n, 0);
    for (int it = 0; it < 50; ++it) {
        bool changed = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            double bd = kInf;
            for (int g = 0; g < g_count; ++g) {
                const double dist = (f.row(i).transpose() - centers[g]).squaredNorm();
                if (dist < bd) {
                    bd = dist;
                    best = g;
                }
            }
            if (label[i] != best) {
                label[i] = best;
                changed = true;
            }
        }
        std::vector<Eigen::Vector2d> sums(g_count, Eigen::Vector2d::Zero());
        std::vector<int> counts(g_count, 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            sums[label[i]] += f.row(i).transpose();
            ++counts[label[i]];
        }
        for (int g = 0; g < g_count; ++g) {
            if (counts[g] > 0) centers[g] = sums[g] / counts[g];
        }
        if (!changed) break;
    }
    return label;
}

// Gamma shape from mean and mean-log (Minka's closed-form approximation);
// good enough for a starting value.
double shape_from_moments(double mean, double mean_log) {
    const double s = std::log(mean) - mean_log;
    if (!(s > 0.0)) return 1.0;
    return (3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) / (12.0 * s);
}

}  // namespace

FittedModel initialize(const Dataset& data, const ModelSpec& spec, std::uint64_t seed) {
    spec.validate(false);
    const DesignSet design = DesignSet::build(data, spec);
    FittedModel m = make_skeleton(spec, design);
    const Eigen::Index n = static_cast<Eigen::Index>(data.n());
    const int g_count = spec.g;

    Eigen::MatrixXd z;
    if (g_count == 1) {
        z = Eigen::MatrixXd::Ones(n, 1);
    } else {
        const auto dims = design.dims();
        const int dmax = *std::max_element(dims.begin(), dims.end());
        int attempt = 0;
        for (;; ++attempt) {
            if (attempt >= 25) throw FitError("k-means produced degenerate clusters");
            Rng rng = Rng::substream(seed, 7001 + attempt);
            const auto labels = kmeans_log_scale(data.y(), g_count, rng);
            std::vector<int> counts(g_count, 0);
            for (int l : labels) ++counts[l];
            if (*std::min_element(counts.begin(), counts.end()) < std::max(3, dmax + 1)) {
                continue;
            }
            z = Eigen::MatrixXd::Zero(n, g_count);
            for (Eigen::Index i = 0; i < n; ++i) z(i, labels[i]) = 1.0;
            break;
        }
    }

    // Synthetic sufficient statistics: latent split at half the minimum.
    EStepCache cache;
    cache.z = z;
    cache.x3 = data.y().rowwise().minCoeff().replicate(1, g_count) / 2.0;
    cache.x1 = data.y().col(0).replicate(1, g_count) - cache.x3;
    cache.x2 = data.y().col(1).replicate(1, g_count) - cache.x3;
    cache.lx1 = cache.x1.array().log();
    cache.lx2 = cache.x2.array().log();
    cache.lx3 = cache.x3.array().log();

    // Moment-based starting values for the shapes and rates.
    const Eigen::MatrixXd* xs[3] = {&cache.x1, &cache.x2, &cache.x3};
    const Eigen::MatrixXd* lxs[3] = {&cache.lx1, &cache.lx2, &cache.lx3};
    Eigen::MatrixXd shape0(3, g_count);
    Eigen::VectorXd rate0(g_count);
    for (int g = 0; g < g_count; ++g) {
        const double zg = z.col(g).sum();
        double mean_total = 0.0;
        for (int k = 0; k < 3; ++k) {
            const double mk = z.col(g).dot(xs[k]->col(g)) / zg;
            const double lk = z.col(g).dot(lxs[k]->col(g)) / zg;
            shape0(k, g) = std::max(shape_from_moments(mk, lk), 1e-3);
            mean_total += mk;
        }
        rate0(g) = shape0.col(g).sum() / mean_total;
    }
    for (int k = 0; k < 3; ++k) {
        ExpertNetwork& net = m.experts[k];
        switch (net.kind) {
            case NetworkKind::V:
                for (int g = 0; g < g_count; ++g) net.coefs[g](0) = std::log(shape0(k, g));
                break;
            case NetworkKind::E:
                net.coefs[0](0) = std::log(shape0.row(k).mean());
                break;
            case NetworkKind::C:
                net.values = shape0.row(k).transpose();
                break;
            case NetworkKind::I:
                net.values(0) = shape0.row(k).mean();
                break;
        }
    }
    ExpertNetwork& bnet = m.experts[3];
    switch (bnet.kind) {
        case NetworkKind::V:
            for (int g = 0; g < g_count; ++g) bnet.coefs[g](0) = std::log(rate0(g));
            break;
        case NetworkKind::E:
            bnet.coefs[0](0) = std::log(rate0.mean());
            break;
        case NetworkKind::C:
            bnet.values = rate0;
            break;
        case NetworkKind::I:
            bnet.values(0) = rate0.mean();
            break;
    }

    m_step_sweep(m, cache, design);
    m.responsibilities = z;
    m.loglik = -kInf;
    return m;
}

namespace {

FittedModel run_em(const Dataset& data, const DesignSet& design, FittedModel model,
                   const EMConfig& cfg, const QuadratureConfig& q,
                   std::vector<IterationRecord>* trace) {
    const auto dims = design.dims();
    const int dmax = *std::max_element(dims.begin(), dims.end());
    double prev = -kInf, prev2 = -kInf;
    SweepStats stats;
    int it = 0;
    bool converged = false;
    double ll = -kInf;
    EStepCache cache;
    for (it = 1; it <= cfg.max_iter; ++it) {
        cache = e_step(data, design, model, q);
        ll = cache.loglik;
        if (!std::isfinite(ll)) throw FitError("non-finite log-likelihood");
        if (model.spec.g > 1 &&
            cache.z.colwise().sum().minCoeff() < static_cast<double>(dmax + 1)) {
            throw FitError("component collapsed (effective size below dim+1) at iteration " +
                           std::to_string(it));
        }
        const double rel = (it > 1) ? (ll - prev) / std::abs(ll) : kInf;
        if (trace) {
            trace->push_back({it, ll, rel, stats.gating_iters, stats.expert_iters});
        }
        if (it > 1) {
            if (ll < prev - cfg.allow_decrease * std::abs(prev)) {
                std::ostringstream ss;
                ss << "log-likelihood decreased at iteration " << it << ": " << prev
                   << " -> " << ll;
                throw FitError(ss.str());
            }
            bool stop;
            if (cfg.use_aitken && it > 2 && prev != prev2) {
                const double a = (ll - prev) / (prev - prev2);
                const double ll_inf =
                    (a < 1.0) ? prev + (ll - prev) / (1.0 - a) : kInf;
                stop = std::isfinite(ll_inf) && std::abs(ll_inf - ll) <= cfg.tol * std::abs(ll);
            } else {
                stop = std::abs(ll - prev) <= cfg.tol * std::abs(ll);
            }
            if (stop) {
                converged = true;
                break;
            }
        }
        stats = m_step_sweep(model, cache, design);
        prev2 = prev;
        prev = ll;
    }
    model.loglik = ll;
    model.responsibilities = cache.z;
    model.converged = converged;
    model.iterations = std::min(it, cfg.max_iter);
    canonicalize(model, design);
    return model;
}

}  // namespace

FittedModel fit(const Dataset& data, const ModelSpec& spec, const EMConfig& cfg,
                const QuadratureConfig& q, FitReport* report) {
    spec.validate(false);
    cfg.validate();
    q.validate();
    const DesignSet design = DesignSet::build(data, spec);

    FittedModel best;
    bool have_best = false;
    std::vector<IterationRecord> best_trace;
    std::vector<std::string> log;
    int champion = -1;

    for (int r = 0; r < cfg.restarts; ++r) {
        std::vector<IterationRecord> trace;
        try {
            FittedModel start = initialize(data, spec, cfg.seed + 1000003ULL * r);
            FittedModel m = run_em(data, design, std::move(start), cfg, q, &trace);
            std::ostringstream ss;
            ss << "restart " << r << ": loglik=" << m.loglik << " iterations="
               << m.iterations << (m.converged ? "" : " (not converged)");
            log.push_back(ss.str());
            if (!have_best || m.loglik > best.loglik + 1e-9) {
                best = std::move(m);
                best_trace = std::move(trace);
                champion = r;
                have_best = true;
            }
        } catch (const std::exception& e) {
            log.push_back("restart " + std::to_string(r) + ": failed: " + e.what());
        }
    }
    if (report) {
        report->restart_log = log;
        report->trace = best_trace;
        report->champion = champion;
    }
    if (!have_best) {
        std::string all;
        for (const auto& line : log) all += "\n  " + line;
        throw FitError("all restarts failed:" + all);
    }
    return best;
}

FittedModel fit_from(const Dataset& data, const FittedModel& start, const EMConfig& cfg,
                     const QuadratureConfig& q, FitReport* report) {
    cfg.validate();
    q.validate();
    const DesignSet design = DesignSet::rebuild(data, start.design_names);
    std::vector<IterationRecord> trace;
    FittedModel m = run_em(data, design, start, cfg, q, &trace);
    if (report) {
        report->trace = std::move(trace);
        report->restart_log = {"warm start: loglik=" + std::to_string(m.loglik)};
        report->champion = 0;
    }
    return m;
}

// ---- identifiability --------------------------------------------------------

namespace {

// Central-difference Hessian of a scalar function of a vector.
template <typename F>
Eigen::MatrixXd fd_hessian(const Eigen::VectorXd& x, F f) {
    const Eigen::Index d = x.size();
    Eigen::VectorXd h(d);
    for (Eigen::Index j = 0; j < d; ++j) h(j) = 1e-4 * (1.0 + std::abs(x(j)));
    Eigen::MatrixXd hess(d, d);
    const double f0 = f(x);
    for (Eigen::Index i = 0; i < d; ++i) {
        Eigen::VectorXd xp = x, xm = x;
        xp(i) += h(i);
        xm(i) -= h(i);
        hess(i, i) = (f(xp) - 2.0 * f0 + f(xm)) / (h(i) * h(i));
        for (Eigen::Index j = i + 1; j < d; ++j) {
            Eigen::VectorXd xpp = x, xpm = x, xmp = x, xmm = x;
            xpp(i) += h(i); xpp(j) += h(j);
            xpm(i) += h(i); xpm(j) -= h(j);
            xmp(i) -= h(i); xmp(j) += h(j);
            xmm(i) -= h(i); xmm(j) -= h(j);
            hess(i, j) = hess(j, i) =
                (f(xpp) - f(xpm) - f(xmp) + f(xmm)) / (4.0 * h(i) * h(j));
        }
    }
    return hess;
}

IdentifiabilityReport::Block make_block(const std::string& name, const Eigen::MatrixXd& hess) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(-hess);  // information
    IdentifiabilityReport::Block b;
    b.name = name;
    b.min_eigenvalue = es.eigenvalues().minCoeff();
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    b.pass = b.min_eigenvalue > 1e-8 * scale;
    return b;
}

}  // namespace

double IdentifiabilityReport::min_eigenvalue() const {
    double v = kInf;
    for (const auto& b : blocks) v = std::min(v, b.min_eigenvalue);
    return v;
}

IdentifiabilityReport check_identifiability(const FittedModel& model, const Dataset& data,
                                            const QuadratureConfig& q) {
    const DesignSet design = DesignSet::rebuild(data, model.design_names);
    const EStepCache cache = e_step(data, design, model, q);
    const int g_count = model.spec.g;
    const Eigen::MatrixXd log_beta = resolve_network(model, design, 3).array().log();
    const Eigen::MatrixXd alpha_sum = resolve_network(model, design, 0) +
                                      resolve_network(model, design, 1) +
                                      resolve_network(model, design, 2);
    const Eigen::MatrixXd x_sum = cache.x1 + cache.x2 + cache.x3;

    IdentifiabilityReport report;

    if (g_count > 1) {
        if (model.spec.gating.kind == NetworkKind::V) {
            const Eigen::Index d = design.w[0].cols();
            auto f = [&](const Eigen::VectorXd& v) {
                const auto coefs = Eigen::Map<const Eigen::Matrix<
                    double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
                    v.data(), g_count - 1, d);
                return gating_objective(coefs, cache.z, design.w[0]);
            };
            const Eigen::VectorXd x = model.gating_coefs.reshaped<Eigen::RowMajor>();
            report.blocks.push_back(make_block("gating", fd_hessian(x, f)));
        } else if (model.spec.gating.kind == NetworkKind::C) {
            auto f = [&](const Eigen::VectorXd& tau_head) {
                const double tau_last = 1.0 - tau_head.sum();
                if (tau_last <= 0.0 || (tau_head.array() <= 0.0).any()) return -kInf;
                double qv = 0.0;
                for (Eigen::Index i = 0; i < cache.z.rows(); ++i) {
                    for (int g = 0; g < g_count; ++g) {
                        const double tg = (g == g_count - 1) ? tau_last : tau_head(g);
                        qv += cache.z(i, g) * std::log(tg);
                    }
                }
                return qv;
            };
            report.blocks.push_back(
                make_block("gating", fd_hessian(model.mixing.head(g_count - 1), f)));
        }
    }

    const Eigen::MatrixXd* lx[3] = {&cache.lx1, &cache.lx2, &cache.lx3};
    for (int k = 0; k < 3; ++k) {
        const ExpertNetwork& net = model.experts[k];
        const std::string base = "alpha" + std::to_string(k + 1);
        const Eigen::MatrixXd& w = design.w[k + 1];
        switch (net.kind) {
            case NetworkKind::V:
                for (int g = 0; g < g_count; ++g) {
                    auto f = [&, g](const Eigen::VectorXd& c) {
                        return alpha_objective(c, cache.z.col(g), w, log_beta.col(g),
                                               lx[k]->col(g));
                    };
                    report.blocks.push_back(make_block(
                        base + "[g=" + std::to_string(g + 1) + "]", fd_hessian(net.coefs[g], f)));
                }
                break;
            case NetworkKind::E: {
                auto f = [&](const Eigen::VectorXd& c) {
                    return alpha_objective(c, stack_cols(cache.z), stack_design(w, g_count),
                                           stack_cols(log_beta), stack_cols(*lx[k]));
                };
                report.blocks.push_back(make_block(base, fd_hessian(net.coefs[0], f)));
                break;
            }
            case NetworkKind::C:
                for (int g = 0; g < g_count; ++g) {
                    auto f = [&, g](const Eigen::VectorXd& a) {
                        if (a(0) <= 0.0) return -kInf;
                        const Eigen::VectorXd c = Eigen::VectorXd::Constant(1, std::log(a(0)));
                        return alpha_objective(c, cache.z.col(g),
                                               Eigen::MatrixXd::Ones(cache.z.rows(), 1),
                                               log_beta.col(g), lx[k]->col(g));
                    };
                    report.blocks.push_back(
                        make_block(base + "[g=" + std::to_string(g + 1) + "]",
                                   fd_hessian(net.values.segment(g, 1), f)));
                }
                break;
            case NetworkKind::I: {
                auto f = [&](const Eigen::VectorXd& a) {
                    if (a(0) <= 0.0) return -kInf;
                    const Eigen::VectorXd c = Eigen::VectorXd::Constant(1, std::log(a(0)));
                    return alpha_objective(c, stack_cols(cache.z),
                                           Eigen::MatrixXd::Ones(cache.z.size(), 1),
                                           stack_cols(log_beta), stack_cols(*lx[k]));
                };
                report.blocks.push_back(make_block(base, fd_hessian(net.values, f)));
                break;
            }
        }
    }

    const ExpertNetwork& bnet = model.experts[3];
    switch (bnet.kind) {
        case NetworkKind::V:
            for (int g = 0; g < g_count; ++g) {
                auto f = [&, g](const Eigen::VectorXd& c) {
                    return beta_objective(c, cache.z.col(g), design.w[4], alpha_sum.col(g),
                                          x_sum.col(g));
                };
                report.blocks.push_back(make_block("beta[g=" + std::to_string(g + 1) + "]",
                                                   fd_hessian(bnet.coefs[g], f)));
            }
            break;
        case NetworkKind::E: {
            auto f = [&](const Eigen::VectorXd& c) {
                return beta_objective(c, stack_cols(cache.z), stack_design(design.w[4], g_count),
                                      stack_cols(alpha_sum), stack_cols(x_sum));
            };
            report.blocks.push_back(make_block("beta", fd_hessian(bnet.coefs[0], f)));
            break;
        }
        case NetworkKind::C:
            for (int g = 0; g < g_count; ++g) {
                auto f = [&, g](const Eigen::VectorXd& b) {
                    if (b(0) <= 0.0) return -kInf;
                    const Eigen::VectorXd c = Eigen::VectorXd::Constant(1, std::log(b(0)));
                    return beta_objective(c, cache.z.col(g),
                                          Eigen::MatrixXd::Ones(cache.z.rows(), 1),
                                          alpha_sum.col(g), x_sum.col(g));
                };
                report.blocks.push_back(make_block("beta[g=" + std::to_string(g + 1) + "]",
                                                   fd_hessian(bnet.values.segment(g, 1), f)));
            }
            break;
        case NetworkKind::I: {
            auto f = [&](const Eigen::VectorXd& b) {
                if (b(0) <= 0.0) return -kInf;
                const Eigen::VectorXd c = Eigen::VectorXd::Constant(1, std::log(b(0)));
                return beta_objective(c, stack_cols(cache.z),
                                      Eigen::MatrixXd::Ones(cache.z.size(), 1),
                                      stack_cols(alpha_sum), stack_cols(x_sum));
            };
            report.blocks.push_back(make_block("beta", fd_hessian(bnet.values, f)));
            break;
        }
    }

    report.pass = std::all_of(report.blocks.begin(), report.blocks.end(),
                              [](const auto& b) { return b.pass; });
    return report;
}

}  // namespace bgmoe
