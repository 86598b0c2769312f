#include "bgmoe/mstep.hpp"

#include <cmath>
#include <limits>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "bgmoe/errors.hpp"

namespace bgmoe {

using boost::math::digamma;
using boost::math::trigamma;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kEtaCap = 600.0;  // exp beyond this is useless in double

// Generic damped-Newton ascent with step halving; objective/gradient/Hessian
// supplied by the caller. Keeps the warm start when nothing improves.
template <typename Obj, typename Grad, typename Hess>
CoefUpdate newton_ascend(Eigen::VectorXd x, Obj obj, Grad grad, Hess hess,
                         int max_iter = 100) {
    CoefUpdate out;
    double q = obj(x);
    if (!std::isfinite(q)) {
        // warm start itself is out of range; fall back to zero coefs
        x.setZero();
        q = obj(x);
    }
    int it = 0;
    bool any_progress = false;
    for (; it < max_iter; ++it) {
        const Eigen::VectorXd g = grad(x);
        if (!g.allFinite()) break;
        if (g.lpNorm<Eigen::Infinity>() < 1e-10 * (1.0 + std::abs(q))) break;
        Eigen::MatrixXd h = hess(x);
        double ridge = 0.0;
        Eigen::VectorXd step;
        for (int attempt = 0; attempt < 8; ++attempt) {
            Eigen::MatrixXd hd = -h;
            if (ridge > 0.0) hd.diagonal().array() += ridge;
            Eigen::LDLT<Eigen::MatrixXd> ldlt(hd);
            if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
                step = ldlt.solve(g);
                if (step.allFinite()) break;
            }
            ridge = (ridge == 0.0) ? 1e-10 * (1.0 + h.diagonal().cwiseAbs().maxCoeff())
                                   : ridge * 100.0;
            step.resize(0);
        }
        if (step.size() == 0) step = g;  // gradient ascent fallback

        double t = 1.0;
        bool moved = false;
        for (int halt = 0; halt < 40; ++halt) {
            const Eigen::VectorXd trial = x + t * step;
            const double qt = obj(trial);
            if (std::isfinite(qt) && qt > q) {
                x = trial;
                const double gain = qt - q;
                q = qt;
                moved = true;
                any_progress = true;
                if (gain < 1e-12 * (1.0 + std::abs(q))) it = max_iter;  // done
                break;
            }
            t *= 0.5;
        }
        if (!moved) break;
    }
    out.coefs = std::move(x);
    out.iterations = it;
    out.improved = any_progress;
    out.converged = it < max_iter;
    return out;
}

}  // namespace

// ---- gating ----------------------------------------------------------------

Eigen::VectorXd m_step_gating_proportions(const Eigen::MatrixXd& z) {
    return z.colwise().mean().transpose();
}

double gating_objective(const Eigen::MatrixXd& coefs, const Eigen::MatrixXd& z,
                        const Eigen::MatrixXd& w0) {
    const Eigen::Index n = z.rows();
    const Eigen::Index g = z.cols();
    double q = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::VectorXd eta(g);
        eta.head(g - 1) = coefs * w0.row(i).transpose();
        eta(g - 1) = 0.0;
        const double shift = eta.maxCoeff();
        const double lse = shift + std::log((eta.array() - shift).exp().sum());
        for (Eigen::Index c = 0; c < g; ++c) q += z(i, c) * (eta(c) - lse);
    }
    return q;
}

Eigen::VectorXd gating_gradient(const Eigen::MatrixXd& coefs, const Eigen::MatrixXd& z,
                                const Eigen::MatrixXd& w0) {
    const Eigen::Index n = z.rows();
    const Eigen::Index g = z.cols();
    const Eigen::Index d = w0.cols();
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(g - 1, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::VectorXd eta(g);
        eta.head(g - 1) = coefs * w0.row(i).transpose();
        eta(g - 1) = 0.0;
        const double shift = eta.maxCoeff();
        Eigen::VectorXd p = (eta.array() - shift).exp();
        p /= p.sum();
        for (Eigen::Index c = 0; c < g - 1; ++c) {
            grad.row(c) += (z(i, c) - p(c)) * w0.row(i);
        }
    }
    return grad.reshaped<Eigen::RowMajor>();
}

GatingUpdate m_step_gating_logistic(const Eigen::MatrixXd& z, const Eigen::MatrixXd& w0,
                                    Eigen::MatrixXd warm_start) {
    const Eigen::Index g = z.cols();
    const Eigen::Index d = w0.cols();
    if (warm_start.rows() != g - 1 || warm_start.cols() != d) {
        warm_start = Eigen::MatrixXd::Zero(g - 1, d);
    }
    const Eigen::Index n = z.rows();
    const Eigen::Index dim = (g - 1) * d;

    auto unflatten = [&](const Eigen::VectorXd& v) {
        return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                              Eigen::RowMajor>>(v.data(), g - 1, d)
            .eval();
    };
    auto obj = [&](const Eigen::VectorXd& v) { return gating_objective(unflatten(v), z, w0); };
    auto grad = [&](const Eigen::VectorXd& v) { return gating_gradient(unflatten(v), z, w0); };
    auto hess = [&](const Eigen::VectorXd& v) {
        const Eigen::MatrixXd coefs = unflatten(v);
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
        for (Eigen::Index i = 0; i < n; ++i) {
            Eigen::VectorXd eta(g);
            eta.head(g - 1) = coefs * w0.row(i).transpose();
            eta(g - 1) = 0.0;
            const double shift = eta.maxCoeff();
            Eigen::VectorXd p = (eta.array() - shift).exp();
            p /= p.sum();
            const Eigen::MatrixXd ww = w0.row(i).transpose() * w0.row(i);
            for (Eigen::Index a = 0; a < g - 1; ++a) {
                for (Eigen::Index b = 0; b < g - 1; ++b) {
                    const double s = p(a) * ((a == b ? 1.0 : 0.0) - p(b));
                    h.block(a * d, b * d, d, d) -= s * ww;
                }
            }
        }
        return h;
    };

    Eigen::VectorXd flat = warm_start.reshaped<Eigen::RowMajor>();
    const CoefUpdate r = newton_ascend(flat, obj, grad, hess, 100);
    GatingUpdate out;
    out.coefs = unflatten(r.coefs);
    out.iterations = r.iterations;
    out.converged = r.converged;
    return out;
}

// ---- alpha -----------------------------------------------------------------

double alpha_objective(const Eigen::VectorXd& coefs, const Eigen::VectorXd& weights,
                       const Eigen::MatrixXd& w, const Eigen::VectorXd& log_beta,
                       const Eigen::VectorXd& lx) {
    const Eigen::VectorXd eta = w * coefs;
    if ((eta.array() > kEtaCap).any()) return kNegInf;
    double q = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        if (weights(i) == 0.0) continue;
        const double a = std::exp(eta(i));
        q += weights(i) * (a * (log_beta(i) + lx(i)) - std::lgamma(a));
    }
    return std::isfinite(q) ? q : kNegInf;
}

Eigen::VectorXd alpha_gradient(const Eigen::VectorXd& coefs, const Eigen::VectorXd& weights,
                               const Eigen::MatrixXd& w, const Eigen::VectorXd& log_beta,
                               const Eigen::VectorXd& lx) {
    const Eigen::VectorXd eta = w * coefs;
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(coefs.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        if (weights(i) == 0.0) continue;
        const double a = std::exp(eta(i));
        grad += weights(i) * a * (log_beta(i) + lx(i) - digamma(a)) * w.row(i).transpose();
    }
    return grad;
}

CoefUpdate m_step_alpha_regression(const Eigen::VectorXd& weights, const Eigen::MatrixXd& w,
                                   const Eigen::VectorXd& log_beta, const Eigen::VectorXd& lx,
                                   Eigen::VectorXd warm_start) {
    auto obj = [&](const Eigen::VectorXd& c) {
        return alpha_objective(c, weights, w, log_beta, lx);
    };
    auto grad = [&](const Eigen::VectorXd& c) {
        return alpha_gradient(c, weights, w, log_beta, lx);
    };
    auto hess = [&](const Eigen::VectorXd& c) {
        const Eigen::VectorXd eta = w * c;
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(c.size(), c.size());
        for (Eigen::Index i = 0; i < eta.size(); ++i) {
            if (weights(i) == 0.0) continue;
            const double a = std::exp(eta(i));
            const double b = log_beta(i) + lx(i);
            const double s = weights(i) * a * (b - digamma(a) - a * trigamma(a));
            h += s * (w.row(i).transpose() * w.row(i));
        }
        return h;
    };
    return newton_ascend(std::move(warm_start), obj, grad, hess, 100);
}

double inverse_digamma(double s) {
    return (s >= -2.22) ? std::exp(s) + 0.5 : -1.0 / (s + 0.5772156649015329);
}

double m_step_alpha_constant(const Eigen::VectorXd& weights, const Eigen::VectorXd& log_beta,
                             const Eigen::VectorXd& lx) {
    const double wsum = weights.sum();
    if (!(wsum > 0.0)) throw NumericalError("alpha update with zero total weight");
    const double s = weights.dot(log_beta + lx) / wsum;
    double a = inverse_digamma(s);
    for (int it = 0; it < 60; ++it) {
        const double f = digamma(a) - s;
        if (std::abs(f) < 1e-12) break;
        double next = a - f / trigamma(a);
        if (!(next > 0.0)) next = a / 2.0;
        if (std::abs(next - a) < 1e-14 * a) {
            a = next;
            break;
        }
        a = next;
    }
    return a;
}

// ---- beta ------------------------------------------------------------------

double beta_objective(const Eigen::VectorXd& coefs, const Eigen::VectorXd& weights,
                      const Eigen::MatrixXd& w, const Eigen::VectorXd& alpha_sum,
                      const Eigen::VectorXd& x_sum) {
    const Eigen::VectorXd eta = w * coefs;
    if ((eta.array() > kEtaCap).any()) return kNegInf;
    double q = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        if (weights(i) == 0.0) continue;
        q += weights(i) * (alpha_sum(i) * eta(i) - std::exp(eta(i)) * x_sum(i));
    }
    return std::isfinite(q) ? q : kNegInf;
}

Eigen::VectorXd beta_gradient(const Eigen::VectorXd& coefs, const Eigen::VectorXd& weights,
                              const Eigen::MatrixXd& w, const Eigen::VectorXd& alpha_sum,
                              const Eigen::VectorXd& x_sum) {
    const Eigen::VectorXd eta = w * coefs;
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(coefs.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        if (weights(i) == 0.0) continue;
        grad += weights(i) * (alpha_sum(i) - std::exp(eta(i)) * x_sum(i)) * w.row(i).transpose();
    }
    return grad;
}

CoefUpdate m_step_beta_regression(const Eigen::VectorXd& weights, const Eigen::MatrixXd& w,
                                  const Eigen::VectorXd& alpha_sum, const Eigen::VectorXd& x_sum,
                                  Eigen::VectorXd warm_start) {
    auto obj = [&](const Eigen::VectorXd& c) {
        return beta_objective(c, weights, w, alpha_sum, x_sum);
    };
    auto grad = [&](const Eigen::VectorXd& c) {
        return beta_gradient(c, weights, w, alpha_sum, x_sum);
    };
    auto hess = [&](const Eigen::VectorXd& c) {
        const Eigen::VectorXd eta = w * c;
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(c.size(), c.size());
        for (Eigen::Index i = 0; i < eta.size(); ++i) {
            if (weights(i) == 0.0) continue;
            h -= weights(i) * std::exp(eta(i)) * x_sum(i) * (w.row(i).transpose() * w.row(i));
        }
        return h;
    };
    return newton_ascend(std::move(warm_start), obj, grad, hess, 100);
}

double m_step_beta_constant(const Eigen::VectorXd& weights, const Eigen::VectorXd& alpha_sum,
                            const Eigen::VectorXd& x_sum) {
    const double num = weights.dot(alpha_sum);
    const double den = weights.dot(x_sum);
    if (!(den > 0.0)) throw NumericalError("beta update with non-positive denominator");
    return num / den;
}

}  // namespace bgmoe
