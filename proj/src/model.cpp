#include "bgmoe/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bgmoe/errors.hpp"

namespace bgmoe {

char kind_letter(NetworkKind k) { return static_cast<char>(k); }

NetworkKind kind_from_letter(char c) {
    switch (c) {
        case 'C': return NetworkKind::C;
        case 'V': return NetworkKind::V;
        case 'E': return NetworkKind::E;
        case 'I': return NetworkKind::I;
        default: throw DomainError(std::string("unknown network kind letter: ") + c);
    }
}

namespace {

bool regressed(NetworkKind k) { return k == NetworkKind::V || k == NetworkKind::E; }

}  // namespace

std::string ModelSpec::name() const {
    const NetworkKind ak = alpha_kind();
    const NetworkKind bk = beta.kind;
    if (g == 1) {
        // V collapses to E and C to I when there is a single component.
        const char a = regressed(ak) ? 'E' : 'I';
        const char b = regressed(bk) ? 'E' : 'I';
        return std::string{a, b};
    }
    return std::string{kind_letter(gating.kind), kind_letter(ak), kind_letter(bk)};
}

void ModelSpec::validate(bool strict) const {
    if (g < 1) throw DomainError("component count must be >= 1");
    if (gating.kind == NetworkKind::I) {
        throw DomainError("gating network admits kinds C, V, E only");
    }
    if (alpha[1].kind != alpha[0].kind || alpha[2].kind != alpha[0].kind) {
        throw DomainError("alpha networks must share one kind");
    }
    auto check_net = [&](const NetworkSpec& net, const std::string& label,
                         bool allow_empty_when_regressed) {
        if (regressed(net.kind)) {
            if (strict && !allow_empty_when_regressed && net.covariates.empty()) {
                throw DomainError(label + ": kinds V/E require covariates");
            }
        } else if (!net.covariates.empty()) {
            throw DomainError(label + ": kinds C/I admit no covariates");
        }
    };
    check_net(gating, "gating", false);
    // Individual alpha networks may be intercept-only under a V/E slot (an
    // exact reparameterisation of a constant); at least one must carry a
    // covariate for the slot letter to mean anything.
    bool any_alpha_cov = false;
    for (int k = 0; k < 3; ++k) {
        check_net(alpha[k], "alpha" + std::to_string(k + 1), true);
        any_alpha_cov = any_alpha_cov || !alpha[k].covariates.empty();
    }
    if (strict && regressed(alpha_kind()) && !any_alpha_cov) {
        throw DomainError("alpha slot V/E requires covariates in some alpha network");
    }
    check_net(beta, "beta", false);
    if (g == 1) {
        if (gating.kind == NetworkKind::V) {
            throw DomainError("gating covariates are meaningless when g == 1");
        }
    } else {
        const bool alpha_specific = alpha_kind() == NetworkKind::C || alpha_kind() == NetworkKind::V;
        const bool beta_specific = beta.kind == NetworkKind::C || beta.kind == NetworkKind::V;
        if (!alpha_specific && !beta_specific) {
            throw DomainError("g >= 2 needs a component-specific alpha or beta network");
        }
    }
}

std::string ModelSpec::signature() const {
    std::ostringstream ss;
    ss << kind_letter(gating.kind) << kind_letter(alpha_kind()) << kind_letter(beta.kind)
       << "/g=" << g;
    auto dump = [&ss](const NetworkSpec& net) {
        ss << "[";
        for (std::size_t i = 0; i < net.covariates.size(); ++i) {
            if (i) ss << ",";
            ss << net.covariates[i];
        }
        ss << "]";
    };
    dump(gating);
    for (const auto& a : alpha) dump(a);
    dump(beta);
    return ss.str();
}

DesignSet DesignSet::build(const Dataset& data, const ModelSpec& spec) {
    DesignSet d;
    const NetworkSpec* nets[5] = {&spec.gating, &spec.alpha[0], &spec.alpha[1],
                                  &spec.alpha[2], &spec.beta};
    for (int j = 0; j < 5; ++j) {
        std::tie(d.w[j], d.names[j]) = data.design(nets[j]->covariates);
    }
    return d;
}

DesignSet DesignSet::rebuild(const Dataset& data,
                             const std::array<std::vector<std::string>, 5>& names) {
    DesignSet d;
    for (int j = 0; j < 5; ++j) {
        d.names[j] = names[j];
        d.w[j] = data.design_from_names(names[j]);
    }
    return d;
}

std::array<int, 5> DesignSet::dims() const {
    std::array<int, 5> out;
    for (int j = 0; j < 5; ++j) out[j] = static_cast<int>(w[j].cols());
    return out;
}

double link_alpha(const Eigen::VectorXd& coefs, const Eigen::VectorXd& w) {
    if (coefs.size() != w.size()) {
        throw DomainError("link: coefficient/design dimension mismatch");
    }
    const double v = std::exp(coefs.dot(w));
    if (!std::isfinite(v)) {
        throw NumericalError("log-link overflow", coefs.dot(w), 0.0);
    }
    return v;
}

Eigen::VectorXd gating_probs(const Eigen::MatrixXd& coefs, const Eigen::VectorXd& w0) {
    const Eigen::Index g = coefs.rows() + 1;
    Eigen::VectorXd eta(g);
    eta.head(g - 1) = coefs * w0;
    eta(g - 1) = 0.0;
    const double shift = eta.maxCoeff();
    Eigen::VectorXd p = (eta.array() - shift).exp();
    p /= p.sum();
    return p;
}

int param_count(const ModelSpec& spec, const std::array<int, 5>& dims) {
    int count = 0;
    switch (spec.gating.kind) {
        case NetworkKind::V: count += (spec.g - 1) * dims[0]; break;
        case NetworkKind::C: count += spec.g - 1; break;
        case NetworkKind::E: break;
        default: throw DomainError("invalid gating kind");
    }
    auto expert = [&](NetworkKind k, int dim) {
        switch (k) {
            case NetworkKind::V: return spec.g * dim;
            case NetworkKind::E: return dim;
            case NetworkKind::C: return spec.g;
            case NetworkKind::I: return 1;
        }
        return 0;
    };
    for (int k = 0; k < 3; ++k) count += expert(spec.alpha[k].kind, dims[k + 1]);
    count += expert(spec.beta.kind, dims[4]);
    return count;
}

Eigen::VectorXd FittedModel::gating_probs_at(const Eigen::VectorXd& w0) const {
    if (spec.gating.kind == NetworkKind::V && spec.g > 1) {
        return gating_probs(gating_coefs, w0);
    }
    return mixing;
}

std::vector<BGParams> FittedModel::params_at(const DesignSet& d, Eigen::Index i) const {
    auto value = [&](const ExpertNetwork& net, int which, int g) -> double {
        switch (net.kind) {
            case NetworkKind::V:
                return link_alpha(net.coefs[g], d.w[which].row(i).transpose());
            case NetworkKind::E:
                return link_alpha(net.coefs[0], d.w[which].row(i).transpose());
            case NetworkKind::C:
                return net.values(g);
            case NetworkKind::I:
                return net.values(0);
        }
        return 0.0;
    };
    std::vector<BGParams> out(spec.g);
    for (int g = 0; g < spec.g; ++g) {
        out[g].alpha1 = value(experts[0], 1, g);
        out[g].alpha2 = value(experts[1], 2, g);
        out[g].alpha3 = value(experts[2], 3, g);
        out[g].beta = value(experts[3], 4, g);
    }
    return out;
}

Eigen::Vector2d FittedModel::predict_mean_at(const DesignSet& d, Eigen::Index i) const {
    const Eigen::VectorXd tau = gating_probs_at(d.w[0].row(i).transpose());
    const auto params = params_at(d, i);
    Eigen::Vector2d out = Eigen::Vector2d::Zero();
    for (int g = 0; g < spec.g; ++g) {
        out += tau(g) * moments(params[g]).mean;
    }
    return out;
}

Eigen::MatrixXd predict_mean(const FittedModel& model, const DesignSet& d) {
    Eigen::MatrixXd out(d.n(), 2);
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        out.row(i) = model.predict_mean_at(d, i).transpose();
    }
    return out;
}

BGMoments mixture_moments(const std::vector<BGParams>& components,
                          const Eigen::VectorXd& weights) {
    if (components.empty() || weights.size() != static_cast<Eigen::Index>(components.size())) {
        throw DomainError("mixture_moments: component/weight size mismatch");
    }
    if (std::abs(weights.sum() - 1.0) > 1e-10) {
        throw DomainError("mixture weights must sum to 1");
    }
    // Var(Y) = A D A^T where D = E[theta theta^T + diag(alpha_j / beta^2)]
    //          - E[theta] E[theta]^T, theta = (alpha_1, alpha_2, alpha_3)/beta.
    Eigen::Vector3d mean_theta = Eigen::Vector3d::Zero();
    Eigen::Matrix3d second = Eigen::Matrix3d::Zero();
    for (std::size_t g = 0; g < components.size(); ++g) {
        const auto& p = components[g];
        const double w = weights(static_cast<Eigen::Index>(g));
        const Eigen::Vector3d theta(p.alpha1 / p.beta, p.alpha2 / p.beta, p.alpha3 / p.beta);
        mean_theta += w * theta;
        second += w * (theta * theta.transpose());
        const double b2 = p.beta * p.beta;
        second += w * Eigen::Vector3d(p.alpha1 / b2, p.alpha2 / b2, p.alpha3 / b2).asDiagonal();
    }
    const Eigen::Matrix3d d_mat = second - mean_theta * mean_theta.transpose();
    Eigen::Matrix<double, 2, 3> a_mat;
    a_mat << 1, 0, 1,
             0, 1, 1;
    BGMoments out;
    out.mean = a_mat * mean_theta;
    out.cov = a_mat * d_mat * a_mat.transpose();
    return out;
}

std::vector<int> classify(const FittedModel& model) {
    const auto& z = model.responsibilities;
    if (z.rows() == 0) throw DomainError("classify: responsibilities missing");
    std::vector<int> labels(z.rows());
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        int best = 0;
        for (Eigen::Index g = 1; g < z.cols(); ++g) {
            if (z(i, g) > z(i, best)) best = static_cast<int>(g);
        }
        labels[i] = best + 1;
    }
    return labels;
}

}  // namespace bgmoe
