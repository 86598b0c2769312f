#ifndef BGMOE_MODEL_HPP
#define BGMOE_MODEL_HPP

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bgmoe/bivariate_gamma.hpp"
#include "bgmoe/dataset.hpp"

namespace bgmoe {

/// Parameterisation of one network. C: free per-component constant.
/// V: per-component regression on covariates. E: one regression shared by
/// all components (equal mixing 1/G in the gating slot). I: one global
/// constant shared by all components.
enum class NetworkKind : char { C = 'C', V = 'V', E = 'E', I = 'I' };

char kind_letter(NetworkKind k);
NetworkKind kind_from_letter(char c);

struct NetworkSpec {
    NetworkKind kind = NetworkKind::I;
    std::vector<std::string> covariates;
};

/// One member of the model family: component count, gating network, the
/// three alpha expert networks (one kind, per-k covariate lists) and the
/// beta expert network.
struct ModelSpec {
    int g = 1;
    NetworkSpec gating;               // kinds C, V, E only
    std::array<NetworkSpec, 3> alpha; // shared kind across k
    NetworkSpec beta;

    /// Three-letter gating/alpha/beta type string ("VCC"); collapses to the
    /// two-letter G=1 form (II, EE, EI or IE) when g == 1.
    std::string name() const;
    NetworkKind alpha_kind() const { return alpha[0].kind; }

    /// strict=false additionally admits intercept-only V/E networks, which
    /// are exact reparameterisations of C/I used by equivalence tests.
    void validate(bool strict = true) const;

    /// Stable key for memoisation and trace output.
    std::string signature() const;
};

/// Per-network design matrices (leading intercept) for one dataset.
struct DesignSet {
    std::array<Eigen::MatrixXd, 5> w;                    // gating, a1, a2, a3, beta
    std::array<std::vector<std::string>, 5> names;

    static DesignSet build(const Dataset& data, const ModelSpec& spec);
    /// Rebuild from stored expanded names (prediction on new data).
    static DesignSet rebuild(const Dataset& data,
                             const std::array<std::vector<std::string>, 5>& names);
    std::size_t n() const { return static_cast<std::size_t>(w[0].rows()); }
    std::array<int, 5> dims() const;
};

struct ExpertNetwork {
    NetworkKind kind = NetworkKind::I;
    std::vector<Eigen::VectorXd> coefs;  // V: one per component; E: single entry
    Eigen::VectorXd values;              // C: per component; I: single entry
};

/// A fitted (or initialised) model. Immutable after fitting; components are
/// stored in canonical order of ascending fitted mean of Y1+Y2.
struct FittedModel {
    ModelSpec spec;
    std::array<std::vector<std::string>, 5> design_names;
    Eigen::MatrixXd gating_coefs;  // (G-1) x d0 when gating is V, else empty
    Eigen::VectorXd mixing;        // G; used by gating kinds C and E
    std::array<ExpertNetwork, 4> experts;  // alpha1, alpha2, alpha3, beta
    double loglik = 0.0;
    int n_params = 0;
    bool converged = false;
    int iterations = 0;
    Eigen::MatrixXd responsibilities;  // n x G from the final E-step

    /// Mixing probabilities at one observation (row of the gating design).
    Eigen::VectorXd gating_probs_at(const Eigen::VectorXd& w0) const;
    /// Component parameters resolved at observation i.
    std::vector<BGParams> params_at(const DesignSet& d, Eigen::Index i) const;
    /// Mixture mean of (Y1, Y2) at observation i.
    Eigen::Vector2d predict_mean_at(const DesignSet& d, Eigen::Index i) const;
};

/// exp(coefs . w); the log link of every expert network.
double link_alpha(const Eigen::VectorXd& coefs, const Eigen::VectorXd& w);

/// Softmax gating probabilities; the reference component (last) has implicit
/// zero coefficients. Max-shifted, so arbitrary coefficient magnitudes are
/// safe.
Eigen::VectorXd gating_probs(const Eigen::MatrixXd& coefs, const Eigen::VectorXd& w0);

/// Free-parameter count given per-network design dimensions (intercepts
/// included).
int param_count(const ModelSpec& spec, const std::array<int, 5>& dims);

/// Mean and covariance of a finite mixture of bivariate gamma components.
BGMoments mixture_moments(const std::vector<BGParams>& components,
                          const Eigen::VectorXd& weights);

/// MAP component labels (1-based); ties break toward the lower index.
std::vector<int> classify(const FittedModel& model);

/// Mixture means for every observation; n x 2.
Eigen::MatrixXd predict_mean(const FittedModel& model, const DesignSet& d);

}  // namespace bgmoe

#endif
