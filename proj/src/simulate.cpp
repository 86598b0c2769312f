#include "bgmoe/simulate.hpp"

#include <cmath>

#include "bgmoe/errors.hpp"
#include "bgmoe/rng.hpp"

namespace bgmoe {

Dataset SimOutput::to_dataset(bool include_labels) const {
    std::vector<Column> cols;
    for (Eigen::Index j = 0; j < covariates.cols(); ++j) {
        Column c;
        c.name = covariate_names[static_cast<std::size_t>(j)];
        c.numeric = true;
        c.values.assign(covariates.col(j).data(), covariates.col(j).data() + covariates.rows());
        cols.push_back(std::move(c));
    }
    if (include_labels) {
        Column c;
        c.name = "true_label";
        c.numeric = true;
        for (int l : true_labels) c.values.push_back(static_cast<double>(l));
        cols.push_back(std::move(c));
    }
    return Dataset(responses, std::move(cols));
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::pair<double, double> draw_bg(Rng& rng, const BGParams& p) {
    const double x1 = rng.gamma(p.alpha1, p.beta);
    const double x2 = rng.gamma(p.alpha2, p.beta);
    const double x3 = rng.gamma(p.alpha3, p.beta);
    return {x1 + x3, x2 + x3};
}

}  // namespace

SimOutput simulate_study1(std::size_t n, std::uint64_t seed) {
    if (n < 10) throw DomainError("simulation needs n >= 10");
    const BGParams comp1{0.8, 7.9, 5.0, 1.9};
    const BGParams comp2{2.6, 2.0, 0.5, 1.0};
    SimOutput out;
    out.responses.resize(n, 2);
    out.covariates.resize(n, 3);
    out.covariate_names = {"w1", "w2", "w3"};
    out.true_labels.resize(n);
    out.true_params.assign(n, {comp1, comp2});
    const double sd = std::sqrt(0.3);
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng = Rng::substream(seed, i);
        const double w1 = sd * rng.normal();
        const double w2 = sd * rng.normal();
        const double w3 = sd * rng.normal();
        out.covariates.row(i) << w1, w2, w3;
        // the logit targets the low-mean component so that the fitted gating
        // (canonical component order) recovers (1, 2, -2, 3) directly
        const double p2 = sigmoid(1.0 + 2.0 * w1 - 2.0 * w2 + 3.0 * w3);
        const bool second = rng.uniform() < p2;
        out.true_labels[i] = second ? 2 : 1;
        const auto y = draw_bg(rng, second ? comp2 : comp1);
        out.responses.row(i) << y.first, y.second;
    }
    return out;
}

SimOutput simulate_study2(std::size_t n, std::uint64_t seed) {
    if (n < 10) throw DomainError("simulation needs n >= 10");
    SimOutput out;
    out.responses.resize(n, 2);
    out.covariates.resize(n, 3);
    out.covariate_names = {"w1", "w2", "w3"};
    out.true_labels.resize(n);
    out.true_params.assign(n, std::vector<BGParams>(2));
    const double sd = std::sqrt(0.3);
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng = Rng::substream(seed, i);
        const double w1 = sd * rng.normal();
        const double w2 = sd * rng.normal();
        const double w3 = sd * rng.normal();
        out.covariates.row(i) << w1, w2, w3;
        BGParams c1;
        c1.alpha1 = std::exp(1.0 + 0.2 * w1 + 0.2 * w2);
        c1.alpha2 = std::exp(0.1 + 0.1 * w2 + 0.1 * w3);
        c1.alpha3 = std::exp(0.5 + 0.2 * w1 + 0.2 * w2 + 0.2 * w3);
        c1.beta = std::exp(0.2 + 0.1 * w1 + 0.1 * w2 + 0.2 * w3);
        BGParams c2;
        c2.alpha1 = std::exp(0.1 + 0.1 * w1 + 0.1 * w2);
        c2.alpha2 = std::exp(2.0 + 0.3 * w2 + 0.3 * w3);
        c2.alpha3 = std::exp(1.5 + 0.2 * w1 + 0.1 * w2 + 0.1 * w3);
        c2.beta = std::exp(0.7 + 0.1 * w1 + 0.1 * w2 + 0.2 * w3);
        out.true_params[i] = {c1, c2};
        const double p2 = sigmoid(10.0 + 40.0 * w1 + 30.0 * w2 + 100.0 * w3);
        const bool second = rng.uniform() < p2;
        out.true_labels[i] = second ? 2 : 1;
        const auto y = draw_bg(rng, second ? c2 : c1);
        out.responses.row(i) << y.first, y.second;
    }
    return out;
}

SimOutput simulate_from_model(const FittedModel& model, const Dataset& data,
                              std::uint64_t seed) {
    const DesignSet design = DesignSet::rebuild(data, model.design_names);
    const std::size_t n = data.n();
    SimOutput out;
    out.responses.resize(n, 2);
    out.true_labels.resize(n);
    out.true_params.resize(n);
    // carry the raw covariates through
    std::vector<const Column*> numeric;
    for (const auto& c : data.covariates()) {
        if (c.name != "true_label") numeric.push_back(&c);
    }
    out.covariates.resize(n, static_cast<Eigen::Index>(numeric.size()));
    for (std::size_t j = 0; j < numeric.size(); ++j) {
        out.covariate_names.push_back(numeric[j]->name);
        if (numeric[j]->numeric) {
            for (std::size_t i = 0; i < n; ++i) out.covariates(i, j) = numeric[j]->values[i];
        } else {
            out.covariates.col(j).setZero();  // categorical carried only via to_dataset
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        Rng rng = Rng::substream(seed, i);
        const Eigen::VectorXd tau =
            model.gating_probs_at(design.w[0].row(static_cast<Eigen::Index>(i)).transpose());
        double u = rng.uniform();
        int g = 0;
        while (g + 1 < model.spec.g && u >= tau(g)) {
            u -= tau(g);
            ++g;
        }
        const auto params = model.params_at(design, static_cast<Eigen::Index>(i));
        out.true_params[i] = params;
        out.true_labels[i] = g + 1;
        const auto y = draw_bg(rng, params[g]);
        out.responses.row(i) << y.first, y.second;
    }
    return out;
}

}  // namespace bgmoe
