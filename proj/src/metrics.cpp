#include "bgmoe/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "bgmoe/errors.hpp"
#include "bgmoe/rng.hpp"

namespace bgmoe {

double crps_empirical(std::vector<double> samples, double observation) {
    const std::size_t m = samples.size();
    if (m < 2) throw DomainError("crps needs at least two predictive samples");
    std::sort(samples.begin(), samples.end());
    double abs_err = 0.0;
    double spread = 0.0;  // sum_{i<j} (s_j - s_i), doubled below
    for (std::size_t i = 0; i < m; ++i) {
        abs_err += std::abs(samples[i] - observation);
        spread += (2.0 * static_cast<double>(i) - static_cast<double>(m) + 1.0) * samples[i];
    }
    const double dm = static_cast<double>(m);
    return abs_err / dm - spread / (dm * dm);
}

double rmse(const Eigen::VectorXd& predictions, const Eigen::VectorXd& actuals) {
    if (predictions.size() != actuals.size()) {
        throw DomainError("rmse: length mismatch");
    }
    return std::sqrt((predictions - actuals).squaredNorm() /
                     static_cast<double>(predictions.size()));
}

double gini_ordered(const Eigen::VectorXd& predictions, const Eigen::VectorXd& actuals) {
    const Eigen::Index n = predictions.size();
    if (n != actuals.size()) throw DomainError("gini: length mismatch");
    if (n < 2) throw DomainError("gini needs at least two observations");
    const double total = actuals.sum();
    if (total == 0.0) return 0.0;

    std::vector<Eigen::Index> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
        return predictions(a) < predictions(b);
    });

    // Pool tied predictions into one linear segment of the curve.
    double area = 0.0;
    double f_prev = 0.0, l_prev = 0.0;
    Eigen::Index i = 0;
    while (i < n) {
        Eigen::Index j = i;
        double block_actual = 0.0;
        while (j < n && predictions(idx[j]) == predictions(idx[i])) {
            block_actual += actuals(idx[j]);
            ++j;
        }
        const double f = static_cast<double>(j) / static_cast<double>(n);
        const double l = l_prev + block_actual / total;
        area += 0.5 * (l + l_prev) * (f - f_prev);
        f_prev = f;
        l_prev = l;
        i = j;
    }
    return 2.0 * (0.5 - area);
}

double wasserstein_1d(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw DomainError("wasserstein: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double q = 0.0, dist = 0.0;
    while (i < a.size() && j < b.size()) {
        const double qa = static_cast<double>(i + 1) / na;
        const double qb = static_cast<double>(j + 1) / nb;
        const double q_next = std::min(qa, qb);
        dist += std::abs(a[i] - b[j]) * (q_next - q);
        q = q_next;
        if (qa <= q_next) ++i;
        if (qb <= q_next) ++j;
    }
    return dist;
}

namespace {

Eigen::MatrixXi contingency(const std::vector<int>& a, const std::vector<int>& b,
                            int& ka, int& kb) {
    if (a.size() != b.size()) throw DomainError("label vectors differ in length");
    if (a.empty()) throw DomainError("label vectors are empty");
    std::vector<int> ua(a), ub(b);
    std::sort(ua.begin(), ua.end());
    ua.erase(std::unique(ua.begin(), ua.end()), ua.end());
    std::sort(ub.begin(), ub.end());
    ub.erase(std::unique(ub.begin(), ub.end()), ub.end());
    ka = static_cast<int>(ua.size());
    kb = static_cast<int>(ub.size());
    auto index_of = [](const std::vector<int>& u, int v) {
        return static_cast<int>(std::lower_bound(u.begin(), u.end(), v) - u.begin());
    };
    Eigen::MatrixXi c = Eigen::MatrixXi::Zero(ka, kb);
    for (std::size_t i = 0; i < a.size(); ++i) {
        c(index_of(ua, a[i]), index_of(ub, b[i])) += 1;
    }
    return c;
}

double choose2(double x) { return x * (x - 1.0) / 2.0; }

}  // namespace

double adjusted_rand(const std::vector<int>& labels_a, const std::vector<int>& labels_b) {
    int ka, kb;
    const Eigen::MatrixXi c = contingency(labels_a, labels_b, ka, kb);
    const double n = static_cast<double>(labels_a.size());
    double sum_cells = 0.0;
    for (int i = 0; i < ka; ++i) {
        for (int j = 0; j < kb; ++j) sum_cells += choose2(c(i, j));
    }
    double sum_rows = 0.0, sum_cols = 0.0;
    for (int i = 0; i < ka; ++i) sum_rows += choose2(c.row(i).sum());
    for (int j = 0; j < kb; ++j) sum_cols += choose2(c.col(j).sum());
    const double expected = sum_rows * sum_cols / choose2(n);
    const double max_index = 0.5 * (sum_rows + sum_cols);
    if (max_index == expected) return 0.0;
    return (sum_cells - expected) / (max_index - expected);
}

double misclassification(const std::vector<int>& labels_a, const std::vector<int>& labels_b) {
    int ka, kb;
    const Eigen::MatrixXi c = contingency(labels_a, labels_b, ka, kb);
    const int k = std::max(ka, kb);
    if (k > 8) throw DomainError("misclassification: more than 8 groups");
    Eigen::MatrixXi padded = Eigen::MatrixXi::Zero(k, k);
    padded.topLeftCorner(ka, kb) = c;
    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    int best = 0;
    do {
        int agree = 0;
        for (int i = 0; i < k; ++i) agree += padded(i, perm[i]);
        best = std::max(best, agree);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return 1.0 - static_cast<double>(best) / static_cast<double>(labels_a.size());
}

std::vector<std::pair<double, double>> predictive_samples(const FittedModel& model,
                                                          const DesignSet& d, Eigen::Index i,
                                                          std::size_t m, std::uint64_t seed) {
    const Eigen::VectorXd tau = model.gating_probs_at(d.w[0].row(i).transpose());
    const auto params = model.params_at(d, i);
    std::vector<std::pair<double, double>> out(m);
    for (std::size_t s = 0; s < m; ++s) {
        Rng rng = Rng::substream(seed, (static_cast<std::uint64_t>(i) << 24) + s);
        double u = rng.uniform();
        int g = 0;
        while (g + 1 < model.spec.g && u >= tau(g)) {
            u -= tau(g);
            ++g;
        }
        const auto& p = params[g];
        const double x1 = rng.gamma(p.alpha1, p.beta);
        const double x2 = rng.gamma(p.alpha2, p.beta);
        const double x3 = rng.gamma(p.alpha3, p.beta);
        out[s] = {x1 + x3, x2 + x3};
    }
    return out;
}

std::vector<double> glm_predictive_samples(const GlmFit& fit, const Eigen::MatrixXd& x,
                                           Eigen::Index i, std::size_t m, std::uint64_t seed) {
    const double mu = std::exp(x.row(i).dot(fit.coefficients));
    const double shape = 1.0 / fit.dispersion;
    std::vector<double> out(m);
    for (std::size_t s = 0; s < m; ++s) {
        Rng rng = Rng::substream(seed, (static_cast<std::uint64_t>(i) << 24) + s);
        out[s] = rng.gamma(shape, shape / mu);
    }
    return out;
}

void ScoreReport::to_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << "target,crps,rmse,gini,wasserstein\n";
    for (const auto& r : rows) {
        out << r.target << ',' << r.crps << ',' << r.rmse << ',' << r.gini << ','
            << r.wasserstein << '\n';
    }
}

}  // namespace bgmoe
