// bgmoe: bivariate gamma mixture-of-experts models from the command line.
//
// Subcommands: simulate, fit, select, predict, evaluate, density.
// Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "bgmoe/em.hpp"
#include "bgmoe/errors.hpp"
#include "bgmoe/metrics.hpp"
#include "bgmoe/model_io.hpp"
#include "bgmoe/selection.hpp"
#include "bgmoe/simulate.hpp"

namespace {

using namespace bgmoe;

// Removes an output file on failure so no partial artifact survives.
class OutputGuard {
public:
    explicit OutputGuard(std::string path) : path_(std::move(path)) {}
    ~OutputGuard() {
        if (!committed_ && !path_.empty()) {
            std::error_code ec;
            std::filesystem::remove(path_, ec);
        }
    }
    void commit() { committed_ = true; }

private:
    std::string path_;
    bool committed_ = false;
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

ModelSpec build_spec(const std::string& letters, int g, const std::string& gating,
                     const std::array<std::string, 3>& alphas, const std::string& beta) {
    ModelSpec spec;
    spec.g = g;
    std::string a, b, gate;
    if (letters.size() == 3) {
        gate = letters.substr(0, 1);
        a = letters.substr(1, 1);
        b = letters.substr(2, 1);
    } else if (letters.size() == 2 && g == 1) {
        gate = "C";
        a = letters.substr(0, 1);
        b = letters.substr(1, 1);
    } else {
        throw DomainError("spec must be three letters (gating/alpha/beta), e.g. VVC, "
                          "or two letters when g=1");
    }
    spec.gating.kind = kind_from_letter(gate[0]);
    spec.gating.covariates = split_list(gating);
    for (int k = 0; k < 3; ++k) {
        spec.alpha[k].kind = kind_from_letter(a[0]);
        spec.alpha[k].covariates = split_list(alphas[k]);
    }
    spec.beta.kind = kind_from_letter(b[0]);
    spec.beta.covariates = split_list(beta);
    spec.validate();
    return spec;
}

void write_trace(const std::string& path, const FitReport& report) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << "iteration,loglik,rel_change,gating_iters,alpha1_iters,alpha2_iters,"
           "alpha3_iters,beta_iters\n";
    for (const auto& r : report.trace) {
        out << r.iteration << ',' << r.loglik << ',' << r.rel_change << ','
            << r.gating_iters << ',' << r.expert_iters[0] << ',' << r.expert_iters[1]
            << ',' << r.expert_iters[2] << ',' << r.expert_iters[3] << '\n';
    }
}

ScoreReport score_rows(const Dataset& actual, const Eigen::MatrixXd& pred,
                       const FittedModel& model, std::size_t m, std::uint64_t seed) {
    const DesignSet design = DesignSet::rebuild(actual, model.design_names);
    const Eigen::Index n = static_cast<Eigen::Index>(actual.n());
    const Eigen::VectorXd a1 = actual.y().col(0);
    const Eigen::VectorXd a2 = actual.y().col(1);
    const Eigen::VectorXd as = a1 + a2;

    double crps1 = 0, crps2 = 0, crpss = 0;
    std::vector<double> pool1, pool2, pools;
    const std::size_t pool_m = std::min<std::size_t>(m, 256);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto s = predictive_samples(model, design, i, m, seed);
        std::vector<double> s1(m), s2(m), ss(m);
        for (std::size_t j = 0; j < m; ++j) {
            s1[j] = s[j].first;
            s2[j] = s[j].second;
            ss[j] = s[j].first + s[j].second;
        }
        crps1 += crps_empirical(s1, a1(i));
        crps2 += crps_empirical(s2, a2(i));
        crpss += crps_empirical(ss, as(i));
        for (std::size_t j = 0; j < pool_m; ++j) {
            pool1.push_back(s1[j]);
            pool2.push_back(s2[j]);
            pools.push_back(ss[j]);
        }
    }
    const double dn = static_cast<double>(n);
    std::vector<double> va1(a1.data(), a1.data() + n), va2(a2.data(), a2.data() + n),
        vas(as.data(), as.data() + n);

    ScoreReport report;
    report.rows.push_back({"sum", crpss / dn, rmse(pred.col(0) + pred.col(1), as),
                           gini_ordered(pred.col(0) + pred.col(1), as),
                           wasserstein_1d(pools, vas)});
    report.rows.push_back({"y1", crps1 / dn, rmse(pred.col(0), a1),
                           gini_ordered(pred.col(0), a1), wasserstein_1d(pool1, va1)});
    report.rows.push_back({"y2", crps2 / dn, rmse(pred.col(1), a2),
                           gini_ordered(pred.col(1), a2), wasserstein_1d(pool2, va2)});
    return report;
}

int run(int argc, char** argv) {
    CLI::App app{"bivariate gamma mixture-of-experts models"};
    app.require_subcommand(1);
    app.set_config("--config", "", "sectioned key-value config file; flags take precedence");

    // ---- simulate ----
    auto* sim = app.add_subcommand("simulate", "generate a study dataset");
    int study = 1;
    std::size_t sim_n = 500;
    std::uint64_t sim_seed = 1;
    std::string sim_out = "data.csv";
    sim->add_option("--study", study, "1 or 2")->check(CLI::Range(1, 2));
    sim->add_option("--n", sim_n, "observations")->check(CLI::PositiveNumber);
    sim->add_option("--seed", sim_seed, "RNG seed");
    sim->add_option("--out", sim_out, "output CSV")->required();

    // ---- fit ----
    auto* fitc = app.add_subcommand("fit", "fit one model specification");
    std::string fit_data, fit_spec = "II", fit_gating, fit_beta, fit_out = "model.txt",
                fit_trace;
    std::array<std::string, 3> fit_alpha;
    int fit_g = 1, fit_restarts = 5, fit_max_iter = 1000;
    std::uint64_t fit_seed = 1;
    double fit_tol = 1e-5, fit_quad_tol = 1e-10;
    bool fit_verbose = false;
    fitc->add_option("--data", fit_data, "input CSV")->required();
    fitc->add_option("--spec", fit_spec, "model type letters, e.g. VVC");
    fitc->add_option("--g", fit_g, "component count");
    fitc->add_option("--gating", fit_gating, "gating covariates, comma separated");
    fitc->add_option("--alpha1", fit_alpha[0], "alpha1 covariates");
    fitc->add_option("--alpha2", fit_alpha[1], "alpha2 covariates");
    fitc->add_option("--alpha3", fit_alpha[2], "alpha3 covariates");
    fitc->add_option("--beta", fit_beta, "beta covariates");
    fitc->add_option("--seed", fit_seed, "RNG seed");
    fitc->add_option("--restarts", fit_restarts, "EM restarts");
    fitc->add_option("--tol", fit_tol, "EM relative tolerance");
    fitc->add_option("--max-iter", fit_max_iter, "EM iteration cap");
    fitc->add_option("--quad-tol", fit_quad_tol, "quadrature relative tolerance");
    fitc->add_option("--out", fit_out, "model output path")->required();
    fitc->add_option("--trace", fit_trace, "iteration trace CSV");
    fitc->add_flag("--verbose", fit_verbose, "print the iteration trace");

    // ---- select ----
    auto* sel = app.add_subcommand("select", "stepwise forward model search");
    std::string sel_data, sel_candidates, sel_out = "model.txt", sel_trace,
                sel_criterion = "aic";
    int sel_max_g = 7, sel_restarts = 3, sel_max_steps = 100;
    std::uint64_t sel_seed = 1;
    double sel_tol = 1e-5, sel_quad_tol = 1e-8;
    sel->add_option("--data", sel_data, "input CSV")->required();
    sel->add_option("--candidates", sel_candidates, "candidate covariates")->required();
    sel->add_option("--max-g", sel_max_g, "largest component count");
    sel->add_option("--criterion", sel_criterion, "aic, bic or icl");
    sel->add_option("--seed", sel_seed, "RNG seed");
    sel->add_option("--restarts", sel_restarts, "EM restarts per candidate");
    sel->add_option("--max-steps", sel_max_steps, "step cap");
    sel->add_option("--tol", sel_tol, "EM relative tolerance");
    sel->add_option("--quad-tol", sel_quad_tol, "quadrature relative tolerance");
    sel->add_option("--out", sel_out, "model output path")->required();
    sel->add_option("--trace", sel_trace, "search trace CSV");

    // ---- predict ----
    auto* pred = app.add_subcommand("predict", "mixture-mean predictions");
    std::string pred_model, pred_data, pred_out = "pred.csv";
    double pred_quad_tol = 1e-10;
    pred->add_option("--model", pred_model, "fitted model")->required();
    pred->add_option("--data", pred_data, "input CSV")->required();
    pred->add_option("--quad-tol", pred_quad_tol, "quadrature relative tolerance");
    pred->add_option("--out", pred_out, "output CSV")->required();

    // ---- evaluate ----
    auto* eval = app.add_subcommand("evaluate", "predictive scoring");
    std::string eval_pred, eval_actual, eval_model, eval_out = "scores.csv";
    std::size_t eval_samples = 4096;
    std::uint64_t eval_seed = 1;
    eval->add_option("--pred", eval_pred, "predictions CSV from `predict`")->required();
    eval->add_option("--actual", eval_actual, "dataset with observed y1, y2")->required();
    eval->add_option("--model", eval_model, "fitted model (for predictive samples)")
        ->required();
    eval->add_option("--samples", eval_samples, "predictive samples per observation");
    eval->add_option("--seed", eval_seed, "RNG seed");
    eval->add_option("--out", eval_out, "score table CSV")->required();

    // ---- density ----
    auto* dens = app.add_subcommand("density", "density grid for plotting");
    std::string dens_params, dens_grid, dens_out = "grid.csv";
    double dens_quad_tol = 1e-10;
    dens->add_option("--params", dens_params, "a1,a2,a3,b")->required();
    dens->add_option("--grid", dens_grid, "y1min:y1max:cells,y2min:y2max:cells")->required();
    dens->add_option("--quad-tol", dens_quad_tol, "quadrature relative tolerance");
    dens->add_option("--out", dens_out, "output CSV")->required();

    CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
    if (const char* env = std::getenv("BGMOE_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1) omp_set_num_threads(cap);
    }
#endif

    if (sim->parsed()) {
        OutputGuard guard(sim_out);
        const SimOutput out = (study == 1) ? simulate_study1(sim_n, sim_seed)
                                           : simulate_study2(sim_n, sim_seed);
        out.to_dataset().to_csv(sim_out);
        guard.commit();
        std::cout << "wrote " << sim_out << " (" << sim_n << " rows)\n";
        return 0;
    }

    if (fitc->parsed()) {
        OutputGuard guard(fit_out);
        OutputGuard trace_guard(fit_trace);
        const Dataset data = Dataset::from_csv(fit_data);
        const ModelSpec spec = build_spec(fit_spec, fit_g, fit_gating, fit_alpha, fit_beta);
        EMConfig cfg;
        cfg.seed = fit_seed;
        cfg.restarts = fit_restarts;
        cfg.tol = fit_tol;
        cfg.max_iter = fit_max_iter;
        QuadratureConfig q;
        q.relative_tolerance = fit_quad_tol;
        FitReport report;
        const FittedModel model = fit(data, spec, cfg, q, &report);
        save_model(fit_out, model);
        if (!fit_trace.empty()) write_trace(fit_trace, report);
        if (fit_verbose) {
            for (const auto& r : report.trace) {
                std::cerr << r.iteration << '\t' << r.loglik << '\t' << r.rel_change
                          << '\t' << r.gating_iters << '\t' << r.expert_iters[0] << '\t'
                          << r.expert_iters[1] << '\t' << r.expert_iters[2] << '\t'
                          << r.expert_iters[3] << '\n';
            }
            for (const auto& line : report.restart_log) std::cerr << line << '\n';
        }
        guard.commit();
        trace_guard.commit();
        std::cout << "loglik " << model.loglik << " n_params " << model.n_params
                  << " wrote " << fit_out << '\n';
        return 0;
    }

    if (sel->parsed()) {
        OutputGuard guard(sel_out);
        OutputGuard trace_guard(sel_trace);
        const Dataset data = Dataset::from_csv(sel_data);
        SearchConfig cfg = SearchConfig::with_candidates(split_list(sel_candidates));
        cfg.max_g = sel_max_g;
        cfg.criterion = criterion_from_string(sel_criterion);
        cfg.max_steps = sel_max_steps;
        cfg.seed = sel_seed;
        EMConfig em_cfg;
        em_cfg.seed = sel_seed;
        em_cfg.restarts = sel_restarts;
        em_cfg.tol = sel_tol;
        QuadratureConfig q;
        q.relative_tolerance = sel_quad_tol;
        auto [model, trace] = stepwise(data, cfg, em_cfg, q);
        save_model(sel_out, model);
        if (!sel_trace.empty()) trace.to_csv(sel_trace);
        guard.commit();
        trace_guard.commit();
        std::cout << "selected " << model.spec.name() << " g=" << model.spec.g
                  << " loglik " << model.loglik << " wrote " << sel_out << '\n';
        return 0;
    }

    if (pred->parsed()) {
        OutputGuard guard(pred_out);
        const FittedModel model = load_model(pred_model);
        const Dataset data = Dataset::from_csv(pred_data);
        const DesignSet design = DesignSet::rebuild(data, model.design_names);
        QuadratureConfig q;
        q.relative_tolerance = pred_quad_tol;
        const Eigen::MatrixXd mean = predict_mean(model, design);
        // membership from the posterior given the observed responses
        FittedModel scored = model;
        const EStepCache cache = e_step(data, design, model, q);
        scored.responsibilities = cache.z;
        const auto labels = classify(scored);

        std::ofstream out(pred_out);
        if (!out) throw DataError("cannot write " + pred_out);
        out << "yhat1,yhat2,yhat_sum,map_component";
        for (int g = 1; g <= model.spec.g; ++g) out << ",prob_" << g;
        out << '\n';
        for (Eigen::Index i = 0; i < mean.rows(); ++i) {
            out << mean(i, 0) << ',' << mean(i, 1) << ',' << mean(i, 0) + mean(i, 1)
                << ',' << labels[static_cast<std::size_t>(i)];
            for (int g = 0; g < model.spec.g; ++g) out << ',' << cache.z(i, g);
            out << '\n';
        }
        guard.commit();
        std::cout << "wrote " << pred_out << '\n';
        return 0;
    }

    if (eval->parsed()) {
        OutputGuard guard(eval_out);
        const FittedModel model = load_model(eval_model);
        const Dataset actual = Dataset::from_csv(eval_actual);

        std::ifstream pin(eval_pred);
        if (!pin) throw DataError("cannot open " + eval_pred);
        std::string line;
        std::getline(pin, line);
        std::vector<double> p1, p2;
        while (std::getline(pin, line)) {
            if (line.empty()) continue;
            std::stringstream ss(line);
            std::string cell;
            std::getline(ss, cell, ',');
            p1.push_back(std::stod(cell));
            std::getline(ss, cell, ',');
            p2.push_back(std::stod(cell));
        }
        if (p1.size() != actual.n()) {
            throw DataError("prediction and actual row counts differ");
        }
        Eigen::MatrixXd pred_mat(p1.size(), 2);
        for (std::size_t i = 0; i < p1.size(); ++i) {
            pred_mat(static_cast<Eigen::Index>(i), 0) = p1[i];
            pred_mat(static_cast<Eigen::Index>(i), 1) = p2[i];
        }
        const ScoreReport report =
            score_rows(actual, pred_mat, model, eval_samples, eval_seed);
        report.to_csv(eval_out);
        guard.commit();
        std::cout << "wrote " << eval_out << '\n';
        return 0;
    }

    if (dens->parsed()) {
        OutputGuard guard(dens_out);
        const auto parts = split_list(dens_params);
        if (parts.size() != 4) throw DomainError("--params needs a1,a2,a3,b");
        BGParams p{std::stod(parts[0]), std::stod(parts[1]), std::stod(parts[2]),
                   std::stod(parts[3])};
        auto parse_axis = [](const std::string& s) {
            double lo, hi;
            int cells;
            if (std::sscanf(s.c_str(), "%lf:%lf:%d", &lo, &hi, &cells) != 3 || cells < 1 ||
                !(hi > lo)) {
                throw DomainError("grid axis must be min:max:cells with max > min");
            }
            return std::tuple<double, double, int>{lo, hi, cells};
        };
        const auto comma = dens_grid.find(',');
        if (comma == std::string::npos) throw DomainError("--grid needs two axes");
        const auto [lo1, hi1, c1] = parse_axis(dens_grid.substr(0, comma));
        const auto [lo2, hi2, c2] = parse_axis(dens_grid.substr(comma + 1));
        QuadratureConfig q;
        q.relative_tolerance = dens_quad_tol;

        std::ofstream out(dens_out);
        if (!out) throw DataError("cannot write " + dens_out);
        out << "y1,y2,density,log_density\n";
        const double h1 = (hi1 - lo1) / c1, h2 = (hi2 - lo2) / c2;
        for (int i = 0; i < c1; ++i) {
            const double y1 = lo1 + (i + 0.5) * h1;
            for (int j = 0; j < c2; ++j) {
                const double y2 = lo2 + (j + 0.5) * h2;
                const double lf = log_density(y1, y2, p, q);
                out << y1 << ',' << y2 << ',' << std::exp(lf) << ',' << lf << '\n';
            }
        }
        guard.commit();
        std::cout << "wrote " << dens_out << '\n';
        return 0;
    }

    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const bgmoe::DataError& e) {
        std::cerr << "error: data: " << e.what() << '\n';
        return 3;
    } catch (const bgmoe::DomainError& e) {
        std::cerr << "error: usage: " << e.what() << '\n';
        return 2;
    } catch (const bgmoe::NumericalError& e) {
        std::cerr << "error: numerical: " << e.what() << '\n';
        return 4;
    } catch (const bgmoe::FitError& e) {
        std::cerr << "error: numerical: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
