#include "bgmoe/selection.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "bgmoe/errors.hpp"

namespace bgmoe {

double aic(double loglik, int k) { return 2.0 * k - 2.0 * loglik; }

double bic(double loglik, int k, std::size_t n) {
    return k * std::log(static_cast<double>(n)) - 2.0 * loglik;
}

double icl(double bic_value, const Eigen::MatrixXd& z) {
    double entropy = 0.0;
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        for (Eigen::Index g = 0; g < z.cols(); ++g) {
            const double v = z(i, g);
            if (v > 0.0) entropy -= v * std::log(v);
        }
    }
    return bic_value + 2.0 * entropy;
}

Criterion criterion_from_string(const std::string& s) {
    if (s == "aic" || s == "AIC") return Criterion::AIC;
    if (s == "bic" || s == "BIC") return Criterion::BIC;
    if (s == "icl" || s == "ICL") return Criterion::ICL;
    throw DomainError("unknown criterion: " + s);
}

SearchConfig SearchConfig::with_candidates(const std::vector<std::string>& covs) {
    SearchConfig cfg;
    for (auto& c : cfg.candidates) c = covs;
    return cfg;
}

void SearchTrace::to_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << "step,move,spec,loglik,criterion,accepted\n";
    for (const auto& s : steps) {
        out << s.step << ',' << s.move << ',' << s.spec_signature << ',' << s.loglik
            << ',' << s.criterion << ',' << (s.accepted ? 1 : 0) << '\n';
    }
}

namespace {

bool regressed(NetworkKind k) { return k == NetworkKind::V || k == NetworkKind::E; }

bool has_covariate(const NetworkSpec& net, const std::string& c) {
    for (const auto& v : net.covariates) {
        if (v == c) return true;
    }
    return false;
}

struct Move {
    std::string description;
    ModelSpec spec;
};

// Promote a G=1 incumbent's kinds when a component is added: constants
// become per-component constants, shared regressions stay shared.
ModelSpec add_component(const ModelSpec& spec) {
    ModelSpec s = spec;
    s.g += 1;
    if (spec.g == 1) {
        for (auto& a : s.alpha) {
            if (a.kind == NetworkKind::I) a.kind = NetworkKind::C;
        }
        if (s.beta.kind == NetworkKind::I) s.beta.kind = NetworkKind::C;
        s.gating.kind = NetworkKind::C;
        // a mixture needs some component-specific block; fall back to a
        // per-component beta regression when both experts are shared
        if (regressed(s.alpha[0].kind) && regressed(s.beta.kind)) {
            s.beta.kind = NetworkKind::V;
        }
    }
    return s;
}

std::vector<Move> type_moves(const ModelSpec& spec) {
    std::vector<Move> moves;
    auto push = [&](const std::string& desc, const ModelSpec& s) {
        try {
            s.validate();
            moves.push_back({desc, s});
        } catch (const DomainError&) {
        }
    };
    if (spec.g >= 2) {
        // gating letter moves that need no new covariates
        for (NetworkKind to : {NetworkKind::C, NetworkKind::E}) {
            if (spec.gating.kind != to) {
                ModelSpec s = spec;
                s.gating.kind = to;
                s.gating.covariates.clear();
                push(std::string("gating->") + kind_letter(to), s);
            }
        }
    }
    // alpha slot moves
    const NetworkKind ak = spec.alpha[0].kind;
    auto set_alpha = [&](NetworkKind to, bool drop) {
        ModelSpec s = spec;
        for (auto& a : s.alpha) {
            a.kind = to;
            if (drop) a.covariates.clear();
        }
        push(std::string("alpha->") + kind_letter(to), s);
    };
    if (ak == NetworkKind::C) set_alpha(NetworkKind::I, false);
    if (ak == NetworkKind::I) set_alpha(NetworkKind::C, false);
    if (ak == NetworkKind::V) {
        set_alpha(NetworkKind::E, false);
        set_alpha(NetworkKind::C, true);
    }
    if (ak == NetworkKind::E) {
        set_alpha(NetworkKind::V, false);
        set_alpha(NetworkKind::I, true);
    }
    // beta slot moves
    auto set_beta = [&](NetworkKind to, bool drop) {
        ModelSpec s = spec;
        s.beta.kind = to;
        if (drop) s.beta.covariates.clear();
        push(std::string("beta->") + kind_letter(to), s);
    };
    switch (spec.beta.kind) {
        case NetworkKind::C: set_beta(NetworkKind::I, false); break;
        case NetworkKind::I: set_beta(NetworkKind::C, false); break;
        case NetworkKind::V:
            set_beta(NetworkKind::E, false);
            set_beta(NetworkKind::C, true);
            break;
        case NetworkKind::E:
            set_beta(NetworkKind::V, false);
            set_beta(NetworkKind::I, true);
            break;
    }
    return moves;
}

std::vector<Move> covariate_moves(const ModelSpec& spec, const SearchConfig& cfg) {
    std::vector<Move> moves;
    auto push = [&](const std::string& desc, const ModelSpec& s) {
        try {
            s.validate();
            moves.push_back({desc, s});
        } catch (const DomainError&) {
        }
    };
    if (spec.g >= 2) {
        for (const auto& c : cfg.candidates[0]) {
            if (has_covariate(spec.gating, c)) continue;
            ModelSpec s = spec;
            s.gating.kind = NetworkKind::V;
            s.gating.covariates.push_back(c);
            push("gating+" + c, s);
        }
    }
    for (int k = 0; k < 3; ++k) {
        for (const auto& c : cfg.candidates[k + 1]) {
            if (has_covariate(spec.alpha[k], c)) continue;
            ModelSpec s = spec;
            const NetworkKind promote =
                (spec.alpha[0].kind == NetworkKind::I || spec.alpha[0].kind == NetworkKind::E)
                    ? NetworkKind::E
                    : NetworkKind::V;
            for (auto& a : s.alpha) a.kind = promote;
            s.alpha[k].covariates.push_back(c);
            push("alpha" + std::to_string(k + 1) + "+" + c, s);
        }
    }
    for (const auto& c : cfg.candidates[4]) {
        if (has_covariate(spec.beta, c)) continue;
        ModelSpec s = spec;
        s.beta.kind = (spec.beta.kind == NetworkKind::I) ? NetworkKind::E
                      : (spec.beta.kind == NetworkKind::C) ? NetworkKind::V
                                                           : spec.beta.kind;
        s.beta.covariates.push_back(c);
        push("beta+" + c, s);
    }
    return moves;
}

struct Evaluated {
    FittedModel model;
    double criterion = 0.0;
};

}  // namespace

std::pair<FittedModel, SearchTrace> stepwise(const Dataset& data, const SearchConfig& cfg,
                                             const EMConfig& em_cfg,
                                             const QuadratureConfig& q) {
    if (cfg.max_g < 1) throw DomainError("max_g must be >= 1");
    SearchTrace trace;
    std::map<std::string, std::optional<Evaluated>> memo;

    auto evaluate = [&](const ModelSpec& spec, int step) -> std::optional<Evaluated> {
        auto [it, fresh] = memo.try_emplace(spec.signature());
        if (!fresh) return it->second;
        try {
            EMConfig ec = em_cfg;
            ec.seed = em_cfg.seed + static_cast<std::uint64_t>(step);
            Evaluated ev;
            ev.model = fit(data, spec, ec, q);
            switch (cfg.criterion) {
                case Criterion::AIC:
                    ev.criterion = aic(ev.model.loglik, ev.model.n_params);
                    break;
                case Criterion::BIC:
                    ev.criterion = bic(ev.model.loglik, ev.model.n_params, data.n());
                    break;
                case Criterion::ICL:
                    ev.criterion = icl(bic(ev.model.loglik, ev.model.n_params, data.n()),
                                       ev.model.responsibilities);
                    break;
            }
            it->second = std::move(ev);
        } catch (const std::exception&) {
            it->second = std::nullopt;  // failed candidates are skipped
        }
        return it->second;
    };

    ModelSpec start;  // G=1, no covariates: distribution estimation
    start.gating.kind = NetworkKind::C;
    for (auto& a : start.alpha) a.kind = NetworkKind::I;
    start.beta.kind = NetworkKind::I;

    auto incumbent = evaluate(start, 0);
    if (!incumbent) throw FitError("stepwise: the G=1 baseline fit failed");
    trace.steps.push_back({0, "start", start.signature(), incumbent->model.loglik,
                           incumbent->criterion, true});
    ModelSpec current = start;

    for (int step = 1; step <= cfg.max_steps; ++step) {
        std::vector<Move> moves;
        if (current.g < cfg.max_g) {
            moves.push_back({"G+1", add_component(current)});
        }
        for (auto& m : type_moves(current)) moves.push_back(std::move(m));
        for (auto& m : covariate_moves(current, cfg)) moves.push_back(std::move(m));

        std::optional<Evaluated> best;
        std::string best_move;
        ModelSpec best_spec;
        for (const auto& move : moves) {
            const auto ev = evaluate(move.spec, step);
            if (!ev) {
                trace.steps.push_back({step, move.description + " (failed)",
                                       move.spec.signature(), 0.0, 0.0, false});
                continue;
            }
            trace.steps.push_back({step, move.description, move.spec.signature(),
                                   ev->model.loglik, ev->criterion, false});
            if (!best || ev->criterion < best->criterion) {
                best = ev;
                best_move = move.description;
                best_spec = move.spec;
            }
        }
        if (!best || best->criterion >= incumbent->criterion - 1e-6) {
            break;  // no strictly improving move
        }
        incumbent = best;
        current = best_spec;
        for (auto it = trace.steps.rbegin(); it != trace.steps.rend(); ++it) {
            if (it->step == step && it->move == best_move) {
                it->accepted = true;
                break;
            }
        }
    }
    return {incumbent->model, std::move(trace)};
}

}  // namespace bgmoe
