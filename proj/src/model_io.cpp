#include "bgmoe/model_io.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bgmoe/errors.hpp"

namespace bgmoe {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream out;
    out << std::hex << h;
    return out.str();
}

json vector_to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Eigen::VectorXd vector_from_json(const json& a) {
    Eigen::VectorXd v(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i];
    return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json a = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        a.push_back(vector_to_json(m.row(i).transpose()));
    }
    return a;
}

Eigen::MatrixXd matrix_from_json(const json& a, Eigen::Index cols_hint = 0) {
    if (a.empty()) return Eigen::MatrixXd(0, cols_hint);
    const Eigen::Index rows = static_cast<Eigen::Index>(a.size());
    const Eigen::Index cols = static_cast<Eigen::Index>(a[0].size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        m.row(i) = vector_from_json(a[static_cast<std::size_t>(i)]).transpose();
    }
    return m;
}

json network_to_json(const NetworkSpec& n) {
    return {{"kind", std::string(1, kind_letter(n.kind))}, {"covariates", n.covariates}};
}

NetworkSpec network_from_json(const json& j) {
    NetworkSpec n;
    n.kind = kind_from_letter(j.at("kind").get<std::string>().at(0));
    n.covariates = j.at("covariates").get<std::vector<std::string>>();
    return n;
}

}  // namespace

void save_model(const std::string& path, const FittedModel& model) {
    json payload;
    payload["spec"] = {{"g", model.spec.g},
                       {"gating", network_to_json(model.spec.gating)},
                       {"alpha", {network_to_json(model.spec.alpha[0]),
                                  network_to_json(model.spec.alpha[1]),
                                  network_to_json(model.spec.alpha[2])}},
                       {"beta", network_to_json(model.spec.beta)}};
    payload["name"] = model.spec.name();
    payload["design_names"] = model.design_names;
    payload["gating_coefs"] = matrix_to_json(model.gating_coefs);
    payload["mixing"] = vector_to_json(model.mixing);
    json experts = json::array();
    for (const auto& net : model.experts) {
        json e;
        e["kind"] = std::string(1, kind_letter(net.kind));
        json coefs = json::array();
        for (const auto& c : net.coefs) coefs.push_back(vector_to_json(c));
        e["coefs"] = coefs;
        e["values"] = vector_to_json(net.values);
        experts.push_back(e);
    }
    payload["experts"] = experts;
    payload["loglik"] = model.loglik;
    payload["n_params"] = model.n_params;
    payload["converged"] = model.converged;
    payload["iterations"] = model.iterations;
    payload["component_order"] = "ascending mean of Y1+Y2";

    json doc;
    doc["format"] = "bgmoe-model";
    doc["version"] = kFormatVersion;
    doc["checksum"] = fnv1a_hex(payload.dump());
    doc["payload"] = payload;

    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << doc.dump(2) << '\n';
}

FittedModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw DataError(path + ": unreadable model document (" + e.what() + ")");
    }
    try {
        if (doc.at("format") != "bgmoe-model") {
            throw DataError(path + ": not a model document");
        }
        if (doc.at("version").get<int>() != kFormatVersion) {
            throw DataError(path + ": unsupported model format version");
        }
        const json payload = doc.at("payload");
        if (fnv1a_hex(payload.dump()) != doc.at("checksum").get<std::string>()) {
            throw DataError(path + ": checksum mismatch");
        }

        FittedModel m;
        const json& spec = payload.at("spec");
        m.spec.g = spec.at("g").get<int>();
        m.spec.gating = network_from_json(spec.at("gating"));
        for (int k = 0; k < 3; ++k) m.spec.alpha[k] = network_from_json(spec.at("alpha")[k]);
        m.spec.beta = network_from_json(spec.at("beta"));
        m.design_names =
            payload.at("design_names").get<std::array<std::vector<std::string>, 5>>();
        m.gating_coefs = matrix_from_json(payload.at("gating_coefs"));
        m.mixing = vector_from_json(payload.at("mixing"));
        for (int k = 0; k < 4; ++k) {
            const json& e = payload.at("experts")[k];
            ExpertNetwork& net = m.experts[k];
            net.kind = kind_from_letter(e.at("kind").get<std::string>().at(0));
            for (const auto& c : e.at("coefs")) net.coefs.push_back(vector_from_json(c));
            net.values = vector_from_json(e.at("values"));
        }
        m.loglik = payload.at("loglik").get<double>();
        m.n_params = payload.at("n_params").get<int>();
        m.converged = payload.at("converged").get<bool>();
        m.iterations = payload.at("iterations").get<int>();
        return m;
    } catch (const json::exception& e) {
        throw DataError(path + ": malformed model document (" + e.what() + ")");
    }
}

}  // namespace bgmoe
