#include "bgmoe/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "bgmoe/errors.hpp"

namespace bgmoe {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

void finalize_levels(Column& col) {
    if (col.numeric || col.labels.empty()) return;
    col.reference = col.labels.front();
    std::set<std::string> levels(col.labels.begin(), col.labels.end());
    levels.erase(col.reference);
    col.dummy_levels.assign(levels.begin(), levels.end());
}

}  // namespace

Dataset::Dataset(Eigen::MatrixXd y, std::vector<Column> covariates)
    : y_(std::move(y)), covariates_(std::move(covariates)) {
    if (y_.rows() < 1 || y_.cols() != 2) {
        throw DataError("dataset needs an n x 2 response block with n >= 1");
    }
    if ((y_.array() <= 0.0).any() || !y_.allFinite()) {
        throw DataError("responses must be strictly positive and finite");
    }
    std::set<std::string> seen{"y1", "y2"};
    for (auto& c : covariates_) {
        if (!seen.insert(c.name).second) {
            throw DataError("duplicate column name: " + c.name);
        }
        const std::size_t len = c.numeric ? c.values.size() : c.labels.size();
        if (len != n()) throw DataError("covariate length mismatch: " + c.name);
        finalize_levels(c);
    }
}

Dataset Dataset::from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv_line(line);

    int iy1 = -1, iy2 = -1;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == "y1") iy1 = static_cast<int>(j);
        if (header[j] == "y2") iy2 = static_cast<int>(j);
    }
    if (iy1 < 0 || iy2 < 0) throw DataError(path + ": columns y1 and y2 are required");

    std::vector<std::vector<std::string>> cells(header.size());
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw DataError(path + ": row " + std::to_string(row + 2) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(header.size()));
        }
        for (std::size_t j = 0; j < fields.size(); ++j) cells[j].push_back(fields[j]);
        ++row;
    }
    if (row == 0) throw DataError(path + ": no data rows");

    Eigen::MatrixXd y(row, 2);
    for (std::size_t i = 0; i < row; ++i) {
        double v1, v2;
        if (!parse_double(cells[iy1][i], v1)) {
            throw DataError(path + ": unparseable y1 at row " + std::to_string(i + 2));
        }
        if (!parse_double(cells[iy2][i], v2)) {
            throw DataError(path + ": unparseable y2 at row " + std::to_string(i + 2));
        }
        if (v1 <= 0.0 || v2 <= 0.0) {
            throw DataError(path + ": non-positive response at row " + std::to_string(i + 2));
        }
        y(i, 0) = v1;
        y(i, 1) = v2;
    }

    std::vector<Column> cols;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (static_cast<int>(j) == iy1 || static_cast<int>(j) == iy2) continue;
        Column c;
        c.name = header[j];
        c.numeric = true;
        std::vector<double> vals(row);
        for (std::size_t i = 0; i < row; ++i) {
            if (!parse_double(cells[j][i], vals[i])) {
                c.numeric = false;
                break;
            }
        }
        if (c.numeric) {
            c.values = std::move(vals);
        } else {
            c.labels = std::move(cells[j]);
        }
        cols.push_back(std::move(c));
    }
    return Dataset(std::move(y), std::move(cols));
}

void Dataset::to_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << "y1,y2";
    for (const auto& c : covariates_) out << ',' << c.name;
    out << '\n';
    for (std::size_t i = 0; i < n(); ++i) {
        out << format_double(y_(i, 0)) << ',' << format_double(y_(i, 1));
        for (const auto& c : covariates_) {
            out << ',';
            if (c.numeric) {
                out << format_double(c.values[i]);
            } else {
                out << c.labels[i];
            }
        }
        out << '\n';
    }
}

const Column& Dataset::column(const std::string& name) const {
    for (const auto& c : covariates_) {
        if (c.name == name) return c;
    }
    throw DataError("unknown column: " + name);
}

bool Dataset::has_column(const std::string& name) const {
    return std::any_of(covariates_.begin(), covariates_.end(),
                       [&](const Column& c) { return c.name == name; });
}

std::vector<std::string> Dataset::column_names() const {
    std::vector<std::string> names;
    for (const auto& c : covariates_) names.push_back(c.name);
    return names;
}

std::pair<Eigen::MatrixXd, std::vector<std::string>> Dataset::design(
    const std::vector<std::string>& terms) const {
    std::vector<std::string> names{"intercept"};
    for (const auto& term : terms) {
        const Column& c = column(term);
        if (c.numeric) {
            names.push_back(c.name);
        } else {
            for (const auto& level : c.dummy_levels) {
                names.push_back(c.name + "=" + level);
            }
        }
    }
    return {design_from_names(names), names};
}

Eigen::MatrixXd Dataset::design_from_names(const std::vector<std::string>& names) const {
    Eigen::MatrixXd w(n(), names.size());
    for (std::size_t j = 0; j < names.size(); ++j) {
        const std::string& name = names[j];
        if (name == "intercept") {
            w.col(j).setOnes();
            continue;
        }
        const auto eq = name.find('=');
        if (eq == std::string::npos) {
            const Column& c = column(name);
            if (!c.numeric) {
                throw DataError("column " + name + " is categorical; expected numeric");
            }
            for (std::size_t i = 0; i < n(); ++i) w(i, j) = c.values[i];
        } else {
            const Column& c = column(name.substr(0, eq));
            if (c.numeric) {
                throw DataError("column " + c.name + " is numeric; level requested");
            }
            const std::string level = name.substr(eq + 1);
            for (std::size_t i = 0; i < n(); ++i) {
                w(i, j) = (c.labels[i] == level) ? 1.0 : 0.0;
            }
        }
    }
    return w;
}

}  // namespace bgmoe
