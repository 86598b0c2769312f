#include "bgmoe/quadrature.hpp"

#include <cmath>

#include "bgmoe/errors.hpp"

namespace bgmoe {

void QuadratureConfig::validate() const {
    if (!(relative_tolerance > 0.0) || relative_tolerance > 1e-4) {
        throw DomainError("quadrature relative_tolerance must lie in (0, 1e-4]");
    }
    if (max_levels < 4 || max_levels > detail::TanhSinhTable::kMaxLevel) {
        throw DomainError("quadrature max_levels must lie in [4, 12]");
    }
}

namespace detail {

namespace {

QuadNode make_node(double u) {
    const double a = M_PI * std::sinh(u);  // a >= 0
    QuadNode n;
    const double ema = std::exp(-a);
    n.log_hi = -std::log1p(ema);
    n.log_lo = -a + n.log_hi;
    n.t_hi = 1.0 / (1.0 + ema);
    n.t_lo = 1.0 - n.t_hi;  // exact where representable; log_lo covers the rest
    n.log_w = std::log(M_PI * std::cosh(u)) + n.log_hi + n.log_lo;
    return n;
}

}  // namespace

double TanhSinhTable::step(int k) {
    return kBaseStep / static_cast<double>(1 << k);
}

TanhSinhTable::TanhSinhTable() {
    for (double u = 0.0; u <= kUMax; u += kBaseStep) {
        levels_[0].push_back(make_node(u));
    }
    for (int k = 1; k <= kMaxLevel; ++k) {
        const double h = step(k);
        for (double u = h; u <= kUMax; u += 2.0 * h) {
            levels_[k].push_back(make_node(u));
        }
    }
}

const TanhSinhTable& TanhSinhTable::instance() {
    static const TanhSinhTable table;
    return table;
}

}  // namespace detail
}  // namespace bgmoe
