#ifndef BGMOE_QUADRATURE_HPP
#define BGMOE_QUADRATURE_HPP

#include <vector>

namespace bgmoe {

/// Settings for the double-exponential (tanh-sinh) rule used by every
/// bivariate-gamma integral.
enum class QuadScheme { DoubleExponential };

struct QuadratureConfig {
    double relative_tolerance = 1e-10;  // on the integral and each moment
    int max_levels = 12;                // mesh halvings before giving up
    QuadScheme scheme = QuadScheme::DoubleExponential;

    void validate() const;
};

namespace detail {

/// One tanh-sinh abscissa at u >= 0 for the map t(u) = sigmoid(pi*sinh u)
/// onto (0, 1). The node at -u is the mirror image, so only the nonnegative
/// half is tabulated. t_hi/t_lo may round to 1/0 for far-tail nodes; the
/// log fields stay exact, which is what the log-space integrand consumes.
struct QuadNode {
    double t_hi;     // sigmoid(|a|), the side closer to 1
    double t_lo;     // sigmoid(-|a|) = 1 - t_hi
    double log_hi;   // log(t_hi)
    double log_lo;   // log(t_lo)
    double log_w;    // log(dt/du) = log(pi*cosh u) + log_hi + log_lo
};

/// Nested node tables: level 0 holds u = j*h0 (j >= 0), level k >= 1 holds
/// the odd multiples of h0/2^k. Built once, shared by all threads.
class TanhSinhTable {
public:
    static constexpr int kMaxLevel = 12;
    static constexpr double kBaseStep = 0.5;
    // Far enough out that even alpha3 at the 1e-8 floor has negligible tail
    // mass beyond the last node.
    static constexpr double kUMax = 22.0;

    static const TanhSinhTable& instance();

    const std::vector<QuadNode>& level(int k) const { return levels_[k]; }
    static double step(int k);

private:
    TanhSinhTable();
    std::vector<QuadNode> levels_[kMaxLevel + 1];
};

}  // namespace detail
}  // namespace bgmoe

#endif
