#ifndef BGMOE_DATASET_HPP
#define BGMOE_DATASET_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bgmoe {

/// One raw covariate column. Numeric columns hold parsed reals; categorical
/// columns hold string labels plus the level inventory (reference level is
/// the first observed, remaining levels sorted for deterministic encoding).
struct Column {
    std::string name;
    bool numeric = true;
    std::vector<double> values;
    std::vector<std::string> labels;
    std::string reference;
    std::vector<std::string> dummy_levels;  // sorted, reference excluded
};

/// Bivariate responses plus raw covariates; design matrices (leading
/// intercept, reference-coded dummies) are built on demand.
class Dataset {
public:
    static Dataset from_csv(const std::string& path);
    void to_csv(const std::string& path) const;

    Dataset() = default;
    Dataset(Eigen::MatrixXd y, std::vector<Column> covariates);

    std::size_t n() const { return static_cast<std::size_t>(y_.rows()); }
    const Eigen::MatrixXd& y() const { return y_; }  // n x 2
    const std::vector<Column>& covariates() const { return covariates_; }
    const Column& column(const std::string& name) const;
    bool has_column(const std::string& name) const;
    std::vector<std::string> column_names() const;

    /// Design matrix for a list of raw covariate names, intercept first.
    /// Returns the matrix and the expanded column names ("intercept",
    /// "mileage", "fuel=Petrol", ...).
    std::pair<Eigen::MatrixXd, std::vector<std::string>> design(
        const std::vector<std::string>& terms) const;

    /// Design matrix from previously expanded names (model prediction path);
    /// fails if a referenced column or level is unknown.
    Eigen::MatrixXd design_from_names(const std::vector<std::string>& names) const;

private:
    Eigen::MatrixXd y_;
    std::vector<Column> covariates_;
};

}  // namespace bgmoe

#endif
