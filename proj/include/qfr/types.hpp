#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qfr/errors.hpp"

namespace qfr {

/// Dense row-major matrix, the only matrix shape the estimators need.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Observed production data: n observations of d nonnegative inputs and one output.
/// Immutable after construction; the constructor enforces the invariants.
class Dataset {
public:
    Dataset(Matrix inputs, std::vector<double> outputs,
            std::vector<std::string> labels = {});

    std::size_t n() const { return outputs_.size(); }
    std::size_t d() const { return inputs_.cols(); }
    double x(std::size_t i, std::size_t j) const { return inputs_(i, j); }
    double y(std::size_t i) const { return outputs_[i]; }
    const Matrix& inputs() const { return inputs_; }
    const std::vector<double>& outputs() const { return outputs_; }
    const std::vector<std::string>& labels() const { return labels_; }
    bool has_labels() const { return !labels_.empty(); }

    /// True iff inputs of observation i are componentwise <= inputs of h.
    bool dominates(std::size_t i, std::size_t h) const;

private:
    Matrix inputs_;
    std::vector<double> outputs_;
    std::vector<std::string> labels_;
};

enum class LevelKind : std::uint8_t { Quantile, Expectile };

/// A level in (0,1), tagged as quantile tau or expectile tau-tilde.
class QuantileLevel {
public:
    static QuantileLevel quantile(double tau) { return QuantileLevel(tau, LevelKind::Quantile); }
    static QuantileLevel expectile(double tau_tilde) {
        return QuantileLevel(tau_tilde, LevelKind::Expectile);
    }

    double value() const { return value_; }
    LevelKind kind() const { return kind_; }
    bool is_quantile() const { return kind_ == LevelKind::Quantile; }
    bool is_expectile() const { return kind_ == LevelKind::Expectile; }

private:
    QuantileLevel(double value, LevelKind kind) : value_(value), kind_(kind) {
        if (!(value > 0.0) || !(value < 1.0) || !std::isfinite(value))
            throw DomainError("level must lie in (0,1), got " + std::to_string(value));
    }
    double value_;
    LevelKind kind_;
};

enum class Method : std::uint8_t {
    CQR,
    CER,
    ICQR,
    ICER,
    OrderAlpha,
    ConvexifiedOrderAlpha,
    FDH,
};

const char* method_name(Method m);
bool is_regression_method(Method m);

/// Output of a frontier estimator. Regression methods carry per-observation
/// hyperplanes (intercepts, slopes) and the split residuals; partial-frontier
/// methods carry fitted values only.
struct FrontierFit {
    Method method;
    QuantileLevel level;
    std::optional<std::vector<double>> intercepts; // alpha_i, absent for non-regression
    std::optional<Matrix> slopes;                  // beta_i (n x d, >= 0), absent likewise
    std::vector<double> fitted;
    std::vector<double> residual_pos; // eps+, empty for non-regression methods
    std::vector<double> residual_neg; // eps-
    double objective = 0.0;

    std::size_t n() const { return fitted.size(); }
    bool has_hyperplanes() const { return intercepts.has_value() && slopes.has_value(); }
};

/// Binary partial-order matrix: entry(i,h) == 1 iff observation i's inputs are
/// componentwise <= observation h's. Reflexive and transitive by construction;
/// duplicated input vectors dominate each other in both directions.
class DominanceMatrix {
public:
    DominanceMatrix() = default;
    explicit DominanceMatrix(std::size_t n) : n_(n), bits_(n * n, 0) {}

    std::size_t n() const { return n_; }
    bool at(std::size_t i, std::size_t h) const { return bits_[i * n_ + h] != 0; }
    void set(std::size_t i, std::size_t h, bool v) { bits_[i * n_ + h] = v ? 1 : 0; }

    bool is_reflexive() const;
    bool is_transitive() const;

private:
    std::size_t n_ = 0;
    std::vector<std::uint8_t> bits_;
};

/// Residual counts and the expectile ratio of a regression fit.
struct PropertyReport {
    std::size_t n_pos = 0;   // residual_pos_i > threshold
    std::size_t n_neg = 0;   // residual_neg_i > threshold
    double pos_share = 0.0;  // n_pos / n
    double neg_share = 0.0;  // n_neg / n
    double expectile_ratio = 0.0; // sum eps- / (sum eps+ + sum eps-)
    bool ratio_defined = false;   // false when both residual sums are zero
};

} // namespace qfr
