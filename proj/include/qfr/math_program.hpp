#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "qfr/errors.hpp"

namespace qfr {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense : std::uint8_t { LessEq, Equal, GreaterEq };

/// One sparse constraint row: sum_k val[k] * x[idx[k]]  (sense)  rhs.
struct ConstraintRow {
    std::vector<int> idx;
    std::vector<double> val;
    RowSense sense = RowSense::LessEq;
    double rhs = 0.0;
};

/// A linear or convex-quadratic program in the one standard form every
/// estimator reduces to:
///
///   minimize   1/2 x'Qx + c'x
///   subject to sparse rows with sense <=, =, >=
///              per-variable bounds (+-inf allowed)
///
/// Q is optional (absent -> LP) and stored either as a diagonal or as a
/// dense symmetric PSD matrix.
class MathProgram {
public:
    int add_variable(double lower, double upper, double cost = 0.0) {
        lower_.push_back(lower);
        upper_.push_back(upper);
        cost_.push_back(cost);
        return static_cast<int>(cost_.size()) - 1;
    }

    void add_row(std::vector<int> idx, std::vector<double> val, RowSense sense, double rhs) {
        if (idx.size() != val.size()) throw DimensionError("row index/value size mismatch");
        rows_.push_back(ConstraintRow{std::move(idx), std::move(val), sense, rhs});
    }

    void set_cost(int var, double c) { cost_[static_cast<std::size_t>(var)] = c; }

    /// Diagonal quadratic term: 1/2 * q * x_var^2 added to the objective.
    void set_quadratic_diag(int var, double q) {
        if (quad_diag_.empty()) quad_diag_.assign(cost_.size(), 0.0);
        if (quad_diag_.size() < cost_.size()) quad_diag_.resize(cost_.size(), 0.0);
        quad_diag_[static_cast<std::size_t>(var)] = q;
    }

    /// Dense symmetric Q, row-major m*m. Overrides any diagonal entries.
    void set_quadratic_dense(std::vector<double> q_row_major) {
        quad_dense_ = std::move(q_row_major);
    }

    int num_vars() const { return static_cast<int>(cost_.size()); }
    int num_rows() const { return static_cast<int>(rows_.size()); }
    bool has_quadratic() const { return !quad_diag_.empty() || !quad_dense_.empty(); }

    const std::vector<double>& cost() const { return cost_; }
    const std::vector<double>& lower() const { return lower_; }
    const std::vector<double>& upper() const { return upper_; }
    const std::vector<ConstraintRow>& rows() const { return rows_; }
    const std::vector<double>& quad_diag() const { return quad_diag_; }
    const std::vector<double>& quad_dense() const { return quad_dense_; }

    double objective_value(const std::vector<double>& x) const;

    /// Largest row violation, each row scaled by max(1, ||a||_inf).
    double max_violation(const std::vector<double>& x) const;

private:
    std::vector<double> cost_, lower_, upper_;
    std::vector<double> quad_diag_;  // empty or size num_vars
    std::vector<double> quad_dense_; // empty or num_vars^2 row-major
    std::vector<ConstraintRow> rows_;
};

enum class SolveStatus : std::uint8_t { Optimal, Infeasible, Unbounded, IterationLimit };

const char* status_name(SolveStatus s);

struct SolveResult {
    SolveStatus status = SolveStatus::IterationLimit;
    std::vector<double> x;
    double objective = 0.0;
    double max_constraint_violation = 0.0;
    /// Inequality rows binding at the solution (program row indices);
    /// useful as seed_rows for a related re-solve.
    std::vector<int> active_rows;
    long iterations = 0;
};

struct SolveOptions {
    double feasibility_tol = 1e-7; // scaled by row norm
    double optimality_tol = 1e-6;
    long max_iterations = -1; // -1: automatic from problem size
    /// Inequality rows (program indices) to activate before the first solve.
    std::vector<int> seed_rows;
};

/// Solves a pure LP (Q absent). Inequality rows are activated lazily: the
/// solver works on a relaxation, checks the full row set, and enlarges the
/// working set until no violation remains, warm-starting each round with the
/// dual simplex. Infeasible/unbounded programs are reported via status.
SolveResult solve_lp(const MathProgram& program, const SolveOptions& options = {});

/// Solves a convex QP (Q present and PSD) with a primal-dual interior-point
/// method plus an active-set polish step, behind the same lazy-row wrapper.
SolveResult solve_qp(const MathProgram& program, const SolveOptions& options = {});

/// Re-solves one LP under a sequence of objective vectors, keeping the basis
/// and the activated row set between calls. Used by the estimators when
/// sweeping tau on fixed data.
class LpReoptimizer {
public:
    LpReoptimizer(const MathProgram& program, const SolveOptions& options = {});
    ~LpReoptimizer();
    LpReoptimizer(LpReoptimizer&&) noexcept;
    LpReoptimizer& operator=(LpReoptimizer&&) noexcept;

    /// First call performs the cold solve; later calls warm-start.
    SolveResult solve_with_costs(const std::vector<double>& cost);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace qfr
