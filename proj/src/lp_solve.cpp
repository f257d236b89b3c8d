#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <memory>

#include "qfr/math_program.hpp"
#include "simplex.hpp"

namespace qfr {

namespace {

double row_norm_inf(const ConstraintRow& row) {
    double nrm = 0.0;
    for (double v : row.val) nrm = std::max(nrm, std::fabs(v));
    return std::max(1.0, nrm);
}

double row_activity(const ConstraintRow& row, const std::vector<double>& x) {
    double a = 0.0;
    for (std::size_t k = 0; k < row.idx.size(); ++k) a += row.val[k] * x[row.idx[k]];
    return a;
}

double row_violation(const ConstraintRow& row, const std::vector<double>& x) {
    const double a = row_activity(row, x);
    switch (row.sense) {
        case RowSense::LessEq: return a - row.rhs;
        case RowSense::GreaterEq: return row.rhs - a;
        case RowSense::Equal: return std::fabs(a - row.rhs);
    }
    return 0.0;
}

} // namespace

double MathProgram::objective_value(const std::vector<double>& x) const {
    double obj = 0.0;
    for (int j = 0; j < num_vars(); ++j) obj += cost_[j] * x[j];
    if (!quad_dense_.empty()) {
        const int m = num_vars();
        for (int i = 0; i < m; ++i) {
            double acc = 0.0;
            for (int j = 0; j < m; ++j) acc += quad_dense_[static_cast<std::size_t>(i) * m + j] * x[j];
            obj += 0.5 * x[i] * acc;
        }
    } else if (!quad_diag_.empty()) {
        for (int j = 0; j < num_vars(); ++j) obj += 0.5 * quad_diag_[j] * x[j] * x[j];
    }
    return obj;
}

double MathProgram::max_violation(const std::vector<double>& x) const {
    double worst = 0.0;
    for (const auto& row : rows_)
        worst = std::max(worst, row_violation(row, x) / row_norm_inf(row));
    for (int j = 0; j < num_vars(); ++j) {
        if (lower_[j] > -kInf) worst = std::max(worst, lower_[j] - x[j]);
        if (upper_[j] < kInf) worst = std::max(worst, x[j] - upper_[j]);
    }
    return worst;
}

const char* status_name(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
        case SolveStatus::IterationLimit: return "iteration_limit";
    }
    return "?";
}

namespace detail {

// Row-activation driver around BoundedSimplex. Equality rows are always part
// of the working problem; inequality rows enter when the current relaxation
// violates them (capped per round) and the working problem is rebuilt without
// its slack rows when it outgrows the binding set, since iteration cost is
// quadratic in the row count. A solved relaxation that satisfies every
// program row is optimal for the full program.
class LazyLp {
public:
    LazyLp(const MathProgram& program, const SolveOptions& options)
        : program_(program), options_(options), cost_(program.cost()) {
        const int nr = program_.num_rows();
        included_.assign(nr, false);
        int n_ineq = 0;
        for (int r = 0; r < nr; ++r)
            if (program_.rows()[r].sense != RowSense::Equal) ++n_ineq;
        all_upfront_ = n_ineq <= 256;
        for (int r = 0; r < nr; ++r)
            if (program_.rows()[r].sense == RowSense::Equal) included_[r] = true;
        if (all_upfront_) {
            for (int r = 0; r < nr; ++r) included_[r] = true;
        } else {
            for (int r : options_.seed_rows)
                if (r >= 0 && r < nr && program_.rows()[r].sense != RowSense::Equal)
                    included_[r] = true;
        }
        rebuild();
    }

    SolveResult run(bool first_call) {
        SolveResult res;
        const double feas_tol = options_.feasibility_tol;
        long cap = options_.max_iterations;
        SimplexTerm term;
        if (first_call || !sx_->has_basis())
            term = sx_->solve_from_scratch(iter_cap(cap));
        else
            term = sx_->reoptimize(iter_cap(cap));

        for (int round = 0; round < 512; ++round) {
            if (term == SimplexTerm::Infeasible) {
                res.status = SolveStatus::Infeasible;
                res.iterations = sx_->iterations();
                return res;
            }
            if (term == SimplexTerm::IterLimit) {
                res.status = SolveStatus::IterationLimit;
                res.iterations = sx_->iterations();
                return res;
            }
            if (term == SimplexTerm::Unbounded) {
                const auto& ray = sx_->ray();
                if (!add_rows_cutting_ray(ray)) {
                    res.status = SolveStatus::Unbounded;
                    res.iterations = sx_->iterations();
                    return res;
                }
                rebuild();
                term = sx_->solve_from_scratch(iter_cap(cap));
                continue;
            }
            if (term != SimplexTerm::Optimal) { // repair variants never escape
                res.status = SolveStatus::IterationLimit;
                res.iterations = sx_->iterations();
                return res;
            }
            // optimal for the relaxation: check the excluded rows
            sx_->extract_structural(x_);
            if (std::getenv("QFR_LP_DEBUG"))
                std::fprintf(stderr, "[lazylp] round=%d rows=%d iters=%ld\n", round,
                             sx_->num_rows(), sx_->iterations());
            const int added = add_violated_rows(x_, 0.5 * feas_tol);
            if (added == 0) break;
            // drop slack working rows once they dominate the iteration cost
            const int working = static_cast<int>(pending_.size());
            const int tight = count_tight(x_, feas_tol);
            if (!all_upfront_ && working > 2 * tight + addition_cap()) {
                prune_to_tight(x_, feas_tol);
                rebuild();
                term = sx_->solve_from_scratch(iter_cap(cap));
            } else {
                for (int r : fresh_) sx_row_add(r);
                fresh_.clear();
                term = sx_->reoptimize(iter_cap(cap));
            }
        }

        res.status = SolveStatus::Optimal;
        res.x = x_;
        res.objective = 0.0;
        for (int j = 0; j < program_.num_vars(); ++j) res.objective += cost_[j] * x_[j];
        res.max_constraint_violation = program_.max_violation(x_);
        res.iterations = sx_->iterations();
        for (int r = 0; r < program_.num_rows(); ++r) {
            const auto& row = program_.rows()[r];
            if (row.sense == RowSense::Equal || !included_[r]) continue;
            const double slack = std::fabs(row_activity(row, x_) - row.rhs);
            if (slack <= 10.0 * feas_tol * row_norm_inf(row)) res.active_rows.push_back(r);
        }
        if (std::getenv("QFR_LP_DEBUG"))
            std::fprintf(stderr, "[lazylp] done rows=%d active=%zu iters=%ld\n", sx_->num_rows(),
                         res.active_rows.size(), sx_->iterations());
        return res;
    }

    void set_costs(const std::vector<double>& cost) {
        cost_ = cost;
        for (int j = 0; j < program_.num_vars(); ++j) sx_->set_structural_cost(j, cost_[j]);
    }

private:
    long iter_cap(long user_cap) const {
        if (user_cap > 0) return user_cap;
        return 20000 + 200L * std::max(sx_->num_rows(), program_.num_vars());
    }

    int addition_cap() const { return std::max(128, n_eq_); }

    // (re)creates the simplex holding the equality rows plus every currently
    // included inequality row
    void rebuild() {
        sx_ = std::make_unique<BoundedSimplex>(program_.num_vars());
        for (int j = 0; j < program_.num_vars(); ++j) {
            sx_->set_structural_bounds(j, program_.lower()[j], program_.upper()[j]);
            sx_->set_structural_cost(j, cost_[j]);
        }
        pending_.clear();
        fresh_.clear();
        n_eq_ = 0;
        for (int r = 0; r < program_.num_rows(); ++r) {
            if (program_.rows()[r].sense == RowSense::Equal) {
                ++n_eq_;
                sx_row_add(r);
            } else if (included_[r]) {
                sx_row_add(r);
            }
        }
    }

    void sx_row_add(int r) {
        const auto& row = program_.rows()[r];
        double slo = 0.0, sup = 0.0;
        switch (row.sense) {
            case RowSense::LessEq: slo = 0.0; sup = kInf; break;
            case RowSense::GreaterEq: slo = -kInf; sup = 0.0; break;
            case RowSense::Equal: slo = 0.0; sup = 0.0; break;
        }
        sx_->add_row(row.idx, row.val, slo, sup, row.rhs);
        if (row.sense != RowSense::Equal) pending_.push_back(r);
    }

    int count_tight(const std::vector<double>& x, double feas_tol) const {
        int tight = 0;
        for (int r : pending_) {
            const auto& row = program_.rows()[r];
            if (std::fabs(row_activity(row, x) - row.rhs) <=
                10.0 * feas_tol * row_norm_inf(row))
                ++tight;
        }
        return tight;
    }

    void prune_to_tight(const std::vector<double>& x, double feas_tol) {
        for (int r : pending_) {
            const auto& row = program_.rows()[r];
            const double slack = row.rhs - row_activity(row, x);
            if (row.sense == RowSense::LessEq || row.sense == RowSense::GreaterEq) {
                if (std::fabs(slack) > 10.0 * feas_tol * row_norm_inf(row) &&
                    row_violation(row, x) <= 0.0)
                    included_[r] = false;
            }
        }
    }

    // marks up to addition_cap() worst violated rows; they join the simplex
    // either through fresh_ or through the next rebuild
    int add_violated_rows(const std::vector<double>& x, double tol) {
        std::vector<std::pair<double, int>> cand;
        for (int r = 0; r < program_.num_rows(); ++r) {
            if (included_[r]) continue;
            const auto& row = program_.rows()[r];
            const double v = row_violation(row, x) / row_norm_inf(row);
            if (v > tol) cand.emplace_back(-v, r);
        }
        if (cand.empty()) return 0;
        std::sort(cand.begin(), cand.end());
        const std::size_t cap = static_cast<std::size_t>(addition_cap());
        int added = 0;
        for (std::size_t k = 0; k < cand.size() && k < cap; ++k) {
            included_[cand[k].second] = true;
            fresh_.push_back(cand[k].second);
            ++added;
        }
        return added;
    }

    bool add_rows_cutting_ray(const std::vector<double>& ray) {
        bool added = false;
        for (int r = 0; r < program_.num_rows(); ++r) {
            if (included_[r]) continue;
            const auto& row = program_.rows()[r];
            double growth = 0.0;
            for (std::size_t k = 0; k < row.idx.size(); ++k) growth += row.val[k] * ray[row.idx[k]];
            if (row.sense == RowSense::GreaterEq) growth = -growth;
            if (growth > 1e-9 * row_norm_inf(row)) {
                included_[r] = true;
                added = true;
            }
        }
        return added;
    }

    const MathProgram& program_;
    SolveOptions options_;
    std::unique_ptr<BoundedSimplex> sx_;
    std::vector<double> cost_;
    std::vector<bool> included_;
    std::vector<int> pending_; // inequality rows in the current simplex
    std::vector<int> fresh_;   // included but not yet added to the simplex
    bool all_upfront_ = false;
    int n_eq_ = 0;
    std::vector<double> x_;
};

} // namespace detail

SolveResult solve_lp(const MathProgram& program, const SolveOptions& options) {
    if (program.has_quadratic())
        throw DomainError("solve_lp requires a program without a quadratic objective");
    detail::LazyLp lazy(program, options);
    return lazy.run(true);
}

struct LpReoptimizer::Impl {
    Impl(const MathProgram& program, const SolveOptions& options) : lazy(program, options) {}
    detail::LazyLp lazy;
    bool first = true;
};

LpReoptimizer::LpReoptimizer(const MathProgram& program, const SolveOptions& options) {
    if (program.has_quadratic())
        throw DomainError("LpReoptimizer requires a linear objective");
    impl_ = std::make_unique<Impl>(program, options);
}

LpReoptimizer::~LpReoptimizer() = default;
LpReoptimizer::LpReoptimizer(LpReoptimizer&&) noexcept = default;
LpReoptimizer& LpReoptimizer::operator=(LpReoptimizer&&) noexcept = default;

SolveResult LpReoptimizer::solve_with_costs(const std::vector<double>& cost) {
    impl_->lazy.set_costs(cost);
    const bool first = impl_->first;
    impl_->first = false;
    return impl_->lazy.run(first);
}

} // namespace qfr
