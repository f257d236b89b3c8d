#pragma once

#include <cstdint>
#include <vector>

namespace qfr::detail {

enum class SimplexTerm : std::uint8_t { Optimal, Infeasible, Unbounded, IterLimit, Repaired };

// Bounded-variable revised primal/dual simplex over rows  a'x + s_r = b_r.
// Column ids: structural variables [0, ns), then per row r a slack column
// (id ns + 2r) and a phase-1 artificial column (id ns + 2r + 1).
//
// The basis inverse is represented as a dense LU factorization of the basis
// at the last refactorization, followed by an ordered list of transforms:
// block-elimination entries for rows appended afterwards (their slacks enter
// the basis, so the extended basis is block lower-triangular) and
// product-form eta updates for pivots. This keeps row appends O(nnz) and
// pivots O(m^2), which is what the row-activation outer loop relies on.
class BoundedSimplex {
public:
    explicit BoundedSimplex(int num_structural);

    void set_structural_bounds(int j, double lo, double up);
    void set_structural_cost(int j, double c); // phase-2 objective
    int add_row(const std::vector<int>& idx, const std::vector<double>& val,
                double slack_lo, double slack_up, double rhs);

    int num_rows() const { return static_cast<int>(rhs_.size()); }
    bool has_basis() const { return solved_; }
    long iterations() const { return total_iters_; }

    /// Full cold solve: fresh crash basis, phase 1 with artificials, phase 2.
    SimplexTerm solve_from_scratch(long iter_cap);

    /// Warm continuation after rows were appended and/or costs changed:
    /// extends the basis with the new slacks, repairs primal feasibility with
    /// the dual simplex, then finishes with primal iterations.
    SimplexTerm reoptimize(long iter_cap);

    void extract_structural(std::vector<double>& x) const;
    /// Unbounded-ray direction on structural variables (valid after
    /// SimplexTerm::Unbounded).
    const std::vector<double>& ray() const { return ray_; }

private:
    enum class VStat : std::uint8_t { Basic, AtLower, AtUpper, FreeZero };

    struct BaseFactor {
        int m = 0;
        std::vector<double> lu;  // column-major m*m
        std::vector<int> piv;
    };
    struct BlockOp {
        int start = 0; // dimension before the block was appended
        // per appended basis slot: coefficients on prefix basis positions
        std::vector<std::vector<std::pair<int, double>>> rows;
    };
    struct EtaOp {
        int r = 0;
        std::vector<double> t; // pivot column at creation time
    };
    struct Op {
        enum class Kind : std::uint8_t { Base, Block, Eta } kind;
        int index; // into base_/blocks_/etas_
    };

    // column taxonomy
    bool is_structural(int col) const { return col < ns_; }
    bool is_slack(int col) const { return col >= ns_ && ((col - ns_) & 1) == 0; }
    bool is_artificial(int col) const { return col >= ns_ && ((col - ns_) & 1) == 1; }
    int row_of(int col) const { return (col - ns_) >> 1; }
    int slack_col(int row) const { return ns_ + 2 * row; }
    int art_col(int row) const { return ns_ + 2 * row + 1; }

    double cost_of(int col) const;
    double nonbasic_value(int col) const;
    int num_cols() const { return static_cast<int>(lo_.size()); }
    template <typename Fn> void for_col_entries(int col, Fn&& fn) const;

    void ftran(std::vector<double>& v) const;
    void btran(std::vector<double>& v) const;
    void push_eta(int r, const std::vector<double>& t);
    /// Rebuilds the LU of the current basis. A numerically dependent column
    /// is replaced by the artificial of the row left uncovered (basis
    /// repair); the return value reports whether that happened, in which
    /// case basic values may sit outside their bounds until a dual pass.
    bool refactorize();
    void compute_xB();
    void compute_duals(std::vector<double>& y) const;
    double reduced_cost(int col, const std::vector<double>& y) const;
    void load_column(int col, std::vector<double>& dense) const;

    SimplexTerm primal_loop(long iter_cap);
    SimplexTerm dual_loop(long iter_cap);
    /// primal_loop plus dual-pass recovery whenever a refactorization had to
    /// repair the basis (repaired bases may be primal-infeasible).
    SimplexTerm primal_with_repair(long iter_cap);
    void crash_basis();
    bool drive_out_artificials();
    void close_artificials();
    void extend_basis_with_pending();
    double current_objective() const;
    void build_ray(int q, double sigma, const std::vector<double>& t);

    int ns_ = 0;
    std::vector<double> lo_, up_;
    std::vector<double> cost2_;       // phase-2 costs (all columns)
    std::vector<VStat> vstat_;
    std::vector<double> art_sign_;    // per row, +-1 once the artificial is used

    std::vector<std::vector<std::pair<int, double>>> scols_; // structural col entries
    std::vector<std::vector<std::pair<int, double>>> rows_;  // row -> structural entries
    std::vector<double> rhs_;

    std::vector<int> basic_;       // basis position -> column id
    std::vector<int> pos_of_col_;  // column id -> basis position or -1
    std::vector<double> xB_;

    BaseFactor base_;
    std::vector<BlockOp> blocks_;
    std::vector<EtaOp> etas_;
    std::vector<Op> ops_;

    bool phase1_ = false;
    bool solved_ = false;
    int rows_in_basis_ = 0; // rows covered by the current basis
    long total_iters_ = 0;
    std::vector<double> ray_;

    static constexpr double kPivTol = 1e-9;
    static constexpr double kDualTol = 1e-9;
    static constexpr double kFeasTol = 1e-9;
    static constexpr int kEtaRefactor = 220;
};

} // namespace qfr::detail
