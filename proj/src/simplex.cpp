#include "simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <cstdlib>

#include "qfr/errors.hpp"

namespace qfr::detail {

namespace {
constexpr double kInfD = std::numeric_limits<double>::infinity();
}

BoundedSimplex::BoundedSimplex(int num_structural) : ns_(num_structural) {
    lo_.assign(ns_, -kInfD);
    up_.assign(ns_, kInfD);
    cost2_.assign(ns_, 0.0);
    vstat_.assign(ns_, VStat::FreeZero);
    scols_.resize(ns_);
    pos_of_col_.assign(ns_, -1);
}

void BoundedSimplex::set_structural_bounds(int j, double lo, double up) {
    lo_[j] = lo;
    up_[j] = up;
}

void BoundedSimplex::set_structural_cost(int j, double c) { cost2_[j] = c; }

int BoundedSimplex::add_row(const std::vector<int>& idx, const std::vector<double>& val,
                            double slack_lo, double slack_up, double rhs) {
    const int r = num_rows();
    rows_.emplace_back();
    auto& row = rows_.back();
    row.reserve(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
        if (val[k] == 0.0) continue;
        row.emplace_back(idx[k], val[k]);
        scols_[idx[k]].emplace_back(r, val[k]);
    }
    rhs_.push_back(rhs);
    // slack column, then artificial column (closed until phase 1 opens it)
    lo_.push_back(slack_lo);
    up_.push_back(slack_up);
    cost2_.push_back(0.0);
    vstat_.push_back(slack_lo > -kInfD ? VStat::AtLower : VStat::AtUpper);
    pos_of_col_.push_back(-1);
    lo_.push_back(0.0);
    up_.push_back(0.0);
    cost2_.push_back(0.0);
    vstat_.push_back(VStat::AtLower);
    pos_of_col_.push_back(-1);
    art_sign_.push_back(1.0);
    return r;
}

double BoundedSimplex::cost_of(int col) const {
    if (phase1_) return is_artificial(col) ? 1.0 : 0.0;
    return cost2_[col];
}

double BoundedSimplex::nonbasic_value(int col) const {
    switch (vstat_[col]) {
        case VStat::AtLower: return lo_[col];
        case VStat::AtUpper: return up_[col];
        case VStat::FreeZero: return 0.0;
        case VStat::Basic: break;
    }
    return xB_[pos_of_col_[col]];
}

template <typename Fn>
void BoundedSimplex::for_col_entries(int col, Fn&& fn) const {
    if (is_structural(col)) {
        for (const auto& [r, v] : scols_[col]) fn(r, v);
    } else if (is_slack(col)) {
        fn(row_of(col), 1.0);
    } else {
        fn(row_of(col), art_sign_[row_of(col)]);
    }
}

void BoundedSimplex::load_column(int col, std::vector<double>& dense) const {
    std::fill(dense.begin(), dense.end(), 0.0);
    for_col_entries(col, [&](int r, double v) { dense[r] = v; });
}

void BoundedSimplex::ftran(std::vector<double>& v) const {
    for (const Op& op : ops_) {
        if (op.kind == Op::Kind::Base) {
            const int m = base_.m;
            const double* lu = base_.lu.data();
            for (int k = 0; k < m; ++k) {
                const int p = base_.piv[k];
                if (p != k) std::swap(v[k], v[p]);
            }
            for (int k = 0; k < m; ++k) { // L (unit diagonal)
                const double vk = v[k];
                if (vk == 0.0) continue;
                const double* colk = lu + static_cast<std::size_t>(k) * m;
                for (int i = k + 1; i < m; ++i) v[i] -= colk[i] * vk;
            }
            for (int k = m - 1; k >= 0; --k) { // U
                const double* colk = lu + static_cast<std::size_t>(k) * m;
                const double vk = (v[k] /= colk[k]);
                if (vk == 0.0) continue;
                for (int i = 0; i < k; ++i) v[i] -= colk[i] * vk;
            }
        } else if (op.kind == Op::Kind::Block) {
            const BlockOp& blk = blocks_[op.index];
            for (std::size_t k = 0; k < blk.rows.size(); ++k) {
                double acc = v[blk.start + static_cast<int>(k)];
                for (const auto& [pos, c] : blk.rows[k]) acc -= c * v[pos];
                v[blk.start + static_cast<int>(k)] = acc;
            }
        } else {
            const EtaOp& e = etas_[op.index];
            const int dim = static_cast<int>(e.t.size());
            const double piv = (v[e.r] /= e.t[e.r]);
            if (piv != 0.0) {
                for (int i = 0; i < dim; ++i)
                    if (i != e.r) v[i] -= e.t[i] * piv;
            }
        }
    }
}

void BoundedSimplex::btran(std::vector<double>& v) const {
    for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) {
        const Op& op = *it;
        if (op.kind == Op::Kind::Base) {
            const int m = base_.m;
            const double* lu = base_.lu.data();
            for (int k = 0; k < m; ++k) { // U' (lower): forward
                const double* colk = lu + static_cast<std::size_t>(k) * m;
                double acc = v[k];
                for (int i = 0; i < k; ++i) acc -= colk[i] * v[i];
                v[k] = acc / colk[k];
            }
            for (int k = m - 1; k >= 0; --k) { // L' (unit upper): backward
                const double* colk = lu + static_cast<std::size_t>(k) * m;
                double acc = v[k];
                for (int i = k + 1; i < m; ++i) acc -= colk[i] * v[i];
                v[k] = acc;
            }
            for (int k = m - 1; k >= 0; --k) {
                const int p = base_.piv[k];
                if (p != k) std::swap(v[k], v[p]);
            }
        } else if (op.kind == Op::Kind::Block) {
            const BlockOp& blk = blocks_[op.index];
            for (std::size_t k = 0; k < blk.rows.size(); ++k) {
                const double vk = v[blk.start + static_cast<int>(k)];
                if (vk == 0.0) continue;
                for (const auto& [pos, c] : blk.rows[k]) v[pos] -= c * vk;
            }
        } else {
            const EtaOp& e = etas_[op.index];
            const int dim = static_cast<int>(e.t.size());
            double s = 0.0;
            for (int i = 0; i < dim; ++i) s += e.t[i] * v[i];
            v[e.r] -= (s - v[e.r]) / e.t[e.r];
        }
    }
}

void BoundedSimplex::push_eta(int r, const std::vector<double>& t) {
    etas_.push_back(EtaOp{r, t});
    ops_.push_back(Op{Op::Kind::Eta, static_cast<int>(etas_.size()) - 1});
}

bool BoundedSimplex::refactorize() {
    const int m = static_cast<int>(basic_.size());
    bool repaired = false;
    for (int attempt = 0; attempt <= 12; ++attempt) {
        base_.m = m;
        base_.lu.assign(static_cast<std::size_t>(m) * m, 0.0);
        base_.piv.assign(m, 0);
        double* lu = base_.lu.data();
        for (int p = 0; p < m; ++p) {
            double* col = lu + static_cast<std::size_t>(p) * m;
            for_col_entries(basic_[p], [&](int r, double v) { col[r] = v; });
        }
        std::vector<int> row_at(m);
        for (int i = 0; i < m; ++i) row_at[i] = i;
        int fail_slot = -1, fail_row = -1;
        for (int k = 0; k < m && fail_slot < 0; ++k) {
            double* colk = lu + static_cast<std::size_t>(k) * m;
            int p = k;
            double best = std::fabs(colk[k]);
            for (int i = k + 1; i < m; ++i)
                if (std::fabs(colk[i]) > best) { best = std::fabs(colk[i]); p = i; }
            if (best < 1e-12) {
                fail_slot = k;
                fail_row = row_at[k];
                break;
            }
            base_.piv[k] = p;
            if (p != k) { // full-row swap: the L part is permuted with the row
                for (int j = 0; j < m; ++j)
                    std::swap(lu[static_cast<std::size_t>(j) * m + k],
                              lu[static_cast<std::size_t>(j) * m + p]);
                std::swap(row_at[k], row_at[p]);
            }
            const double inv = 1.0 / colk[k];
            for (int i = k + 1; i < m; ++i) colk[i] *= inv;
            for (int j = k + 1; j < m; ++j) {
                double* colj = lu + static_cast<std::size_t>(j) * m;
                const double a = colj[k];
                if (a == 0.0) continue;
                for (int i = k + 1; i < m; ++i) colj[i] -= colk[i] * a;
            }
        }
        if (fail_slot < 0) {
            ops_.clear();
            blocks_.clear();
            etas_.clear();
            ops_.push_back(Op{Op::Kind::Base, 0});
            compute_xB();
            return repaired;
        }
        // the column at fail_slot is numerically dependent on the others;
        // swap in the artificial of the row left uncovered and restart
        const int out_col = basic_[fail_slot];
        const int ac = art_col(fail_row);
        if (attempt == 12 || vstat_[ac] == VStat::Basic)
            throw SolverError("singular basis could not be repaired");
        pos_of_col_[out_col] = -1;
        if (lo_[out_col] > -kInfD)
            vstat_[out_col] = VStat::AtLower;
        else if (up_[out_col] < kInfD)
            vstat_[out_col] = VStat::AtUpper;
        else
            vstat_[out_col] = VStat::FreeZero;
        basic_[fail_slot] = ac;
        pos_of_col_[ac] = fail_slot;
        vstat_[ac] = VStat::Basic;
        repaired = true;
    }
    throw SolverError("singular basis could not be repaired");
}

void BoundedSimplex::compute_xB() {
    const int m = static_cast<int>(basic_.size());
    xB_.assign(m, 0.0);
    for (int r = 0; r < m; ++r) xB_[r] = rhs_[r];
    for (int j = 0; j < ns_; ++j) {
        if (vstat_[j] == VStat::Basic) continue;
        const double v = nonbasic_value(j);
        if (v == 0.0) continue;
        for (const auto& [r, a] : scols_[j]) xB_[r] -= a * v;
    }
    // nonbasic slacks and artificials always sit at zero
    ftran(xB_);
}

void BoundedSimplex::compute_duals(std::vector<double>& y) const {
    const int m = static_cast<int>(basic_.size());
    y.assign(m, 0.0);
    for (int p = 0; p < m; ++p) y[p] = cost_of(basic_[p]);
    btran(y);
}

double BoundedSimplex::reduced_cost(int col, const std::vector<double>& y) const {
    double d = cost_of(col);
    for_col_entries(col, [&](int r, double v) { d -= y[r] * v; });
    return d;
}

double BoundedSimplex::current_objective() const {
    double obj = 0.0;
    const int m = static_cast<int>(basic_.size());
    for (int p = 0; p < m; ++p) obj += cost_of(basic_[p]) * xB_[p];
    for (int j = 0; j < ns_; ++j)
        if (vstat_[j] != VStat::Basic) obj += cost_of(j) * nonbasic_value(j);
    return obj;
}

void BoundedSimplex::crash_basis() {
    const int m = num_rows();
    basic_.assign(m, -1);
    std::fill(pos_of_col_.begin(), pos_of_col_.end(), -1);
    xB_.assign(m, 0.0);

    for (int j = 0; j < ns_; ++j) {
        if (lo_[j] > -kInfD)
            vstat_[j] = VStat::AtLower;
        else if (up_[j] < kInfD)
            vstat_[j] = VStat::AtUpper;
        else
            vstat_[j] = VStat::FreeZero;
    }
    std::vector<double> act(m, 0.0);
    for (int j = 0; j < ns_; ++j) {
        const double v = nonbasic_value(j);
        if (v == 0.0) continue;
        for (const auto& [r, a] : scols_[j]) act[r] += a * v;
    }
    for (int r = 0; r < m; ++r) {
        const int sc = slack_col(r), ac = art_col(r);
        const double resid = rhs_[r] - act[r];
        lo_[ac] = 0.0;
        up_[ac] = 0.0;
        vstat_[ac] = VStat::AtLower;
        if (resid >= lo_[sc] - kFeasTol && resid <= up_[sc] + kFeasTol) {
            basic_[r] = sc;
            pos_of_col_[sc] = r;
            vstat_[sc] = VStat::Basic;
            xB_[r] = resid;
        } else {
            const double snear = std::clamp(0.0, lo_[sc], up_[sc]);
            vstat_[sc] = (snear == lo_[sc] && lo_[sc] > -kInfD) ? VStat::AtLower : VStat::AtUpper;
            const double gap = resid - snear;
            art_sign_[r] = gap >= 0.0 ? 1.0 : -1.0;
            up_[ac] = kInfD; // open the artificial
            basic_[r] = ac;
            pos_of_col_[ac] = r;
            vstat_[ac] = VStat::Basic;
            xB_[r] = std::fabs(gap);
        }
    }
    rows_in_basis_ = m;
    refactorize();
}

void BoundedSimplex::close_artificials() {
    for (int r = 0; r < num_rows(); ++r) {
        const int ac = art_col(r);
        if (vstat_[ac] != VStat::Basic) {
            lo_[ac] = 0.0;
            up_[ac] = 0.0;
            vstat_[ac] = VStat::AtLower;
        } else {
            // dependent row: the artificial stays basic, pinned at zero
            lo_[ac] = 0.0;
            up_[ac] = 0.0;
        }
    }
}

bool BoundedSimplex::drive_out_artificials() {
    const int m = static_cast<int>(basic_.size());
    bool repaired = false;
    std::vector<double> rho(m), t(m);
    for (int p = 0; p < m; ++p) {
        if (!is_artificial(basic_[p])) continue;
        // row p of the basis inverse
        std::fill(rho.begin(), rho.end(), 0.0);
        rho[p] = 1.0;
        btran(rho);
        int best = -1;
        double best_alpha = 0.0;
        for (int col = 0; col < num_cols(); ++col) {
            if (vstat_[col] == VStat::Basic || is_artificial(col)) continue;
            if (lo_[col] == up_[col]) continue;
            double alpha = 0.0;
            for_col_entries(col, [&](int r, double v) { alpha += rho[r] * v; });
            if (std::fabs(alpha) > std::fabs(best_alpha) + 1e-12) {
                best_alpha = alpha;
                best = col;
            }
        }
        if (best < 0 || std::fabs(best_alpha) < 1e-7) continue; // dependent row
        load_column(best, t);
        ftran(t);
        if (std::fabs(t[p]) < 1e-9) continue;
        const double delta = (0.0 - xB_[p]) / (-t[p]);
        for (int i = 0; i < m; ++i)
            if (i != p) xB_[i] -= delta * t[i];
        const int leaving = basic_[p];
        vstat_[leaving] = VStat::AtLower;
        pos_of_col_[leaving] = -1;
        xB_[p] = nonbasic_value(best) + delta;
        basic_[p] = best;
        pos_of_col_[best] = p;
        vstat_[best] = VStat::Basic;
        push_eta(p, t);
        if (static_cast<int>(etas_.size()) > kEtaRefactor) repaired |= refactorize();
    }
    return repaired;
}

void BoundedSimplex::extend_basis_with_pending() {
    const int old_m = static_cast<int>(basic_.size());
    if (rows_in_basis_ == num_rows()) return;
    BlockOp blk;
    blk.start = old_m;
    for (int r = rows_in_basis_; r < num_rows(); ++r) {
        double s = rhs_[r];
        std::vector<std::pair<int, double>> crow;
        for (const auto& [j, a] : rows_[r]) {
            if (vstat_[j] == VStat::Basic) {
                s -= a * xB_[pos_of_col_[j]];
                crow.emplace_back(pos_of_col_[j], a);
            } else {
                s -= a * nonbasic_value(j);
            }
        }
        const int sc = slack_col(r);
        const int p = static_cast<int>(basic_.size());
        basic_.push_back(sc);
        pos_of_col_[sc] = p;
        vstat_[sc] = VStat::Basic;
        xB_.push_back(s);
        blk.rows.push_back(std::move(crow));
    }
    blocks_.push_back(std::move(blk));
    ops_.push_back(Op{Op::Kind::Block, static_cast<int>(blocks_.size()) - 1});
    rows_in_basis_ = num_rows();
}

void BoundedSimplex::build_ray(int q, double sigma, const std::vector<double>& t) {
    ray_.assign(ns_, 0.0);
    if (is_structural(q)) ray_[q] = sigma;
    const int m = static_cast<int>(basic_.size());
    for (int i = 0; i < m; ++i)
        if (is_structural(basic_[i])) ray_[basic_[i]] = -sigma * t[i];
}

SimplexTerm BoundedSimplex::primal_loop(long iter_cap) {
    const int m = static_cast<int>(basic_.size());
    std::vector<double> y(m), t(m);
    long stall = 0;
    bool bland = false;
    double last_obj = current_objective();
    double cnorm = 1.0;
    for (int col = 0; col < num_cols(); ++col) cnorm = std::max(cnorm, std::fabs(cost_of(col)));
    const double dtol = kDualTol * cnorm;

    for (long it = 0; it < iter_cap; ++it) {
        compute_duals(y);
        int q = -1;
        double best_score = dtol;
        for (int col = 0; col < num_cols(); ++col) {
            if (vstat_[col] == VStat::Basic || lo_[col] == up_[col]) continue;
            if (!phase1_ && is_artificial(col)) continue;
            const double d = reduced_cost(col, y);
            double score = 0.0;
            if (vstat_[col] == VStat::AtLower) {
                if (d < -dtol) score = -d;
            } else if (vstat_[col] == VStat::AtUpper) {
                if (d > dtol) score = d;
            } else { // FreeZero
                if (std::fabs(d) > dtol) score = std::fabs(d);
            }
            if (score > best_score) {
                best_score = score;
                q = col;
                if (bland) break;
            }
        }
        if (q < 0) return SimplexTerm::Optimal;

        const double dq = reduced_cost(q, y);
        const double sigma = (vstat_[q] == VStat::AtUpper)   ? -1.0
                             : (vstat_[q] == VStat::AtLower) ? 1.0
                                                             : (dq < 0.0 ? 1.0 : -1.0);
        load_column(q, t);
        ftran(t);

        // two-pass ratio test: find the tightest step, then take the largest
        // pivot inside a small relative window around it
        auto theta_of = [&](int i, bool& ok) -> double {
            ok = false;
            const double rate = -sigma * t[i];
            if (std::fabs(rate) <= kPivTol) return kInfD;
            const int bcol = basic_[i];
            double theta;
            if (rate > 0.0) {
                if (up_[bcol] >= kInfD) return kInfD;
                theta = (up_[bcol] - xB_[i]) / rate;
            } else {
                if (lo_[bcol] <= -kInfD) return kInfD;
                theta = (lo_[bcol] - xB_[i]) / rate;
            }
            ok = true;
            return theta < 0.0 ? 0.0 : theta;
        };
        double theta_min = kInfD;
        for (int i = 0; i < m; ++i) {
            bool ok;
            const double theta = theta_of(i, ok);
            if (ok && theta < theta_min) theta_min = theta;
        }
        double theta_best = kInfD;
        int r_best = -1;
        double piv_best = 0.0;
        if (theta_min < kInfD) {
            const double window = theta_min + 1e-7 * (1.0 + theta_min);
            for (int i = 0; i < m; ++i) {
                bool ok;
                const double theta = theta_of(i, ok);
                if (!ok || theta > window) continue;
                if (std::fabs(t[i]) > piv_best) {
                    piv_best = std::fabs(t[i]);
                    r_best = i;
                    theta_best = theta;
                }
            }
        }
        const double theta_own =
            (lo_[q] > -kInfD && up_[q] < kInfD) ? (up_[q] - lo_[q]) : kInfD;

        if (theta_best >= kInfD && theta_own >= kInfD) {
            build_ray(q, sigma, t);
            return SimplexTerm::Unbounded;
        }

        ++total_iters_;
        double obj_delta;
        if (theta_own <= theta_best) {
            for (int i = 0; i < m; ++i) xB_[i] -= sigma * theta_own * t[i];
            vstat_[q] = (sigma > 0.0) ? VStat::AtUpper : VStat::AtLower;
            obj_delta = sigma * theta_own * dq;
        } else {
            const double theta = theta_best;
            const int r = r_best;
            for (int i = 0; i < m; ++i)
                if (i != r) xB_[i] -= sigma * theta * t[i];
            const int leaving = basic_[r];
            const double rate_r = -sigma * t[r];
            vstat_[leaving] = rate_r > 0.0 ? VStat::AtUpper : VStat::AtLower;
            pos_of_col_[leaving] = -1;
            xB_[r] = nonbasic_value(q) + sigma * theta;
            basic_[r] = q;
            pos_of_col_[q] = r;
            vstat_[q] = VStat::Basic;
            push_eta(r, t);
            obj_delta = sigma * theta * dq;
            if (static_cast<int>(etas_.size()) > kEtaRefactor && refactorize())
                return SimplexTerm::Repaired; // needs a dual pass before more pricing
        }

        last_obj += obj_delta;
        if (std::fabs(obj_delta) <= 1e-13 * (1.0 + std::fabs(last_obj))) {
            if (++stall > 400) bland = true;
        } else {
            stall = 0;
            bland = false;
        }
    }
    return SimplexTerm::IterLimit;
}

SimplexTerm BoundedSimplex::dual_loop(long iter_cap) {
    const int m = static_cast<int>(basic_.size());
    std::vector<double> y(m), rho(m), t(m);
    long stall = 0;

    for (long it = 0; it < iter_cap; ++it) {
        int r = -1;
        double worst = kFeasTol;
        bool below = true;
        for (int i = 0; i < m; ++i) {
            const int bcol = basic_[i];
            const double scale = 1.0 + std::fabs(xB_[i]);
            const double under = lo_[bcol] - xB_[i];
            const double over = xB_[i] - up_[bcol];
            if (under > worst * scale) {
                if (stall <= 400 || r < 0) { worst = under / scale; r = i; below = true; }
            } else if (over > worst * scale) {
                if (stall <= 400 || r < 0) { worst = over / scale; r = i; below = false; }
            }
            if (stall > 400 && r >= 0) break; // Bland-ish: first violated row
        }
        if (r < 0) return SimplexTerm::Optimal;

        const double sigma = below ? 1.0 : -1.0;
        const double target = below ? lo_[basic_[r]] : up_[basic_[r]];

        std::fill(rho.begin(), rho.end(), 0.0);
        rho[r] = 1.0;
        btran(rho);
        compute_duals(y);

        // entering column: prefer solid pivot magnitudes, fall back to the
        // bare tolerance only when nothing better exists
        int q = -1;
        for (const double alpha_floor : {1e-7, kPivTol}) {
            double best_ratio = kInfD;
            double best_alpha = 0.0;
            for (int col = 0; col < num_cols(); ++col) {
                if (vstat_[col] == VStat::Basic || lo_[col] == up_[col]) continue;
                if (is_artificial(col)) continue;
                double alpha = 0.0;
                for_col_entries(col, [&](int rr, double v) { alpha += rho[rr] * v; });
                if (std::fabs(alpha) <= alpha_floor) continue;
                double ratio;
                if (vstat_[col] == VStat::AtLower) {
                    if (alpha * sigma >= 0.0) continue;
                    ratio = std::max(reduced_cost(col, y), 0.0) / std::fabs(alpha);
                } else if (vstat_[col] == VStat::AtUpper) {
                    if (alpha * sigma <= 0.0) continue;
                    ratio = std::max(-reduced_cost(col, y), 0.0) / std::fabs(alpha);
                } else { // free nonbasic must enter immediately
                    ratio = 0.0;
                }
                if (ratio < best_ratio - 1e-12 ||
                    (ratio <= best_ratio + 1e-12 && std::fabs(alpha) > std::fabs(best_alpha))) {
                    best_ratio = ratio;
                    best_alpha = alpha;
                    q = col;
                }
            }
            if (q >= 0) break;
        }
        if (q < 0) return SimplexTerm::Infeasible;

        load_column(q, t);
        ftran(t);
        if (std::fabs(t[r]) < 0.5 * kPivTol) {
            refactorize(); // numerical disagreement with rho; retry after refresh
            continue;
        }

        ++total_iters_;
        const double delta = target - xB_[r];
        const double dq = delta / (-t[r]);
        for (int i = 0; i < m; ++i)
            if (i != r) xB_[i] -= dq * t[i];
        const int leaving = basic_[r];
        vstat_[leaving] = below ? VStat::AtLower : VStat::AtUpper;
        pos_of_col_[leaving] = -1;
        xB_[r] = nonbasic_value(q) + dq;
        basic_[r] = q;
        pos_of_col_[q] = r;
        vstat_[q] = VStat::Basic;
        push_eta(r, t);
        if (static_cast<int>(etas_.size()) > kEtaRefactor) refactorize();
        if (std::fabs(dq) <= 1e-13) ++stall; else stall = 0;
    }
    return SimplexTerm::IterLimit;
}

SimplexTerm BoundedSimplex::primal_with_repair(long iter_cap) {
    for (int guard = 0; guard < 16; ++guard) {
        const SimplexTerm t = primal_loop(iter_cap);
        if (t != SimplexTerm::Repaired) return t;
        const SimplexTerm d = dual_loop(iter_cap);
        if (d != SimplexTerm::Optimal) return d;
    }
    return SimplexTerm::IterLimit;
}

SimplexTerm BoundedSimplex::solve_from_scratch(long iter_cap) {
    solved_ = true;
    crash_basis();
    bool any_art = false;
    for (int r = 0; r < num_rows(); ++r)
        if (is_artificial(basic_[r])) { any_art = true; break; }

    if (any_art) {
        phase1_ = true;
        const SimplexTerm t1 = primal_with_repair(iter_cap);
        phase1_ = false;
        if (t1 == SimplexTerm::IterLimit) return SimplexTerm::IterLimit;
        double infeas = 0.0;
        for (int i = 0; i < static_cast<int>(basic_.size()); ++i)
            if (is_artificial(basic_[i])) infeas += std::fabs(xB_[i]);
        double bscale = 1.0;
        for (double b : rhs_) bscale = std::max(bscale, std::fabs(b));
        if (std::getenv("QFR_SIMPLEX_DEBUG"))
            std::fprintf(stderr, "[simplex] phase1 term=%d infeas=%.3e rows=%d iters=%ld\n",
                         static_cast<int>(t1), infeas, num_rows(), total_iters_);
        if (infeas > 1e-7 * bscale) return SimplexTerm::Infeasible;
        if (drive_out_artificials()) {
            const SimplexTerm d = dual_loop(iter_cap);
            if (d != SimplexTerm::Optimal) return d;
        }
        close_artificials();
    }
    return primal_with_repair(iter_cap);
}

SimplexTerm BoundedSimplex::reoptimize(long iter_cap) {
    if (!has_basis()) return solve_from_scratch(iter_cap);
    if (rows_in_basis_ != num_rows()) {
        extend_basis_with_pending();
        const SimplexTerm td = dual_loop(iter_cap);
        if (td != SimplexTerm::Optimal) return td;
    }
    return primal_with_repair(iter_cap);
}

void BoundedSimplex::extract_structural(std::vector<double>& x) const {
    x.assign(ns_, 0.0);
    for (int j = 0; j < ns_; ++j)
        x[j] = (vstat_[j] == VStat::Basic) ? xB_[pos_of_col_[j]] : nonbasic_value(j);
}

} // namespace qfr::detail
