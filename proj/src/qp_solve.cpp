#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include <Eigen/Dense>

#include "qfr/math_program.hpp"

namespace qfr {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct SparseRowD {
    std::vector<int> idx;
    std::vector<double> val;
    double rhs = 0.0;
};

double inf_norm(const VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Dense primal-dual interior point (Mehrotra predictor-corrector) for
//   min 1/2 x'Qx + c'x   s.t.  E x = f,  G x <= h
// followed by an active-set polish solve that pins the binding rows and
// recovers the KKT point to near machine precision.
class QpIpm {
public:
    int m = 0; // variables
    MatrixXd Q;
    VectorXd c;
    MatrixXd E; // p x m
    VectorXd f;
    std::vector<SparseRowD> G; // normalized <= rows
    VectorXd h;

    VectorXd x;        // solution
    double obj = 0.0;
    bool converged = false;
    double final_primal_resid = 0.0;
    double best_err = kInf; // scaled max(rp, rd, mu) of the kept iterate
    double init_scale = 1.0; // starting multiplier/slack magnitude

    void add_ineq(std::vector<int> idx, std::vector<double> val, double rhs) {
        double nrm = 1e-30;
        for (double v : val) nrm = std::max(nrm, std::fabs(v));
        const double inv = 1.0 / nrm;
        for (double& v : val) v *= inv;
        G.push_back(SparseRowD{std::move(idx), std::move(val), rhs * inv});
    }

    VectorXd mult_G(const VectorXd& v) const {
        VectorXd out(G.size());
        for (std::size_t r = 0; r < G.size(); ++r) {
            double a = 0.0;
            for (std::size_t k = 0; k < G[r].idx.size(); ++k) a += G[r].val[k] * v[G[r].idx[k]];
            out[static_cast<int>(r)] = a;
        }
        return out;
    }

    VectorXd mult_Gt(const VectorXd& v) const {
        VectorXd out = VectorXd::Zero(m);
        for (std::size_t r = 0; r < G.size(); ++r) {
            const double vr = v[static_cast<int>(r)];
            if (vr == 0.0) continue;
            for (std::size_t k = 0; k < G[r].idx.size(); ++k) out[G[r].idx[k]] += G[r].val[k] * vr;
        }
        return out;
    }

    void accumulate_H(MatrixXd& H, const VectorXd& w) const {
        for (std::size_t r = 0; r < G.size(); ++r) {
            const double wr = w[static_cast<int>(r)];
            const auto& row = G[r];
            for (std::size_t a = 0; a < row.idx.size(); ++a) {
                const double va = wr * row.val[a];
                for (std::size_t b = 0; b < row.idx.size(); ++b)
                    H(row.idx[a], row.idx[b]) += va * row.val[b];
            }
        }
    }

    bool solve() {
        const int p = static_cast<int>(E.rows());
        const int q = static_cast<int>(G.size());
        h.conservativeResize(q);

        if (q == 0) { // pure equality QP: one polish-style KKT solve
            x = VectorXd::Zero(m);
            return equality_solve();
        }

        // starting point
        {
            MatrixXd H0 = Q + MatrixXd::Identity(m, m);
            Eigen::LLT<MatrixXd> llt(H0);
            VectorXd x0;
            if (p > 0) {
                MatrixXd HiEt = llt.solve(E.transpose());
                MatrixXd S = E * HiEt;
                S.diagonal().array() += 1e-10;
                Eigen::LLT<MatrixXd> sllt(S);
                VectorXd rhs = E * llt.solve(-c) - f;
                VectorXd y0 = sllt.solve(rhs);
                x0 = llt.solve(-c - E.transpose() * y0);
            } else {
                x0 = llt.solve(-c);
            }
            x = x0;
        }
        VectorXd s_tilde = h - mult_G(x);
        VectorXd s(q), z(q);
        for (int i = 0; i < q; ++i) {
            s[i] = std::max(s_tilde[i], init_scale);
            z[i] = init_scale;
        }
        VectorXd y = VectorXd::Zero(p);

        const double scale_p = 1.0 + std::max(inf_norm(h), p ? inf_norm(f) : 0.0);
        double delta = 1e-9;

        MatrixXd H(m, m);
        Eigen::LLT<MatrixXd> llt;
        Eigen::LLT<MatrixXd> sllt;
        MatrixXd HiEt;

        // best iterate by scaled worst-of(residuals, mu); the fallback when
        // the polish certificate fails
        VectorXd best_x = x, best_s = s, best_z = z, best_y = y;
        double mu_floor = kInf;
        int flat_iters = 0;

        for (int iter = 0; iter < 150; ++iter) {
            const VectorXd Gx = mult_G(x);
            const VectorXd rd = Q * x + c + (p ? VectorXd(E.transpose() * y) : VectorXd::Zero(m)) + mult_Gt(z);
            const VectorXd rp = p ? VectorXd(E * x - f) : VectorXd();
            const VectorXd rg = Gx + s - h;
            const double mu = s.dot(z) / q;
            final_primal_resid = std::max(p ? inf_norm(rp) : 0.0, inf_norm(rg));

            const double obj_now = 0.5 * x.dot(Q * x) + c.dot(x);
            const double scale_d = 1.0 + inf_norm(c) + inf_norm(Q * x);
            const double err = std::max({final_primal_resid / scale_p, inf_norm(rd) / scale_d,
                                         mu / (1.0 + std::fabs(obj_now))});
            if (std::isfinite(err) && err < best_err) {
                best_err = err;
                best_x = x; best_s = s; best_z = z; best_y = y;
            }
            if (mu < 0.9 * mu_floor) {
                mu_floor = mu;
                flat_iters = 0;
            } else {
                ++flat_iters;
            }
            if (std::getenv("QFR_IPM_DEBUG"))
                std::fprintf(stderr, "[ipm] it=%d mu=%.3e rp=%.3e rd=%.3e obj=%.6e\n", iter, mu,
                             final_primal_resid, inf_norm(rd), obj_now);
            if (err <= 1e-10) { converged = true; break; }
            // complementarity and primal feasibility are the interior point's
            // job; the polish step supplies the remaining dual accuracy
            if (mu <= 1e-12 * (1.0 + std::fabs(obj_now)) &&
                final_primal_resid <= 1e-9 * scale_p)
                break;
            if (flat_iters >= 12) break;
            if (!std::isfinite(mu) || mu > 1e14) break;

            VectorXd w = z.cwiseQuotient(s);
            bool factored = false;
            for (int attempt = 0; attempt < 6 && !factored; ++attempt) {
                H = Q;
                H.diagonal().array() += delta;
                accumulate_H(H, w);
                llt.compute(H);
                if (llt.info() == Eigen::Success) factored = true;
                else delta *= 100.0;
            }
            if (!factored) break;
            if (p > 0) {
                HiEt = llt.solve(E.transpose());
                MatrixXd S = E * HiEt;
                S.diagonal().array() += 1e-11;
                sllt.compute(S);
                if (sllt.info() != Eigen::Success) break;
            }

            auto kkt_solve = [&](const VectorXd& F4, VectorXd& dx, VectorXd& dy, VectorXd& ds,
                                 VectorXd& dz) {
                const VectorXd tmp = (z.cwiseProduct(rg) - F4).cwiseQuotient(s);
                const VectorXd rx = -rd - mult_Gt(tmp);
                // reduced system  H dx + E' dy = rx,  E dx = -rp, with one
                // round of iterative refinement against the same H
                auto reduced_solve = [&](const VectorXd& r1, const VectorXd& r2in, VectorXd& ox,
                                         VectorXd& oy) {
                    if (p > 0) {
                        const VectorXd Hi_r1 = llt.solve(r1);
                        oy = sllt.solve(E * Hi_r1 - r2in);
                        ox = llt.solve(r1 - E.transpose() * oy);
                    } else {
                        oy.resize(0);
                        ox = llt.solve(r1);
                    }
                };
                auto apply_H = [&](const VectorXd& v) {
                    VectorXd out = Q * v + delta * v;
                    VectorXd gv = mult_G(v);
                    out += mult_Gt(VectorXd(w.cwiseProduct(gv)));
                    return out;
                };
                const VectorXd r2 = p > 0 ? VectorXd(-rp) : VectorXd();
                reduced_solve(rx, r2, dx, dy);
                VectorXd res1 = rx - apply_H(dx);
                if (p > 0) res1 -= E.transpose() * dy;
                const VectorXd res2 = p > 0 ? VectorXd(r2 - E * dx) : VectorXd();
                VectorXd cx, cy;
                reduced_solve(res1, res2, cx, cy);
                dx += cx;
                if (p > 0) dy += cy;
                ds = -rg - mult_G(dx);
                dz = (-F4 - z.cwiseProduct(ds)).cwiseQuotient(s);
            };

            auto max_step = [](const VectorXd& v, const VectorXd& dv) {
                double a = 1.0;
                for (int i = 0; i < v.size(); ++i)
                    if (dv[i] < 0.0) a = std::min(a, -v[i] / dv[i]);
                return a;
            };

            VectorXd dx, dy, ds, dz;
            kkt_solve(s.cwiseProduct(z), dx, dy, ds, dz); // affine
            const double ap_aff = max_step(s, ds);
            const double ad_aff = max_step(z, dz);
            const double mu_aff = (s + ap_aff * ds).dot(z + ad_aff * dz) / q;
            const double sigma = std::pow(std::max(mu_aff, 0.0) / mu, 3.0);

            VectorXd F4 = s.cwiseProduct(z) + ds.cwiseProduct(dz);
            F4.array() -= sigma * mu;
            kkt_solve(F4, dx, dy, ds, dz);

            // one common step length: the QP dual residual couples x and
            // (y, z) through Qx, so split steps would leave it uncancelled
            const double eta = (mu < 1e-6) ? 0.9999 : 0.995;
            const double alpha =
                std::min(1.0, eta * std::min(max_step(s, ds), max_step(z, dz)));
            x += alpha * dx;
            s += alpha * ds;
            if (p > 0) y += alpha * dy;
            z += alpha * dz;
        }

        // polish from the final iterate (sharpest complementarity split);
        // retry from the best tracked iterate before falling back to it
        bool polished = polish(s, z);
        if (!polished) {
            x = best_x;
            polished = polish(best_s, best_z);
        }
        if (!polished) {
            x = best_x;
            // without a successful polish, only a tightly converged interior
            // point is acceptable on its own
            converged = converged || best_err <= 5e-8;
        } else {
            converged = true;
        }
        if (std::getenv("QFR_IPM_DEBUG"))
            std::fprintf(stderr, "[ipm] done polished=%d best_err=%.3e converged=%d\n",
                         polished ? 1 : 0, best_err, converged ? 1 : 0);
        obj = 0.5 * x.dot(Q * x) + c.dot(x);
        return converged;
    }

private:
    bool equality_solve() {
        const int p = static_cast<int>(E.rows());
        const int k = m + p;
        MatrixXd K = MatrixXd::Zero(k, k);
        K.topLeftCorner(m, m) = Q;
        K.topLeftCorner(m, m).diagonal().array() += 1e-11;
        if (p > 0) {
            K.block(0, m, m, p) = E.transpose();
            K.block(m, 0, p, m) = E;
            K.block(m, m, p, p).diagonal().array() -= 1e-11;
        }
        VectorXd rhs(k);
        rhs.head(m) = -c;
        if (p > 0) rhs.tail(p) = f;
        Eigen::PartialPivLU<MatrixXd> lu(K);
        VectorXd sol = lu.solve(rhs);
        sol += lu.solve(rhs - K * sol);
        x = sol.head(m);
        obj = 0.5 * x.dot(Q * x) + c.dot(x);
        converged = true;
        final_primal_resid = p ? inf_norm(E * x - f) : 0.0;
        return true;
    }

    // Pins the rows the interior point identified as active and re-solves the
    // KKT system directly, regularized toward the interior iterate so that
    // directions the pinned system leaves free (flat objective directions)
    // stay at the feasible interior value instead of collapsing. The polished
    // point is adopted only with a full KKT certificate (feasibility,
    // stationarity, multiplier signs), which for a convex QP proves global
    // optimality.
    bool polish(const VectorXd& s, const VectorXd& z) {
        const int p = static_cast<int>(E.rows());
        const int q = static_cast<int>(G.size());
        const bool dbg = std::getenv("QFR_IPM_DEBUG") != nullptr;
        std::vector<char> in_act(q, 0);
        for (int i = 0; i < q; ++i)
            if (s[i] < z[i] && s[i] <= 1e-6 * scale_h()) in_act[i] = 1;

        // Working-set refinement: the first pass mass-drops the interior
        // point's overestimate (rows pinned with negative multipliers), later
        // passes change one row at a time -- re-adding the most violated row
        // first, then dropping the most negative multiplier -- which keeps
        // the walk from oscillating. If it does not settle, the caller falls
        // back to the refined interior iterate.
        for (int pass = 0; pass < 32; ++pass) {
            std::vector<int> act;
            for (int i = 0; i < q; ++i)
                if (in_act[i]) act.push_back(i);
            const int a = static_cast<int>(act.size());
            const int k = m + p + a;
            if (k > 2600) return false; // keep the dense factorization bounded

            const double prox = 1e-9;
            MatrixXd K = MatrixXd::Zero(k, k);
            K.topLeftCorner(m, m) = Q;
            K.topLeftCorner(m, m).diagonal().array() += prox;
            if (p > 0) {
                K.block(0, m, m, p) = E.transpose();
                K.block(m, 0, p, m) = E;
            }
            for (int r = 0; r < a; ++r) {
                const auto& row = G[act[r]];
                for (std::size_t t = 0; t < row.idx.size(); ++t) {
                    K(row.idx[t], m + p + r) = row.val[t];
                    K(m + p + r, row.idx[t]) = row.val[t];
                }
            }
            K.bottomRightCorner(p + a, p + a).diagonal().array() -= 1e-11;

            VectorXd rhs(k);
            rhs.head(m) = -c + prox * x; // proximal center = interior iterate
            if (p > 0) rhs.segment(m, p) = f;
            for (int r = 0; r < a; ++r) rhs[m + p + r] = G[act[r]].rhs;

            Eigen::PartialPivLU<MatrixXd> lu(K);
            VectorXd sol = lu.solve(rhs);
            sol += lu.solve(rhs - K * sol); // one refinement pass

            const VectorXd xp = sol.head(m);
            if (!xp.allFinite()) return false;
            const VectorXd yp = p > 0 ? VectorXd(sol.segment(m, p)) : VectorXd();
            const VectorXd za = a > 0 ? VectorXd(sol.tail(a)) : VectorXd();

            const VectorXd slack = h - mult_G(xp);
            bool changed = false;
            const double sign_tol = 1e-7 * (1.0 + (a ? inf_norm(za) : 0.0));
            if (pass <= 1) {
                for (int r = 0; r < a; ++r)
                    if (za[r] < -sign_tol) {
                        in_act[act[r]] = 0;
                        changed = true;
                    }
            } else {
                int worst_add = -1, worst_drop = -1;
                double v_add = -1e-9 * scale_h(), v_drop = -sign_tol;
                for (int i = 0; i < q; ++i)
                    if (!in_act[i] && slack[i] < v_add) {
                        v_add = slack[i];
                        worst_add = i;
                    }
                for (int r = 0; r < a; ++r)
                    if (za[r] < v_drop) {
                        v_drop = za[r];
                        worst_drop = r;
                    }
                if (worst_add >= 0) {
                    in_act[worst_add] = 1;
                    changed = true;
                } else if (worst_drop >= 0) {
                    in_act[act[worst_drop]] = 0;
                    changed = true;
                }
            }
            if (changed) continue;

            // working set settled: certify the KKT point
            if (slack.size() && slack.minCoeff() < -1e-8 * scale_h()) {
                if (dbg) std::fprintf(stderr, "[polish] reject slack %.3e\n", slack.minCoeff());
                return false;
            }
            if (p > 0 && inf_norm(E * xp - f) > 1e-8 * (1.0 + inf_norm(f))) {
                if (dbg) std::fprintf(stderr, "[polish] reject eq resid\n");
                return false;
            }
            VectorXd zfull = VectorXd::Zero(q);
            for (int r = 0; r < a; ++r) zfull[act[r]] = std::max(za[r], 0.0);
            const VectorXd rd = Q * xp + c +
                                (p ? VectorXd(E.transpose() * yp) : VectorXd::Zero(m)) +
                                mult_Gt(zfull);
            const double scale_d = 1.0 + inf_norm(c) + inf_norm(Q * xp);
            if (inf_norm(rd) > 1e-7 * scale_d) {
                if (dbg) std::fprintf(stderr, "[polish] reject stationarity %.3e\n", inf_norm(rd));
                return false;
            }
            if (dbg) std::fprintf(stderr, "[polish] accepted (a=%d, pass=%d)\n", a, pass);
            x = xp;
            final_primal_resid = std::max(p ? inf_norm(E * xp - f) : 0.0,
                                          slack.size() ? std::max(0.0, -slack.minCoeff()) : 0.0);
            return true;
        }
        if (dbg) std::fprintf(stderr, "[polish] working set did not settle\n");
        return false;
    }

    double scale_h() const { return 1.0 + (h.size() ? h.cwiseAbs().maxCoeff() : 0.0); }
};

double scaled_violation(const ConstraintRow& row, const std::vector<double>& x) {
    double a = 0.0, nrm = 1.0;
    for (std::size_t k = 0; k < row.idx.size(); ++k) {
        a += row.val[k] * x[row.idx[k]];
        nrm = std::max(nrm, std::fabs(row.val[k]));
    }
    double v = 0.0;
    switch (row.sense) {
        case RowSense::LessEq: v = a - row.rhs; break;
        case RowSense::GreaterEq: v = row.rhs - a; break;
        case RowSense::Equal: v = std::fabs(a - row.rhs); break;
    }
    return v / nrm;
}

} // namespace

SolveResult solve_qp(const MathProgram& program, const SolveOptions& options) {
    if (!program.has_quadratic())
        throw DomainError("solve_qp requires a quadratic objective (use solve_lp)");
    const int m = program.num_vars();

    // assemble Q once; diagonal entries must be nonnegative, dense Q symmetric PSD
    MatrixXd Q = MatrixXd::Zero(m, m);
    if (!program.quad_dense().empty()) {
        if (static_cast<int>(program.quad_dense().size()) != m * m)
            throw DimensionError("dense quadratic size mismatch");
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                Q(i, j) = program.quad_dense()[static_cast<std::size_t>(i) * m + j];
        const double asym = (Q - Q.transpose()).cwiseAbs().maxCoeff();
        if (asym > 1e-9 * (1.0 + Q.cwiseAbs().maxCoeff()))
            throw DomainError("quadratic matrix must be symmetric");
        Q = 0.5 * (Q + Q.transpose());
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(Q, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-8 * (1.0 + Q.cwiseAbs().maxCoeff()))
            throw DomainError("quadratic matrix must be positive semidefinite");
    } else {
        for (int j = 0; j < m; ++j) {
            const double qd = program.quad_diag()[j];
            if (qd < 0.0) throw DomainError("diagonal quadratic entries must be >= 0");
            Q(j, j) = qd;
        }
    }

    const int nr = program.num_rows();
    std::vector<int> eq_rows, ineq_rows;
    for (int r = 0; r < nr; ++r)
        (program.rows()[r].sense == RowSense::Equal ? eq_rows : ineq_rows).push_back(r);

    std::vector<bool> included(nr, false);
    std::vector<int> working = eq_rows;
    if (static_cast<int>(ineq_rows.size()) <= 256) {
        working.insert(working.end(), ineq_rows.begin(), ineq_rows.end());
    } else {
        for (int r : options.seed_rows)
            if (r >= 0 && r < nr && program.rows()[r].sense != RowSense::Equal && !included[r]) {
                included[r] = true;
                working.push_back(r);
            }
    }
    for (int r : working) included[r] = true;

    SolveResult res;
    for (int round = 0; round < 128; ++round) {
        QpIpm ipm;
        ipm.m = m;
        ipm.Q = Q;
        ipm.c = VectorXd::Map(program.cost().data(), m);

        // equality rows (program equalities + pinned variables), working
        // inequality rows, and finite bounds
        int p = 0;
        for (int r : working)
            if (program.rows()[r].sense == RowSense::Equal) ++p;
        for (int j = 0; j < m; ++j)
            if (program.lower()[j] == program.upper()[j]) ++p;
        ipm.E = MatrixXd::Zero(p, m);
        ipm.f = VectorXd::Zero(p);
        int pe = 0;
        for (int r : working) {
            const auto& row = program.rows()[r];
            if (row.sense == RowSense::Equal) {
                double nrm = 1e-30;
                for (double v : row.val) nrm = std::max(nrm, std::fabs(v));
                for (std::size_t k = 0; k < row.idx.size(); ++k)
                    ipm.E(pe, row.idx[k]) = row.val[k] / nrm;
                ipm.f[pe] = row.rhs / nrm;
                ++pe;
            } else if (row.sense == RowSense::LessEq) {
                ipm.add_ineq(row.idx, row.val, row.rhs);
            } else {
                std::vector<double> neg = row.val;
                for (double& v : neg) v = -v;
                ipm.add_ineq(row.idx, std::move(neg), -row.rhs);
            }
        }
        for (int j = 0; j < m; ++j) {
            const double lo = program.lower()[j], up = program.upper()[j];
            if (lo == up) { // pinned variable becomes an equality row
                ipm.E(pe, j) = 1.0;
                ipm.f[pe] = lo;
                ++pe;
                continue;
            }
            if (up < kInf) ipm.add_ineq({j}, {1.0}, up);
            if (lo > -kInf) ipm.add_ineq({j}, {-1.0}, -lo);
        }
        ipm.h = VectorXd(ipm.G.size());
        for (std::size_t r = 0; r < ipm.G.size(); ++r) ipm.h[static_cast<int>(r)] = ipm.G[r].rhs;

        bool ok = false;
        for (const double scale : {1.0, 16.0, 0.0625}) { // retry from rescaled starts
            QpIpm attempt = ipm;
            attempt.init_scale = scale;
            ok = attempt.solve();
            if (ok || attempt.converged) {
                ipm = std::move(attempt);
                ok = true;
                break;
            }
            if (scale == 0.0625) ipm = std::move(attempt); // keep the last diagnostics
        }
        if (!ok) {
            res.status = (ipm.final_primal_resid > 1e-5) ? SolveStatus::Infeasible
                                                         : SolveStatus::IterationLimit;
            res.iterations = round + 1;
            return res;
        }

        std::vector<double> x(ipm.x.data(), ipm.x.data() + m);
        // enlarge the working set with excluded rows the solution violates
        std::vector<std::pair<double, int>> cand;
        for (int r : ineq_rows) {
            if (included[r]) continue;
            const double v = scaled_violation(program.rows()[r], x);
            if (v > 0.5 * options.feasibility_tol) cand.emplace_back(-v, r);
        }
        if (cand.empty()) {
            res.status = SolveStatus::Optimal;
            res.x = std::move(x);
            res.objective = program.objective_value(res.x);
            res.max_constraint_violation = program.max_violation(res.x);
            res.iterations = round + 1;
            for (int r : ineq_rows) {
                if (!included[r]) continue;
                const auto& row = program.rows()[r];
                double a = 0.0, nrm = 1.0;
                for (std::size_t k = 0; k < row.idx.size(); ++k) {
                    a += row.val[k] * res.x[row.idx[k]];
                    nrm = std::max(nrm, std::fabs(row.val[k]));
                }
                if (std::fabs(a - row.rhs) <= 10.0 * options.feasibility_tol * nrm)
                    res.active_rows.push_back(r);
            }
            return res;
        }
        std::sort(cand.begin(), cand.end());
        for (std::size_t k = 0; k < cand.size() && k < 2048; ++k) {
            included[cand[k].second] = true;
            working.push_back(cand[k].second);
        }
    }
    res.status = SolveStatus::IterationLimit;
    return res;
}

} // namespace qfr
