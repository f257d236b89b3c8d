#pragma once

// Brute-force optima for small programs, kept independent of the production
// solver path: LP optima by enumerating basic (vertex) solutions, QP optima
// by enumerating active sets and solving the KKT systems directly.

#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "qfr/math_program.hpp"

namespace oracle {

struct Facet {
    std::vector<int> idx;
    std::vector<double> val;
    double rhs;
    bool mandatory; // equality rows
};

inline std::vector<Facet> collect_facets(const qfr::MathProgram& p) {
    std::vector<Facet> facets;
    for (const auto& row : p.rows())
        facets.push_back(Facet{row.idx, row.val, row.rhs, row.sense == qfr::RowSense::Equal});
    for (int j = 0; j < p.num_vars(); ++j) {
        if (p.lower()[j] > -qfr::kInf)
            facets.push_back(Facet{{j}, {1.0}, p.lower()[j], false});
        if (p.upper()[j] < qfr::kInf)
            facets.push_back(Facet{{j}, {1.0}, p.upper()[j], false});
    }
    return facets;
}

inline bool point_feasible(const qfr::MathProgram& p, const std::vector<double>& x,
                           double tol = 1e-7) {
    return p.max_violation(x) <= tol;
}

/// Minimum objective over all vertices (basic solutions). The program must be
/// feasible and bounded with a vertex optimum for the value to be meaningful.
inline std::optional<double> lp_vertex_enum(const qfr::MathProgram& p) {
    const int nv = p.num_vars();
    const auto facets = collect_facets(p);
    const int nf = static_cast<int>(facets.size());
    std::vector<int> pick;
    std::optional<double> best;

    std::vector<int> mandatory;
    for (int i = 0; i < nf; ++i)
        if (facets[i].mandatory) mandatory.push_back(i);
    const int need = nv - static_cast<int>(mandatory.size());
    if (need < 0) return std::nullopt;

    std::vector<int> optional_ids;
    for (int i = 0; i < nf; ++i)
        if (!facets[i].mandatory) optional_ids.push_back(i);

    std::vector<int> chosen(mandatory);
    std::function<void(std::size_t, int)> rec = [&](std::size_t from, int left) {
        if (left == 0) {
            Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nv, nv);
            Eigen::VectorXd b(nv);
            for (int r = 0; r < nv; ++r) {
                const auto& f = facets[chosen[r]];
                for (std::size_t k = 0; k < f.idx.size(); ++k) A(r, f.idx[k]) = f.val[k];
                b[r] = f.rhs;
            }
            Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
            if (!lu.isInvertible()) return;
            const Eigen::VectorXd xv = lu.solve(b);
            std::vector<double> x(xv.data(), xv.data() + nv);
            if (!point_feasible(p, x)) return;
            const double obj = p.objective_value(x);
            if (!best || obj < *best) best = obj;
            return;
        }
        for (std::size_t i = from; i + left <= optional_ids.size(); ++i) {
            chosen.push_back(optional_ids[i]);
            rec(i + 1, left - 1);
            chosen.pop_back();
        }
    };
    rec(0, need);
    return best;
}

/// Strictly convex QP optimum by active-set enumeration: for every subset of
/// inequality rows (equalities always active), minimize subject to the subset
/// as equalities; feasible candidates are feasible points, and the subset
/// realized by the true solution reproduces it exactly.
inline std::optional<double> qp_active_set_enum(const qfr::MathProgram& p) {
    const int nv = p.num_vars();
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(nv, nv);
    if (!p.quad_dense().empty()) {
        for (int i = 0; i < nv; ++i)
            for (int j = 0; j < nv; ++j)
                Q(i, j) = p.quad_dense()[static_cast<std::size_t>(i) * nv + j];
    } else {
        for (int j = 0; j < nv; ++j) Q(j, j) = p.quad_diag().empty() ? 0.0 : p.quad_diag()[j];
    }
    const Eigen::VectorXd c = Eigen::VectorXd::Map(p.cost().data(), nv);

    const auto facets = collect_facets(p);
    const int nf = static_cast<int>(facets.size());
    std::vector<int> opt_ids, mand_ids;
    for (int i = 0; i < nf; ++i) (facets[i].mandatory ? mand_ids : opt_ids).push_back(i);
    if (opt_ids.size() > 22) return std::nullopt; // enumeration guard

    std::optional<double> best;
    const std::uint64_t subsets = 1ULL << opt_ids.size();
    for (std::uint64_t mask = 0; mask < subsets; ++mask) {
        std::vector<int> act(mand_ids);
        for (std::size_t k = 0; k < opt_ids.size(); ++k)
            if (mask & (1ULL << k)) act.push_back(opt_ids[k]);
        const int na = static_cast<int>(act.size());
        if (na > nv) continue;
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nv + na, nv + na);
        K.topLeftCorner(nv, nv) = Q;
        Eigen::VectorXd rhs(nv + na);
        rhs.head(nv) = -c;
        for (int r = 0; r < na; ++r) {
            const auto& f = facets[act[r]];
            for (std::size_t k = 0; k < f.idx.size(); ++k) {
                K(f.idx[k], nv + r) = f.val[k];
                K(nv + r, f.idx[k]) = f.val[k];
            }
            rhs[nv + r] = f.rhs;
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
        if (!lu.isInvertible()) continue;
        const Eigen::VectorXd sol = lu.solve(rhs);
        std::vector<double> x(sol.data(), sol.data() + nv);
        if (!point_feasible(p, x)) continue;
        const double obj = p.objective_value(x);
        if (!best || obj < *best) best = obj;
    }
    return best;
}

} // namespace oracle
