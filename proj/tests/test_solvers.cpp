#include <cmath>
#include <cstring>

#include "doctest.h"
#include "oracles/enumeration.hpp"
#include "qfr/math_program.hpp"
#include "qfr/stats.hpp"

using namespace qfr;

namespace {

// feasible-by-construction random LP: box bounds keep it bounded, and the
// all-ones point is arranged to satisfy every row
MathProgram random_lp(Rng& rng, int nv, int nrows) {
    MathProgram p;
    for (int j = 0; j < nv; ++j) p.add_variable(0.0, 10.0, rng.uniform(-1.0, 1.0));
    for (int r = 0; r < nrows; ++r) {
        std::vector<int> idx;
        std::vector<double> val;
        for (int j = 0; j < nv; ++j) {
            if (rng.uniform01() < 0.7) {
                idx.push_back(j);
                val.push_back(rng.uniform(-1.0, 1.0));
            }
        }
        if (idx.empty()) {
            idx.push_back(static_cast<int>(rng.next_u64() % nv));
            val.push_back(1.0);
        }
        double act = 0.0;
        for (double v : val) act += v;
        const bool geq = rng.uniform01() < 0.3;
        if (geq)
            p.add_row(idx, val, RowSense::GreaterEq, act - rng.uniform(0.0, 2.0));
        else
            p.add_row(idx, val, RowSense::LessEq, act + rng.uniform(0.0, 2.0));
    }
    return p;
}

MathProgram random_qp(Rng& rng, int nv, int nrows) {
    MathProgram p;
    for (int j = 0; j < nv; ++j) p.add_variable(-kInf, kInf, rng.uniform(-2.0, 2.0));
    // PSD via A'A plus a diagonal bump
    std::vector<double> q(static_cast<std::size_t>(nv) * nv, 0.0);
    std::vector<double> a(static_cast<std::size_t>(nv) * nv);
    for (auto& v : a) v = rng.uniform(-1.0, 1.0);
    for (int i = 0; i < nv; ++i)
        for (int j = 0; j < nv; ++j) {
            double s = 0.0;
            for (int k = 0; k < nv; ++k)
                s += a[static_cast<std::size_t>(k) * nv + i] * a[static_cast<std::size_t>(k) * nv + j];
            q[static_cast<std::size_t>(i) * nv + j] = s + (i == j ? 0.5 : 0.0);
        }
    p.set_quadratic_dense(std::move(q));
    for (int r = 0; r < nrows; ++r) {
        std::vector<int> idx;
        std::vector<double> val;
        for (int j = 0; j < nv; ++j)
            if (rng.uniform01() < 0.8) {
                idx.push_back(j);
                val.push_back(rng.uniform(-1.0, 1.0));
            }
        if (idx.empty()) continue;
        // rhs > 0 keeps the origin feasible
        p.add_row(idx, val, RowSense::LessEq, rng.uniform(0.1, 1.5));
    }
    return p;
}

} // namespace

TEST_CASE("lp single active bound") {
    MathProgram p;
    p.add_variable(0.0, kInf, -1.0);
    p.add_row({0}, {1.0}, RowSense::LessEq, 5.0);
    const SolveResult r = solve_lp(p);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.x[0] == doctest::Approx(5.0).epsilon(1e-9));
    CHECK(r.objective == doctest::Approx(-5.0).epsilon(1e-9));
    CHECK(r.max_constraint_violation <= 1e-7);
}

TEST_CASE("lp infeasible rows are reported by status") {
    MathProgram p;
    p.add_variable(-kInf, kInf, 0.0);
    p.add_row({0}, {1.0}, RowSense::GreaterEq, 1.0);
    p.add_row({0}, {1.0}, RowSense::LessEq, 0.0);
    CHECK(solve_lp(p).status == SolveStatus::Infeasible);
}

TEST_CASE("lp unbounded ray is reported by status") {
    MathProgram p;
    p.add_variable(0.0, kInf, -1.0);
    CHECK(solve_lp(p).status == SolveStatus::Unbounded);
}

TEST_CASE("lp equality with negative rhs goes through phase 1") {
    MathProgram p;
    p.add_variable(-kInf, kInf, 1.0);
    p.add_variable(0.0, kInf, 2.0);
    p.add_row({0, 1}, {1.0, 1.0}, RowSense::Equal, -3.0);
    const SolveResult r = solve_lp(p);
    REQUIRE(r.status == SolveStatus::Optimal);
    // x0 free with cost 1 and x0 = -3 - x1: objective = -3 + x1, so x1 = 0
    CHECK(r.objective == doctest::Approx(-3.0).epsilon(1e-9));
}

TEST_CASE("random lps match the vertex enumeration oracle") {
    Rng rng(123456789ULL);
    int checked = 0;
    for (int inst = 0; inst < 24; ++inst) {
        const int nv = 2 + static_cast<int>(rng.next_u64() % 4); // 2..5
        const int nr = 3 + static_cast<int>(rng.next_u64() % 6); // 3..8
        const MathProgram p = random_lp(rng, nv, nr);
        const auto expect = oracle::lp_vertex_enum(p);
        REQUIRE(expect.has_value());
        const SolveResult r = solve_lp(p);
        REQUIRE(r.status == SolveStatus::Optimal);
        CHECK(r.objective == doctest::Approx(*expect).epsilon(1e-6));
        CHECK(r.max_constraint_violation <= 1e-7);
        ++checked;
    }
    CHECK(checked == 24);
}

TEST_CASE("lazy row activation reaches the full-program optimum") {
    Rng rng(55ULL);
    const MathProgram p = random_lp(rng, 3, 300); // forces the lazy path
    const auto expect = oracle::lp_vertex_enum(p);
    REQUIRE(expect.has_value());
    const SolveResult r = solve_lp(p);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.objective == doctest::Approx(*expect).epsilon(1e-6));
    CHECK(r.max_constraint_violation <= 1e-7);
}

TEST_CASE("re-solving an identical lp is bitwise reproducible") {
    Rng rng(321ULL);
    const MathProgram p = random_lp(rng, 4, 6);
    const SolveResult a = solve_lp(p);
    const SolveResult b = solve_lp(p);
    REQUIRE(a.status == SolveStatus::Optimal);
    CHECK(a.status == b.status);
    CHECK(std::memcmp(&a.objective, &b.objective, sizeof(double)) == 0);
}

TEST_CASE("lp reoptimizer matches fresh solves across cost changes") {
    Rng rng(777ULL);
    const MathProgram base = random_lp(rng, 4, 40);
    LpReoptimizer reopt(base);
    for (int k = 0; k < 5; ++k) {
        std::vector<double> cost(4);
        for (auto& c : cost) c = rng.uniform(-1.0, 1.0);
        MathProgram fresh = base;
        for (int j = 0; j < 4; ++j) fresh.set_cost(j, cost[j]);
        const SolveResult a = reopt.solve_with_costs(cost);
        const SolveResult b = solve_lp(fresh);
        REQUIRE(a.status == SolveStatus::Optimal);
        REQUIRE(b.status == SolveStatus::Optimal);
        CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-8));
    }
}

TEST_CASE("qp projection onto a half line") {
    // min (x-3)^2 s.t. x <= 2, written as 1/2*2*x^2 - 6x (+9)
    MathProgram p;
    p.add_variable(-kInf, kInf, -6.0);
    p.set_quadratic_diag(0, 2.0);
    p.add_row({0}, {1.0}, RowSense::LessEq, 2.0);
    const SolveResult r = solve_qp(p);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.x[0] == doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("qp equality symmetry") {
    MathProgram p;
    p.add_variable(-kInf, kInf, 0.0);
    p.add_variable(-kInf, kInf, 0.0);
    p.set_quadratic_diag(0, 2.0);
    p.set_quadratic_diag(1, 2.0);
    p.add_row({0, 1}, {1.0, 1.0}, RowSense::Equal, 2.0);
    const SolveResult r = solve_qp(p);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("random strictly convex qps match active-set enumeration") {
    Rng rng(20240303ULL);
    for (int inst = 0; inst < 12; ++inst) {
        const int nv = 2 + static_cast<int>(rng.next_u64() % 3); // 2..4
        const int nr = 2 + static_cast<int>(rng.next_u64() % 4); // 2..5
        const MathProgram p = random_qp(rng, nv, nr);
        const auto expect = oracle::qp_active_set_enum(p);
        REQUIRE(expect.has_value());
        const SolveResult r = solve_qp(p);
        REQUIRE(r.status == SolveStatus::Optimal);
        CHECK(r.objective == doctest::Approx(*expect).epsilon(1e-6));
        CHECK(r.max_constraint_violation <= 1e-7);
    }
}

TEST_CASE("qp validates the quadratic term") {
    MathProgram p;
    p.add_variable(-kInf, kInf, 0.0);
    CHECK_THROWS_AS(solve_qp(p), DomainError); // no quadratic at all
    p.set_quadratic_diag(0, -1.0);
    CHECK_THROWS_AS(solve_qp(p), DomainError); // negative curvature
    MathProgram lp;
    lp.add_variable(0.0, 1.0, 1.0);
    lp.set_quadratic_diag(0, 1.0);
    CHECK_THROWS_AS(solve_lp(lp), DomainError); // lp with quadratic
}

TEST_CASE("qp with bounds and a pinned variable") {
    MathProgram p;
    p.add_variable(0.0, kInf, 0.0);  // x >= 0
    p.add_variable(2.0, 2.0, 0.0);   // pinned y = 2
    p.set_quadratic_diag(0, 2.0);
    p.set_quadratic_diag(1, 2.0);
    p.add_row({0, 1}, {1.0, 1.0}, RowSense::GreaterEq, 3.0); // x >= 1 effectively
    const SolveResult r = solve_qp(p);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(r.x[1] == doctest::Approx(2.0).epsilon(1e-9));
}
