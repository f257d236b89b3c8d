#pragma once

#include <cstdint>
#include <functional>

namespace qfr {

/// Standard normal density.
double norm_pdf(double x);

/// Standard normal CDF via erfc (full double precision).
double norm_cdf(double x);

/// Inverse standard normal CDF, Wichura's AS 241 (PPND16) rational
/// approximations; relative error below 1e-15 on (0,1).
double norm_inv_cdf(double p);

/// Adaptive Gauss-Kronrod (G7,K15) quadrature on [a,b] to absolute
/// tolerance abs_tol. Recursion splits the interval where the K15-G7
/// error estimate is too large.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-10, int max_depth = 48);

/// Brent root bracketing solve of f on [a,b]; f(a), f(b) must differ in sign.
double brent_root(const std::function<double(double)>& f, double a, double b,
                  double x_tol = 1e-12, int max_iter = 200);

/// xoshiro256++ with splitmix64 seeding. Deterministic, cheap to fork by
/// seed, and normals are produced by inverse-CDF so streams are defined by
/// the uniform sequence alone.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();
    /// Uniform draw in the open interval (0,1).
    double uniform01();
    double uniform(double lo, double hi);
    double normal(double sd);
    /// |N(0, sd^2)|.
    double half_normal(double sd);

private:
    std::uint64_t s_[4];
};

} // namespace qfr
