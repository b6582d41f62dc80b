#pragma once

// Test-only reference propagation: classical fixed-step RK4 on the
// quasi-derivative system. Deliberately independent of the library's
// adaptive integrator so it can serve as an oracle for it.

#include <array>
#include <cmath>

#include "hillgap/coefficients.hpp"
#include "hillgap/mat2.hpp"

namespace testref {

using hillgap::Mat2;
using hillgap::coefficients::CoefficientModel;

inline std::array<double, 2> rk4_propagate(const CoefficientModel& m, double lambda,
                                           std::array<double, 2> y, double x0, double x1,
                                           int n_steps) {
    const double h = (x1 - x0) / n_steps;
    auto f = [&](double x, const std::array<double, 2>& s) -> std::array<double, 2> {
        return {m.inv_p(x) * s[1], (m.q(x) - lambda * m.r(x)) * s[0]};
    };
    double x = x0;
    for (int i = 0; i < n_steps; ++i) {
        const auto k1 = f(x, y);
        const auto k2 = f(x + 0.5 * h, {y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]});
        const auto k3 = f(x + 0.5 * h, {y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]});
        const auto k4 = f(x + h, {y[0] + h * k3[0], y[1] + h * k3[1]});
        y[0] += h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
        y[1] += h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
        x += h;
    }
    return y;
}

inline Mat2 rk4_transfer(const CoefficientModel& m, double lambda, double x0, double x1,
                         int n_steps) {
    const auto c1 = rk4_propagate(m, lambda, {1, 0}, x0, x1, n_steps);
    const auto c2 = rk4_propagate(m, lambda, {0, 1}, x0, x1, n_steps);
    return Mat2{c1[0], c2[0], c1[1], c2[1]};
}

inline double rk4_discriminant(const CoefficientModel& m, double lambda, int n_steps = 4096) {
    return rk4_transfer(m, lambda, m.a, m.a + *m.period, n_steps).trace();
}

// Richardson pair: discriminant at n and 2n steps; the difference bounds the
// discretization error of the coarser run.
inline std::array<double, 2> rk4_discriminant_pair(const CoefficientModel& m, double lambda,
                                                   int n_steps = 4096) {
    return {rk4_discriminant(m, lambda, n_steps), rk4_discriminant(m, lambda, 2 * n_steps)};
}

// Bisection for D(lambda) = target on a bracket, using the RK4 discriminant
// with enough steps that the result is trustworthy to ~1e-10.
inline double rk4_edge_bisect(const CoefficientModel& m, double target, double lo, double hi,
                              int n_steps = 8192) {
    double flo = rk4_discriminant(m, lo, n_steps) - target;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double f = rk4_discriminant(m, mid, n_steps) - target;
        if ((f < 0) == (flo < 0)) {
            lo = mid;
            flo = f;
        } else {
            hi = mid;
        }
        if (hi - lo < 1e-12 * std::max(1.0, std::abs(mid))) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace testref
