#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace hillgap::rk {

struct StepStats {
    long accepted = 0;
    long rejected = 0;
    double h_last = 0;
};

/// Adaptive Dormand-Prince 5(4) integration of y' = f(x, y) from x0 to x1
/// (either direction). Mixed absolute/relative error control with sc_i =
/// tol + tol*|y_i|. Throws on step-size underflow or non-finite states that
/// persist after step reduction.
///
/// `f(x, y, dydx)` fills dydx. `h_init` <= 0 picks a heuristic first step;
/// on return stats.h_last carries the step to seed a continuation call.
template <std::size_t N, class RHS>
void dopri5(RHS&& f, double x0, double x1, std::array<double, N>& y, double tol,
            StepStats* stats = nullptr, double h_init = 0.0) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    // b - b_hat (embedded 4th-order error weights)
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    const double span = x1 - x0;
    if (span == 0.0) return;
    const double dir = span > 0 ? 1.0 : -1.0;

    double x = x0;
    std::array<double, N> k1, k2, k3, k4, k5, k6, k7, yt, ynew;
    f(x, y, k1);

    double h = h_init != 0.0 ? std::abs(h_init) : 0.0;
    if (h == 0.0) {
        double ny = 0, nf = 0;
        for (std::size_t i = 0; i < N; ++i) {
            ny += y[i] * y[i];
            nf += k1[i] * k1[i];
        }
        h = nf > 0 ? 0.01 * std::sqrt((ny + 1e-30) / nf) : 0.01 * std::abs(span);
        h = std::min(h, std::abs(span));
        h = std::max(h, 1e-10 * std::abs(span));
    }
    h = std::min(h, std::abs(span));

    long guard = 0;
    bool fsal_valid = true;
    while (dir * (x1 - x) > 0) {
        if (++guard > 100000000L)
            throw std::runtime_error("dopri5: step limit exceeded at x=" + std::to_string(x));
        const double hmin = 16.0 * 2.220446049250313e-16 * std::max(std::abs(x), 1.0);
        if (h < hmin)
            throw std::runtime_error("dopri5: step size underflow at x=" + std::to_string(x));
        if (h > dir * (x1 - x)) h = dir * (x1 - x);
        const double hs = dir * h;

        if (!fsal_valid) f(x, y, k1);
        for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + hs * a21 * k1[i];
        f(x + c2 * hs, yt, k2);
        for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
        f(x + c3 * hs, yt, k3);
        for (std::size_t i = 0; i < N; ++i)
            yt[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        f(x + c4 * hs, yt, k4);
        for (std::size_t i = 0; i < N; ++i)
            yt[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        f(x + c5 * hs, yt, k5);
        for (std::size_t i = 0; i < N; ++i)
            yt[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        f(x + hs, yt, k6);
        for (std::size_t i = 0; i < N; ++i)
            ynew[i] = y[i] + hs * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        f(x + hs, ynew, k7);

        double err = 0;
        bool finite = true;
        for (std::size_t i = 0; i < N; ++i) {
            const double ei = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                    e6 * k6[i] + e7 * k7[i]);
            const double sc = tol + tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            err += (ei / sc) * (ei / sc);
            if (!std::isfinite(ynew[i])) finite = false;
        }
        err = std::sqrt(err / N);

        if (!finite) {
            // try a smaller step before giving up
            h *= 0.25;
            fsal_valid = false;
            if (stats) ++stats->rejected;
            if (h < hmin)
                throw std::runtime_error("dopri5: non-finite state at x=" + std::to_string(x));
            continue;
        }

        if (err <= 1.0) {
            x += hs;
            y = ynew;
            k1 = k7;  // FSAL
            fsal_valid = true;
            if (stats) ++stats->accepted;
            const double fac = err > 0 ? 0.9 * std::pow(err, -0.2) : 5.0;
            h *= std::min(5.0, std::max(0.2, fac));
        } else {
            fsal_valid = false;
            if (stats) ++stats->rejected;
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
        }
    }
    if (stats) stats->h_last = h;
}

}  // namespace hillgap::rk
