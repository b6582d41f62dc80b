#include "hillgap/quadode.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hillgap/rk.hpp"

namespace hillgap::quadode {

double wronskian(const StateVector& s1, const StateVector& s2) {
    if (s1.x != s2.x)
        throw std::invalid_argument("wronskian: states live at different positions");
    return s1.u * s2.pu - s1.pu * s2.u;
}

namespace {

// Splits [x0, x1] (either direction) at declared breakpoints. Returns the
// ordered list of segment endpoints including x0 and x1.
std::vector<double> split_at_breakpoints(const CoefficientModel& m, double x0, double x1) {
    std::vector<double> pts{x0};
    const double lo = std::min(x0, x1), hi = std::max(x0, x1);
    std::vector<double> inner;
    for (double b : m.breakpoints)
        if (b > lo + 1e-14 && b < hi - 1e-14) inner.push_back(b);
    std::sort(inner.begin(), inner.end());
    if (x1 < x0) std::reverse(inner.begin(), inner.end());
    for (double b : inner) pts.push_back(b);
    pts.push_back(x1);
    return pts;
}

bool is_breakpoint(const CoefficientModel& m, double x) {
    for (double b : m.breakpoints)
        if (std::abs(b - x) < 1e-13 * std::max(1.0, std::abs(b))) return true;
    return false;
}

// Coefficient evaluation for one smooth segment. Coefficients are
// right-continuous at breakpoints, so an evaluation exactly at the segment's
// upper breakpoint must be nudged inside to pick up the segment's own values.
struct SegmentEval {
    const CoefficientModel* m;
    double seg_hi;
    bool nudge_hi;

    void triple(double x, double& inv_p, double& qv, double& rv) const {
        if (nudge_hi && x >= seg_hi) x = seg_hi - 1e-12 * (1.0 + std::abs(seg_hi));
        inv_p = m->inv_p(x);
        qv = m->q(x);
        rv = m->r(x);
        if (!(inv_p > 0.0) || !(rv > 0.0))
            throw std::runtime_error("propagate: 1/p and r must be positive (x=" +
                                     std::to_string(x) + ")");
    }

    void operator()(double x, double& inv_p, double& q_minus_lr, double lambda) const {
        double qv, rv;
        triple(x, inv_p, qv, rv);
        q_minus_lr = qv - lambda * rv;
    }
};

template <std::size_t N, class RHS>
void integrate_segments(const CoefficientModel& model, double lambda, double x0, double x1,
                        std::array<double, N>& y, double tol, RHS&& make_rhs) {
    const auto pts = split_at_breakpoints(model, x0, x1);
    double h_carry = 0.0;
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        const double lo = pts[i], hi = pts[i + 1];
        const double upper = (x1 >= x0) ? hi : lo;
        SegmentEval ev{&model, upper, is_breakpoint(model, upper)};
        rk::StepStats stats;
        dopri5<N>(make_rhs(ev, lambda), lo, hi, y, tol, &stats, h_carry);
        h_carry = stats.h_last;
    }
}

struct StateRhs {
    SegmentEval ev;
    double lambda;
    void operator()(double x, const std::array<double, 2>& y, std::array<double, 2>& dy) const {
        double ip, qlr;
        ev(x, ip, qlr, lambda);
        dy[0] = ip * y[1];
        dy[1] = qlr * y[0];
    }
};

struct MatrixRhs {
    SegmentEval ev;
    double lambda;
    void operator()(double x, const std::array<double, 4>& y, std::array<double, 4>& dy) const {
        double ip, qlr;
        ev(x, ip, qlr, lambda);
        dy[0] = ip * y[1];
        dy[1] = qlr * y[0];
        dy[2] = ip * y[3];
        dy[3] = qlr * y[2];
    }
};

}  // namespace

StateVector propagate_state(const CoefficientModel& model, double lambda,
                            const StateVector& from, double to_x, double tol) {
    if (!(tol > 0)) throw std::invalid_argument("propagate_state: tol must be positive");
    std::array<double, 2> y{from.u, from.pu};
    integrate_segments<2>(model, lambda, from.x, to_x, y, tol,
                          [](SegmentEval ev, double lam) { return StateRhs{ev, lam}; });
    return {y[0], y[1], to_x};
}

TransferMatrix transfer_matrix(const CoefficientModel& model, double lambda, double x0,
                               double x1, double tol) {
    std::array<double, 4> y{1, 0, 0, 1};  // columns (1,0) and (0,1)
    integrate_segments<4>(model, lambda, x0, x1, y, tol,
                          [](SegmentEval ev, double lam) { return MatrixRhs{ev, lam}; });
    return {Mat2{y[0], y[2], y[1], y[3]}, x0, x1, lambda};
}

std::vector<Mat2> fundamental_trace(const CoefficientModel& model, double lambda,
                                    const std::vector<double>& grid, double tol) {
    if (grid.empty()) return {};
    std::vector<Mat2> out;
    out.reserve(grid.size());
    std::array<double, 4> y{1, 0, 0, 1};
    out.push_back(Mat2::identity());
    for (size_t i = 0; i + 1 < grid.size(); ++i) {
        if (!(grid[i + 1] > grid[i]))
            throw std::invalid_argument("fundamental_trace: grid must be strictly ascending");
        integrate_segments<4>(model, lambda, grid[i], grid[i + 1], y, tol,
                              [](SegmentEval ev, double lam) { return MatrixRhs{ev, lam}; });
        out.push_back(Mat2{y[0], y[2], y[1], y[3]});
    }
    return out;
}

namespace {

// (re u, re pu, im u, im pu, running integral of |u|^2 r)
struct EnergyRhs {
    SegmentEval ev;
    double lambda;
    void operator()(double x, const std::array<double, 5>& y, std::array<double, 5>& dy) const {
        double ip, qv, rv;
        ev.triple(x, ip, qv, rv);
        const double qlr = qv - lambda * rv;
        dy[0] = ip * y[1];
        dy[1] = qlr * y[0];
        dy[2] = ip * y[3];
        dy[3] = qlr * y[2];
        dy[4] = (y[0] * y[0] + y[2] * y[2]) * rv;
    }
};

}  // namespace

std::vector<double> cell_integrals(const CoefficientModel& model, double lambda, Vec2c init,
                                   double x0, double cell, int n_cells, double tol) {
    if (!(cell > 0)) throw std::invalid_argument("cell_integrals: cell length must be positive");
    std::array<double, 5> y{init[0].real(), init[1].real(), init[0].imag(), init[1].imag(), 0.0};
    std::vector<double> out;
    out.reserve(n_cells);
    for (int n = 0; n < n_cells; ++n) {
        const double lo = x0 + n * cell, hi = x0 + (n + 1) * cell;
        const double before = y[4];
        integrate_segments<5>(model, lambda, lo, hi, y, tol,
                              [](SegmentEval ev, double lam) { return EnergyRhs{ev, lam}; });
        out.push_back(y[4] - before);
    }
    return out;
}

}  // namespace hillgap::quadode
