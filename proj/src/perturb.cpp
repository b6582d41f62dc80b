#include "hillgap/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hillgap/quadode.hpp"

namespace hillgap::perturb {

using coefficients::CoefficientModel;

namespace {

Mat2 b_matrix(const PerturbedPair& pair, double lambda, double x) {
    const auto d = pair.delta(x);  // (d inv_p, dq, dr)
    return Mat2{0.0, d[0], d[1] - lambda * d[2], 0.0};
}

struct SegRange {
    int i0, i1;  // inclusive node range of one smooth segment
};

std::vector<SegRange> segments(const VolterraSetup& s) {
    std::vector<SegRange> out;
    for (size_t k = 0; k < s.seg_start.size(); ++k) {
        const int i0 = s.seg_start[k];
        const int i1 = (k + 1 < s.seg_start.size()) ? s.seg_start[k + 1]
                                                    : static_cast<int>(s.grid.size()) - 1;
        out.push_back({i0, i1});
    }
    return out;
}

// B at node j as seen from segment k (left limit at the segment's last node).
const Mat2& b_at(const VolterraSetup& s, const std::vector<SegRange>& segs, size_t k, int j) {
    return (j == segs[k].i1) ? s.B_seg_end[k] : s.B[j];
}

}  // namespace

VolterraSetup make_setup(const PerturbedPair& pair, double lambda, const GridOptions& opts) {
    if (!pair.base.period) throw std::invalid_argument("make_setup: base model must be periodic");
    VolterraSetup s;
    s.pair = pair;
    s.lambda = lambda;
    s.opts = opts;
    s.a = pair.base.a;
    s.omega = *pair.base.period;
    s.fl = floquet::floquet_solutions(pair.base, lambda, opts.ode_tol);
    s.edge_mode = s.fl.mono.at_band_edge();
    if (s.edge_mode && pair.moment_class < 1)
        throw std::invalid_argument(
            "make_setup: lambda sits at a band edge; moment class >= 1 required");

    // truncation point: analytic tail below 0.01 * iter_tol where possible
    const double tail_budget = 0.01 * opts.iter_tol;
    const int k_budget = s.edge_mode ? pair.moment_class : 0;
    if (opts.X_override) {
        s.X = *opts.X_override;
        if (!(s.X > s.a)) throw std::invalid_argument("make_setup: X must exceed a");
    } else {
        s.X = s.a + 3.0 * s.omega;
        for (int it = 0; it < 4000; ++it) {
            const auto t = pair.tail(k_budget, s.X);
            if (!t || *t <= tail_budget) break;
            s.X += s.omega;
        }
    }
    if (auto t = pair.tail(k_budget, s.X)) {
        s.tail = *t;
        s.tail_known = true;
        if (std::isinf(*t))
            throw std::invalid_argument("make_setup: perturbation is not integrable at the "
                                        "declared moment class (divergent tail)");
    }
    if (s.fl.c.real() * (s.X - s.a) / s.omega > 300.0)
        throw std::invalid_argument("make_setup: Re c * (X - a)/omega exceeds the exponent "
                                    "range of double precision; shrink X");

    // grid cut at declared breakpoints AND period boundaries (the latter are
    // the anchor points of the stabilized Floquet traces)
    std::vector<double> cuts{s.a};
    for (double b : pair.breakpoints_in(s.a, s.X)) cuts.push_back(b);
    for (double w = s.a + s.omega; w < s.X - 1e-12; w += s.omega) cuts.push_back(w);
    cuts.push_back(s.X);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [](double x, double y) { return std::abs(x - y) < 1e-12; }),
               cuts.end());
    s.grid.push_back(s.a);
    for (size_t k = 0; k + 1 < cuts.size(); ++k) {
        s.seg_start.push_back(static_cast<int>(s.grid.size()) - 1);
        const double len = cuts[k + 1] - cuts[k];
        const int n = std::max(4, static_cast<int>(std::ceil(len / opts.h_target)));
        for (int j = 1; j <= n; ++j) s.grid.push_back(cuts[k] + len * j / n);
    }
    const int n_nodes = static_cast<int>(s.grid.size());

    // stabilized Floquet traces, window by window: within the window starting
    // at w_n = a + n*omega,
    //   U0(x) = e^{+c (x-w_n)/omega} PhiLoc(x) u_init
    //   V0(x) = e^{-c (x-w_n)/omega} PhiLoc(x) (v_init + n sigma u_init)   (Jordan)
    //         = e^{-c (x-w_n)/omega} PhiLoc(x) v_init                     (otherwise)
    // which follows from the exact multiplier relations at the anchors; no
    // error accumulates across windows.
    s.U0.resize(n_nodes);
    s.V0.resize(n_nodes);
    const Cplx c = s.fl.c;
    const double sigma = s.fl.mono.D >= 0 ? 1.0 : -1.0;
    int win_lo = 0;
    int window = 0;
    while (win_lo < n_nodes - 1) {
        const double w_start = s.a + window * s.omega;
        const double w_end = w_start + s.omega;
        int win_hi = win_lo;
        while (win_hi + 1 < n_nodes && s.grid[win_hi + 1] <= w_end + 1e-12) ++win_hi;
        std::vector<double> local(s.grid.begin() + win_lo, s.grid.begin() + win_hi + 1);
        const auto PhiLoc = quadode::fundamental_trace(pair.base, lambda, local, opts.ode_tol);
        Vec2c v_anchor = s.fl.v0_init;
        if (s.fl.jordan) {
            v_anchor[0] += window * sigma * s.fl.u0_init[0];
            v_anchor[1] += window * sigma * s.fl.u0_init[1];
        }
        for (int j = win_lo; j <= win_hi; ++j) {
            const double d = (s.grid[j] - w_start) / s.omega;
            s.U0[j] = std::exp(c * d) * (PhiLoc[j - win_lo] * s.fl.u0_init);
            s.V0[j] = std::exp(-c * d) * (PhiLoc[j - win_lo] * v_anchor);
        }
        win_lo = win_hi;
        ++window;
    }
    s.W = s.fl.u0_init[0] * s.fl.v0_init[1] - s.fl.u0_init[1] * s.fl.v0_init[0];

    for (int j = 0; j < n_nodes; ++j) {
        s.sup_U0 = std::max(s.sup_U0, norm2(s.U0[j]));
        const double denom = s.fl.jordan ? 1.0 + s.chi(j) : 1.0;
        s.sup_V0 = std::max(s.sup_V0, norm2(s.V0[j]) / denom);
    }
    // ||Phi(x) Phi(t)^{-1}|| <= (||U0(x)|| ||V0(t)|| e^{c(t-x)} + ...)/|W|,
    // so for x <= t the kernel is bounded by E e^{Re c (t-x)/omega} in the
    // periodic cases and by E (1 + (t-a)/omega) at a Jordan edge.
    s.E_bound = 2.0 * s.sup_U0 * s.sup_V0 / std::abs(s.W);

    s.B.resize(n_nodes);
    for (int j = 0; j < n_nodes; ++j) s.B[j] = b_matrix(pair, lambda, s.grid[j]);
    const auto segs = segments(s);
    s.B_seg_end.resize(segs.size());
    for (size_t k = 0; k < segs.size(); ++k) {
        const double hi = s.grid[segs[k].i1];
        s.B_seg_end[k] = b_matrix(pair, lambda, hi - 1e-12 * (1.0 + std::abs(hi)));
    }

    // int ||B|| over [a, X] (trapezoid is plenty for a constant) + tail bound
    for (size_t k = 0; k < segs.size(); ++k) {
        const int i0 = segs[k].i0, i1 = segs[k].i1;
        const double h = (s.grid[i1] - s.grid[i0]) / std::max(1, i1 - i0);
        for (int j = i0; j < i1; ++j) {
            const double g0 = b_at(s, segs, k, j).norm();
            const double g1 = (j + 1 == i1) ? s.B_seg_end[k].norm() : s.B[j + 1].norm();
            s.B_l1 += 0.5 * h * (g0 + g1);
        }
    }
    if (auto t0 = pair.tail(0, s.X)) s.B_l1 += std::max(1.0, std::abs(lambda)) * *t0;
    return s;
}

Trace u0_trace(const VolterraSetup& setup) { return setup.U0; }

Trace v0_trace(const VolterraSetup& setup) {
    if (setup.fl.c.real() > 0)
        throw std::invalid_argument("v0_trace: defined for Re c = 0 only");
    Trace out(setup.grid.size());
    for (size_t j = 0; j < out.size(); ++j) {
        const Cplx up = std::exp(2.0 * setup.fl.c * setup.chi(static_cast<int>(j)));
        out[j] = up * setup.V0[j];
    }
    return out;
}

double weighted_sup_norm(const VolterraSetup&, const Trace& m) {
    double sup = 0;
    for (const auto& v : m) sup = std::max(sup, norm2(v));
    return sup;
}

Vec2c state_at(const VolterraSetup& setup, const Trace& m, int j) {
    return setup.down_scale(j) * m[j];
}

Trace volterra_apply(const VolterraSetup& setup, const Trace& m) {
    if (m.size() != setup.grid.size())
        throw std::invalid_argument("volterra_apply: trace does not match the setup grid");
    const auto segs = segments(setup);
    const int n = static_cast<int>(m.size());
    const Cplx c = setup.fl.c;
    const double om = setup.omega;
    Trace out(n, Vec2c{Cplx(0), Cplx(0)});

    // In the weighted frame the kernel splits into a plain tail integral S1
    // (u0-direction) and an exponentially damped recurrence H (v0-direction):
    //   (T m)(x_j) = -( U0_j S1_j + V0_j H_j )
    //   S1_j = int_{x_j}^X g1,                g1 = <JV0, B m> / W
    //   H_j  = int_{x_j}^X e^{-2c (chi_t - chi_j)} g2,  g2 = -<JU0, B m> / W
    // with <Jw, z> = w_pu z_u - w_u z_pu. All quantities stay O(||B|| ||m||).
    Cplx S1(0), H(0);
    auto g_pair = [&](size_t k, int j) -> std::array<Cplx, 2> {
        const Vec2c Bm = b_at(setup, segs, k, j) * m[j];
        const Cplx g1 = (setup.V0[j][1] * Bm[0] - setup.V0[j][0] * Bm[1]) / setup.W;
        const Cplx g2 = (-setup.U0[j][1] * Bm[0] + setup.U0[j][0] * Bm[1]) / setup.W;
        return {g1, g2};
    };

    for (int k = static_cast<int>(segs.size()) - 1; k >= 0; --k) {
        const int i0 = segs[k].i0, i1 = segs[k].i1;
        if (i1 <= i0) continue;
        const double h = (setup.grid[i1] - setup.grid[i0]) / (i1 - i0);
        const Cplx rho1 = std::exp(-2.0 * c * h / om);   // one-interval damping
        const Cplx rho2 = rho1 * rho1;
        const Cplx rho_back = std::exp(2.0 * c * h / om);
        std::vector<std::array<Cplx, 2>> g(i1 - i0 + 1);
        for (int j = i0; j <= i1; ++j) g[j - i0] = g_pair(k, j);

        for (int j = i1 - 1; j >= i0; --j) {
            const int l = j - i0;
            Cplx w1, w2;
            if (j + 2 <= i1) {
                w1 = (h / 12.0) * (5.0 * g[l][0] + 8.0 * g[l + 1][0] - g[l + 2][0]);
                w2 = (h / 12.0) *
                     (5.0 * g[l][1] + 8.0 * rho1 * g[l + 1][1] - rho2 * g[l + 2][1]);
            } else if (j - 1 >= i0) {
                w1 = (h / 12.0) * (-g[l - 1][0] + 8.0 * g[l][0] + 5.0 * g[l + 1][0]);
                w2 = (h / 12.0) *
                     (-rho_back * g[l - 1][1] + 8.0 * g[l][1] + 5.0 * rho1 * g[l + 1][1]);
            } else {
                w1 = (h / 2.0) * (g[l][0] + g[l + 1][0]);
                w2 = (h / 2.0) * (g[l][1] + rho1 * g[l + 1][1]);
            }
            S1 += w1;
            H = rho1 * H + w2;
            const Vec2c term = S1 * setup.U0[j] + H * setup.V0[j];
            out[j] = {-term[0], -term[1]};
        }
    }
    return out;
}

namespace {

// 5-point central derivative residual against xi' = (A + B) xi in raw states,
// evaluated on segment-interior nodes only.
double ode_residual(const VolterraSetup& s, const Trace& m) {
    const auto segs = segments(s);
    double sup = 0;
    for (const auto& seg : segs) {
        if (seg.i1 - seg.i0 < 4) continue;
        const double h = (s.grid[seg.i1] - s.grid[seg.i0]) / (seg.i1 - seg.i0);
        for (int j = seg.i0 + 2; j <= seg.i1 - 2; ++j) {
            Vec2c xm2 = state_at(s, m, j - 2), xm1 = state_at(s, m, j - 1);
            Vec2c xp1 = state_at(s, m, j + 1), xp2 = state_at(s, m, j + 2);
            const Vec2c d = (1.0 / (12.0 * h)) * ((xm2 - 8.0 * xm1) + (8.0 * xp1 - xp2));
            const double x = s.grid[j];
            const auto base = s.pair.base.eval_triple(x);
            const Mat2 A{0.0, base[0], base[1] - s.lambda * base[2], 0.0};
            const Vec2c rhs = (A + s.B[j]) * state_at(s, m, j);
            sup = std::max(sup, norm2(d - rhs));
        }
    }
    return sup;
}

int pixel_index(const VolterraSetup& s) {
    // measure the tail deviation one period before X; the node at X itself
    // has xi(X) = phi(X) by construction of the truncation
    const double x_target = s.X - s.omega;
    auto it = std::lower_bound(s.grid.begin(), s.grid.end(), x_target);
    if (it == s.grid.begin() || it == s.grid.end())
        return static_cast<int>(s.grid.size()) * 3 / 4;
    return static_cast<int>(it - s.grid.begin());
}

PerturbedSolution iterate_fixed_point(const VolterraSetup& setup, const Trace& phi,
                                      const Trace& inhom, PerturbedSolution::Kind kind) {
    // xi = inhom + T xi, started from xi = inhom; phi is the base trace the
    // deviation is reported against. All traces are weighted.
    const GridOptions& opts = setup.opts;
    PerturbedSolution sol;
    sol.kind = kind;
    sol.c = setup.fl.c;
    sol.X = setup.X;
    sol.tail_bound = setup.tail_known ? setup.E_bound * setup.tail : 0.0;

    const double scale = std::max(1.0, weighted_sup_norm(setup, inhom));
    Trace xi = inhom;
    double delta = 0;
    for (int n = 0; n < opts.max_iterations; ++n) {
        const Trace txi = volterra_apply(setup, xi);
        delta = 0;
        for (size_t j = 0; j < xi.size(); ++j) {
            const Vec2c next = inhom[j] + txi[j];
            delta = std::max(delta, norm2(next - xi[j]));
            xi[j] = next;
        }
        sol.deltas.push_back(delta);
        sol.iterations = n + 1;
        if (delta < opts.iter_tol * scale) break;
    }
    if (delta >= opts.iter_tol * scale)
        throw std::runtime_error(
            "perturb: fixed-point iteration did not converge within " +
            std::to_string(opts.max_iterations) +
            " steps (Neumann bound estimate E*int||B|| = " +
            std::to_string(setup.E_bound * setup.B_l1) + ")");

    sol.xi = std::move(xi);
    sol.residual_sup = ode_residual(setup, sol.xi);
    const int pj = pixel_index(setup);
    sol.pixel_tail = norm2(sol.xi[pj] - phi[pj]);
    return sol;
}

double wronskian_abs_at(const Trace& u, const Trace& v, size_t j) {
    return std::abs(u[j][0] * v[j][1] - u[j][1] * v[j][0]);
}

}  // namespace

PerturbedSolution build_decaying_solution(const VolterraSetup& setup) {
    const Trace phi = u0_trace(setup);
    return iterate_fixed_point(setup, phi, phi, PerturbedSolution::Kind::u1_decaying);
}

PerturbedSolution build_second_solution(const VolterraSetup& setup) {
    if (setup.fl.mono.structure == floquet::Structure::hyperbolic)
        throw std::invalid_argument(
            "build_second_solution: defined for interior points and band edges only");
    const Trace phi = v0_trace(setup);
    PerturbedSolution sol;
    if (!setup.edge_mode) {
        sol = iterate_fixed_point(setup, phi, phi, PerturbedSolution::Kind::v1_second);
    } else {
        if (setup.pair.moment_class < 2)
            throw std::invalid_argument(
                "build_second_solution: band edge requires moment class >= 2");
        // xi = phi + (I-T)^{-1} (T~ phi): one application of the kernel to the
        // linearly growing phi, then the ordinary Neumann iteration
        const Trace eta = volterra_apply(setup, phi);
        sol = iterate_fixed_point(setup, phi, eta, PerturbedSolution::Kind::v1_second);
        for (size_t j = 0; j < sol.xi.size(); ++j) sol.xi[j] = sol.xi[j] + phi[j];
        sol.residual_sup = ode_residual(setup, sol.xi);
        const int pj = pixel_index(setup);
        sol.pixel_tail = norm2(sol.xi[pj] - phi[pj]);
        sol.kind = PerturbedSolution::Kind::v1_second;
    }

    const PerturbedSolution u1 = build_decaying_solution(setup);
    // the weighted-trace Wronskian at a equals the raw one (chi(0) = 0)
    sol.wronskian_vs_decaying = wronskian_abs_at(u1.xi, sol.xi, 0);
    const double w_scale = norm2(u1.xi[0]) * norm2(sol.xi[0]);
    if (sol.wronskian_vs_decaying <= 1e-8 * std::max(w_scale, 1e-30))
        throw std::runtime_error("build_second_solution: Wronskian with the decaying solution "
                                 "vanished; solutions are numerically dependent");
    return sol;
}

GronwallReport gronwall_envelope(const VolterraSetup& setup, const PerturbedSolution& sol) {
    GronwallReport rep;
    rep.E = setup.E_bound;
    const auto segs = segments(setup);
    const double xi0 = norm2(state_at(setup, sol.xi, 0));
    double cumB = 0;
    rep.max_ratio = 0;
    for (size_t k = 0; k < segs.size(); ++k) {
        const int i0 = segs[k].i0, i1 = segs[k].i1;
        const double h = (setup.grid[i1] - setup.grid[i0]) / std::max(1, i1 - i0);
        for (int j = i0; j <= i1; ++j) {
            if (j > i0) {
                const double g0 = b_at(setup, segs, k, j - 1).norm();
                const double g1 = (j == i1) ? setup.B_seg_end[k].norm() : setup.B[j].norm();
                cumB += 0.5 * h * (g0 + g1);
            }
            const double envelope =
                setup.weight(j) * rep.E * xi0 * std::exp(rep.E * cumB);
            const double val = norm2(state_at(setup, sol.xi, j));
            if (envelope > 0) rep.max_ratio = std::max(rep.max_ratio, val / envelope);
        }
    }
    rep.holds = rep.max_ratio <= 1.0 + 1e-6;
    return rep;
}

}  // namespace hillgap::perturb
