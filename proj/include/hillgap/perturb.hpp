#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "hillgap/coefficients.hpp"
#include "hillgap/floquet.hpp"
#include "hillgap/mat2.hpp"

namespace hillgap::perturb {

using coefficients::PerturbedPair;

/// Trace of a solution on the setup grid in the WEIGHTED representation:
/// m(x_j) = e^{+c (x_j - a)/omega} * (u, p u')(x_j).
///
/// Solutions with the decaying asymptotics have bounded mantissas, so the
/// whole fixed-point machinery runs on O(1) numbers even deep inside a
/// spectral gap where the raw states span hundreds of orders of magnitude.
/// The sup of ||m|| is exactly the norm of the paper-level Banach space.
using Trace = std::vector<Vec2c>;

struct GridOptions {
    double h_target = 2e-3;   // node spacing within smooth segments
    double ode_tol = 1e-12;   // tolerance of the base-solution traces
    double iter_tol = 1e-10;  // weighted sup-norm stopping delta
    int max_iterations = 50;
    std::optional<double> X_override;  // truncation point; default from tail rule
};

/// Everything the Volterra operator T needs at one (pair, lambda): the base
/// problem's Floquet solutions on a dense grid over [a, X] in stabilized
/// (quasi-periodic factor) form, the perturbation matrix B at the nodes, and
/// the constants of the kernel decay estimate.
///
/// The fundamental system Phi = (u0, v0) is stored factorized:
///   (u0, p0 u0')(x) = e^{-c chi(x)} U0(x),   U0 periodic and bounded,
///   (v0, p0 v0')(x) = e^{+c chi(x)} V0(x),   V0 periodic (or linearly
///                                            growing in the Jordan case),
/// with chi(x) = (x - a)/omega. U0 and V0 are built window by window from
/// exact multiplier anchors, so no exponential error compounding occurs.
struct VolterraSetup {
    PerturbedPair pair;
    double lambda = 0;
    GridOptions opts;
    floquet::FloquetSolutionPair fl;  // monodromy, exponent c, initial data
    double omega = 0;
    double a = 0;
    double X = 0;              // truncation of the integral to infinity
    double tail = 0;           // analytic bound for the ignored tail integral
    bool tail_known = false;
    bool edge_mode = false;    // lambda at a band edge

    std::vector<double> grid;  // ascending, grid.front() = a, grid.back() = X
    std::vector<int> seg_start;  // first node index of each smooth segment
    std::vector<Vec2c> U0;       // quasi-periodic part of u0 at nodes
    std::vector<Vec2c> V0;       // quasi-periodic part of v0 at nodes
    std::vector<Mat2> B;         // B at nodes (right-continuous values)
    std::vector<Mat2> B_seg_end; // left-limit B at each segment's last node
    Cplx W;                      // Wronskian W(u0, v0), constant
    double sup_U0 = 0;
    double sup_V0 = 0;           // for the Jordan case: sup ||V0||/(1 + chi)
    double E_bound = 0;          // kernel constant of the decay estimate
    double B_l1 = 0;             // int_a^X ||B|| dt plus a tail bound

    double chi(int j) const { return (grid[j] - a) / omega; }
    /// e^{-c chi(j)}: converts mantissa values to raw states.
    Cplx down_scale(int j) const { return std::exp(-fl.c * chi(j)); }
    /// |e^{+c chi(j)}| = e^{Re c chi(j)}, the weight of the Banach norm.
    double weight(int j) const { return std::exp(fl.c.real() * chi(j)); }
};

VolterraSetup make_setup(const PerturbedPair& pair, double lambda,
                         const GridOptions& opts = {});

/// (T xi)(x) = -Phi(x) int_x^X Phi(t)^{-1} B(t) xi(t) dt, acting on and
/// returning weighted traces. Composite parabolic quadrature within smooth
/// segments; discontinuities of B at declared breakpoints take the correct
/// one-sided values.
Trace volterra_apply(const VolterraSetup& setup, const Trace& m);

/// Weighted trace of the base solution u0 (this is just U0).
Trace u0_trace(const VolterraSetup& setup);

/// Weighted trace of the base solution v0: e^{2 c chi} V0. Only meaningful
/// when Re c = 0 (interior points and band edges).
Trace v0_trace(const VolterraSetup& setup);

/// sup_j ||m_j|| — the norm of the paper's weighted space.
double weighted_sup_norm(const VolterraSetup& setup, const Trace& m);

/// Raw state (u, p u')(grid[j]) of a weighted trace.
Vec2c state_at(const VolterraSetup& setup, const Trace& m, int j);

struct PerturbedSolution {
    enum class Kind { u1_decaying, v1_second };
    Kind kind = Kind::u1_decaying;
    Trace xi;                    // weighted trace on setup.grid
    std::vector<double> deltas;  // weighted sup-norm iteration deltas
    int iterations = 0;
    Cplx c;
    double residual_sup = 0;   // sup ||xi' - (A+B) xi|| on segment-interior nodes
    double pixel_tail = 0;     // weighted deviation from the base trace near X
    double X = 0;
    double tail_bound = 0;
    double wronskian_vs_decaying = 0;  // |W(u1, v1)|, second solutions only
};

/// u1 with the decaying/bounded asymptotics: fixed-point iteration
/// xi_{n+1} = phi + T xi_n from phi = (u0, p0 u0'). At band edges requires
/// moment class >= 1.
PerturbedSolution build_decaying_solution(const VolterraSetup& setup);

/// Second solution: interior points use v1 = (I-T)^{-1}(v0, p0 v0'); band
/// edges (moment class >= 2) use the weighted-space splitting
/// xi = phi + (I-T)^{-1} T phi with the linearly growing phi = (v0, p0 v0').
/// Not defined for spectral-gap lambda (v0 leaves the decay space; propagate
/// the perturbed model directly instead).
PerturbedSolution build_second_solution(const VolterraSetup& setup);

struct GronwallReport {
    double E = 0;
    double max_ratio = 0;  // sup_x ||xi(x)|| / envelope(x)
    bool holds = false;
};

/// Checks ||xi(x)|| <= e^{Re c (x-a)/w} E ||xi(a)|| exp(E int_a^x ||B||)
/// pointwise on the grid (states reconstructed from the weighted trace).
GronwallReport gronwall_envelope(const VolterraSetup& setup, const PerturbedSolution& sol);

}  // namespace hillgap::perturb
