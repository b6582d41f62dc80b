#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace hillgap::coefficients {

enum class Smoothness { smooth, piecewise };

/// Evaluable coefficient triple (1/p, q, r) of a Sturm-Liouville expression
/// tau u = (1/r)(-(p u')' + q u) on [a, infinity) (or all of R).
///
/// Coefficients are piecewise-continuous callables. Jump locations must be
/// declared in `breakpoints` so integrators can stop exactly on them; the
/// value AT a breakpoint is the right limit.
struct CoefficientModel {
    std::function<double(double)> inv_p;
    std::function<double(double)> q;
    std::function<double(double)> r;
    double a = 0.0;                       // finite endpoint of the domain
    std::optional<double> period;         // omega, set for the periodic base
    std::vector<double> breakpoints;      // ascending, strictly inside domain
    Smoothness smoothness = Smoothness::smooth;

    // family metadata: set by make_builtin, used for analytic moment tails
    std::string family;
    std::vector<double> params;

    /// (1/p, q, r) at x. Throws if r or 1/p is non-positive there.
    std::array<double, 3> eval_triple(double x) const;
};

enum class BuiltinFamily {
    free,              // p = r = 1, q = 0, chosen omega
    const_shift,       // p = r = 1, q = shift, chosen omega
    mathieu,           // p = r = 1, q = 2*gamma*cos(2x), omega = pi
    square_well_pert,  // dq = depth on [x0, x0+width]
    exp_decay_pert,    // dq = amplitude * exp(-rate*|x-a|)
    power_decay_pert,  // dq = amplitude * (1+|x-a|)^(-s)
    gauss_pert,        // dq = amplitude * exp(-beta*(x-a)^2)
};

BuiltinFamily family_from_name(const std::string& name);
std::string family_name(BuiltinFamily f);

/// Base families. Parameters:
///   free:        {omega}
///   const_shift: {shift, omega}
///   mathieu:     {gamma}            (omega = pi)
/// Throws std::invalid_argument for perturbation families or bad params.
CoefficientModel make_builtin(BuiltinFamily f, const std::vector<double>& params);

/// Perturbation families: returns a non-periodic model equal to `base` plus
/// a decaying difference. Parameters:
///   square_well_pert: {depth, width, x0}
///   exp_decay_pert:   {amplitude, rate}
///                     or {amp_q, rate, amp_r, amp_inv_p} to perturb all
///                     three coefficients with the same profile
///   power_decay_pert: {amplitude, s}
///   gauss_pert:       {amplitude, beta}
CoefficientModel make_builtin(BuiltinFamily f, const CoefficientModel& base,
                              const std::vector<double>& params);

/// Base problem plus perturbed problem with declared moment class k.
struct PerturbedPair {
    CoefficientModel base;  // periodic
    CoefficientModel pert;  // same a, no period required
    int moment_class = 0;   // k in {0,1,2}

    /// (1/p1 - 1/p0, q1 - q0, r1 - r0) at x.
    std::array<double, 3> delta(double x) const;

    /// Analytic tail of int_X^inf (|dr|+|d(1/p)|+|dq|) * t^k dt when the
    /// perturbation family has one; nullopt for hand-built models.
    std::optional<double> tail(int k, double X) const;

    /// Breakpoints of base and pert merged, restricted to (lo, hi).
    std::vector<double> breakpoints_in(double lo, double hi) const;
};

PerturbedPair make_pair(const CoefficientModel& base, BuiltinFamily pert_family,
                        const std::vector<double>& params, int moment_class);

/// Identity perturbation (pert == base); B vanishes identically.
PerturbedPair make_identity_pair(const CoefficientModel& base, int moment_class = 2);

struct MomentResult {
    double value = 0;        // quadrature over [a, X]
    double tail = 0;         // analytic tail beyond X (0 if unknown)
    bool tail_known = false;
    bool divergent = false;  // Cauchy test over doubling windows failed
};

/// Numerical moment norm int_a^X (|r1-r0| + |1/p1-1/p0| + |q1-q0|) |t|^k dt
/// plus the family's analytic tail. Flags divergence when window integrals
/// over doubling intervals stop decaying.
MomentResult moment_norm(const PerturbedPair& pair, int k, double X);

/// Adaptive Simpson quadrature with forced subdivision at breakpoints.
double integrate_adaptive(const std::function<double(double)>& f, double lo, double hi,
                          const std::vector<double>& breakpoints, double rel_tol = 1e-11);

}  // namespace hillgap::coefficients
