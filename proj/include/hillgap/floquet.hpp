#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "hillgap/coefficients.hpp"
#include "hillgap/mat2.hpp"
#include "hillgap/parallel.hpp"

namespace hillgap::floquet {

using coefficients::CoefficientModel;

enum class Structure {
    hyperbolic,                // |D| > 2, spectral gap
    elliptic,                  // |D| < 2, band interior
    parabolic_diagonalizable,  // |D| = 2, M = +-I
    parabolic_jordan,          // |D| = 2, single eigenvector
};

std::string to_string(Structure s);

/// Monodromy matrix over one period with discriminant, Floquet multipliers
/// e^{+-c} and the exponent c fixed so that Re c >= 0.
struct MonodromyResult {
    Mat2 M;
    double D = 0;          // trace of M
    Cplx mult_plus;        // e^{+c}
    Cplx mult_minus;       // e^{-c}
    Cplx c;                // Re c >= 0
    Structure structure = Structure::elliptic;
    double tol_edge = 1e-9;

    bool in_essential_spectrum() const { return structure != Structure::hyperbolic; }
    bool at_band_edge() const {
        return structure == Structure::parabolic_diagonalizable ||
               structure == Structure::parabolic_jordan;
    }
};

MonodromyResult monodromy(const CoefficientModel& model, double lambda, double tol = 1e-12,
                          double tol_edge = 1e-9);

/// Classification of D alone (no integration); exposed so sweeps can reuse
/// already-computed discriminants.
MonodromyResult classify_monodromy(const Mat2& M, double tol_edge);

/// D(lambda) over a grid; OpenMP-parallel over lambda.  The _serial variant
/// is the reference implementation and must produce identical values.
std::vector<double> discriminant_sweep(const CoefficientModel& model,
                                       std::span<const double> lambdas, double tol = 1e-12,
                                       par::Exec mode = par::Exec::parallel);
std::vector<double> discriminant_sweep_serial(const CoefficientModel& model,
                                              std::span<const double> lambdas,
                                              double tol = 1e-12);

struct BandStructure {
    std::vector<double> edges;                 // ascending, touching edges repeated
    std::vector<std::array<double, 2>> bands;  // [lambda_{2k-1}, lambda_{2k}]
    std::vector<bool> touching;                // bands[i] touches bands[i+1]
    std::vector<std::string> warnings;

    /// Open gaps (mu, lambda) between consecutive bands, touching ones skipped.
    std::vector<std::array<double, 2>> gaps() const;
};

/// Locates all solutions of |D(lambda)| = 2 in [lo, hi] by a bracketed scan
/// with bisection (simple crossings) and minimum refinement (tangencies, i.e.
/// closed gaps; their edges are reported twice). scan_per_unit is the number
/// of scan points per unit of lambda.
BandStructure band_structure(const CoefficientModel& model, double lo, double hi,
                             int scan_per_unit = 400, double tol_edge = 1e-9,
                             double tol = 1e-12, par::Exec mode = par::Exec::parallel);

/// Floquet solution pair at lambda: u0 belongs to the multiplier e^{-c}, v0
/// to e^{+c} (or the Jordan partner at a degenerate edge). U0/V0 are the
/// quasi-periodic normalizations of Lemma-level theory, sampled over one
/// period.
struct FloquetSolutionPair {
    MonodromyResult mono;
    Vec2c u0_init;
    Vec2c v0_init;
    Cplx c;
    bool jordan = false;
    bool real_valued = false;      // cases (i) and (iii): data chosen real
    double growth_C = 0;           // ||V0(x)|| <= C (1 + (x-a)/omega)
    double sup_U0 = 0;             // sup over one period
    double sup_V0 = 0;
    bool conditioning_warning = false;  // ||D|-2| within 10x of tol_edge
    std::vector<double> sample_x;  // one period
    std::vector<Vec2c> U0;         // exp(+c (x-a)/w) * (u0, p0 u0')
    std::vector<Vec2c> V0;         // exp(-c (x-a)/w) * (v0, p0 v0')
};

FloquetSolutionPair floquet_solutions(const CoefficientModel& model, double lambda,
                                      double tol = 1e-12, double tol_edge = 1e-9,
                                      int samples_per_period = 257);

/// Cell energies int_{a+n w}^{a+(n+1) w} |u|^2 r0 dt for n = 0..n_max-1 for
/// the solution with the given initial data at a. Requires |D| <= 2 + edge
/// tolerance (essential spectrum).
std::vector<double> cell_energy(const CoefficientModel& model, Vec2c init, double lambda,
                                int n_max, double tol = 1e-10);

}  // namespace hillgap::floquet
