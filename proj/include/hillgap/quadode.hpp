#pragma once

#include <complex>
#include <vector>

#include "hillgap/coefficients.hpp"
#include "hillgap/mat2.hpp"

namespace hillgap::quadode {

using coefficients::CoefficientModel;

/// Quasi-derivative pair (u, p*u') at a position. The second component is
/// the quantity that stays continuous across jumps of p.
struct StateVector {
    double u = 0;
    double pu = 0;
    double x = 0;
};

struct TransferMatrix {
    Mat2 m;
    double from_x = 0;
    double to_x = 0;
    double lambda = 0;
};

/// u1.u * u2.pu - u1.pu * u2.u; requires matching positions.
double wronskian(const StateVector& s1, const StateVector& s2);

/// Propagates (u, pu)' = (inv_p * pu, (q - lambda*r) * u) from `from` to
/// `to_x` with adaptive error control, stopping exactly on declared
/// breakpoints. Works in either direction.
StateVector propagate_state(const CoefficientModel& model, double lambda,
                            const StateVector& from, double to_x, double tol = 1e-12);

/// Fundamental 2x2 solution matrix of the quasi-derivative system over
/// [x0, x1]; columns are propagations of (1,0) and (0,1). det = 1 up to
/// integrator tolerance (the system is trace-free).
TransferMatrix transfer_matrix(const CoefficientModel& model, double lambda, double x0,
                               double x1, double tol = 1e-12);

/// Fundamental matrix at every grid point (grid ascending; the matrix at
/// grid[i] maps states at grid[0] to states at grid[i]). One continuous
/// adaptive integration, so the whole trace shares error control.
std::vector<Mat2> fundamental_trace(const CoefficientModel& model, double lambda,
                                    const std::vector<double>& grid, double tol = 1e-12);

/// Integrals int |u|^2 r dt over consecutive cells [x0 + n*cell, x0 + (n+1)*cell]
/// for n = 0..n_cells-1, where u solves the equation with (possibly complex)
/// initial data (u0, pu0) at x0. Computed by augmenting the propagated system
/// with the running integral.
std::vector<double> cell_integrals(const CoefficientModel& model, double lambda, Vec2c init,
                                   double x0, double cell, int n_cells, double tol = 1e-10);

}  // namespace hillgap::quadode
