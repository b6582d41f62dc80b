#pragma once

#include <array>
#include <vector>

#include "hillgap/coefficients.hpp"
#include "hillgap/parallel.hpp"

namespace hillgap::oracle {

using coefficients::CoefficientModel;
using coefficients::PerturbedPair;

/// Symmetric tridiagonal pencil (K, M) from the flux-form 3-point scheme for
/// -(p u')' + q u = lambda r u. M is the diagonal mass matrix from r. Nodes
/// are uniform with step h except where one was snapped onto a declared
/// coefficient breakpoint.
struct TridiagonalPencil {
    std::vector<double> diag;         // K_ii
    std::vector<double> offdiag;      // K_{i,i+1}, size n-1
    std::vector<double> weight_diag;  // M_ii > 0
    double h = 0;                     // nominal step
    std::array<double, 2> domain{0, 0};
    double alpha = 0;                 // left boundary condition; 0 = Dirichlet
    std::vector<double> nodes;        // positions of the unknowns

    int size() const { return static_cast<int>(diag.size()); }
};

/// Discretizes the model on `interval` with N unknowns. alpha = 0 imposes
/// Dirichlet conditions at both ends; otherwise the condition
/// cos(alpha) u + sin(alpha) (p u') = 0 is built into the first row by a
/// one-sided flux balance (right end stays Dirichlet). Interior nodes are
/// snapped onto declared breakpoints so jumps land exactly between flux
/// cells; fails if N is too small to separate two breakpoints.
TridiagonalPencil discretize(const CoefficientModel& model, std::array<double, 2> interval,
                             int N, double alpha = 0.0);
TridiagonalPencil discretize(const PerturbedPair& pair, std::array<double, 2> interval,
                             int N, double alpha = 0.0);

/// Number of pencil eigenvalues strictly below lambda, via the signed pivots
/// of the shifted LDL^T factorization. Exact integer (zero pivots perturbed).
int sturm_count(const TridiagonalPencil& pencil, double lambda);

/// Eigenvalues of the pencil inside (lo, hi), each located by sturm-count
/// bisection to tol; parallel over eigenvalue indices.
std::vector<double> eigenvalues_in(const TridiagonalPencil& pencil, double lo, double hi,
                                   double tol = 1e-10, par::Exec mode = par::Exec::parallel);

struct OracleReport {
    std::array<double, 2> gap{0, 0};
    double L = 0;
    int N = 0;
    std::vector<double> eigenvalues;          // L-stable, h-refined values
    std::vector<double> discarded_artifacts;  // moved under L -> 2L
    bool stable = false;                      // counts equal and values h-stable to 1e-4
    int count = 0;
};

/// Brute-force gap eigenvalues of the perturbed operator by truncation to
/// [a, a+L] (half line, boundary condition alpha at a) or [a-L, a+L]
/// (full line, Dirichlet), repeated at doubled domain and refined mesh.
/// Eigenvalues that move more than 1e-3 when L doubles are boundary
/// artifacts and are discarded; surviving values are Richardson-refined.
OracleReport oracle_gap_eigenvalues(const PerturbedPair& pair, std::array<double, 2> gap,
                                    double L, int N, bool full_line = false,
                                    double alpha = 0.0,
                                    par::Exec mode = par::Exec::parallel);

}  // namespace hillgap::oracle
