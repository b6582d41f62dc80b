#include "hillgap/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hillgap/quadode.hpp"

namespace hillgap::floquet {

using quadode::transfer_matrix;

std::string to_string(Structure s) {
    switch (s) {
        case Structure::hyperbolic: return "hyperbolic";
        case Structure::elliptic: return "elliptic";
        case Structure::parabolic_diagonalizable: return "parabolic_diagonalizable";
        case Structure::parabolic_jordan: return "parabolic_jordan";
    }
    return "?";
}

MonodromyResult classify_monodromy(const Mat2& M, double tol_edge) {
    MonodromyResult res;
    res.M = M;
    res.D = M.trace();
    res.tol_edge = tol_edge;
    const double D = res.D;
    if (std::abs(D) - 2.0 > tol_edge) {
        // spectral gap: real multipliers, Re c > 0
        res.structure = Structure::hyperbolic;
        const double ch = std::acosh(std::abs(D) / 2.0);
        res.c = D < 0 ? Cplx(ch, std::acos(-1.0)) : Cplx(ch, 0.0);
        const double m = std::exp(-ch);  // |e^{-c}|
        res.mult_minus = D < 0 ? Cplx(-m, 0) : Cplx(m, 0);
        res.mult_plus = 1.0 / res.mult_minus;
    } else if (2.0 - std::abs(D) > tol_edge) {
        // band interior: unimodular conjugate pair
        res.structure = Structure::elliptic;
        const double theta = std::acos(D / 2.0);  // in (0, pi)
        res.c = Cplx(0.0, theta);
        res.mult_plus = std::exp(Cplx(0.0, theta));
        res.mult_minus = std::conj(res.mult_plus);
    } else {
        // band edge: double multiplier sigma = +-1
        const double sigma = D >= 0 ? 1.0 : -1.0;
        res.c = sigma > 0 ? Cplx(0.0, 0.0) : Cplx(0.0, std::acos(-1.0));
        res.mult_plus = res.mult_minus = sigma;
        const Mat2 N{M.m00 - sigma, M.m01, M.m10, M.m11 - sigma};
        const auto sv = singular_values(N);
        const bool rank_zero = sv[0] <= 1e-7 * std::max(M.norm(), 1.0);
        res.structure =
            rank_zero ? Structure::parabolic_diagonalizable : Structure::parabolic_jordan;
    }
    return res;
}

MonodromyResult monodromy(const CoefficientModel& model, double lambda, double tol,
                          double tol_edge) {
    if (!model.period) throw std::invalid_argument("monodromy: model has no period");
    const double w = *model.period;
    const auto T = transfer_matrix(model, lambda, model.a, model.a + w, tol);
    return classify_monodromy(T.m, tol_edge);
}

std::vector<double> discriminant_sweep(const CoefficientModel& model,
                                       std::span<const double> lambdas, double tol,
                                       par::Exec mode) {
    std::vector<double> D(lambdas.size());
    par::for_n(mode, static_cast<int>(lambdas.size()), [&](int i) {
        D[i] = monodromy(model, lambdas[i], tol).D;
    });
    return D;
}

std::vector<double> discriminant_sweep_serial(const CoefficientModel& model,
                                              std::span<const double> lambdas, double tol) {
    return discriminant_sweep(model, lambdas, tol, par::Exec::serial);
}

std::vector<std::array<double, 2>> BandStructure::gaps() const {
    std::vector<std::array<double, 2>> out;
    for (size_t i = 0; i + 1 < bands.size(); ++i)
        if (!touching[i]) out.push_back({bands[i][1], bands[i + 1][0]});
    return out;
}

namespace {

// Bisection for D(lambda) = target given a sign-changing bracket of
// f = D - target. Refines until |f| <= 0.5*tol_edge.
double refine_edge(const CoefficientModel& model, double target, double lo, double hi,
                   double flo, double tol, double tol_edge) {
    double best = 0.5 * (lo + hi);
    for (int it = 0; it < 120; ++it) {
        best = 0.5 * (lo + hi);
        const double f = monodromy(model, best, tol).D - target;
        if (std::abs(f) <= 0.5 * tol_edge) return best;
        if ((f < 0) == (flo < 0)) {
            lo = best;
            flo = f;
        } else {
            hi = best;
        }
        if (hi - lo < 1e-14 * std::max(1.0, std::abs(best))) break;
    }
    return best;
}

// Golden-section extremum refinement of D on [lo, hi]; sign = +1 maximizes.
std::pair<double, double> refine_extremum(const CoefficientModel& model, double lo, double hi,
                                          double sign, double tol) {
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = hi - gr * (hi - lo);
    double d = lo + gr * (hi - lo);
    double fc = sign * monodromy(model, c, tol).D;
    double fd = sign * monodromy(model, d, tol).D;
    for (int it = 0; it < 80 && (hi - lo) > 1e-12 * std::max(1.0, std::abs(lo)); ++it) {
        if (fc > fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - gr * (hi - lo);
            fc = sign * monodromy(model, c, tol).D;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + gr * (hi - lo);
            fd = sign * monodromy(model, d, tol).D;
        }
    }
    const double x = 0.5 * (lo + hi);
    return {x, monodromy(model, x, tol).D};
}

}  // namespace

BandStructure band_structure(const CoefficientModel& model, double lo, double hi,
                             int scan_per_unit, double tol_edge, double tol, par::Exec mode) {
    if (!(lo < hi)) throw std::invalid_argument("band_structure: need lo < hi");
    if (!model.period) throw std::invalid_argument("band_structure: model has no period");
    BandStructure bs;

    const int n = std::max(8, static_cast<int>(std::ceil((hi - lo) * scan_per_unit))) + 1;
    std::vector<double> grid(n);
    const double step = (hi - lo) / (n - 1);
    for (int i = 0; i < n; ++i) grid[i] = lo + step * i;
    const std::vector<double> D = discriminant_sweep(model, grid, tol, mode);

    struct Bracket {
        double lo, hi, flo, target;
    };
    std::vector<Bracket> brackets;
    std::vector<double> touch_edges;  // doubled later

    for (double target : {2.0, -2.0}) {
        for (int i = 0; i + 1 < n; ++i) {
            const double f0 = D[i] - target, f1 = D[i + 1] - target;
            if ((f0 <= 0) != (f1 <= 0)) brackets.push_back({grid[i], grid[i + 1], f0, target});
        }
    }

    // Tangencies and sub-grid features: refine interior extrema of D toward
    // the nearest of the lines +-2. A refined extremum that reaches the line
    // within touch_tol is a closed gap (double edge); one that crosses it
    // hides two crossings between grid points (a gap or band narrower than
    // the scan step).
    for (int i = 1; i + 1 < n; ++i) {
        const bool local_max = D[i] >= D[i - 1] && D[i] > D[i + 1];
        const bool local_min = D[i] <= D[i - 1] && D[i] < D[i + 1];
        if (!local_max && !local_min) continue;
        const double target = local_max ? (D[i] < -2.0 ? -2.0 : 2.0)
                                        : (D[i] > 2.0 ? 2.0 : -2.0);
        // skip if a grid sign change already brackets a crossing here
        const double fm = D[i - 1] - target, f0 = D[i] - target, f1 = D[i + 1] - target;
        if ((fm <= 0) != (f0 <= 0) || (f0 <= 0) != (f1 <= 0)) continue;
        // only extrema approaching the line from the far side can hide a
        // crossing pair; an extremum already past the line is plain grid data
        if (local_max && f0 > 0) continue;
        if (local_min && f0 < 0) continue;
        if (std::abs(f0) > 1.5) continue;  // far from the line, nothing can hide
        auto [xext, Dext] = refine_extremum(model, grid[i - 1], grid[i + 1],
                                            local_max ? 1.0 : -1.0, tol);
        const double g = Dext - target;
        const double touch_tol = std::max(tol_edge, 1e3 * tol);
        if (std::abs(g) <= touch_tol) {
            touch_edges.push_back(xext);  // closed gap: double edge
        } else if ((local_max && g > 0) || (local_min && g < 0)) {
            // the extremum pokes through the line: two sub-grid crossings
            brackets.push_back({grid[i - 1], xext, fm, target});
            brackets.push_back({xext, grid[i + 1], g, target});
            bs.warnings.push_back("feature near lambda=" + std::to_string(xext) +
                                  " is narrower than the scan step; resolved locally");
        }
    }

    std::vector<double> edges(brackets.size());
    par::for_n(mode, static_cast<int>(brackets.size()), [&](int i) {
        const auto& b = brackets[i];
        edges[i] = refine_edge(model, b.target, b.lo, b.hi, b.flo, tol, tol_edge);
    });
    for (double e : touch_edges) {
        edges.push_back(e);
        edges.push_back(e);
    }
    std::sort(edges.begin(), edges.end());
    bs.edges = edges;

    // assemble bands; |D| <= 2 between a "down" edge and the next "up" edge
    const bool starts_inside = std::abs(D.front()) <= 2.0 + tol_edge;
    std::vector<double> pts = edges;
    if (starts_inside) {
        pts.insert(pts.begin(), lo);
        bs.warnings.push_back("scan range begins inside a band; first band is truncated");
    }
    const bool ends_inside = std::abs(D.back()) <= 2.0 + tol_edge;
    if (ends_inside) {
        pts.push_back(hi);
        bs.warnings.push_back("scan range ends inside a band; last band is truncated");
    }
    if (pts.size() % 2 != 0)
        bs.warnings.push_back("odd number of band boundaries located; last one dropped "
                              "(edge at a range endpoint?)");
    for (size_t i = 0; i + 1 < pts.size(); i += 2) bs.bands.push_back({pts[i], pts[i + 1]});

    // verify band interiors against the sweep; mismatches mean the scan was too coarse
    for (const auto& band : bs.bands) {
        if (band[1] - band[0] < 4 * step && band[1] - band[0] > 10 * tol_edge)
            bs.warnings.push_back("band [" + std::to_string(band[0]) + ", " +
                                  std::to_string(band[1]) +
                                  "] spans fewer than 4 scan cells; consider a finer scan");
        const double mid = 0.5 * (band[0] + band[1]);
        if (band[1] - band[0] > 100 * tol_edge &&
            std::abs(monodromy(model, mid, tol).D) > 2.0 + tol_edge)
            bs.warnings.push_back("interior check failed inside band at lambda=" +
                                  std::to_string(mid) + "; scan resolution too coarse");
    }
    bs.touching.assign(bs.bands.empty() ? 0 : bs.bands.size() - 1, false);
    for (size_t i = 0; i + 1 < bs.bands.size(); ++i)
        bs.touching[i] = (bs.bands[i + 1][0] - bs.bands[i][1]) <= 10 * tol_edge;
    return bs;
}

namespace {

// unit-norm with deterministic phase: largest-|.| component made real positive
Vec2c normalize_vec(Vec2c v) {
    const double n = norm2(v);
    if (n == 0) return v;
    const Cplx lead = std::abs(v[0]) >= std::abs(v[1]) ? v[0] : v[1];
    const Cplx phase = std::abs(lead) > 0 ? lead / std::abs(lead) : Cplx(1, 0);
    const Cplx scale = 1.0 / (n * phase);
    return {v[0] * scale, v[1] * scale};
}

// eigenvector of the real 2x2 matrix M for eigenvalue mu (possibly complex)
Vec2c eigenvector(const Mat2& M, Cplx mu) {
    const Vec2c cand1{Cplx(M.m01), mu - M.m00};
    const Vec2c cand2{mu - M.m11, Cplx(M.m10)};
    return norm2(cand1) >= norm2(cand2) ? cand1 : cand2;
}

}  // namespace

FloquetSolutionPair floquet_solutions(const CoefficientModel& model, double lambda, double tol,
                                      double tol_edge, int samples_per_period) {
    FloquetSolutionPair fs;
    fs.mono = monodromy(model, lambda, tol, tol_edge);
    fs.c = fs.mono.c;
    const Mat2& M = fs.mono.M;
    fs.conditioning_warning =
        std::abs(std::abs(fs.mono.D) - 2.0) <= 10 * tol_edge &&
        fs.mono.structure != Structure::parabolic_diagonalizable &&
        fs.mono.structure != Structure::parabolic_jordan;

    switch (fs.mono.structure) {
        case Structure::hyperbolic: {
            fs.u0_init = normalize_vec(eigenvector(M, fs.mono.mult_minus));
            fs.v0_init = normalize_vec(eigenvector(M, fs.mono.mult_plus));
            fs.real_valued = true;
            break;
        }
        case Structure::elliptic: {
            fs.u0_init = normalize_vec(eigenvector(M, fs.mono.mult_minus));
            fs.v0_init = {std::conj(fs.u0_init[0]), std::conj(fs.u0_init[1])};
            fs.real_valued = false;
            break;
        }
        case Structure::parabolic_diagonalizable: {
            fs.u0_init = {Cplx(1), Cplx(0)};
            fs.v0_init = {Cplx(0), Cplx(1)};
            fs.real_valued = true;
            break;
        }
        case Structure::parabolic_jordan: {
            const double sigma = fs.mono.D >= 0 ? 1.0 : -1.0;
            const Mat2 N{M.m00 - sigma, M.m01, M.m10, M.m11 - sigma};
            const Vec2 Ne1{N.m00, N.m10}, Ne2{N.m01, N.m11};
            const bool use_e2 = norm2(Ne2) >= norm2(Ne1);
            const Vec2 g = use_e2 ? Vec2{0, 1} : Vec2{1, 0};
            const Vec2 Ng = use_e2 ? Ne2 : Ne1;
            const double s = norm2(Ng);
            // M u = sigma u,  M v = sigma v + u  exactly by construction
            fs.u0_init = {Cplx(Ng[0] / s), Cplx(Ng[1] / s)};
            fs.v0_init = {Cplx(g[0] / s), Cplx(g[1] / s)};
            fs.jordan = true;
            fs.real_valued = true;
            break;
        }
    }

    // sample U0 and V0 over one period
    const double a = model.a, w = *model.period;
    fs.sample_x.resize(samples_per_period);
    for (int i = 0; i < samples_per_period; ++i)
        fs.sample_x[i] = a + w * i / (samples_per_period - 1.0);
    const auto Phi = quadode::fundamental_trace(model, lambda, fs.sample_x, tol);
    fs.U0.resize(samples_per_period);
    fs.V0.resize(samples_per_period);
    for (int i = 0; i < samples_per_period; ++i) {
        const double t = (fs.sample_x[i] - a) / w;
        const Cplx ep = std::exp(fs.c * t), em = std::exp(-fs.c * t);
        fs.U0[i] = ep * (Phi[i] * fs.u0_init);
        fs.V0[i] = em * (Phi[i] * fs.v0_init);
        fs.sup_U0 = std::max(fs.sup_U0, norm2(fs.U0[i]));
        fs.sup_V0 = std::max(fs.sup_V0, norm2(fs.V0[i]));
    }
    fs.growth_C = fs.jordan ? fs.sup_U0 + fs.sup_V0 : fs.sup_V0;
    return fs;
}

std::vector<double> cell_energy(const CoefficientModel& model, Vec2c init, double lambda,
                                int n_max, double tol) {
    const auto mono = monodromy(model, lambda);
    if (mono.structure == Structure::hyperbolic)
        throw std::invalid_argument("cell_energy: lambda is in a spectral gap (|D| > 2)");
    return quadode::cell_integrals(model, lambda, init, model.a, *model.period, n_max, tol);
}

}  // namespace hillgap::floquet
