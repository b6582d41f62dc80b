#include "hillgap/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace hillgap::oracle {

namespace {

struct Coeffs {
    std::function<double(double)> inv_p, q, r;
    std::vector<double> breakpoints;
};

Coeffs coeffs_of(const CoefficientModel& m) {
    return {m.inv_p, m.q, m.r, m.breakpoints};
}

// side-averaged node value for a quantity with a possible jump at the node
double cell_average(const std::function<double(double)>& f, double x, double hl, double hr) {
    const double eps = 1e-9 * (1.0 + std::abs(x));
    const double left = f(x - eps), right = f(x + eps);
    return (left * hl + right * hr) / (hl + hr);
}

TridiagonalPencil discretize_impl(const Coeffs& c, std::array<double, 2> interval, int N,
                                  double alpha) {
    if (N < 16) throw std::invalid_argument("discretize: N must be at least 16");
    const double lo = interval[0], hi = interval[1];
    if (!(hi > lo)) throw std::invalid_argument("discretize: empty interval");
    const double pi = std::acos(-1.0);
    alpha = alpha - pi * std::floor(alpha / pi);
    const bool robin_left = std::abs(std::sin(alpha)) > 1e-12;

    TridiagonalPencil p;
    p.domain = interval;
    p.alpha = alpha;

    // unknowns: Dirichlet left drops the boundary node, the alpha condition
    // keeps it (one-sided flux balance in row 0); right end is Dirichlet
    const int n = N;
    p.h = robin_left ? (hi - lo) / n : (hi - lo) / (n + 1);
    p.nodes.resize(n);
    for (int i = 0; i < n; ++i) p.nodes[i] = robin_left ? lo + i * p.h : lo + (i + 1) * p.h;

    // snap the nearest node onto each interior breakpoint
    for (double b : c.breakpoints) {
        if (b <= lo + 0.5 * p.h || b >= hi - 0.5 * p.h) continue;
        const auto it = std::min_element(p.nodes.begin(), p.nodes.end(), [&](double x, double y) {
            return std::abs(x - b) < std::abs(y - b);
        });
        if (robin_left && it == p.nodes.begin()) continue;  // keep the boundary node put
        *it = b;
    }
    for (int i = 0; i + 1 < n; ++i)
        if (!(p.nodes[i + 1] - p.nodes[i] > 0.25 * p.h))
            throw std::invalid_argument(
                "discretize: breakpoints too close to resolve at this N; increase N");

    p.diag.assign(n, 0.0);
    p.offdiag.assign(n - 1, 0.0);
    p.weight_diag.assign(n, 0.0);

    auto p_mid = [&](double xa, double xb) { return 1.0 / c.inv_p(0.5 * (xa + xb)); };

    for (int i = 0; i < n; ++i) {
        const double x = p.nodes[i];
        if (i == 0 && robin_left) {
            // flux balance over [lo, (lo + x_1)/2] with (p u')(lo) = -cot(a) u(lo)
            const double xr = p.nodes[1];
            const double hr = xr - x;
            const double pr = p_mid(x, xr);
            const double cell = 0.5 * hr;
            const double eps = 1e-9 * (1.0 + std::abs(x));
            p.diag[i] = pr / hr - std::cos(alpha) / std::sin(alpha) + cell * c.q(x + eps);
            p.offdiag[i] = -pr / hr;
            p.weight_diag[i] = cell * c.r(x + eps);
            continue;
        }
        const double xl = i == 0 ? lo : p.nodes[i - 1];
        const double xr = i == n - 1 ? hi : p.nodes[i + 1];
        const double hl = x - xl, hr = xr - x;
        const double qv = cell_average(c.q, x, hl, hr);
        const double rv = cell_average(c.r, x, hl, hr);
        const double pl = p_mid(xl, x);
        const double pr = p_mid(x, xr);
        const double cell = 0.5 * (hl + hr);
        p.diag[i] = pl / hl + pr / hr + cell * qv;
        if (i + 1 < n) p.offdiag[i] = -pr / hr;
        p.weight_diag[i] = cell * rv;
        if (!(p.weight_diag[i] > 0))
            throw std::runtime_error("discretize: nonpositive weight encountered");
    }
    return p;
}

}  // namespace

TridiagonalPencil discretize(const CoefficientModel& model, std::array<double, 2> interval,
                             int N, double alpha) {
    return discretize_impl(coeffs_of(model), interval, N, alpha);
}

TridiagonalPencil discretize(const PerturbedPair& pair, std::array<double, 2> interval, int N,
                             double alpha) {
    auto c = coeffs_of(pair.pert);
    for (double b : pair.base.breakpoints) c.breakpoints.push_back(b);
    std::sort(c.breakpoints.begin(), c.breakpoints.end());
    return discretize_impl(c, interval, N, alpha);
}

int sturm_count(const TridiagonalPencil& pencil, double lambda) {
    const int n = pencil.size();
    int count = 0;
    double d_prev = 1.0;
    double scale = 0.0;
    for (int i = 0; i < n; ++i)
        scale = std::max(scale,
                         std::abs(pencil.diag[i]) + std::abs(lambda) * pencil.weight_diag[i]);
    const double tiny = 1e-300 + 1e-20 * scale;
    for (int i = 0; i < n; ++i) {
        double d = pencil.diag[i] - lambda * pencil.weight_diag[i];
        if (i > 0) d -= pencil.offdiag[i - 1] * pencil.offdiag[i - 1] / d_prev;
        if (d == 0.0) d = -tiny;  // exact zero pivot: nudge, counts as below
        if (d < 0) ++count;
        d_prev = d;
    }
    return count;
}

std::vector<double> eigenvalues_in(const TridiagonalPencil& pencil, double lo, double hi,
                                   double tol, par::Exec mode) {
    const int n_lo = sturm_count(pencil, lo);
    const int n_hi = sturm_count(pencil, hi);
    std::vector<double> out(std::max(0, n_hi - n_lo));
    par::for_n(mode, n_hi - n_lo, [&](int k) {
        const int idx = n_lo + k;  // locating the (idx+1)-th pencil eigenvalue
        double a = lo, b = hi;
        for (int it = 0; it < 200 && b - a > tol; ++it) {
            const double mid = 0.5 * (a + b);
            if (sturm_count(pencil, mid) <= idx)
                a = mid;
            else
                b = mid;
        }
        out[k] = 0.5 * (a + b);
    });
    std::sort(out.begin(), out.end());
    return out;
}

OracleReport oracle_gap_eigenvalues(const PerturbedPair& pair, std::array<double, 2> gap,
                                    double L, int N, bool full_line, double alpha,
                                    par::Exec mode) {
    OracleReport rep;
    rep.gap = gap;
    rep.L = L;
    rep.N = N;
    if (!(gap[1] - gap[0] > 1e-8))
        throw std::invalid_argument("oracle_gap_eigenvalues: closed gap (empty interior)");
    const double a = pair.base.a;

    auto run = [&](double Lrun, int Nrun) {
        const std::array<double, 2> dom =
            full_line ? std::array<double, 2>{a - Lrun, a + Lrun}
                      : std::array<double, 2>{a, a + Lrun};
        const auto pencil = discretize(pair, dom, Nrun, full_line ? 0.0 : alpha);
        return eigenvalues_in(pencil, gap[0], gap[1], 1e-10, mode);
    };

    const auto evs_A = run(L, N);          // base resolution
    const auto evs_B = run(2 * L, 2 * N);  // doubled domain, same h
    const auto evs_C = run(2 * L, 4 * N);  // doubled domain, refined mesh

    auto nearest = [](const std::vector<double>& v, double x) {
        double best = 1e300;
        for (double e : v) best = std::min(best, std::abs(e - x));
        return best;
    };

    bool all_h_stable = true;
    for (double e : evs_B) {
        if (nearest(evs_A, e) > 1e-3) {
            rep.discarded_artifacts.push_back(e);
            continue;
        }
        double partner = e;
        double dist = 1e300;
        for (double ec : evs_C)
            if (std::abs(ec - e) < dist) {
                dist = std::abs(ec - e);
                partner = ec;
            }
        if (dist > 1e-4) all_h_stable = false;
        rep.eigenvalues.push_back(partner + (partner - e) / 3.0);  // O(h^2) Richardson
    }
    std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end());
    rep.count = static_cast<int>(rep.eigenvalues.size());
    rep.stable = all_h_stable &&
                 evs_B.size() == rep.eigenvalues.size() + rep.discarded_artifacts.size() &&
                 evs_A.size() == rep.eigenvalues.size();
    return rep;
}

}  // namespace hillgap::oracle
