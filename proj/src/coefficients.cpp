#include "hillgap/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hillgap::coefficients {

std::array<double, 3> CoefficientModel::eval_triple(double x) const {
    const double ip = inv_p(x);
    const double qv = q(x);
    const double rv = r(x);
    if (!(ip > 0.0) || !(rv > 0.0))
        throw std::runtime_error("coefficient model: 1/p and r must be positive (x=" +
                                 std::to_string(x) + ")");
    return {ip, qv, rv};
}

BuiltinFamily family_from_name(const std::string& name) {
    if (name == "free") return BuiltinFamily::free;
    if (name == "const_shift") return BuiltinFamily::const_shift;
    if (name == "mathieu") return BuiltinFamily::mathieu;
    if (name == "square_well_pert") return BuiltinFamily::square_well_pert;
    if (name == "exp_decay_pert") return BuiltinFamily::exp_decay_pert;
    if (name == "power_decay_pert") return BuiltinFamily::power_decay_pert;
    if (name == "gauss_pert") return BuiltinFamily::gauss_pert;
    throw std::invalid_argument("unknown coefficient family: " + name);
}

std::string family_name(BuiltinFamily f) {
    switch (f) {
        case BuiltinFamily::free: return "free";
        case BuiltinFamily::const_shift: return "const_shift";
        case BuiltinFamily::mathieu: return "mathieu";
        case BuiltinFamily::square_well_pert: return "square_well_pert";
        case BuiltinFamily::exp_decay_pert: return "exp_decay_pert";
        case BuiltinFamily::power_decay_pert: return "power_decay_pert";
        case BuiltinFamily::gauss_pert: return "gauss_pert";
    }
    return "?";
}

static void require_params(const std::vector<double>& p, size_t n, const char* what) {
    if (p.size() != n)
        throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(n) +
                                    " parameter(s), got " + std::to_string(p.size()));
}

CoefficientModel make_builtin(BuiltinFamily f, const std::vector<double>& params) {
    CoefficientModel m;
    m.family = family_name(f);
    m.params = params;
    m.inv_p = [](double) { return 1.0; };
    m.r = [](double) { return 1.0; };
    switch (f) {
        case BuiltinFamily::free: {
            require_params(params, 1, "free");
            if (!(params[0] > 0)) throw std::invalid_argument("free: omega must be positive");
            m.q = [](double) { return 0.0; };
            m.period = params[0];
            return m;
        }
        case BuiltinFamily::const_shift: {
            require_params(params, 2, "const_shift");
            if (!(params[1] > 0)) throw std::invalid_argument("const_shift: omega must be positive");
            const double shift = params[0];
            m.q = [shift](double) { return shift; };
            m.period = params[1];
            return m;
        }
        case BuiltinFamily::mathieu: {
            require_params(params, 1, "mathieu");
            const double gamma = params[0];
            m.q = [gamma](double x) { return 2.0 * gamma * std::cos(2.0 * x); };
            m.period = std::acos(-1.0);
            return m;
        }
        default:
            throw std::invalid_argument(family_name(f) +
                                        " is a perturbation family; pass the base model");
    }
}

CoefficientModel make_builtin(BuiltinFamily f, const CoefficientModel& base,
                              const std::vector<double>& params) {
    CoefficientModel m;
    m.family = family_name(f);
    m.params = params;
    m.a = base.a;
    m.period = std::nullopt;
    m.breakpoints = base.breakpoints;
    m.smoothness = base.smoothness;
    const double a = base.a;
    const auto bq = base.q;
    m.inv_p = base.inv_p;
    m.r = base.r;
    switch (f) {
        case BuiltinFamily::square_well_pert: {
            require_params(params, 3, "square_well_pert");
            const double depth = params[0], width = params[1], x0 = params[2];
            if (!(width > 0)) throw std::invalid_argument("square_well_pert: width must be positive");
            m.q = [bq, depth, width, x0](double x) {
                return bq(x) + ((x >= x0 && x < x0 + width) ? depth : 0.0);
            };
            m.breakpoints.push_back(x0);
            m.breakpoints.push_back(x0 + width);
            std::sort(m.breakpoints.begin(), m.breakpoints.end());
            m.smoothness = Smoothness::piecewise;
            return m;
        }
        case BuiltinFamily::exp_decay_pert: {
            if (params.size() != 2 && params.size() != 4)
                throw std::invalid_argument("exp_decay_pert: expected {amplitude, rate} or "
                                            "{amp_q, rate, amp_r, amp_inv_p}");
            const double amp_q = params[0], rate = params[1];
            const double amp_r = params.size() == 4 ? params[2] : 0.0;
            const double amp_ip = params.size() == 4 ? params[3] : 0.0;
            if (!(rate > 0)) throw std::invalid_argument("exp_decay_pert: rate must be positive");
            if (std::abs(amp_r) >= 1.0 || std::abs(amp_ip) >= 1.0)
                throw std::invalid_argument("exp_decay_pert: non-positive weight parameter "
                                            "(|amp_r|, |amp_inv_p| must stay below 1)");
            m.q = [bq, amp_q, rate, a](double x) { return bq(x) + amp_q * std::exp(-rate * std::abs(x - a)); };
            if (amp_r != 0.0) {
                const auto br = base.r;
                m.r = [br, amp_r, rate, a](double x) { return br(x) + amp_r * std::exp(-rate * std::abs(x - a)); };
            }
            if (amp_ip != 0.0) {
                const auto bip = base.inv_p;
                m.inv_p = [bip, amp_ip, rate, a](double x) { return bip(x) + amp_ip * std::exp(-rate * std::abs(x - a)); };
            }
            return m;
        }
        case BuiltinFamily::power_decay_pert: {
            require_params(params, 2, "power_decay_pert");
            const double amp = params[0], s = params[1];
            if (!(s > 0)) throw std::invalid_argument("power_decay_pert: exponent must be positive");
            m.q = [bq, amp, s, a](double x) { return bq(x) + amp * std::pow(1.0 + std::abs(x - a), -s); };
            return m;
        }
        case BuiltinFamily::gauss_pert: {
            require_params(params, 2, "gauss_pert");
            const double amp = params[0], beta = params[1];
            if (!(beta > 0)) throw std::invalid_argument("gauss_pert: beta must be positive");
            m.q = [bq, amp, beta, a](double x) { return bq(x) + amp * std::exp(-beta * (x - a) * (x - a)); };
            return m;
        }
        default:
            throw std::invalid_argument(family_name(f) + " is a base family; no base argument expected");
    }
}

std::array<double, 3> PerturbedPair::delta(double x) const {
    return {pert.inv_p(x) - base.inv_p(x), pert.q(x) - base.q(x), pert.r(x) - base.r(x)};
}

std::vector<double> PerturbedPair::breakpoints_in(double lo, double hi) const {
    std::vector<double> bp;
    for (double b : base.breakpoints)
        if (b > lo && b < hi) bp.push_back(b);
    for (double b : pert.breakpoints)
        if (b > lo && b < hi) bp.push_back(b);
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end(),
                         [](double x, double y) { return std::abs(x - y) < 1e-14; }),
             bp.end());
    return bp;
}

// ---- analytic moment tails per family ------------------------------------

// int_X^inf exp(-rho*(t-a)) t^k dt  (X >= max(a,0))
static double exp_tail(double rho, double a, int k, double X) {
    const double e = std::exp(-rho * (X - a));
    switch (k) {
        case 0: return e / rho;
        case 1: return e * (X / rho + 1.0 / (rho * rho));
        default: return e * (X * X / rho + 2.0 * X / (rho * rho) + 2.0 / (rho * rho * rho));
    }
}

// int_X^inf exp(-beta*(t-a)^2) t^k dt
static double gauss_tail(double beta, double a, int k, double X) {
    const double Y = X - a;
    const double sq = std::sqrt(beta);
    const double I0 = 0.5 * std::sqrt(std::acos(-1.0) / beta) * std::erfc(sq * Y);
    if (k == 0) return I0;
    const double I1 = std::exp(-beta * Y * Y) / (2.0 * beta);
    if (k == 1) return I1 + std::abs(a) * I0;
    const double I2 = Y * std::exp(-beta * Y * Y) / (2.0 * beta) + I0 / (2.0 * beta);
    return I2 + 2.0 * std::abs(a) * I1 + a * a * I0;
}

// int_X^inf (1+t-a)^(-s) t^k dt; infinite when s <= k+1
static double power_tail(double s, double a, int k, double X) {
    if (s <= k + 1.0) return std::numeric_limits<double>::infinity();
    const double Y = 1.0 + X - a;
    auto J = [&](int mexp) { return std::pow(Y, mexp - s + 1.0) / (s - mexp - 1.0); };
    const double c = a - 1.0;
    switch (k) {
        case 0: return J(0);
        case 1: return J(1) + std::abs(c) * J(0);
        default: return J(2) + 2.0 * std::abs(c) * J(1) + c * c * J(0);
    }
}

// |t|^k integrated over [lo, hi] assuming lo >= 0
static double poly_weight_integral(int k, double lo, double hi) {
    switch (k) {
        case 0: return hi - lo;
        case 1: return 0.5 * (hi * hi - lo * lo);
        default: return (hi * hi * hi - lo * lo * lo) / 3.0;
    }
}

std::optional<double> PerturbedPair::tail(int k, double X) const {
    if (pert.family.empty()) return std::nullopt;
    const auto& p = pert.params;
    const double a = pert.a;
    if (X < std::max(a, 0.0)) X = std::max(a, 0.0);
    if (pert.family == "square_well_pert") {
        const double depth = p[0], width = p[1], x0 = p[2];
        const double hi = x0 + width;
        if (X >= hi) return 0.0;
        return std::abs(depth) * poly_weight_integral(k, std::max(X, x0), hi);
    }
    if (pert.family == "exp_decay_pert") {
        const double rate = p[1];
        double amps = std::abs(p[0]);
        if (p.size() == 4) amps += std::abs(p[2]) + std::abs(p[3]);
        return amps * exp_tail(rate, a, k, X);
    }
    if (pert.family == "power_decay_pert") {
        return std::abs(p[0]) * power_tail(p[1], a, k, X);
    }
    if (pert.family == "gauss_pert") {
        return std::abs(p[0]) * gauss_tail(p[1], a, k, X);
    }
    if (pert.family == base.family && pert.params == base.params) return 0.0;
    return std::nullopt;
}

PerturbedPair make_pair(const CoefficientModel& base, BuiltinFamily pert_family,
                        const std::vector<double>& params, int moment_class) {
    if (!base.period)
        throw std::invalid_argument("make_pair: base model must be periodic");
    if (moment_class < 0 || moment_class > 2)
        throw std::invalid_argument("make_pair: moment class must be 0, 1 or 2");
    PerturbedPair pair;
    pair.base = base;
    pair.pert = make_builtin(pert_family, base, params);
    pair.moment_class = moment_class;
    return pair;
}

PerturbedPair make_identity_pair(const CoefficientModel& base, int moment_class) {
    PerturbedPair pair;
    pair.base = base;
    pair.pert = base;
    pair.moment_class = moment_class;
    return pair;
}

// ---- quadrature -----------------------------------------------------------

namespace {

double simpson(double lo, double hi, double flo, double fmid, double fhi) {
    return (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
}

double adapt(const std::function<double(double)>& f, double lo, double mid, double hi,
             double flo, double fmid, double fhi, double whole, double tol, int depth) {
    const double lm = 0.5 * (lo + mid), mh = 0.5 * (mid + hi);
    const double flm = f(lm), fmh = f(mh);
    const double left = simpson(lo, mid, flo, flm, fmid);
    const double right = simpson(mid, hi, fmid, fmh, fhi);
    const double err = left + right - whole;
    if (depth <= 0 || std::abs(err) <= 15.0 * tol) return left + right + err / 15.0;
    return adapt(f, lo, lm, mid, flo, flm, fmid, left, 0.5 * tol, depth - 1) +
           adapt(f, mid, mh, hi, fmid, fmh, fhi, right, 0.5 * tol, depth - 1);
}

double integrate_segment(const std::function<double(double)>& f, double lo, double hi, double tol) {
    if (hi <= lo) return 0.0;
    const double mid = 0.5 * (lo + hi);
    const double flo = f(lo), fmid = f(mid), fhi = f(hi);
    const double whole = simpson(lo, hi, flo, fmid, fhi);
    return adapt(f, lo, mid, hi, flo, fmid, fhi, whole, tol, 40);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double lo, double hi,
                          const std::vector<double>& breakpoints, double rel_tol) {
    if (hi <= lo) return 0.0;
    std::vector<double> cuts{lo};
    for (double b : breakpoints)
        if (b > lo && b < hi) cuts.push_back(b);
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    // also split long ranges so the initial Simpson sees structure
    std::vector<double> pts;
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double len = cuts[i + 1] - cuts[i];
        const int n = std::max(1, static_cast<int>(std::ceil(len / 2.0)));
        for (int j = 0; j < n; ++j) pts.push_back(cuts[i] + len * j / n);
    }
    pts.push_back(hi);
    double total = 0.0;
    const double tol = rel_tol * std::max(1.0, hi - lo);
    for (size_t i = 0; i + 1 < pts.size(); ++i)
        total += integrate_segment(f, pts[i], pts[i + 1], tol / static_cast<double>(pts.size()));
    return total;
}

MomentResult moment_norm(const PerturbedPair& pair, int k, double X) {
    if (k < 0 || k > 2) throw std::invalid_argument("moment_norm: k must be 0, 1 or 2");
    const double a = pair.base.a;
    if (!(X > a)) throw std::invalid_argument("moment_norm: X must exceed the domain start");
    auto integrand = [&pair, k](double t) {
        const auto d = pair.delta(t);
        const double w = k == 0 ? 1.0 : (k == 1 ? std::abs(t) : t * t);
        return (std::abs(d[0]) + std::abs(d[1]) + std::abs(d[2])) * w;
    };
    MomentResult res;
    res.value = integrate_adaptive(integrand, a, X, pair.breakpoints_in(a, X));
    if (auto t = pair.tail(k, X)) {
        res.tail_known = true;
        res.tail = *t;
        if (std::isinf(*t)) res.divergent = true;
    }
    if (!res.divergent) {
        // Cauchy test over doubling windows, independent of X. Only the last
        // ratios count: early windows are pre-asymptotic for slow decay.
        const double w0 = std::max(1.0, a + 1.0);
        const double scale = std::max(res.value, 1e-12);
        std::vector<double> windows;
        for (int j = 0; j < 8; ++j) {
            const double lo = w0 * std::pow(2.0, j), hi = w0 * std::pow(2.0, j + 1);
            windows.push_back(
                integrate_adaptive(integrand, lo, hi, pair.breakpoints_in(lo, hi), 1e-7));
        }
        int bad = 0;
        for (size_t j = windows.size() - 3; j < windows.size(); ++j)
            if (windows[j] > 1e-10 * scale && windows[j] > 0.9 * windows[j - 1]) ++bad;
        if (bad >= 2) res.divergent = true;
    }
    return res;
}

}  // namespace hillgap::coefficients
