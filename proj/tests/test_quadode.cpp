#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hillgap/quadode.hpp"
#include "reference_rk4.hpp"

using namespace hillgap;
using namespace hillgap::quadode;
using coefficients::BuiltinFamily;
using coefficients::make_builtin;

static const double kPi = std::acos(-1.0);

TEST_CASE("free propagation matches closed forms") {
    const auto free_model = make_builtin(BuiltinFamily::free, {kPi});

    // lambda = 0: u(x) = x from (0,1)
    auto s = propagate_state(free_model, 0.0, {0, 1, 0}, 1.0);
    CHECK(s.u == doctest::Approx(1.0).epsilon(1e-11));
    CHECK(s.pu == doctest::Approx(1.0).epsilon(1e-11));

    // lambda = -1: u = e^{-x} from (1,-1)
    s = propagate_state(free_model, -1.0, {1, -1, 0}, 1.0);
    CHECK(s.u == doctest::Approx(std::exp(-1.0)).epsilon(1e-11));
    CHECK(s.pu == doctest::Approx(-std::exp(-1.0)).epsilon(1e-11));
}

TEST_CASE("mathieu propagation agrees with a tighter-tolerance reference run") {
    const auto mathieu = make_builtin(BuiltinFamily::mathieu, {1.0});
    const double tol = 1e-8;
    const auto s = propagate_state(mathieu, 0.0, {1, 0, 0}, kPi, tol);
    const auto ref = propagate_state(mathieu, 0.0, {1, 0, 0}, kPi, tol / 100);
    CHECK(s.u == doctest::Approx(ref.u).epsilon(tol));
    CHECK(s.pu == doctest::Approx(ref.pu).epsilon(tol));

    // and against the independent fixed-step RK4 oracle
    const auto rk4 = testref::rk4_propagate(mathieu, 0.0, {1, 0}, 0.0, kPi, 20000);
    CHECK(s.u == doctest::Approx(rk4[0]).epsilon(1e-8));
    CHECK(s.pu == doctest::Approx(rk4[1]).epsilon(1e-8));
}

TEST_CASE("transfer matrices: free closed forms") {
    const auto free_model = make_builtin(BuiltinFamily::free, {kPi});

    auto T = transfer_matrix(free_model, 0.0, 0.0, 1.0);
    CHECK(T.m.m00 == doctest::Approx(1.0).epsilon(1e-11));
    CHECK(T.m.m01 == doctest::Approx(1.0).epsilon(1e-11));
    CHECK(T.m.m10 == doctest::Approx(0.0).epsilon(1e-11));
    CHECK(T.m.m11 == doctest::Approx(1.0).epsilon(1e-11));

    // lambda = 1 over [0, pi]: rotation by pi
    T = transfer_matrix(free_model, 1.0, 0.0, kPi);
    CHECK(T.m.m00 == doctest::Approx(-1.0).epsilon(1e-11));
    CHECK(std::abs(T.m.m01) < 1e-10);
    CHECK(std::abs(T.m.m10) < 1e-10);
    CHECK(T.m.m11 == doctest::Approx(-1.0).epsilon(1e-11));
}

TEST_CASE("det = 1 and composition law over random families, lambdas, intervals") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> lam(-5.0, 25.0);
    std::uniform_real_distribution<double> xd(-3.0, 8.0);
    // interval length capped: |det - 1| of a hyperbolic transfer cannot beat
    // the ||M||^2 * eps cancellation floor, so the invariant is checked where
    // ||M|| stays moderate
    std::uniform_real_distribution<double> len(0.2, 2.5);

    const auto base = make_builtin(BuiltinFamily::mathieu, {1.0});
    const auto models = {
        make_builtin(BuiltinFamily::free, {1.0}),
        base,
        make_builtin(BuiltinFamily::square_well_pert, base, {-2.0, 2.0, 1.0}),
        make_builtin(BuiltinFamily::exp_decay_pert, base, {1.5, 0.7}),
    };
    for (const auto& m : models) {
        for (int rep = 0; rep < 25; ++rep) {
            const double l = lam(rng);
            const double x0 = xd(rng);
            const double x2 = x0 + len(rng);
            const double x1 = 0.5 * (x0 + x2);

            const auto T02 = transfer_matrix(m, l, x0, x2);
            CHECK(std::abs(T02.m.det() - 1.0) < 1e-9);

            const auto T01 = transfer_matrix(m, l, x0, x1);
            const auto T12 = transfer_matrix(m, l, x1, x2);
            const Mat2 comp = T12.m * T01.m;
            CHECK((comp - T02.m).norm() < 1e-8 * std::max(1.0, T02.m.norm()));
        }
    }
}

TEST_CASE("wronskian basics and constancy along propagated solutions") {
    // (cos x, -sin x) and (sin x, cos x) at any x: W = 1
    StateVector s1{std::cos(0.4), -std::sin(0.4), 0.4};
    StateVector s2{std::sin(0.4), std::cos(0.4), 0.4};
    CHECK(wronskian(s1, s2) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(wronskian(s1, s1) == 0.0);
    CHECK_THROWS_AS(wronskian(s1, StateVector{1, 0, 0.5}), std::invalid_argument);

    const auto mathieu = make_builtin(BuiltinFamily::mathieu, {1.0});
    const double lambda = 0.37;
    StateVector a1{1, 0.25, 0}, a2{-0.5, 2, 0};
    const double w0 = wronskian(a1, a2);
    for (double x : {1.0, 3.5, 5.0, 8.7}) {
        const auto b1 = propagate_state(mathieu, lambda, a1, x);
        const auto b2 = propagate_state(mathieu, lambda, a2, x);
        CHECK(wronskian(b1, b2) == doctest::Approx(w0).epsilon(1e-9));
    }
}

TEST_CASE("propagation across declared breakpoints stays accurate") {
    // -u'' + dq*chi_[1,3) u = lambda u with a well; compare against piecing
    // together closed forms on each smooth segment (lambda - q constant).
    const auto base = make_builtin(BuiltinFamily::free, {kPi});
    const auto well = make_builtin(BuiltinFamily::square_well_pert, base, {-2.0, 2.0, 1.0});
    const double lambda = -1.0;  // u'' = (q - lambda) u

    auto advance = [](std::array<double, 2> y, double k2, double len) {
        // solves u'' = k2 u over len
        std::array<double, 2> out;
        if (k2 >= 0) {
            const double k = std::sqrt(k2);
            const double ch = std::cosh(k * len), sh = std::sinh(k * len);
            out[0] = y[0] * ch + (k > 0 ? y[1] * sh / k : y[1] * len);
            out[1] = y[0] * k * sh + y[1] * ch;
        } else {
            const double k = std::sqrt(-k2);
            const double c = std::cos(k * len), s = std::sin(k * len);
            out[0] = y[0] * c + y[1] * s / k;
            out[1] = -y[0] * k * s + y[1] * c;
        }
        return out;
    };
    std::array<double, 2> y{1.0, 0.5};
    y = advance(y, 0.0 - lambda, 1.0);    // [0,1]: q=0
    y = advance(y, -2.0 - lambda, 2.0);   // [1,3): q=-2
    y = advance(y, 0.0 - lambda, 1.5);    // [3,4.5]
    const auto s = propagate_state(well, lambda, {1.0, 0.5, 0.0}, 4.5);
    CHECK(s.u == doctest::Approx(y[0]).epsilon(1e-10));
    CHECK(s.pu == doctest::Approx(y[1]).epsilon(1e-10));
}

TEST_CASE("cell integrals: free lambda=1 gives pi/2 per cell for sin and cos") {
    const auto free_model = make_builtin(BuiltinFamily::free, {kPi});
    const auto sin_cells = cell_integrals(free_model, 1.0, {Cplx(0), Cplx(1)}, 0.0, kPi, 5);
    const auto cos_cells = cell_integrals(free_model, 1.0, {Cplx(1), Cplx(0)}, 0.0, kPi, 5);
    for (int n = 0; n < 5; ++n) {
        CHECK(sin_cells[n] == doctest::Approx(kPi / 2).epsilon(1e-9));
        CHECK(cos_cells[n] == doctest::Approx(kPi / 2).epsilon(1e-9));
    }
}

TEST_CASE("propagation rejects bad tolerance and reports NaN-poisoned models") {
    const auto free_model = make_builtin(BuiltinFamily::free, {kPi});
    CHECK_THROWS_AS(propagate_state(free_model, 0.0, {1, 0, 0}, 1.0, -1.0),
                    std::invalid_argument);

    auto bad = free_model;
    bad.q = [](double x) { return x > 0.5 ? std::nan("") : 0.0; };
    CHECK_THROWS_AS(propagate_state(bad, 0.0, {1, 0, 0}, 1.0), std::runtime_error);
}
