#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "consfd/problems/catalog.hpp"
#include "consfd/scheme.hpp"
#include "helpers.hpp"

using namespace consfd;
using namespace consfd::testing;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("pendulum scalar residual matches the closed form") {
    auto p = problems::instantiate("pendulum");
    // theta = (0.3, 0.2, 0.1), tau = 0.1: second difference cancels and the
    // cosine difference quotient is the whole residual. Reference value from
    // an independent 40-digit evaluation of the printed formula.
    StateHolder s = ode3(0.1, {0.3}, {0.2}, {0.1});
    scheme::GuardContext guard;
    double r = scheme::assemble_scalar_residual(*p, s.view(), guard);
    CHECK_THAT(r, WithinAbs(0.1983383807620987322663, 1e-14));
    SmallVec rv = scheme::residual(*p, s.view(), guard);
    CHECK_THAT(rv[0], WithinAbs(0.1983383807620987322663, 1e-14));
}

TEST_CASE("pendulum singular point takes the zero-compatible limit") {
    auto p = problems::instantiate("pendulum");
    double z = 0.7, tau = 0.1;

    SECTION("limit value at theta_k = z is sin z") {
        StateHolder s = ode3(tau, {z}, {z}, {z});
        scheme::GuardContext guard;
        scheme::Diagnostics diag;
        double r = scheme::assemble_scalar_residual(*p, s.view(), guard, &diag);
        CHECK(diag.limit_branch_taken);
        CHECK_THAT(r, WithinAbs(std::sin(z), 1e-15));
        SmallVec rs = scheme::residual(*p, s.view(), guard);  // closed-form route
        CHECK_THAT(rs[0], WithinAbs(std::sin(z), 1e-15));
    }

    SECTION("limit value with theta_k off z") {
        StateHolder s = ode3(tau, {z}, {0.65}, {z});
        scheme::GuardContext guard;
        double r = scheme::assemble_scalar_residual(*p, s.view(), guard);
        CHECK_THAT(r, WithinAbs(10.64421768723769105367, 1e-11));
    }

    SECTION("cross-check by extrapolation through the singularity") {
        StateHolder s = ode3(tau, {z}, {0.65}, {z});
        scheme::GuardContext guard;
        double limit = scheme::assemble_scalar_residual(*p, s.view(), guard);
        for (double eps : {1e-6, -1e-6}) {
            StateHolder s2 = ode3(tau, {z + eps}, {0.65}, {z});
            double r = scheme::assemble_scalar_residual(*p, s2.view(), guard);
            CHECK_THAT(r, WithinAbs(limit, 1e-3));
        }
    }
}

TEST_CASE("zero-compatible continuity near the pendulum multiplier zero") {
    auto p = problems::instantiate("pendulum");
    double z = 0.7, tau = 0.1;
    scheme::GuardContext guard;
    StateHolder sz = ode3(tau, {z}, {0.62}, {z});
    double limit = scheme::assemble_scalar_residual(*p, sz.view(), guard);
    // |F(z +- eps) - F_limit(z)| <= C eps across ten decades; C covers the
    // residual's theta_{k+1} derivative (dominated by 1/tau^2).
    double C = 500.0;
    for (double eps = 1e-10; eps <= 1.0001e-4; eps *= 10.0) {
        for (double sgn : {1.0, -1.0}) {
            StateHolder s = ode3(tau, {z + sgn * eps}, {0.62}, {z});
            double r = scheme::assemble_scalar_residual(*p, s.view(), guard);
            INFO("eps " << sgn * eps);
            CHECK(std::abs(r - limit) <= C * eps);
        }
    }
}

TEST_CASE("unguarded singular multiplier is an error") {
    // Burgers p=2 has a vanishing time-averaged power sum on sign flips and
    // carries no limit form.
    auto p = problems::instantiate("burgers", Params{{"p", 2.0}});
    StateHolder s = pde1(0.1, 0.5, 4, 1, {1.0, 1.0, 1.0, 1.0}, {-1.0, -1.0, -1.0, -1.0});
    scheme::GuardContext guard;
    guard.observe(1.0);
    CHECK_THROWS_AS(scheme::assemble_scalar_residual(*p, s.view({1, 0}), guard),
                    SingularMultiplierError);
}

TEST_CASE("factored oscillator residual equals the factored form at multiplier zeros") {
    auto p = problems::instantiate("factored_oscillator", Params{{"m", 1.0}, {"k", 0.0}});
    // k = 0: residual is the plain second difference regardless of lambda.
    double tau = 0.25;
    StateHolder s = ode3(tau, {1.0}, {0.6}, {1.0});  // x_{k+1} = x_{k-1}: lambda = 0
    scheme::GuardContext guard;
    scheme::Diagnostics diag;
    double r = scheme::assemble_scalar_residual(*p, s.view(), guard, &diag);
    CHECK(diag.limit_branch_taken);
    CHECK_THAT(r, WithinAbs((1.0 - 1.2 + 1.0) / (tau * tau), 1e-12));

    auto p5 = problems::instantiate("factored_oscillator", Params{{"m", 1.0}, {"k", 5.0}});
    StateHolder s2 = ode3(tau, {0.8}, {0.6}, {0.4});
    SmallVec rv = scheme::residual(*p5, s2.view(), guard);
    double expected = (0.8 - 1.2 + 0.4) / (tau * tau) + 5.0 * (0.8 + 1.2 + 0.4) / 4.0;
    CHECK_THAT(rv[0], WithinRel(expected, 1e-14));
}

TEST_CASE("two-body system assembly") {
    auto p = problems::instantiate("two_body");
    SECTION("constant equal states give the zero vector") {
        StateHolder s = ode3(0.1, {0.7, 0.7}, {0.7, 0.7}, {0.7, 0.7});
        // Lambda rows become (1,1),(0,0): singular; the simplified route is
        // the defined value and gives exactly zero.
        scheme::GuardContext guard;
        SmallVec r = scheme::residual(*p, s.view(), guard);
        CHECK(r[0] == 0.0);
        CHECK(r[1] == 0.0);
    }
    SECTION("factorized route equals the LU route away from the singular set") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> d(-1.0, 1.0);
        for (int trial = 0; trial < 100; ++trial) {
            StateHolder s = ode3(0.05, {d(rng), d(rng)}, {d(rng), d(rng)}, {d(rng), d(rng)});
            scheme::GuardContext guard;
            SmallVec lam_route, closed;
            try {
                lam_route = scheme::assemble_system_residual(*p, s.view(), guard);
            } catch (const SingularMultiplierError&) {
                continue;
            }
            p->simplified_residual(s.view(), closed);
            for (int c = 0; c < 2; ++c)
                CHECK_THAT(lam_route[c], WithinAbs(closed[c], 1e-9 * (1.0 + std::abs(closed[c]))));
        }
    }
}

TEST_CASE("shallow water constant state gives zero residual") {
    auto p = problems::instantiate("shallow_water");
    std::size_t npts = 16;
    std::vector<double> level(3 * npts);
    for (std::size_t q = 0; q < npts; ++q) {
        level[q] = 0.4;              // u
        level[npts + q] = -0.3;      // v
        level[2 * npts + q] = 1.2;   // eta > 0
    }
    StateHolder s = pde2(0.05, 0.25, 4, 4, 3, level, level);
    scheme::GuardContext guard;
    scheme::Diagnostics diag;
    SmallVec r = scheme::assemble_system_residual(*p, s.view({1, 1}), guard, &diag);
    for (int c = 0; c < 3; ++c) CHECK_THAT(r[c], WithinAbs(0.0, 1e-14));
    CHECK(diag.multiplier_inverse_norm < 10.0);
}

TEST_CASE("lorenz midpoint scheme value and the singular diagonal") {
    auto p = problems::instantiate("lorenz", Params{{"sigma", 1.0}, {"r", 1.0}});
    StateHolder s = ode2(1.0, {1.0, 0.0, 0.0}, {1.0, 0.0, 0.0});
    scheme::GuardContext guard;

    // Printed midpoint scheme: (0, -1, 0) by direct substitution.
    SmallVec r = scheme::residual(*p, s.view(), guard);
    CHECK_THAT(r[0], WithinAbs(0.0, 1e-15));
    CHECK_THAT(r[1], WithinAbs(-1.0, 1e-15));
    CHECK_THAT(r[2], WithinAbs(0.0, 1e-15));

    // The generic route hits the singular diagonal (y-average is zero) and
    // must reject rather than limit-evaluate.
    guard.observe(1.0);
    CHECK_THROWS_AS(scheme::assemble_rectangular_residual(*p, s.view(), guard),
                    SingularMultiplierError);
}

TEST_CASE("lotka-volterra rectangular assembly") {
    SECTION("G component at the second-equation equilibrium") {
        auto p = problems::instantiate("lotka_volterra");
        StateHolder s = ode2(0.3, {1.0, 1.0}, {0.9, 1.0});
        SmallVec g;
        p->discrete_g(s.view(), g);
        CHECK_THAT(g[0], WithinAbs(0.0, 1e-15));
    }
    SECTION("first component at the printed example state") {
        auto p = problems::instantiate(
            "lotka_volterra", Params{{"a", 2.0}, {"b", 2.0}, {"c", 2.0}, {"d", 1.0}});
        StateHolder s = ode2(0.7, {1.0, 1.0}, {1.0, 1.0});
        scheme::GuardContext guard;
        SmallVec r = scheme::assemble_rectangular_residual(*p, s.view(), guard);
        CHECK_THAT(r[0], WithinAbs(0.0, 1e-14));
    }
    SECTION("singular invertible block rejects") {
        auto p = problems::instantiate("lotka_volterra");  // c = d = 1: singular at x = 1
        StateHolder s = ode2(0.01, {1.0, 0.5}, {1.0, 0.5});
        scheme::GuardContext guard;
        guard.observe(1.0);
        CHECK_THROWS_AS(scheme::assemble_rectangular_residual(*p, s.view(), guard),
                        SingularMultiplierError);
    }
}

TEST_CASE("rectangular assembly with s = m reduces exactly to the square assembly") {
    std::mt19937_64 rng(17);
    for (const char* name : {"two_body", "shallow_water"}) {
        auto p = problems::instantiate(name);
        for (int trial = 0; trial < 25; ++trial) {
            StateHolder s = random_state(*p, rng);
            MultiIndex J = p->spatial_dim() == 2 ? MultiIndex{2, 2} : MultiIndex{0, 0};
            scheme::GuardContext g1, g2;
            SmallVec a, b;
            try {
                a = scheme::assemble_system_residual(*p, s.view(J), g1);
                b = scheme::assemble_rectangular_residual(*p, s.view(J), g2);
            } catch (const SingularMultiplierError&) {
                continue;
            }
            for (int c = 0; c < p->num_equations(); ++c) REQUIRE(a[c] == b[c]);
        }
    }
}

TEST_CASE("algebraic identity: multiplier times residual equals the conservative form") {
    std::mt19937_64 rng(29);
    for (const auto& entry : problems::catalog()) {
        auto p = problems::instantiate(entry.name, entry.defaults);
        int checked = 0;
        for (int trial = 0; trial < 200 && checked < 120; ++trial) {
            StateHolder s = random_state(*p, rng);
            MultiIndex J = p->spatial_dim() >= 1 ? MultiIndex{3, p->spatial_dim() == 2 ? 3 : 0}
                                                 : MultiIndex{0, 0};
            DiscreteView v = s.view(J);
            scheme::GuardContext guard;
            scheme::Diagnostics diag;
            SmallVec r;
            try {
                r = scheme::residual(*p, v, guard, &diag);
            } catch (const SingularMultiplierError&) {
                continue;
            }
            ++checked;
            SmallVec g;
            SmallVec cons = scheme::conservative_form_residual(*p, v, &g);
            SmallMat lam, sig;
            p->discrete_multiplier(v, lam, sig);
            int svars = p->num_conservation_laws();
            for (int j = 0; j < svars; ++j) {
                double lhs = 0.0, scale = std::abs(cons[j]);
                for (int i = 0; i < svars; ++i) {
                    lhs += lam(j, i) * r[i];
                    scale += std::abs(lam(j, i) * r[i]);
                }
                INFO(entry.name << " row " << j);
                CHECK_THAT(lhs, WithinAbs(cons[j], 1e3 * machine_eps * (scale + 1.0)));
            }
            // trailing components of the assembled residual are G itself
            for (int c = svars; c < p->num_equations(); ++c) REQUIRE(r[c] == g[c - svars]);
        }
        INFO(entry.name);
        CHECK(checked >= 60);
    }
}

TEST_CASE("conservative form of the pendulum vanishes on the multiplier zero set") {
    auto p = problems::instantiate("pendulum");
    StateHolder s = ode3(0.1, {0.4}, {0.9}, {0.4});  // theta_{k+1} = theta_{k-1}
    SmallVec cons = scheme::conservative_form_residual(*p, s.view());
    CHECK(cons[0] == 0.0);
    scheme::GuardContext guard;
    SmallVec r = scheme::residual(*p, s.view(), guard);
    CHECK(std::abs(r[0]) > 1.0);  // residual itself is far from zero here
}

TEST_CASE("ODE conservative form has no flux part") {
    auto p = problems::instantiate("lorenz");
    std::mt19937_64 rng(41);
    StateHolder s = random_state(*p, rng);
    SmallVec cons = scheme::conservative_form_residual(*p, s.view());
    SmallVec dt = scheme::discrete_time_derivative(*p, s.view());
    SmallMat lam, sig;
    p->discrete_multiplier(s.view(), lam, sig);
    SmallVec g;
    p->discrete_g(s.view(), g);
    for (int j = 0; j < 2; ++j) CHECK(cons[j] == dt[j] - sig(j, 0) * g[0]);
}

TEST_CASE("guard threshold scales with the observed multiplier magnitude") {
    scheme::GuardContext guard;
    double floor_threshold = guard.threshold();
    CHECK(floor_threshold == 1e6 * machine_eps);
    guard.observe(50.0);
    CHECK(guard.threshold() == 1e6 * machine_eps * 50.0);
}
