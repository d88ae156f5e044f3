#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "consfd/problems/catalog.hpp"
#include "consfd/scheme.hpp"
#include "helpers.hpp"

using namespace consfd;
using namespace consfd::testing;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("catalog lists the built-ins with their shapes") {
    auto cat = problems::catalog();
    REQUIRE(cat.size() == 10);
    auto find = [&](const std::string& n) {
        for (const auto& e : cat)
            if (e.name == n) return e;
        FAIL("missing catalog entry " + n);
        return cat.front();
    };
    auto pend = find("pendulum");
    CHECK((pend.m == 1 && pend.s == 1 && pend.n == 0));
    auto lv = find("lotka_volterra");
    CHECK((lv.m == 2 && lv.s == 1 && lv.n == 0));
    auto sw = find("shallow_water");
    CHECK((sw.m == 3 && sw.s == 3 && sw.n == 2));
}

TEST_CASE("instantiate rejects unknown names and out-of-range parameters") {
    CHECK_THROWS_AS(problems::instantiate("heat_equation"), std::invalid_argument);
    CHECK_THROWS_AS(problems::instantiate("pendulum", Params{{"g", -1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(problems::instantiate("lotka_volterra", Params{{"a", 0.0}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(problems::instantiate("burgers", Params{{"p", 0.5}}), std::invalid_argument);
    CHECK_THROWS_AS(problems::instantiate("burgers", Params{{"p", -2.0}}), std::invalid_argument);
}

TEST_CASE("burgers p=1 discrete flux is u^2/2") {
    auto p = problems::instantiate("burgers", Params{{"p", 1.0}});
    StateHolder s = pde1(0.5, 1.0, 4, 1, {2.0, 2.0, 2.0, 2.0}, {1.0, 1.0, 1.0, 1.0});
    SmallMat phi;
    p->discrete_flux(s.view({1, 0}), phi);
    CHECK(phi(0, 0) == 2.0);
}

TEST_CASE("two-body continuous multiplier rows are (1,1) and velocities") {
    auto p = problems::instantiate("two_body");
    ContinuousPoint pt;
    pt.ut = {1.0, 2.0, 0.0};
    SmallMat lam;
    p->continuous_multiplier(pt, lam);
    CHECK(lam(0, 0) == 1.0);
    CHECK(lam(0, 1) == 1.0);
    CHECK(lam(1, 0) == 1.0);
    CHECK(lam(1, 1) == 2.0);
}

TEST_CASE("pendulum continuous density at rest is -g/l") {
    auto p = problems::instantiate("pendulum");
    ContinuousPoint pt;  // theta = 0, theta_t = 0
    SmallVec psi;
    p->continuous_density(pt, psi);
    CHECK_THAT(psi[0], WithinAbs(-1.0, 1e-15));
}

TEST_CASE("density time derivative: constant states give zero") {
    SECTION("pendulum") {
        auto p = problems::instantiate("pendulum");
        StateHolder s = ode3(0.1, {0.0}, {0.0}, {0.0});
        SmallVec d;
        p->density_time_derivative(s.view(), d);
        CHECK(d[0] == 0.0);
    }
    SECTION("burgers forward difference") {
        auto p = problems::instantiate("burgers", Params{{"p", 1.0}});
        StateHolder s = pde1(0.5, 1.0, 4, 1, {2.0, 2.0, 2.0, 2.0}, {1.0, 1.0, 1.0, 1.0});
        SmallVec d;
        p->density_time_derivative(s.view({1, 0}), d);
        CHECK(d[0] == (2.0 - 1.0) / 0.5);
    }
    SECTION("dho on samples of the decaying envelope") {
        Params prm{{"m", 1.0}, {"k", 5.0}, {"gamma", 0.5}};
        auto p = problems::instantiate("dho", prm);
        // x(t) = e^{-gamma t/(2m)} makes the transformed variable w == 1.
        double tau = 0.05, t0 = 0.3;
        auto x = [&](double t) { return std::exp(-0.5 * t / 2.0); };
        StateHolder s = ode3(tau, {x(t0 + 2 * tau)}, {x(t0 + tau)}, {x(t0)}, t0);
        SmallVec d;
        p->density_time_derivative(s.view(), d);
        CHECK_THAT(d[0], WithinAbs(0.0, 1e-12));
    }
}

TEST_CASE("flux divergence examples") {
    SECTION("burgers constant field vanishes") {
        auto p = problems::instantiate("burgers", Params{{"p", 1.0}});
        StateHolder s = pde1(0.1, 0.5, 4, 1, {3.0, 3.0, 3.0, 3.0}, {3.0, 3.0, 3.0, 3.0});
        SmallVec d;
        p->flux_divergence(s.view({2, 0}), d);
        CHECK(d[0] == 0.0);
    }
    SECTION("burgers p=1 divided square difference") {
        auto p = problems::instantiate("burgers", Params{{"p", 1.0}});
        StateHolder s = pde1(0.1, 1.0, 4, 1, {1.0, 3.0, 1.0, 1.0}, {1.0, 1.0, 1.0, 1.0});
        SmallVec d;
        p->flux_divergence(s.view({1, 0}), d);
        CHECK_THAT(d[0], WithinAbs((9.0 - 1.0) / 2.0, 1e-14));
    }
    SECTION("kdv linear profile reduces to the cubic term") {
        auto p = problems::instantiate("kdv");
        double h = 0.25;
        int e = 8;
        std::vector<double> lin(static_cast<std::size_t>(e));
        for (int j = 0; j < e; ++j) lin[static_cast<std::size_t>(j)] = h * j;
        StateHolder s = pde1(0.1, h, e, 1, lin, lin);
        SmallVec d;
        p->flux_divergence(s.view({4, 0}), d);
        double uj = lin[4], ujm = lin[3];
        CHECK_THAT(d[0], WithinRel((uj * uj * uj - ujm * ujm * ujm) / (3.0 * h), 1e-13));
    }
}

TEST_CASE("declared stencils cover every touched offset (instrumented dry run)") {
    std::mt19937_64 rng(11);
    for (const auto& entry : problems::catalog()) {
        auto p = problems::instantiate(entry.name, entry.defaults);
        StateHolder s = random_state(*p, rng);
        AccessRecorder rec;
        MultiIndex J = p->spatial_dim() >= 1 ? MultiIndex{4, p->spatial_dim() == 2 ? 4 : 0}
                                             : MultiIndex{0, 0};
        DiscreteView v = s.view(J);
        v.set_recorder(&rec);

        SmallVec tmp;
        SmallMat lam, sig;
        p->density_time_derivative(v, tmp);
        p->discrete_multiplier(v, lam, sig);
        if (p->num_equations() > p->num_conservation_laws()) p->discrete_g(v, tmp);
        if (p->spatial_dim() > 0) p->flux_divergence(v, tmp);
        if (p->has_simplified_residual()) p->simplified_residual(v, tmp);

        StencilSpec st = p->stencil();
        for (const auto& [dt, d0, d1] : rec.touched) {
            INFO(entry.name << " touched (" << dt << "," << d0 << "," << d1 << ")");
            CHECK((dt >= st.time_lo && dt <= st.time_hi));
            CHECK((d0 >= st.space_lo[0] && d0 <= st.space_hi[0]));
            CHECK((d1 >= st.space_lo[1] && d1 <= st.space_hi[1]));
        }
    }
}

TEST_CASE("overridden difference forms agree with the density difference quotient") {
    std::mt19937_64 rng(23);
    for (const auto& entry : problems::catalog()) {
        auto p = problems::instantiate(entry.name, entry.defaults);
        for (int trial = 0; trial < 40; ++trial) {
            StateHolder s = random_state(*p, rng);
            MultiIndex J = p->spatial_dim() >= 1 ? MultiIndex{3, p->spatial_dim() == 2 ? 3 : 0}
                                                 : MultiIndex{0, 0};
            DiscreteView v = s.view(J);
            SmallVec fast;
            p->density_time_derivative(v, fast);

            SmallVec now, prev;
            p->discrete_density(v, now);
            p->discrete_density(v.time_shifted(-1), prev);
            for (int j = 0; j < fast.size(); ++j) {
                double ref = (now[j] - prev[j]) / v.tau();
                double scale = (std::abs(now[j]) + std::abs(prev[j])) / v.tau() + 1.0;
                INFO(entry.name << " component " << j);
                CHECK_THAT(fast[j], WithinAbs(ref, 1e3 * machine_eps * scale));
            }
        }
    }
}

TEST_CASE("kdv flux divergence override telescopes the printed flux") {
    auto p = problems::instantiate("kdv");
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 40; ++trial) {
        StateHolder s = random_state(*p, rng);
        DiscreteView v = s.view({3, 0});
        SmallVec fast;
        p->flux_divergence(v, fast);
        SmallMat here, behind;
        p->discrete_flux(v, here);
        p->discrete_flux(v.space_shifted(0, -1), behind);
        double ref = (here(0, 0) - behind(0, 0)) / v.h();
        double scale = (std::abs(here(0, 0)) + std::abs(behind(0, 0))) / v.h() + 1.0;
        CHECK_THAT(fast[0], WithinAbs(ref, 1e3 * machine_eps * scale));
    }
}

TEST_CASE("lotka-volterra rejects non-positive states") {
    auto p = problems::instantiate("lotka_volterra");
    StateHolder s = ode2(0.01, {1.0, -0.5}, {1.0, 1.0});
    SmallVec out;
    CHECK_FALSE(p->admissible(s.view()));
    CHECK_THROWS_AS(p->discrete_density(s.view(), out), InadmissibleStateError);
}

TEST_CASE("burgers p=1 scheme is bit-identical to the classical conservative form") {
    auto p = problems::instantiate("burgers", Params{{"p", 1.0}});
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> dist(0.5, 2.0);
    for (int trial = 0; trial < 200; ++trial) {
        int e = 6;
        std::vector<double> lnew, lold;
        for (int j = 0; j < e; ++j) {
            lnew.push_back(dist(rng));
            lold.push_back(dist(rng));
        }
        double tau = dist(rng), h = dist(rng);
        StateHolder s = pde1(tau, h, e, 1, lnew, lold);
        scheme::GuardContext guard;
        for (int j = 0; j < e; ++j) {
            SmallVec r = scheme::residual(*p, s.view({j, 0}), guard);
            int jm = (j + e - 1) % e;
            double classical = (lnew[static_cast<std::size_t>(j)] - lold[static_cast<std::size_t>(j)]) / tau +
                               (lnew[static_cast<std::size_t>(j)] * lnew[static_cast<std::size_t>(j)] -
                                lnew[static_cast<std::size_t>(jm)] * lnew[static_cast<std::size_t>(jm)]) /
                                   (2.0 * h);
            REQUIRE(r[0] == classical);  // bitwise
        }
    }
}

TEST_CASE("shallow water momentum residual splits into advective form plus continuity-coupled rest") {
    // The first assembled component equals the consistent advection form plus
    // terms that carry a factor of the continuity residual; the split is
    // checked at random states, and the rest vanishes when continuity holds.
    auto p = problems::instantiate("shallow_water");
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> vel(-0.3, 0.3), depth(1.0, 1.6);

    auto eval_split = [&](StateHolder& s, MultiIndex J) {
        DiscreteView v = s.view(J);
        scheme::GuardContext guard;
        SmallVec F = scheme::assemble_system_residual(*p, v, guard);

        double tau = v.tau(), h = v.h();
        double u00 = v.u(0, 0, 0, 0), um = v.u(0, -1, 0, 0);
        double ux1 = v.u(0, 0, -1, 0), uy1 = v.u(0, 0, 0, -1);
        double e00 = v.u(2, 0, 0, 0), em = v.u(2, -1, 0, 0);
        double ex1 = v.u(2, 0, -1, 0), ey1 = v.u(2, 0, 0, -1);
        double v00 = v.u(1, 0, 0, 0);
        double esum = e00 + em;
        double ubar = 0.5 * (u00 + um);

        double advective =
            (u00 - um) / tau +
            (2.0 * ex1 / esum) * (u00 + ux1 - ubar) * (u00 - ux1) / h +
            (2.0 * e00 / esum) * v00 * (u00 - uy1) / h +
            ((e00 + ex1) / esum) * (e00 - ex1) / h;
        double rest =
            (2.0 / esum) * ((e00 - ex1) / h) * u00 * (u00 - ubar) +
            (2.0 / esum) * ((e00 * v00 - ey1 * v.u(1, 0, 0, -1)) / h) * (uy1 - ubar);
        return std::array<double, 3>{F[0], advective + rest, F[2]};
    };

    for (int trial = 0; trial < 30; ++trial) {
        int e = 4;
        std::size_t npts = 16;
        std::vector<double> lnew(3 * npts), lold(3 * npts);
        for (std::size_t q = 0; q < npts; ++q) {
            lnew[q] = vel(rng);
            lold[q] = vel(rng);
            lnew[npts + q] = vel(rng);
            lold[npts + q] = vel(rng);
            lnew[2 * npts + q] = depth(rng);
            lold[2 * npts + q] = depth(rng);
        }
        StateHolder s = pde2(0.02, 0.3, e, e, 3, lnew, lold);
        auto [F0, split, F2] = eval_split(s, {2, 2});
        INFO("trial " << trial);
        CHECK_THAT(F0, WithinAbs(split, 1e-10 * (1.0 + std::abs(F0))));
    }

    // On smooth sampled fields the non-advective rest terms shrink with the
    // resolution (they are the O(tau + h) part the consistency limit kills).
    {
        auto rest_at = [&](double tau, double h, int e) {
            std::size_t npts = static_cast<std::size_t>(e) * static_cast<std::size_t>(e);
            std::vector<double> lnew(3 * npts), lold(3 * npts);
            auto su = [](double t, double x, double y) { return 0.15 * std::sin(x + y - t); };
            auto sv = [](double t, double x, double y) { return 0.1 * std::cos(x - y + 0.5 * t); };
            auto se = [](double t, double x, double y) {
                return 1.4 + 0.1 * std::sin(x) * std::cos(y - 0.6 * t);
            };
            for (int i = 0; i < e; ++i)
                for (int j = 0; j < e; ++j) {
                    std::size_t q = static_cast<std::size_t>(i * e + j);
                    double x = h * i, y = h * j;
                    lnew[q] = su(tau, x, y);
                    lold[q] = su(0, x, y);
                    lnew[npts + q] = sv(tau, x, y);
                    lold[npts + q] = sv(0, x, y);
                    lnew[2 * npts + q] = se(tau, x, y);
                    lold[2 * npts + q] = se(0, x, y);
                }
            StateHolder s = pde2(tau, h, e, e, 3, lnew, lold);
            int anchor = static_cast<int>(std::lround(0.8 / h));  // same physical point
            DiscreteView v = s.view({anchor, anchor});
            double u00 = v.u(0, 0, 0, 0), um = v.u(0, -1, 0, 0);
            double uy1 = v.u(0, 0, 0, -1);
            double e00 = v.u(2, 0, 0, 0), em = v.u(2, -1, 0, 0);
            double ex1 = v.u(2, 0, -1, 0), ey1 = v.u(2, 0, 0, -1);
            double esum = e00 + em;
            double ubar = 0.5 * (u00 + um);
            return std::abs((2.0 / esum) * ((e00 - ex1) / h) * u00 * (u00 - ubar) +
                            (2.0 / esum) * ((e00 * v.u(1, 0, 0, 0) - ey1 * v.u(1, 0, 0, -1)) / h) *
                                (uy1 - ubar));
        };
        double coarse = rest_at(0.04, 0.4, 8);
        double fine = rest_at(0.02, 0.2, 16);
        CHECK(fine < 0.75 * coarse);
    }
}

TEST_CASE("exact solutions pass through their initial data and equations") {
    SECTION("dho") {
        auto p = problems::instantiate("dho", Params{{"m", 1.0}, {"k", 5.0}, {"gamma", 0.5}});
        std::vector<double> u0{1.0}, ut0{0.0}, out(1);
        p->exact_solution(0.0, u0, ut0, out);
        CHECK_THAT(out[0], WithinAbs(1.0, 1e-15));
        p->exact_solution(10.0, u0, ut0, out);
        CHECK_THAT(out[0], WithinAbs(-0.0820352646081409191, 1e-14));
        // residual of the exact solution under the continuous equation
        double t = 0.7, d = 1e-5;
        std::vector<double> a(1), b(1), c(1);
        p->exact_solution(t - d, u0, ut0, a);
        p->exact_solution(t, u0, ut0, b);
        p->exact_solution(t + d, u0, ut0, c);
        double xtt = (c[0] - 2 * b[0] + a[0]) / (d * d);
        double xt = (c[0] - a[0]) / (2 * d);
        CHECK_THAT(xtt + 0.5 * xt + 5.0 * b[0], WithinAbs(0.0, 1e-4));
    }
    SECTION("two_body normal mode") {
        auto p = problems::instantiate("two_body");
        std::vector<double> u0{0.5, -0.5}, ut0{0.0, 0.0}, out(2);
        p->exact_solution(1.0, u0, ut0, out);
        CHECK_THAT(out[0], WithinAbs(0.077971847382687236727, 1e-14));
        CHECK_THAT(out[0] + out[1], WithinAbs(0.0, 1e-15));
    }
    SECTION("manufactured") {
        auto p = problems::instantiate("manufactured");
        std::vector<double> u0{1.0}, none, out(1);
        p->exact_solution(0.25, u0, none, out);
        CHECK_THAT(out[0], WithinAbs(1.0 + std::sin(0.25), 1e-15));
    }
}
