#pragma once

#include <memory>
#include <string>
#include <vector>

#include "consfd/problem.hpp"
#include "consfd/problems/burgers.hpp"
#include "consfd/problems/damped_oscillator.hpp"
#include "consfd/problems/factored_oscillator.hpp"
#include "consfd/problems/kdv.hpp"
#include "consfd/problems/lorenz.hpp"
#include "consfd/problems/lotka_volterra.hpp"
#include "consfd/problems/manufactured.hpp"
#include "consfd/problems/pendulum.hpp"
#include "consfd/problems/shallow_water.hpp"
#include "consfd/problems/two_body.hpp"

namespace consfd::problems {

struct CatalogEntry {
    std::string name;
    int m, s, n, time_levels;
    Params defaults;
    std::string summary;
};

inline std::vector<CatalogEntry> catalog() {
    return {
        {"pendulum", 1, 1, 0, 3, Params{{"g", 1.0}, {"l", 1.0}},
         "pendulum angle equation, energy-conserving scheme"},
        {"dho", 1, 1, 0, 3, Params{{"m", 1.0}, {"k", 5.0}, {"gamma", 0.5}},
         "damped harmonic oscillator, exponentially transformed invariant"},
        {"two_body", 2, 2, 0, 3, Params{},
         "1-D two-body system, momentum and energy conserving"},
        {"lotka_volterra", 2, 1, 0, 2, Params{{"a", 1.0}, {"b", 1.0}, {"c", 1.0}, {"d", 1.0}},
         "predator-prey system, rectangular multiplier (s=1 < m=2)"},
        {"lorenz", 3, 2, 0, 2, Params{{"sigma", 10.0}, {"r", 28.0}},
         "non-dissipative Lorenz system, two conserved densities"},
        {"burgers", 1, 1, 1, 2, Params{{"p", 1.0}},
         "inviscid Burgers, p-family of conserved power densities"},
        {"kdv", 1, 1, 1, 2, Params{},
         "Korteweg-de Vries, conserved quadratic density"},
        {"shallow_water", 3, 3, 2, 2, Params{},
         "2-D shallow water, momenta and mass conserving"},
        {"factored_oscillator", 1, 1, 0, 3, Params{{"m", 1.0}, {"k", 1.0}},
         "harmonic oscillator with exactly factoring density difference"},
        {"manufactured", 1, 1, 0, 2, Params{},
         "quadrature self-test problem u_t = f(t)"},
    };
}

inline ProblemPtr instantiate(const std::string& name, Params params = {}) {
    if (name == "pendulum") return std::make_shared<Pendulum>(std::move(params));
    if (name == "dho") return std::make_shared<DampedOscillator>(std::move(params));
    if (name == "two_body") return std::make_shared<TwoBody>(std::move(params));
    if (name == "lotka_volterra") return std::make_shared<LotkaVolterra>(std::move(params));
    if (name == "lorenz") return std::make_shared<Lorenz>(std::move(params));
    if (name == "burgers") return std::make_shared<Burgers>(std::move(params));
    if (name == "kdv") return std::make_shared<Kdv>(std::move(params));
    if (name == "shallow_water") return std::make_shared<ShallowWater>(std::move(params));
    if (name == "factored_oscillator") return std::make_shared<FactoredOscillator>(std::move(params));
    if (name == "manufactured") return std::make_shared<ManufacturedScalar>(std::move(params));
    throw std::invalid_argument("unknown problem: " + name);
}

}  // namespace consfd::problems
