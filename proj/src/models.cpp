#include "carlin/models.hpp"

#include <cmath>

namespace carlin {

NamedModel build_logistic() {
    std::vector<PolyTerm> terms{
        {1, 0, {0}, 1.0},
        {2, 0, {0, 0}, -1.0},
    };
    return {PolyODE(1, 2, std::move(terms)), {0.1}, "logistic"};
}

NamedModel build_kpp(int n) {
    if (n < 3)
        throw InputError("build_kpp: need n >= 3 for a periodic lattice");
    std::vector<PolyTerm> terms;
    for (int i = 0; i < n; ++i) {
        const int left = (i + n - 1) % n;
        const int right = (i + 1) % n;
        terms.push_back({1, i, {left}, 1.0});
        terms.push_back({1, i, {right}, 1.0});
        // -2 from the lattice Laplacian, +1 from the linear part of u(1-u).
        terms.push_back({1, i, {i}, -1.0});
        terms.push_back({2, i, {i, i}, -1.0});
    }

    std::vector<double> x0(static_cast<std::size_t>(n), 0.1);
    const int c = n / 2;
    x0[static_cast<std::size_t>(c - 1)] = 0.9;
    x0[static_cast<std::size_t>(c)] = 0.9;
    return {PolyODE(n, 2, std::move(terms)), std::move(x0), "kpp"};
}

NamedModel build_phase_field(int n, double beta) {
    if (n != 8)
        throw InputError("build_phase_field: the model is defined for n = 8");
    // (1 - phi)(phi + beta)(1 + phi) = beta + phi - beta phi^2 - phi^3.
    std::vector<PolyTerm> terms;
    for (int i = 0; i < n; ++i) {
        const int left = (i + n - 1) % n;
        const int right = (i + 1) % n;
        terms.push_back({0, i, {}, beta});
        terms.push_back({1, i, {left}, 1.0});
        terms.push_back({1, i, {right}, 1.0});
        // -2 from the lattice Laplacian, +1 from the reaction.
        terms.push_back({1, i, {i}, -1.0});
        terms.push_back({2, i, {i, i}, -beta});
        terms.push_back({3, i, {i, i, i}, -1.0});
    }

    std::vector<double> x0{-0.90, -0.56, 0.56, 0.90, 0.90, 0.56, -0.56, -0.90};
    return {PolyODE(n, 3, std::move(terms)), std::move(x0), "phase-field"};
}

double logistic_analytic(double x0, double t) {
    const double e = std::exp(t);
    return x0 * e / (1.0 - x0 + x0 * e);
}

} // namespace carlin
