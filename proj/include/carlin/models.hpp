#pragma once

#include <string>
#include <vector>

#include "carlin/poly_ode.hpp"

namespace carlin {

// A built-in benchmark system: the vector field plus the initial
// condition the figures use.
struct NamedModel {
    PolyODE ode;
    std::vector<double> default_x0;
    std::string label;
};

// dx/dt = x - x^2, scalar.  x0 = 0.1.
NamedModel build_logistic();

// KPP-Fisher reaction-diffusion on a periodic 1-D lattice,
//     du_i/dt = u_{i-1} - 2 u_i + u_{i+1} + u_i (1 - u_i),
// indices mod n (unit lattice spacing and unit diffusion).  x0 is a
// bump: 0.9 at the two centre sites, 0.1 elsewhere.  Requires n >= 3 so
// each site has two distinct neighbours.
NamedModel build_kpp(int n = 8);

// Phase-field (Allen-Cahn type) on the same periodic lattice,
//     dphi_i/dt = phi_{i-1} - 2 phi_i + phi_{i+1} + (1 - phi_i)(phi_i + beta)(1 + phi_i).
// phi = +-1 are the stable phases; beta tilts the free energy so fronts
// advance toward one of them (beta < 0 favours phi = -1).  The default
// x0 is a smooth two-front profile that is stationary for beta = 0.
NamedModel build_phase_field(int n = 8, double beta = -0.2);

// Closed-form logistic solution x(t) = x0 e^t / (1 - x0 + x0 e^t).
double logistic_analytic(double x0, double t);

} // namespace carlin
