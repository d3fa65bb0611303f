#pragma once

#include <span>
#include <vector>

#include "carlin/poly_ode.hpp"
#include "carlin/tensor.hpp"

namespace carlin {

enum class LiftMethod {
    Carleman, // truncated Carleman linearization in the monomial basis
    PS,       // tangent-plane pivot lift, state (1, x)
    PSC,      // re-centre at the pivot, then truncated Carleman in the shifted basis
};

enum class LiftBasis {
    Monomial,      // blocks are (1, x, x^{⊗2}, ...)
    PivotCentered, // blocks are (1, (x−s), (x−s)^{⊗2}, ...)
};

// A finite linear system  dy/dt = A y  over the block tower
// y = (y_0, y_1, ..., y_order) with y_0 the constant block (== 1 along
// trajectories) and y_k of dimension n^k.  Row block 0 of A is
// identically zero, which is what keeps y_0 conserved exactly.
struct LiftedSystem {
    LiftMethod method = LiftMethod::Carleman;
    LiftBasis basis = LiftBasis::Monomial;
    int order = 1;              // truncation order (1 for PS)
    int dim = 1;                // base state dimension n
    std::vector<double> pivot;  // zeros for Carleman
    BlockOperator op;
};

// Block dimensions (1, n, n^2, ..., n^order).
std::vector<std::size_t> lifted_dims(int dim, int order);

// Conventional truncated Carleman linearization at order K >= 1.
// Block (k, k-1+m) carries sum_v I^{⊗v} ⊗ F_m ⊗ I^{⊗(k-1-v)}; couplings
// that would land beyond block K are dropped — that truncation is the
// sole approximation.
LiftedSystem build_carleman(const PolyODE& ode, int order);

// Pivot lift: dx/dt ≈ f(s) + J(s)(x − s), written on the state (1, x) as
// the exact linear system with rows [0 0; f(s) − J(s)s, J(s)].
LiftedSystem build_ps(const PolyODE& ode, std::span<const double> pivot);

// Re-centre the polynomial at the pivot (exactly), then Carleman-truncate
// at order P in the shifted variable.  The returned operator acts on the
// pivot-centred tower (1, (x−s), ..., (x−s)^{⊗P}).
LiftedSystem build_psc(const PolyODE& ode, std::span<const double> pivot, int order);

// Embed a base state into the system's tower (constant block = 1).
BlockVec lift_state(std::span<const double> x, const LiftedSystem& sys);

// Extract the base-state estimate from a lifted vector: block 1, plus the
// pivot when the basis is pivot-centred.  Throws ConsistencyError if the
// constant block has drifted from 1 by more than 1e-9.
std::vector<double> read_x(const BlockVec& y, const LiftedSystem& sys);

// Dense form of the generator expressed in the requested basis.  When the
// request differs from the native basis the operator is conjugated with
// the binomial change of basis at the system's pivot.  Same size caps as
// BlockOperator::to_dense.
Matrix to_dense_in_basis(const LiftedSystem& sys, LiftBasis basis,
                         std::size_t max_side = 65536,
                         std::size_t max_entries = std::size_t{1} << 24);

} // namespace carlin
