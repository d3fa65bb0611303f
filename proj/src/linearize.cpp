#include "carlin/linearize.hpp"

#include <cmath>
#include <cstdlib>

namespace carlin {

std::vector<std::size_t> lifted_dims(int dim, int order) {
    if (dim < 1)
        throw InputError("lifted_dims: dimension must be >= 1");
    if (order < 1)
        throw InputError("lifted_dims: order must be >= 1");
    std::vector<std::size_t> dims;
    dims.reserve(static_cast<std::size_t>(order) + 1);
    for (int k = 0; k <= order; ++k) dims.push_back(pow_dim(dim, k));
    return dims;
}

namespace {

void check_pivot(const PolyODE& ode, std::span<const double> pivot, const char* who) {
    if (static_cast<int>(pivot.size()) != ode.dim())
        throw InputError(std::string(who) + ": pivot dimension mismatch");
    for (double v : pivot)
        if (!std::isfinite(v))
            throw InputError(std::string(who) + ": pivot must be finite");
}

// The shared Carleman block rule.  For the tower y_k = b^{⊗k} of the
// polynomial db/dt = sum_m H_m b^{⊗m}, the product rule gives the block
// row  dy_k/dt = sum_m sum_{v<k} (I^{⊗v} ⊗ H_m ⊗ I^{⊗(k-1-v)}) y_{k-1+m},
// truncated to target blocks <= order.
BlockOperator carleman_operator(const PolyODE& ode, int order) {
    const int n = ode.dim();
    const auto dims = lifted_dims(n, order);
    BlockOperator a(dims, dims);
    for (int m = 0; m <= ode.max_degree(); ++m) {
        const CoeffBlock h = ode.coefficient_block(m);
        if (h.entries.empty()) continue;
        for (int k = 1; k <= order; ++k) {
            const int l = k - 1 + m;
            if (l > order) continue;
            for (int v = 0; v < k; ++v) {
                KronTerm term;
                term.factors.reserve(static_cast<std::size_t>(k));
                for (int u = 0; u < v; ++u)
                    term.factors.emplace_back(IdentityFactor{static_cast<std::size_t>(n)});
                term.factors.emplace_back(h);
                for (int u = v + 1; u < k; ++u)
                    term.factors.emplace_back(IdentityFactor{static_cast<std::size_t>(n)});
                a.add_term(static_cast<std::size_t>(k), static_cast<std::size_t>(l),
                           std::move(term));
            }
        }
    }
    return a;
}

} // namespace

LiftedSystem build_carleman(const PolyODE& ode, int order) {
    if (order < 1)
        throw InputError("build_carleman: order must be >= 1");
    LiftedSystem sys;
    sys.method = LiftMethod::Carleman;
    sys.basis = LiftBasis::Monomial;
    sys.order = order;
    sys.dim = ode.dim();
    sys.pivot.assign(static_cast<std::size_t>(ode.dim()), 0.0);
    sys.op = carleman_operator(ode, order);
    return sys;
}

LiftedSystem build_ps(const PolyODE& ode, std::span<const double> pivot) {
    check_pivot(ode, pivot, "build_ps");
    const std::size_t n = static_cast<std::size_t>(ode.dim());

    const std::vector<double> g0 = ode.eval_rhs(pivot);
    const Matrix g1 = ode.jacobian(pivot);

    // Constant column of the tangent plane: f(s) − J(s) s.
    std::vector<double> c(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = g0[i];
        for (std::size_t j = 0; j < n; ++j) acc -= g1(i, j) * pivot[j];
        c[i] = acc;
    }

    LiftedSystem sys;
    sys.method = LiftMethod::PS;
    sys.basis = LiftBasis::Monomial;
    sys.order = 1;
    sys.dim = ode.dim();
    sys.pivot.assign(pivot.begin(), pivot.end());
    sys.op = BlockOperator({1, n}, {1, n});

    const CoeffBlock const_col = CoeffBlock::column(c);
    if (!const_col.entries.empty()) {
        KronTerm const_term;
        const_term.factors.emplace_back(const_col);
        sys.op.add_term(1, 0, std::move(const_term));
    }

    const CoeffBlock jac = CoeffBlock::from_dense(g1);
    if (!jac.entries.empty()) {
        KronTerm lin_term;
        lin_term.factors.emplace_back(jac);
        sys.op.add_term(1, 1, std::move(lin_term));
    }
    return sys;
}

LiftedSystem build_psc(const PolyODE& ode, std::span<const double> pivot, int order) {
    if (order < 1)
        throw InputError("build_psc: order must be >= 1");
    check_pivot(ode, pivot, "build_psc");
    LiftedSystem sys;
    sys.method = LiftMethod::PSC;
    sys.basis = LiftBasis::PivotCentered;
    sys.order = order;
    sys.dim = ode.dim();
    sys.pivot.assign(pivot.begin(), pivot.end());
    sys.op = carleman_operator(ode.recenter(pivot), order);
    return sys;
}

BlockVec lift_state(std::span<const double> x, const LiftedSystem& sys) {
    if (static_cast<int>(x.size()) != sys.dim)
        throw InputError("lift_state: state dimension mismatch");
    std::vector<double> b(x.begin(), x.end());
    if (sys.basis == LiftBasis::PivotCentered)
        for (std::size_t i = 0; i < b.size(); ++i) b[i] -= sys.pivot[i];

    BlockVec y(lifted_dims(sys.dim, sys.order));
    std::vector<double> cur{1.0};
    for (int k = 0; k <= sys.order; ++k) {
        std::span<double> blk = y.block(static_cast<std::size_t>(k));
        std::copy(cur.begin(), cur.end(), blk.begin());
        if (k < sys.order) {
            std::vector<double> next(cur.size() * b.size());
            std::size_t pos = 0;
            for (double r : cur)
                for (double bi : b) next[pos++] = r * bi;
            cur = std::move(next);
        }
    }
    return y;
}

std::vector<double> read_x(const BlockVec& y, const LiftedSystem& sys) {
    if (y.dims() != lifted_dims(sys.dim, sys.order))
        throw InputError("read_x: lifted vector does not match the system tower");
    const double y0 = y.block(0)[0];
    if (!(std::abs(y0 - 1.0) <= 1e-9))
        throw ConsistencyError("read_x: constant block drifted away from 1");
    std::span<const double> b1 = y.block(1);
    std::vector<double> x(b1.begin(), b1.end());
    if (sys.basis == LiftBasis::PivotCentered)
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += sys.pivot[i];
    return x;
}

Matrix to_dense_in_basis(const LiftedSystem& sys, LiftBasis basis,
                         std::size_t max_side, std::size_t max_entries) {
    Matrix native = sys.op.to_dense(max_side, max_entries);
    if (basis == sys.basis) return native;

    // Conjugate with the binomial change of basis T(s): centred = T(s) y,
    // so A_monomial = T(−s) A_centred T(s) and vice versa.
    std::vector<double> neg(sys.pivot.size());
    for (std::size_t i = 0; i < neg.size(); ++i) neg[i] = -sys.pivot[i];

    const Matrix t_fwd = binomial_lift_transform(sys.pivot, sys.order)
                             .to_dense(max_side, max_entries);
    const Matrix t_inv = binomial_lift_transform(neg, sys.order)
                             .to_dense(max_side, max_entries);

    if (basis == LiftBasis::Monomial)
        return mat_mul(mat_mul(t_inv, native), t_fwd);
    return mat_mul(mat_mul(t_fwd, native), t_inv);
}

} // namespace carlin
