#include "carlin/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace carlin {

Matrix mat_mul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw InputError("mat_mul: inner dimensions disagree");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j)
                c(i, j) += aik * b(k, j);
        }
    return c;
}

std::size_t flat_index(const TensorIndex& idx) {
    if (idx.base < 1)
        throw InputError("flat_index: base dimension must be >= 1");
    std::size_t flat = 0;
    for (int d : idx.digits) {
        if (d < 0 || d >= idx.base)
            throw InputError("flat_index: digit out of range [0, base)");
        flat = flat * static_cast<std::size_t>(idx.base) + static_cast<std::size_t>(d);
    }
    return flat;
}

TensorIndex unflat_index(std::size_t flat, int base, int order) {
    if (base < 1 || order < 0)
        throw InputError("unflat_index: need base >= 1 and order >= 0");
    if (flat >= pow_dim(base, order))
        throw InputError("unflat_index: flat index out of range");
    TensorIndex idx;
    idx.base = base;
    idx.digits.assign(static_cast<std::size_t>(order), 0);
    for (int v = order - 1; v >= 0; --v) {
        idx.digits[static_cast<std::size_t>(v)] =
            static_cast<int>(flat % static_cast<std::size_t>(base));
        flat /= static_cast<std::size_t>(base);
    }
    return idx;
}

std::size_t pow_dim(int base, int order) {
    if (base < 1 || order < 0)
        throw InputError("pow_dim: need base >= 1 and order >= 0");
    const std::size_t limit = std::size_t{1} << 62;
    std::size_t p = 1;
    for (int i = 0; i < order; ++i) {
        if (p > limit / static_cast<std::size_t>(base))
            throw ResourceError("pow_dim: dimension overflow");
        p *= static_cast<std::size_t>(base);
    }
    return p;
}

std::vector<double> kron_power(std::span<const double> x, int order) {
    if (order < 0)
        throw InputError("kron_power: order must be >= 0");
    std::vector<double> result{1.0};
    for (int k = 0; k < order; ++k) {
        std::vector<double> next(result.size() * x.size());
        std::size_t pos = 0;
        for (double r : result)
            for (double xi : x)
                next[pos++] = r * xi;
        result = std::move(next);
    }
    return result;
}

// --- CoeffBlock -------------------------------------------------------------

CoeffBlock CoeffBlock::from_triplets(std::size_t rows, std::size_t cols,
                                     std::vector<Entry> triplets) {
    for (const auto& e : triplets)
        if (e.row >= rows || e.col >= cols)
            throw InputError("CoeffBlock: entry out of bounds");
    std::stable_sort(triplets.begin(), triplets.end(),
                     [](const Entry& a, const Entry& b) {
                         return a.row != b.row ? a.row < b.row : a.col < b.col;
                     });
    CoeffBlock cb;
    cb.rows = rows;
    cb.cols = cols;
    for (const auto& e : triplets) {
        if (!cb.entries.empty() && cb.entries.back().row == e.row &&
            cb.entries.back().col == e.col) {
            cb.entries.back().value += e.value;
        } else {
            cb.entries.push_back(e);
        }
    }
    std::erase_if(cb.entries, [](const Entry& e) { return e.value == 0.0; });
    return cb;
}

CoeffBlock CoeffBlock::column(std::span<const double> v) {
    std::vector<Entry> trip;
    trip.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        if (v[i] != 0.0) trip.push_back({i, 0, v[i]});
    return from_triplets(v.size(), 1, std::move(trip));
}

CoeffBlock CoeffBlock::from_dense(const Matrix& m) {
    std::vector<Entry> trip;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            if (m(i, j) != 0.0) trip.push_back({i, j, m(i, j)});
    return from_triplets(m.rows(), m.cols(), std::move(trip));
}

Matrix CoeffBlock::to_dense() const {
    Matrix m(rows, cols);
    for (const auto& e : entries) m(e.row, e.col) = e.value;
    return m;
}

// --- KronTerm ---------------------------------------------------------------

std::size_t factor_rows(const KronFactor& f) {
    if (const auto* id = std::get_if<IdentityFactor>(&f)) return id->dim;
    return std::get<CoeffBlock>(f).rows;
}

std::size_t factor_cols(const KronFactor& f) {
    if (const auto* id = std::get_if<IdentityFactor>(&f)) return id->dim;
    return std::get<CoeffBlock>(f).cols;
}

std::size_t KronTerm::out_dim() const {
    std::size_t d = 1;
    for (const auto& f : factors) d *= factor_rows(f);
    return d;
}

std::size_t KronTerm::in_dim() const {
    std::size_t d = 1;
    for (const auto& f : factors) d *= factor_cols(f);
    return d;
}

// --- BlockVec ---------------------------------------------------------------

BlockVec::BlockVec(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
    offsets_.reserve(dims_.size());
    std::size_t off = 0;
    for (std::size_t d : dims_) {
        offsets_.push_back(off);
        off += d;
    }
    data_.assign(off, 0.0);
}

std::span<double> BlockVec::block(std::size_t k) {
    return {data_.data() + offsets_[k], dims_[k]};
}

std::span<const double> BlockVec::block(std::size_t k) const {
    return {data_.data() + offsets_[k], dims_[k]};
}

// --- BlockOperator ----------------------------------------------------------

BlockOperator::BlockOperator(std::vector<std::size_t> out_dims,
                             std::vector<std::size_t> in_dims)
    : out_dims_(std::move(out_dims)), in_dims_(std::move(in_dims)) {
    for (std::size_t d : out_dims_)
        if (d == 0) throw InputError("BlockOperator: zero output block dimension");
    for (std::size_t d : in_dims_)
        if (d == 0) throw InputError("BlockOperator: zero input block dimension");
}

std::size_t BlockOperator::total_out_dim() const {
    return std::accumulate(out_dims_.begin(), out_dims_.end(), std::size_t{0});
}

std::size_t BlockOperator::total_in_dim() const {
    return std::accumulate(in_dims_.begin(), in_dims_.end(), std::size_t{0});
}

void BlockOperator::add_term(std::size_t k, std::size_t l, KronTerm term) {
    if (k >= out_dims_.size() || l >= in_dims_.size())
        throw InputError("BlockOperator::add_term: block index out of range");
    if (term.out_dim() != out_dims_[k] || term.in_dim() != in_dims_[l])
        throw InputError("BlockOperator::add_term: term shape does not match block");
    blocks_[{k, l}].push_back(std::move(term));
}

namespace {

// Accumulates scale * (f_0 ⊗ ... ⊗ f_{r-1}) * in  into  out.
//
// The tensor is kept flat.  Factors are contracted left to right; at each
// step the layout is (lead, current factor axis, trail) where `lead` is
// the product of output dimensions already produced and `trail` the
// product of input dimensions not yet consumed.  Identity factors only
// reinterpret the layout and cost nothing.
void apply_term(const KronTerm& term, std::span<const double> in,
                std::span<double> out, ApplyWorkspace& ws) {
    const double* cur = in.data();
    std::size_t cur_size = in.size();
    std::size_t lead = 1;
    std::size_t trail = in.size();
    bool cur_is_a = false; // which scratch buffer `cur` points into

    for (const auto& f : term.factors) {
        const std::size_t fin = factor_cols(f);
        const std::size_t fout = factor_rows(f);
        trail /= fin;
        if (std::holds_alternative<IdentityFactor>(f)) {
            lead *= fout;
            continue;
        }
        const auto& cb = std::get<CoeffBlock>(f);
        std::vector<double>& dst = cur_is_a ? ws.b : ws.a;
        dst.assign(lead * fout * trail, 0.0);
        for (std::size_t a = 0; a < lead; ++a) {
            const double* src_base = cur + a * fin * trail;
            double* dst_base = dst.data() + a * fout * trail;
            for (const auto& e : cb.entries) {
                const double* s = src_base + e.col * trail;
                double* d = dst_base + e.row * trail;
                for (std::size_t t = 0; t < trail; ++t) d[t] += e.value * s[t];
            }
        }
        cur = dst.data();
        cur_size = dst.size();
        cur_is_a = !cur_is_a;
        lead *= fout;
    }

    for (std::size_t i = 0; i < cur_size; ++i) out[i] += term.scale * cur[i];
}

} // namespace

void BlockOperator::apply(const BlockVec& y, BlockVec& out, ApplyWorkspace& ws) const {
    if (y.dims() != in_dims_)
        throw InputError("BlockOperator::apply: input block structure mismatch");
    if (out.dims() != out_dims_)
        throw InputError("BlockOperator::apply: output block structure mismatch");
    std::fill(out.raw().begin(), out.raw().end(), 0.0);
    for (const auto& [key, terms] : blocks_) {
        const auto [k, l] = key;
        std::span<const double> in_block = y.block(l);
        std::span<double> out_block = out.block(k);
        for (const auto& term : terms) apply_term(term, in_block, out_block, ws);
    }
}

BlockVec BlockOperator::apply(const BlockVec& y) const {
    BlockVec out(out_dims_);
    ApplyWorkspace ws;
    apply(y, out, ws);
    return out;
}

Matrix BlockOperator::to_dense(std::size_t max_side, std::size_t max_entries) const {
    const std::size_t nr = total_out_dim();
    const std::size_t nc = total_in_dim();
    if (nr > max_side || nc > max_side)
        throw ResourceError("BlockOperator::to_dense: side exceeds cap");
    if (nc != 0 && nr > max_entries / nc)
        throw ResourceError("BlockOperator::to_dense: entry count exceeds cap");

    Matrix m(nr, nc);
    BlockVec e(in_dims_);
    BlockVec col(out_dims_);
    ApplyWorkspace ws;
    for (std::size_t j = 0; j < nc; ++j) {
        std::fill(e.raw().begin(), e.raw().end(), 0.0);
        e.raw()[j] = 1.0;
        apply(e, col, ws);
        for (std::size_t i = 0; i < nr; ++i) m(i, j) = col.raw()[i];
    }
    return m;
}

// --- binomial_lift_transform ------------------------------------------------

BlockOperator binomial_lift_transform(std::span<const double> pivot, int order) {
    if (order < 0)
        throw InputError("binomial_lift_transform: order must be >= 0");
    const std::size_t n = pivot.size();
    if (n == 0)
        throw InputError("binomial_lift_transform: empty pivot");
    for (double v : pivot)
        if (!std::isfinite(v))
            throw InputError("binomial_lift_transform: pivot must be finite");
    if (order >= 63)
        throw ResourceError("binomial_lift_transform: order too large");

    std::vector<double> neg(pivot.begin(), pivot.end());
    for (double& v : neg) v = -v;
    const CoeffBlock neg_col = CoeffBlock::column(neg);

    std::vector<std::size_t> dims;
    dims.reserve(static_cast<std::size_t>(order) + 1);
    for (int k = 0; k <= order; ++k) dims.push_back(pow_dim(static_cast<int>(n), k));

    BlockOperator t(dims, dims);
    for (int p = 0; p <= order; ++p) {
        // Each subset S of the p slots keeps those slots as identities and
        // fills the rest with the column (−s); |S| = q addresses block (p, q).
        const std::uint64_t masks = std::uint64_t{1} << p;
        for (std::uint64_t mask = 0; mask < masks; ++mask) {
            KronTerm term;
            term.scale = 1.0;
            int q = 0;
            for (int v = 0; v < p; ++v) {
                if (mask & (std::uint64_t{1} << v)) {
                    term.factors.emplace_back(IdentityFactor{n});
                    ++q;
                } else {
                    term.factors.emplace_back(neg_col);
                }
            }
            t.add_term(static_cast<std::size_t>(p), static_cast<std::size_t>(q),
                       std::move(term));
        }
    }
    return t;
}

} // namespace carlin
