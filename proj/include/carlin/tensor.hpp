#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "carlin/errors.hpp"

namespace carlin {

// ---------------------------------------------------------------------------
// Dense matrix
//
// Row-major, only as featureful as the validation dumps and small basis
// conjugations need.  All heavy arithmetic stays matrix-free.
// ---------------------------------------------------------------------------

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    const std::vector<double>& data() const { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Deterministic (i,k,j) loop order.
Matrix mat_mul(const Matrix& a, const Matrix& b);

// ---------------------------------------------------------------------------
// Tensor indexing
//
// A degree-m tensor index over base dimension n is a digit string
// (j_0, ..., j_{m-1}) with the FIRST slot most significant:
//
//     flat = sum_v digits[v] * n^(m-1-v).
//
// This matches the flattening of x ⊗ x ⊗ ... where the leftmost factor
// varies slowest.  Every multi-index crossing an API goes through these
// two functions; nothing else is allowed to do its own digit arithmetic.
// ---------------------------------------------------------------------------

struct TensorIndex {
    int base = 1;               // state dimension n
    std::vector<int> digits;    // one digit per tensor slot, each in [0, base)
};

std::size_t flat_index(const TensorIndex& idx);
TensorIndex unflat_index(std::size_t flat, int base, int order);

// n^k with overflow checking (throws ResourceError past 2^62).
std::size_t pow_dim(int base, int order);

// Flattened k-fold Kronecker power of x; k = 0 yields the 1-vector {1}.
std::vector<double> kron_power(std::span<const double> x, int order);

// ---------------------------------------------------------------------------
// Kronecker-structured block operators
// ---------------------------------------------------------------------------

// Sparse rectangular coefficient block (e.g. one F_m of shape n x n^m).
// Entries are kept sorted by (row, col) with unique keys so that every
// traversal — and therefore every floating-point accumulation — happens
// in one fixed order.
struct CoeffBlock {
    struct Entry {
        std::size_t row = 0;
        std::size_t col = 0;
        double value = 0.0;
    };

    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<Entry> entries;

    // Sorts, merges duplicate (row, col) pairs by summation, drops exact
    // zeros, and bounds-checks.
    static CoeffBlock from_triplets(std::size_t rows, std::size_t cols,
                                    std::vector<Entry> triplets);

    // Column vector v as a (v.size() x 1) block.
    static CoeffBlock column(std::span<const double> v);

    static CoeffBlock from_dense(const Matrix& m);
    Matrix to_dense() const;
};

// One factor of a Kronecker product: either an identity of a given
// dimension (applied implicitly, never materialised) or a coefficient
// block.
struct IdentityFactor {
    std::size_t dim = 0;
};
using KronFactor = std::variant<IdentityFactor, CoeffBlock>;

std::size_t factor_rows(const KronFactor& f);
std::size_t factor_cols(const KronFactor& f);

// scale * (f_0 ⊗ f_1 ⊗ ... ⊗ f_{r-1}).  An empty factor list is the 1x1
// identity, so a bare scalar is representable.
struct KronTerm {
    double scale = 1.0;
    std::vector<KronFactor> factors;

    std::size_t out_dim() const;
    std::size_t in_dim() const;
};

// A vector partitioned into contiguous blocks, stored flat.
class BlockVec {
public:
    BlockVec() = default;
    explicit BlockVec(std::vector<std::size_t> dims);

    std::size_t block_count() const { return dims_.size(); }
    std::size_t block_dim(std::size_t k) const { return dims_[k]; }
    const std::vector<std::size_t>& dims() const { return dims_; }
    std::size_t total_dim() const { return data_.size(); }

    std::span<double> block(std::size_t k);
    std::span<const double> block(std::size_t k) const;

    std::vector<double>& raw() { return data_; }
    const std::vector<double>& raw() const { return data_; }

private:
    std::vector<std::size_t> dims_;
    std::vector<std::size_t> offsets_;
    std::vector<double> data_;
};

// Reusable scratch buffers for matrix-free application, so the hot loop
// does not allocate.
struct ApplyWorkspace {
    std::vector<double> a;
    std::vector<double> b;
};

// Block matrix whose (k, l) block is a sum of Kronecker terms mapping
// input block l to output block k.  Application is matrix-free; blocks,
// terms, and sparse entries are all traversed in a fixed order, so
// apply() is bit-for-bit deterministic run to run.
class BlockOperator {
public:
    BlockOperator() = default;
    BlockOperator(std::vector<std::size_t> out_dims, std::vector<std::size_t> in_dims);

    const std::vector<std::size_t>& out_dims() const { return out_dims_; }
    const std::vector<std::size_t>& in_dims() const { return in_dims_; }
    std::size_t total_out_dim() const;
    std::size_t total_in_dim() const;

    // Appends one term to block (k, l); dimensions are validated against
    // the declared block structure.
    void add_term(std::size_t k, std::size_t l, KronTerm term);

    using BlockMap = std::map<std::pair<std::size_t, std::size_t>, std::vector<KronTerm>>;
    const BlockMap& blocks() const { return blocks_; }

    // out = A * y.  `out` must already have the operator's output block
    // structure; its contents are overwritten.
    void apply(const BlockVec& y, BlockVec& out, ApplyWorkspace& ws) const;
    BlockVec apply(const BlockVec& y) const;

    // Materialises the operator column by column.  Guarded by a per-side
    // cap and a total-entry cap; exceeding either throws ResourceError.
    Matrix to_dense(std::size_t max_side = 65536,
                    std::size_t max_entries = std::size_t{1} << 24) const;

private:
    std::vector<std::size_t> out_dims_;
    std::vector<std::size_t> in_dims_;
    BlockMap blocks_;
};

// Block-lower-triangular change of basis taking the monomial tower
// (1, x, x^{⊗2}, ..., x^{⊗order}) to the pivot-centred tower
// (1, (x−s), ..., (x−s)^{⊗order}).  Block (p, q) holds all ways of
// choosing q of the p slots to keep as identities, with the column (−s)
// filling the rest.  The inverse is the same transform at −s.
BlockOperator binomial_lift_transform(std::span<const double> pivot, int order);

} // namespace carlin
