#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "carlin/tensor.hpp"

namespace carlin {

// One monomial term of a polynomial vector field:
//
//     dx[row]/dt += value * x[cols[0]] * x[cols[1]] * ... * x[cols[degree-1]]
//
// cols has exactly `degree` entries; a degree-0 term is a constant forcing.
// Slot order in cols is the tensor slot order (so a term IS one entry of
// the coefficient block F_degree at row `row`, column flat(cols)).
struct PolyTerm {
    int degree = 0;
    int row = 0;
    std::vector<int> cols;
    double value = 0.0;
};

// Polynomial ODE  dx/dt = sum_m F_m x^{⊗m},  m = 0..max_degree.
//
// Terms are canonicalised on construction: validated, sorted by
// (degree, row, cols), duplicates merged by summation, exact zeros
// dropped.  Two PolyODEs built from the same term multiset therefore
// compare equal term-for-term.
class PolyODE {
public:
    PolyODE(int dim, int max_degree, std::vector<PolyTerm> terms);

    int dim() const { return dim_; }
    int max_degree() const { return max_degree_; }
    const std::vector<PolyTerm>& terms() const { return terms_; }

    std::vector<double> eval_rhs(std::span<const double> x) const;

    // d(rhs)/dx as a dense n x n matrix.  Computed term by term in the
    // canonical order, so it agrees bitwise with the degree-1 block of
    // recenter() at the same point.
    Matrix jacobian(std::span<const double> x) const;

    // Exact polynomial re-centering: returns H with
    //     H(delta) = rhs(pivot + delta)
    // as a polynomial in delta, same dim and max_degree.  No
    // approximation is involved; this is the binomial expansion of each
    // term with the mixed slots contracted against the pivot.
    PolyODE recenter(std::span<const double> pivot) const;

    // The degree-m coefficient block F_m as a sparse (n x n^m) block.
    CoeffBlock coefficient_block(int degree) const;

private:
    int dim_;
    int max_degree_;
    std::vector<PolyTerm> terms_;
};

// Model file format: a single JSON object
//
//   { "n": 2, "degree": 2,
//     "terms": [ {"m": 1, "row": 0, "cols": [1], "value": 0.5}, ... ] }
//
// Duplicate (m, row, cols) entries are legal and are summed.
PolyODE parse_model(std::string_view text);
std::string serialize_model(const PolyODE& ode);

} // namespace carlin
