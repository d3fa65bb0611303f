#include "carlin/poly_ode.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <tuple>

#include <json.hpp>

namespace carlin {

namespace {

bool term_less(const PolyTerm& a, const PolyTerm& b) {
    return std::tie(a.degree, a.row, a.cols) < std::tie(b.degree, b.row, b.cols);
}

} // namespace

PolyODE::PolyODE(int dim, int max_degree, std::vector<PolyTerm> terms)
    : dim_(dim), max_degree_(max_degree) {
    if (dim < 1)
        throw InputError("PolyODE: dimension must be >= 1");
    if (max_degree < 0)
        throw InputError("PolyODE: max degree must be >= 0");
    for (const auto& t : terms) {
        if (t.degree < 0 || t.degree > max_degree)
            throw InputError("PolyODE: term degree outside [0, max_degree]");
        if (t.row < 0 || t.row >= dim)
            throw InputError("PolyODE: term row out of range");
        if (static_cast<int>(t.cols.size()) != t.degree)
            throw InputError("PolyODE: term must have exactly `degree` column indices");
        for (int c : t.cols)
            if (c < 0 || c >= dim)
                throw InputError("PolyODE: term column index out of range");
        if (!std::isfinite(t.value))
            throw InputError("PolyODE: term value must be finite");
    }

    // Canonical form: sorted, duplicates summed (in sorted order), exact
    // zeros dropped.
    std::stable_sort(terms.begin(), terms.end(), term_less);
    terms_.reserve(terms.size());
    for (auto& t : terms) {
        if (!terms_.empty() && terms_.back().degree == t.degree &&
            terms_.back().row == t.row && terms_.back().cols == t.cols) {
            terms_.back().value += t.value;
        } else {
            terms_.push_back(std::move(t));
        }
    }
    std::erase_if(terms_, [](const PolyTerm& t) { return t.value == 0.0; });
}

std::vector<double> PolyODE::eval_rhs(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim_)
        throw InputError("PolyODE::eval_rhs: state dimension mismatch");
    std::vector<double> rhs(static_cast<std::size_t>(dim_), 0.0);
    for (const auto& t : terms_) {
        double p = t.value;
        for (int c : t.cols) p *= x[static_cast<std::size_t>(c)];
        rhs[static_cast<std::size_t>(t.row)] += p;
    }
    return rhs;
}

Matrix PolyODE::jacobian(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim_)
        throw InputError("PolyODE::jacobian: state dimension mismatch");
    Matrix j(static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_));
    for (const auto& t : terms_) {
        // Differentiate the product slot by slot; the partial product is
        // accumulated in ascending slot order to match recenter().
        for (std::size_t w = 0; w < t.cols.size(); ++w) {
            double p = t.value;
            for (std::size_t u = 0; u < t.cols.size(); ++u) {
                if (u == w) continue;
                p *= x[static_cast<std::size_t>(t.cols[u])];
            }
            j(static_cast<std::size_t>(t.row),
              static_cast<std::size_t>(t.cols[w])) += p;
        }
    }
    return j;
}

PolyODE PolyODE::recenter(std::span<const double> pivot) const {
    if (static_cast<int>(pivot.size()) != dim_)
        throw InputError("PolyODE::recenter: pivot dimension mismatch");
    for (double v : pivot)
        if (!std::isfinite(v))
            throw InputError("PolyODE::recenter: pivot must be finite");

    // Expand each term over the 2^degree ways of sending a slot to either
    // delta (kept, subset S) or the pivot (contracted away).  Keys collide
    // across patterns and terms; the PolyODE constructor merges them.
    std::vector<PolyTerm> out;
    for (const auto& t : terms_) {
        const std::uint64_t masks = std::uint64_t{1} << t.degree;
        for (std::uint64_t mask = 0; mask < masks; ++mask) {
            PolyTerm nt;
            nt.row = t.row;
            nt.value = t.value;
            for (int v = 0; v < t.degree; ++v) {
                if (mask & (std::uint64_t{1} << v))
                    nt.cols.push_back(t.cols[static_cast<std::size_t>(v)]);
                else
                    nt.value *= pivot[static_cast<std::size_t>(t.cols[static_cast<std::size_t>(v)])];
            }
            nt.degree = static_cast<int>(nt.cols.size());
            out.push_back(std::move(nt));
        }
    }
    return PolyODE(dim_, max_degree_, std::move(out));
}

CoeffBlock PolyODE::coefficient_block(int degree) const {
    if (degree < 0 || degree > max_degree_)
        throw InputError("PolyODE::coefficient_block: degree outside [0, max_degree]");
    const std::size_t cols = pow_dim(dim_, degree);
    std::vector<CoeffBlock::Entry> trip;
    for (const auto& t : terms_) {
        if (t.degree != degree) continue;
        TensorIndex idx{dim_, t.cols};
        trip.push_back({static_cast<std::size_t>(t.row), flat_index(idx), t.value});
    }
    return CoeffBlock::from_triplets(static_cast<std::size_t>(dim_), cols,
                                     std::move(trip));
}

// --- model file I/O ---------------------------------------------------------

PolyODE parse_model(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("model file is not valid JSON: ") + e.what());
    }
    try {
        if (!j.is_object())
            throw ParseError("model file must be a JSON object");
        if (!j.contains("n") || !j.contains("degree") || !j.contains("terms"))
            throw ParseError("model file needs keys n, degree, terms");
        const int n = j.at("n").get<int>();
        const int degree = j.at("degree").get<int>();
        std::vector<PolyTerm> terms;
        for (const auto& jt : j.at("terms")) {
            PolyTerm t;
            t.degree = jt.at("m").get<int>();
            t.row = jt.at("row").get<int>();
            t.cols = jt.at("cols").get<std::vector<int>>();
            t.value = jt.at("value").get<double>();
            terms.push_back(std::move(t));
        }
        return PolyODE(n, degree, std::move(terms));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed model file: ") + e.what());
    }
}

std::string serialize_model(const PolyODE& ode) {
    nlohmann::json j;
    j["n"] = ode.dim();
    j["degree"] = ode.max_degree();
    j["terms"] = nlohmann::json::array();
    for (const auto& t : ode.terms()) {
        nlohmann::json jt;
        jt["m"] = t.degree;
        jt["row"] = t.row;
        jt["cols"] = t.cols;
        jt["value"] = t.value;
        j["terms"].push_back(std::move(jt));
    }
    return j.dump(2) + "\n";
}

} // namespace carlin
