#pragma once

// Differential polynomials in beta and its x-derivatives with Gaussian-rational
// coefficients. The generator beta^(j) is written B<j> in text form.

#include <complex>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "vesselkit/gaussian_rational.hpp"

namespace vesselkit {

/// (derivative order, exponent) pairs, ascending by order, exponents >= 1.
using Factors = std::vector<std::pair<int, int>>;

/// Canonical monomial order: total degree first, then lexicographic on the
/// sorted (order, exponent) pairs.
struct FactorsLess {
    bool operator()(const Factors& a, const Factors& b) const;
};

int total_degree(const Factors& f);

struct DiffMonomial {
    GaussianRational coeff;
    Factors factors;
};

/// Numeric values of beta^(j) at one point, keyed by j.
using BetaJet = std::map<int, std::complex<double>>;

class DiffPoly {
public:
    DiffPoly() = default;

    static DiffPoly constant(const GaussianRational& c);
    /// (beta^(order))^power.
    static DiffPoly beta(int order, int power = 1);
    /// Merges duplicates and drops zero coefficients; input order is irrelevant.
    static DiffPoly from_monomials(const std::vector<DiffMonomial>& monomials);

    bool is_zero() const noexcept { return terms_.empty(); }
    std::size_t size() const noexcept { return terms_.size(); }
    /// Monomials in canonical order.
    std::vector<DiffMonomial> monomials() const;
    /// Highest derivative order present; -1 for constants and zero.
    int max_order() const;

    /// Coefficient of the exact factor map (zero if absent).
    GaussianRational coefficient(const Factors& f) const;

    DiffPoly& operator+=(const DiffPoly& o);
    DiffPoly& operator-=(const DiffPoly& o);
    DiffPoly& operator*=(const GaussianRational& c);

    friend DiffPoly operator+(DiffPoly a, const DiffPoly& b) { return a += b; }
    friend DiffPoly operator-(DiffPoly a, const DiffPoly& b) { return a -= b; }
    friend DiffPoly operator*(const DiffPoly& a, const DiffPoly& b);
    friend DiffPoly operator*(DiffPoly a, const GaussianRational& c) { return a *= c; }
    friend DiffPoly operator*(const GaussianRational& c, DiffPoly a) { return a *= c; }
    DiffPoly operator-() const;

    friend bool operator==(const DiffPoly& a, const DiffPoly& b) { return a.terms_ == b.terms_; }

private:
    void add_term(const Factors& f, const GaussianRational& c);

    std::map<Factors, GaussianRational, FactorsLess> terms_;
};

/// d/dx: Leibniz rule with beta^(j) -> beta^(j+1).
DiffPoly derive(const DiffPoly& p);
DiffPoly derive(const DiffPoly& p, int times);

/// Exact antiderivative with zero constant term. Throws NotExactError when p
/// is not a total x-derivative.
DiffPoly integrate(const DiffPoly& p);

/// Throws MissingOrderError when the jet lacks an order used by p.
std::complex<double> evaluate(const DiffPoly& p, const BetaJet& jet);

enum class RenderFormat { text, json, latex };

std::string render(const DiffPoly& p, RenderFormat format);

nlohmann::json to_json(const DiffPoly& p);
/// Inverse of to_json; throws ValidationError on schema violations.
DiffPoly from_json(const nlohmann::json& j);

} // namespace vesselkit
