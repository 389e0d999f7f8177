#include "vesselkit/diffpoly.hpp"

#include <algorithm>
#include <limits>

#include "vesselkit/errors.hpp"

namespace vesselkit {

int total_degree(const Factors& f)
{
    int d = 0;
    for (const auto& [order, power] : f) d += power;
    return d;
}

bool FactorsLess::operator()(const Factors& a, const Factors& b) const
{
    int da = total_degree(a), db = total_degree(b);
    if (da != db) return da < db;
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

namespace {

Factors multiply(const Factors& a, const Factors& b)
{
    Factors out;
    out.reserve(a.size() + b.size());
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() || j != b.end()) {
        if (j == b.end() || (i != a.end() && i->first < j->first)) {
            out.push_back(*i++);
        } else if (i == a.end() || j->first < i->first) {
            out.push_back(*j++);
        } else {
            out.emplace_back(i->first, i->second + j->second);
            ++i;
            ++j;
        }
    }
    return out;
}

// Multiplies the factor map by beta^(order) raised to delta (delta may be -1).
Factors bump(Factors f, int order, int delta)
{
    auto it = std::find_if(f.begin(), f.end(), [&](const auto& p) { return p.first >= order; });
    if (it != f.end() && it->first == order) {
        it->second += delta;
        if (it->second == 0) f.erase(it);
    } else {
        f.insert(it, {order, delta});
    }
    return f;
}

int exponent_of(const Factors& f, int order)
{
    for (const auto& [o, e] : f)
        if (o == order) return e;
    return 0;
}

} // namespace

DiffPoly DiffPoly::constant(const GaussianRational& c)
{
    DiffPoly p;
    p.add_term({}, c);
    return p;
}

DiffPoly DiffPoly::beta(int order, int power)
{
    DiffPoly p;
    if (power == 0) {
        p.add_term({}, 1);
    } else {
        p.add_term({{order, power}}, 1);
    }
    return p;
}

DiffPoly DiffPoly::from_monomials(const std::vector<DiffMonomial>& monomials)
{
    DiffPoly p;
    for (const auto& m : monomials) {
        Factors f;
        for (const auto& [order, power] : m.factors) {
            if (order < 0 || power < 0) throw ValidationError("negative order or power in monomial");
            if (power == 0) continue;
            f = bump(std::move(f), order, power);
        }
        p.add_term(f, m.coeff);
    }
    return p;
}

void DiffPoly::add_term(const Factors& f, const GaussianRational& c)
{
    if (c.is_zero()) return;
    auto [it, inserted] = terms_.try_emplace(f, c);
    if (!inserted) {
        it->second += c;
        if (it->second.is_zero()) terms_.erase(it);
    }
}

std::vector<DiffMonomial> DiffPoly::monomials() const
{
    std::vector<DiffMonomial> out;
    out.reserve(terms_.size());
    for (const auto& [f, c] : terms_) out.push_back({c, f});
    return out;
}

int DiffPoly::max_order() const
{
    int m = -1;
    for (const auto& [f, c] : terms_)
        if (!f.empty()) m = std::max(m, f.back().first);
    return m;
}

GaussianRational DiffPoly::coefficient(const Factors& f) const
{
    auto it = terms_.find(f);
    return it == terms_.end() ? GaussianRational{} : it->second;
}

DiffPoly& DiffPoly::operator+=(const DiffPoly& o)
{
    for (const auto& [f, c] : o.terms_) add_term(f, c);
    return *this;
}

DiffPoly& DiffPoly::operator-=(const DiffPoly& o)
{
    for (const auto& [f, c] : o.terms_) add_term(f, -c);
    return *this;
}

DiffPoly& DiffPoly::operator*=(const GaussianRational& c)
{
    if (c.is_zero()) {
        terms_.clear();
        return *this;
    }
    for (auto& [f, coeff] : terms_) coeff *= c;
    return *this;
}

DiffPoly operator*(const DiffPoly& a, const DiffPoly& b)
{
    DiffPoly out;
    for (const auto& [fa, ca] : a.terms_)
        for (const auto& [fb, cb] : b.terms_) out.add_term(multiply(fa, fb), ca * cb);
    return out;
}

DiffPoly DiffPoly::operator-() const
{
    DiffPoly out = *this;
    for (auto& [f, c] : out.terms_) c = -c;
    return out;
}

DiffPoly derive(const DiffPoly& p)
{
    std::vector<DiffMonomial> out;
    for (const auto& m : p.monomials()) {
        for (const auto& [order, power] : m.factors) {
            Factors f = bump(bump(m.factors, order, -1), order + 1, 1);
            out.push_back({m.coeff * GaussianRational(power), std::move(f)});
        }
    }
    return DiffPoly::from_monomials(out);
}

DiffPoly derive(const DiffPoly& p, int times)
{
    DiffPoly out = p;
    for (int k = 0; k < times; ++k) out = derive(out);
    return out;
}

DiffPoly integrate(const DiffPoly& p)
{
    // Peel off the top derivative order: if R = Q' and Q has top order N-1,
    // then R is linear in beta^(N) with coefficient dQ/dbeta^(N-1).
    DiffPoly result;
    DiffPoly rest = p;
    while (!rest.is_zero()) {
        const int top = rest.max_order();
        if (top < 1) throw NotExactError("polynomial is not a total x-derivative");
        std::vector<DiffMonomial> anti;
        for (const auto& m : rest.monomials()) {
            int e = exponent_of(m.factors, top);
            if (e == 0) continue;
            if (e > 1) throw NotExactError("polynomial is nonlinear in its top derivative");
            Factors f = bump(m.factors, top, -1);
            int lower = exponent_of(f, top - 1);
            anti.push_back({m.coeff * GaussianRational::ratio(1, lower + 1), bump(f, top - 1, 1)});
        }
        DiffPoly piece = DiffPoly::from_monomials(anti);
        result += piece;
        rest -= derive(piece);
    }
    return result;
}

std::complex<double> evaluate(const DiffPoly& p, const BetaJet& jet)
{
    std::complex<double> sum = 0.0;
    for (const auto& m : p.monomials()) {
        std::complex<double> term = m.coeff.to_complex();
        for (const auto& [order, power] : m.factors) {
            auto it = jet.find(order);
            if (it == jet.end()) throw MissingOrderError(order);
            std::complex<double> v = 1.0;
            for (int k = 0; k < power; ++k) v *= it->second;
            term *= v;
        }
        sum += term;
    }
    return sum;
}

namespace {

std::string text_coeff(const GaussianRational& c, bool constant_term)
{
    if (c.is_real()) {
        const mpq_class& r = c.re();
        if (!constant_term && r == 1) return "";
        if (!constant_term && r == -1) return "-";
        std::string s = r.get_str();
        if (r.get_den() != 1) s = "(" + s + ")";
        return constant_term ? s : s + "*";
    }
    std::string s = "(" + c.to_string() + ")";
    return constant_term ? s : s + "*";
}

std::string text_monomial(const DiffMonomial& m)
{
    std::string body;
    for (const auto& [order, power] : m.factors) {
        if (!body.empty()) body += "*";
        body += "B" + std::to_string(order);
        if (power > 1) body += "^" + std::to_string(power);
    }
    return text_coeff(m.coeff, m.factors.empty()) + body;
}

std::string latex_rational(const mpq_class& q)
{
    if (q.get_den() == 1) return q.get_num().get_str();
    mpz_class num = abs(q.get_num());
    std::string s = "\\frac{" + num.get_str() + "}{" + q.get_den().get_str() + "}";
    return sgn(q) < 0 ? "-" + s : s;
}

std::string latex_imag(const mpq_class& q)
{
    if (q == 1) return "i";
    if (q == -1) return "-i";
    return latex_rational(q) + "i";
}

std::string latex_coeff(const GaussianRational& c, bool constant_term)
{
    if (c.is_real()) {
        const mpq_class& r = c.re();
        if (!constant_term && r == 1) return "";
        if (!constant_term && r == -1) return "-";
        return latex_rational(r);
    }
    if (sgn(c.re()) == 0) return latex_imag(c.im());
    std::string im = sgn(c.im()) < 0 ? " - " + latex_imag(-c.im()) : " + " + latex_imag(c.im());
    return "\\left(" + latex_rational(c.re()) + im + "\\right)";
}

std::string latex_generator(int order)
{
    switch (order) {
    case 0: return "\\beta";
    case 1: return "\\beta'";
    case 2: return "\\beta''";
    case 3: return "\\beta'''";
    default: return "\\beta^{(" + std::to_string(order) + ")}";
    }
}

std::string latex_monomial(const DiffMonomial& m)
{
    std::string body;
    for (const auto& [order, power] : m.factors) {
        std::string g = latex_generator(order);
        if (power > 1) {
            g = (order == 0 ? g : "(" + g + ")") + "^{" + std::to_string(power) + "}";
        }
        body += g;
    }
    return latex_coeff(m.coeff, m.factors.empty()) + body;
}

nlohmann::json integer_json(const mpz_class& z)
{
    if (z.fits_slong_p()) return static_cast<long>(z.get_si());
    return z.get_str();
}

mpz_class integer_from_json(const nlohmann::json& j)
{
    if (j.is_number_integer()) return mpz_class(std::to_string(j.get<long long>()));
    if (j.is_string()) {
        try {
            return mpz_class(j.get<std::string>());
        } catch (const std::invalid_argument&) {
        }
    }
    throw ValidationError("polynomial JSON: expected an integer, got " + j.dump());
}

mpq_class rational_from_json(const nlohmann::json& j)
{
    if (!j.is_array() || j.size() != 2) throw ValidationError("polynomial JSON: rational must be [num, den]");
    mpz_class num = integer_from_json(j[0]);
    mpz_class den = integer_from_json(j[1]);
    if (den <= 0) throw ValidationError("polynomial JSON: denominator must be positive");
    mpq_class q(num, den);
    q.canonicalize();
    return q;
}

} // namespace

std::string render(const DiffPoly& p, RenderFormat format)
{
    if (format == RenderFormat::json) return to_json(p).dump();
    if (p.is_zero()) return "0";
    std::string out;
    for (const auto& m : p.monomials()) {
        if (format == RenderFormat::text) {
            if (!out.empty()) out += " + ";
            out += text_monomial(m);
        } else {
            std::string t = latex_monomial(m);
            if (out.empty()) {
                out = t;
            } else if (t.front() == '-') {
                out += " - " + t.substr(1);
            } else {
                out += " + " + t;
            }
        }
    }
    return out;
}

nlohmann::json to_json(const DiffPoly& p)
{
    nlohmann::json monomials = nlohmann::json::array();
    for (const auto& m : p.monomials()) {
        nlohmann::json factors = nlohmann::json::array();
        for (const auto& [order, power] : m.factors) factors.push_back({{"order", order}, {"power", power}});
        monomials.push_back({
            {"coeff",
             {{"re", {integer_json(m.coeff.re().get_num()), integer_json(m.coeff.re().get_den())}},
              {"im", {integer_json(m.coeff.im().get_num()), integer_json(m.coeff.im().get_den())}}}},
            {"factors", factors},
        });
    }
    return {{"monomials", monomials}};
}

DiffPoly from_json(const nlohmann::json& j)
{
    if (!j.is_object() || !j.contains("monomials") || !j["monomials"].is_array())
        throw ValidationError("polynomial JSON: missing \"monomials\" array");
    std::vector<DiffMonomial> monomials;
    for (const auto& m : j["monomials"]) {
        if (!m.is_object() || !m.contains("coeff") || !m.contains("factors"))
            throw ValidationError("polynomial JSON: monomial needs \"coeff\" and \"factors\"");
        const auto& c = m["coeff"];
        if (!c.is_object() || !c.contains("re") || !c.contains("im"))
            throw ValidationError("polynomial JSON: coeff needs \"re\" and \"im\"");
        GaussianRational coeff(rational_from_json(c["re"]), rational_from_json(c["im"]));
        Factors f;
        for (const auto& fac : m["factors"]) {
            if (!fac.is_object() || !fac.contains("order") || !fac.contains("power") ||
                !fac["order"].is_number_integer() || !fac["power"].is_number_integer())
                throw ValidationError("polynomial JSON: factor needs integer \"order\" and \"power\"");
            f.emplace_back(fac["order"].get<int>(), fac["power"].get<int>());
        }
        monomials.push_back({coeff, f});
    }
    return DiffPoly::from_monomials(monomials);
}

} // namespace vesselkit
