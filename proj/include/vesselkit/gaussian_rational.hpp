#pragma once

#include <complex>
#include <string>

#include <gmpxx.h>

namespace vesselkit {

/// Exact element of Q(i): re + im*i with arbitrary-precision rational parts.
/// mpq_class keeps both parts canonical (positive denominator, reduced).
class GaussianRational {
public:
    GaussianRational() = default;
    GaussianRational(long n) : re_(n) {}
    GaussianRational(mpq_class re, mpq_class im = 0) : re_(std::move(re)), im_(std::move(im))
    {
        re_.canonicalize();
        im_.canonicalize();
    }

    /// p/q (+ 0i); q must be nonzero.
    static GaussianRational ratio(long p, long q);
    static GaussianRational i() { return {0, 1}; }

    const mpq_class& re() const noexcept { return re_; }
    const mpq_class& im() const noexcept { return im_; }

    bool is_zero() const { return sgn(re_) == 0 && sgn(im_) == 0; }
    bool is_real() const { return sgn(im_) == 0; }

    GaussianRational conj() const { return {re_, -im_}; }
    /// Throws std::domain_error on zero.
    GaussianRational inverse() const;

    std::complex<double> to_complex() const { return {re_.get_d(), im_.get_d()}; }

    GaussianRational& operator+=(const GaussianRational& o);
    GaussianRational& operator-=(const GaussianRational& o);
    GaussianRational& operator*=(const GaussianRational& o);

    friend GaussianRational operator+(GaussianRational a, const GaussianRational& b) { return a += b; }
    friend GaussianRational operator-(GaussianRational a, const GaussianRational& b) { return a -= b; }
    friend GaussianRational operator*(GaussianRational a, const GaussianRational& b) { return a *= b; }
    friend GaussianRational operator/(const GaussianRational& a, const GaussianRational& b)
    {
        return a * b.inverse();
    }
    GaussianRational operator-() const { return {-re_, -im_}; }

    friend bool operator==(const GaussianRational& a, const GaussianRational& b)
    {
        return a.re_ == b.re_ && a.im_ == b.im_;
    }

    /// "3/2", "-1/4", "i", "-1/16*i", "1/2 - 3/4*i".
    std::string to_string() const;

private:
    mpq_class re_{0};
    mpq_class im_{0};
};

} // namespace vesselkit
