#include "vesselkit/gaussian_rational.hpp"

#include <stdexcept>

namespace vesselkit {

GaussianRational GaussianRational::ratio(long p, long q)
{
    if (q == 0) throw std::domain_error("zero denominator");
    return GaussianRational(mpq_class(p, q));
}

GaussianRational GaussianRational::inverse() const
{
    if (is_zero()) throw std::domain_error("inverse of zero Gaussian rational");
    mpq_class norm = re_ * re_ + im_ * im_;
    return {re_ / norm, -im_ / norm};
}

GaussianRational& GaussianRational::operator+=(const GaussianRational& o)
{
    re_ += o.re_;
    im_ += o.im_;
    return *this;
}

GaussianRational& GaussianRational::operator-=(const GaussianRational& o)
{
    re_ -= o.re_;
    im_ -= o.im_;
    return *this;
}

GaussianRational& GaussianRational::operator*=(const GaussianRational& o)
{
    mpq_class r = re_ * o.re_ - im_ * o.im_;
    mpq_class m = re_ * o.im_ + im_ * o.re_;
    re_ = std::move(r);
    im_ = std::move(m);
    return *this;
}

std::string GaussianRational::to_string() const
{
    if (is_zero()) return "0";
    auto imag = [](const mpq_class& q) -> std::string {
        if (q == 1) return "i";
        if (q == -1) return "-i";
        return q.get_str() + "*i";
    };
    if (sgn(im_) == 0) return re_.get_str();
    if (sgn(re_) == 0) return imag(im_);
    if (sgn(im_) < 0) return re_.get_str() + " - " + imag(-im_);
    return re_.get_str() + " + " + imag(im_);
}

} // namespace vesselkit
