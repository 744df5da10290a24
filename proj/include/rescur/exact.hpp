#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <complex>
#include <string>

namespace rescur {

using Rational = boost::multiprecision::cpp_rational;

/// Exact complex number with rational real/imaginary parts. std::complex is
/// only specified for the builtin floating types, so we keep our own.
struct ComplexQ {
    Rational re{0};
    Rational im{0};

    ComplexQ() = default;
    ComplexQ(Rational r) : re(std::move(r)) {}
    ComplexQ(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}
    ComplexQ(int r) : re(r) {}
    ComplexQ(int r, int i) : re(r), im(i) {}

    bool is_zero() const { return re == 0 && im == 0; }

    friend ComplexQ operator+(const ComplexQ& a, const ComplexQ& b) {
        return {a.re + b.re, a.im + b.im};
    }
    friend ComplexQ operator-(const ComplexQ& a, const ComplexQ& b) {
        return {a.re - b.re, a.im - b.im};
    }
    friend ComplexQ operator-(const ComplexQ& a) { return {-a.re, -a.im}; }
    friend ComplexQ operator*(const ComplexQ& a, const ComplexQ& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    ComplexQ& operator+=(const ComplexQ& o) { *this = *this + o; return *this; }
    ComplexQ& operator-=(const ComplexQ& o) { *this = *this - o; return *this; }
    ComplexQ& operator*=(const ComplexQ& o) { *this = *this * o; return *this; }

    friend bool operator==(const ComplexQ& a, const ComplexQ& b) {
        return a.re == b.re && a.im == b.im;
    }

    ComplexQ conj() const { return {re, -im}; }

    std::complex<double> to_complex() const {
        return {static_cast<double>(re), static_cast<double>(im)};
    }
};

inline ComplexQ conj(const ComplexQ& c) { return c.conj(); }

template <class C> struct coeff_traits;

template <> struct coeff_traits<ComplexQ> {
    static ComplexQ zero() { return {}; }
    static ComplexQ one() { return {1}; }
    static bool is_zero(const ComplexQ& c) { return c.is_zero(); }
};

template <> struct coeff_traits<std::complex<double>> {
    static std::complex<double> zero() { return {}; }
    static std::complex<double> one() { return {1.0, 0.0}; }
    // Exact-zero test: the double instantiations are used for plumbing where
    // coefficients come from products of exact inputs, never from summed
    // quadrature, so drop only literal zeros.
    static bool is_zero(const std::complex<double>& c) {
        return c.real() == 0.0 && c.imag() == 0.0;
    }
};

} // namespace rescur
