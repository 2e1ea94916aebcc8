#pragma once

#include <cstdint>
#include <numeric>
#include <string>

#include "llb/errors.hpp"

namespace llb {

// Exact rational arithmetic on 64-bit integers. All quantities we keep exact
// (normalized Betti numbers, ball frequencies, genus-limit tables) have small
// numerators and denominators, so word-size storage is ample; intermediates
// go through 128-bit scratch so mixed-magnitude sums never overflow silently.
class Rational {
  public:
    constexpr Rational() = default;
    Rational(long long n) : num_(n) {}  // NOLINT: implicit by design
    Rational(long long n, long long d) : num_(n), den_(d) {
        if (den_ == 0) throw ValidationError("rational with zero denominator");
        normalize();
    }

    long long numerator() const { return num_; }
    long long denominator() const { return den_; }

    Rational& operator+=(const Rational& o) {
        return assign(i128(num_) * o.den_ + i128(o.num_) * den_, i128(den_) * o.den_);
    }
    Rational& operator-=(const Rational& o) {
        return assign(i128(num_) * o.den_ - i128(o.num_) * den_, i128(den_) * o.den_);
    }
    Rational& operator*=(const Rational& o) {
        return assign(i128(num_) * o.num_, i128(den_) * o.den_);
    }
    Rational& operator/=(const Rational& o) {
        if (o.num_ == 0) throw ValidationError("rational division by zero");
        return assign(i128(num_) * o.den_, i128(den_) * o.num_);
    }

    friend Rational operator+(Rational a, const Rational& b) { return a += b; }
    friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
    friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
    friend Rational operator/(Rational a, const Rational& b) { return a /= b; }
    friend Rational operator-(const Rational& a) { return Rational(-a.num_, a.den_); }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        return i128(a.num_) * b.den_ < i128(b.num_) * a.den_;  // denominators positive
    }
    friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
    friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
    friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

  private:
    using i128 = __int128;

    void normalize() {
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        const long long g = std::gcd(num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
    }

    Rational& assign(i128 n, i128 d) {
        if (d < 0) {
            n = -n;
            d = -d;
        }
        i128 g = gcd128(n < 0 ? -n : n, d);
        if (g > 1) {
            n /= g;
            d /= g;
        }
        constexpr i128 lo = -i128(1) << 62, hi = i128(1) << 62;
        if (n <= lo || n >= hi || d >= hi)
            throw ValidationError("rational overflow beyond 64-bit storage");
        num_ = static_cast<long long>(n);
        den_ = static_cast<long long>(d);
        return *this;
    }

    static i128 gcd128(i128 a, i128 b) {
        while (b != 0) {
            i128 t = a % b;
            a = b;
            b = t;
        }
        return a;
    }

    long long num_ = 0;
    long long den_ = 1;
};

inline std::string to_string(const Rational& r) {
    if (r.denominator() == 1) return std::to_string(r.numerator());
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

inline Rational parse_rational(const std::string& s) {
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rational(std::stoll(s));
        return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
    } catch (const std::exception&) {
        throw ValidationError("bad rational literal: " + s);
    }
}

inline double to_double(const Rational& r) {
    return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

}  // namespace llb
