#pragma once
/*
 * Exact arithmetic over Q and real quadratic fields Q(sqrt k).
 *
 * Rational wraps a GMP rational kept in lowest terms.  QuadNum is
 * a + b*sqrt(k) with rational a, b and square-free k >= 1.  A QuadNum
 * whose b is zero is stored with k = 1, so rationals combine freely with
 * any field; combining two genuinely irrational values from different
 * fields throws.
 */
#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace h2lab {

using BigInt = mpz_class;

/// Thrown for out-of-domain arguments (zero division, mixed fields, ...).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Thrown when a computation would exceed its configured work budget.
struct BudgetExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Rational {
public:
    Rational() : v_(0) {}
    Rational(long n) : v_(n) {}                       // NOLINT(implicit)
    Rational(int n) : v_(n) {}                        // NOLINT(implicit)
    Rational(long long n);                            // NOLINT(implicit)
    Rational(const BigInt& n) : v_(n) {}              // NOLINT(implicit)
    Rational(const BigInt& num, const BigInt& den);
    Rational(long long num, long long den);
    explicit Rational(const mpq_class& q) : v_(q) { v_.canonicalize(); }

    /// Exact value of a finite double.
    static Rational from_double(double x);
    /// Parses "p", "-p", "p/q".
    static Rational parse(const std::string& s);

    BigInt num() const { return v_.get_num(); }
    BigInt den() const { return v_.get_den(); }
    const mpq_class& raw() const { return v_; }

    int sign() const { return sgn(v_); }
    bool is_zero() const { return sgn(v_) == 0; }
    bool is_integer() const { return v_.get_den() == 1; }

    BigInt floor() const;
    BigInt ceil() const;
    /// Nearest integer, halves rounded toward +infinity.
    BigInt round() const;
    /// Integer part, rounded toward zero.
    BigInt trunc() const;
    Rational abs() const { return Rational(::abs(v_)); }
    Rational inverse() const;
    double to_double() const { return v_.get_d(); }
    std::string str() const;

    Rational& operator+=(const Rational& o) { v_ += o.v_; return *this; }
    Rational& operator-=(const Rational& o) { v_ -= o.v_; return *this; }
    Rational& operator*=(const Rational& o) { v_ *= o.v_; return *this; }
    Rational& operator/=(const Rational& o);

    friend Rational operator+(Rational a, const Rational& b) { return a += b; }
    friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
    friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
    friend Rational operator/(Rational a, const Rational& b) { return a /= b; }
    friend Rational operator-(const Rational& a) { return Rational(mpq_class(-a.v_)); }

    friend bool operator==(const Rational& a, const Rational& b) { return a.v_ == b.v_; }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
        int c = cmp(a.v_, b.v_);
        return c < 0 ? std::strong_ordering::less
                     : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }

private:
    mpq_class v_;
};

std::ostream& operator<<(std::ostream& os, const Rational& q);

/// n = k * s^2 with k square-free.  Throws DomainError for n <= 0.
std::pair<BigInt, BigInt> squarefree_part(const BigInt& n);
std::pair<long long, long long> squarefree_part(long long n);

/// floor(sqrt(n)) for n >= 0.
BigInt isqrt(const BigInt& n);
bool is_perfect_square(const BigInt& n);

/// A dyadic approximation value = mantissa * 2^exponent with a rigorous
/// absolute error bound.
struct BinaryFloat {
    BigInt mantissa;
    long exponent = 0;
    Rational error_bound;  ///< |value - true value| <= error_bound

    Rational value() const;
    double to_double() const { return value().to_double(); }
};

class QuadNum {
public:
    QuadNum() : a_(0), b_(0), k_(1) {}
    QuadNum(int n) : a_(n), b_(0), k_(1) {}                 // NOLINT(implicit)
    QuadNum(long n) : a_(n), b_(0), k_(1) {}                // NOLINT(implicit)
    QuadNum(long long n) : a_(n), b_(0), k_(1) {}           // NOLINT(implicit)
    QuadNum(const Rational& a) : a_(a), b_(0), k_(1) {}     // NOLINT(implicit)
    /// a + b*sqrt(k); k must be square-free and >= 1.
    QuadNum(const Rational& a, const Rational& b, long long k);

    /// sqrt(n) for a positive integer n, simplified to s*sqrt(k).
    static QuadNum sqrt_of(long long n);
    /// Parses the text form produced by str().
    static QuadNum parse(const std::string& s);

    const Rational& a() const { return a_; }
    const Rational& b() const { return b_; }
    long long k() const { return k_; }
    bool is_rational() const { return b_.is_zero(); }
    bool is_zero() const { return a_.is_zero() && b_.is_zero(); }

    int sign() const;
    QuadNum abs() const { return sign() < 0 ? -*this : *this; }
    QuadNum conj() const { return QuadNum(a_, -b_, k_); }
    /// Field norm a^2 - b^2 k.
    Rational norm() const { return a_ * a_ - b_ * b_ * Rational(k_); }
    QuadNum inverse() const;
    BigInt floor() const;
    BigInt round() const;
    BigInt trunc() const;

    BinaryFloat to_float(int precision_bits = 128) const;
    double to_double() const;
    std::string str() const;

    QuadNum& operator+=(const QuadNum& o);
    QuadNum& operator-=(const QuadNum& o);
    QuadNum& operator*=(const QuadNum& o);
    QuadNum& operator/=(const QuadNum& o) { return *this *= o.inverse(); }

    friend QuadNum operator+(QuadNum x, const QuadNum& y) { return x += y; }
    friend QuadNum operator-(QuadNum x, const QuadNum& y) { return x -= y; }
    friend QuadNum operator*(QuadNum x, const QuadNum& y) { return x *= y; }
    friend QuadNum operator/(QuadNum x, const QuadNum& y) { return x /= y; }
    friend QuadNum operator-(const QuadNum& x) { return QuadNum(-x.a_, -x.b_, x.k_); }

    friend bool operator==(const QuadNum& x, const QuadNum& y) {
        return x.a_ == y.a_ && x.b_ == y.b_ && x.k_ == y.k_;
    }
    friend std::strong_ordering operator<=>(const QuadNum& x, const QuadNum& y) {
        int s = (x - y).sign();
        return s < 0 ? std::strong_ordering::less
                     : (s > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }

private:
    void canonicalize();
    static long long common_k(const QuadNum& x, const QuadNum& y);

    Rational a_, b_;
    long long k_;
};

std::ostream& operator<<(std::ostream& os, const QuadNum& x);

/// Exact sign of a + b*sqrt(k).
inline int quad_sign(const QuadNum& x) { return x.sign(); }

/// Exact square root inside the same quadratic field (or a new field when x
/// is rational), if one exists.
std::optional<QuadNum> quad_sqrt(const QuadNum& x);

/// Scalar helpers shared by templates instantiated with double or QuadNum.
namespace scalar {
inline int sign(double x) { return (x > 0) - (x < 0); }
inline int sign(const QuadNum& x) { return x.sign(); }
inline double to_double(double x) { return x; }
inline double to_double(const QuadNum& x) { return x.to_double(); }
inline double to_double(const Rational& x) { return x.to_double(); }
double floor(double x);
inline QuadNum floor(const QuadNum& x) { return QuadNum(Rational(x.floor())); }
double trunc(double x);
inline QuadNum trunc(const QuadNum& x) { return QuadNum(Rational(x.trunc())); }
double round(double x);
inline QuadNum round(const QuadNum& x) { return QuadNum(Rational(x.round())); }
/// Integer value of an integral scalar (throws if not integral / too large).
long long to_int(double x);
long long to_int(const QuadNum& x);
template <class T> T from_int(long long n) { return T(n); }
template <> inline double from_int<double>(long long n) { return static_cast<double>(n); }
}  // namespace scalar

}  // namespace h2lab
