#include "h2lab/exactnum.hpp"

#include <cctype>
#include <cmath>
#include <limits>
#include <ostream>

namespace h2lab {

namespace {

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

BigInt pow2(long e) {
    BigInt r = 1;
    mpz_mul_2exp(r.get_mpz_t(), r.get_mpz_t(), static_cast<mp_bitcnt_t>(e));
    return r;
}

// 2^e as a rational, any sign of e.
Rational pow2q(long e) {
    if (e >= 0) return Rational(pow2(e));
    return Rational(BigInt(1), pow2(-e));
}

// floor(log2(q)) for q > 0.
long floor_log2(const Rational& q) {
    long c = static_cast<long>(mpz_sizeinbase(q.num().get_mpz_t(), 2)) -
             static_cast<long>(mpz_sizeinbase(q.den().get_mpz_t(), 2));
    while (pow2q(c) > q) --c;
    while (pow2q(c + 1) <= q) ++c;
    return c;
}

}  // namespace

// ---------------------------------------------------------------- Rational

Rational::Rational(long long n) : v_(static_cast<long>(n)) {}

Rational::Rational(const BigInt& num, const BigInt& den) {
    if (den == 0) throw DomainError("rational with zero denominator");
    v_ = mpq_class(num, den);
    v_.canonicalize();
}

Rational::Rational(long long num, long long den)
    : Rational(BigInt(static_cast<long>(num)), BigInt(static_cast<long>(den))) {}

Rational Rational::from_double(double x) {
    if (!std::isfinite(x)) throw DomainError("non-finite double has no rational value");
    return Rational(mpq_class(x));
}

Rational Rational::parse(const std::string& text) {
    std::string s = trim(text);
    if (s.empty()) throw DomainError("empty rational literal");
    if (s[0] == '+') s = s.substr(1);
    size_t slash = s.find('/');
    auto parse_int = [](const std::string& t) {
        std::string u = trim(t);
        if (u.empty()) throw DomainError("malformed rational literal");
        size_t i = (u[0] == '-') ? 1 : 0;
        if (i == u.size()) throw DomainError("malformed rational literal");
        for (; i < u.size(); ++i)
            if (!std::isdigit(static_cast<unsigned char>(u[i])))
                throw DomainError("malformed rational literal '" + t + "'");
        return BigInt(u, 10);
    };
    if (slash == std::string::npos) return Rational(parse_int(s));
    return Rational(parse_int(s.substr(0, slash)), parse_int(s.substr(slash + 1)));
}

BigInt Rational::floor() const {
    BigInt r;
    mpz_fdiv_q(r.get_mpz_t(), v_.get_num_mpz_t(), v_.get_den_mpz_t());
    return r;
}

BigInt Rational::ceil() const {
    BigInt r;
    mpz_cdiv_q(r.get_mpz_t(), v_.get_num_mpz_t(), v_.get_den_mpz_t());
    return r;
}

BigInt Rational::round() const { return (*this + Rational(1, 2)).floor(); }

BigInt Rational::trunc() const {
    BigInt r;
    mpz_tdiv_q(r.get_mpz_t(), v_.get_num_mpz_t(), v_.get_den_mpz_t());
    return r;
}

Rational Rational::inverse() const {
    if (is_zero()) throw DomainError("inverse of zero");
    return Rational(mpq_class(1 / v_));
}

Rational& Rational::operator/=(const Rational& o) {
    if (o.is_zero()) throw DomainError("division by zero");
    v_ /= o.v_;
    return *this;
}

std::string Rational::str() const { return v_.get_str(10); }

std::ostream& operator<<(std::ostream& os, const Rational& q) { return os << q.str(); }

// ------------------------------------------------------------ integer utils

BigInt isqrt(const BigInt& n) {
    if (n < 0) throw DomainError("isqrt of negative integer");
    BigInt r;
    mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
    return r;
}

bool is_perfect_square(const BigInt& n) {
    return n >= 0 && mpz_perfect_square_p(n.get_mpz_t()) != 0;
}

std::pair<BigInt, BigInt> squarefree_part(const BigInt& n) {
    if (n <= 0) throw DomainError("squarefree_part requires n >= 1");
    BigInt m = n, k = 1, s = 1;
    for (BigInt p = 2; p * p <= m; p += (p == 2 ? 1 : 2)) {
        if (m % p != 0) continue;
        int e = 0;
        while (m % p == 0) {
            m /= p;
            ++e;
        }
        for (int i = 0; i < e / 2; ++i) s *= p;
        if (e % 2 == 1) k *= p;
    }
    k *= m;  // remaining cofactor is 1 or a prime
    return {k, s};
}

std::pair<long long, long long> squarefree_part(long long n) {
    if (n <= 0) throw DomainError("squarefree_part requires n >= 1");
    auto [k, s] = squarefree_part(BigInt(static_cast<long>(n)));
    return {k.get_si(), s.get_si()};
}

Rational BinaryFloat::value() const {
    return Rational(mantissa) * pow2q(exponent);
}

// ----------------------------------------------------------------- QuadNum

QuadNum::QuadNum(const Rational& a, const Rational& b, long long k) : a_(a), b_(b), k_(k) {
    if (k < 1) throw DomainError("QuadNum requires k >= 1");
    auto [kf, s] = squarefree_part(k);
    k_ = kf;
    b_ *= Rational(s);
    canonicalize();
}

void QuadNum::canonicalize() {
    if (k_ == 1) {
        a_ += b_;
        b_ = Rational(0);
    }
    if (b_.is_zero()) k_ = 1;
}

long long QuadNum::common_k(const QuadNum& x, const QuadNum& y) {
    if (x.b_.is_zero()) return y.k_;
    if (y.b_.is_zero()) return x.k_;
    if (x.k_ != y.k_)
        throw DomainError("mixed quadratic fields: sqrt(" + std::to_string(x.k_) + ") vs sqrt(" +
                          std::to_string(y.k_) + ")");
    return x.k_;
}

QuadNum QuadNum::sqrt_of(long long n) {
    if (n < 0) throw DomainError("sqrt of negative integer");
    if (n == 0) return QuadNum();
    auto [k, s] = squarefree_part(n);
    return QuadNum(Rational(0), Rational(s), k);
}

int QuadNum::sign() const {
    int sa = a_.sign(), sb = b_.sign();
    if (sb == 0) return sa;
    if (sa == 0) return sb;
    if (sa == sb) return sa;
    // opposite signs: compare a^2 with b^2 k
    Rational d = a_ * a_ - b_ * b_ * Rational(k_);
    return sa > 0 ? d.sign() : -d.sign();
}

QuadNum QuadNum::inverse() const {
    if (is_zero()) throw DomainError("inverse of zero");
    Rational n = norm();
    return QuadNum(a_ / n, -b_ / n, k_);
}

QuadNum& QuadNum::operator+=(const QuadNum& o) {
    long long k = common_k(*this, o);
    a_ += o.a_;
    b_ += o.b_;
    k_ = k;
    canonicalize();
    return *this;
}

QuadNum& QuadNum::operator-=(const QuadNum& o) {
    long long k = common_k(*this, o);
    a_ -= o.a_;
    b_ -= o.b_;
    k_ = k;
    canonicalize();
    return *this;
}

QuadNum& QuadNum::operator*=(const QuadNum& o) {
    long long k = common_k(*this, o);
    Rational na = a_ * o.a_ + b_ * o.b_ * Rational(k);
    Rational nb = a_ * o.b_ + b_ * o.a_;
    a_ = na;
    b_ = nb;
    k_ = k;
    canonicalize();
    return *this;
}

BinaryFloat QuadNum::to_float(int precision_bits) const {
    if (precision_bits < 32) throw DomainError("to_float requires precision_bits >= 32");
    BinaryFloat out;
    Rational m0 = a_.abs() + b_.abs();  // lower bound for |a| + |b| sqrt(k)
    if (m0.is_zero()) {
        out.mantissa = 0;
        out.exponent = 0;
        out.error_bound = Rational(0);
        return out;
    }
    long s = precision_bits - floor_log2(m0);
    Rational scale = pow2q(s);
    BigInt A = (a_ * scale).floor();
    BigInt B = 0;
    if (!b_.is_zero()) {
        Rational q = b_ * b_ * Rational(k_) * scale * scale;
        B = isqrt(q.floor());
        if (b_.sign() < 0) B = -B;
    }
    out.mantissa = A + B;
    out.exponent = -s;
    out.error_bound = pow2q(1 - s);
    return out;
}

double QuadNum::to_double() const {
    if (b_.is_zero()) return a_.to_double();
    return to_float(64).to_double();
}

BigInt QuadNum::floor() const {
    if (b_.is_zero()) return a_.floor();
    BigInt n = to_float(64).value().floor();
    while ((*this - QuadNum(Rational(n))).sign() < 0) n -= 1;
    while ((*this - QuadNum(Rational(BigInt(n + 1)))).sign() >= 0) n += 1;
    return n;
}

BigInt QuadNum::round() const { return (*this + QuadNum(Rational(1, 2))).floor(); }

BigInt QuadNum::trunc() const {
    if (sign() >= 0) return floor();
    return -((-*this).floor());
}

std::string QuadNum::str() const {
    if (b_.is_zero()) return a_.str();
    std::string s = a_.str();
    s += b_.sign() < 0 ? " - " : " + ";
    s += b_.abs().str() + "*sqrt(" + std::to_string(k_) + ")";
    return s;
}

QuadNum QuadNum::parse(const std::string& text) {
    std::string s = trim(text);
    size_t sq = s.find("*sqrt(");
    if (sq == std::string::npos) return QuadNum(Rational::parse(s));
    size_t close = s.find(')', sq);
    if (close == std::string::npos || trim(s.substr(close + 1)) != "")
        throw DomainError("malformed quadratic literal '" + text + "'");
    long long k = 0;
    try {
        k = std::stoll(s.substr(sq + 6, close - sq - 6));
    } catch (const std::exception&) {
        throw DomainError("malformed radicand in '" + text + "'");
    }
    std::string left = s.substr(0, sq);
    size_t plus = left.rfind(" + "), minus = left.rfind(" - ");
    size_t pos = std::string::npos;
    if (plus != std::string::npos && (minus == std::string::npos || plus > minus)) pos = plus;
    else if (minus != std::string::npos) pos = minus;
    Rational a(0), b;
    if (pos == std::string::npos) {
        b = Rational::parse(left);
    } else {
        a = Rational::parse(left.substr(0, pos));
        b = Rational::parse(left.substr(pos + 3));
        if (left[pos + 1] == '-') b = -b;
    }
    return QuadNum(a, b, k);
}

std::ostream& operator<<(std::ostream& os, const QuadNum& x) { return os << x.str(); }

std::optional<QuadNum> quad_sqrt(const QuadNum& x) {
    int sg = x.sign();
    if (sg < 0) return std::nullopt;
    if (sg == 0) return QuadNum();
    if (x.is_rational()) {
        const Rational& r = x.a();
        BigInt pq = r.num() * r.den();
        auto [k, s] = squarefree_part(pq);
        return QuadNum(Rational(0), Rational(s, r.den()), k.get_si());
    }
    Rational n2 = x.norm();
    if (n2.sign() < 0) return std::nullopt;
    if (!is_perfect_square(n2.num()) || !is_perfect_square(n2.den())) return std::nullopt;
    Rational n(isqrt(n2.num()), isqrt(n2.den()));
    for (const Rational& c2 : {(x.a() + n) / Rational(2), (x.a() - n) / Rational(2)}) {
        if (c2.sign() <= 0) continue;
        if (!is_perfect_square(c2.num()) || !is_perfect_square(c2.den())) continue;
        Rational c(isqrt(c2.num()), isqrt(c2.den()));
        Rational d = x.b() / (Rational(2) * c);
        QuadNum y(c, d, x.k());
        if (y * y == x) return y.sign() < 0 ? -y : y;
    }
    return std::nullopt;
}

namespace scalar {
double floor(double x) { return std::floor(x); }
double trunc(double x) { return std::trunc(x); }
double round(double x) { return std::floor(x + 0.5); }
long long to_int(double x) {
    if (!std::isfinite(x) || std::fabs(x) > 9.0e15) throw DomainError("integer conversion out of range");
    return static_cast<long long>(std::llround(x));
}
long long to_int(const QuadNum& x) {
    if (!x.is_rational() || !x.a().is_integer()) throw DomainError("value is not an integer");
    BigInt n = x.a().num();
    if (!n.fits_slong_p()) throw DomainError("integer conversion out of range");
    return n.get_si();
}
}  // namespace scalar

}  // namespace h2lab
