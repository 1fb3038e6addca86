#pragma once

#include <climits>
#include <memory>
#include <ostream>
#include <sstream>

#include "core.hpp"

namespace iwa {

// Half-integers, stored doubled. Valuations on E live in (1/2)Z.
struct HalfInt {
    long twice = 0;
    static HalfInt integer(long v) { return HalfInt{2 * v}; }
    bool operator==(const HalfInt&) const = default;
    auto operator<=>(const HalfInt&) const = default;
    HalfInt operator+(HalfInt o) const { return HalfInt{twice + o.twice}; }
    HalfInt operator-(HalfInt o) const { return HalfInt{twice - o.twice}; }
    bool is_integer() const { return twice % 2 == 0; }
    std::string str() const { return std::to_string(twice) + "/2"; }
    mpq_class as_rational() const { return mpq_class(twice, 2); }
};

constexpr long kInfPrec = LONG_MAX / 4;

// Capped-relative p-adic number: p^val * unit, unit known mod p^rel.
// rel == 0 means "zero to precision val". Exact zero is a separate state.
class PadicScalar {
public:
    PadicScalar() = default;

    static PadicScalar exact_zero(int p) {
        PadicScalar x;
        x.p_ = p;
        x.ez_ = true;
        x.v_ = kInfPrec;
        return x;
    }
    static PadicScalar zero_to(int p, long absprec) {
        PadicScalar x;
        x.p_ = p;
        x.v_ = absprec;
        return x;
    }
    // x known modulo p^absprec.
    static PadicScalar from_int(int p, const mpz_class& x, long absprec) {
        if (x == 0) return zero_to(p, absprec);
        mpz_class u = x;
        long v = remove_p(u, p);
        if (v >= absprec) return zero_to(p, absprec);
        return from_parts(p, v, u, static_cast<int>(absprec - v));
    }
    static PadicScalar from_int_rel(int p, const mpz_class& x, int relprec) {
        if (x == 0) return exact_zero(p);
        mpz_class u = x;
        long v = remove_p(u, p);
        return from_parts(p, v, u, relprec);
    }
    static PadicScalar from_long(int p, long x, int relprec) { return from_int_rel(p, mpz_class(x), relprec); }
    static PadicScalar from_rational(int p, const mpq_class& q, int relprec) {
        if (q == 0) return exact_zero(p);
        mpz_class n = q.get_num(), d = q.get_den();
        long v = remove_p(n, p) - remove_p(d, p);
        mpz_class m = pow_ui(p, relprec);
        mpz_class u = mod(n * inv_mod(d, m), m);
        return from_parts(p, v, u, relprec);
    }
    static PadicScalar from_parts(int p, long v, const mpz_class& unit, int rel) {
        PadicScalar x;
        x.p_ = p;
        x.v_ = v;
        x.r_ = std::max(rel, 0);
        if (x.r_ == 0) return x;
        x.u_ = mod(unit, pow_ui(p, x.r_));
        if (x.u_ % p == 0) throw InvalidArgument("unit part divisible by p");
        return x;
    }

    int prime() const { return p_; }
    bool is_exact_zero() const { return ez_; }
    // Exact zero or zero to the known precision.
    bool is_zero() const { return ez_ || r_ == 0; }
    long abs_prec() const { return ez_ ? kInfPrec : v_ + r_; }
    int rel_prec() const { return r_; }
    const mpz_class& unit() const { return u_; }

    long valuation() const {
        if (ez_) throw DivisionByZero("exact zero has no valuation");
        if (r_ == 0) throw PrecisionError("valuation of a value indistinguishable from zero");
        return v_;
    }
    // Lower bound valid in every state (kInfPrec for exact zero).
    long valuation_bound() const { return v_; }

    PadicScalar with_abs_prec(long a) const {
        if (ez_) return *this;
        if (a >= abs_prec()) return *this;
        if (r_ == 0 || a <= v_) return zero_to(p_, a);
        return from_parts(p_, v_, u_, static_cast<int>(a - v_));
    }
    PadicScalar with_rel_prec(int r) const {
        if (ez_ || r >= r_) return *this;
        return from_parts(p_, v_, u_, r);
    }

    // Integer representative of p^-shift * x mod p^(abs - shift); requires val >= shift.
    mpz_class scaled_integer(long shift) const {
        if (ez_ || r_ == 0) return 0;
        if (v_ < shift) throw PrecisionError("scaled_integer below valuation");
        return u_ * pow_ui(p_, v_ - shift);
    }
    mpq_class to_rational() const {
        if (is_zero()) return 0;
        mpq_class q(u_);
        if (v_ >= 0)
            q *= mpq_class(pow_ui(p_, v_));
        else
            q /= mpq_class(pow_ui(p_, -v_));
        return q;
    }

    // Same, with the unit taken in the symmetric range (-p^rel/2, p^rel/2].
    mpq_class to_rational_balanced() const {
        if (is_zero()) return 0;
        mpz_class m = pow_ui(p_, r_), u = u_;
        if (2 * u > m) u -= m;
        mpq_class q(u);
        if (v_ >= 0)
            q *= mpq_class(pow_ui(p_, v_));
        else
            q /= mpq_class(pow_ui(p_, -v_));
        return q;
    }

    PadicScalar operator-() const {
        if (is_zero()) return *this;
        return from_parts(p_, v_, -u_, r_);
    }
    friend PadicScalar operator+(const PadicScalar& x, const PadicScalar& y) {
        if (x.ez_) return y;
        if (y.ez_) return x;
        check(x, y);
        long a = std::min(x.abs_prec(), y.abs_prec());
        long v = std::min(x.v_, y.v_);
        if (a <= v) return zero_to(x.p_, a);
        mpz_class s = 0;
        if (x.r_ > 0) s += x.u_ * pow_ui(x.p_, x.v_ - v);
        if (y.r_ > 0) s += y.u_ * pow_ui(x.p_, y.v_ - v);
        s = mod(s, pow_ui(x.p_, a - v));
        if (s == 0) return zero_to(x.p_, a);
        long dv = remove_p(s, x.p_);
        return from_parts(x.p_, v + dv, s, static_cast<int>(a - v - dv));
    }
    friend PadicScalar operator-(const PadicScalar& x, const PadicScalar& y) { return x + (-y); }
    friend PadicScalar operator*(const PadicScalar& x, const PadicScalar& y) {
        if (x.ez_ || y.ez_) return exact_zero(x.ez_ ? x.p_ : y.p_);
        check(x, y);
        long v = x.v_ + y.v_;
        int r = std::min(x.r_, y.r_);
        if (r == 0) return zero_to(x.p_, v);
        return from_parts(x.p_, v, x.u_ * y.u_, r);
    }
    friend PadicScalar operator/(const PadicScalar& x, const PadicScalar& y) {
        if (y.ez_) throw DivisionByZero("division by exact zero");
        if (y.r_ == 0) throw PrecisionError("division by a value indistinguishable from zero");
        if (x.ez_) return x;
        check(x, y);
        long v = x.v_ - y.v_;
        int r = std::min(x.r_, y.r_);
        if (r == 0) return zero_to(x.p_, v);
        mpz_class m = pow_ui(x.p_, r);
        return from_parts(x.p_, v, x.u_ * inv_mod(y.u_, m), r);
    }
    PadicScalar& operator+=(const PadicScalar& o) { return *this = *this + o; }
    PadicScalar& operator-=(const PadicScalar& o) { return *this = *this - o; }
    PadicScalar& operator*=(const PadicScalar& o) { return *this = *this * o; }

    PadicScalar pow(long e) const {
        if (e < 0) return from_long(p_, 1, r_ > 0 ? r_ : 1) / pow(-e);
        PadicScalar r = from_long(p_, 1, ez_ ? 1 : std::max(r_, 1));
        if (e == 0) return r;
        PadicScalar b = *this;
        r = b;
        for (long i = 1; i < e; ++i) r = r * b;
        return r;
    }

    // Agreement to the shared precision.
    friend bool operator==(const PadicScalar& x, const PadicScalar& y) { return (x - y).is_zero(); }

    std::string str() const {
        if (ez_) return "0";
        if (r_ == 0) return "O(" + std::to_string(p_) + "^" + std::to_string(v_) + ")";
        std::ostringstream os;
        os << u_.get_str() << "*" << p_ << "^" << v_ << "+O(" << p_ << "^" << abs_prec() << ")";
        return os.str();
    }

private:
    static void check(const PadicScalar& x, const PadicScalar& y) {
        if (x.p_ != y.p_) throw InvalidArgument("mixed primes in p-adic arithmetic");
    }
    int p_ = 0;
    bool ez_ = false;
    long v_ = 0;
    int r_ = 0;
    mpz_class u_;
};

// Teichmueller lift of a mod p to precision M: the fixed point of x -> x^p.
inline PadicScalar teichmuller(long a, const Precision& prec) {
    int p = prec.p;
    if (pmod(a, p) == 0) throw InvalidArgument("Teichmueller lift of a multiple of p");
    mpz_class m = pow_ui(p, prec.M);
    mpz_class x = pmod(a, p), pp = p;
    for (int i = 0; i < prec.M; ++i) mpz_powm(x.get_mpz_t(), x.get_mpz_t(), pp.get_mpz_t(), m.get_mpz_t());
    return PadicScalar::from_int(p, x, prec.M);
}

inline mpz_class teichmuller_int(long a, int p, int M) { return teichmuller(a, Precision{p, M, 1}).scaled_integer(0); }

// zeta^e with zeta the Teichmueller lift of the least primitive root mod p.
struct RootOfUnity {
    int p = 5;
    int e = 0;  // exponent mod p-1

    static RootOfUnity one(int p) { return {p, 0}; }
    static RootOfUnity minus_one(int p) { return {p, (p - 1) / 2}; }
    static RootOfUnity of_residue(int p, long a) { return {p, index_mod_p(a, p)}; }
    static RootOfUnity from_sign(int p, int s) { return s >= 0 ? one(p) : minus_one(p); }

    int order_mod() const { return p - 1; }
    RootOfUnity operator*(RootOfUnity o) const { return {p, static_cast<int>(pmod(e + o.e, p - 1))}; }
    RootOfUnity inverse() const { return {p, static_cast<int>(pmod(-e, p - 1))}; }
    RootOfUnity pow(long n) const { return {p, static_cast<int>(pmod(e * n, p - 1))}; }
    bool is_one() const { return pmod(e, p - 1) == 0; }
    bool is_minus_one() const { return pmod(e, p - 1) == (p - 1) / 2; }
    bool operator==(const RootOfUnity& o) const { return p == o.p && pmod(e - o.e, p - 1) == 0; }
    long residue() const { return powmod_l(primitive_root(p), e, p); }
    PadicScalar value(int M) const {
        if (is_one()) return PadicScalar::from_long(p, 1, M);
        if (is_minus_one()) return PadicScalar::from_long(p, -1, M);
        return teichmuller(residue(), Precision{p, M, 1});
    }
};

// Parameters of the form at p: k and eps = eps_f(p). Shared and immutable.
struct FormData {
    int p;
    int k;
    RootOfUnity eps;
    int prec;            // precision of the cached eps
    PadicScalar eps_val;
    PadicScalar alpha2;  // -eps * p^(k+1)
};
using Form = std::shared_ptr<const FormData>;

constexpr int kFormPrec = 160;

inline Form make_form(int p, int k, RootOfUnity eps, int prec = kFormPrec) {
    if (p < 3 || !is_prime(p)) throw InvalidArgument("p must be an odd prime");
    if (k < 0) throw InvalidArgument("k must be nonnegative");
    if (eps.p != p) throw InvalidArgument("eps lives in a different Z_p");
    PadicScalar e = eps.value(prec);
    PadicScalar a2 = -(e * PadicScalar::from_int_rel(p, pow_ui(p, k + 1), prec));
    return std::make_shared<const FormData>(FormData{p, k, eps, prec, e, a2});
}

inline bool same_form(const Form& a, const Form& b) {
    if (!a || !b) return true;
    return a->p == b->p && a->k == b->k && a->eps == b->eps;
}

// a + b*alpha with alpha^2 = -eps p^(k+1). A null form means b is exactly zero.
class QuadExtScalar {
public:
    QuadExtScalar() = default;
    QuadExtScalar(PadicScalar a, PadicScalar b, Form f) : a_(std::move(a)), b_(std::move(b)), f_(std::move(f)) {
        if (!f_ && !b_.is_exact_zero()) throw InvalidArgument("alpha component without a form");
    }
    explicit QuadExtScalar(PadicScalar a, Form f = nullptr)
        : a_(std::move(a)), b_(PadicScalar::exact_zero(a_.prime())), f_(std::move(f)) {}

    static QuadExtScalar alpha(const Form& f) {
        return QuadExtScalar(PadicScalar::exact_zero(f->p), PadicScalar::from_long(f->p, 1, f->prec), f);
    }
    static QuadExtScalar from_long(int p, long x, int rel, const Form& f = nullptr) {
        return QuadExtScalar(PadicScalar::from_long(p, x, rel), f);
    }
    static QuadExtScalar from_rational(int p, const mpq_class& q, int rel, const Form& f = nullptr) {
        return QuadExtScalar(PadicScalar::from_rational(p, q, rel), f);
    }

    const PadicScalar& a() const { return a_; }
    const PadicScalar& b() const { return b_; }
    const Form& form() const { return f_; }
    int prime() const { return a_.prime(); }
    bool in_base_field() const { return b_.is_exact_zero(); }
    bool is_exact_zero() const { return a_.is_exact_zero() && b_.is_exact_zero(); }
    bool is_zero() const { return a_.is_zero() && b_.is_zero(); }

    // min(v(a), v(b) + (k+1)/2). Multiplicative whenever E is a field.
    HalfInt valuation() const {
        if (is_exact_zero()) throw DivisionByZero("exact zero has no valuation");
        if (is_zero()) throw PrecisionError("valuation of a value indistinguishable from zero");
        long best = LONG_MAX;
        if (!a_.is_zero()) best = 2 * a_.valuation();
        if (!b_.is_zero()) best = std::min(best, 2 * b_.valuation() + f_->k + 1);
        return HalfInt{best};
    }
    // Absolute precision of the value, as a half-integer.
    HalfInt abs_prec() const {
        long pa = a_.is_exact_zero() ? kInfPrec : 2 * a_.abs_prec();
        long pb = b_.is_exact_zero() ? kInfPrec : 2 * b_.abs_prec() + (f_ ? f_->k + 1 : 0);
        return HalfInt{std::min(pa, pb)};
    }
    QuadExtScalar with_abs_prec(long a) const {
        long kb = f_ ? (f_->k + 1) / 2 : 0;
        return QuadExtScalar(a_.with_abs_prec(a), b_.with_abs_prec(a - kb), f_);
    }

    QuadExtScalar conj() const { return QuadExtScalar(a_, -b_, f_); }
    // a^2 - alpha^2 b^2, the norm down to Q_p.
    PadicScalar norm() const {
        if (b_.is_exact_zero()) return a_ * a_;
        return a_ * a_ - f_->alpha2 * b_ * b_;
    }

    QuadExtScalar operator-() const { return QuadExtScalar(-a_, -b_, f_); }
    friend QuadExtScalar operator+(const QuadExtScalar& x, const QuadExtScalar& y) {
        Form f = join(x, y);
        return QuadExtScalar(x.a_ + y.a_, x.b_ + y.b_, f);
    }
    friend QuadExtScalar operator-(const QuadExtScalar& x, const QuadExtScalar& y) { return x + (-y); }
    friend QuadExtScalar operator*(const QuadExtScalar& x, const QuadExtScalar& y) {
        Form f = join(x, y);
        if (x.b_.is_exact_zero() && y.b_.is_exact_zero()) return QuadExtScalar(x.a_ * y.a_, f);
        PadicScalar re = x.a_ * y.a_ + f->alpha2 * (x.b_ * y.b_);
        PadicScalar im = x.a_ * y.b_ + x.b_ * y.a_;
        return QuadExtScalar(re, im, f);
    }
    friend QuadExtScalar operator/(const QuadExtScalar& x, const QuadExtScalar& y) {
        if (y.is_exact_zero()) throw DivisionByZero("division by exact zero");
        Form f = join(x, y);
        if (y.b_.is_exact_zero()) return QuadExtScalar(x.a_ / y.a_, x.b_ / y.a_, f);
        PadicScalar n = y.norm();
        QuadExtScalar t = x * y.conj();
        return QuadExtScalar(t.a_ / n, t.b_ / n, f);
    }
    QuadExtScalar& operator+=(const QuadExtScalar& o) { return *this = *this + o; }
    QuadExtScalar& operator-=(const QuadExtScalar& o) { return *this = *this - o; }
    QuadExtScalar& operator*=(const QuadExtScalar& o) { return *this = *this * o; }

    friend bool operator==(const QuadExtScalar& x, const QuadExtScalar& y) { return (x - y).is_zero(); }

    std::string str() const {
        if (b_.is_exact_zero()) return a_.str();
        return "(" + a_.str() + ") + (" + b_.str() + ")*alpha";
    }

private:
    static Form join(const QuadExtScalar& x, const QuadExtScalar& y) {
        if (x.prime() != y.prime()) throw InvalidArgument("mixed primes in p-adic arithmetic");
        if (!same_form(x.f_, y.f_)) throw InvalidArgument("mixed forms in E arithmetic");
        return x.f_ ? x.f_ : y.f_;
    }
    PadicScalar a_;
    PadicScalar b_;
    Form f_;
};

inline QuadExtScalar alpha_from_form(int p, int k, RootOfUnity eps, const Precision& prec) {
    prec.validate();
    if (prec.p != p) throw InvalidArgument("precision prime differs from p");
    return QuadExtScalar::alpha(make_form(p, k, eps, std::max(kFormPrec, prec.M + 2 * k + 8)));
}

inline std::ostream& operator<<(std::ostream& os, const PadicScalar& x) { return os << x.str(); }
inline std::ostream& operator<<(std::ostream& os, const QuadExtScalar& x) { return os << x.str(); }

}  // namespace iwa
