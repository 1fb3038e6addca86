#pragma once

#include <gmp.h>

#include "padic.hpp"

namespace iwa {

static_assert(GMP_NUMB_BITS == 64, "limb packing assumes 64-bit limbs");

namespace detail {

inline size_t bitlen(const mpz_class& x) { return x == 0 ? 0 : mpz_sizeinbase(x.get_mpz_t(), 2); }

// Writes the nonnegative integers xs into one big integer, slot i at bit i*bits.
inline void pack(mpz_class& out, const std::vector<mpz_class>& xs, size_t count, size_t bits) {
    size_t words = (count * bits + 63) / 64 + 2;
    std::vector<mp_limb_t> buf(words, 0);
    for (size_t i = 0; i < count; ++i) {
        const mpz_srcptr z = xs[i].get_mpz_t();
        size_t n = mpz_size(z);
        size_t off = i * bits, w = off / 64, sh = off % 64;
        for (size_t j = 0; j < n; ++j) {
            mp_limb_t l = mpz_getlimbn(z, j);
            buf[w + j] |= l << sh;
            if (sh) buf[w + j + 1] |= l >> (64 - sh);
        }
    }
    while (words > 0 && buf[words - 1] == 0) --words;
    mp_limb_t* d = mpz_limbs_write(out.get_mpz_t(), std::max<size_t>(words, 1));
    for (size_t j = 0; j < words; ++j) d[j] = buf[j];
    mpz_limbs_finish(out.get_mpz_t(), static_cast<mp_size_t>(words));
}

inline void unpack(std::vector<mpz_class>& out, const mpz_class& z, size_t count, size_t bits) {
    const mp_limb_t* d = mpz_limbs_read(z.get_mpz_t());
    size_t n = mpz_size(z.get_mpz_t());
    size_t sw = (bits + 63) / 64;
    std::vector<mp_limb_t> tmp(sw + 1);
    auto limb = [&](size_t k) -> mp_limb_t { return k < n ? d[k] : 0; };
    for (size_t i = 0; i < count; ++i) {
        size_t off = i * bits, w = off / 64, sh = off % 64;
        for (size_t j = 0; j < sw; ++j) {
            mp_limb_t lo = limb(w + j) >> sh;
            mp_limb_t hi = sh ? (limb(w + j + 1) << (64 - sh)) : 0;
            tmp[j] = lo | hi;
        }
        size_t extra = sw * 64 - bits;
        if (extra) tmp[sw - 1] &= (~mp_limb_t(0)) >> extra;
        size_t used = sw;
        while (used > 0 && tmp[used - 1] == 0) --used;
        mp_limb_t* o = mpz_limbs_write(out[i].get_mpz_t(), std::max<size_t>(used, 1));
        for (size_t j = 0; j < used; ++j) o[j] = tmp[j];
        mpz_limbs_finish(out[i].get_mpz_t(), static_cast<mp_size_t>(used));
    }
}

inline size_t effective_len(const std::vector<mpz_class>& x, size_t n) {
    size_t l = std::min(x.size(), n);
    while (l > 0 && x[l - 1] == 0) --l;
    return l;
}

}  // namespace detail

// Truncated product of integer sequences with nonnegative entries, reduced mod m.
// Long inputs go through Kronecker substitution so GMP's FFT does the work.
inline std::vector<mpz_class> mul_trunc(const std::vector<mpz_class>& x, const std::vector<mpz_class>& y, size_t n,
                                        const mpz_class& m) {
    std::vector<mpz_class> r(n);
    size_t lx = detail::effective_len(x, n), ly = detail::effective_len(y, n);
    if (lx == 0 || ly == 0) return r;
    if (std::min(lx, ly) <= 12) {
        for (size_t i = 0; i < lx; ++i) {
            if (x[i] == 0) continue;
            for (size_t j = 0; j < ly && i + j < n; ++j)
                mpz_addmul(r[i + j].get_mpz_t(), x[i].get_mpz_t(), y[j].get_mpz_t());
        }
    } else {
        size_t bx = 0, by = 0;
        for (size_t i = 0; i < lx; ++i) bx = std::max(bx, detail::bitlen(x[i]));
        for (size_t i = 0; i < ly; ++i) by = std::max(by, detail::bitlen(y[i]));
        size_t bits = bx + by + detail::bitlen(mpz_class(static_cast<unsigned long>(std::min(lx, ly)))) + 1;
        mpz_class zx, zy;
        detail::pack(zx, x, lx, bits);
        detail::pack(zy, y, ly, bits);
        zx *= zy;
        size_t cnt = std::min(n, lx + ly - 1);
        detail::unpack(r, zx, cnt, bits);
    }
    for (auto& c : r) mpz_mod(c.get_mpz_t(), c.get_mpz_t(), m.get_mpz_t());
    return r;
}

// p^shift * x as a scalar known to absolute precision shift + cap.
inline PadicScalar padic_from_fixed(int p, const mpz_class& x, long shift, long cap) {
    if (cap <= 0) return PadicScalar::zero_to(p, shift + std::max(cap, 0L));
    mpz_class u = mod(x, pow_ui(p, cap));
    if (u == 0) return PadicScalar::zero_to(p, shift + cap);
    long v = remove_p(u, p);
    return PadicScalar::from_parts(p, shift + v, u, static_cast<int>(cap - v));
}

// Truncated power series with coefficients in E, in fixed-point form:
//   value = p^shift * (A(X) + alpha * B(X)),  A, B integral and known mod p^cap.
// Every coefficient therefore has absolute precision shift + cap. An empty B
// means the series is Q_p-valued. Length of A is the X-adic precision, unless
// the series is X-exact: a polynomial whose terms past the stored length are
// zero to the p-adic precision.
class Series {
public:
    Series() = default;

    static Series exact_zero(int p, int n, Form f = nullptr) {
        Series s;
        s.p_ = p;
        s.f_ = std::move(f);
        s.ez_ = true;
        s.xe_ = true;
        s.a_.assign(n, 0);
        return s;
    }
    static Series zero_to(int p, int n, long absprec, Form f = nullptr) {
        Series s;
        s.p_ = p;
        s.f_ = std::move(f);
        s.shift_ = absprec;
        s.cap_ = 0;
        s.xe_ = true;
        s.a_.assign(n, 0);
        return s;
    }
    // Integer coefficients known mod p^cap, scaled by p^shift.
    static Series from_ints(int p, std::vector<mpz_class> a, long shift, int cap, Form f = nullptr,
                            std::vector<mpz_class> b = {}, bool x_exact = false) {
        Series s;
        s.xe_ = x_exact;
        s.p_ = p;
        s.f_ = std::move(f);
        s.a_ = std::move(a);
        s.b_ = std::move(b);
        if (!s.b_.empty()) {
            if (!s.f_) throw InvalidArgument("alpha part without a form");
            s.b_.resize(s.a_.size());
        }
        s.shift_ = shift;
        s.cap_ = std::max(cap, 0);
        s.reduce();
        s.normalize();
        return s;
    }
    static Series constant(const QuadExtScalar& c, int n) {
        std::vector<QuadExtScalar> v(1, c);
        return from_scalars(c.prime(), v, n, c.form(), true);
    }
    static Series one(int p, int n, int cap, Form f = nullptr) {
        std::vector<mpz_class> a(n);
        a[0] = 1;
        return from_ints(p, std::move(a), 0, cap, std::move(f), {}, true);
    }
    // Coefficients beyond the vector are exact zeros. Precision is the minimum
    // over the inputs.
    static Series from_scalars(int p, const std::vector<QuadExtScalar>& c, int n, Form f = nullptr,
                               bool x_exact = false) {
        long absp = kInfPrec, minv = kInfPrec;
        bool any_b = false;
        for (const auto& x : c) {
            if (x.form()) f = x.form();
            for (const PadicScalar* part : {&x.a(), &x.b()}) {
                if (part->is_exact_zero()) continue;
                absp = std::min(absp, part->abs_prec());
                if (!part->is_zero()) minv = std::min(minv, part->valuation());
            }
            if (!x.b().is_exact_zero()) any_b = true;
        }
        if (absp == kInfPrec) return exact_zero(p, n, f);
        if (minv == kInfPrec || minv >= absp) {
            Series z = zero_to(p, n, absp, f);
            z.xe_ = x_exact;
            return z;
        }
        int cap = static_cast<int>(absp - minv);
        std::vector<mpz_class> A(n), B;
        if (any_b) B.assign(n, 0);
        for (size_t i = 0; i < c.size() && static_cast<int>(i) < n; ++i) {
            A[i] = c[i].a().with_abs_prec(absp).scaled_integer(minv);
            if (any_b) B[i] = c[i].b().with_abs_prec(absp).scaled_integer(minv);
        }
        return from_ints(p, std::move(A), minv, cap, f, std::move(B), x_exact && static_cast<int>(c.size()) <= n);
    }

    int prime() const { return p_; }
    const Form& form() const { return f_; }
    int size() const { return static_cast<int>(a_.size()); }
    long shift() const { return shift_; }
    int cap() const { return cap_; }
    bool is_exact_zero() const { return ez_; }
    bool has_alpha() const { return !b_.empty(); }
    const std::vector<mpz_class>& A() const { return a_; }
    const std::vector<mpz_class>& B() const { return b_; }
    long abs_prec() const { return ez_ ? kInfPrec : shift_ + cap_; }
    // Every coefficient has valuation at least this (a part) once normalized.
    long valuation_floor() const { return ez_ ? kInfPrec : shift_; }
    bool is_zero() const { return ez_ || cap_ == 0; }
    bool x_exact() const { return xe_; }
    // Index of the last coefficient not zero to precision, -1 if none.
    int degree() const {
        if (is_zero()) return -1;
        for (int i = size() - 1; i >= 0; --i)
            if (a_[i] != 0 || (!b_.empty() && b_[i] != 0)) return i;
        return -1;
    }

    QuadExtScalar coeff(int i) const {
        if (ez_ || i >= size()) return QuadExtScalar(PadicScalar::exact_zero(p_), f_);
        PadicScalar a = fixed_to_scalar(a_[i]);
        if (b_.empty()) return QuadExtScalar(a, f_);
        return QuadExtScalar(a, fixed_to_scalar(b_[i]), f_);
    }
    std::vector<QuadExtScalar> coeffs() const {
        std::vector<QuadExtScalar> r;
        r.reserve(a_.size());
        for (int i = 0; i < size(); ++i) r.push_back(coeff(i));
        return r;
    }

    Series truncated(int n) const {
        Series s = *this;
        s.xe_ = xe_ && degree() < n;
        s.a_.resize(std::min<size_t>(n, a_.size()));
        if (!s.b_.empty()) s.b_.resize(s.a_.size());
        s.normalize();
        return s;
    }
    // Truncates, or pads an X-exact series with zeros.
    Series resized(int n) const {
        if (n <= size() || !xe_) return truncated(n);
        Series s = *this;
        s.a_.resize(n);
        if (!s.b_.empty()) s.b_.resize(n);
        return s;
    }
    Series with_abs_prec(long absprec) const {
        if (ez_ || absprec >= abs_prec()) return *this;
        if (absprec <= shift_) {
            Series z = zero_to(p_, size(), absprec, f_);
            z.xe_ = xe_;
            return z;
        }
        Series s = *this;
        s.cap_ = static_cast<int>(absprec - shift_);
        s.reduce();
        s.normalize();
        return s;
    }
    Series with_form(const Form& f) const {
        Series s = *this;
        if (!same_form(f_, f)) throw InvalidArgument("mixed forms");
        if (f) s.f_ = f;
        return s;
    }

    Series operator-() const {
        if (is_zero()) return *this;
        Series s = *this;
        mpz_class m = modulus();
        for (auto& c : s.a_) c = mod(-c, m);
        for (auto& c : s.b_) c = mod(-c, m);
        return s;
    }
    // Shared X-length; an X-exact operand is zero past its stored length.
    static int joint_size(const Series& x, const Series& y) {
        if (x.xe_ && y.xe_) return std::max(x.size(), y.size());
        if (x.xe_) return y.size();
        if (y.xe_) return x.size();
        return std::min(x.size(), y.size());
    }
    friend Series operator+(const Series& x, const Series& y) {
        check(x, y);
        int n = joint_size(x, y);
        if (x.ez_) return y.resized(n);
        if (y.ez_) return x.resized(n);
        long absp = std::min(x.abs_prec(), y.abs_prec());
        long s = std::min(x.shift_, y.shift_);
        Form f = x.f_ ? x.f_ : y.f_;
        bool xe = x.xe_ && y.xe_ && x.degree() < n && y.degree() < n;
        if (absp <= s) {
            Series z = zero_to(x.p_, n, absp, f);
            z.xe_ = xe;
            return z;
        }
        int cap = static_cast<int>(absp - s);
        mpz_class sx = pow_ui(x.p_, x.shift_ - s), sy = pow_ui(x.p_, y.shift_ - s);
        std::vector<mpz_class> A(n), B;
        bool alpha = x.has_alpha() || y.has_alpha();
        if (alpha) B.assign(n, 0);
        for (int i = 0; i < n; ++i) {
            if (i < x.size()) A[i] += x.a_[i] * sx;
            if (i < y.size()) A[i] += y.a_[i] * sy;
            if (alpha) {
                if (x.has_alpha() && i < x.size()) B[i] += x.b_[i] * sx;
                if (y.has_alpha() && i < y.size()) B[i] += y.b_[i] * sy;
            }
        }
        return from_ints(x.p_, std::move(A), s, cap, f, std::move(B), xe);
    }
    friend Series operator-(const Series& x, const Series& y) { return x + (-y); }
    friend Series operator*(const Series& x, const Series& y) {
        check(x, y);
        int n = joint_size(x, y);
        Form f = x.f_ ? x.f_ : y.f_;
        if (x.ez_ || y.ez_) return exact_zero(x.p_, n, f);
        long s = x.shift_ + y.shift_;
        int cap = std::min(x.cap_, y.cap_);
        bool xe = x.xe_ && y.xe_ && x.degree() + y.degree() < n;
        if (cap == 0) {
            Series z = zero_to(x.p_, n, s, f);
            z.xe_ = xe;
            return z;
        }
        mpz_class m = pow_ui(x.p_, cap);
        std::vector<mpz_class> A = mul_trunc(x.a_, y.a_, n, m), B;
        if (x.has_alpha() || y.has_alpha()) {
            if (x.has_alpha() && y.has_alpha()) {
                std::vector<mpz_class> bb = mul_trunc(x.b_, y.b_, n, m);
                std::vector<mpz_class> sx(x.size()), sy(y.size());
                for (int i = 0; i < x.size(); ++i) sx[i] = x.a_[i] + x.b_[i];
                for (int i = 0; i < y.size(); ++i) sy[i] = y.a_[i] + y.b_[i];
                std::vector<mpz_class> cross = mul_trunc(sx, sy, n, m);
                mpz_class a2 = f->alpha2.with_abs_prec(cap).scaled_integer(0);
                B.resize(n);
                for (int i = 0; i < n; ++i) {
                    B[i] = cross[i] - A[i] - bb[i];
                    A[i] += a2 * bb[i];
                }
            } else if (x.has_alpha()) {
                B = mul_trunc(x.b_, y.a_, n, m);
            } else {
                B = mul_trunc(x.a_, y.b_, n, m);
            }
        }
        return from_ints(x.p_, std::move(A), s, cap, f, std::move(B), xe);
    }
    Series& operator+=(const Series& o) { return *this = *this + o; }
    Series& operator-=(const Series& o) { return *this = *this - o; }
    Series& operator*=(const Series& o) { return *this = *this * o; }

    Series scaled(const QuadExtScalar& c) const { return *this * constant(c, size()); }
    // Multiplies by p^e without touching the relative data.
    Series shifted_by(long e) const {
        if (ez_) return *this;
        Series s = *this;
        s.shift_ += e;
        return s;
    }

    // Agreement to the shared precision and shared X-adic length.
    friend bool operator==(const Series& x, const Series& y) { return (x - y).is_zero(); }

private:
    static void check(const Series& x, const Series& y) {
        if (x.p_ != y.p_) throw InvalidArgument("mixed primes in series arithmetic");
        if (!same_form(x.f_, y.f_)) throw InvalidArgument("mixed forms in series arithmetic");
    }
    mpz_class modulus() const { return pow_ui(p_, cap_); }
    void reduce() {
        mpz_class m = modulus();
        for (auto& c : a_) mpz_mod(c.get_mpz_t(), c.get_mpz_t(), m.get_mpz_t());
        for (auto& c : b_) mpz_mod(c.get_mpz_t(), c.get_mpz_t(), m.get_mpz_t());
    }
    // Pulls common factors of p out of the integer coefficients.
    void normalize() {
        if (ez_) return;
        mpz_class pp = p_;
        while (cap_ > 0) {
            bool all = true;
            for (const auto* v : {&a_, &b_}) {
                for (const auto& c : *v)
                    if (mpz_divisible_ui_p(c.get_mpz_t(), static_cast<unsigned long>(p_)) == 0) {
                        all = false;
                        break;
                    }
                if (!all) break;
            }
            if (!all) break;
            bool nonzero = false;
            for (const auto* v : {&a_, &b_})
                for (const auto& c : *v)
                    if (c != 0) nonzero = true;
            if (!nonzero) {
                shift_ += cap_;
                cap_ = 0;
                return;
            }
            for (auto* v : {&a_, &b_})
                for (auto& c : *v) mpz_divexact_ui(c.get_mpz_t(), c.get_mpz_t(), static_cast<unsigned long>(p_));
            ++shift_;
            --cap_;
        }
    }
    PadicScalar fixed_to_scalar(const mpz_class& c) const { return padic_from_fixed(p_, c, shift_, cap_); }

    int p_ = 0;
    Form f_;
    bool ez_ = false;
    bool xe_ = false;
    long shift_ = 0;
    int cap_ = 0;
    std::vector<mpz_class> a_, b_;
};

// Series with rational coefficients (a part, optional alpha part), known to
// absolute precision absprec. Coefficients past the vectors are zero.
inline Series series_from_rationals(int p, const std::vector<mpq_class>& a, int n, long absprec, Form f = nullptr,
                                    const std::vector<mpq_class>& b = {}) {
    long minv = kInfPrec;
    auto scan = [&](const std::vector<mpq_class>& v) {
        for (const auto& q : v) {
            if (q == 0) continue;
            mpz_class num = q.get_num(), den = q.get_den();
            minv = std::min(minv, remove_p(num, p) - remove_p(den, p));
        }
    };
    scan(a);
    scan(b);
    if (minv == kInfPrec) return Series::zero_to(p, n, absprec, f);
    if (minv >= absprec) return Series::zero_to(p, n, absprec, f);
    int cap = static_cast<int>(absprec - minv);
    mpz_class m = pow_ui(p, cap);
    auto conv = [&](const std::vector<mpq_class>& v) {
        std::vector<mpz_class> out(n);
        for (size_t i = 0; i < v.size() && static_cast<int>(i) < n; ++i) {
            if (v[i] == 0) continue;
            mpz_class num = v[i].get_num(), den = v[i].get_den();
            long e = remove_p(num, p) - remove_p(den, p) - minv;
            out[i] = mod(num * pow_ui(p, e) * inv_mod(den, m), m);
        }
        return out;
    };
    std::vector<mpz_class> B;
    if (!b.empty()) B = conv(b);
    return Series::from_ints(p, conv(a), minv, cap, f, std::move(B));
}

}  // namespace iwa
