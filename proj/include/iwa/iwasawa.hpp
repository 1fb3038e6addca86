#pragma once

#include <map>
#include <optional>
#include <type_traits>
#include <utility>

#include "series.hpp"

namespace iwa {

// u^n mod p^k, n of either sign.
inline mpz_class upow_mod(const mpz_class& u, long n, int p, long k) {
    mpz_class m = pow_ui(p, k), r, e = n < 0 ? -n : n;
    mpz_powm(r.get_mpz_t(), u.get_mpz_t(), e.get_mpz_t(), m.get_mpz_t());
    if (n < 0) r = inv_mod(r, m);
    return r;
}

// Series shorter than this are not worth a thread per component.
constexpr int kParallelLength = 200;

// Element of Lambda_O(Gamma), stored through the omega^i idempotents: one
// truncated series in X = gamma - 1 per tame character. Components are shared
// pointers so elements of Lambda(Gamma_1), which repeat the same series in
// every slot, are only computed on once.
class IwasawaElement {
public:
    using Comp = std::shared_ptr<const Series>;

    IwasawaElement() = default;
    explicit IwasawaElement(const Precision& prec, Form f = nullptr, mpz_class u = 0) : prec_(prec), f_(std::move(f)) {
        prec_.validate();
        u_ = u == 0 ? mpz_class(prec.p + 1) : u;
        if (mod(u_ - 1, mpz_class(prec.p)) != 0 || mod(u_ - 1, mpz_class(prec.p * prec.p)) == 0)
            throw InvalidArgument("u must be a principal unit of valuation exactly 1 after subtracting 1");
        auto z = std::make_shared<const Series>(Series::exact_zero(prec.p, prec.N, f_));
        comps_.assign(prec.p - 1, z);
    }

    static IwasawaElement zero(const Precision& prec, Form f = nullptr) { return IwasawaElement(prec, std::move(f)); }
    // The same series in every tame slot: an element of Lambda(Gamma_1).
    static IwasawaElement uniform(const Precision& prec, Series s) {
        IwasawaElement e(prec, s.form());
        auto c = std::make_shared<const Series>(std::move(s));
        e.comps_.assign(prec.p - 1, c);
        return e;
    }
    static IwasawaElement single(const Precision& prec, int tame, Series s) {
        IwasawaElement e(prec, s.form());
        e.comps_[e.slot(tame)] = std::make_shared<const Series>(std::move(s));
        return e;
    }
    static IwasawaElement constant(const Precision& prec, const QuadExtScalar& c) {
        return uniform(prec, Series::constant(c, prec.N));
    }
    // e_{omega^tame} * c * X^deg
    static IwasawaElement monomial(const Precision& prec, int tame, const QuadExtScalar& c, int deg) {
        std::vector<QuadExtScalar> v(deg + 1, QuadExtScalar(PadicScalar::exact_zero(prec.p), c.form()));
        v[deg] = c;
        return single(prec, tame, Series::from_scalars(prec.p, v, prec.N, c.form(), true));
    }

    const Precision& precision() const { return prec_; }
    const mpz_class& u() const { return u_; }
    const Form& form() const { return f_; }
    int prime() const { return prec_.p; }
    int tame_count() const { return prec_.p - 1; }
    int slot(long i) const { return static_cast<int>(pmod(i, prec_.p - 1)); }
    const Series& component(long i) const { return *comps_[slot(i)]; }
    const Comp& component_ptr(long i) const { return comps_[slot(i)]; }

    IwasawaElement with_component(long i, Series s) const {
        IwasawaElement e = *this;
        if (s.form()) e.f_ = s.form();
        e.comps_[slot(i)] = std::make_shared<const Series>(std::move(s));
        return e;
    }
    bool is_uniform() const {
        for (const auto& c : comps_)
            if (c != comps_[0]) return false;
        return true;
    }
    bool is_zero() const {
        for (const auto& c : comps_)
            if (!c->is_zero()) return false;
        return true;
    }
    // Attained absolute precision (min over components that are not exact zero).
    long abs_prec() const {
        long a = kInfPrec;
        for (const auto& c : comps_) a = std::min(a, c->abs_prec());
        return a;
    }
    int x_prec() const {
        int n = prec_.N;
        for (const auto& c : comps_)
            if (!c->x_exact()) n = std::min(n, c->size());
        return n;
    }
    long valuation_floor() const {
        long v = kInfPrec;
        for (const auto& c : comps_)
            if (!c->is_zero()) v = std::min(v, c->valuation_floor());
        return v;
    }

    // Applies f per component, once per distinct component pointer, in parallel.
    template <class F>
    IwasawaElement map(F&& f) const {
        IwasawaElement r = *this;
        std::vector<int> reps;
        std::vector<int> rep_of(comps_.size());
        for (size_t i = 0; i < comps_.size(); ++i) {
            int found = -1;
            for (int j : reps)
                if (comps_[j] == comps_[i]) found = j;
            if (found < 0) {
                reps.push_back(static_cast<int>(i));
                found = static_cast<int>(i);
            }
            rep_of[i] = found;
        }
        std::vector<Comp> out(comps_.size());
        parallel_for(static_cast<int>(reps.size()), [&](int k) {
            int i = reps[k];
            if constexpr (std::is_invocable_v<F, const Series&, int>)
                out[i] = std::make_shared<const Series>(f(*comps_[i], i));
            else
                out[i] = std::make_shared<const Series>(f(*comps_[i]));
        }, x_prec() >= kParallelLength);
        for (size_t i = 0; i < comps_.size(); ++i) r.comps_[i] = out[rep_of[i]];
        for (const auto& c : r.comps_)
            if (c->form()) r.f_ = c->form();
        return r;
    }
    template <class F>
    static IwasawaElement zip(const IwasawaElement& x, const IwasawaElement& y, F&& f) {
        check(x, y);
        IwasawaElement r = x;
        r.prec_.M = std::min(x.prec_.M, y.prec_.M);
        r.prec_.N = std::min(x.prec_.N, y.prec_.N);
        if (!r.f_) r.f_ = y.f_;
        size_t n = x.comps_.size();
        std::vector<int> reps, rep_of(n);
        for (size_t i = 0; i < n; ++i) {
            int found = -1;
            for (int j : reps)
                if (x.comps_[j] == x.comps_[i] && y.comps_[j] == y.comps_[i]) found = j;
            if (found < 0) {
                reps.push_back(static_cast<int>(i));
                found = static_cast<int>(i);
            }
            rep_of[i] = found;
        }
        std::vector<Comp> out(n);
        parallel_for(static_cast<int>(reps.size()), [&](int k) {
            int i = reps[k];
            if constexpr (std::is_invocable_v<F, const Series&, const Series&, int>)
                out[i] = std::make_shared<const Series>(f(*x.comps_[i], *y.comps_[i], i));
            else
                out[i] = std::make_shared<const Series>(f(*x.comps_[i], *y.comps_[i]));
        }, std::min(x.x_prec(), y.x_prec()) >= kParallelLength);
        for (size_t i = 0; i < n; ++i) r.comps_[i] = out[rep_of[i]];
        for (const auto& c : r.comps_)
            if (!c->x_exact()) r.prec_.N = std::min(r.prec_.N, c->size());
        return r;
    }

    IwasawaElement operator-() const {
        return map([](const Series& s, int) { return -s; });
    }
    friend IwasawaElement operator+(const IwasawaElement& x, const IwasawaElement& y) {
        return zip(x, y, [](const Series& a, const Series& b) { return a + b; });
    }
    friend IwasawaElement operator-(const IwasawaElement& x, const IwasawaElement& y) {
        return zip(x, y, [](const Series& a, const Series& b) { return a - b; });
    }
    friend IwasawaElement operator*(const IwasawaElement& x, const IwasawaElement& y) {
        return zip(x, y, [](const Series& a, const Series& b) { return a * b; });
    }
    IwasawaElement& operator+=(const IwasawaElement& o) { return *this = *this + o; }
    IwasawaElement& operator-=(const IwasawaElement& o) { return *this = *this - o; }
    IwasawaElement& operator*=(const IwasawaElement& o) { return *this = *this * o; }

    IwasawaElement scaled(const QuadExtScalar& c) const {
        return map([&](const Series& s, int) { return s.scaled(c); });
    }
    IwasawaElement with_abs_prec(long a) const {
        IwasawaElement r = map([&](const Series& s, int) { return s.with_abs_prec(a); });
        r.prec_.M = static_cast<int>(std::min<long>(r.prec_.M, a));
        return r;
    }
    IwasawaElement truncated(int n) const {
        IwasawaElement r = map([&](const Series& s, int) { return s.truncated(n); });
        r.prec_.N = std::min(r.prec_.N, n);
        return r;
    }
    IwasawaElement with_form(const Form& f) const {
        IwasawaElement r = map([&](const Series& s, int) { return s.with_form(f); });
        r.f_ = f;
        return r;
    }

    // Agreement to shared precision in every component.
    friend bool operator==(const IwasawaElement& x, const IwasawaElement& y) { return (x - y).is_zero(); }

private:
    friend IwasawaElement twist(const IwasawaElement&, long);
    friend IwasawaElement idempotent_project(const IwasawaElement&, long);

    static void check(const IwasawaElement& x, const IwasawaElement& y) {
        if (x.prec_.p != y.prec_.p) throw InvalidArgument("precision mismatch: different primes");
        if (x.u_ != y.u_) throw InvalidArgument("precision mismatch: different choices of u");
        if (!same_form(x.f_, y.f_)) throw InvalidArgument("mixed forms");
    }

    Precision prec_;
    mpz_class u_;
    Form f_;
    std::vector<Comp> comps_;
};

// F(c + dX) for c of valuation vc >= 1. A coefficient i of the result collects
// tail contributions of valuation >= floor + (N - i) vc, assuming the unknown
// tail of F has valuation >= its known floor; the X-length is cut so every
// kept coefficient keeps the input's absolute precision. X-exact inputs have
// no tail and keep their length.
inline Series substitute_affine(const Series& s, const mpz_class& c, const mpz_class& d, long vc) {
    int n = s.size();
    if (s.is_exact_zero()) return s;
    if (s.cap() == 0) return s;
    long cap = s.cap();
    bool exact = s.x_exact();
    int keep = exact ? n : n - static_cast<int>((cap + vc - 1) / vc);
    long newcap = cap;
    if (keep < 1) {
        keep = 1;
        newcap = std::min<long>(cap, static_cast<long>(n) * vc);
    }
    int p = s.prime();
    mpz_class m = pow_ui(p, newcap), cm = mod(c, m), dm = mod(d, m);
    auto horner = [&](const std::vector<mpz_class>& a) {
        std::vector<mpz_class> r(keep), t(keep);
        for (int i = n - 1; i >= 0; --i) {
            for (int j = keep - 1; j >= 0; --j) {
                t[j] = r[j] * cm;
                if (j > 0) t[j] += r[j - 1] * dm;
            }
            t[0] += a[i];
            for (int j = 0; j < keep; ++j) r[j] = mod(t[j], m);
        }
        return r;
    };
    std::vector<mpz_class> B;
    if (s.has_alpha()) B = horner(s.B());
    return Series::from_ints(p, horner(s.A()), s.shift(), static_cast<int>(newcap), s.form(), std::move(B), exact);
}

// Tw_n, induced by sigma -> chi_cyc^n(sigma) sigma: the omega^i slot moves to
// omega^(i-n) and X -> u^n (1+X) - 1.
inline IwasawaElement twist(const IwasawaElement& F, long n) {
    if (n == 0) return F;
    int p = F.prime();
    long vc = 1 + val_p(mpz_class(n), p);
    IwasawaElement moved = F.map([&](const Series& s, int) {
        if (s.is_zero()) return s;
        long k = std::max<long>(s.cap(), 1);
        mpz_class un = upow_mod(F.u(), n, p, k);
        return substitute_affine(s, un - 1, un, vc);
    });
    IwasawaElement r = moved;
    for (int i = 0; i < F.tame_count(); ++i) r.comps_[r.slot(i - n)] = moved.comps_[r.slot(i)];
    return r;
}

inline IwasawaElement idempotent_project(const IwasawaElement& F, long j) {
    IwasawaElement r = F;
    auto z = std::make_shared<const Series>(Series::exact_zero(F.prime(), F.precision().N, F.form()));
    for (int i = 0; i < F.tame_count(); ++i)
        if (i != F.slot(j)) r.comps_[i] = z;
    return r;
}

// Character omega^tame * chi_cyc^t * (wild part of conductor p^(n+1)).
struct FiniteCharacter {
    long tame = 0;
    int wild = 0;
    long t = 0;
};

// Evaluates the omega^tame slot at X = u^t - 1. The truncation tail adds
// valuation >= floor + N (1 + v_p(t)), which caps the reported precision.
inline QuadExtScalar evaluate_at_character(const IwasawaElement& F, const FiniteCharacter& ch) {
    if (ch.wild != 0)
        throw InvalidArgument("wild characters are handled through remainder_mod_cyclotomic, not by evaluation");
    const Series& s = F.component(ch.tame);
    int p = F.prime();
    if (s.is_exact_zero()) return QuadExtScalar(PadicScalar::exact_zero(p), F.form());
    if (ch.t == 0) return s.coeff(0);
    long vc = 1 + val_p(mpz_class(ch.t), p);
    long cap = s.x_exact() ? s.cap() : std::min<long>(s.cap(), static_cast<long>(s.size()) * vc);
    if (cap <= 0) return QuadExtScalar(PadicScalar::zero_to(p, s.shift() + std::max(cap, 0L)), F.form());
    mpz_class m = pow_ui(p, cap);
    mpz_class c = mod(upow_mod(F.u(), ch.t, p, cap) - 1, m);
    auto horner = [&](const std::vector<mpz_class>& a) {
        mpz_class r = 0;
        for (int i = s.size() - 1; i >= 0; --i) r = mod(r * c + a[i], m);
        return r;
    };
    PadicScalar a = padic_from_fixed(p, horner(s.A()), s.shift(), cap);
    if (!s.has_alpha()) return QuadExtScalar(a, F.form());
    return QuadExtScalar(a, padic_from_fixed(p, horner(s.B()), s.shift(), cap), F.form());
}

// Successive cyclotomic factors Phi_{p^m}(u^{-j}(1+X)), m = 1, 2, ..., as
// integer polynomials mod (p^W, X^N). Each step raises Y = (u^{-j}(1+X))^{p^(m-1)}
// to the p-th power.
class CyclotomicTower {
public:
    CyclotomicTower(int p, const mpz_class& u, long j, long W, int N) : p_(p), W_(W), N_(N), mod_(pow_ui(p, W)) {
        mpz_class w = upow_mod(u, -j, p, W);
        y_.assign(N, 0);
        y_[0] = w;
        if (N > 1) y_[1] = w;
    }
    int m() const { return m_; }
    long degree() const { return (p_ - 1) * ipow(p_, m_ - 1); }

    // Phi_{p^(m+1)}(u^{-j}(1+X)) mod (p^W, X^N); advances m.
    const std::vector<mpz_class>& next() {
        if (m_ > 0) y_ = pow_p(y_);
        ++m_;
        std::vector<mpz_class> phi(N_);
        phi[0] = 1;
        for (int i = 1; i < p_; ++i) {
            phi = mul_trunc(phi, y_, N_, mod_);
            phi[0] = mod(phi[0] + 1, mod_);
        }
        phi_ = std::move(phi);
        return phi_;
    }
    const std::vector<mpz_class>& current() const { return phi_; }

private:
    std::vector<mpz_class> pow_p(const std::vector<mpz_class>& y) const {
        std::vector<mpz_class> r, b = y;
        bool have = false;
        for (long e = p_; e > 0; e >>= 1) {
            if (e & 1) {
                r = have ? mul_trunc(r, b, N_, mod_) : b;
                have = true;
            }
            if (e > 1) b = mul_trunc(b, b, N_, mod_);
        }
        return r;
    }
    int p_;
    long W_;
    int N_;
    mpz_class mod_;
    int m_ = 0;
    std::vector<mpz_class> y_, phi_;
};

// Phi_{p^m}(u^{-j}(1+X)) mod (p^M, X^N) with the default u = 1+p.
inline Series cyclotomic_factor(int m, long j, const Precision& prec, mpz_class u = 0) {
    prec.validate();
    if (m < 1) throw InvalidArgument("cyclotomic_factor needs m >= 1");
    if (u == 0) u = prec.p + 1;
    CyclotomicTower t(prec.p, u, j, prec.M, prec.N);
    for (int i = 0; i < m; ++i) t.next();
    return Series::from_ints(prec.p, t.current(), 0, prec.M, nullptr, {}, t.degree() < prec.N);
}

// First m >= 1 with Phi_{p^m}(u^{-j}(1+X))/p == 1 mod (p^M, X^N). The property
// persists for larger m; check_window extra levels are verified.
inline int cyclotomic_stabilization(long j, const Precision& prec, int check_window = 2, mpz_class u = 0, int m_cap = 400) {
    prec.validate();
    if (u == 0) u = prec.p + 1;
    CyclotomicTower t(prec.p, u, j, prec.M + 1, prec.N);
    mpz_class pp = prec.p;
    auto is_one = [&](const std::vector<mpz_class>& phi) {
        if (phi[0] != pp) return false;
        for (int i = 1; i < prec.N; ++i)
            if (phi[i] != 0) return false;
        return true;
    };
    int found = 0;
    while (t.m() < m_cap) {
        bool ok = is_one(t.next());
        if (ok && found == 0) found = t.m();
        if (!ok) found = 0;
        if (found && t.m() >= found + check_window) return found;
    }
    throw PrecisionError("cyclotomic factors did not stabilize");
}

// Remainder of the omega^tame slot modulo Phi_{p^m}(u^{-j}(1+X)). Since that
// polynomial is X^deg times a unit mod p, X^N == p^floor(N/deg) (...) and the
// unknown tail only perturbs the remainder above tail_bound, which defaults to
// floor + floor(N/deg) (a bounded tail).
inline Series remainder_mod_cyclotomic(const IwasawaElement& F, int m, long j, long tame = 0,
                                       std::optional<long> tail_bound = std::nullopt) {
    int p = F.prime();
    const Series& s = F.component(tame);
    long deg = (p - 1) * ipow(p, m - 1);
    if (deg > s.size() && !s.x_exact())
        throw PrecisionError("x_prec too small: Phi_{p^m} has degree " + std::to_string(deg));
    if (s.is_exact_zero()) return Series::exact_zero(p, static_cast<int>(deg), F.form());
    long tb = tail_bound ? *tail_bound : s.shift() + s.size() / deg;
    long cap = s.x_exact() ? s.cap() : std::min<long>(s.cap(), tb - s.shift());
    if (cap <= 0) return Series::zero_to(p, static_cast<int>(deg), s.shift() + std::max(cap, 0L), F.form());
    CyclotomicTower t(p, F.u(), j, cap, static_cast<int>(deg) + 1);
    for (int i = 0; i < m; ++i) t.next();
    // The tower truncates at X^N; here N = deg + 1 keeps the whole polynomial.
    std::vector<mpz_class> phi = t.current();
    mpz_class mm = pow_ui(p, cap);
    mpz_class lead_inv = inv_mod(phi[deg], mm);
    auto reduce = [&](const std::vector<mpz_class>& a) {
        std::vector<mpz_class> r(a.begin(), a.end());
        if (static_cast<long>(r.size()) < deg) r.resize(deg);
        for (auto& x : r) x = mod(x, mm);
        for (long i = static_cast<long>(r.size()) - 1; i >= deg; --i) {
            if (r[i] == 0) continue;
            mpz_class q = mod(r[i] * lead_inv, mm);
            for (long k = 0; k <= deg; ++k) r[i - deg + k] = mod(r[i - deg + k] - q * phi[k], mm);
        }
        r.resize(deg);
        return r;
    };
    std::vector<mpz_class> B;
    if (s.has_alpha()) B = reduce(s.B());
    return Series::from_ints(p, reduce(s.A()), s.shift(), static_cast<int>(cap), F.form(), std::move(B), true);
}

}  // namespace iwa
