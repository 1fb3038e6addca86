#pragma once

#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "distribution.hpp"
#include "pollack.hpp"

namespace iwa {

// Dirichlet character with values in mu_{p-1}, so inside Z_p^x. chi(a) is
// omega(g)^e[a] for g the least primitive root mod p; e[a] = -1 marks a = 0.
class DirichletCharacter {
public:
    DirichletCharacter() = default;
    DirichletCharacter(int p, long modulus, std::vector<int> expo, std::string label = "")
        : p_(p), m_(modulus), e_(std::move(expo)), label_(std::move(label)) {
        if (m_ < 1 || static_cast<long>(e_.size()) != m_) throw InvalidArgument("character table has the wrong length");
        for (long a = 0; a < m_; ++a)
            if ((std::gcd(a, m_) == 1) != (e_[a] >= 0))
                throw InvalidArgument("character must vanish exactly on non-units");
        for (long a = 0; a < m_; ++a)
            for (long b = a; b < m_; ++b)
                if (e_[a] >= 0 && e_[b] >= 0 && e_[a * b % m_] != pmod(e_[a] + e_[b], p_ - 1))
                    throw InvalidArgument("character table is not multiplicative");
        if (label_.empty()) label_ = is_trivial() ? "1" : "chi" + std::to_string(m_);
    }

    static DirichletCharacter trivial(int p) { return DirichletCharacter(p, 1, {0}, "1"); }
    static DirichletCharacter teichmuller_power(int p, long i) {
        long e = pmod(i, p - 1);
        if (e == 0) return trivial(p);
        std::vector<int> t(p, -1);
        for (int a = 1; a < p; ++a) t[a] = static_cast<int>(pmod(e * index_mod_p(a, p), p - 1));
        return DirichletCharacter(p, p, std::move(t), "w" + std::to_string(e));
    }
    // Modulus q prime; the least primitive root mod q goes to omega(g)^e.
    static DirichletCharacter of_prime(int p, long q, long e) {
        if (!is_prime(q)) throw InvalidArgument("modulus must be prime");
        if (q == p) return teichmuller_power(p, e);
        e = pmod(e, p - 1);
        if (pmod(e * (q - 1), p - 1) != 0) throw InvalidArgument("character value must have order dividing q - 1");
        if (e == 0) return trivial(p);
        std::vector<int> t(q, -1);
        long g = primitive_root(static_cast<int>(q)), x = 1;
        for (long n = 0; n < q - 1; ++n, x = x * g % q) t[x] = static_cast<int>(pmod(e * n, p - 1));
        return DirichletCharacter(p, q, std::move(t), "chi" + std::to_string(q) + "^" + std::to_string(e));
    }
    static DirichletCharacter quadratic(int p, long q) {
        if (q == 2) throw InvalidArgument("no quadratic character of modulus 2");
        DirichletCharacter c = of_prime(p, q, (p - 1) / 2);
        if (q != p) c.label_ = "q" + std::to_string(q);
        return c;
    }

    int prime() const { return p_; }
    long modulus() const { return m_; }
    const std::string& label() const { return label_; }
    std::optional<RootOfUnity> value(long a) const {
        int e = e_[pmod(a, m_)];
        if (e < 0) return std::nullopt;
        return RootOfUnity{p_, e};
    }
    PadicScalar value_padic(long a, int M) const {
        auto v = value(a);
        return v ? v->value(M) : PadicScalar::exact_zero(p_);
    }
    bool is_trivial() const {
        for (int e : e_)
            if (e > 0) return false;
        return true;
    }
    bool is_even() const { return e_[m_ - 1] == 0; }

    long conductor() const {
        for (long d = 1; d < m_; ++d) {
            if (m_ % d) continue;
            bool ok = true;
            for (long a = 1; a < m_ && ok; a += d)
                if (e_[a] > 0) ok = false;
            if (ok) return d;
        }
        return m_;
    }
    DirichletCharacter primitive() const {
        long d = conductor();
        if (d == m_) return *this;
        std::vector<int> t(d, -1);
        for (long a = 0; a < d; ++a) {
            if (std::gcd(a, d) != 1) continue;
            long b = a;
            while (std::gcd(b, m_) != 1) b += d;
            t[a] = e_[b];
        }
        DirichletCharacter c(p_, d, std::move(t), label_);
        if (c.is_trivial()) c.label_ = "1";
        return c;
    }

    // Product, reduced to the primitive character.
    friend DirichletCharacter operator*(const DirichletCharacter& x, const DirichletCharacter& y) {
        if (x.p_ != y.p_) throw InvalidArgument("characters live in different Z_p");
        long L = std::lcm(x.m_, y.m_);
        std::vector<int> t(L, -1);
        for (long a = 0; a < L; ++a) {
            int u = x.e_[a % x.m_], v = y.e_[a % y.m_];
            if (u >= 0 && v >= 0) t[a] = static_cast<int>(pmod(u + v, x.p_ - 1));
        }
        std::string lab = x.is_trivial() ? y.label_ : y.is_trivial() ? x.label_ : x.label_ + "*" + y.label_;
        return DirichletCharacter(x.p_, L, std::move(t), lab).primitive();
    }
    DirichletCharacter pow(long n) const {
        std::vector<int> t = e_;
        for (int& e : t)
            if (e >= 0) e = static_cast<int>(pmod(static_cast<long>(e) * n, p_ - 1));
        return DirichletCharacter(p_, m_, std::move(t), n == 1 ? label_ : "(" + label_ + ")^" + std::to_string(n))
            .primitive();
    }
    DirichletCharacter inverse() const { return pow(-1); }

    // eta = eta0 omega^a with eta0 of conductor prime to p; returns a.
    long omega_part() const {
        DirichletCharacter c = primitive();
        if (c.m_ % p_) return 0;
        long f = c.m_ / p_, g = primitive_root(p_);
        for (long x = 1; x < c.m_; x += f)
            if (pmod(x, p_) == g) return c.e_[x];
        return 0;
    }
    DirichletCharacter prime_to_p_part() const {
        return *this * teichmuller_power(p_, -omega_part());
    }

private:
    int p_ = 5;
    long m_ = 1;
    std::vector<int> e_{0};
    std::string label_ = "1";
};

// "1", "w<i>", "q<prime>" or "chi<prime>^<e>", joined by '*'.
inline DirichletCharacter parse_character(int p, const std::string& s) {
    DirichletCharacter r = DirichletCharacter::trivial(p);
    size_t start = 0;
    while (start <= s.size()) {
        size_t end = s.find('*', start);
        std::string tok = s.substr(start, end == std::string::npos ? std::string::npos : end - start);
        try {
            if (tok == "1") {
            } else if (tok.size() > 1 && tok[0] == 'w') {
                r = r * DirichletCharacter::teichmuller_power(p, std::stol(tok.substr(1)));
            } else if (tok.size() > 1 && tok[0] == 'q') {
                r = r * DirichletCharacter::quadratic(p, std::stol(tok.substr(1)));
            } else if (tok.rfind("chi", 0) == 0 && tok.find('^') != std::string::npos) {
                size_t c = tok.find('^');
                r = r * DirichletCharacter::of_prime(p, std::stol(tok.substr(3, c - 3)), std::stol(tok.substr(c + 1)));
            } else {
                throw InvalidArgument("unknown character '" + tok + "'");
            }
        } catch (const std::logic_error&) {
            throw InvalidArgument("unknown character '" + tok + "'");
        }
        if (end == std::string::npos) break;
        start = end + 1;
    }
    return r;
}

inline bool is_primitive_root_mod(long c, int p) {
    if (pmod(c, p) == 0) return false;
    long n = p - 1;
    for (long d = 2; d <= n; ++d)
        if ((p - 1) % d == 0 && is_prime(d) && powmod_l(pmod(c, p), (p - 1) / d, p) == 1) return false;
    return true;
}

// Integer coefficients of the d-th cyclotomic polynomial, constant term first.
inline std::vector<mpz_class> cyclotomic_polynomial(int d) {
    std::vector<mpz_class> P(d + 1, 0);
    P[0] = -1;
    P[d] = 1;
    for (int e = 1; e < d; ++e) {
        if (d % e) continue;
        std::vector<mpz_class> D = cyclotomic_polynomial(e);
        int n = static_cast<int>(P.size()) - 1, m = static_cast<int>(D.size()) - 1;
        std::vector<mpz_class> Q(n - m + 1, 0);
        for (int i = n - m; i >= 0; --i) {
            Q[i] = P[i + m];
            for (int j = 0; j <= m; ++j) P[i + j] -= Q[i] * D[j];
        }
        P = Q;
    }
    return P;
}

// Element sum c[e] zeta^e of Q(zeta), zeta a primitive (p-1)-th root of unity,
// identified with omega(g) when embedded in Q_p.
struct CycNumber {
    int p = 5;
    std::vector<mpq_class> c;

    static CycNumber zero(int p) { return {p, std::vector<mpq_class>(p - 1, 0)}; }
    static CycNumber one(int p) {
        CycNumber r = zero(p);
        r.c[0] = 1;
        return r;
    }
    void add(long e, const mpq_class& q) { c[pmod(e, p - 1)] += q; }
    CycNumber scaled(const mpq_class& q) const {
        CycNumber r = *this;
        for (auto& x : r.c) x *= q;
        return r;
    }
    friend CycNumber operator*(const CycNumber& x, const CycNumber& y) {
        CycNumber r = zero(x.p);
        for (int a = 0; a < x.p - 1; ++a)
            for (int b = 0; b < x.p - 1; ++b)
                if (x.c[a] != 0 && y.c[b] != 0) r.add(a + b, x.c[a] * y.c[b]);
        return r;
    }
    friend CycNumber operator+(const CycNumber& x, const CycNumber& y) {
        CycNumber r = x;
        for (int a = 0; a < x.p - 1; ++a) r.c[a] += y.c[a];
        return r;
    }

    // Coordinates in the power basis 1, zeta, ..., zeta^(phi - 1).
    std::vector<mpq_class> reduced() const {
        std::vector<mpz_class> P = cyclotomic_polynomial(p - 1);
        int m = static_cast<int>(P.size()) - 1;
        std::vector<mpq_class> r = c;
        for (int i = p - 2; i >= m; --i) {
            if (r[i] == 0) continue;
            mpq_class t = r[i];
            for (int j = 0; j <= m; ++j) r[i - m + j] -= t * mpq_class(P[j]);
        }
        r.resize(m);
        return r;
    }
    bool is_rational() const {
        auto r = reduced();
        for (size_t i = 1; i < r.size(); ++i)
            if (r[i] != 0) return false;
        return true;
    }
    mpq_class rational() const {
        if (!is_rational()) throw InvalidArgument("value is not rational");
        return reduced()[0];
    }
    bool is_zero() const {
        for (auto& x : reduced())
            if (x != 0) return false;
        return true;
    }
    // Absolute precision M; the guard covers denominators up to p^32.
    PadicScalar embed(int M) const {
        int W = M + 32;
        PadicScalar s = PadicScalar::exact_zero(p);
        for (int e = 0; e < p - 1; ++e)
            if (c[e] != 0) s += PadicScalar::from_rational(p, c[e], W) * RootOfUnity{p, e}.value(W);
        return s.with_abs_prec(M);
    }
    std::string str() const {
        auto r = reduced();
        std::string out;
        for (size_t i = 0; i < r.size(); ++i) {
            if (r[i] == 0) continue;
            if (!out.empty()) out += " + ";
            out += "(" + r[i].get_str() + ")";
            if (i > 0) out += i == 1 ? "*z" : "*z^" + std::to_string(i);
        }
        return out.empty() ? "0" : out;
    }
};

// B_0, ..., B_n with B_1 = -1/2.
inline std::vector<mpq_class> bernoulli_numbers(int n) {
    std::vector<mpq_class> B(n + 1, 0);
    B[0] = 1;
    for (int m = 1; m <= n; ++m) {
        mpq_class s = 0;
        mpz_class bin = 1;  // C(m+1, k)
        for (int k = 0; k < m; ++k) {
            s += mpq_class(bin) * B[k];
            bin = bin * (m + 1 - k) / (k + 1);
        }
        B[m] = -s / (m + 1);
        B[m].canonicalize();
    }
    return B;
}

inline mpq_class bernoulli_poly(int n, const mpq_class& x, const std::vector<mpq_class>& B) {
    mpq_class r = 0, xp = 1;
    mpz_class bin = 1;  // C(n, n-k), accumulated as k grows
    for (int k = 0; k <= n; ++k) {
        r += mpq_class(bin) * B[n - k] * xp;
        xp *= x;
        bin = bin * (n - k) / (k + 1);
    }
    r.canonicalize();
    return r;
}

// B_{n,eta} = f^(n-1) sum_{a=1}^{f} eta(a) B_n(a/f), f the conductor.
inline CycNumber gen_bernoulli(int n, const DirichletCharacter& eta) {
    if (n < 1) throw InvalidArgument("generalized Bernoulli numbers need n >= 1");
    DirichletCharacter chi = eta.primitive();
    long f = chi.modulus();
    auto B = bernoulli_numbers(n);
    mpz_class fn;
    mpz_ui_pow_ui(fn.get_mpz_t(), f, n - 1);
    CycNumber r = CycNumber::zero(eta.prime());
    for (long a = 1; a <= f; ++a)
        if (auto v = chi.value(a)) r.add(v->e, mpq_class(fn) * bernoulli_poly(n, mpq_class(a, f), B));
    return r;
}

// L_p(eta, s) at s = 1 - n: -(1 - eta omega^-n(p) p^(n-1)) B_{n, eta omega^-n} / n.
inline CycNumber kl_value_exact(const DirichletCharacter& eta, long s) {
    int p = eta.prime();
    long n = 1 - s;
    if (n == 0 && eta.primitive().is_trivial()) throw PoleError("L_p(1, s) has a pole at s = 1");
    if (n < 1) throw InvalidArgument("interpolation points are s = 1 - n with n >= 1");
    if (!eta.is_even()) return CycNumber::zero(p);
    DirichletCharacter psi = eta * DirichletCharacter::teichmuller_power(p, -n);
    CycNumber euler = CycNumber::one(p);
    if (auto v = psi.value(p)) {
        mpz_class pn;
        mpz_ui_pow_ui(pn.get_mpz_t(), p, n - 1);
        euler.add(v->e, -mpq_class(pn));
    }
    return (euler * gen_bernoulli(static_cast<int>(n), psi)).scaled(mpq_class(-1, n));
}

inline PadicScalar kl_value(const DirichletCharacter& eta, long s, int M) {
    CycNumber v = kl_value_exact(eta, s);
    if (v.is_zero()) return PadicScalar::exact_zero(eta.prime());
    return v.embed(M);
}

// --- Euler factors of the symmetric square at p ---

// 1 + sign * zeta * p^exponent, with zeta a (p-1)-th root of unity.
struct EulerFactor {
    std::string label;
    int sign = 1;
    RootOfUnity zeta;
    long exponent = 0;
    PadicScalar value;
    bool zero = false;
};

struct EulerFactorReport {
    long j = 0;
    std::string kind;  // "E" or "E'"
    std::vector<EulerFactor> factors;
    PadicScalar product;
    bool product_zero = false;
    std::string archimedean = "(-1)^(j-k-1) j! / (2^(2k+4) i^a)";
};

namespace detail {

inline EulerFactor make_factor(std::string label, int sign, RootOfUnity zeta, long exponent, int W) {
    int p = zeta.p;
    EulerFactor f{std::move(label), sign, zeta, exponent, PadicScalar(), false};
    f.zero = exponent == 0 && ((sign > 0 && zeta.is_minus_one()) || (sign < 0 && zeta.is_one()));
    PadicScalar one = PadicScalar::from_long(p, 1, W);
    PadicScalar t = zeta.value(W) * PadicScalar::from_parts(p, exponent, 1, W);
    f.value = sign > 0 ? one + t : one - t;
    return f;
}

inline EulerFactorReport assemble(long j, std::string kind, std::vector<EulerFactor> fs) {
    EulerFactorReport r;
    r.j = j;
    r.kind = std::move(kind);
    r.product = fs[0].value * fs[1].value * fs[2].value;
    r.product_zero = fs[0].zero || fs[1].zero || fs[2].zero;
    r.factors = std::move(fs);
    return r;
}

}  // namespace detail

// lambda^2 = -eps p^(k+1), so each factor is 1 +- (root of unity) p^e.
inline EulerFactorReport euler_factor_E(const Form& form, RootOfUnity chi_p, long j, int M = 40) {
    int k = form->k;
    if (j < 1 || j > k + 1) throw InvalidArgument("E_p(j) needs 1 <= j <= k+1");
    RootOfUnity eps = form->eps;
    return detail::assemble(
        j, "E",
        {detail::make_factor("1 - p^(j-1) chi(p) lambda^-2", 1, chi_p * eps.inverse(), j - k - 2, M),
         detail::make_factor("1 + chi^-1(p) lambda^2 p^-j", -1, chi_p.inverse() * eps, k + 1 - j, M),
         detail::make_factor("1 - chi^-1(p) lambda^2 p^-j", 1, chi_p.inverse() * eps, k + 1 - j, M)});
}

inline EulerFactorReport euler_factor_Eprime(const Form& form, RootOfUnity chi_p, long j, int M = 40) {
    int k = form->k;
    if (j < k + 2 || j > 2 * k + 2) throw InvalidArgument("E'_p(j) needs k+2 <= j <= 2k+2");
    RootOfUnity eps = form->eps;
    return detail::assemble(
        j, "E'",
        {detail::make_factor("1 - p^(j-1) chi(p) lambda^-2", 1, chi_p * eps.inverse(), j - k - 2, M),
         detail::make_factor("1 + p^(j-1) chi(p) lambda^-2", -1, chi_p * eps.inverse(), j - k - 2, M),
         detail::make_factor("1 - chi^-1(p) lambda^2 p^-j", 1, chi_p.inverse() * eps, k + 1 - j, M)});
}

struct ExceptionalZeroRow {
    EulerFactorReport report;
    std::vector<std::string> vanishing;  // labels of the factors that are zero
    bool exceptional_case = false;  // j in {k+1, k+2} with eps chi^-1(p) = 1
};

struct ExceptionalZeroReport {
    std::vector<ExceptionalZeroRow> rows;
    std::vector<long> zeros;
};

inline ExceptionalZeroReport exceptional_zero_report(const Form& form, RootOfUnity chi_p, long j_lo, long j_hi,
                                                     int M = 40) {
    int k = form->k;
    if (j_lo < 1 || j_hi > 2 * k + 2 || j_lo > j_hi) throw InvalidArgument("range must lie in [1, 2k+2]");
    bool trivial_ratio = (form->eps * chi_p.inverse()).is_one();
    ExceptionalZeroReport out;
    for (long j = j_lo; j <= j_hi; ++j) {
        ExceptionalZeroRow row;
        row.report = j <= k + 1 ? euler_factor_E(form, chi_p, j, M) : euler_factor_Eprime(form, chi_p, j, M);
        for (auto& f : row.report.factors)
            if (f.zero) row.vanishing.push_back(f.label);
        row.exceptional_case = trivial_ratio && (j == k + 1 || j == k + 2);
        if (row.report.product_zero) out.zeros.push_back(j);
        out.rows.push_back(std::move(row));
    }
    return out;
}

// --- c-smoothing ---

struct SmoothingFactor {
    PadicScalar value;
    bool zero = false;
};

// c^2 - c^(2j-2k-2) (chi eps)(c)^-2; level is N N_chi p.
inline SmoothingFactor c_smoothing_factor(long c, long j, long k, RootOfUnity chi_eps_at_c, long level, int M = 40) {
    if (c <= 1) throw InvalidArgument("c must exceed 1");
    if (std::gcd(c, 6 * level) != 1) throw InvalidArgument("c must be coprime to 6 N N_chi p");
    int p = chi_eps_at_c.p;
    long e = 2 * j - 2 * k - 2;
    RootOfUnity z = chi_eps_at_c.pow(-2);
    mpz_class ce;
    mpz_ui_pow_ui(ce.get_mpz_t(), c, std::labs(e));
    mpq_class pw = e >= 0 ? mpq_class(ce) : mpq_class(1, 1) / mpq_class(ce);
    PadicScalar v = PadicScalar::from_long(p, c * c, M) - PadicScalar::from_rational(p, pw, M) * z.value(M);
    return {v, e == 2 && z.is_one()};
}

// Least admissible c with a nonzero factor at every j listed; by default the
// even j in (k+2, 2k+2].
inline long least_smoothing_c(long k, long level, const std::function<RootOfUnity(long)>& chi_eps,
                              std::vector<long> js = {}, long c_cap = 100000) {
    if (js.empty())
        for (long j = k + 3; j <= 2 * k + 2; ++j)
            if (j % 2 == 0) js.push_back(j);
    for (long c = 2; c <= c_cap; ++c) {
        if (std::gcd(c, 6 * level) != 1) continue;
        bool ok = true;
        for (long j : js)
            if (c_smoothing_factor(c, j, k, chi_eps(c), level, 8).zero) ok = false;
        if (ok) return c;
    }
    throw Error("no admissible c below " + std::to_string(c_cap));
}

// --- Kubota-Leopoldt series ---

namespace detail {

// log_p of a unit integer, known mod p^W.
inline PadicScalar log_unit(long a, int p, int W) {
    mpz_class x;
    mpz_class aa = a;
    mpz_pow_ui(x.get_mpz_t(), aa.get_mpz_t(), p - 1);
    if (x == 1) return PadicScalar::exact_zero(p);
    mpq_class l = log1p_rational(mpq_class(x - 1), p, W + 2);
    PadicScalar L = PadicScalar::from_rational(p, l, W + 2).with_abs_prec(W + 2);
    return (L / PadicScalar::from_long(p, p - 1, W + 2)).with_abs_prec(W);
}

// log_p a / log_p u, the exponent of <a> in base u.
inline PadicScalar gamma_exponent(long a, int p, int W) {
    return log_unit(a, p, W + 2) / log_unit(p + 1, p, W + 2);
}

// Coefficients of (1+X)^z up to X^(N-1).
inline std::vector<PadicScalar> binomial_series(const PadicScalar& z, int N, int W) {
    int p = z.prime();
    std::vector<PadicScalar> c{PadicScalar::from_long(p, 1, W)};
    for (int j = 1; j < N; ++j)
        c.push_back(c.back() * (z - PadicScalar::from_long(p, j - 1, W)) / PadicScalar::from_long(p, j, W));
    return c;
}

inline std::vector<PadicScalar> mul_trunc(const std::vector<PadicScalar>& x, const std::vector<PadicScalar>& y,
                                          size_t n) {
    int p = (x.empty() ? y : x).front().prime();
    std::vector<PadicScalar> r(n, PadicScalar::exact_zero(p));
    for (size_t i = 0; i < x.size() && i < n; ++i) {
        if (x[i].is_exact_zero()) continue;
        for (size_t j = 0; j < y.size() && i + j < n; ++j)
            if (!y[j].is_exact_zero()) r[i + j] += x[i] * y[j];
    }
    return r;
}

inline Series series_of(int p, const std::vector<PadicScalar>& v, int N, const Form& f = nullptr) {
    std::vector<QuadExtScalar> q;
    for (const auto& x : v) q.emplace_back(x, f);
    return Series::from_scalars(p, q, N, f);
}

// H[j][k]: coefficient of X^j sigma^k in (1 + p sigma)^-1 (1+X)^(log(1 + p sigma)/log u).
inline std::vector<std::vector<PadicScalar>> disc_kernel(int p, int N, int K, int W) {
    PadicScalar lam = log_unit(p + 1, p, W + 4) / PadicScalar::from_long(p, p, W + 4);
    PadicScalar z0 = PadicScalar::exact_zero(p);
    std::vector<PadicScalar> L(K, z0), rinv(K, z0);
    mpz_class pk = 1;
    for (int k = 0; k < K; ++k) {
        rinv[k] = PadicScalar::from_int_rel(p, k % 2 ? mpz_class(-pk) : pk, W);
        if (k >= 1) {
            mpz_class num = k % 2 ? pk / p : mpz_class(-pk / p);
            L[k] = PadicScalar::from_rational(p, mpq_class(num, k), W) / lam;
        }
        pk *= p;
    }
    std::vector<std::vector<PadicScalar>> H;
    std::vector<PadicScalar> C(K, z0);
    C[0] = PadicScalar::from_long(p, 1, W);
    for (int j = 0; j < N; ++j) {
        if (j > 0) {
            std::vector<PadicScalar> f = L;
            if (j > 1) f[0] = PadicScalar::from_long(p, -(j - 1), W);
            C = mul_trunc(C, f, K);
            PadicScalar jj = PadicScalar::from_long(p, j, W);
            for (auto& x : C)
                if (!x.is_exact_zero()) x = x / jj;
        }
        H.push_back(mul_trunc(rinv, C, K));
    }
    return H;
}

inline long kernel_tail_valuation(const std::vector<std::vector<PadicScalar>>& H, int window) {
    long v = kInfPrec;
    for (const auto& row : H)
        for (int k = static_cast<int>(row.size()) - window; k < static_cast<int>(row.size()); ++k)
            if (!row[k].is_zero()) v = std::min(v, row[k].valuation());
    return v;
}

}  // namespace detail

struct KLSeries {
    IwasawaElement series;  // only the omega^branch slot is nonzero
    long c = 0;             // smoothing parameter; 0 when the branch vanishes by parity
    int taylor_terms = 0;   // moments used per residue disc
};

// Branch i carries theta = eta0 omega^i, eta0 the prime-to-p part of eta: the
// omega^i slot G satisfies G(u^n - 1) = L_p(theta, 1 - n). It is the omega^i part of x^-1 times the
// c-smoothed Bernoulli measure eta0(x) dE_{1,c} on (Z/fp^infty)^x, divided by
// the Lambda-element of delta_1 - eta(c) delta_c. Each residue class mod fp is
// a p-adic disc b(1 + p sigma); on it the integrand is a power series in sigma
// and its moments are exact Bernoulli-polynomial values E_{t+1,c}.
inline KLSeries kl_series(const DirichletCharacter& eta, long branch, const Precision& prec, int k_cap = 0) {
    prec.validate();
    int p = prec.p, M = prec.M, N = prec.N;
    if (eta.prime() != p) throw InvalidArgument("character lives in a different Z_p");
    DirichletCharacter et = eta.prime_to_p_part();
    long f = et.modulus();
    long i = pmod(branch, p - 1);
    DirichletCharacter theta = et * DirichletCharacter::teichmuller_power(p, i);
    KLSeries out{IwasawaElement::zero(prec)};
    if (!theta.is_even()) return out;
    if (theta.is_trivial()) throw PoleError("the branch of L_p(1, s) has a pole at s = 1");

    long F = f * p;
    long c = 2;
    for (;; ++c)
        if (std::gcd(c, F) == 1 && is_primitive_root_mod(c, p) && !theta.value(c)->is_one()) break;
    out.c = c;

    long vfact = 0;
    for (int j = 2; j < N; ++j) vfact += val_p(mpz_class(j), p);
    int W = M + N + static_cast<int>(vfact) + 16;
    if (k_cap == 0) k_cap = 4 * (M + N) + 80;

    int K = M + N + static_cast<int>(vfact) + 8;
    std::vector<std::vector<PadicScalar>> H;
    for (;; K += 8) {
        if (K > k_cap) throw PrecisionError("disc expansion did not stabilize within " + std::to_string(k_cap) + " terms");
        H = detail::disc_kernel(p, N, K, W);
        if (detail::kernel_tail_valuation(H, 8) >= M + 4) break;
    }
    out.taylor_terms = K;

    // E[a][t] = E_{t+1}(a + F Z) = F^t B_{t+1}(a/F) / (t+1)
    auto B = bernoulli_numbers(K + 1);
    std::vector<std::vector<mpq_class>> E(F);
    for (long a = 1; a < F; ++a) {
        if (std::gcd(a, F) != 1) continue;
        E[a].resize(K);
        mpq_class x(a, F);
        mpz_class Ft = 1;
        for (int t = 0; t < K; ++t, Ft *= F) E[a][t] = mpq_class(Ft) * bernoulli_poly(t + 1, x, B) / (t + 1);
    }
    long cinv = mpz_class(inv_mod(mpz_class(c), mpz_class(F))).get_si();
    std::vector<mpz_class> cpow(K + 1);
    cpow[0] = 1;
    for (int t = 1; t <= K; ++t) cpow[t] = cpow[t - 1] * c;
    std::vector<std::vector<mpz_class>> bin(K, std::vector<mpz_class>(K));
    for (int n = 0; n < K; ++n)
        for (int t = 0; t <= n; ++t) mpz_bin_uiui(bin[n][t].get_mpz_t(), n, t);

    PadicScalar z0 = PadicScalar::exact_zero(p);
    std::vector<std::vector<PadicScalar>> U(p, std::vector<PadicScalar>(N, z0));
    for (long b = 1; b < F; ++b) {
        if (std::gcd(b, F) != 1) continue;
        std::vector<mpq_class> Ec(K);
        for (int t = 0; t < K; ++t) Ec[t] = E[b][t] - mpq_class(cpow[t + 1]) * E[cinv * b % F][t];
        // w_n = int ((x - b) / (p b))^n on the disc
        std::vector<PadicScalar> w(K, z0);
        mpq_class binv(1, b);
        std::vector<mpq_class> bt(K);
        bt[0] = 1;
        for (int t = 1; t < K; ++t) bt[t] = bt[t - 1] * binv;
        mpz_class pn = 1;
        for (int n = 0; n < K; ++n, pn *= p) {
            mpq_class s = 0;
            for (int t = 0; t <= n; ++t) {
                mpq_class term = mpq_class(bin[n][t]) * bt[t] * Ec[t];
                if ((n - t) % 2) s -= term;
                else s += term;
            }
            s /= pn;
            s.canonicalize();
            if (s == 0) continue;
            w[n] = PadicScalar::from_rational(p, s, W);
            if (w[n].valuation() < 0) throw Error("internal: moment of the smoothed measure is not integral");
        }
        std::vector<PadicScalar> inner(N, z0);
        for (int j = 0; j < N; ++j)
            for (int n = 0; n < K; ++n)
                if (!w[n].is_exact_zero() && !H[j][n].is_exact_zero()) inner[j] += H[j][n] * w[n];
        std::vector<PadicScalar> T = detail::mul_trunc(detail::binomial_series(detail::gamma_exponent(b, p, W), N, W), inner, N);
        // <b>^-1 eta(b)
        PadicScalar wt = teichmuller(b, Precision{p, W, 1}) / PadicScalar::from_long(p, b, W) * et.value_padic(b, W);
        auto& Ur = U[b % p];
        for (int j = 0; j < N; ++j)
            if (!T[j].is_exact_zero()) Ur[j] += wt * T[j];
    }
    std::vector<PadicScalar> S(N, z0);
    for (int r = 1; r < p; ++r) {
        PadicScalar o = RootOfUnity::of_residue(p, r).pow(i - 1).value(W);
        for (int j = 0; j < N; ++j)
            if (!U[r][j].is_exact_zero()) S[j] -= o * U[r][j];
    }
    // delta_1 - eta(c) delta_c in the omega^i slot
    std::vector<PadicScalar> Cv = detail::binomial_series(detail::gamma_exponent(c, p, W), N, W);
    PadicScalar tc = theta.value(c)->value(W);
    for (auto& x : Cv) x = -(tc * x);
    Cv[0] += PadicScalar::from_long(p, 1, W);
    IwasawaElement num = IwasawaElement::single(prec, static_cast<int>(i), detail::series_of(p, S, N));
    IwasawaElement den = IwasawaElement::single(prec, static_cast<int>(i), detail::series_of(p, Cv, N));
    IwasawaElement q = divide_exact(num, den).quotient.body;
    out.series = q.with_abs_prec(M);
    return out;
}

// --- Euler-factor removal and the geometric product ---

// 1 - eta(l) l^(-1-s_shift) [l] with [l] = omega^i(l) (1+X)^(log_p<l>/log_p u) in slot i.
inline IwasawaElement euler_removal_factor(const Precision& prec, long ell, const DirichletCharacter& eta,
                                           long s_shift = 0, const Form& form = nullptr) {
    int p = prec.p;
    if (ell < 2) throw InvalidArgument("l must be a prime");
    if (ell % p == 0) throw InvalidArgument("the Euler factor at p is not removed here");
    int W = prec.M + 8;
    auto v = eta.primitive().value(ell);
    if (!v) return IwasawaElement::constant(prec, QuadExtScalar(PadicScalar::from_long(p, 1, W), form));
    mpz_class le;
    long e = -1 - s_shift;
    mpz_ui_pow_ui(le.get_mpz_t(), ell, std::labs(e));
    mpq_class lp = e >= 0 ? mpq_class(le) : mpq_class(1) / mpq_class(le);
    PadicScalar a = v->value(W) * PadicScalar::from_rational(p, lp, W);
    std::vector<PadicScalar> bs = detail::binomial_series(detail::gamma_exponent(ell, p, W), prec.N, W);
    IwasawaElement r(prec, form);
    for (int i = 0; i < p - 1; ++i) {
        PadicScalar ai = a * RootOfUnity::of_residue(p, ell).pow(i).value(W);
        std::vector<PadicScalar> s;
        for (const auto& x : bs) s.push_back(-(ai * x));
        s[0] += PadicScalar::from_long(p, 1, W);
        r = r.with_component(i, detail::series_of(p, s, prec.N, form));
    }
    return r.with_abs_prec(prec.M);
}

inline IwasawaElement remove_euler_factors(const IwasawaElement& F, const std::vector<long>& primes,
                                           const DirichletCharacter& eta, long s_shift = 0) {
    IwasawaElement r = F;
    for (long ell : primes) r = r * euler_removal_factor(F.precision(), ell, eta, s_shift, F.form());
    return r;
}

// sym2 * Tw_{-(k+1)}(kl): the shift s -> s - k - 1.
inline IwasawaElement geometric_product(const IwasawaElement& sym2, const IwasawaElement& kl, long k) {
    return sym2 * twist(kl, -(k + 1));
}

inline DivisionResult geometric_ratio(const IwasawaElement& geom, const IwasawaElement& kl, long k,
                                      const DivideOptions& opt = {}) {
    return divide_exact(geom, twist(kl, -(k + 1)), opt);
}

}  // namespace iwa
