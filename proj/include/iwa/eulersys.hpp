#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "lfunctions.hpp"

namespace iwa {

inline long p_part(long n, int p) {
    long r = 1;
    while (n % p == 0) {
        n /= p;
        r *= p;
    }
    return r;
}

// l prime, l = 1 mod p and prime to p * avoid (avoid = N N_chi).
inline bool admissible_tame_prime(long ell, int p, long avoid = 1) {
    return is_prime(ell) && pmod(ell, p) == 1 && std::gcd(ell, static_cast<long>(p) * avoid) == 1;
}

// Squarefree r = l_1 ... l_s; Delta_l is the p-part of (Z/l)^x, cyclic of order orders[i].
struct TameLevel {
    int p = 5;
    std::vector<long> primes;
    std::vector<long> orders;

    static TameLevel make(int p, std::vector<long> primes, long avoid = 1) {
        std::sort(primes.begin(), primes.end());
        TameLevel t;
        t.p = p;
        for (size_t i = 0; i < primes.size(); ++i) {
            if (i > 0 && primes[i] == primes[i - 1]) throw InvalidArgument("tame level must be squarefree");
            if (!admissible_tame_prime(primes[i], p, avoid))
                throw InvalidArgument("l = " + std::to_string(primes[i]) + " is not 1 mod p or not prime to p N N_chi");
            t.primes.push_back(primes[i]);
            t.orders.push_back(p_part(primes[i] - 1, p));
        }
        return t;
    }

    long size() const {
        long s = 1;
        for (long n : orders) s *= n;
        return s;
    }
    long r() const {
        long x = 1;
        for (long l : primes) x *= l;
        return x;
    }
    int index_of(long ell) const {
        for (size_t i = 0; i < primes.size(); ++i)
            if (primes[i] == ell) return static_cast<int>(i);
        return -1;
    }
    bool divides(const TameLevel& o) const {
        for (long l : primes)
            if (o.index_of(l) < 0) return false;
        return true;
    }
    TameLevel without(long ell) const {
        int i = index_of(ell);
        if (i < 0) throw InvalidArgument("l = " + std::to_string(ell) + " is not in the level");
        TameLevel t = *this;
        t.primes.erase(t.primes.begin() + i);
        t.orders.erase(t.orders.begin() + i);
        return t;
    }
    bool operator==(const TameLevel& o) const { return p == o.p && primes == o.primes; }
};

// Element of (Z/p^M)[Delta_r]; coefficient table in mixed radix, first prime fastest.
class GroupRingElement {
public:
    GroupRingElement() = default;
    GroupRingElement(TameLevel lv, int M) : lv_(std::move(lv)), M_(M), mod_(pow_ui(lv_.p, M)), c_(lv_.size(), 0) {}

    static GroupRingElement zero(const TameLevel& lv, int M) { return GroupRingElement(lv, M); }
    static GroupRingElement one(const TameLevel& lv, int M) { return scalar(lv, M, 1); }
    static GroupRingElement scalar(const TameLevel& lv, int M, const mpz_class& a) {
        GroupRingElement x(lv, M);
        x.c_[0] = mod(a, x.mod_);
        return x;
    }
    // exps are indexed like lv.primes
    static GroupRingElement group_element(const TameLevel& lv, int M, const std::vector<long>& exps) {
        GroupRingElement x(lv, M);
        x.c_[x.index(exps)] = 1;
        return x;
    }
    static GroupRingElement delta(const TameLevel& lv, int M, long ell, long power = 1) {
        int i = lv.index_of(ell);
        if (i < 0) throw InvalidArgument("l = " + std::to_string(ell) + " is not in the level");
        std::vector<long> e(lv.primes.size(), 0);
        e[i] = power;
        return group_element(lv, M, e);
    }
    // N_l = sum_i delta_l^i
    static GroupRingElement norm(const TameLevel& lv, int M, long ell) {
        GroupRingElement x(lv, M);
        int i = lv.index_of(ell);
        if (i < 0) throw InvalidArgument("l = " + std::to_string(ell) + " is not in the level");
        for (long t = 0; t < lv.orders[i]; ++t) x = x + delta(lv, M, ell, t);
        return x;
    }
    static GroupRingElement from_coeffs(const TameLevel& lv, int M, std::vector<mpz_class> c) {
        GroupRingElement x(lv, M);
        if (static_cast<long>(c.size()) != lv.size()) throw InvalidArgument("coefficient table has the wrong size");
        for (auto& a : c) a = mod(a, x.mod_);
        x.c_ = std::move(c);
        return x;
    }

    const TameLevel& level() const { return lv_; }
    int precision() const { return M_; }
    const std::vector<mpz_class>& coeffs() const { return c_; }
    const mpz_class& coeff(long flat) const { return c_.at(flat); }
    void set_coeff(long flat, const mpz_class& a) { c_.at(flat) = mod(a, mod_); }

    long index(const std::vector<long>& exps) const {
        if (exps.size() != lv_.primes.size()) throw InvalidArgument("exponent vector has the wrong length");
        long k = 0, stride = 1;
        for (size_t i = 0; i < exps.size(); ++i) {
            k += pmod(exps[i], lv_.orders[i]) * stride;
            stride *= lv_.orders[i];
        }
        return k;
    }
    std::vector<long> exponents(long flat) const {
        std::vector<long> e(lv_.orders.size());
        for (size_t i = 0; i < e.size(); ++i) {
            e[i] = flat % lv_.orders[i];
            flat /= lv_.orders[i];
        }
        return e;
    }

    bool is_zero() const {
        for (const auto& a : c_)
            if (a != 0) return false;
        return true;
    }
    // Image under all delta -> 1, mod p^M.
    mpz_class augmentation() const {
        mpz_class s = 0;
        for (const auto& a : c_) s += a;
        return mod(s, mod_);
    }
    // Least valuation among coefficients; kInfPrec for the zero element.
    long min_valuation() const {
        long v = kInfPrec;
        for (const auto& a : c_)
            if (a != 0) v = std::min(v, val_p(a, lv_.p));
        return v;
    }

    friend GroupRingElement operator+(const GroupRingElement& x, const GroupRingElement& y) {
        check(x, y);
        GroupRingElement r = x;
        for (size_t i = 0; i < r.c_.size(); ++i) r.c_[i] = mod(r.c_[i] + y.c_[i], r.mod_);
        return r;
    }
    GroupRingElement operator-() const {
        GroupRingElement r = *this;
        for (auto& a : r.c_) a = mod(-a, mod_);
        return r;
    }
    friend GroupRingElement operator-(const GroupRingElement& x, const GroupRingElement& y) { return x + (-y); }
    friend GroupRingElement operator*(const GroupRingElement& x, const GroupRingElement& y) {
        check(x, y);
        GroupRingElement r(x.lv_, x.M_);
        long n = x.lv_.size();
        std::vector<std::vector<long>> ex(n);
        for (long i = 0; i < n; ++i) ex[i] = x.exponents(i);
        std::vector<long> e(x.lv_.primes.size());
        for (long i = 0; i < n; ++i) {
            if (x.c_[i] == 0) continue;
            for (long j = 0; j < n; ++j) {
                if (y.c_[j] == 0) continue;
                for (size_t t = 0; t < e.size(); ++t) e[t] = ex[i][t] + ex[j][t];
                r.c_[r.index(e)] += x.c_[i] * y.c_[j];
            }
        }
        for (auto& a : r.c_) a = mod(a, r.mod_);
        return r;
    }
    GroupRingElement scaled(const mpz_class& a) const {
        GroupRingElement r = *this;
        for (auto& v : r.c_) v = mod(v * a, mod_);
        return r;
    }
    friend bool operator==(const GroupRingElement& x, const GroupRingElement& y) {
        return x.lv_ == y.lv_ && x.M_ == y.M_ && x.c_ == y.c_;
    }

    // The quotient map delta_l -> 1 onto level r / l.
    GroupRingElement corestrict(long ell) const {
        int i = lv_.index_of(ell);
        if (i < 0) throw InvalidArgument("corestriction: l = " + std::to_string(ell) + " is not in the level");
        GroupRingElement r(lv_.without(ell), M_);
        for (long k = 0; k < lv_.size(); ++k) {
            if (c_[k] == 0) continue;
            std::vector<long> e = exponents(k);
            e.erase(e.begin() + i);
            long t = r.index(e);
            r.c_[t] = mod(r.c_[t] + c_[k], mod_);
        }
        return r;
    }
    // Image of a larger level's element: forget the coordinates of primes not here.
    static GroupRingElement project_group_element(const TameLevel& from, const std::vector<long>& exps,
                                                  const TameLevel& to, int M) {
        std::vector<long> e;
        for (long l : to.primes) {
            int i = from.index_of(l);
            if (i < 0) throw InvalidArgument("target level does not divide the source level");
            e.push_back(exps.at(i));
        }
        return group_element(to, M, e);
    }

    std::string str() const {
        std::string s;
        for (long k = 0; k < lv_.size(); ++k) {
            if (c_[k] == 0) continue;
            if (!s.empty()) s += " + ";
            s += c_[k].get_str();
            auto e = exponents(k);
            for (size_t i = 0; i < e.size(); ++i)
                if (e[i]) s += "*d" + std::to_string(lv_.primes[i]) + "^" + std::to_string(e[i]);
        }
        return s.empty() ? "0" : s;
    }

private:
    static void check(const GroupRingElement& x, const GroupRingElement& y) {
        if (!(x.lv_ == y.lv_)) throw InvalidArgument("group ring elements of different tame levels");
        if (x.M_ != y.M_) throw InvalidArgument("group ring elements of different precision");
    }

    TameLevel lv_;
    int M_ = 20;
    mpz_class mod_ = 1;
    std::vector<mpz_class> c_{0};
};

// y with x y = 1 mod p^M, by Newton's iteration y <- y (2 - x y) from the inverse
// of the residue image. Delta is a p-group, so the radical mod p is the
// augmentation ideal and x is a unit iff its augmentation is.
inline GroupRingElement invert_unit_mod_radical(const GroupRingElement& x, int max_steps = 64) {
    const TameLevel& lv = x.level();
    int p = lv.p, M = x.precision();
    mpz_class a = mod(x.augmentation(), mpz_class(p));
    if (a == 0) throw InvalidArgument("not a unit: the residue image vanishes");
    GroupRingElement one = GroupRingElement::one(lv, M), two = GroupRingElement::scalar(lv, M, 2);
    GroupRingElement y = GroupRingElement::scalar(lv, M, inv_mod(a, mpz_class(p)));
    for (int s = 0; s < max_steps; ++s) {
        GroupRingElement e = x * y;
        if (e == one) return y;
        y = y * (two - e);
    }
    throw PrecisionError("Newton iteration did not converge");
}

// Polynomial in the variable standing for Fr_l^-1, coefficients in Q(mu_{p-1}).
struct EulerPolynomial {
    int p = 5;
    std::vector<CycNumber> c;

    int degree() const { return static_cast<int>(c.size()) - 1; }
    friend EulerPolynomial operator*(const EulerPolynomial& x, const EulerPolynomial& y) {
        EulerPolynomial r{x.p, std::vector<CycNumber>(x.c.size() + y.c.size() - 1, CycNumber::zero(x.p))};
        for (size_t i = 0; i < x.c.size(); ++i)
            for (size_t j = 0; j < y.c.size(); ++j) r.c[i + j] = r.c[i + j] + x.c[i] * y.c[j];
        return r;
    }
    friend EulerPolynomial operator-(const EulerPolynomial& x, const EulerPolynomial& y) {
        EulerPolynomial r{x.p, std::vector<CycNumber>(std::max(x.c.size(), y.c.size()), CycNumber::zero(x.p))};
        for (size_t i = 0; i < x.c.size(); ++i) r.c[i] = r.c[i] + x.c[i];
        for (size_t i = 0; i < y.c.size(); ++i) r.c[i] = r.c[i] + y.c[i].scaled(-1);
        return r;
    }
    bool is_zero() const {
        for (const auto& a : c)
            if (!a.is_zero()) return false;
        return true;
    }
    friend bool operator==(const EulerPolynomial& x, const EulerPolynomial& y) { return (x - y).is_zero(); }
    std::vector<std::string> coeff_strings() const {
        std::vector<std::string> s;
        for (const auto& a : c) s.push_back(a.str());
        return s;
    }

    // sum c_i (s g)^i in (Z/p^M)[Delta_r] for a group element g and scalar s.
    GroupRingElement evaluate(const GroupRingElement& g, const PadicScalar& s) const {
        const TameLevel& lv = g.level();
        int M = g.precision();
        mpz_class m = pow_ui(p, M);
        GroupRingElement r = GroupRingElement::zero(lv, M), gp = GroupRingElement::one(lv, M);
        PadicScalar sp = PadicScalar::from_long(p, 1, M + 8);
        for (size_t i = 0; i < c.size(); ++i) {
            PadicScalar coef = c[i].embed(M + 8) * sp;
            if (!coef.is_zero()) {
                if (coef.valuation() < 0) throw InvalidArgument("Euler polynomial coefficient is not integral at p");
                r = r + gp.scaled(coef.with_abs_prec(M).scaled_integer(0));
            }
            gp = gp * g;
            sp = sp * s;
        }
        return r;
    }
};

inline CycNumber cyc_root(int p, const RootOfUnity& z) {
    CycNumber r = CycNumber::zero(p);
    r.add(z.e, 1);
    return r;
}

// psi(l) l^-j as an exact element of Q(mu_{p-1}).
inline CycNumber twist_scalar(int p, long ell, long j, const RootOfUnity& psi_ell) {
    mpz_class lj;
    mpz_ui_pow_ui(lj.get_mpz_t(), ell, std::labs(j));
    return cyc_root(p, psi_ell).scaled(j >= 0 ? mpq_class(1) / mpq_class(lj) : mpq_class(lj));
}

// 1 - c e1 X + c^2 e2 X^2 - c^3 e3 X^3 with e_i the elementary symmetric
// functions of {alpha^2, alpha beta, beta^2}, alpha + beta = a, alpha beta = e l^(k+1).
inline EulerPolynomial sym2_euler_poly(long ell, long a, const RootOfUnity& eps_ell, long k, const CycNumber& c) {
    int p = eps_ell.p;
    if (ell % p == 0) throw InvalidArgument("l must be prime to p");
    mpz_class L;
    mpz_ui_pow_ui(L.get_mpz_t(), ell, k + 1);
    CycNumber one = CycNumber::one(p), q = cyc_root(p, eps_ell).scaled(mpq_class(L));
    CycNumber e1 = one.scaled(a * a) + q.scaled(-1);
    CycNumber e2 = q * e1;
    CycNumber e3 = q * q * q;
    CycNumber c2 = c * c;
    return {p, {one, (c * e1).scaled(-1), c2 * e2, (c2 * c * e3).scaled(-1)}};
}

// Euler polynomial of f (x) f: roots alpha^2, alpha beta, alpha beta, beta^2.
// With s = alpha + beta, q = alpha beta the power sums give
// 1 - s^2 X + (2 q s^2 - 2 q^2) X^2 - q^2 s^2 X^3 + q^4 X^4.
inline EulerPolynomial rankin_euler_poly(long ell, long a, const RootOfUnity& eps_ell, long k, const CycNumber& c) {
    int p = eps_ell.p;
    mpz_class L;
    mpz_ui_pow_ui(L.get_mpz_t(), ell, k + 1);
    CycNumber one = CycNumber::one(p), q = cyc_root(p, eps_ell).scaled(mpq_class(L));
    mpq_class s2 = mpq_class(a * a);
    CycNumber q2 = q * q, c2 = c * c;
    return {p,
            {one, c.scaled(-s2), c2 * (q.scaled(2 * s2) + q2.scaled(-2)), (c2 * c * q2).scaled(-s2), c2 * c2 * q2 * q2}};
}

struct RankinCheck {
    bool holds = false;
    EulerPolynomial P, Q, linear, diff;
};

// Q(T) = (1 - l^(k+1-j) eps chi(l) T) P(T), with T standing for l^-j Fr_l^-1 scaled by chi(l).
inline RankinCheck rankin_factorization_check(long ell, long a, const RootOfUnity& eps_ell, const RootOfUnity& chi_ell,
                                              long k, long j) {
    int p = eps_ell.p;
    if (ell % p == 0) throw InvalidArgument("l must be prime to p");
    CycNumber c = twist_scalar(p, ell, j, chi_ell);
    RankinCheck r;
    r.P = sym2_euler_poly(ell, a, eps_ell, k, c);
    r.Q = rankin_euler_poly(ell, a, eps_ell, k, c);
    mpz_class L;
    mpz_ui_pow_ui(L.get_mpz_t(), ell, k + 1);
    r.linear = {p, {CycNumber::one(p), (c * cyc_root(p, eps_ell)).scaled(-mpq_class(L))}};
    r.diff = r.Q - r.linear * r.P;
    r.holds = r.diff.is_zero();
    return r;
}

// --- synthetic norm-compatible systems ---

struct EulerData {
    long a = 0;
    RootOfUnity eps;
    RootOfUnity chi;
};

struct SyntheticSystem {
    TameLevel R;
    int M = 20;
    long k = 0, j = 0;
    std::map<long, EulerData> euler;
    // phi_l as exponents over R's primes, zero at l itself; it stands for Fr_l^-1.
    std::map<long, std::vector<long>> frobenius;
    // Gamma-coordinate of Fr_l^-1, caller supplied.
    PadicScalar gamma;
    // c_r indexed by the subset of R's primes dividing r.
    std::map<unsigned, GroupRingElement> classes;

    TameLevel level_of(unsigned mask) const {
        TameLevel t = R;
        t.primes.clear();
        t.orders.clear();
        for (size_t i = 0; i < R.primes.size(); ++i)
            if (mask >> i & 1u) {
                t.primes.push_back(R.primes[i]);
                t.orders.push_back(R.orders[i]);
            }
        return t;
    }
    unsigned full_mask() const { return (1u << R.primes.size()) - 1; }

    // P_l(l^-j phi_l) at level r, r l | R.
    GroupRingElement euler_factor(unsigned r_mask, long ell) const {
        int p = R.p;
        const EulerData& d = euler.at(ell);
        EulerPolynomial P = sym2_euler_poly(ell, d.a, d.eps, k, twist_scalar(p, ell, j, d.chi));
        TameLevel lv = level_of(r_mask);
        GroupRingElement g = GroupRingElement::project_group_element(R, frobenius.at(ell), lv, M);
        return P.evaluate(g, gamma);
    }
};

inline GroupRingElement random_group_ring_element(const TameLevel& lv, int M, unsigned long seed) {
    gmp_randclass g(gmp_randinit_default);
    g.seed(seed);
    mpz_class m = pow_ui(lv.p, M);
    std::vector<mpz_class> c(lv.size());
    for (auto& a : c) a = g.get_z_range(m);
    return GroupRingElement::from_coeffs(lv, M, std::move(c));
}

// Top-down: c_R = seed, then c_r = P_l(l^-j phi_l)^-1 cor(c_{rl}) with l the
// least prime of R / r. Frobenius images are compatible under projection, so
// every other relation holds as well; the validator checks them all.
inline SyntheticSystem build_synthetic_system(const TameLevel& R, const GroupRingElement& seed, long k, long j,
                                              std::map<long, EulerData> euler,
                                              std::map<long, std::vector<long>> frobenius,
                                              std::optional<PadicScalar> gamma = std::nullopt) {
    if (!(seed.level() == R)) throw InvalidArgument("seed lives at a different tame level");
    if (R.primes.size() > 16) throw InvalidArgument("too many primes");
    SyntheticSystem S;
    S.R = R;
    S.M = seed.precision();
    S.k = k;
    S.j = j;
    S.gamma = gamma ? *gamma : PadicScalar::from_long(R.p, 1, S.M + 8);
    for (size_t i = 0; i < R.primes.size(); ++i) {
        long ell = R.primes[i];
        if (!euler.count(ell)) throw InvalidArgument("missing Euler data for l = " + std::to_string(ell));
        auto it = frobenius.find(ell);
        std::vector<long> f = it == frobenius.end() ? std::vector<long>(R.primes.size(), 0) : it->second;
        if (f.size() != R.primes.size()) throw InvalidArgument("Frobenius exponent vector has the wrong length");
        if (f[i] != 0) throw InvalidArgument("phi_l must lie in Delta_{R/l}");
        S.frobenius[ell] = f;
    }
    S.euler = std::move(euler);
    S.classes[S.full_mask()] = seed;
    // masks in decreasing popcount order
    std::vector<unsigned> masks;
    for (unsigned m = 0; m < S.full_mask(); ++m) masks.push_back(m);
    std::sort(masks.begin(), masks.end(), [](unsigned a, unsigned b) {
        int pa = __builtin_popcount(a), pb = __builtin_popcount(b);
        return pa != pb ? pa > pb : a < b;
    });
    for (unsigned m : masks) {
        size_t i = 0;
        while (m >> i & 1u) ++i;
        long ell = R.primes[i];
        GroupRingElement P = S.euler_factor(m, ell);
        if (mod(P.augmentation(), mpz_class(R.p)) == 0)
            throw InvalidArgument("Euler factor at l = " + std::to_string(ell) + " is not a unit in O[Delta_r]");
        S.classes[m] = invert_unit_mod_radical(P) * S.classes.at(m | (1u << i)).corestrict(ell);
    }
    return S;
}

struct RelationCheck {
    long r = 1;
    long ell = 0;
    bool holds = false;
    long deviation_valuation = kInfPrec;  // kInfPrec when the difference is exactly zero
};

struct SystemReport {
    bool all_hold = true;
    std::vector<RelationCheck> checks;
    std::vector<RelationCheck> failures() const {
        std::vector<RelationCheck> f;
        for (const auto& c : checks)
            if (!c.holds) f.push_back(c);
        return f;
    }
};

// cor_{rl/r}(c_{rl}) = P_l(l^-j phi_l) c_r for every r l | R.
inline SystemReport validate_system(const SyntheticSystem& S) {
    SystemReport rep;
    for (const auto& [m, c] : S.classes) {
        for (size_t i = 0; i < S.R.primes.size(); ++i) {
            if (m >> i & 1u) continue;
            long ell = S.R.primes[i];
            GroupRingElement lhs = S.classes.at(m | (1u << i)).corestrict(ell);
            GroupRingElement rhs = S.euler_factor(m, ell) * c;
            RelationCheck rc;
            rc.r = S.level_of(m).r();
            rc.ell = ell;
            rc.deviation_valuation = (lhs - rhs).min_valuation();
            rc.holds = rc.deviation_valuation == kInfPrec;
            rep.all_hold = rep.all_hold && rc.holds;
            rep.checks.push_back(rc);
        }
    }
    return rep;
}

}  // namespace iwa
