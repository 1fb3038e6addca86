#pragma once

#include "distribution.hpp"

namespace iwa {

enum class LogKind { plus, minus, full };

inline std::string to_string(LogKind k) {
    switch (k) {
        case LogKind::plus: return "plus";
        case LogKind::minus: return "minus";
        default: return "full";
    }
}
inline LogKind log_kind_from_string(const std::string& s) {
    if (s == "plus" || s == "+") return LogKind::plus;
    if (s == "minus" || s == "-") return LogKind::minus;
    if (s == "full") return LogKind::full;
    throw InvalidArgument("unknown log kind '" + s + "'");
}

struct LogSpec {
    LogKind kind = LogKind::plus;
    int r = 1;
    int shift = 0;  // the (s) variant, Tw_{-s} of the unshifted log
};

// Truncated sum of log(1+x) for v_p(x) >= 1, correct mod p^K.
inline mpq_class log1p_rational(const mpq_class& x, int p, long K) {
    mpz_class num = x.get_num(), den = x.get_den();
    long vx = remove_p(num, p) - remove_p(den, p);
    if (vx < 1) throw InvalidArgument("log1p needs v_p(x) >= 1");
    auto ilog = [p](long n) {
        long e = 0;
        for (long q = p; q <= n; q *= p) ++e;
        return e;
    };
    mpq_class s = 0, xn = 1;
    // n vx - log_p n increases with n, so the first term past K ends the sum.
    for (long n = 1; n * vx - ilog(n) < K; ++n) {
        xn *= x;
        s += (n % 2 ? xn : mpq_class(-xn)) / n;
    }
    s.canonicalize();
    return s;
}

// log_p(u^{-j}(1+X)) = log(1+X) - j log_p u, as rationals up to X^{N-1}.
inline std::vector<mpq_class> shifted_log_coeffs(int p, const mpz_class& u, long j, int N, long K) {
    std::vector<mpq_class> c(N);
    if (j != 0) c[0] = -mpq_class(j) * log1p_rational(mpq_class(u - 1), p, K);
    for (int n = 1; n < N; ++n) c[n] = mpq_class(n % 2 ? 1 : -1, n);
    for (auto& q : c) q.canonicalize();
    return c;
}

namespace detail {

inline long max_small_factors(int p, int N, int parity) {
    long count = 0;
    for (int m = 1; (p - 1) * ipow(p, m - 1) < N; ++m)
        if (parity < 0 || m % 2 == parity) ++count;
    return count;
}

}  // namespace detail

// log^+_{p,r}, log^-_{p,r} or log_{p,r}, shifted by s. The plus/minus products
// stop at the first factor of degree > N that is 1 mod p^W; W carries enough
// guard digits for the p^{-r} prefactor and the non-integral small factors.
inline Distribution pollack_log(const LogSpec& spec, const Precision& prec, mpz_class u = 0) {
    prec.validate();
    if (spec.r < 1) throw InvalidArgument("Pollack logarithms need r >= 1");
    if (spec.shift < 0) throw InvalidArgument("log shift must be nonnegative");
    int p = prec.p, N = prec.N;
    if (u == 0) u = p + 1;
    std::vector<std::pair<std::string, std::string>> meta;
    Series prod;
    if (spec.kind == LogKind::full) {
        long lg = 0;
        for (int n = 1; n < N; ++n) lg = std::max(lg, val_p(mpz_class(n), p));
        long K = prec.M + spec.r * (lg + 1) + 2;
        prod = Series::one(p, N, static_cast<int>(K));
        for (int j = spec.shift; j < spec.shift + spec.r; ++j)
            prod *= series_from_rationals(p, shifted_log_coeffs(p, u, j, N, K + lg), N, K);
        meta.push_back({"working_prec", std::to_string(K)});
    } else {
        int parity = spec.kind == LogKind::plus ? 0 : 1;
        long small = spec.r * detail::max_small_factors(p, N, parity);
        long W = prec.M + spec.r + small + 2;
        prod = Series::one(p, N, static_cast<int>(W + 1));
        int m0 = 0, m_used = 0, nontrivial = 0;
        mpz_class pp = p, pM1 = pow_ui(p, prec.M + 1);
        for (int j = spec.shift; j < spec.shift + spec.r; ++j) {
            CyclotomicTower tower(p, u, j, W + 1, N);
            int stable_from = 0;
            for (;;) {
                const std::vector<mpz_class>& phi = tower.next();
                int m = tower.m();
                // Phi/p == 1 mod (p^M, X^N) tracks the stabilization index m0.
                bool one_M = mod(phi[0], pM1) == pp;
                for (int i = 1; i < N && one_M; ++i) one_M = mod(phi[i], pM1) == 0;
                if (one_M && !stable_from) stable_from = m;
                if (!one_M) stable_from = 0;
                if (m % 2 != parity) continue;
                bool one_W = phi[0] == pp;
                for (int i = 1; i < N && one_W; ++i) one_W = phi[i] == 0;
                if (one_W && tower.degree() > N) break;
                if (!one_M) ++nontrivial;
                prod *= Series::from_ints(p, phi, -1, static_cast<int>(W + 1));
                m_used = std::max(m_used, m);
            }
            m0 = std::max(m0, stable_from);
        }
        prod = prod.shifted_by(-spec.r);
        meta.push_back({"m0", std::to_string(m0)});
        meta.push_back({"m_used", std::to_string(m_used)});
        meta.push_back({"small_factors", std::to_string(small)});
        meta.push_back({"working_prec", std::to_string(W)});
        if (nontrivial == 0) meta.push_back({"warning", "x_prec too small to include any nontrivial factor"});
    }
    if (prod.abs_prec() < prec.M) throw PrecisionError("working precision exhausted in pollack_log");
    prod = prod.with_abs_prec(prec.M);
    Distribution d(IwasawaElement::uniform(prec, std::move(prod)),
                   spec.kind == LogKind::full ? mpq_class(spec.r) : mpq_class(spec.r, 2));
    d.order.canonicalize();
    d.meta = std::move(meta);
    return d;
}

struct LogIdentityReport {
    int p = 0, r = 0;
    long p_prec = 0;  // precision of the comparison
    int x_prec = 0;
    bool zero = false;
    long deviation_valuation = 0;  // meaningful when !zero
    std::string deviation() const {
        return zero ? "exact-zero" : "valuation " + std::to_string(deviation_valuation);
    }
};

// p^{2r} prod_{j<r} (u^{-j}(1+X) - 1) log^+_{p,r} log^-_{p,r} against the
// Taylor expansion of log_{p,r}.
inline LogIdentityReport log_identity_check(int p, int r, const Precision& prec) {
    if (prec.p != p) throw InvalidArgument("precision prime differs from p");
    if (r < 1) throw InvalidArgument("log_identity_check needs r >= 1");
    Precision work = prec;
    work.M = prec.M + 2 * r + 4;
    mpz_class u = p + 1;
    Series lhs = pollack_log({LogKind::plus, r, 0}, work).body.component(0) *
                 pollack_log({LogKind::minus, r, 0}, work).body.component(0);
    long W = work.M + 2;
    for (int j = 0; j < r; ++j) {
        mpz_class w = upow_mod(u, -j, p, W);
        std::vector<mpz_class> lin(prec.N);
        lin[0] = w - 1;
        if (prec.N > 1) lin[1] = w;
        lhs *= Series::from_ints(p, lin, 0, static_cast<int>(W));
    }
    lhs = lhs.shifted_by(2 * r);
    Series rhs = pollack_log({LogKind::full, r, 0}, prec).body.component(0);
    Series diff = (lhs - rhs).with_abs_prec(prec.M);
    LogIdentityReport rep;
    rep.p = p;
    rep.r = r;
    rep.p_prec = std::min<long>(prec.M, std::min(lhs.abs_prec(), rhs.abs_prec()));
    rep.x_prec = diff.size();
    rep.zero = diff.is_zero();
    if (!rep.zero) rep.deviation_valuation = diff.valuation_floor();
    return rep;
}

}  // namespace iwa
