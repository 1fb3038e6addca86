#pragma once

#include <cmath>
#include <optional>

#include "iwasawa.hpp"

namespace iwa {

// An element of H_{E,r}(Gamma): the body plus the claimed growth order r.
struct Distribution {
    IwasawaElement body;
    mpq_class order = 0;
    std::vector<std::pair<std::string, std::string>> meta;

    Distribution() = default;
    Distribution(IwasawaElement b, mpq_class r = 0) : body(std::move(b)), order(std::move(r)) {}

    friend Distribution operator*(const Distribution& x, const Distribution& y) {
        return Distribution(x.body * y.body, x.order + y.order);
    }
    friend Distribution operator+(const Distribution& x, const Distribution& y) {
        return Distribution(x.body + y.body, std::max(x.order, y.order));
    }
    friend Distribution operator-(const Distribution& x, const Distribution& y) {
        return Distribution(x.body - y.body, std::max(x.order, y.order));
    }
    Distribution operator-() const { return Distribution(-body, order); }
    std::string meta_value(const std::string& key) const {
        for (const auto& [k, v] : meta)
            if (k == key) return v;
        return {};
    }
};

// min_n v_p(a_n) + n / (p^(m-1)(p-1)) for one series; nullopt if it is zero to
// precision. Coefficients that are zero to precision are skipped.
inline std::optional<mpq_class> rho_norm_series(const Series& s, int m) {
    if (s.is_zero()) return std::nullopt;
    int p = s.prime();
    mpq_class denom(ipow(p, m - 1) * (p - 1));
    long half_k = s.form() ? s.form()->k + 1 : 0;  // v(alpha) doubled
    std::optional<mpq_class> best;
    for (int n = 0; n < s.size(); ++n) {
        long twice = LONG_MAX;
        if (s.A()[n] != 0) twice = 2 * (s.shift() + val_p(s.A()[n], p));
        if (s.has_alpha() && s.B()[n] != 0) twice = std::min(twice, 2 * (s.shift() + val_p(s.B()[n], p)) + half_k);
        if (twice == LONG_MAX) continue;
        mpq_class r = mpq_class(twice, 2) + mpq_class(n) / denom;
        r.canonicalize();
        if (!best || r < *best) best = r;
    }
    return best;
}

// Valuation form of the rho_m norm, min over tame components.
inline mpq_class rho_norm(const IwasawaElement& F, int m) {
    if (m < 1) throw InvalidArgument("rho_norm needs m >= 1");
    std::optional<mpq_class> best;
    for (int i = 0; i < F.tame_count(); ++i) {
        auto r = rho_norm_series(F.component(i), m);
        if (r && (!best || *r < *best)) best = r;
    }
    if (!best) throw InvalidArgument("rho_norm of an element that is zero to precision");
    return *best;
}
inline mpq_class rho_norm(const Distribution& F, int m) { return rho_norm(F.body, m); }

// Least-squares slope of -rho_norm(F, m) against m = 1..depth.
inline mpq_class growth_order(const IwasawaElement& F, int depth) {
    if (depth < 2) throw InvalidArgument("growth_order needs depth >= 2");
    long need = ipow(F.prime(), depth - 1);
    if (F.x_prec() < need)
        throw PrecisionError("growth_order at depth " + std::to_string(depth) + " needs x_prec >= " + std::to_string(need));
    std::vector<mpq_class> y;
    for (int m = 1; m <= depth; ++m) y.push_back(-rho_norm(F, m));
    mpq_class mbar(depth + 1, 2), ybar = 0;
    for (auto& v : y) ybar += v;
    ybar /= depth;
    mpq_class num = 0, den = 0;
    for (int m = 1; m <= depth; ++m) {
        mpq_class dm = mpq_class(m) - mbar;
        num += dm * (y[m - 1] - ybar);
        den += dm * dm;
    }
    mpq_class r = num / den;
    r.canonicalize();
    return r;
}
inline mpq_class growth_order(const Distribution& F, int depth) { return growth_order(F.body, depth); }

// Remainder for an element of order r. Tail coefficients may grow like
// log_p^r, so the bound is C - r log_p N + floor(N/deg) - 1, with C fitted as
// min_n v(a_n) + r log_p n over the known coefficients.
inline Series remainder_mod_cyclotomic(const Distribution& F, int m, long j, long tame = 0) {
    const Series& s = F.body.component(tame);
    if (F.order == 0 || s.is_zero() || s.x_exact()) return remainder_mod_cyclotomic(F.body, m, j, tame);
    int p = s.prime();
    double r = F.order.get_d(), lp = std::log(static_cast<double>(p));
    double C = 1e300;
    for (int n = 0; n < s.size(); ++n) {
        if (s.A()[n] == 0 && (!s.has_alpha() || s.B()[n] == 0)) continue;
        long v = s.shift() + std::min(s.A()[n] == 0 ? kInfPrec : val_p(s.A()[n], p),
                                      !s.has_alpha() || s.B()[n] == 0 ? kInfPrec : val_p(s.B()[n], p));
        C = std::min(C, v + r * std::log(std::max(n, 1)) / lp);
    }
    long deg = (p - 1) * ipow(p, m - 1);
    long tb = static_cast<long>(std::floor(C - r * std::log(s.size()) / lp)) + s.size() / deg - 1;
    return remainder_mod_cyclotomic(F.body, m, j, tame, tb);
}

struct DivideOptions {
    // Quotient coefficients of valuation below this raise DivisibilityError.
    std::optional<long> integrality_floor;
    // The quotient is cut before the first coefficient known to less than this.
    long min_abs = 1;
};

struct DivisionResult {
    Distribution quotient;
    long p_prec = 0;  // attained M'
    int x_prec = 0;   // attained N'
};

namespace detail {

inline long coeff_abs(const QuadExtScalar& c) {
    long a = c.a().is_exact_zero() ? kInfPrec : c.a().abs_prec();
    long b = c.b().is_exact_zero() ? kInfPrec : c.b().abs_prec();
    return std::min(a, b);
}

// Back-substitution F = Q G in one tame slot, starting from the lowest
// X-degree where G is not zero to precision.
inline Series divide_series(const Series& f, const Series& g, int comp, const DivideOptions& opt) {
    int p = f.prime();
    Form form = f.form() ? f.form() : g.form();
    std::vector<QuadExtScalar> F = f.coeffs(), G = g.coeffs();
    // an X-exact side is zero past its stored length
    if (g.x_exact() && G.size() < F.size()) G.resize(F.size(), QuadExtScalar(PadicScalar::exact_zero(p), form));
    if (f.x_exact() && F.size() < G.size()) F.resize(G.size(), QuadExtScalar(PadicScalar::exact_zero(p), form));
    int d = 0;
    while (d < static_cast<int>(G.size()) && G[d].is_zero()) ++d;
    if (f.is_exact_zero()) return Series::exact_zero(p, std::max<int>(F.size() - d, 0), form);
    if (d == static_cast<int>(G.size())) {
        for (int i = 0; i < static_cast<int>(F.size()); ++i)
            if (!F[i].is_zero())
                throw DivisibilityError("divisor is zero to precision in component " + std::to_string(comp), comp, i);
        return Series::zero_to(p, f.size(), f.abs_prec(), form);
    }
    for (int i = 0; i < d && i < static_cast<int>(F.size()); ++i)
        if (!F[i].is_zero())
            throw DivisibilityError("nonzero remainder at X^" + std::to_string(i) + " in component " + std::to_string(comp),
                                    comp, i);
    int len = std::min<int>(F.size(), G.size()) - d;
    std::vector<QuadExtScalar> Q;
    Q.reserve(std::max(len, 0));
    const QuadExtScalar& lead = G[d];
    for (int n = 0; n < len; ++n) {
        QuadExtScalar num = F[n + d];
        for (int i = 0; i < n; ++i) {
            if (Q[i].is_exact_zero()) continue;
            const QuadExtScalar& gi = G[n + d - i];
            if (gi.is_exact_zero()) continue;
            num -= Q[i] * gi;
        }
        QuadExtScalar q = num / lead;
        if (coeff_abs(q) < opt.min_abs) break;
        if (opt.integrality_floor && !q.is_zero() && q.valuation() < HalfInt::integer(*opt.integrality_floor))
            throw DivisibilityError("quotient coefficient at X^" + std::to_string(n) + " in component " +
                                        std::to_string(comp) + " has valuation " + q.valuation().str() +
                                        " below " + std::to_string(*opt.integrality_floor),
                                    comp, n);
        Q.push_back(std::move(q));
    }
    if (Q.empty())
        throw PrecisionError("quotient in component " + std::to_string(comp) + " has no coefficient known to p^" +
                             std::to_string(opt.min_abs));
    return Series::from_scalars(p, Q, static_cast<int>(Q.size()), form);
}

}  // namespace detail

// Q with Q G = F to the attained precision. The first offending coefficient
// (lowest component, then lowest degree) is reported on failure.
inline DivisionResult divide_exact(const Distribution& F, const Distribution& G, const DivideOptions& opt = {}) {
    int n = F.body.tame_count();
    std::vector<std::optional<DivisibilityError>> errs(n);
    IwasawaElement q = IwasawaElement::zip(F.body, G.body, [&](const Series& a, const Series& b, int i) {
        try {
            return detail::divide_series(a, b, i, opt);
        } catch (const DivisibilityError& e) {
            errs[i] = e;
            return Series::exact_zero(a.prime(), 0);
        }
    });
    for (auto& e : errs)
        if (e) throw *e;
    int N = q.precision().N;
    DivisionResult r;
    r.quotient = Distribution(q, std::max(mpq_class(F.order - G.order), mpq_class(0)));
    r.p_prec = q.abs_prec();
    r.x_prec = N;
    return r;
}

inline DivisionResult divide_exact(const IwasawaElement& F, const IwasawaElement& G, const DivideOptions& opt = {}) {
    return divide_exact(Distribution(F), Distribution(G), opt);
}

}  // namespace iwa
