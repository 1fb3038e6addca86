#pragma once

#include <array>
#include <optional>

#include "dieudonne.hpp"
#include "pollack.hpp"

namespace iwa {

enum class Sign { plus, minus, dot, circ };

inline std::string to_string(Sign s) {
    switch (s) {
        case Sign::plus: return "plus";
        case Sign::minus: return "minus";
        case Sign::dot: return "dot";
        default: return "circ";
    }
}
inline Sign sign_from_string(const std::string& s) {
    if (s == "plus" || s == "+") return Sign::plus;
    if (s == "minus" || s == "-") return Sign::minus;
    if (s == "dot" || s == "bullet") return Sign::dot;
    if (s == "circ" || s == "o") return Sign::circ;
    throw InvalidArgument("unknown sign '" + s + "'");
}

// Which signed component each row of M produces, and whether the row logs are
// the (1)-shifted ones. Rows 3 and 4 always use log_{k+1}.
struct SignedConvention {
    std::string name;
    std::array<Sign, 4> rows;
    int log_shift;

    int row_of(Sign s) const {
        for (int i = 0; i < 4; ++i)
            if (rows[i] == s) return i;
        throw InvalidArgument("sign missing from convention");
    }
};

inline SignedConvention convention_theorem_a() { return {"theoremA", {Sign::plus, Sign::minus, Sign::dot, Sign::circ}, 1}; }
inline SignedConvention convention_lemma_factorisation() {
    return {"lemmaFactorisation", {Sign::minus, Sign::plus, Sign::dot, Sign::circ}, 0};
}
inline SignedConvention convention_from_string(const std::string& s) {
    if (s == "theoremA") return convention_theorem_a();
    if (s == "lemmaFactorisation") return convention_lemma_factorisation();
    throw InvalidArgument("unknown convention '" + s + "'");
}

// Coordinates in the v_lambda (x) v_mu basis, ordered (aa, mm, am, ma).
struct UnboundedQuadruple {
    std::array<Distribution, 4> L;
    Distribution& L_aa() { return L[0]; }
    Distribution& L_mm() { return L[1]; }
    Distribution& L_am() { return L[2]; }
    Distribution& L_ma() { return L[3]; }
};

struct SignedQuadruple {
    IwasawaElement plus, minus, dot, circ;

    IwasawaElement& get(Sign s) {
        switch (s) {
            case Sign::plus: return plus;
            case Sign::minus: return minus;
            case Sign::dot: return dot;
            default: return circ;
        }
    }
    const IwasawaElement& get(Sign s) const { return const_cast<SignedQuadruple*>(this)->get(s); }
};

// Everything fixed by (p, k, eps, precision, convention): the form, M and its
// inverse, and the four row logs.
class SignedContext {
public:
    SignedContext(const Precision& prec, int k, RootOfUnity eps, SignedConvention conv)
        : prec_(prec), k_(k), conv_(std::move(conv)) {
        prec.validate();
        if (k < 0) throw InvalidArgument("k must be nonnegative");
        form_ = make_form(prec.p, k, eps, std::max(kFormPrec, prec.M + 4 * k + 8));
        ChangeOfBasis c = change_of_basis(form_);
        if (!c.inverse_verified) throw Error("change of basis matrix failed to invert");
        M_ = c.M;
        Minv_ = c.M_inv;
        for (Sign s : {Sign::plus, Sign::minus, Sign::dot})
            logs_[static_cast<int>(s)] = pollack_log(log_spec(s), prec);
        logs_[static_cast<int>(Sign::circ)] = logs_[static_cast<int>(Sign::dot)];
    }

    const Precision& precision() const { return prec_; }
    int k() const { return k_; }
    const Form& form() const { return form_; }
    const SignedConvention& convention() const { return conv_; }
    const EMatrix& M() const { return M_; }
    const EMatrix& M_inv() const { return Minv_; }
    const Distribution& log_of(Sign s) const { return logs_[static_cast<int>(s)]; }
    const Distribution& row_log(int row) const { return log_of(conv_.rows[row]); }
    LogSpec log_spec(Sign s) const {
        if (s == Sign::plus) return {LogKind::plus, 2 * k_ + 2, conv_.log_shift};
        if (s == Sign::minus) return {LogKind::minus, 2 * k_ + 2, conv_.log_shift};
        return {LogKind::full, k_ + 1, conv_.log_shift};
    }

private:
    Precision prec_;
    int k_;
    SignedConvention conv_;
    Form form_;
    EMatrix M_, Minv_;
    std::array<Distribution, 4> logs_;
};

namespace detail {

inline Distribution scaled(const Distribution& d, const QuadExtScalar& c) { return Distribution(d.body.scaled(c), d.order); }

// out_i = sum_j A(i, j) x_j, skipping exact zeros of A.
inline std::array<Distribution, 4> apply(const EMatrix& A, const std::array<Distribution, 4>& x) {
    std::array<Distribution, 4> out;
    for (int i = 0; i < 4; ++i) {
        std::optional<Distribution> acc;
        for (int j = 0; j < 4; ++j) {
            if (A(i, j).is_exact_zero()) continue;
            Distribution t = scaled(x[j], A(i, j));
            acc = acc ? *acc + t : t;
        }
        out[i] = acc ? *acc : scaled(x[0], EMatrix::zero_of(A.form()));
    }
    return out;
}

inline Distribution with_form(const Distribution& d, const Form& f) { return Distribution(d.body.with_form(f), d.order); }

}  // namespace detail

// L = M^{-1} (log_row * bf_row).
inline UnboundedQuadruple synthesize(const SignedQuadruple& s, const SignedContext& ctx) {
    std::array<Distribution, 4> y;
    for (int i = 0; i < 4; ++i) {
        Sign sg = ctx.convention().rows[i];
        y[i] = detail::with_form(ctx.log_of(sg) * Distribution(s.get(sg)), ctx.form());
    }
    UnboundedQuadruple q;
    q.L = detail::apply(ctx.M_inv(), y);
    for (auto& d : q.L) d.order = ctx.k() + 1;
    return q;
}

struct SignedResult {
    SignedQuadruple bf;
    long p_prec = 0;
    int x_prec = 0;
};

// The four rows of M L, before division.
inline std::array<Distribution, 4> signed_rows(const UnboundedQuadruple& q, const SignedContext& ctx) {
    std::array<Distribution, 4> L;
    for (int i = 0; i < 4; ++i) L[i] = detail::with_form(q.L[i], ctx.form());
    return detail::apply(ctx.M(), L);
}

// Divides row i of M L by its log; every failing row is listed in rows, and
// the error itself describes the first one.
inline SignedResult factor_rows(const std::array<Distribution, 4>& y, const SignedContext& ctx) {
    SignedResult r;
    std::array<std::optional<DivisionResult>, 4> out;
    std::optional<DivisibilityError> first;
    std::vector<int> failed;
    DivideOptions opt;
    opt.integrality_floor = 0;
    for (int i = 0; i < 4; ++i) {
        try {
            out[i] = divide_exact(y[i], ctx.row_log(i), opt);
        } catch (DivisibilityError& e) {
            failed.push_back(i + 1);
            if (!first) {
                first = e;
                first->row = i + 1;
            }
        }
    }
    if (first) {
        DivisibilityError e(std::string("row ") + std::to_string(first->row) + " (" +
                                to_string(ctx.convention().rows[first->row - 1]) + "): " + first->what(),
                            first->component, first->index);
        e.row = first->row;
        e.rows = failed;
        throw e;
    }
    r.p_prec = kInfPrec;
    r.x_prec = INT32_MAX;
    for (int i = 0; i < 4; ++i) {
        r.bf.get(ctx.convention().rows[i]) = out[i]->quotient.body;
        r.p_prec = std::min(r.p_prec, out[i]->p_prec);
        r.x_prec = std::min(r.x_prec, out[i]->x_prec);
    }
    return r;
}

inline SignedResult factor_signed(const UnboundedQuadruple& q, const SignedContext& ctx) {
    return factor_rows(signed_rows(q, ctx), ctx);
}

// Signed local coordinates, in the (circ, dot, plus, minus) order.
struct LocalCoords {
    Distribution circ, dot, plus, minus;
    const Distribution& get(Sign s) const {
        switch (s) {
            case Sign::plus: return plus;
            case Sign::minus: return minus;
            case Sign::dot: return dot;
            default: return circ;
        }
    }
};

inline LocalCoords to_local(const UnboundedQuadruple& q, const SignedContext& ctx) {
    auto y = signed_rows(q, ctx);
    LocalCoords c;
    const auto& rows = ctx.convention().rows;
    for (int i = 0; i < 4; ++i) {
        Distribution& slot = rows[i] == Sign::plus ? c.plus : rows[i] == Sign::minus ? c.minus : rows[i] == Sign::dot ? c.dot : c.circ;
        slot = y[i];
    }
    return c;
}

// Col^sign: the signed component divided by its log. There is no Coleman map
// for circ. Classes with unbounded coordinates (pr-classes) need floor = nullopt.
inline IwasawaElement coleman_extract(const LocalCoords& local, Sign sign, const SignedContext& ctx,
                                      std::optional<long> integrality_floor = 0) {
    if (sign == Sign::circ) throw InvalidArgument("circ has no signed Coleman map");
    DivideOptions opt;
    opt.integrality_floor = integrality_floor;
    try {
        return divide_exact(local.get(sign), ctx.log_of(sign), opt).quotient.body;
    } catch (DivisibilityError& e) {
        e.row = ctx.convention().row_of(sign) + 1;
        throw;
    }
}

inline IwasawaElement coleman(const UnboundedQuadruple& q, Sign sign, const SignedContext& ctx,
                              std::optional<long> integrality_floor = 0) {
    return coleman_extract(to_local(q, ctx), sign, ctx, integrality_floor);
}

// Rank-2 model: basis (Y1, Y2) with local images built from bounded seeds.
// An element is its coefficient pair over the distribution ring.
struct MockElement {
    Distribution c1, c2;
};

class MockGlobalModule {
public:
    MockGlobalModule(const SignedContext& ctx, SignedQuadruple seed1, SignedQuadruple seed2)
        : ctx_(&ctx), seeds_{std::move(seed1), std::move(seed2)} {
        for (int i = 0; i < 2; ++i) images_[i] = synthesize(seeds_[i], ctx);
    }

    const SignedContext& context() const { return *ctx_; }
    const SignedQuadruple& seed(int i) const { return seeds_[i]; }
    const UnboundedQuadruple& image(int i) const { return images_[i]; }

    UnboundedQuadruple local_image(const MockElement& z) const {
        UnboundedQuadruple q;
        for (int j = 0; j < 4; ++j) q.L[j] = z.c1 * images_[0].L[j] + z.c2 * images_[1].L[j];
        return q;
    }

    // L_j(Y1) Y2 - L_j(Y2) Y1, j indexing (aa, mm, am, ma)
    MockElement pr(int j) const { return {-images_[1].L[j], images_[0].L[j]}; }

    // BF^sign = (M (pr_j)_j)_row / log_row, coefficientwise.
    MockElement bf(Sign s) const {
        int row = ctx_->convention().row_of(s);
        std::array<Distribution, 4> c1, c2;
        for (int j = 0; j < 4; ++j) {
            MockElement e = pr(j);
            c1[j] = detail::with_form(e.c1, ctx_->form());
            c2[j] = detail::with_form(e.c2, ctx_->form());
        }
        auto y1 = detail::apply(ctx_->M(), c1), y2 = detail::apply(ctx_->M(), c2);
        DivideOptions opt;
        opt.integrality_floor = 0;
        try {
            return {divide_exact(y1[row], ctx_->row_log(row), opt).quotient,
                    divide_exact(y2[row], ctx_->row_log(row), opt).quotient};
        } catch (DivisibilityError& e) {
            e.row = row + 1;
            throw;
        }
    }

private:
    const SignedContext* ctx_;
    std::array<SignedQuadruple, 2> seeds_;
    std::array<UnboundedQuadruple, 2> images_;
};

inline MockElement pr_rank_reduce(const MockGlobalModule& G, int lambda_sign, int mu_sign) {
    if (std::abs(lambda_sign) != 1 || std::abs(mu_sign) != 1) throw InvalidArgument("lambda, mu must be +-alpha");
    int j = lambda_sign > 0 ? (mu_sign > 0 ? 0 : 2) : (mu_sign > 0 ? 3 : 1);
    return G.pr(j);
}

// Col^club applied to the local image of BF^spade.
inline IwasawaElement doubly_signed_pair(const MockGlobalModule& G, Sign club, Sign spade) {
    if (club == spade) throw InvalidArgument("doubly signed pairing needs two different signs");
    const SignedContext& ctx = G.context();
    return coleman(G.local_image(G.bf(spade)), club, ctx);
}

}  // namespace iwa
