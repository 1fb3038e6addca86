#include <gtest/gtest.h>

#include "support.hpp"

using namespace iwa;
using iwa::testing::random_bounded;
using iwa::testing::random_quadruple;
using iwa::testing::zero_quadruple;

namespace {

const Precision P{5, 20, 24};
// The mock pairings divide twice and multiply by alpha^{-2}-scaled coordinates,
// so they run with more p-adic room.
const Precision PM{5, 60, 16};

bool quad_equal(const SignedQuadruple& x, const SignedQuadruple& y) {
    for (Sign s : {Sign::plus, Sign::minus, Sign::dot, Sign::circ})
        if (!(x.get(s) == y.get(s))) return false;
    return true;
}

// Builds L = M^{-1} y from explicit row values.
UnboundedQuadruple from_rows(const std::array<Distribution, 4>& y, const SignedContext& ctx) {
    UnboundedQuadruple q;
    const EMatrix& Mi = ctx.M_inv();
    for (int i = 0; i < 4; ++i) {
        Distribution acc(IwasawaElement::zero(ctx.precision(), ctx.form()));
        for (int j = 0; j < 4; ++j)
            if (!Mi(i, j).is_exact_zero()) acc = acc + Distribution(y[j].body.with_form(ctx.form()).scaled(Mi(i, j)));
        q.L[i] = acc;
    }
    return q;
}

}  // namespace

TEST(Signed, RoundTrip) {
    gmp_randclass g(gmp_randinit_default);
    g.seed(11);
    for (auto conv : {convention_theorem_a(), convention_lemma_factorisation()})
        for (int k : {0, 1}) {
            SignedContext ctx(P, k, RootOfUnity::one(5), conv);
            for (int t = 0; t < 3; ++t) {
                SignedQuadruple s = random_quadruple(P, g);
                SignedResult r = factor_signed(synthesize(s, ctx), ctx);
                EXPECT_GE(r.p_prec, 1) << conv.name << " k=" << k;
                EXPECT_GE(r.x_prec, 1);
                EXPECT_TRUE(quad_equal(r.bf, s)) << conv.name << " k=" << k;
            }
        }
}

TEST(Signed, ZeroRoundTrip) {
    SignedContext ctx(P, 1, RootOfUnity::one(5), convention_theorem_a());
    UnboundedQuadruple q = synthesize(zero_quadruple(P), ctx);
    for (auto& d : q.L) EXPECT_TRUE(d.body.is_zero());
    SignedResult r = factor_signed(q, ctx);
    for (Sign s : {Sign::plus, Sign::minus, Sign::dot, Sign::circ}) EXPECT_TRUE(r.bf.get(s).is_zero());
}

TEST(Signed, DotOnlySeed) {
    gmp_randclass g(gmp_randinit_default);
    g.seed(12);
    for (auto conv : {convention_theorem_a(), convention_lemma_factorisation()}) {
        SignedContext ctx(P, 1, RootOfUnity::one(5), conv);
        SignedQuadruple s = zero_quadruple(P);
        s.dot = random_bounded(P, g);
        UnboundedQuadruple q = synthesize(s, ctx);
        QuadExtScalar four_alpha = e_int(ctx.form(), 4) * QuadExtScalar::alpha(ctx.form());
        IwasawaElement want =
            (ctx.log_of(Sign::dot).body.with_form(ctx.form()) * s.dot).scaled(EMatrix::one_of(ctx.form()) / four_alpha);
        EXPECT_EQ(q.L_aa().body, want);
        EXPECT_EQ(q.L_mm().body, -want);
        EXPECT_TRUE(q.L_am().body.is_zero());
        EXPECT_TRUE(q.L_ma().body.is_zero());
    }
}

TEST(Signed, SymmetricInputHasNoCircComponent) {
    gmp_randclass g(gmp_randinit_default);
    g.seed(13);
    SignedContext ctx(P, 0, RootOfUnity::one(5), convention_theorem_a());
    UnboundedQuadruple q = synthesize(random_quadruple(P, g, false), ctx);
    EXPECT_EQ(q.L_am().body, q.L_ma().body);
    EXPECT_TRUE(factor_signed(q, ctx).bf.circ.is_zero());
}

TEST(Signed, WeakerDivisibilityFailsOnRowsOneAndTwo) {
    // log^+_{k+1} / log^+_{2k+2} first leaves Z_p at X^{2 p^2 - 2 p}, so N = 64 at p = 5
    const Precision P{5, 20, 64};
    gmp_randclass g(gmp_randinit_default);
    g.seed(14);
    for (auto conv : {convention_theorem_a(), convention_lemma_factorisation()})
        for (int k : {0, 1}) {
            SignedContext ctx(P, k, RootOfUnity::one(5), conv);
            std::array<Distribution, 4> y;
            for (int i = 0; i < 4; ++i) {
                Sign s = conv.rows[i];
                LogSpec spec = ctx.log_spec(s);
                if (s == Sign::plus || s == Sign::minus) spec.r = k + 1;
                y[i] = pollack_log(spec, P) * Distribution(random_bounded(P, g));
            }
            try {
                factor_signed(from_rows(y, ctx), ctx);
                ADD_FAILURE() << "expected a divisibility failure";
            } catch (const DivisibilityError& e) {
                EXPECT_EQ(e.row, 1);
                EXPECT_EQ(e.rows, (std::vector<int>{1, 2})) << conv.name << " k=" << k;
            }
        }
}

TEST(Signed, RowSwapUnderDelta) {
    // delta = sign(lambda mu / alpha^2) is diag(1, 1, -1, -1) on (aa, mm, am, ma)
    Form f = make_form(5, 1, RootOfUnity::one(5));
    ChangeOfBasis c = change_of_basis(f);
    QuadExtScalar o = EMatrix::one_of(f), z = EMatrix::zero_of(f), a2 = QuadExtScalar::alpha(f) * QuadExtScalar::alpha(f);
    EMatrix D = EMatrix::from_rows({{o, z, z, z}, {z, o, z, z}, {z, z, -o, z}, {z, z, z, -o}}, f);
    EMatrix want = EMatrix::from_rows({{z, o / a2, z, z}, {a2, z, z, z}, {z, z, o, z}, {z, z, z, -o}}, f);
    EXPECT_EQ(c.M * D * c.M_inv, want);
}

TEST(Signed, ColemanExtract) {
    gmp_randclass g(gmp_randinit_default);
    g.seed(15);
    SignedContext ctx(P, 1, RootOfUnity::one(5), convention_lemma_factorisation());
    SignedQuadruple s = random_quadruple(P, g);
    LocalCoords local = to_local(synthesize(s, ctx), ctx);
    for (Sign sg : {Sign::plus, Sign::minus, Sign::dot}) EXPECT_EQ(coleman_extract(local, sg, ctx), s.get(sg));
    EXPECT_THROW(coleman_extract(local, Sign::circ, ctx), InvalidArgument);
    LocalCoords zero = to_local(synthesize(zero_quadruple(P), ctx), ctx);
    EXPECT_TRUE(coleman_extract(zero, Sign::plus, ctx).is_zero());
}

TEST(Signed, ProjectionProperties) {
    gmp_randclass g(gmp_randinit_default);
    g.seed(16);
    SignedContext ctx(PM, 0, RootOfUnity::one(5), convention_theorem_a());
    SignedQuadruple b1 = random_quadruple(PM, g), b2 = random_quadruple(PM, g);
    MockGlobalModule G(ctx, b1, b2), H(ctx, b2, b1), Z(ctx, zero_quadruple(PM), b2);
    for (int j = 0; j < 4; ++j) {
        // swapping Y1 and Y2 negates pr; the coefficients trade places
        EXPECT_EQ(G.pr(j).c1.body, -H.pr(j).c2.body);
        EXPECT_EQ(G.pr(j).c2.body, -H.pr(j).c1.body);
        EXPECT_TRUE(Z.pr(j).c2.body.is_zero());
        EXPECT_EQ(Z.pr(j).c1.body, -Z.image(1).L[j].body);
    }
    EXPECT_EQ(pr_rank_reduce(G, 1, -1).c1.body, G.pr(2).c1.body);
    EXPECT_EQ(pr_rank_reduce(G, -1, 1).c2.body, G.pr(3).c2.body);
    // M (pr_j) lands in the log-scaled lattice: BF^sign = -b^sign(Y2) Y1 + b^sign(Y1) Y2
    for (Sign s : {Sign::plus, Sign::minus, Sign::dot, Sign::circ}) {
        MockElement e = G.bf(s);
        EXPECT_EQ(e.c1.body, -b2.get(s)) << to_string(s);
        EXPECT_EQ(e.c2.body, b1.get(s)) << to_string(s);
    }
}

TEST(Signed, DoublySignedPairIsAntisymmetric) {
    gmp_randclass g(gmp_randinit_default);
    g.seed(17);
    SignedContext ctx(PM, 1, RootOfUnity::one(5), convention_theorem_a());
    for (int t = 0; t < 2; ++t) {
        SignedQuadruple b1 = random_quadruple(PM, g), b2 = random_quadruple(PM, g);
        MockGlobalModule G(ctx, b1, b2);
        for (auto [c, s] : {std::pair{Sign::plus, Sign::minus}, {Sign::plus, Sign::dot}, {Sign::minus, Sign::dot}}) {
            IwasawaElement x = doubly_signed_pair(G, c, s), y = doubly_signed_pair(G, s, c);
            EXPECT_TRUE((x + y).is_zero());
            EXPECT_GE((x + y).abs_prec(), 1);
            // by construction: Col^c(res BF^s) = -b^s(Y2) b^c(Y1) + b^s(Y1) b^c(Y2)
            EXPECT_EQ(x, b1.get(s) * b2.get(c) - b2.get(s) * b1.get(c));
        }
    }
    MockGlobalModule Z(ctx, random_quadruple(PM, g), zero_quadruple(PM));
    EXPECT_TRUE(doubly_signed_pair(Z, Sign::plus, Sign::dot).is_zero());
    EXPECT_THROW(doubly_signed_pair(Z, Sign::plus, Sign::plus), InvalidArgument);
}

TEST(Signed, ColemanCombinationIdentity) {
    gmp_randclass g(gmp_randinit_default);
    g.seed(18);
    for (int k : {0, 1}) {
        SignedContext ctx(PM, k, RootOfUnity::one(5), convention_lemma_factorisation());
        const Form& f = ctx.form();
        MockGlobalModule G(ctx, random_quadruple(PM, g), random_quadruple(PM, g));
        for (int j = 0; j < 4; ++j) {
            UnboundedQuadruple z = G.local_image(G.pr(j));
            QuadExtScalar a = QuadExtScalar::alpha(f), four = e_int(f, 4), one = EMatrix::one_of(f);
            auto term = [&](Sign s, const QuadExtScalar& c) {
                return (ctx.log_of(s).body.with_form(f) * coleman(z, s, ctx, std::nullopt)).scaled(c);
            };
            IwasawaElement rhs = term(Sign::minus, one / four) + term(Sign::plus, one / (four * a * a)) +
                                 term(Sign::dot, one / (four * a));
            EXPECT_EQ(z.L_aa().body, rhs) << "k=" << k << " j=" << j;
            EXPECT_GE((z.L_aa().body - rhs).abs_prec(), 1);
        }
    }
}
