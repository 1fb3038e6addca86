#include <gtest/gtest.h>

#include <random>

#include "eulersys_oracle.hpp"

using namespace iwa;
using namespace iwa::testing;

namespace {

std::vector<mpq_class> rationals(const EulerPolynomial& P) {
    std::vector<mpq_class> r;
    for (const auto& c : P.c) r.push_back(c.rational());
    return r;
}

}  // namespace

TEST(TameLevel, Admissibility) {
    TameLevel t = TameLevel::make(5, {31, 11, 101});
    EXPECT_EQ(t.primes, (std::vector<long>{11, 31, 101}));
    EXPECT_EQ(t.orders, (std::vector<long>{5, 5, 25}));
    EXPECT_EQ(t.size(), 625);
    EXPECT_EQ(t.r(), 11 * 31 * 101);
    EXPECT_THROW(TameLevel::make(5, {13}), InvalidArgument);
    EXPECT_THROW(TameLevel::make(5, {21}), InvalidArgument);
    EXPECT_THROW(TameLevel::make(5, {11}, 22), InvalidArgument);
    EXPECT_THROW(TameLevel::make(5, {11, 11}), InvalidArgument);
    EXPECT_EQ(TameLevel::make(3, {7}).orders, (std::vector<long>{3}));
    EXPECT_EQ(TameLevel::make(3, {19}).orders, (std::vector<long>{9}));
}

TEST(GroupRing, ArithmeticAndCorestriction) {
    TameLevel t = TameLevel::make(5, {11, 31});
    int M = 10;
    auto d11 = GroupRingElement::delta(t, M, 11), d31 = GroupRingElement::delta(t, M, 31);
    auto one = GroupRingElement::one(t, M);
    GroupRingElement x = one;
    for (int i = 0; i < 5; ++i) x = x * d11;
    EXPECT_EQ(x, one);
    EXPECT_EQ(d11 * d31, GroupRingElement::group_element(t, M, {1, 1}));
    EXPECT_EQ((d11 * d31).corestrict(11), GroupRingElement::delta(t.without(11), M, 31));
    EXPECT_EQ(GroupRingElement::norm(t, M, 11).corestrict(11), GroupRingElement::scalar(t.without(11), M, 5));
    EXPECT_THROW(d11.corestrict(41), InvalidArgument);
    EXPECT_THROW(d11 + GroupRingElement::one(t.without(31), M), InvalidArgument);
    EXPECT_THROW(d11 * GroupRingElement::one(t, M + 1), InvalidArgument);

    // corestriction is a ring map and fixes augmentation
    for (unsigned long s = 1; s <= 5; ++s) {
        auto a = random_group_ring_element(t, M, s), b = random_group_ring_element(t, M, 100 + s);
        EXPECT_EQ((a * b).corestrict(31), a.corestrict(31) * b.corestrict(31));
        EXPECT_EQ((a + b).corestrict(11), a.corestrict(11) + b.corestrict(11));
        EXPECT_EQ(a.corestrict(11).augmentation(), a.augmentation());
        EXPECT_EQ(a.corestrict(11).corestrict(31), a.corestrict(31).corestrict(11));
        EXPECT_EQ(a * b, b * a);
    }
}

TEST(GroupRing, InvertExample) {
    TameLevel t = TameLevel::make(3, {7});
    auto x = GroupRingElement::one(t, 2) - GroupRingElement::delta(t, 2, 7).scaled(2);
    auto y = invert_unit_mod_radical(x);
    EXPECT_EQ(y.coeffs(), (std::vector<mpz_class>{5, 1, 2}));

    // every solution of x y = 1 over Z/9
    std::vector<std::vector<mpz_class>> sols;
    for (int a = 0; a < 9; ++a)
        for (int b = 0; b < 9; ++b)
            for (int c = 0; c < 9; ++c) {
                // (1 - 2 d)(a + b d + c d^2) with d^3 = 1
                if (pmod(a - 2 * c, 9) == 1 && pmod(b - 2 * a, 9) == 0 && pmod(c - 2 * b, 9) == 0)
                    sols.push_back({a, b, c});
            }
    ASSERT_EQ(sols.size(), 1u);
    EXPECT_EQ(sols[0], y.coeffs());

    auto bad = GroupRingElement::one(t, 2) - GroupRingElement::delta(t, 2, 7);
    EXPECT_THROW(invert_unit_mod_radical(bad), InvalidArgument);
}

TEST(GroupRing, InvertRandomUnits) {
    for (auto [p, primes] : std::vector<std::pair<int, std::vector<long>>>{
             {5, {11}}, {5, {101}}, {5, {11, 31}}, {3, {7, 19}}, {5, {11, 31, 41}}, {7, {29, 43}}}) {
        TameLevel t = TameLevel::make(p, primes);
        for (unsigned long s = 1; s <= 3; ++s) {
            auto x = random_group_ring_element(t, 20, s * 7 + primes.size());
            if (mod(x.augmentation(), mpz_class(p)) == 0) x = x + GroupRingElement::one(t, 20);
            auto y = invert_unit_mod_radical(x);
            EXPECT_EQ(x * y, GroupRingElement::one(t, 20)) << "p=" << p;
        }
    }
}

TEST(EulerPoly, Sym2HandCase) {
    EulerPolynomial P = sym2_euler_poly(2, 1, RootOfUnity::one(5), 0, CycNumber::one(5));
    EXPECT_EQ(rationals(P), (std::vector<mpq_class>{1, 1, -2, -8}));
    RankinCheck r = rankin_factorization_check(2, 1, RootOfUnity::one(5), RootOfUnity::one(5), 0, 0);
    EXPECT_TRUE(r.holds);
    EXPECT_EQ(rationals(r.Q), (std::vector<mpq_class>{1, -1, -4, -4, 16}));
    EXPECT_THROW(sym2_euler_poly(5, 1, RootOfUnity::one(5), 0, CycNumber::one(5)), InvalidArgument);
}

TEST(EulerPoly, RandomDrawsAgainstRoots) {
    std::mt19937 rng(2024);
    std::vector<long> small_primes;
    for (long l = 2; l <= 97; ++l)
        if (is_prime(l)) small_primes.push_back(l);
    int draws = 0;
    while (draws < 100) {
        int p = rng() % 2 ? 5 : 7;
        long ell = small_primes[rng() % small_primes.size()];
        if (ell == p) continue;
        long k = rng() % 4, j = static_cast<long>(rng() % (2 * k + 4)) - 1;
        long bound = static_cast<long>(std::floor(2 * std::sqrt(std::pow(double(ell), double(k + 1)))));
        long a = static_cast<long>(rng() % (2 * bound + 1)) - bound;
        RootOfUnity e{p, static_cast<int>(rng() % (p - 1))}, chi{p, static_cast<int>(rng() % (p - 1))};
        RankinCheck r = rankin_factorization_check(ell, a, e, chi, k, j);
        EXPECT_TRUE(r.holds);
        RootOracle o = root_oracle(ell, a, e, k, twist_scalar(p, ell, j, chi));
        std::string what = "l=" + std::to_string(ell) + " a=" + std::to_string(a) + " k=" + std::to_string(k);
        EXPECT_TRUE(matches(r.P, o.sym2)) << "P " << what;
        EXPECT_TRUE(matches(r.Q, o.rankin)) << "Q " << what;
        ++draws;
    }
}

TEST(Synthetic, SinglePrimeByHand) {
    int p = 5, M = 20;
    TameLevel R = TameLevel::make(p, {11});
    auto seed = random_group_ring_element(R, M, 5);
    EulerData d{2, RootOfUnity::one(p), RootOfUnity::minus_one(p)};
    SyntheticSystem S = build_synthetic_system(R, seed, 1, 3, {{11, d}}, {});
    // P(X) = 1 - c e1 X + c^2 e2 X^2 - c^3 e3 X^3 at X = 1, c = -11^-3, e1 = 4 - 121, e2 = 121 e1, e3 = 121^3
    mpq_class c(-1, 1331), e1 = 4 - 121, e2 = 121 * e1, e3 = 121 * 121 * 121;
    mpq_class P = 1 - c * e1 + c * c * e2 - c * c * c * e3;
    mpz_class m = pow_ui(p, M);
    mpz_class want = mod(seed.augmentation() * P.get_den() * inv_mod(P.get_num(), m), m);
    EXPECT_EQ(S.classes.at(0).coeffs(), (std::vector<mpz_class>{want}));
    SystemReport rep = validate_system(S);
    ASSERT_EQ(rep.checks.size(), 1u);
    EXPECT_TRUE(rep.all_hold);
    EXPECT_EQ(rep.checks[0].r, 1);
    EXPECT_EQ(rep.checks[0].ell, 11);
}

TEST(Synthetic, ValidatesAndDetectsFaults) {
    int p = 5, M = 20;
    std::mt19937 rng(7);
    int built = 0;
    for (const std::vector<long>& primes :
         std::vector<std::vector<long>>{{11, 31}, {11, 101}, {11, 31, 41}, {31, 61, 71}}) {
        TameLevel R = TameLevel::make(p, primes);
        std::map<long, EulerData> data;
        std::map<long, std::vector<long>> frob;
        for (size_t i = 0; i < primes.size(); ++i) {
            // mod p, P_l(l^-j) = (1 + eps)(1 + a^2 - 2 eps + eps^2) at chi(l) = -1; eps = 1 gives 2 a^2
            static const long as[] = {1, 2, -1, -2, 6, -7};
            data[R.primes[i]] = {as[rng() % 6], RootOfUnity::one(p), RootOfUnity::minus_one(p)};
            std::vector<long> f(primes.size());
            for (size_t t = 0; t < f.size(); ++t) f[t] = t == i ? 0 : static_cast<long>(rng() % R.orders[t]);
            frob[R.primes[i]] = f;
        }
        auto seed = random_group_ring_element(R, M, primes.size() * 13);
        SyntheticSystem S = build_synthetic_system(R, seed, 1, 3, data, frob);
        ++built;
        size_t pairs = 0;
        for (const auto& [mask, c] : S.classes) pairs += R.primes.size() - __builtin_popcount(mask);
        SystemReport rep = validate_system(S);
        EXPECT_EQ(rep.checks.size(), pairs);
        EXPECT_TRUE(rep.all_hold);

        for (const auto& [mask, c] : S.classes) {
            SyntheticSystem B = S;
            GroupRingElement& x = B.classes.at(mask);
            long at = static_cast<long>(rng() % x.level().size());
            x.set_coeff(at, x.coeff(at) + pow_ui(p, M - 1));
            SystemReport bad = validate_system(B);
            EXPECT_FALSE(bad.all_hold);
            long r = S.level_of(mask).r();
            ASSERT_FALSE(bad.failures().empty());
            for (const auto& f : bad.failures()) {
                EXPECT_TRUE(f.r == r || f.r * f.ell == r) << "r=" << f.r << " l=" << f.ell;
                EXPECT_EQ(f.deviation_valuation, M - 1);
            }
        }
    }
    EXPECT_EQ(built, 4);
}

TEST(Synthetic, RejectsNonUnitEulerFactor) {
    TameLevel R = TameLevel::make(5, {11});
    auto seed = random_group_ring_element(R, 10, 1);
    // eps = chi = 1: the alpha beta root gives 1 - l^(k+1-j) = 0 mod p
    EulerData d{2, RootOfUnity::one(5), RootOfUnity::one(5)};
    EXPECT_THROW(build_synthetic_system(R, seed, 1, 3, {{11, d}}, {}), InvalidArgument);
    EXPECT_THROW(build_synthetic_system(R, seed, 1, 3, {}, {}), InvalidArgument);
}
