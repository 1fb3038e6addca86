#include <gtest/gtest.h>

#include <random>

#include "iwa/series.hpp"

using namespace iwa;

namespace {

std::vector<mpz_class> naive(const std::vector<mpz_class>& x, const std::vector<mpz_class>& y, size_t n,
                             const mpz_class& m) {
    std::vector<mpz_class> r(n);
    for (size_t i = 0; i < x.size(); ++i)
        for (size_t j = 0; j < y.size(); ++j)
            if (i + j < n) r[i + j] += x[i] * y[j];
    for (auto& c : r) c = mod(c, m);
    return r;
}

std::vector<mpz_class> random_vec(gmp_randclass& g, size_t n, const mpz_class& m) {
    std::vector<mpz_class> v(n);
    for (auto& c : v) c = g.get_z_range(m);
    return v;
}

}  // namespace

TEST(Series, KroneckerMatchesSchoolbook) {
    gmp_randclass g(gmp_randinit_default);
    g.seed(42);
    for (int trial = 0; trial < 60; ++trial) {
        size_t lx = 1 + trial * 3 % 97, ly = 1 + trial * 7 % 131, n = 1 + trial * 11 % 150;
        mpz_class m = pow_ui(5, 1 + trial % 70);
        auto x = random_vec(g, lx, m), y = random_vec(g, ly, m);
        EXPECT_EQ(mul_trunc(x, y, n, m), naive(x, y, n, m)) << "trial " << trial;
    }
}

TEST(Series, KroneckerHandlesZerosAndWideSlots) {
    mpz_class m = pow_ui(7, 200);
    std::vector<mpz_class> x(40, m - 1), y(40, m - 1);
    x[5] = 0;
    y[39] = 0;
    EXPECT_EQ(mul_trunc(x, y, 80, m), naive(x, y, 80, m));
}

TEST(Series, ScalarRoundTrip) {
    Form f = make_form(5, 1, RootOfUnity::one(5));
    std::vector<QuadExtScalar> c;
    for (int i = 0; i < 6; ++i)
        c.emplace_back(PadicScalar::from_rational(5, mpq_class(i + 1, 5), 10), PadicScalar::from_long(5, 3 * i - 4, 12),
                       f);
    Series s = Series::from_scalars(5, c, 6, f);
    EXPECT_EQ(s.shift(), -1);
    EXPECT_EQ(s.abs_prec(), 9);  // rel 10 at valuation -1
    for (int i = 0; i < 6; ++i) EXPECT_EQ(s.coeff(i), c[i]);
}

TEST(Series, MultiplicationMatchesScalarConvolution) {
    Form f = make_form(5, 2, RootOfUnity::one(5));
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<long> d(-3000, 3000);
    int n = 20;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<QuadExtScalar> a, b;
        for (int i = 0; i < n; ++i) {
            a.emplace_back(PadicScalar::from_long(5, d(rng), 15), PadicScalar::from_long(5, d(rng), 15), f);
            b.emplace_back(PadicScalar::from_long(5, d(rng), 15), PadicScalar::from_long(5, d(rng), 15), f);
        }
        Series sa = Series::from_scalars(5, a, n, f), sb = Series::from_scalars(5, b, n, f);
        Series prod = sa * sb;
        for (int k = 0; k < n; ++k) {
            QuadExtScalar acc(PadicScalar::exact_zero(5), f);
            for (int i = 0; i <= k; ++i) acc += a[i] * b[k - i];
            EXPECT_EQ(prod.coeff(k), acc);
        }
    }
}

TEST(Series, PrecisionRules) {
    Series a = Series::from_ints(5, {1, 2, 3}, 0, 10);
    Series b = Series::from_ints(5, {5, 0, 1}, -2, 6);
    EXPECT_EQ((a + b).abs_prec(), 4);
    Series c = a * b;
    EXPECT_EQ(c.shift(), -2);
    EXPECT_EQ(c.cap(), 6);
    EXPECT_TRUE((a - a).is_zero());
    EXPECT_FALSE((a - a).is_exact_zero());
    EXPECT_TRUE((a * Series::exact_zero(5, 3)).is_exact_zero());
}

TEST(Series, NormalizationPullsOutP) {
    Series s = Series::from_ints(5, {25, 50, 125}, 0, 10);
    EXPECT_EQ(s.shift(), 2);
    EXPECT_EQ(s.cap(), 8);
    EXPECT_EQ(s.abs_prec(), 10);
    Series z = Series::from_ints(5, {625, 0}, 0, 3);
    EXPECT_TRUE(z.is_zero());
    EXPECT_EQ(z.abs_prec(), 3);
}

TEST(Series, FromRationals) {
    std::vector<mpq_class> q = {mpq_class(1, 5), mpq_class(2), mpq_class(-1, 25)};
    Series s = series_from_rationals(5, q, 3, 8);
    EXPECT_EQ(s.shift(), -2);
    EXPECT_EQ(s.abs_prec(), 8);
    for (int i = 0; i < 3; ++i) EXPECT_EQ(s.coeff(i).a(), PadicScalar::from_rational(5, q[i], 20));
}
