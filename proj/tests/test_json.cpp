#include <gtest/gtest.h>

#include "iwa/io/json.hpp"
#include "support.hpp"

using namespace iwa;
using iwa::io::json;
using iwa::testing::random_bounded;
using iwa::testing::random_quadruple;

namespace {

const Precision P{5, 20, 24};

void expect_same_series(const Series& x, const Series& y) {
    EXPECT_EQ(x.is_exact_zero(), y.is_exact_zero());
    EXPECT_EQ(x.x_exact(), y.x_exact());
    EXPECT_EQ(x.shift(), y.shift());
    EXPECT_EQ(x.cap(), y.cap());
    EXPECT_EQ(x.A(), y.A());
    EXPECT_EQ(x.B(), y.B());
    EXPECT_TRUE(same_form(x.form(), y.form()));
}

void expect_same(const IwasawaElement& x, const IwasawaElement& y) {
    ASSERT_EQ(x.precision(), y.precision());
    for (int i = 0; i < x.tame_count(); ++i) expect_same_series(x.component(i), y.component(i));
}

}  // namespace

TEST(Json, ElementRoundTrip) {
    gmp_randclass g(gmp_randinit_default);
    g.seed(1);
    for (int t = 0; t < 5; ++t) {
        IwasawaElement x = random_bounded(P, g);
        x = x.with_component(2, Series::exact_zero(5, P.N)).with_component(3, Series::zero_to(5, P.N, 7));
        json j = io::to_json(x);
        IwasawaElement y = io::element_from_json(json::parse(j.dump()));
        expect_same(x, y);
        EXPECT_EQ(io::to_json(y).dump(), j.dump());
    }
    json z = io::to_json(IwasawaElement::zero(P));
    EXPECT_TRUE(z.at("components").empty());
    expect_same(io::element_from_json(z), IwasawaElement::zero(P));
}

TEST(Json, FormValuedRoundTrip) {
    gmp_randclass g(gmp_randinit_default);
    g.seed(2);
    SignedContext ctx(P, 1, RootOfUnity::minus_one(5), convention_theorem_a());
    UnboundedQuadruple q = synthesize(random_quadruple(P, g), ctx);
    json j = io::to_json(q);
    EXPECT_EQ(j.at("schema"), "iwa/1");
    bool saw_b = j.dump().find("b_part") != std::string::npos;
    EXPECT_TRUE(saw_b);
    UnboundedQuadruple r = io::unbounded_from_json(json::parse(j.dump()));
    for (int i = 0; i < 4; ++i) {
        expect_same(q.L[i].body, r.L[i].body);
        EXPECT_EQ(q.L[i].order, r.L[i].order);
    }
    EXPECT_EQ(io::to_json(r).dump(), j.dump());
}

TEST(Json, DistributionKeepsOrderAndMeta) {
    Distribution d = pollack_log({LogKind::plus, 3, 1}, P);
    json j = io::to_json(d);
    EXPECT_EQ(j.at("order"), "3/2");
    Distribution e = io::distribution_from_json(json::parse(j.dump()));
    EXPECT_EQ(e.order, mpq_class(3, 2));
    EXPECT_EQ(e.meta, d.meta);
    expect_same(d.body, e.body);
    EXPECT_EQ(io::to_json(e).dump(), j.dump());
}

TEST(Json, ScalarEncoding) {
    std::vector<mpz_class> a{50, 3, 0};
    Series s = Series::from_ints(5, a, 1, 4);
    json c = io::series_component(s, 0);
    EXPECT_EQ(c.at("coeffs")[0], (json{{"val", "6/2"}, {"unit", "2"}}));
    EXPECT_EQ(c.at("coeffs")[1], (json{{"val", "2/2"}, {"unit", "3"}}));
    EXPECT_EQ(c.at("coeffs")[2], (json{{"val", "inf"}, {"unit", "0"}}));
    EXPECT_EQ(c.at("abs_prec"), 5);
    EXPECT_EQ(io::padic_json(PadicScalar::from_rational(5, mpq_class(1, 3), 10)).at("val"), "0/2");
    EXPECT_EQ(io::padic_json(PadicScalar::exact_zero(5)).at("abs_prec"), "inf");
}

TEST(Json, RejectsUnknownAndMalformed) {
    json good = io::to_json(random_bounded(P, *std::make_unique<gmp_randclass>(gmp_randinit_default)));
    auto expect_bad = [](json j) { EXPECT_THROW(io::element_from_json(j), io::JsonError) << j.dump().substr(0, 120); };
    json j = good;
    j["extra"] = 1;
    expect_bad(j);
    j = good;
    j["components"][0]["colour"] = "red";
    expect_bad(j);
    j = good;
    j["components"][0]["coeffs"][0]["extra"] = 0;
    expect_bad(j);
    j = good;
    j["components"][0]["coeffs"][0]["val"] = "1/3";
    expect_bad(j);
    j = good;
    j["components"][0]["coeffs"][0]["val"] = "1/2";
    expect_bad(j);
    j = good;
    j["components"][0]["coeffs"][0] = {{"val", "0/2"}, {"unit", "10"}};
    expect_bad(j);
    j = good;
    j["components"][1]["tame"] = 0;
    expect_bad(j);
    j = good;
    j["u"] = "11";
    expect_bad(j);
    j = good;
    j.erase("x_prec");
    expect_bad(j);
    j = good;
    j["components"][0]["coeffs"][0]["b_part"] = {{"val", "0/2"}, {"unit", "1"}};
    expect_bad(j);

    json q = io::document("signed_quadruple");
    EXPECT_THROW(io::unbounded_from_json(q), io::JsonError);
    q["schema"] = "iwa/2";
    q["kind"] = "unbounded_quadruple";
    EXPECT_THROW(io::unbounded_from_json(q), io::JsonError);
}

TEST(Json, SignedQuadrupleRoundTrip) {
    gmp_randclass g(gmp_randinit_default);
    g.seed(3);
    SignedQuadruple s = random_quadruple(P, g);
    json j = io::to_json(s);
    SignedQuadruple t = io::signed_from_json(json::parse(j.dump()));
    expect_same(s.plus, t.plus);
    expect_same(s.circ, t.circ);
    EXPECT_EQ(io::to_json(t).dump(), j.dump());
}

TEST(Json, SeedFile) {
    json s = io::document("eulersys_seed");
    s["p"] = 5;
    s["p_prec"] = 12;
    s["k"] = 1;
    s["j"] = 3;
    s["primes"] = {31, 11};
    s["euler"] = json::array({{{"ell", 11}, {"a", 2}, {"eps", 0}, {"chi", 2}}, {{"ell", 31}, {"a", 1}, {"eps", 0}, {"chi", 2}}});
    s["rng_seed"] = 9;
    io::SeedSpec spec = io::seed_from_json(s);
    EXPECT_EQ(spec.R.primes, (std::vector<long>{11, 31}));
    EXPECT_EQ(spec.seed, random_group_ring_element(spec.R, 12, 9));
    SyntheticSystem S = build_synthetic_system(spec.R, spec.seed, spec.k, spec.j, spec.euler, spec.frobenius, spec.gamma);
    json rep = io::to_json(validate_system(S));
    EXPECT_TRUE(rep.at("all_hold").get<bool>());
    EXPECT_EQ(rep.at("checks").size(), 4u);
    EXPECT_EQ(rep.at("checks")[0].at("deviation"), "exact-zero");

    json both = s;
    both["coeffs"] = json::array();
    EXPECT_THROW(io::seed_from_json(both), io::JsonError);
    json coeffs = s;
    coeffs.erase("rng_seed");
    coeffs["coeffs"] = std::vector<std::string>(25, "1");
    EXPECT_EQ(io::seed_from_json(coeffs).seed.augmentation(), 25);
    json odd = s;
    odd["flavour"] = 1;
    EXPECT_THROW(io::seed_from_json(odd), io::JsonError);
}

TEST(Json, DivisibilityReport) {
    DivisibilityError e("row 1 not divisible", 0, 3);
    e.row = 1;
    e.rows = {1, 2};
    json j = io::to_json(e);
    EXPECT_EQ(j.at("kind"), "divisibility_failure");
    EXPECT_EQ(j.at("row"), 1);
    EXPECT_EQ(j.at("rows"), (json{1, 2}));
    EXPECT_EQ(j.at("index"), 3);
}
