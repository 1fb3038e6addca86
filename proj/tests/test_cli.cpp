#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "iwa/io/json.hpp"
#include "support.hpp"

using namespace iwa;
using iwa::io::json;

namespace {

struct CliRun {
    int code = -1;
    std::string out;
};

CliRun run(const std::string& args, const std::string& env = "") {
    std::string cmd = env + (env.empty() ? "" : " ") + std::string(IWA_CLI_PATH) + " " + args + " 2>/dev/null";
    CliRun r;
    FILE* f = popen(cmd.c_str(), "r");
    if (!f) return r;
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof buf, f)) > 0) r.out.append(buf, n);
    int status = pclose(f);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string temp_file(const std::string& name, const std::string& content) {
    auto path = std::filesystem::temp_directory_path() / ("iwa_cli_" + std::to_string(::getpid()) + "_" + name);
    std::ofstream(path) << content;
    return path.string();
}

json seed_doc() {
    json s = io::document("eulersys_seed");
    s["p"] = 5;
    s["p_prec"] = 20;
    s["k"] = 1;
    s["j"] = 3;
    s["primes"] = {11, 31};
    s["euler"] = json::array({{{"ell", 11}, {"a", 2}, {"eps", 0}, {"chi", 2}}, {{"ell", 31}, {"a", 1}, {"eps", 0}, {"chi", 2}}});
    s["frobenius"] = json::array({{{"ell", 11}, {"exps", {0, 3}}}, {{"ell", 31}, {"exps", {2, 0}}}});
    s["rng_seed"] = 4;
    return s;
}

}  // namespace

TEST(Cli, IdentityLogProduct) {
    CliRun t = run("identity --p 5 --check log-product --format table");
    EXPECT_EQ(t.code, 0);
    EXPECT_NE(t.out.find("deviation: exact-zero"), std::string::npos) << t.out;
    CliRun j = run("identity --p 5 --check log-product");
    EXPECT_EQ(j.code, 0);
    json d = json::parse(j.out);
    EXPECT_EQ(d.at("schema"), "iwa/1");
    EXPECT_EQ(d.at("deviation"), "exact-zero");
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run("pollack --r 0").code, 1);
    EXPECT_EQ(run("pollack --frobnicate 2").code, 1);
    EXPECT_EQ(run("teleport").code, 1);
    EXPECT_EQ(run("").code, 1);
    EXPECT_EQ(run("pollack --p 4").code, 1);
    EXPECT_EQ(run("pollack --pprec 100000").code, 1);
    EXPECT_EQ(run("euler --chi-p z3").code, 1);
    EXPECT_EQ(run("--help").code, 0);
}

TEST(Cli, PollackRoundTripAndDeterminism) {
    CliRun a = run("pollack --p 5 --kind minus --r 2 --shift 1 --pprec 15 --xprec 20");
    CliRun b = run("pollack --p 5 --kind minus --r 2 --shift 1 --pprec 15 --xprec 20", "IWA_THREADS=1");
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    json doc = json::parse(a.out);
    Distribution d = io::distribution_from_json(io::open_document(doc, "distribution"));
    EXPECT_EQ(d.order, 1);
    json again = io::document("distribution");
    again.update(io::to_json(d));
    EXPECT_EQ(again.dump(2) + "\n", a.out);
    Distribution want = pollack_log({LogKind::minus, 2, 1}, Precision{5, 15, 20});
    EXPECT_EQ(d.body, want.body);
}

TEST(Cli, FactorSuccessAndFailure) {
    const Precision P{5, 20, 24};
    gmp_randclass g(gmp_randinit_default);
    g.seed(21);
    SignedContext ctx(P, 1, RootOfUnity::one(5), convention_theorem_a());
    SignedQuadruple s = iwa::testing::random_quadruple(P, g);
    std::string good = temp_file("good.json", io::to_json(synthesize(s, ctx)).dump());
    CliRun r = run("factor --k 1 --input " + good + " --convention theoremA");
    ASSERT_EQ(r.code, 0) << r.out;
    SignedQuadruple back = io::signed_from_json(json::parse(r.out));
    EXPECT_EQ(back.plus, s.plus);
    EXPECT_EQ(back.minus, s.minus);
    EXPECT_EQ(back.dot, s.dot);
    EXPECT_EQ(back.circ, s.circ);

    // rows built with log^{+-}_{k+1} only
    const Precision W{5, 20, 64};
    SignedContext wctx(W, 1, RootOfUnity::one(5), convention_theorem_a());
    std::array<Distribution, 4> y;
    for (int i = 0; i < 4; ++i) {
        Sign sg = wctx.convention().rows[i];
        LogSpec spec = wctx.log_spec(sg);
        if (sg == Sign::plus || sg == Sign::minus) spec.r = 2;
        y[i] = pollack_log(spec, W) * Distribution(iwa::testing::random_bounded(W, g));
    }
    UnboundedQuadruple q;
    const EMatrix& Mi = wctx.M_inv();
    for (int i = 0; i < 4; ++i) {
        Distribution acc(IwasawaElement::zero(W, wctx.form()));
        for (int j = 0; j < 4; ++j)
            if (!Mi(i, j).is_exact_zero()) acc = acc + Distribution(y[j].body.with_form(wctx.form()).scaled(Mi(i, j)));
        q.L[i] = acc;
    }
    std::string bad = temp_file("bad.json", io::to_json(q).dump());
    CliRun f = run("factor --k 1 --input " + bad + " --convention theoremA");
    EXPECT_EQ(f.code, 2);
    json rep = json::parse(f.out);
    EXPECT_EQ(rep.at("kind"), "divisibility_failure");
    EXPECT_EQ(rep.at("row"), 1);
    EXPECT_EQ(rep.at("rows"), (json{1, 2}));

    std::string junk = temp_file("junk.json", "{\"schema\": \"iwa/1\", ");
    EXPECT_EQ(run("factor --k 1 --input " + junk).code, 1);
    json extra = io::to_json(synthesize(s, ctx));
    extra["note"] = "hello";
    std::string with_extra = temp_file("extra.json", extra.dump());
    EXPECT_EQ(run("factor --k 1 --input " + with_extra).code, 1);
    for (const auto& path : {good, bad, junk, with_extra}) std::filesystem::remove(path);
}

TEST(Cli, EulerAndKl) {
    CliRun e = run("euler --p 5 --k 2 --eps 1 --chi-p t2 --j 3");
    ASSERT_EQ(e.code, 0);
    json ej = json::parse(e.out);
    EXPECT_EQ(ej.at("kind"), "E");
    EXPECT_EQ(ej.at("factors").size(), 3u);
    CliRun g = run("euler --p 5 --k 1 --eps 1 --chi-p 1");
    json gj = json::parse(g.out);
    EXPECT_EQ(gj.at("zeros"), (json{2, 3}));

    CliRun k = run("kl --p 5 --eta w2 --branch 2 --pprec 20 --xprec 32");
    ASSERT_EQ(k.code, 0);
    json kj = json::parse(k.out);
    EXPECT_EQ(kj.at("values").size(), 5u);
    for (const auto& v : kj.at("values")) EXPECT_TRUE(v.at("agree").get<bool>());
    EXPECT_EQ(run("kl --p 5 --eta 1 --branch 0").code, 1);
}

TEST(Cli, EulerSystems) {
    CliRun c = run("eulersys check --ell 11 --a 2 --eps 1 --chi 1 --k 1 --j 3");
    ASSERT_EQ(c.code, 0);
    EXPECT_TRUE(json::parse(c.out).at("holds").get<bool>());
    CliRun h = run("eulersys check --ell 2 --a 1 --eps 1 --chi 1 --k 0 --j 0");
    EXPECT_EQ(json::parse(h.out).at("Q"), (json{"(1)", "(-1)", "(-4)", "(-4)", "(16)"}));

    std::string seed = temp_file("seed.json", seed_doc().dump());
    CliRun s = run("eulersys synth --primes 11,31 --p 5 --seed-file " + seed);
    ASSERT_EQ(s.code, 0) << s.out;
    json sj = json::parse(s.out);
    EXPECT_TRUE(sj.at("all_hold").get<bool>());
    EXPECT_EQ(sj.at("checks").size(), 4u);
    CliRun f = run("eulersys synth --p 5 --seed-file " + seed + " --inject-fault 11");
    json fj = json::parse(f.out);
    EXPECT_FALSE(fj.at("all_hold").get<bool>());
    for (const auto& chk : fj.at("checks")) {
        bool touches = chk.at("r") == 11 || chk.at("r").get<long>() * chk.at("ell").get<long>() == 11;
        EXPECT_EQ(chk.at("holds").get<bool>(), !touches) << chk.dump();
    }
    EXPECT_EQ(run("eulersys synth --primes 11,41 --p 5 --seed-file " + seed).code, 1);
    std::filesystem::remove(seed);
}

TEST(Cli, GrowthAndDieudonne) {
    CliRun g = run("growth --p 5 --kind full --r 1 --depth 3");
    ASSERT_EQ(g.code, 0);
    json gj = json::parse(g.out);
    EXPECT_EQ(gj.at("claimed_order"), "1");
    CliRun d = run("dieudonne --p 5 --k 2 --eps -1");
    json dj = json::parse(d.out);
    EXPECT_TRUE(dj.at("phi_squared_is_alpha_squared").get<bool>());
    EXPECT_EQ(dj.at("sym2_filtration"), (json{{0, 3}, {1, 2}, {4, 1}, {7, 0}}));
}
