#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "iwa/io/json.hpp"
#include "iwa/iwa.hpp"

using namespace iwa;
using iwa::io::json;

namespace {

constexpr int kMaxPPrec = 4000;
constexpr int kMaxXPrec = 20000;

Precision checked_precision(int p, int M, int N) {
    if (M > kMaxPPrec) throw InvalidArgument("--pprec exceeds the cap " + std::to_string(kMaxPPrec));
    if (N > kMaxXPrec) throw InvalidArgument("--xprec exceeds the cap " + std::to_string(kMaxXPrec));
    Precision pr{p, M, N};
    pr.validate();
    return pr;
}

// "1", "-1" or "t<e>" for zeta^e, zeta the Teichmueller lift of the least primitive root.
RootOfUnity parse_root(int p, const std::string& s) {
    if (s == "1") return RootOfUnity::one(p);
    if (s == "-1") return RootOfUnity::minus_one(p);
    if (s.size() > 1 && s[0] == 't') {
        try {
            size_t used = 0;
            int e = std::stoi(s.substr(1), &used);
            if (used + 1 == s.size()) return RootOfUnity{p, static_cast<int>(pmod(e, p - 1))};
        } catch (const std::logic_error&) {
        }
    }
    throw InvalidArgument("root of unity must be 1, -1 or t<e>, got '" + s + "'");
}

std::string deviation_of(const IwasawaElement& d) {
    if (d.is_zero()) return "exact-zero";
    return "valuation " + std::to_string(d.valuation_floor());
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw io::JsonError("malformed JSON in '" + path + "': " + e.what());
    }
}

void flatten(const json& j, const std::string& prefix, std::ostream& out) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it)
            flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    } else if (j.is_array()) {
        bool flat = true;
        for (const auto& x : j)
            if (x.is_structured()) flat = false;
        if (flat) {
            out << prefix << ":";
            for (size_t i = 0; i < j.size(); ++i)
                out << (i ? ", " : " ") << (j[i].is_string() ? j[i].get<std::string>() : j[i].dump());
            out << "\n";
        } else {
            for (size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "[" + std::to_string(i) + "]", out);
        }
    } else {
        out << prefix << ": " << (j.is_string() ? j.get<std::string>() : j.dump()) << "\n";
    }
}

void emit(const json& j, const std::string& format, const std::string& output) {
    std::ostringstream s;
    if (format == "table")
        flatten(j, "", s);
    else
        s << j.dump(2) << "\n";
    if (output.empty()) {
        std::cout << s.str();
    } else {
        std::ofstream f(output);
        if (!f) throw InvalidArgument("cannot write '" + output + "'");
        f << s.str();
    }
}

struct Options {
    int p = 5, pprec = 20, xprec = 32, r = 1, shift = 0, k = 1, depth = 4, branch = 0, values = 5;
    int id_pprec = 30, id_xprec = 64, growth_xprec = 0;
    long j = 0, ell = 0, a = 0;
    std::string kind = "plus", check = "log-product", input, convention = "theoremA", eps = "1", chi = "1", eta = "1",
                seed_file, primes, inject;
    bool grid = false, classes = false;
};

json run_pollack(const Options& o) {
    Precision pr = checked_precision(o.p, o.pprec, o.xprec);
    if (o.r < 1) throw InvalidArgument("--r must be a positive integer");
    if (o.shift < 0) throw InvalidArgument("--shift must be nonnegative");
    Distribution d = pollack_log({log_kind_from_string(o.kind), o.r, o.shift}, pr);
    json j = io::document("distribution");
    j.update(io::to_json(d));
    return j;
}

json run_identity(const Options& o) {
    Precision pr = checked_precision(o.p, o.id_pprec, o.id_xprec);
    json j = io::document("identity");
    j["check"] = o.check;
    j["p"] = o.p;
    if (o.check == "log-product") {
        LogIdentityReport rep = log_identity_check(o.p, o.r, pr);
        j["r"] = o.r;
        j["p_prec"] = rep.p_prec;
        j["x_prec"] = rep.x_prec;
        j["deviation"] = rep.deviation();
    } else if (o.check == "shifted-log") {
        // Tw_{-1} log_r = log_{r+1} / log_1
        LogKind kind = log_kind_from_string(o.kind);
        DivisionResult q = divide_exact(pollack_log({kind, o.r + 1, 0}, pr), pollack_log({kind, 1, 0}, pr));
        IwasawaElement want = pollack_log({kind, o.r, 1}, pr).body.truncated(q.x_prec).with_abs_prec(q.p_prec);
        j["kind"] = to_string(kind);
        j["r"] = o.r;
        j["p_prec"] = q.p_prec;
        j["x_prec"] = q.x_prec;
        j["deviation"] = deviation_of(q.quotient.body - want);
    } else if (o.check == "bridging") {
        // log^{+,(1)}_{k+1} (log^+_{2k+3} / log^+_{k+2}) = log^{+,(1)}_{2k+2}
        int k = o.k;
        DivisionResult q =
            divide_exact(pollack_log({LogKind::plus, 2 * k + 3, 0}, pr), pollack_log({LogKind::plus, k + 2, 0}, pr));
        Distribution lhs = pollack_log({LogKind::plus, k + 1, 1}, pr) * q.quotient;
        IwasawaElement rhs = pollack_log({LogKind::plus, 2 * k + 2, 1}, pr).body.truncated(lhs.body.x_prec());
        j["k"] = k;
        j["p_prec"] = lhs.body.abs_prec();
        j["x_prec"] = lhs.body.x_prec();
        j["deviation"] = deviation_of((lhs.body - rhs).with_abs_prec(lhs.body.abs_prec()));
    } else {
        throw InvalidArgument("--check must be log-product, shifted-log or bridging");
    }
    return j;
}

json run_growth(const Options& o) {
    int N = o.growth_xprec > 0 ? o.growth_xprec : static_cast<int>(ipow(o.p, o.depth));
    Precision pr = checked_precision(o.p, o.pprec, N);
    if (o.r < 1) throw InvalidArgument("--r must be a positive integer");
    Distribution d = pollack_log({log_kind_from_string(o.kind), o.r, o.shift}, pr);
    mpq_class est = growth_order(d, o.depth);
    json j = io::document("growth");
    j["kind"] = o.kind;
    j["r"] = o.r;
    j["depth"] = o.depth;
    j["x_prec"] = N;
    j["claimed_order"] = io::rational_str(d.order);
    j["estimate"] = io::rational_str(est);
    j["estimate_decimal"] = est.get_d();
    mpq_class gap = est - d.order;
    j["within_quarter"] = abs(gap) <= mpq_class(1, 4);
    return j;
}

json run_factor(const Options& o) {
    if (o.input.empty()) throw InvalidArgument("--input is required");
    UnboundedQuadruple q = io::unbounded_from_json(read_json_file(o.input));
    const Precision& pr = q.L[0].body.precision();
    checked_precision(pr.p, pr.M, pr.N);
    SignedContext ctx(pr, o.k, parse_root(pr.p, o.eps), convention_from_string(o.convention));
    SignedResult r = factor_signed(q, ctx);
    json j = io::to_json(r.bf);
    j["convention"] = o.convention;
    j["k"] = o.k;
    j["p_prec_attained"] = r.p_prec;
    j["x_prec_attained"] = r.x_prec;
    return j;
}

json run_dieudonne(const Options& o) {
    Precision pr = checked_precision(o.p, o.pprec, 4);
    RootOfUnity eps = parse_root(o.p, o.eps);
    PhiModule D = dcris_of_form(o.p, o.k, eps, pr);
    QuadExtScalar a = QuadExtScalar::alpha(D.form);
    PhiModule S = sym_square(D);
    json j = io::document("dieudonne");
    j["p"] = o.p;
    j["k"] = o.k;
    j["phi_squared_is_alpha_squared"] = D.phi * D.phi == EMatrix::identity(2, D.form).scaled(a * a);
    j["sym2_filtration"] = S.filtration_dims();
    try {
        SymSplit sp = split_sym_square(S);
        j["d1_d2_phi_stable"] = true;
        j["split_respects_filtration"] = sp.respects_filtration;
    } catch (const Error&) {
        j["d1_d2_phi_stable"] = false;
    }
    ChangeOfBasis c = change_of_basis(D.form);
    j["change_of_basis_inverse"] = c.inverse_verified;
    j["change_of_basis_relation"] = c.relation_holds;
    return j;
}

json factor_report_json(const EulerFactorReport& r) {
    json j;
    j["j"] = r.j;
    j["kind"] = r.kind;
    json fs = json::array();
    for (const auto& f : r.factors)
        fs.push_back({{"label", f.label}, {"zero", f.zero}, {"exponent", f.exponent}, {"value", io::padic_json(f.value)}});
    j["factors"] = fs;
    j["product"] = io::padic_json(r.product);
    j["product_zero"] = r.product_zero;
    j["archimedean"] = r.archimedean;
    return j;
}

json run_euler(const Options& o) {
    checked_precision(o.p, o.pprec, 1);
    Form f = make_form(o.p, o.k, parse_root(o.p, o.eps));
    RootOfUnity chi = parse_root(o.p, o.chi);
    json j = io::document("euler");
    j["p"] = o.p;
    j["k"] = o.k;
    if (o.grid || o.j == 0) {
        ExceptionalZeroReport rep = exceptional_zero_report(f, chi, 1, 2 * o.k + 2, o.pprec);
        json rows = json::array();
        for (const auto& row : rep.rows) {
            json x = factor_report_json(row.report);
            x["vanishing"] = row.vanishing;
            x["exceptional_case"] = row.exceptional_case;
            rows.push_back(x);
        }
        j["rows"] = rows;
        j["zeros"] = rep.zeros;
    } else {
        j.update(factor_report_json(o.j <= o.k + 1 ? euler_factor_E(f, chi, o.j, o.pprec)
                                                   : euler_factor_Eprime(f, chi, o.j, o.pprec)));
    }
    return j;
}

json run_kl(const Options& o) {
    Precision pr = checked_precision(o.p, o.pprec, o.xprec);
    DirichletCharacter eta = parse_character(o.p, o.eta);
    KLSeries s = kl_series(eta, o.branch, pr);
    json j = io::document("kl_series");
    j["eta"] = eta.label();
    j["branch"] = o.branch;
    j["c"] = s.c;
    j["taylor_terms"] = s.taylor_terms;
    j["series"] = io::to_json(s.series);
    DirichletCharacter theta = eta.prime_to_p_part() * DirichletCharacter::teichmuller_power(o.p, o.branch);
    json vals = json::array();
    for (long n = 1; n <= o.values; ++n) {
        PadicScalar v = evaluate_at_character(s.series, {o.branch, 0, n}).a();
        PadicScalar want = kl_value(theta, 1 - n, o.pprec);
        vals.push_back({{"s", 1 - n},
                        {"series", io::padic_json(v)},
                        {"bernoulli", io::padic_json(want)},
                        {"agree", (v - want).is_zero()}});
    }
    j["values"] = vals;
    return j;
}

json run_eulersys_check(const Options& o) {
    RankinCheck r = rankin_factorization_check(o.ell, o.a, parse_root(o.p, o.eps), parse_root(o.p, o.chi), o.k, o.j);
    json j = io::to_json(r);
    j["ell"] = o.ell;
    j["a"] = o.a;
    j["k"] = o.k;
    j["j"] = o.j;
    return j;
}

json run_eulersys_synth(const Options& o) {
    if (o.seed_file.empty()) throw InvalidArgument("--seed-file is required");
    io::SeedSpec s = io::seed_from_json(read_json_file(o.seed_file));
    if (s.R.p != o.p) throw InvalidArgument("--p differs from the seed file");
    if (!o.primes.empty()) {
        std::vector<long> want;
        std::stringstream ss(o.primes);
        for (std::string t; std::getline(ss, t, ',');) want.push_back(std::stol(t));
        std::sort(want.begin(), want.end());
        if (want != s.R.primes) throw InvalidArgument("--primes differs from the seed file");
    }
    checked_precision(s.R.p, s.M, 1);
    SyntheticSystem S = build_synthetic_system(s.R, s.seed, s.k, s.j, s.euler, s.frobenius, s.gamma);
    if (!o.inject.empty()) {
        // perturb the first coefficient of c_r by p^(M-1)
        long r = std::stol(o.inject);
        bool found = false;
        for (auto& [mask, c] : S.classes)
            if (S.level_of(mask).r() == r) {
                c.set_coeff(0, c.coeff(0) + pow_ui(s.R.p, s.M - 1));
                found = true;
            }
        if (!found) throw InvalidArgument("--inject-fault: r must divide the tame level");
    }
    json j = io::to_json(validate_system(S));
    j["primes"] = s.R.primes;
    j["orders"] = s.R.orders;
    j["p_prec"] = s.M;
    if (o.classes) {
        json cs = json::array();
        for (const auto& [mask, c] : S.classes) {
            json x = io::to_json(c);
            x["r"] = S.level_of(mask).r();
            cs.push_back(x);
        }
        j["classes"] = cs;
    }
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"iwa: p-adic Iwasawa-theoretic computations"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string format = "json", output;
    app.add_option("--format", format, "json or table")->check(CLI::IsMember({"json", "table"}));
    app.add_option("--output", output, "write the payload to a file");
    Options o;

    auto* pollack = app.add_subcommand("pollack", "Pollack logarithm log^{kind}_{p,r} with shift");
    pollack->add_option("--p", o.p);
    pollack->add_option("--kind", o.kind)->check(CLI::IsMember({"plus", "minus", "full"}));
    pollack->add_option("--r", o.r);
    pollack->add_option("--shift", o.shift);
    pollack->add_option("--pprec", o.pprec);
    pollack->add_option("--xprec", o.xprec);

    auto* identity = app.add_subcommand("identity", "identities between Pollack logarithms");
    identity->add_option("--p", o.p);
    identity->add_option("--check", o.check)->check(CLI::IsMember({"log-product", "shifted-log", "bridging"}));
    identity->add_option("--kind", o.kind)->check(CLI::IsMember({"plus", "minus", "full"}));
    identity->add_option("--r", o.r);
    identity->add_option("--k", o.k);
    identity->add_option("--pprec", o.id_pprec);
    identity->add_option("--xprec", o.id_xprec);

    auto* growth = app.add_subcommand("growth", "growth order estimate of a Pollack logarithm");
    growth->add_option("--p", o.p);
    growth->add_option("--kind", o.kind)->check(CLI::IsMember({"plus", "minus", "full"}));
    growth->add_option("--r", o.r);
    growth->add_option("--shift", o.shift);
    growth->add_option("--depth", o.depth)->check(CLI::Range(2, 6));
    growth->add_option("--pprec", o.pprec);
    growth->add_option("--xprec", o.growth_xprec, "default p^depth");

    auto* factor = app.add_subcommand("factor", "signed factorization of an unbounded quadruple");
    factor->add_option("--k", o.k);
    factor->add_option("--eps", o.eps);
    factor->add_option("--input", o.input)->required();
    factor->add_option("--convention", o.convention)->check(CLI::IsMember({"theoremA", "lemmaFactorisation"}));

    auto* dieu = app.add_subcommand("dieudonne", "checks on D_cris, its symmetric square and the change of basis");
    dieu->add_option("--p", o.p);
    dieu->add_option("--k", o.k);
    dieu->add_option("--eps", o.eps);

    auto* euler = app.add_subcommand("euler", "Euler factors E_p(j), E'_p(j)");
    euler->add_option("--p", o.p);
    euler->add_option("--k", o.k);
    euler->add_option("--eps", o.eps);
    euler->add_option("--chi-p", o.chi);
    euler->add_option("--j", o.j, "omit for the full report over 1..2k+2");
    euler->add_flag("--grid", o.grid);
    euler->add_option("--pprec", o.pprec);

    auto* kl = app.add_subcommand("kl", "Kubota-Leopoldt series on one branch");
    kl->add_option("--p", o.p);
    kl->add_option("--eta", o.eta);
    kl->add_option("--branch", o.branch);
    kl->add_option("--pprec", o.pprec);
    kl->add_option("--xprec", o.xprec);
    kl->add_option("--values", o.values)->check(CLI::Range(0, 50));

    auto* es = app.add_subcommand("eulersys", "Euler polynomials and synthetic Euler systems");
    es->require_subcommand(1);
    auto* es_check = es->add_subcommand("check", "Q_l = (1 - l^(k+1-j) eps chi(l) T) P_l");
    es_check->add_option("--p", o.p);
    es_check->add_option("--ell", o.ell)->required();
    es_check->add_option("--a", o.a)->required();
    es_check->add_option("--eps", o.eps);
    es_check->add_option("--chi", o.chi);
    es_check->add_option("--k", o.k);
    es_check->add_option("--j", o.j);
    auto* es_synth = es->add_subcommand("synth", "build and validate a synthetic system");
    es_synth->add_option("--p", o.p);
    es_synth->add_option("--primes", o.primes);
    es_synth->add_option("--seed-file", o.seed_file)->required();
    es_synth->add_option("--inject-fault", o.inject, "r whose class gets perturbed by p^(M-1)");
    es_synth->add_flag("--classes", o.classes);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        json out;
        if (*pollack)
            out = run_pollack(o);
        else if (*identity)
            out = run_identity(o);
        else if (*growth)
            out = run_growth(o);
        else if (*factor)
            out = run_factor(o);
        else if (*dieu)
            out = run_dieudonne(o);
        else if (*euler)
            out = run_euler(o);
        else if (*kl)
            out = run_kl(o);
        else if (*es_check)
            out = run_eulersys_check(o);
        else
            out = run_eulersys_synth(o);
        emit(out, format, output);
        return 0;
    } catch (const DivisibilityError& e) {
        emit(io::to_json(e), format, output);
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
