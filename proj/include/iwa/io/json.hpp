#pragma once

#include <set>
#include <string>

#include <json.hpp>

#include "../eulersys.hpp"
#include "../signed.hpp"

namespace iwa::io {

using json = nlohmann::json;

inline constexpr const char* kSchema = "iwa/1";

struct JsonError : InvalidArgument {
    using InvalidArgument::InvalidArgument;
};

// Unknown fields are errors, as are missing required ones.
inline void check_keys(const json& j, const std::set<std::string>& required, const std::set<std::string>& optional,
                       const std::string& where) {
    if (!j.is_object()) throw JsonError(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!required.count(it.key()) && !optional.count(it.key()))
            throw JsonError(where + ": unknown field '" + it.key() + "'");
    for (const auto& k : required)
        if (!j.contains(k)) throw JsonError(where + ": missing field '" + k + "'");
}

template <class T>
T get_as(const json& j, const std::string& key, const std::string& where) {
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw JsonError(where + ": field '" + key + "' has the wrong type");
    }
}

inline mpz_class parse_int(const std::string& s, const std::string& where) {
    mpz_class z;
    if (s.empty() || z.set_str(s, 10) != 0) throw JsonError(where + ": '" + s + "' is not an integer");
    return z;
}

inline std::string half_str(long twice) { return std::to_string(twice) + "/2"; }

inline long parse_half(const std::string& s, const std::string& where) {
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return 2 * std::stol(s);
        if (s.substr(slash + 1) != "2") throw JsonError(where + ": valuation denominator must be 2");
        size_t used = 0;
        long n = std::stol(s.substr(0, slash), &used);
        if (used != slash) throw JsonError(where + ": bad valuation '" + s + "'");
        return n;
    } catch (const std::logic_error&) {
        throw JsonError(where + ": bad valuation '" + s + "'");
    }
}

inline std::string rational_str(const mpq_class& q) { return q.get_str(); }

inline mpq_class parse_rational(const std::string& s, const std::string& where) {
    mpq_class q;
    if (s.empty() || q.set_str(s, 10) != 0) throw JsonError(where + ": '" + s + "' is not a rational");
    q.canonicalize();
    return q;
}

// p^val * unit from a fixed-point integer scaled by p^shift.
inline json fixed_scalar(const mpz_class& a, long shift, int p) {
    if (a == 0) return {{"val", "inf"}, {"unit", "0"}};
    mpz_class u = a;
    long v = remove_p(u, p);
    return {{"val", half_str(2 * (shift + v))}, {"unit", u.get_str()}};
}

inline json coeff_json(const Series& s, int i) {
    json c = fixed_scalar(s.A()[i], s.shift(), s.prime());
    if (s.has_alpha()) c["b_part"] = fixed_scalar(s.B()[i], s.shift(), s.prime());
    return c;
}

// Reads {"val","unit"} into (valuation, unit); nullopt for zero.
inline std::optional<std::pair<long, mpz_class>> read_scalar(const json& j, int p, long abs_prec,
                                                             const std::string& where) {
    check_keys(j, {"val", "unit"}, {}, where);
    std::string vs = get_as<std::string>(j, "val", where), us = get_as<std::string>(j, "unit", where);
    mpz_class u = parse_int(us, where);
    if (vs == "inf") {
        if (u != 0) throw JsonError(where + ": zero coefficient must have unit 0");
        return std::nullopt;
    }
    long twice = parse_half(vs, where);
    if (twice % 2 != 0) throw JsonError(where + ": coordinates over Q_p have integral valuation");
    long v = twice / 2;
    if (u <= 0 || mpz_divisible_ui_p(u.get_mpz_t(), p)) throw JsonError(where + ": unit must be positive and prime to p");
    if (v >= abs_prec) throw JsonError(where + ": valuation at or above the precision");
    if (u >= pow_ui(p, abs_prec - v)) throw JsonError(where + ": unit exceeds its precision");
    return std::make_pair(v, u);
}

inline json series_component(const Series& s, int tame) {
    json c;
    c["tame"] = tame;
    c["abs_prec"] = s.abs_prec();
    c["x_exact"] = s.x_exact();
    json co = json::array();
    for (int i = 0; i < s.size(); ++i) co.push_back(coeff_json(s, i));
    c["coeffs"] = co;
    return c;
}

inline Series series_from_component(const json& c, int p, int N, const Form& f, const std::string& where) {
    check_keys(c, {"tame", "coeffs", "abs_prec"}, {"x_exact"}, where);
    long absp = get_as<long>(c, "abs_prec", where);
    bool xe = c.contains("x_exact") ? get_as<bool>(c, "x_exact", where) : false;
    const json& co = c.at("coeffs");
    if (!co.is_array()) throw JsonError(where + ": coeffs must be an array");
    if (static_cast<int>(co.size()) > N) throw JsonError(where + ": more coefficients than x_prec");
    int n = static_cast<int>(co.size());
    std::vector<std::optional<std::pair<long, mpz_class>>> a(n), b(n);
    bool any_b = false;
    long minv = absp;
    for (int i = 0; i < n; ++i) {
        std::string w = where + ".coeffs[" + std::to_string(i) + "]";
        json ca = co[i];
        if (ca.is_object() && ca.contains("b_part")) {
            if (!f) throw JsonError(w + ": b_part needs a form");
            b[i] = read_scalar(ca.at("b_part"), p, absp, w + ".b_part");
            ca.erase("b_part");
            any_b = true;
        }
        a[i] = read_scalar(ca, p, absp, w);
        if (a[i]) minv = std::min(minv, a[i]->first);
        if (b[i]) minv = std::min(minv, b[i]->first);
    }
    int cap = static_cast<int>(absp - minv);
    std::vector<mpz_class> A(n), B;
    if (any_b) B.assign(n, 0);
    for (int i = 0; i < n; ++i) {
        if (a[i]) A[i] = a[i]->second * pow_ui(p, a[i]->first - minv);
        if (b[i]) B[i] = b[i]->second * pow_ui(p, b[i]->first - minv);
    }
    return Series::from_ints(p, std::move(A), minv, cap, f, std::move(B), xe);
}

inline json form_json(const Form& f) { return {{"k", f->k}, {"eps", f->eps.e}}; }

inline json to_json(const IwasawaElement& x) {
    json j;
    j["p"] = x.prime();
    j["u"] = x.u().get_str();
    j["p_prec"] = x.precision().M;
    j["x_prec"] = x.precision().N;
    if (x.form()) j["form"] = form_json(x.form());
    json comps = json::array();
    for (int i = 0; i < x.tame_count(); ++i)
        if (!x.component(i).is_exact_zero()) comps.push_back(series_component(x.component(i), i));
    j["components"] = comps;
    return j;
}

inline const std::set<std::string> kElementKeys = {"p", "u", "p_prec", "x_prec", "components"};

inline IwasawaElement element_from_json(const json& j, const std::string& where = "element",
                                        const std::set<std::string>& extra = {}) {
    std::set<std::string> opt = extra;
    opt.insert("form");
    check_keys(j, kElementKeys, opt, where);
    int p = get_as<int>(j, "p", where);
    Precision pr{p, get_as<int>(j, "p_prec", where), get_as<int>(j, "x_prec", where)};
    pr.validate();
    mpz_class u = parse_int(get_as<std::string>(j, "u", where), where + ".u");
    if (u != p + 1) throw JsonError(where + ": only u = 1 + p is supported");
    Form f;
    if (j.contains("form")) {
        const json& fj = j.at("form");
        check_keys(fj, {"k", "eps"}, {}, where + ".form");
        f = make_form(p, get_as<int>(fj, "k", where), RootOfUnity{p, get_as<int>(fj, "eps", where)});
    }
    IwasawaElement x = IwasawaElement::zero(pr, f);
    const json& comps = j.at("components");
    if (!comps.is_array()) throw JsonError(where + ": components must be an array");
    std::set<int> seen;
    for (size_t t = 0; t < comps.size(); ++t) {
        std::string w = where + ".components[" + std::to_string(t) + "]";
        int tame = get_as<int>(comps[t], "tame", w);
        if (tame < 0 || tame >= p - 1 || !seen.insert(tame).second) throw JsonError(w + ": bad or repeated tame index");
        x = x.with_component(tame, series_from_component(comps[t], p, pr.N, f, w));
    }
    return x;
}

inline json to_json(const Distribution& d) {
    json j = to_json(d.body);
    j["order"] = rational_str(d.order);
    if (!d.meta.empty()) {
        json m = json::object();
        for (const auto& [k, v] : d.meta) m[k] = v;
        j["meta"] = m;
    }
    return j;
}

inline Distribution distribution_from_json(const json& j, const std::string& where = "distribution") {
    Distribution d(element_from_json(j, where, {"order", "meta"}));
    if (j.contains("order")) d.order = parse_rational(get_as<std::string>(j, "order", where), where + ".order");
    if (j.contains("meta")) {
        const json& m = j.at("meta");
        if (!m.is_object()) throw JsonError(where + ".meta must be an object");
        for (auto it = m.begin(); it != m.end(); ++it) {
            if (!it.value().is_string()) throw JsonError(where + ".meta values must be strings");
            d.meta.emplace_back(it.key(), it.value().get<std::string>());
        }
    }
    return d;
}

inline json padic_json(const PadicScalar& x) {
    if (x.is_exact_zero()) return {{"val", "inf"}, {"unit", "0"}, {"abs_prec", "inf"}};
    if (x.is_zero()) return {{"val", "inf"}, {"unit", "0"}, {"abs_prec", x.abs_prec()}};
    return {{"val", half_str(2 * x.valuation())}, {"unit", x.unit().get_str()}, {"abs_prec", x.abs_prec()}};
}

inline json document(const std::string& kind) { return {{"schema", kSchema}, {"kind", kind}}; }

// Checks the schema tag and kind, then returns the object with them removed.
inline json open_document(const json& j, const std::string& kind) {
    if (!j.is_object()) throw JsonError("document must be an object");
    if (!j.contains("schema") || j.at("schema") != kSchema) throw JsonError("schema must be \"iwa/1\"");
    if (!j.contains("kind") || j.at("kind") != kind) throw JsonError("expected a document of kind '" + kind + "'");
    json r = j;
    r.erase("schema");
    r.erase("kind");
    return r;
}

inline const std::array<const char*, 4> kUnboundedNames = {"L_aa", "L_mm", "L_am", "L_ma"};

inline json to_json(const UnboundedQuadruple& q) {
    json j = document("unbounded_quadruple");
    for (int i = 0; i < 4; ++i) j[kUnboundedNames[i]] = to_json(q.L[i]);
    return j;
}

inline UnboundedQuadruple unbounded_from_json(const json& doc) {
    json j = open_document(doc, "unbounded_quadruple");
    check_keys(j, {"L_aa", "L_mm", "L_am", "L_ma"}, {}, "unbounded_quadruple");
    UnboundedQuadruple q;
    for (int i = 0; i < 4; ++i) q.L[i] = distribution_from_json(j.at(kUnboundedNames[i]), kUnboundedNames[i]);
    return q;
}

inline json to_json(const SignedQuadruple& s) {
    json j = document("signed_quadruple");
    j["plus"] = to_json(s.plus);
    j["minus"] = to_json(s.minus);
    j["dot"] = to_json(s.dot);
    j["circ"] = to_json(s.circ);
    return j;
}

inline SignedQuadruple signed_from_json(const json& doc) {
    json j = open_document(doc, "signed_quadruple");
    check_keys(j, {"plus", "minus", "dot", "circ"}, {"convention", "k", "p_prec_attained", "x_prec_attained"},
               "signed_quadruple");
    return {element_from_json(j.at("plus"), "plus"), element_from_json(j.at("minus"), "minus"),
            element_from_json(j.at("dot"), "dot"), element_from_json(j.at("circ"), "circ")};
}

inline json to_json(const DivisibilityError& e) {
    json j = document("divisibility_failure");
    j["message"] = e.what();
    j["row"] = e.row;
    j["rows"] = e.rows;
    j["component"] = e.component;
    j["index"] = e.index;
    return j;
}

inline json to_json(const EulerPolynomial& P) { return P.coeff_strings(); }

inline json to_json(const RankinCheck& r) {
    json j = document("rankin_check");
    j["holds"] = r.holds;
    j["P"] = to_json(r.P);
    j["Q"] = to_json(r.Q);
    j["linear"] = to_json(r.linear);
    return j;
}

inline json to_json(const GroupRingElement& x) {
    json j;
    j["primes"] = x.level().primes;
    j["orders"] = x.level().orders;
    j["p_prec"] = x.precision();
    json c = json::array();
    for (const auto& a : x.coeffs()) c.push_back(a.get_str());
    j["coeffs"] = c;
    return j;
}

inline json to_json(const SystemReport& rep) {
    json j = document("eulersys_report");
    j["all_hold"] = rep.all_hold;
    json checks = json::array();
    for (const auto& c : rep.checks)
        checks.push_back({{"r", c.r},
                          {"ell", c.ell},
                          {"holds", c.holds},
                          {"deviation", c.holds ? std::string("exact-zero")
                                                : "valuation " + std::to_string(c.deviation_valuation)}});
    j["checks"] = checks;
    return j;
}

// Seed file for a synthetic system:
// {"schema","kind":"eulersys_seed","p","p_prec","k","j","primes",
//  "euler":[{"ell","a","eps","chi"}], optional "frobenius":[{"ell","exps"}],
//  "gamma" (decimal unit), and either "rng_seed" or "coeffs" (decimal strings).
struct SeedSpec {
    TameLevel R;
    int M = 20;
    long k = 0, j = 0;
    std::map<long, EulerData> euler;
    std::map<long, std::vector<long>> frobenius;
    PadicScalar gamma;
    GroupRingElement seed;
};

inline SeedSpec seed_from_json(const json& doc) {
    json j = open_document(doc, "eulersys_seed");
    const std::string w = "eulersys_seed";
    check_keys(j, {"p", "p_prec", "k", "j", "primes", "euler"}, {"frobenius", "gamma", "rng_seed", "coeffs"}, w);
    if (j.contains("rng_seed") == j.contains("coeffs")) throw JsonError(w + ": give exactly one of rng_seed, coeffs");
    SeedSpec s;
    int p = get_as<int>(j, "p", w);
    s.M = get_as<int>(j, "p_prec", w);
    if (s.M < 1) throw JsonError(w + ": p_prec must be positive");
    s.k = get_as<long>(j, "k", w);
    s.j = get_as<long>(j, "j", w);
    s.R = TameLevel::make(p, get_as<std::vector<long>>(j, "primes", w));
    for (const auto& e : j.at("euler")) {
        check_keys(e, {"ell", "a", "eps", "chi"}, {}, w + ".euler");
        s.euler[get_as<long>(e, "ell", w)] = {get_as<long>(e, "a", w), RootOfUnity{p, get_as<int>(e, "eps", w)},
                                              RootOfUnity{p, get_as<int>(e, "chi", w)}};
    }
    if (j.contains("frobenius"))
        for (const auto& e : j.at("frobenius")) {
            check_keys(e, {"ell", "exps"}, {}, w + ".frobenius");
            s.frobenius[get_as<long>(e, "ell", w)] = get_as<std::vector<long>>(e, "exps", w);
        }
    s.gamma = PadicScalar::from_int_rel(
        p, j.contains("gamma") ? parse_int(get_as<std::string>(j, "gamma", w), w + ".gamma") : mpz_class(1), s.M + 8);
    if (j.contains("rng_seed")) {
        s.seed = random_group_ring_element(s.R, s.M, get_as<unsigned long>(j, "rng_seed", w));
    } else {
        std::vector<mpz_class> c;
        for (const auto& x : j.at("coeffs")) {
            if (!x.is_string()) throw JsonError(w + ": coeffs must be decimal strings");
            c.push_back(parse_int(x.get<std::string>(), w + ".coeffs"));
        }
        s.seed = GroupRingElement::from_coeffs(s.R, s.M, std::move(c));
    }
    return s;
}

}  // namespace iwa::io
