// farey-laurent: command-line front end.
//
// Exit codes: 0 ok, 1 oracle mismatch, 2 domain/precondition error,
// 3 insufficient precision, 64 usage/parse error. Every error is also
// written to stderr as one JSON record.

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <sstream>
#include <variant>

#include <CLI11.hpp>
#include <json.hpp>

#include "farey/ergodic.hpp"
#include "farey/tree.hpp"

using namespace farey;
using json = nlohmann::ordered_json;

namespace {

class oracle_mismatch : public error {
public:
    using error::error;
    const char* kind() const noexcept override { return "OracleMismatch"; }
};

using value = std::variant<rational_function, laurent_series>;

struct options {
    std::string field;
    std::string modulus;
    std::string rational, series, cf, period;
    std::int64_t floor = -64;
    std::size_t depth = 20;
    std::size_t steps = 10;
    std::uint64_t seed = 1;
    bool as_json = false;
    std::string out;
    bool oracle = false;
    std::string h = "1";
    // classify
    std::string U, V;
    // tree
    std::string export_format = "dot";
    std::size_t ford = 0;
    std::string trichotomy, hamenstadt;
    // ergodic
    std::size_t samples = 1000;
    std::size_t len = 500;
    std::size_t k = 200;
    std::int64_t levels = 3;
    std::string map = "alg";
    std::string mode = "exact";
    bool control = false;
    std::string csv;
};

// --- parsing -------------------------------------------------------------

const field& parse_field(const std::string& text, const std::string& modulus) {
    std::uint32_t p = 0, e = 1;
    try {
        const auto caret = text.find('^');
        if (caret == std::string::npos) {
            std::uint32_t q = std::uint32_t(std::stoul(text));
            for (std::uint32_t d = 2; d <= q; ++d)
                if (q % d == 0) {
                    p = d;
                    break;
                }
            if (p == 0) throw parse_error("field order must be a prime power");
            e = 0;
            while (q % p == 0) {
                q /= p;
                ++e;
            }
            if (q != 1) throw parse_error("field order " + text + " is not a prime power");
        } else {
            p = std::uint32_t(std::stoul(text.substr(0, caret)));
            e = std::uint32_t(std::stoul(text.substr(caret + 1)));
        }
    } catch (const std::logic_error&) {
        throw parse_error("cannot read field order '" + text + "'");
    }
    if (!detail::is_prime(p)) throw parse_error("field characteristic " + std::to_string(p) + " is not prime");
    field_spec spec{p, e, {}};
    if (e > 1) {
        if (!modulus.empty()) {
            std::stringstream ss(modulus);
            for (std::string tok; std::getline(ss, tok, ',');) spec.modulus.push_back(std::uint32_t(std::stoul(tok)));
        } else {
            // first monic irreducible in base-p order of the lower coefficients
            const std::uint64_t count = std::uint64_t(std::pow(p, e));
            for (std::uint64_t v = 0; v < count && spec.modulus.empty(); ++v) {
                detail::zp_poly m(e + 1, 0);
                std::uint64_t x = v;
                for (std::uint32_t i = 0; i < e; ++i, x /= p) m[i] = std::uint32_t(x % p);
                m[e] = 1;
                if (m[0] != 0 && detail::zp_irreducible(m, p)) spec.modulus = m;
            }
        }
    }
    return field::get(spec);
}

elem parse_coeff(const field& F, const std::string& tok) {
    try {
        const long v = std::stol(tok);
        if (v < 0 || std::uint32_t(v) >= F.q()) throw parse_error("coefficient " + tok + " is not in 0.." + std::to_string(F.q() - 1));
        return elem(v);
    } catch (const std::logic_error&) {
        throw parse_error("cannot read coefficient '" + tok + "'");
    }
}

/// `c1,c2,...` are the coefficients of t^top, t^(top-1), ... (top = -1 unless
/// given as `top:` prefix); `@floor` overrides the default floor top - count.
/// A JSON object {"top": -1, "coeffs": [...], "floor": -20} is also accepted.
laurent_series parse_series(const field& F, const std::string& text) {
    std::int64_t top = -1;
    std::vector<elem> coeffs;
    std::optional<std::int64_t> floor;
    const auto first = text.find_first_not_of(" \t");
    if (first != std::string::npos && text[first] == '{') {
        json j;
        try {
            j = json::parse(text);
            top = j.value("top", std::int64_t(-1));
            for (const auto& c : j.at("coeffs")) coeffs.push_back(parse_coeff(F, std::to_string(c.get<long>())));
            if (j.contains("floor")) floor = j["floor"].get<std::int64_t>();
        } catch (const json::exception& e) {
            throw parse_error(std::string("series JSON: ") + e.what());
        }
    } else {
        std::string body = text;
        try {
            if (const auto at = body.find('@'); at != std::string::npos) {
                floor = std::stoll(body.substr(at + 1));
                body = body.substr(0, at);
            }
            if (const auto colon = body.find(':'); colon != std::string::npos) {
                top = std::stoll(body.substr(0, colon));
                body = body.substr(colon + 1);
            }
        } catch (const std::logic_error&) {
            throw parse_error("cannot read series '" + text + "'");
        }
        std::stringstream ss(body);
        for (std::string tok; std::getline(ss, tok, ',');) coeffs.push_back(parse_coeff(F, tok));
    }
    if (coeffs.empty()) throw parse_error("series needs at least one coefficient");
    const std::int64_t fl = floor.value_or(top - std::int64_t(coeffs.size()));
    if (fl > top - std::int64_t(coeffs.size()))
        throw parse_error("floor above the last given coefficient");
    return laurent_series::from_coeffs(F, top, std::move(coeffs), fl);
}

value parse_input(const field& F, const options& o) {
    const int modes = !o.rational.empty() + !o.series.empty() + !o.cf.empty();
    if (modes != 1) throw parse_error("give exactly one of --rational, --series, --cf");
    if (!o.rational.empty()) return parse_rational(F, o.rational);
    if (!o.series.empty()) return parse_series(F, o.series);
    cf_spec_input spec{parse_poly_list(F, o.cf), parse_poly_list(F, o.period)};
    if (spec.finite()) return rational_from_cf(F, spec);
    return series_from_cf(F, spec, o.floor);
}

/// h as coefficients of t^-1, t^-2, ... ("1,0,2"), a Laurent polynomial
/// ("t^-1 + 2*t^-3"), or a rational expression ("1/(t+1)", truncated at floor).
hparam parse_h(const field& F, const std::string& text, std::int64_t floor) {
    if (text.find('/') != std::string::npos) return hparam(series_from_rational(parse_rational(F, text), floor));
    if (text.find('t') != std::string::npos) {
        laurent_series sum = laurent_series::zero(F);
        std::stringstream ss(text);
        for (std::string term; std::getline(ss, term, '+');) {
            term.erase(std::remove_if(term.begin(), term.end(), ::isspace), term.end());
            elem c = 1;
            std::int64_t e = 0;
            const auto tpos = term.find('t');
            try {
                if (tpos == std::string::npos) {
                    c = parse_coeff(F, term);
                } else {
                    if (tpos > 0) c = parse_coeff(F, term.substr(0, term.back() == '*' ? tpos : tpos - 1));
                    e = tpos + 1 < term.size() ? std::stoll(term.substr(term.find('^') + 1)) : 1;
                }
            } catch (const std::logic_error&) {
                throw parse_error("cannot read term '" + term + "' of h");
            }
            sum = sum + laurent_series::monomial(F, c, e);
        }
        return hparam(sum);
    }
    std::vector<elem> c;
    std::stringstream ss(text);
    for (std::string tok; std::getline(ss, tok, ',');) c.push_back(parse_coeff(F, tok));
    return hparam(laurent_series::from_coeffs(F, -1, std::move(c)));
}

// --- formatting ----------------------------------------------------------

std::string format_series(const laurent_series& s) {
    const field& F = s.fld();
    std::string out;
    for (std::size_t j = 0; j < s.window().size(); ++j) {
        const elem c = s.window()[j];
        if (c == 0) continue;
        const std::int64_t d = s.top() - std::int64_t(j);
        std::string term = d == 0 ? F.format(c) : (c == 1 ? "" : F.format(c) + "*") + (d == 1 ? "t" : "t^" + std::to_string(d));
        out += (out.empty() ? "" : " + ") + term;
    }
    if (out.empty()) out = "0";
    if (!s.is_exact()) out += " + O(t^" + std::to_string(s.floor()) + ")";
    return out;
}

std::string fmt(const value& v) {
    return std::visit(
        [](const auto& x) -> std::string {
            if constexpr (std::is_same_v<std::decay_t<decltype(x)>, rational_function>) return format_rational(x);
            else return format_series(x);
        },
        v);
}

json mat_json(const pmat& m) {
    return json::array({json::array({format_poly(m.a), format_poly(m.b)}), json::array({format_poly(m.c), format_poly(m.d)})});
}

const char* stop_name(cf_stop s) {
    switch (s) {
    case cf_stop::terminated: return "terminated";
    case cf_stop::precision: return "precision";
    default: return "depth";
    }
}

// --- commands ------------------------------------------------------------

void cmd_cf(const field& F, const options& o, std::ostream& os) {
    const value x = parse_input(F, o);
    const cf_expansion cf = std::visit([&](const auto& f) { return cf_expand(f, o.depth); }, x);
    if (o.oracle) {
        std::vector<poly> ref;
        if (auto r = std::get_if<rational_function>(&x)) {
            // iterate the Artin map itself
            rational_function f = *r;
            while (!f.is_zero() && ref.size() < o.depth) {
                ref.push_back(f.inverse().polynomial_part());
                f = artin_step(f);
            }
        } else {
            ref = cf_expand_iterated(std::get<laurent_series>(x), o.depth).quotients();
        }
        if (ref != cf.quotients()) throw oracle_mismatch("partial quotients differ from the Artin-map iteration");
    }
    if (o.as_json) {
        json j{{"schema", 1}, {"command", "cf"}, {"q", F.q()}, {"input", fmt(x)}};
        j["A"] = json::array();
        for (const auto& a : cf.quotients()) j["A"].push_back(format_poly(a));
        j["stop"] = stop_name(cf.stop);
        j["required_floor"] = cf.required_floor ? json(*cf.required_floor) : json(nullptr);
        j["convergents"] = json::array();
        for (std::size_t k = 0; k <= cf.depth(); ++k) j["convergents"].push_back(format_rational(cf.convergent(std::int64_t(k))));
        if (o.oracle) j["oracle"] = "agree";
        os << j.dump(2) << "\n";
        return;
    }
    os << "A = [";
    for (std::size_t i = 0; i < cf.depth(); ++i) os << (i ? ", " : "") << format_poly(cf.quotients()[i]);
    os << "]\nstop: " << stop_name(cf.stop);
    if (cf.required_floor) os << " (required floor <= " << *cf.required_floor << ")";
    os << "\n";
    for (std::size_t k = 0; k <= cf.depth(); ++k)
        os << "P_" << k << "/Q_" << k << " = " << format_rational(cf.convergent(std::int64_t(k))) << "\n";
    if (o.oracle) os << "oracle: agree\n";
}

void cmd_geo(const field& F, const options& o, std::ostream& os) {
    const value x = parse_input(F, o);
    std::visit(
        [&](const auto& f) {
            using V = std::decay_t<decltype(f)>;
            const auto orbit = geo_orbit_product(f, o.steps);
            const scaled_pmat prod = orbit.product.normalized();
            if (o.oracle) {
                const cf_expansion cf = cf_expand(f, o.steps + 1);
                if (prod.shift != 0 || !(prod.m == geo_closed_form(cf, std::int64_t(o.steps))))
                    throw oracle_mismatch("orbit product differs from the closed form");
            }
            json rows = json::array();
            for (std::size_t i = 0; i < orbit.states.size(); ++i)
                rows.push_back({{"step", i}, {"n", orbit.states[i].n}, {"f", fmt(value(V(orbit.states[i].f)))}});
            if (o.as_json) {
                json j{{"schema", 1}, {"command", "geo"}, {"q", F.q()}, {"orbit", rows}};
                j["product"] = {{"scale", "t^" + std::to_string(prod.shift)}, {"matrix", mat_json(prod.m)}};
                os << j.dump(2) << "\n";
                return;
            }
            for (const auto& r : rows)
                os << "F^" << r["step"].get<std::size_t>() << ": (" << r["f"].get<std::string>() << ", "
                   << r["n"].get<std::int64_t>() << ")\n";
            os << "product = " << (prod.shift ? "t^" + std::to_string(prod.shift) + " " : "") << format_pmat(prod.m) << "\n";
            if (o.oracle) os << "oracle: agree\n";
        },
        x);
}

void cmd_alg(const field& F, const options& o, std::ostream& os) {
    const value x = parse_input(F, o);
    const hparam h = parse_h(F, o.h, o.floor);
    std::visit(
        [&](const auto& f) {
            using V = std::decay_t<decltype(f)>;
            const auto orbit = alg_orbit_product(f, h, o.steps);
            if (o.oracle) {
                for (std::size_t i = 0; i + 1 < orbit.states.size(); ++i)
                    if (!(alg_step_nf(orbit.states[i], h) == orbit.states[i + 1]))
                        throw oracle_mismatch("normal form and definition of F_h differ at step " + std::to_string(i));
                const std::size_t len = orbit.states.size() - 1;
                const cf_expansion cf = cf_expand(f, len + 1);
                if (!(orbit.product == alg_closed_form(cf, h, std::int64_t(len))))
                    throw oracle_mismatch("orbit product differs from the closed form");
            }
            json rows = json::array();
            for (std::size_t i = 0; i < orbit.states.size(); ++i) rows.push_back({{"step", i}, {"f", fmt(value(V(orbit.states[i])))}});
            if (o.as_json) {
                json j{{"schema", 1}, {"command", "alg"}, {"q", F.q()}, {"h", h.str()}, {"orbit", rows}};
                j["product"] = mat_json(orbit.product);
                os << j.dump(2) << "\n";
                return;
            }
            for (const auto& r : rows) os << "F_h^" << r["step"].get<std::size_t>() << ": " << r["f"].get<std::string>() << "\n";
            os << "product = " << format_pmat(orbit.product) << "\n";
            if (o.oracle) os << "oracle: agree\n";
        },
        x);
}

void cmd_intermediates(const field& F, const options& o, std::ostream& os) {
    const value x = parse_input(F, o);
    const hparam h = parse_h(F, o.h, o.floor);
    json rows = json::array();
    std::visit(
        [&](const auto& f) {
            const cf_expansion cf = cf_expand(f, o.depth + 1);
            for (const auto& ic : intermediate_convergents(cf, h, std::min(o.depth, cf.depth()))) {
                const qpow err = approx_error(f, ic.U, ic.V);
                const qpow law = qpow{false, -ic.i} / (cf.Q(std::int64_t(ic.k)).abs() * cf.Q(std::int64_t(ic.k) + 1).abs());
                if (o.oracle && !(err == law)) throw oracle_mismatch("error law fails at k=" + std::to_string(ic.k));
                rows.push_back({{"k", ic.k},
                                {"i", ic.i},
                                {"B", format_poly(ic.B)},
                                {"U", format_poly(ic.U)},
                                {"V", format_poly(ic.V)},
                                {"error", err.str()}});
            }
        },
        x);
    if (o.as_json) {
        os << json{{"schema", 1}, {"command", "intermediates"}, {"q", F.q()}, {"h", h.str()}, {"intermediates", rows}}.dump(2)
           << "\n";
        return;
    }
    for (const auto& r : rows)
        os << "k=" << r["k"].get<std::size_t>() << " i=" << r["i"].get<std::int64_t>() << "  " << r["U"].get<std::string>()
           << " / " << r["V"].get<std::string>() << "  B=" << r["B"].get<std::string>() << "  |f-U/V|=" << r["error"].get<std::string>() << "\n";
}

void cmd_classify(const field& F, const options& o, std::ostream& os) {
    const value x = parse_input(F, o);
    if (o.U.empty() || o.V.empty()) throw parse_error("classify needs --U and --V");
    const poly U = parse_poly(F, o.U), V = parse_poly(F, o.V);
    const classification c = std::visit([&](const auto& f) { return classify_good_approx(f, U, V); }, x);
    json j{{"schema", 1},
           {"command", "classify"},
           {"q", F.q()},
           {"k", c.k},
           {"B", format_poly(c.B)},
           {"principal", c.principal},
           {"error", c.error.str()}};
    j["h"] = c.h ? json(c.h->str()) : json(nullptr);
    j["i"] = c.i;
    if (o.as_json) {
        os << j.dump(2) << "\n";
        return;
    }
    os << (c.principal ? "principal" : "intermediate") << " convergent: k=" << c.k << " B=" << format_poly(c.B)
       << " |f-U/V|=" << c.error.str();
    if (c.h) os << " h=" << c.h->str() << " i=" << c.i;
    os << "\n";
}

void cmd_tree(const field& F, const options& o, std::ostream& os) {
    const value x = parse_input(F, o);
    if (!o.trichotomy.empty()) {
        const rational_function pq = parse_rational(F, o.trichotomy);
        const incidence inc = std::visit([&](const auto& f) { return diophantine_trichotomy(f, pq); }, x);
        if (o.as_json) os << json{{"schema", 1}, {"command", "tree"}, {"base", format_rational(pq)}, {"incidence", to_string(inc)}}.dump(2) << "\n";
        else os << to_string(inc) << "\n";
        return;
    }
    if (!o.hamenstadt.empty()) {
        const auto* r = std::get_if<rational_function>(&x);
        if (!r) throw precondition_failed("--hamenstadt needs a rational input");
        const rational_function pq = parse_rational(F, o.hamenstadt);
        const qpow d = hamenstadt_distance(std::nullopt, *r, ford_sphere::at(pq));
        if (o.as_json) os << json{{"schema", 1}, {"command", "tree"}, {"base", format_rational(pq)}, {"distance", d.str()}}.dump(2) << "\n";
        else os << "d(inf, f) = " << d.str() << "\n";
        return;
    }
    if (o.ford > 0) {
        const auto cr = std::visit([&](const auto& f) { return ford_crossings(f, o.ford); }, x);
        json rows = json::array();
        for (std::size_t k = 0; k < cr.size(); ++k)
            rows.push_back({{"k", k}, {"base", cr[k].ball.str()}, {"entry", cr[k].entry}, {"exit", cr[k].exit ? json(*cr[k].exit) : json(nullptr)}});
        if (o.oracle) {
            const cf_expansion cf = std::visit([&](const auto& f) { return cf_expand(f, o.ford + 1); }, x);
            const auto pred = ford_crossings_from_cf(cf, o.ford);
            bool same = pred.size() == cr.size();
            for (std::size_t k = 0; same && k < cr.size(); ++k)
                same = pred[k].ball == cr[k].ball && pred[k].entry == cr[k].entry &&
                       (!pred[k].exit || !cr[k].exit || *pred[k].exit == *cr[k].exit);
            if (!same) throw oracle_mismatch("Ford crossings differ from the principal convergents");
        }
        if (o.as_json) {
            os << json{{"schema", 1}, {"command", "tree"}, {"q", F.q()}, {"ford_balls", rows}}.dump(2) << "\n";
            return;
        }
        for (const auto& r : rows)
            os << "ball " << r["k"].get<std::size_t>() << ": base " << r["base"].get<std::string>() << " entry "
               << r["entry"].get<std::int64_t>() << " exit " << (r["exit"].is_null() ? "-" : std::to_string(r["exit"].get<std::int64_t>())) << "\n";
        if (o.oracle) os << "oracle: agree\n";
        return;
    }
    const tree_export t = std::visit([&](const auto& f) { return build_tree_export(f, o.depth); }, x);
    if (o.export_format == "dot") os << export_dot(t);
    else if (o.export_format == "json") os << export_json(t);
    else throw parse_error("--export must be dot or json");
}

json config_echo(const field& F, const options& o, const std::string& what) {
    return {{"command", "ergodic " + what}, {"q", F.q()}, {"map", o.map}, {"h", o.h}, {"samples", o.samples},
            {"len", o.len}, {"k", o.k}, {"depth", o.depth}, {"levels", o.levels}, {"mode", o.mode},
            {"control", o.control}, {"seed", o.seed}};
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw precondition_failed("cannot write " + path);
    f << text;
}

void cmd_rate(const field& F, const options& o, std::ostream& os) {
    const hparam h = parse_h(F, o.h, o.floor);
    const rate_report r = rate_experiment(F, h, o.samples, o.len, o.seed);
    const std::string csv = rate_csv(r, F.q(), "alg", o.len);
    if (!o.csv.empty()) write_file(o.csv, csv);
    const json cfg = config_echo(F, o, "rate");
    if (o.as_json) {
        json j{{"schema", 1}, {"config", cfg}, {"mean", r.mean}, {"sd", r.sd}, {"target", r.target},
               {"used", r.used}, {"dropped", r.dropped}, {"terminated", r.terminated},
               {"run_hash", run_hash(cfg.dump() + csv)}};
        os << j.dump(2) << "\n";
        return;
    }
    os << "mean " << format_double(r.mean) << " sd " << format_double(r.sd) << " target " << format_double(r.target)
       << "\nused " << r.used << " dropped " << r.dropped << " terminated " << r.terminated << "\nrun " << run_hash(cfg.dump() + csv) << "\n";
}

void cmd_invariance(const field& F, const options& o, std::ostream& os) {
    json j{{"schema", 1}, {"config", config_echo(F, o, "invariance")}};
    if (o.mode == "exact") {
        invariance_report rep;
        if (o.map == "geo") rep = geo_invariance_exact(F, o.depth, o.levels, o.control ? mu_G_perturbed(F) : mu_G_measure(F));
        else if (o.map == "alg") {
            const hparam h = parse_h(F, o.h, o.floor);
            rep = alg_invariance_exact(F, h, o.depth, o.control ? haar_measure(F) : mu_A_measure(F));
        } else throw parse_error("--map must be geo or alg");
        std::ostringstream d;
        d << rep.max_discrepancy;
        j["max_discrepancy"] = d.str();
        j["targets"] = rep.targets;
        j["source_cells"] = rep.source_cells;
        j["worst"] = rep.worst;
    } else if (o.mode == "mc") {
        chi2_report rep;
        if (o.map == "geo") rep = geo_invariance_mc(F, o.samples, o.depth, o.levels, o.seed);
        else if (o.map == "alg")
            rep = alg_invariance_mc(F, parse_h(F, o.h, o.floor), o.samples, o.depth, o.seed,
                                    o.control ? mc_source::haar : mc_source::invariant);
        else throw parse_error("--map must be geo or alg");
        j["chi2"] = rep.statistic;
        j["dof"] = rep.dof;
        j["p_value"] = rep.p_value;
        j["quantile_999"] = rep.quantile_999;
        j["dropped"] = rep.dropped;
    } else {
        throw parse_error("--mode must be exact or mc");
    }
    j["run_hash"] = run_hash(j.dump());
    if (o.as_json) {
        os << j.dump(2) << "\n";
        return;
    }
    for (const auto& [key, v] : j.items())
        if (key != "schema" && key != "config") os << key << " " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
}

void cmd_degrees(const field& F, const options& o, std::ostream& os) {
    const degree_report r = degree_stats(F, o.samples, o.k, o.seed);
    json hist = json::object();
    for (const auto& [d, n] : r.histogram) hist[std::to_string(d)] = n;
    const json cfg = config_echo(F, o, "degrees");
    json j{{"schema", 1}, {"config", cfg}, {"mean_cumulative_degree", r.final_mean()}, {"target", r.target},
           {"next_degree_ratio", r.mean_next_ratio.empty() ? 0.0 : r.mean_next_ratio.back()},
           {"max_next_degree_ratio", r.max_next_ratio.empty() ? 0.0 : r.max_next_ratio.back()},
           {"histogram", hist}, {"used", r.used}, {"dropped", r.dropped}};
    j["run_hash"] = run_hash(j.dump());
    if (!o.csv.empty()) {
        std::ostringstream c;
        c << "k,mean_cumulative_degree,mean_next_ratio,max_next_ratio\n";
        for (std::size_t i = 0; i < r.k; ++i)
            c << i + 1 << ',' << format_double(r.mean_cumulative[i]) << ',' << format_double(r.mean_next_ratio[i]) << ','
              << format_double(r.max_next_ratio[i]) << '\n';
        write_file(o.csv, c.str());
    }
    if (o.as_json) {
        os << j.dump(2) << "\n";
        return;
    }
    os << "mean sum deg A_n / k = " << format_double(r.final_mean()) << " (target " << format_double(r.target) << ")\n"
       << "deg A_{k+1} / k: mean " << format_double(j["next_degree_ratio"].get<double>()) << " max "
       << format_double(j["max_next_degree_ratio"].get<double>()) << "\nused " << r.used << " dropped " << r.dropped << "\n";
}

void error_record(const std::string& kind, const std::string& message, std::optional<std::int64_t> floor = {}) {
    json j{{"schema", 1}, {"error", kind}, {"message", message}};
    if (floor) j["required_floor"] = *floor;
    std::cerr << j.dump() << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Continued fractions and Farey maps over F_q((1/t))", "farey-laurent"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.set_config("--config", "", "key=value file; flags override it");
    app.require_subcommand(1);
    app.fallthrough();
    options o;

    const auto common = [&](CLI::App* c, bool input) {
        c->add_option("--field", o.field, "q, or p^e");
        c->add_option("--modulus", o.modulus, "extension modulus, ascending coefficients c0,...,ce");
        if (input) {
            c->add_option("--rational", o.rational, "rational function, e.g. \"t/(t^2+1)\"");
            c->add_option("--series", o.series, "\"[top:]c,c,...[@floor]\" or a JSON object");
            c->add_option("--cf", o.cf, "partial quotients \"A1;A2;...\"");
            c->add_option("--period", o.period, "repeating partial quotients after --cf");
        }
        c->add_option("--floor", o.floor, "precision floor for derived series");
        c->add_flag("--json", o.as_json, "JSON output");
        c->add_option("--out", o.out, "write output to a file");
        c->add_flag("--oracle", o.oracle, "rerun through the independent path and compare");
    };

    auto* cf = app.add_subcommand("cf", "continued fraction expansion");
    common(cf, true);
    cf->add_option("--depth", o.depth);
    auto* geo = app.add_subcommand("geo", "geometric Farey orbit");
    common(geo, true);
    geo->add_option("--steps", o.steps);
    auto* alg = app.add_subcommand("alg", "algebraic Farey orbit");
    common(alg, true);
    alg->add_option("--steps", o.steps);
    alg->add_option("--h", o.h, "h: coefficients of t^-1, t^-2, ... or a rational expression");
    auto* inter = app.add_subcommand("intermediates", "intermediate convergents");
    common(inter, true);
    inter->add_option("--depth", o.depth);
    inter->add_option("--h", o.h);
    auto* cls = app.add_subcommand("classify", "recognize U/V as an intermediate convergent");
    common(cls, true);
    cls->add_option("--U", o.U);
    cls->add_option("--V", o.V);
    auto* tree = app.add_subcommand("tree", "Bruhat-Tits tree: export, Ford crossings, trichotomy");
    common(tree, true);
    tree->add_option("--depth", o.depth);
    tree->add_option("--export", o.export_format, "dot or json");
    tree->add_option("--ford", o.ford, "list this many Ford balls crossed by ]inf, f[");
    tree->add_option("--trichotomy", o.trichotomy, "P/Q: incidence of ]inf, f[ with H_{P/Q}");
    tree->add_option("--hamenstadt", o.hamenstadt, "P/Q: d_{P/Q,H}(inf, f)");
    auto* erg = app.add_subcommand("ergodic", "sampling experiments");
    erg->require_subcommand(1);
    auto* rate = erg->add_subcommand("rate", "convergence rate of intermediate convergents");
    common(rate, false);
    rate->add_option("--samples", o.samples);
    rate->add_option("--len", o.len);
    rate->add_option("--seed", o.seed);
    rate->add_option("--h", o.h);
    rate->add_option("--csv", o.csv);
    auto* inv = erg->add_subcommand("invariance", "invariance of mu_G / mu_A");
    common(inv, false);
    inv->add_option("--map", o.map, "geo or alg");
    inv->add_option("--mode", o.mode, "exact or mc");
    inv->add_option("--depth", o.depth);
    inv->add_option("--levels", o.levels);
    inv->add_option("--samples", o.samples);
    inv->add_option("--seed", o.seed);
    inv->add_option("--h", o.h);
    inv->add_flag("--control", o.control, "use the perturbed/mismatched measure");
    auto* deg = erg->add_subcommand("degrees", "partial quotient degree statistics");
    common(deg, false);
    deg->add_option("--samples", o.samples);
    deg->add_option("--k", o.k);
    deg->add_option("--seed", o.seed);
    deg->add_option("--csv", o.csv);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        error_record("ParseError", e.what());
        return 64;
    }
    // checked here rather than with required() so --config can supply it
    if (o.field.empty()) {
        error_record("ParseError", "--field is required");
        return 64;
    }
    if (inv->parsed() && !inv->count("--depth")) o.depth = 3;

    std::ostringstream buf;
    try {
        const field& F = parse_field(o.field, o.modulus);
        if (cf->parsed()) cmd_cf(F, o, buf);
        else if (geo->parsed()) cmd_geo(F, o, buf);
        else if (alg->parsed()) cmd_alg(F, o, buf);
        else if (inter->parsed()) cmd_intermediates(F, o, buf);
        else if (cls->parsed()) cmd_classify(F, o, buf);
        else if (tree->parsed()) cmd_tree(F, o, buf);
        else if (rate->parsed()) cmd_rate(F, o, buf);
        else if (inv->parsed()) cmd_invariance(F, o, buf);
        else if (deg->parsed()) cmd_degrees(F, o, buf);
    } catch (const parse_error& e) {
        error_record(e.kind(), e.what());
        return 64;
    } catch (const insufficient_precision& e) {
        error_record(e.kind(), e.what(), e.required_floor());
        return 3;
    } catch (const oracle_mismatch& e) {
        error_record(e.kind(), e.what());
        return 1;
    } catch (const error& e) {
        error_record(e.kind(), e.what());
        return 2;
    }
    if (o.out.empty()) {
        std::cout << buf.str();
    } else {
        try {
            write_file(o.out, buf.str());
        } catch (const error& e) {
            error_record(e.kind(), e.what());
            return 2;
        }
    }
    return 0;
}
