#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "divforms/divforms.hpp"

using namespace divforms;

namespace {

struct Common {
    std::string config_path, out_path, format;
    unsigned threads = 0;
    Json config = Json::object();

    void load() {
        if (!config_path.empty()) config = config::load(config_path);
        if (!config.is_object()) throw ConfigError("config: expected a JSON object");
    }
    std::string fmt(const std::string& fallback) const { return format.empty() ? fallback : format; }
    void write(const std::string& text) const {
        if (out_path.empty()) std::cout << text;
        else write_text(out_path, text);
    }
};

struct Row {
    std::vector<std::pair<std::string, Json>> params;
    Json value;
    long double elapsed = 0;
};

std::string cell(const Json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_float()) return format_real(v.get<long double>());
    return v.dump();
}

std::string render_rows(const std::vector<Row>& rows, const std::string& format) {
    if (format == "json") {
        Json a = Json::array();
        for (auto& r : rows) {
            Json p = Json::object();
            for (auto& [k, v] : r.params) p[k] = v;
            a.push_back(Json{{"params", p}, {"value", r.value}, {"elapsed", round12(r.elapsed)}});
        }
        return (rows.size() == 1 ? a[0] : a).dump(2) + "\n";
    }
    if (format != "csv") throw ConfigError("unknown format '" + format + "' (expected csv or json)");
    std::string s;
    if (!rows.empty()) {
        for (auto& [k, v] : rows[0].params) s += k + ",";
        s += "value,elapsed\n";
    }
    for (auto& r : rows) {
        for (auto& [k, v] : r.params) s += cell(v) + ",";
        s += cell(r.value) + "," + format_real(r.elapsed) + "\n";
    }
    return s;
}

std::string render_object(const Json& j, const std::string& format) {
    if (format == "json") return j.dump(2) + "\n";
    if (format != "csv") throw ConfigError("unknown format '" + format + "' (expected csv or json)");
    std::string head, body;
    for (auto& [k, v] : j.items()) {
        head += (head.empty() ? "" : ",") + k;
        body += (body.empty() ? "" : ",") + cell(v);
    }
    return head + "\n" + body + "\n";
}

// scales from --x / --grid, else config "X" / "grid"
std::vector<long double> scales(const Common& c, const std::string& x_flag, const std::string& grid_flag,
                                const char* key = "X") {
    if (!grid_flag.empty()) return GridSpec::parse(grid_flag).values;
    if (!x_flag.empty()) return {std::stold(x_flag)};
    if (c.config.contains("grid")) return config::grid(c.config["grid"]).values;
    if (c.config.contains(key)) return {config::real(c.config[key], key)};
    throw ConfigError(std::string("no scale given: use --x, --grid, or a config ") + key + " / grid entry");
}

i64 as_integer(long double v, const char* what) {
    long double r = std::round(v);
    if (std::fabs(v - r) > 1e-9L * std::max(1.0L, r) || r < 1) throw ConfigError(std::string(what) + " must be a positive integer");
    return i64(r);
}

FormTriple forms_of(const Common& c) {
    return c.config.contains("forms") ? config::forms(c.config["forms"]) : FormTriple::sum_triple();
}

u64 prime_cut_of(const Common& c, u64 flag) {
    if (flag) return flag;
    return c.config.contains("prime_cut") ? u64(config::integer(c.config["prime_cut"], "prime_cut")) : 100'000;
}

Json interval_json(long double value, long double err, u64 cut) {
    return Json{{"value", round12(value)}, {"error_bound", round12(err)}, {"prime_cut", cut}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Divisor sums over binary linear form triples"};
    app.require_subcommand(1);
    Common c;
    auto common = [&](CLI::App* s) {
        s->add_option("--config", c.config_path, "JSON config file");
        s->add_option("--out", c.out_path, "output path (default stdout)");
        s->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        s->add_option("--threads", c.threads, "worker count (0: DIVFORMS_THREADS or 1)");
    };
    std::string x, grid, mode = "n0", name, b;
    i64 h = 0, H = 0, count = 1000, max_n = 1000;
    u64 prime_cut = 0, seed = 1;
    long double q = 0;

    auto* tau_sum = app.add_subcommand("tau-sum", "T(X): sum of tau(L1 L2 L3) over (0,X]^2");
    auto* s_sum = app.add_subcommand("s-sum", "restricted sum over a region and congruence lattice");
    auto* th_sum = app.add_subcommand("th-sum", "shifted triple correlation T_h(X), or its sum over h <= H");
    auto* mt = app.add_subcommand("mt", "density mass M(T, T, T)");
    auto* lod = app.add_subcommand("lod", "summed lattice-count discrepancy");
    auto* sigma = app.add_subcommand("sigma", "singular series prod_p sigma_p(d, D)");
    auto* ch = app.add_subcommand("ch", "triple-correlation constant c_h");
    auto* constants = app.add_subcommand("constants", "all Euler-product constants");
    auto* bilinear = app.add_subcommand("bilinear", "bilinear hypersurface counts");
    auto* experiment = app.add_subcommand("experiment", "grid sweep, fit and comparison report");
    auto* identity = app.add_subcommand("identity-check", "tau(n1 n2 n3) convolution identity on random triples");
    for (auto* s : {tau_sum, s_sum, th_sum, mt, lod, sigma, ch, constants, bilinear, experiment, identity}) common(s);
    for (auto* s : {tau_sum, s_sum, th_sum, mt, lod}) {
        s->add_option("--x", x, "scale X");
        s->add_option("--grid", grid, "geometric grid start:stop:factor");
    }
    th_sum->add_option("--shift", h, "shift h");
    th_sum->add_option("--max-shift", H, "sum over 1 <= h <= H instead");
    lod->add_option("--q", q, "moduli bound Q (default sqrt(2X))");
    for (auto* s : {sigma, ch, constants, bilinear, experiment}) s->add_option("--prime-cut", prime_cut, "Euler product cut");
    ch->add_option("--shift", h, "shift h")->required();
    bilinear->add_option("--mode", mode, "n0, n or reduction")->check(CLI::IsMember({"n0", "n", "reduction"}));
    bilinear->add_option("--x", x, "X for n0 / reduction");
    bilinear->add_option("--b", b, "B for n");
    bilinear->add_option("--grid", grid, "geometric grid start:stop:factor");
    experiment->add_option("--name", name, "experiment id (overrides the config)");
    identity->add_option("--count", count, "number of random triples");
    identity->add_option("--max", max_n, "entries drawn from [1, max]");
    identity->add_option("--seed", seed, "generator seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        c.load();
        unsigned threads = resolve_threads(c.threads);
        if (tau_sum->parsed()) {
            FormTriple forms = forms_of(c);
            std::vector<Row> rows;
            for (long double v : scales(c, x, grid)) {
                i64 X = as_integer(v, "X");
                SumResult r = T_of_X(X, forms, {threads, nullptr});
                rows.push_back({{{"X", X}}, exact_json(r.value), r.elapsed});
            }
            c.write(render_rows(rows, c.fmt(rows.size() > 1 ? "csv" : "json")));
        } else if (s_sum->parsed()) {
            ExperimentConfig e = ExperimentConfig::from_json(c.config);
            std::vector<Row> rows;
            for (long double v : scales(c, x, grid)) {
                i64 X = as_integer(v, "X");
                SumResult r = S_of({e.forms, e.region, X, e.d, e.D, e.policy}, {threads, nullptr});
                rows.push_back({{{"X", X}}, exact_json(r.value), r.elapsed});
            }
            c.write(render_rows(rows, c.fmt(rows.size() > 1 ? "csv" : "json")));
        } else if (th_sum->parsed()) {
            if (!h && c.config.contains("h")) h = config::integer(c.config["h"], "h");
            if (!H && c.config.contains("H")) H = config::integer(c.config["H"], "H");
            if (!h && !H) throw ConfigError("th-sum needs --shift or --max-shift");
            std::vector<Row> rows;
            for (long double v : scales(c, x, grid)) {
                i64 X = as_integer(v, "X");
                ArithTables t = build_tables(u64(X + std::max(h, H)));
                SumResult r = H ? sigma1(X, H, t, threads) : T_h_direct(X, h, t);
                rows.push_back({{{"X", X}, {H ? "H" : "h", H ? H : h}}, exact_json(r.value), r.elapsed});
            }
            c.write(render_rows(rows, c.fmt(rows.size() > 1 ? "csv" : "json")));
        } else if (mt->parsed()) {
            FormTriple forms = forms_of(c);
            std::vector<Row> rows;
            for (long double v : scales(c, x, grid, "T")) {
                ArithTables t = build_tables(u64(std::max<long double>(v, 2)));
                detail::Stopwatch clock;
                DensityMass m = M_of_T({v, v, v}, forms, t, threads);
                Row r{{{"T", round12(v)}}, Json(round12(m.value)), clock.seconds()};
                if (m.exact) r.params.push_back({"exact", m.exact->str()});
                rows.push_back(r);
            }
            c.write(render_rows(rows, c.fmt(rows.size() > 1 ? "csv" : "json")));
        } else if (lod->parsed()) {
            ExperimentConfig e = ExperimentConfig::from_json(c.config);
            std::vector<Row> rows;
            for (long double v : scales(c, x, grid)) {
                i64 X = as_integer(v, "X");
                long double Q = q > 0 ? q : std::sqrt(e.q_factor * (long double)X);
                detail::Stopwatch clock;
                DiscrepancyReport d = lod_discrepancy(X, {Q, Q, Q}, e.forms, e.region, e.family, threads);
                long double L = std::log((long double)X);
                rows.push_back({{{"X", X}, {"Q", round12(Q)}, {"terms", d.terms},
                                 {"ratio_to_X2_log3", round12(d.total_discrepancy / ((long double)X * X * L * L * L))}},
                                Json(round12(d.total_discrepancy)),
                                clock.seconds()});
            }
            c.write(render_rows(rows, c.fmt(rows.size() > 1 ? "csv" : "json")));
        } else if (sigma->parsed()) {
            ExperimentConfig e = ExperimentConfig::from_json(c.config);
            u64 cut = prime_cut_of(c, prime_cut);
            EulerProduct E = singular_series(e.forms, e.d, e.D, cut);
            c.write(render_object(interval_json(E.value, E.error_bound(), cut), c.fmt("json")));
        } else if (ch->parsed()) {
            u64 cut = prime_cut_of(c, prime_cut);
            if (h < 1) throw DomainError("ch: h must be >= 1");
            CorrelationConstant k = c_h(u64(h), cut);
            Json j = interval_json(k.value, k.error_bound(), cut);
            j["h"] = h;
            j["f_of_h"] = k.f_of_h.str();
            c.write(render_object(j, c.fmt("json")));
        } else if (constants->parsed()) {
            u64 cut = prime_cut_of(c, prime_cut);
            FormTriple forms = forms_of(c);
            Json j = Json::object();
            auto put = [&](const char* key, long double v, long double err) { j[key] = interval_json(v, err, cut); };
            auto E = singular_series(forms, cut);
            put("singular_series", E.value, E.error_bound());
            auto R = reduction_constant(forms, cut);
            put("reduction_constant", R.value, R.error_bound());
            auto A = averaged_correlation_constant(cut);
            put("averaged_correlation", A.value, A.error_bound());
            auto C1 = c_h(1, cut);
            put("c_1", C1.value, C1.error_bound());
            auto C1p = c1_prime(cut);
            put("c_1_prime", C1p.value, C1p.error_bound());
            auto B = bilinear_constant(cut);
            put("bilinear_c0", B.value, B.error_bound());
            auto N = height_count_constant(cut);
            put("height_count", N.value, N.error_bound());
            if (c.fmt("json") == "csv") {
                std::string s = "name,value,error_bound,prime_cut\n";
                for (auto& [k, v] : j.items())
                    s += k + "," + cell(v["value"]) + "," + cell(v["error_bound"]) + "," + std::to_string(cut) + "\n";
                c.write(s);
            } else {
                c.write(j.dump(2) + "\n");
            }
        } else if (bilinear->parsed()) {
            std::vector<long double> vs;
            if (!grid.empty()) vs = GridSpec::parse(grid).values;
            else if (mode == "n" && !b.empty()) vs = {std::stold(b)};
            else if (mode != "n" && !x.empty()) vs = {std::stold(x)};
            else vs = scales(c, x, grid, mode == "n" ? "B" : "X");
            std::string s;
            Json rows = Json::array();
            if (mode == "reduction") {
                s = "X,n0,n1,boundary_terms,holds\n";
                for (long double v : vs) {
                    ReductionReport r = reduction_check(as_integer(v, "X"), threads);
                    s += std::to_string(r.X) + "," + to_string(r.n0) + "," + to_string(r.n1) + "," +
                         to_string(r.boundary_terms) + ",true\n";
                    rows.push_back(Json{{"X", r.X}, {"n0", exact_json(r.n0)}, {"n1", exact_json(r.n1)},
                                        {"boundary_terms", exact_json(r.boundary_terms)}, {"holds", r.holds}});
                }
            } else {
                s = "X,count,ratio_to_prediction\n";
                long double pred;
                u64 cut = prime_cut_of(c, prime_cut);
                if (mode == "n0") pred = 8 * bilinear_constant(cut).value;
                else pred = height_count_constant(cut).value;
                for (long double v : vs) {
                    i128 n;
                    long double denom;
                    if (mode == "n0") {
                        i64 X = as_integer(v, "X");
                        n = count_N0(X, threads).n0;
                        denom = pred * (long double)X * X * std::log((long double)X);
                    } else {
                        n = count_N(v, threads).n_of_b;
                        denom = pred * v * std::log(v);
                    }
                    long double ratio = denom > 0 ? (long double)n / denom : 0;
                    s += format_real(v) + "," + to_string(n) + "," + format_real(ratio) + "\n";
                    rows.push_back(Json{{"X", round12(v)}, {"count", exact_json(n)}, {"ratio_to_prediction", round12(ratio)}});
                }
            }
            c.write(c.fmt("csv") == "csv" ? s : rows.dump(2) + "\n");
        } else if (experiment->parsed()) {
            ExperimentConfig e = ExperimentConfig::from_json(c.config);
            if (!name.empty()) e.name = name;
            if (prime_cut) e.prime_cut = prime_cut;
            if (!c.config.contains("grid")) throw ConfigError("experiment: the config needs a grid");
            ExperimentOptions o;
            o.threads = threads;
            o.concurrent_points = c.config.value("concurrent_points", false);
            std::string format = c.fmt("json");
            if (!c.out_path.empty())
                o.on_point = [&](const ComparisonReport& r) {
                    ComparisonReport partial = r;
                    partial.completed = false;
                    emit_report(partial, format, c.out_path);
                };
            ComparisonReport r = run_experiment(e, o);
            c.write(render_report(r, format));
            if (!r.completed) {
                std::cerr << "experiment stopped early: " << r.error << "\n";
                return 3;
            }
        } else if (identity->parsed()) {
            if (count < 1 || max_n < 1) throw DomainError("identity-check: count and max must be >= 1");
            std::mt19937_64 rng(seed);
            std::uniform_int_distribution<i64> pick(1, max_n);
            i64 failures = 0;
            Json bad = Json::array();
            for (i64 i = 0; i < count; ++i) {
                Triple n{pick(rng), pick(rng), pick(rng)};
                i128 lhs = i128(tau_of_product(n));
                i128 rhs = tau_product_identity(n);
                if (lhs != rhs) {
                    ++failures;
                    bad.push_back(Json{{"n", n}, {"tau", exact_json(lhs)}, {"identity", exact_json(rhs)}});
                }
            }
            Json j{{"checked", count}, {"failures", failures}, {"seed", seed}, {"max", max_n}};
            if (failures) j["mismatches"] = bad;
            c.write(render_object(j, c.fmt("json")));
            return failures ? 1 : 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const SizeError& e) {
        std::cerr << "budget exceeded: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid number: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
