#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bilinear.hpp"
#include "config.hpp"
#include "divisor_sums.hpp"
#include "fit.hpp"
#include "singular_series.hpp"

namespace divforms {

struct TrendPoint {
    long double x = 0;
    long double value = 0;
    std::optional<i128> exact;  // set for exact counts
    long double ratio = 0;
};

struct ComparisonReport {
    std::string experiment;
    std::string fit_method;  // "log-poly", "last-point" or "none"
    std::optional<AsymptoticFit> fit;
    std::optional<long double> fitted_leading, predicted_leading, predicted_error, ratio;
    std::optional<bool> monotone_tail;
    std::vector<TrendPoint> trend;
    std::vector<std::pair<std::string, long double>> diagnostics;
    bool completed = true;
    std::string error;
};

// |ratio - 1| nonincreasing over the last three points
inline std::optional<bool> monotone_tail(const std::vector<TrendPoint>& trend) {
    if (trend.size() < 3) return std::nullopt;
    std::size_t n = trend.size();
    long double a = std::fabs(trend[n - 3].ratio - 1), b = std::fabs(trend[n - 2].ratio - 1),
                c = std::fabs(trend[n - 1].ratio - 1);
    return a >= b && b >= c;
}

struct ExperimentConfig {
    std::string name;
    FormTriple forms;
    Region region = Region::positive_unit_square();
    Triple d{1, 1, 1}, D{1, 1, 1};
    ValuePolicy policy;
    GridSpec grid;
    long double alpha = 0.8L;     // H = ceil(X^alpha)
    long double q_factor = 2.0L;  // Q_i = sqrt(q_factor X)
    RegionFamily family = RegionFamily::large_third;
    u64 prime_cut = 100'000;

    static ExperimentConfig from_json(const Json& j) {
        ExperimentConfig c;
        if (!j.is_object()) throw ConfigError("config: expected a JSON object");
        if (j.contains("experiment") && !j["experiment"].is_string()) throw ConfigError("experiment: expected a name");
        c.name = j.value("experiment", std::string());
        if (j.contains("forms")) c.forms = config::forms(j["forms"]);
        if (j.contains("region")) c.region = config::region(j["region"]);
        if (j.contains("d")) c.d = config::triple(j["d"], "d");
        if (j.contains("D")) c.D = config::triple(j["D"], "D");
        if (j.contains("policy")) c.policy = config::policy(j["policy"]);
        if (j.contains("grid")) c.grid = config::grid(j["grid"]);
        if (j.contains("alpha")) c.alpha = config::real(j["alpha"], "alpha");
        if (j.contains("q_factor")) c.q_factor = config::real(j["q_factor"], "q_factor");
        if (j.contains("prime_cut")) c.prime_cut = u64(config::integer(j["prime_cut"], "prime_cut"));
        if (j.contains("family")) {
            if (!j["family"].is_string()) throw ConfigError("family: expected constant or large_third");
            std::string f = j["family"].get<std::string>();
            if (f == "constant") c.family = RegionFamily::constant;
            else if (f == "large_third") c.family = RegionFamily::large_third;
            else throw ConfigError("family: expected constant or large_third");
        }
        return c;
    }
};

struct ExperimentOptions {
    unsigned threads = 1;
    bool concurrent_points = false;  // evaluate grid points side by side, one worker each
    std::function<void(const ComparisonReport&)> on_point;
};

// smallest integer >= X^alpha; values within 1e-9 relative of an integer
// are taken as that integer so that 10^5^0.8 gives 10^4
inline i64 ceil_power(i64 X, long double alpha) {
    long double v = std::pow((long double)X, alpha);
    long double r = std::round(v);
    if (std::fabs(v - r) <= 1e-9L * r) return i64(r);
    return i64(std::ceil(v));
}

namespace detail {

struct PointValue {
    long double value = 0;
    std::optional<i128> exact;
    long double aux = 0;  // experiment-specific second quantity
};

inline std::vector<std::string> experiment_names() {
    return {"theorem1", "theorem2", "theorem3-special", "theorem4", "lod", "mt-leading", "bilinear-n0"};
}

}  // namespace detail

inline ComparisonReport run_experiment(const ExperimentConfig& cfg, ExperimentOptions opt = {}) {
    ComparisonReport rep;
    rep.experiment = cfg.name;
    const std::string& name = cfg.name;
    auto names = detail::experiment_names();
    if (std::find(names.begin(), names.end(), name) == names.end())
        throw ConfigError("unknown experiment '" + name + "'");
    cfg.grid.check();

    // prediction, normalisation x -> scale(x) with value / scale -> leading
    // constant, and fit shape value ~ x^a (log x)^k
    std::function<long double(long double)> scale;
    long double a = 0;
    int k = 0;
    bool fit_possible = true;
    if (name == "theorem1" || name == "theorem3-special") {
        EulerProduct E = name == "theorem1" ? singular_series(cfg.forms, cfg.prime_cut)
                                            : singular_series(cfg.forms, cfg.d, cfg.D, cfg.prime_cut);
        // T(X) always sums over the box (0, X]^2
        long double vol = name == "theorem1" ? 1.0L : cfg.region.volume;
        rep.predicted_leading = vol * E.value;
        rep.predicted_error = vol * E.error_bound();
        scale = [](long double x) { long double L = std::log(x); return x * x * L * L * L; };
        a = 2;
        k = 3;
    } else if (name == "theorem2") {
        EulerProduct E = averaged_correlation_constant(cfg.prime_cut);
        rep.predicted_leading = E.value;
        rep.predicted_error = E.error_bound();
        long double alpha = cfg.alpha;
        scale = [alpha](long double x) {
            long double L = std::log(x);
            return x * (long double)ceil_power(i64(x), alpha) * L * L * L;
        };
        fit_possible = false;
    } else if (name == "theorem4") {
        Interval c = height_count_constant(cfg.prime_cut);
        rep.predicted_leading = c.value;
        rep.predicted_error = c.error_bound();
        scale = [](long double x) { return x * std::log(x); };
        a = 1;
        k = 1;
    } else if (name == "bilinear-n0") {
        EulerProduct E = bilinear_constant(cfg.prime_cut);
        rep.predicted_leading = 8 * E.value;
        rep.predicted_error = 8 * E.error_bound();
        scale = [](long double x) { return x * x * std::log(x); };
        a = 2;
        k = 1;
    } else if (name == "mt-leading") {
        EulerProduct E = singular_series(cfg.forms, cfg.prime_cut);
        rep.predicted_leading = E.value;
        rep.predicted_error = E.error_bound();
        scale = [](long double x) { long double L = std::log(x); return L * L * L; };
        a = 0;
        k = 3;
    } else {  // lod: no prediction, ratio is discrepancy / (X^2 (log X)^3)
        scale = [](long double x) { long double L = std::log(x); return x * x * L * L * L; };
        fit_possible = false;
    }

    auto evaluate = [&](long double xv, unsigned threads) -> detail::PointValue {
        detail::PointValue pv;
        i64 X = i64(std::llround(xv));
        if (name == "theorem1") {
            i128 fw = 0;
            SumResult r = T_of_X(X, cfg.forms, {threads, nullptr}, &fw);
            pv.exact = r.value;
            pv.aux = (long double)fw;
        } else if (name == "theorem3-special") {
            SumResult r = S_of({cfg.forms, cfg.region, X, cfg.d, cfg.D, cfg.policy}, {threads, nullptr});
            pv.exact = r.value;
        } else if (name == "theorem2") {
            i64 H = ceil_power(X, cfg.alpha);
            ArithTables t = build_tables(u64(X + H));
            AveragedCorrelation ac = sigma1_sigma2(X, H, t, cfg.prime_cut, threads);
            pv.exact = ac.sigma1;
            pv.aux = (long double)ac.sigma1 / ac.sigma2_predicted;
        } else if (name == "theorem4") {
            pv.exact = count_N(xv, threads).n_of_b;
        } else if (name == "bilinear-n0") {
            BilinearCount c = count_N0(X, threads);
            pv.exact = c.n0;
            pv.aux = (long double)c.boundary_terms / ((long double)X * X);
        } else if (name == "mt-leading") {
            ArithTables t = build_tables(u64(std::max<i64>(X, 2)));
            pv.value = M_of_T({xv, xv, xv}, cfg.forms, t, threads).value;
        } else {
            long double q = std::sqrt(cfg.q_factor * xv);
            pv.value = lod_discrepancy(X, {q, q, q}, cfg.forms, cfg.region, cfg.family, threads).total_discrepancy;
        }
        if (pv.exact) pv.value = (long double)*pv.exact;
        return pv;
    };

    std::vector<detail::PointValue> values;
    auto record = [&](long double xv, const detail::PointValue& pv) {
        TrendPoint tp;
        tp.x = xv;
        tp.value = pv.value;
        tp.exact = pv.exact;
        long double norm = pv.value / scale(xv);
        tp.ratio = rep.predicted_leading ? norm / *rep.predicted_leading : norm;
        rep.trend.push_back(tp);
        values.push_back(pv);
        if (opt.on_point) opt.on_point(rep);
    };

    const auto& xs = cfg.grid.values;
    try {
        if (opt.concurrent_points && xs.size() > 1) {
            std::vector<detail::PointValue> slots(xs.size());
            parallel_chunks(xs.size(), opt.threads, [&](std::size_t c) { slots[c] = evaluate(xs[c], 1); });
            for (std::size_t i = 0; i < xs.size(); ++i) record(xs[i], slots[i]);
        } else {
            for (long double xv : xs) record(xv, evaluate(xv, opt.threads));
        }
    } catch (const Error& e) {
        rep.completed = false;
        rep.error = e.what();
    }

    // fit, or fall back to the normalised value at the largest scale
    if (fit_possible && rep.trend.size() >= std::size_t(k) + 2) {
        std::vector<std::pair<long double, long double>> pts;
        for (auto& t : rep.trend) pts.push_back({t.x, t.value});
        rep.fit = fit_log_poly(pts, a, k);
        rep.fit_method = "log-poly";
        rep.fitted_leading = rep.fit->leading();
    } else if (!rep.trend.empty() && rep.predicted_leading) {
        rep.fit_method = "last-point";
        rep.fitted_leading = rep.trend.back().ratio * *rep.predicted_leading;
    } else {
        rep.fit_method = "none";
    }
    if (rep.fitted_leading && rep.predicted_leading) rep.ratio = *rep.fitted_leading / *rep.predicted_leading;
    rep.monotone_tail = monotone_tail(rep.trend);

    if (!values.empty()) {
        auto& diag = rep.diagnostics;
        if (name == "theorem1") {
            // the restricted sum and the unrestricted product sum have different constants
            EulerProduct red = reduction_constant(cfg.forms, cfg.prime_cut);
            diag.push_back({"reduction_constant", red.value});
            if (rep.fitted_leading) diag.push_back({"fitted_over_reduction_constant", *rep.fitted_leading / red.value});
            diag.push_back({"last_ratio_to_reduction_constant", rep.trend.back().value / scale(rep.trend.back().x) / red.value});
            if (rep.trend.size() >= 5) {
                std::vector<std::pair<long double, long double>> pts;
                for (std::size_t i = 0; i < values.size(); ++i) pts.push_back({rep.trend[i].x, values[i].aux});
                AsymptoticFit f = fit_log_poly(pts, 2, 3);
                diag.push_back({"factorwise_fit_leading", f.leading()});
                diag.push_back({"factorwise_fit_over_prediction", f.leading() / *rep.predicted_leading});
            }
        } else if (name == "theorem2") {
            diag.push_back({"last_sigma1_over_sigma2", values.back().aux});
            diag.push_back({"last_H", (long double)ceil_power(i64(std::llround(rep.trend.back().x)), cfg.alpha)});
        } else if (name == "bilinear-n0") {
            long double mx = 0;
            for (auto& v : values) mx = std::max(mx, v.aux);
            diag.push_back({"max_boundary_over_X2", mx});
        }
    }
    return rep;
}

// ---- reporting ----

// 12 significant digits, fixed across platforms for a given long double
inline std::string format_real(long double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12Lg", v);
    return buf;
}

inline double round12(long double v) { return std::stod(format_real(v)); }

inline Json real_or_null(const std::optional<long double>& v) {
    return v ? Json(round12(*v)) : Json(nullptr);
}

inline Json exact_json(i128 v) {
    if (v >= std::numeric_limits<i64>::min() && v <= std::numeric_limits<i64>::max()) return Json(i64(v));
    return Json(to_string(v));
}

inline Json report_json(const ComparisonReport& r) {
    Json j;
    j["experiment"] = r.experiment;
    j["completed"] = r.completed;
    j["error"] = r.completed ? Json(nullptr) : Json(r.error);
    j["fit_method"] = r.fit_method;
    if (r.fit) {
        Json f;
        f["a"] = round12(r.fit->a);
        f["k"] = r.fit->k;
        f["coefficients"] = Json::array();
        for (auto c : r.fit->coefficients) f["coefficients"].push_back(round12(c));
        f["residuals"] = Json::array();
        for (auto c : r.fit->residuals) f["residuals"].push_back(round12(c));
        j["fit"] = f;
    } else {
        j["fit"] = nullptr;
    }
    j["fitted_leading"] = real_or_null(r.fitted_leading);
    j["predicted_leading"] = real_or_null(r.predicted_leading);
    j["predicted_error"] = real_or_null(r.predicted_error);
    j["ratio"] = real_or_null(r.ratio);
    j["monotone_tail"] = r.monotone_tail ? Json(*r.monotone_tail) : Json(nullptr);
    j["diagnostics"] = Json::object();
    for (auto& [k, v] : r.diagnostics) j["diagnostics"][k] = round12(v);
    j["trend"] = Json::array();
    for (auto& t : r.trend) {
        Json p;
        p["x"] = round12(t.x);
        p["value"] = t.exact ? exact_json(*t.exact) : Json(round12(t.value));
        p["ratio"] = round12(t.ratio);
        j["trend"].push_back(p);
    }
    return j;
}

inline std::string report_csv(const ComparisonReport& r) {
    std::string s = "x,value,ratio\n";
    for (auto& t : r.trend)
        s += format_real(t.x) + "," + (t.exact ? to_string(*t.exact) : format_real(t.value)) + "," + format_real(t.ratio) + "\n";
    return s;
}

inline std::string render_report(const ComparisonReport& r, const std::string& format) {
    if (format == "json") return report_json(r).dump(2) + "\n";
    if (format == "csv") return report_csv(r);
    throw ConfigError("unknown format '" + format + "' (expected csv or json)");
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << text;
    out.flush();
    if (!out) throw Error("write to '" + path + "' failed");
}

inline void emit_report(const ComparisonReport& r, const std::string& format, const std::string& path) {
    write_text(path, render_report(r, format));
}

// inverse of report_json, for the documented schema
inline ComparisonReport parse_report(const Json& j) {
    ComparisonReport r;
    auto opt_real = [](const Json& v) -> std::optional<long double> {
        if (v.is_null()) return std::nullopt;
        return v.get<long double>();
    };
    try {
        r.experiment = j.at("experiment").get<std::string>();
        r.completed = j.at("completed").get<bool>();
        if (!j.at("error").is_null()) r.error = j["error"].get<std::string>();
        r.fit_method = j.at("fit_method").get<std::string>();
        if (!j.at("fit").is_null()) {
            AsymptoticFit f;
            f.a = j["fit"].at("a").get<long double>();
            f.k = j["fit"].at("k").get<int>();
            for (auto& c : j["fit"].at("coefficients")) f.coefficients.push_back(c.get<long double>());
            for (auto& c : j["fit"].at("residuals")) f.residuals.push_back(c.get<long double>());
            r.fit = f;
        }
        r.fitted_leading = opt_real(j.at("fitted_leading"));
        r.predicted_leading = opt_real(j.at("predicted_leading"));
        r.predicted_error = opt_real(j.at("predicted_error"));
        r.ratio = opt_real(j.at("ratio"));
        if (!j.at("monotone_tail").is_null()) r.monotone_tail = j["monotone_tail"].get<bool>();
        for (auto& [k, v] : j.at("diagnostics").items()) r.diagnostics.push_back({k, v.get<long double>()});
        for (auto& p : j.at("trend")) {
            TrendPoint t;
            t.x = p.at("x").get<long double>();
            const Json& v = p.at("value");
            if (v.is_number_integer()) {
                t.exact = i128(v.get<i64>());
                t.value = (long double)*t.exact;
            } else if (v.is_string()) {
                i128 acc = 0;
                std::string s = v.get<std::string>();
                bool neg = !s.empty() && s[0] == '-';
                for (std::size_t i = neg; i < s.size(); ++i) acc = acc * 10 + (s[i] - '0');
                t.exact = neg ? -acc : acc;
                t.value = (long double)*t.exact;
            } else {
                t.value = v.get<long double>();
            }
            t.ratio = p.at("ratio").get<long double>();
            r.trend.push_back(t);
        }
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("report: ") + e.what());
    }
    return r;
}

}  // namespace divforms
