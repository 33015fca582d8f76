#pragma once

// Phase-diagram sweeps over (p, a, b, c): one classification per tuple,
// run tuple-parallel and written out as CSV, JSON or gnuplot blocks.

#include "kirchhoff/classify.hpp"
#include "kirchhoff/errors.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

namespace kirchhoff {

/// Either an explicit list or {min, max, count} (linear, or geometric when log is set).
struct ParamRange {
    std::vector<double> values;

    static ParamRange list(std::vector<double> v) { return {std::move(v)}; }

    static ParamRange span(double lo, double hi, std::size_t count, bool log = false) {
        if (count == 0) throw SpecError("range count must be positive");
        if (log && !(lo > 0.0 && hi > 0.0)) throw SpecError("log range needs positive ends");
        ParamRange r;
        for (std::size_t i = 0; i < count; ++i) {
            const double x = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
            r.values.push_back(log ? lo * std::pow(hi / lo, x) : lo + (hi - lo) * x);
        }
        return r;
    }

    static ParamRange from_json(const nlohmann::json& j, const std::string& name) {
        if (j.is_number()) return list({j.get<double>()});
        if (j.is_array()) return list(j.get<std::vector<double>>());
        if (j.is_object()) {
            if (!j.contains("min") || !j.contains("max") || !j.contains("count"))
                throw SpecError("range '" + name + "' needs min, max and count");
            return span(j.at("min").get<double>(), j.at("max").get<double>(), j.at("count").get<std::size_t>(),
                        j.value("log", false));
        }
        throw SpecError("range '" + name + "' must be a number, a list or {min, max, count}");
    }

    nlohmann::json to_json() const { return values; }
};

struct SweepSpec {
    int dim = 5;
    ParamRange p, a, b, c;
    /// Read b in units of 1/S^2.
    bool b_over_sobolev_sq = false;
    /// Read c in units of ||Q||_2.
    bool c_over_q_l2 = false;
    ClassifyOptions classify;
    int jobs = 1;

    void validate() const {
        if (dim < 4 || dim > 10) throw SpecError("sweeps need N in 4..10");
        for (const auto* r : {&p, &a, &b, &c})
            if (r->values.empty()) throw SpecError("sweep ranges must be non-empty");
        for (double v : c.values)
            if (!(v > 0.0)) throw SpecError("c must be positive throughout the sweep");
        for (double v : a.values)
            if (!(v > 0.0)) throw SpecError("a must be positive throughout the sweep");
        for (double v : b.values)
            if (!(v > 0.0)) throw SpecError("b must be positive throughout the sweep");
        if (jobs < 1) throw SpecError("jobs must be at least 1");
        classify.solve.validate();
    }

    static SweepSpec from_json(const nlohmann::json& j) {
        SweepSpec s;
        s.dim = j.value("dim", 5);
        for (auto [key, dst] : {std::pair{"p", &s.p}, {"a", &s.a}, {"b", &s.b}, {"c", &s.c}}) {
            if (!j.contains(key)) throw SpecError(std::string("sweep spec needs '") + key + "'");
            *dst = ParamRange::from_json(j.at(key), key);
        }
        s.b_over_sobolev_sq = j.value("b_over_sobolev_sq", false);
        s.c_over_q_l2 = j.value("c_over_q_l2", false);
        s.jobs = j.value("jobs", 1);
        if (j.contains("solver")) {
            const auto& o = j.at("solver");
            auto& prm = s.classify.solve;
            prm.tol = o.value("tol", prm.tol);
            prm.restarts = o.value("restarts", prm.restarts);
            prm.seed = o.value("seed", prm.seed);
            prm.cells = o.value("cells", prm.cells);
            prm.r_max = o.value("r_max", prm.r_max);
            prm.max_iterations = o.value("max_iterations", prm.max_iterations);
        }
        s.classify.mountain_pass = j.value("mountain_pass", false);
        return s;
    }
};

struct PhaseRecord {
    int dim = 0;
    double p = 0.0, a = 0.0, b = 0.0, c = 0.0;
    std::string branch;
    std::string expectation;
    std::optional<double> c0, c1_lower, c1_upper, c_star;
    double energy_infimum = 0.0;
    std::string min_status;
    std::string mp_status;
    std::optional<double> lambda, multiplier_gap, mass_error, pohozaev_relative;
    std::string agreement = "inconclusive";
    std::string error;

    static const std::vector<std::string>& columns() {
        static const std::vector<std::string> cols{
            "N", "p", "a", "b", "c", "branch", "expectation", "c0", "c1_lower", "c1_upper", "c_star",
            "I_c", "min_status", "mp_status", "lambda", "multiplier_gap", "mass_error", "pohozaev_relative",
            "agreement", "error"};
        return cols;
    }

    nlohmann::json to_json() const {
        auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
        return {{"N", dim},
                {"p", p},
                {"a", a},
                {"b", b},
                {"c", c},
                {"branch", branch},
                {"expectation", expectation},
                {"c0", opt(c0)},
                {"c1_lower", opt(c1_lower)},
                {"c1_upper", opt(c1_upper)},
                {"c_star", opt(c_star)},
                {"I_c", energy_infimum},
                {"min_status", min_status},
                {"mp_status", mp_status},
                {"lambda", opt(lambda)},
                {"multiplier_gap", opt(multiplier_gap)},
                {"mass_error", opt(mass_error)},
                {"pohozaev_relative", opt(pohozaev_relative)},
                {"agreement", agreement},
                {"error", error}};
    }

    static PhaseRecord from_json(const nlohmann::json& j) {
        auto opt = [&](const char* k) -> std::optional<double> {
            if (!j.contains(k) || j.at(k).is_null()) return std::nullopt;
            return j.at(k).get<double>();
        };
        PhaseRecord r;
        r.dim = j.at("N").get<int>();
        r.p = j.at("p").get<double>();
        r.a = j.at("a").get<double>();
        r.b = j.at("b").get<double>();
        r.c = j.at("c").get<double>();
        r.branch = j.at("branch").get<std::string>();
        r.expectation = j.at("expectation").get<std::string>();
        r.c0 = opt("c0");
        r.c1_lower = opt("c1_lower");
        r.c1_upper = opt("c1_upper");
        r.c_star = opt("c_star");
        r.energy_infimum = j.at("I_c").get<double>();
        r.min_status = j.at("min_status").get<std::string>();
        r.mp_status = j.at("mp_status").get<std::string>();
        r.lambda = opt("lambda");
        r.multiplier_gap = opt("multiplier_gap");
        r.mass_error = opt("mass_error");
        r.pohozaev_relative = opt("pohozaev_relative");
        r.agreement = j.at("agreement").get<std::string>();
        agreement_from_string(r.agreement);
        r.error = j.at("error").get<std::string>();
        return r;
    }

    bool operator==(const PhaseRecord&) const = default;
};

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

struct SweepTuple {
    double p, a, b, c;
    std::size_t group;
};

}  // namespace detail

inline std::vector<PhaseRecord> run_sweep(const SweepSpec& spec) {
    spec.validate();
    const double sobolev = sobolev_constant(spec.dim);
    // Thresholds once per (p, a, b); the GN norms once per p.
    std::map<double, GroundStateNorms> norms;
    std::vector<std::tuple<double, double, double>> groups;
    std::vector<std::optional<ThresholdSet>> thresholds;
    std::vector<std::string> group_errors;
    std::vector<detail::SweepTuple> tuples;
    for (double p : spec.p.values) {
        std::optional<GroundStateNorms> q;
        std::string err;
        try {
            if (!norms.count(p)) {
                ShootOptions so;
                so.truncation_check = false;
                norms[p] = GroundStateNorms::from(shoot_ground_state(spec.dim, p, so));
            }
            q = norms[p];
        } catch (const std::exception& e) {
            err = e.what();
        }
        for (double a : spec.a.values)
            for (double b_in : spec.b.values) {
                const double b = spec.b_over_sobolev_sq ? b_in / (sobolev * sobolev) : b_in;
                std::optional<ThresholdSet> t;
                std::string gerr = err;
                if (q) {
                    try {
                        t = compute_thresholds(a, b, p, spec.dim, *q, sobolev);
                    } catch (const std::exception& e) {
                        gerr = e.what();
                    }
                }
                const std::size_t g = groups.size();
                groups.emplace_back(p, a, b);
                thresholds.push_back(t);
                group_errors.push_back(gerr);
                for (double c_in : spec.c.values) {
                    const double c = spec.c_over_q_l2 && q ? c_in * q->l2 : c_in;
                    tuples.push_back({p, a, b, c, g});
                }
            }
    }

    std::vector<PhaseRecord> out(tuples.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tuples.size()) return;
            const auto& tp = tuples[i];
            PhaseRecord& r = out[i];
            r.dim = spec.dim;
            r.p = tp.p;
            r.a = tp.a;
            r.b = tp.b;
            r.c = tp.c;
            const auto& t = thresholds[tp.group];
            if (t) {
                r.c0 = t->c0;
                r.c1_lower = t->c1_lower;
                r.c1_upper = t->c1_upper;
                r.c_star = t->c_star;
            }
            r.error = group_errors[tp.group];
            try {
                ClassifyOptions opt = spec.classify;
                opt.solve.seed = spec.classify.solve.seed + i;
                const Model model = combined_model(spec.dim, tp.p, tp.a, tp.b);
                const auto cl = classify(model, tp.c, opt, t ? t : std::optional<ThresholdSet>{});
                r.branch = cl.predicted.branch;
                r.expectation = to_string(cl.predicted.expect);
                r.energy_infimum = cl.energy_infimum;
                r.min_status = to_string(cl.min_status);
                r.mp_status = cl.mp_status ? to_string(*cl.mp_status) : "";
                r.agreement = to_string(cl.agreement);
                if (cl.candidate) {
                    const auto& cd = *cl.candidate;
                    r.lambda = cd.lambda;
                    r.multiplier_gap = cd.multiplier_gap;
                    r.mass_error = std::abs(cd.energy.mass_l2 - tp.c * tp.c) / (tp.c * tp.c);
                    r.pohozaev_relative = cd.pohozaev_residual / cd.pohozaev_scale;
                }
            } catch (const std::exception& e) {
                r.error = r.error.empty() ? e.what() : r.error + "; " + e.what();
                r.agreement = "inconclusive";
            }
        }
    };
    const int jobs = std::max(1, std::min<int>(spec.jobs, static_cast<int>(tuples.size())));
    std::vector<std::thread> pool;
    for (int k = 1; k < jobs; ++k) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    return out;
}

enum class ReportFormat { csv, json, gnuplot };

inline ReportFormat report_format_from_string(const std::string& s) {
    if (s == "csv") return ReportFormat::csv;
    if (s == "json") return ReportFormat::json;
    if (s == "gnuplot") return ReportFormat::gnuplot;
    throw SpecError("unknown report format '" + s + "'");
}

inline std::string extension(ReportFormat f) {
    switch (f) {
        case ReportFormat::csv: return ".csv";
        case ReportFormat::json: return ".json";
        default: return ".dat";
    }
}

inline void write_csv(const std::vector<PhaseRecord>& table, std::ostream& os) {
    const auto& cols = PhaseRecord::columns();
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << '\n';
    auto opt = [](const std::optional<double>& v) { return v ? detail::format_double(*v) : std::string(); };
    for (const auto& r : table) {
        os << r.dim << ',' << detail::format_double(r.p) << ',' << detail::format_double(r.a) << ','
           << detail::format_double(r.b) << ',' << detail::format_double(r.c) << ',' << detail::csv_field(r.branch)
           << ',' << r.expectation << ',' << opt(r.c0) << ',' << opt(r.c1_lower) << ',' << opt(r.c1_upper) << ','
           << opt(r.c_star) << ',' << detail::format_double(r.energy_infimum) << ',' << r.min_status << ','
           << r.mp_status << ',' << opt(r.lambda) << ',' << opt(r.multiplier_gap) << ',' << opt(r.mass_error) << ','
           << opt(r.pohozaev_relative) << ',' << r.agreement << ',' << detail::csv_field(r.error) << '\n';
    }
}

inline nlohmann::json table_to_json(const std::vector<PhaseRecord>& table) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : table) j.push_back(r.to_json());
    return j;
}

inline std::vector<PhaseRecord> table_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw SpecError("phase table JSON must be an array");
    std::vector<PhaseRecord> t;
    for (const auto& r : j) t.push_back(PhaseRecord::from_json(r));
    return t;
}

/// One block per (N, p, a, b), rows "c I_c branch", blocks separated by two blank lines.
inline std::size_t write_gnuplot(const std::vector<PhaseRecord>& table, std::ostream& os) {
    std::vector<std::tuple<int, double, double, double>> order;
    std::map<std::tuple<int, double, double, double>, std::vector<const PhaseRecord*>> blocks;
    for (const auto& r : table) {
        const auto key = std::make_tuple(r.dim, r.p, r.a, r.b);
        if (!blocks.count(key)) order.push_back(key);
        blocks[key].push_back(&r);
    }
    bool first = true;
    for (const auto& key : order) {
        if (!first) os << "\n\n";
        first = false;
        os << "# N=" << std::get<0>(key) << " p=" << detail::format_double(std::get<1>(key))
           << " a=" << detail::format_double(std::get<2>(key)) << " b=" << detail::format_double(std::get<3>(key))
           << "\n# c I_c branch\n";
        for (const auto* r : blocks[key])
            os << detail::format_double(r->c) << ' ' << detail::format_double(r->energy_infimum) << " \""
               << r->branch << "\"\n";
    }
    return order.size();
}

inline void emit_report(const std::vector<PhaseRecord>& table, ReportFormat format, std::ostream& os) {
    if (table.empty()) throw SpecError("cannot emit an empty phase table");
    switch (format) {
        case ReportFormat::csv: write_csv(table, os); break;
        case ReportFormat::json: os << table_to_json(table).dump(2) << '\n'; break;
        case ReportFormat::gnuplot: write_gnuplot(table, os); break;
    }
}

inline void emit_report(const std::vector<PhaseRecord>& table, ReportFormat format, const std::string& path) {
    if (table.empty()) throw SpecError("cannot emit an empty phase table");
    std::ofstream os(path);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    emit_report(table, format, os);
    os.flush();
    if (!os) throw IoError("write to '" + path + "' failed");
}

}  // namespace kirchhoff
