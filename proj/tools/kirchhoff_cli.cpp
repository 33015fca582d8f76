// Command-line front end: thresholds, gn, solve, moser, sweep.

#include "kirchhoff/kirchhoff.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using nlohmann::json;
using namespace kirchhoff;

constexpr int exit_spec = 2;
constexpr int exit_io = 3;

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw SpecError("config '" + path + "' is not valid JSON: " + e.what());
    }
}

/// Flag value if given on the command line, else the config entry, else the default.
template <class T>
T pick(const CLI::Option* opt, const T& flag, const json& cfg, const char* key, const T& def) {
    if (opt && opt->count() > 0) return flag;
    if (cfg.contains(key)) {
        try {
            return cfg.at(key).get<T>();
        } catch (const json::exception& e) {
            throw SpecError(std::string("config key '") + key + "': " + e.what());
        }
    }
    return def;
}

struct Output {
    std::string dir;
    std::string format;

    /// Writes to DIR/name when --out is set, else to stdout.
    void emit(const std::string& name, const std::string& text) const {
        if (dir.empty()) {
            std::cout << text;
            if (!text.empty() && text.back() != '\n') std::cout << '\n';
            return;
        }
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
        const auto path = (std::filesystem::path(dir) / name).string();
        std::ofstream os(path);
        if (!os) throw IoError("cannot open '" + path + "' for writing");
        os << text;
        os.flush();
        if (!os) throw IoError("write to '" + path + "' failed");
        std::cerr << "wrote " << path << '\n';
    }
};

std::string profile_csv(const RadialFunction& u) {
    std::ostringstream os;
    write_csv(u, os);
    return os.str();
}

std::vector<double> parse_list(const std::string& s, const char* name) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            std::size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw SpecError(std::string("bad number '") + item + "' in --" + name);
        }
    }
    return v;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Normalized solutions of Kirchhoff problems with Sobolev critical growth"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_dir, format = "json";
    std::size_t grid_size = 4000;
    double rmax = 20.0, tol = 1e-5;
    std::uint64_t seed = 0;
    int jobs = 1;
    auto* o_config = app.add_option("--config", config_path, "JSON config; command-line flags take precedence");
    auto* o_grid = app.add_option("--grid-size", grid_size, "radial grid cells");
    auto* o_rmax = app.add_option("--rmax", rmax, "truncation radius (a lower bound when auto sizing is on)");
    auto* o_tol = app.add_option("--tol", tol, "relative residual tolerance");
    auto* o_seed = app.add_option("--seed", seed, "seed for random restarts");
    auto* o_jobs = app.add_option("--jobs", jobs, "worker threads for sweeps");
    auto* o_out = app.add_option("--out", out_dir, "output directory (default: stdout)");
    auto* o_format = app.add_option("--format", format, "csv, json or gnuplot")
                         ->check(CLI::IsMember({"csv", "json", "gnuplot"}));
    (void)o_config;

    int dim = 5;
    double p = 2.9, a = 0.1, b = 0.01, c = 8.0;
    bool b_over_s2 = false;

    auto* th = app.add_subcommand("thresholds", "threshold constants c0, c1, c*");
    auto* th_dim = th->add_option("--dim", dim, "dimension N >= 4");
    auto* th_p = th->add_option("--p", p, "subcritical exponent");
    auto* th_a = th->add_option("--a", a);
    auto* th_b = th->add_option("--b", b);
    th->add_flag("--b-over-s2", b_over_s2, "read b in units of 1/S^2");

    auto* gn = app.add_subcommand("gn", "Gagliardo-Nirenberg ground state by shooting");
    auto* gn_dim = gn->add_option("--dim", dim);
    auto* gn_p = gn->add_option("--p", p);
    std::size_t nodes = 20000;
    auto* gn_nodes = gn->add_option("--nodes", nodes, "RK4 steps on [0, rmax]");

    std::string mode = "min", nonlinearity = "power";
    int restarts = 6;
    double alpha0 = 1.0, beta = 1.0, theta = 1.0;
    auto* so = app.add_subcommand("solve", "constrained minimizer or mountain-pass candidate");
    auto* so_dim = so->add_option("--dim", dim);
    auto* so_p = so->add_option("--p", p);
    auto* so_a = so->add_option("--a", a);
    auto* so_b = so->add_option("--b", b);
    auto* so_c = so->add_option("--c", c, "mass parameter");
    so->add_flag("--b-over-s2", b_over_s2, "read b in units of 1/S^2");
    auto* so_mode = so->add_option("--mode", mode, "min or mp")->check(CLI::IsMember({"min", "mp"}));
    auto* so_restarts = so->add_option("--restarts", restarts);
    auto* so_nl = so->add_option("--nonlinearity", nonlinearity, "power (combined) or exp (N = 2)")
                      ->check(CLI::IsMember({"power", "exp"}));
    so->add_option("--alpha0", alpha0);
    so->add_option("--beta", beta);
    so->add_option("--theta", theta);

    std::string n_list = "100,1000,10000";
    double mo_a = 1.0, mo_b = 1.0, mo_c = 1.0;
    auto* mo = app.add_subcommand("moser", "Moser-sequence bound on the mountain-pass level");
    mo->add_option("--n-list", n_list, "comma-separated Moser indices");
    mo->add_option("--alpha0", alpha0);
    mo->add_option("--beta", beta);
    mo->add_option("--theta", theta);
    mo->add_option("--a", mo_a);
    mo->add_option("--b", mo_b);
    mo->add_option("--c", mo_c);

    std::string sw_p, sw_a, sw_b, sw_c;
    bool c_over_q = false, sw_mp = false;
    auto* sw = app.add_subcommand("sweep", "phase diagram over (p, a, b, c)");
    auto* sw_dim = sw->add_option("--dim", dim);
    auto* sw_po = sw->add_option("--p", sw_p, "comma-separated list");
    auto* sw_ao = sw->add_option("--a", sw_a, "comma-separated list");
    auto* sw_bo = sw->add_option("--b", sw_b, "comma-separated list");
    auto* sw_co = sw->add_option("--c", sw_c, "comma-separated list");
    sw->add_flag("--b-over-s2", b_over_s2, "read b in units of 1/S^2");
    sw->add_flag("--c-over-q", c_over_q, "read c in units of ||Q||_2");
    sw->add_flag("--mountain-pass", sw_mp, "also run the string method per tuple");
    auto* sw_restarts = sw->add_option("--restarts", restarts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_spec;
    }

    try {
        const json cfg = load_config(config_path);
        Output out{pick(o_out, out_dir, cfg, "out", std::string()), pick(o_format, format, cfg, "format", format)};
        SolveParams prm;
        prm.cells = pick(o_grid, grid_size, cfg, "grid_size", prm.cells);
        prm.r_max = pick(o_rmax, rmax, cfg, "rmax", prm.r_max);
        prm.tol = pick(o_tol, tol, cfg, "tol", prm.tol);
        prm.seed = pick(o_seed, seed, cfg, "seed", prm.seed);
        jobs = pick(o_jobs, jobs, cfg, "jobs", 1);

        auto section = [&](const char* name) { return cfg.contains(name) ? cfg.at(name) : json::object(); };

        if (th->parsed()) {
            const json s = section("thresholds");
            dim = pick(th_dim, dim, s, "dim", dim);
            p = pick(th_p, p, s, "p", p);
            a = pick(th_a, a, s, "a", a);
            b = pick(th_b, b, s, "b", b);
            b_over_s2 = b_over_s2 || s.value("b_over_s2", false);
            const double sob = sobolev_constant(dim);
            if (b_over_s2) b /= sob * sob;
            ShootOptions sh;
            sh.truncation_check = false;
            const auto q = GroundStateNorms::from(shoot_ground_state(dim, p, sh));
            out.emit("thresholds.json", compute_thresholds(a, b, p, dim, q, sob).to_json().dump(2));
        } else if (gn->parsed()) {
            const json s = section("gn");
            dim = pick(gn_dim, dim, s, "dim", dim);
            p = pick(gn_p, p, s, "p", p);
            ShootOptions sh;
            sh.steps = pick(gn_nodes, nodes, s, "nodes", sh.steps);
            sh.r_max = pick(o_rmax, rmax, s, "rmax", sh.r_max);
            const auto q = shoot_ground_state(dim, p, sh);
            out.emit("gn.json", q.to_json().dump(2));
            if (!q.identity && !out.dir.empty()) out.emit("gn_profile.csv", profile_csv(q.profile));
        } else if (so->parsed()) {
            const json s = section("solve");
            dim = pick(so_dim, dim, s, "dim", dim);
            p = pick(so_p, p, s, "p", p);
            a = pick(so_a, a, s, "a", a);
            b = pick(so_b, b, s, "b", b);
            c = pick(so_c, c, s, "c", c);
            mode = pick(so_mode, mode, s, "mode", mode);
            nonlinearity = pick(so_nl, nonlinearity, s, "nonlinearity", nonlinearity);
            prm.restarts = pick(so_restarts, restarts, s, "restarts", prm.restarts);
            b_over_s2 = b_over_s2 || s.value("b_over_s2", false);
            if (b_over_s2) {
                const double sob = sobolev_constant(dim);
                b /= sob * sob;
            }
            Model model = nonlinearity == "exp"
                              ? Model{KirchhoffCoefficient::affine(a, b),
                                      Nonlinearity::exp_critical(s.value("alpha0", alpha0), s.value("beta", beta),
                                                                 s.value("theta", theta))}
                              : combined_model(dim, p, a, b);
            if (mode != "min" && mode != "mp") throw SpecError("mode must be min or mp");
            const auto rep = mode == "min" ? minimize_on_sphere(model, c, prm) : mountain_pass(model, c, prm);
            json j = rep.to_json();
            j["model"] = model.to_json();
            j["params"] = prm.to_json();
            j["c"] = c;
            out.emit("solve_report.json", j.dump(2));
            if (rep.candidate && !out.dir.empty()) out.emit("solve_profile.csv", profile_csv(rep.candidate->u));
        } else if (mo->parsed()) {
            const json s = section("moser");
            std::vector<long> ns;
            for (double v : parse_list(s.value("n_list", n_list), "n-list")) {
                if (v != std::floor(v) || v < 2 || v > 9e18) throw SpecError("Moser indices must be integers >= 2");
                ns.push_back(static_cast<long>(v));
            }
            const Model model{KirchhoffCoefficient::affine(s.value("a", mo_a), s.value("b", mo_b)),
                              Nonlinearity::exp_critical(s.value("alpha0", alpha0), s.value("beta", beta),
                                                         s.value("theta", theta))};
            const auto rep = mp_bound_check(model, s.value("c", mo_c), ns);
            if (out.format == "json") {
                out.emit("moser.json", rep.to_json().dump(2));
            } else {
                std::ostringstream os;
                os << "n,max_g,argmax_t,bound,margin\n";
                os.precision(17);
                for (const auto& r : rep.rows)
                    os << r.n << ',' << r.max_g << ',' << r.argmax_t << ',' << r.bound << ',' << r.margin << '\n';
                out.emit("moser.csv", os.str());
            }
        } else if (sw->parsed()) {
            const json s = section("sweep");
            SweepSpec spec = s.empty() ? SweepSpec{} : SweepSpec::from_json(s);
            if (s.empty()) {
                spec.p = ParamRange::list({p});
                spec.a = ParamRange::list({a});
                spec.b = ParamRange::list({b});
            }
            spec.dim = pick(sw_dim, dim, s, "dim", spec.dim);
            if (sw_po->count()) spec.p = ParamRange::list(parse_list(sw_p, "p"));
            if (sw_ao->count()) spec.a = ParamRange::list(parse_list(sw_a, "a"));
            if (sw_bo->count()) spec.b = ParamRange::list(parse_list(sw_b, "b"));
            if (sw_co->count()) spec.c = ParamRange::list(parse_list(sw_c, "c"));
            spec.b_over_sobolev_sq = spec.b_over_sobolev_sq || b_over_s2;
            spec.c_over_q_l2 = spec.c_over_q_l2 || c_over_q;
            spec.classify.mountain_pass = spec.classify.mountain_pass || sw_mp;
            auto& sp = spec.classify.solve;
            if (o_grid->count() || !s.contains("solver")) sp.cells = prm.cells;
            if (o_rmax->count() || !s.contains("solver")) sp.r_max = prm.r_max;
            if (o_tol->count() || !s.contains("solver")) sp.tol = prm.tol;
            if (o_seed->count() || !s.contains("solver")) sp.seed = prm.seed;
            if (sw_restarts->count()) sp.restarts = restarts;
            if (o_jobs->count() || cfg.contains("jobs") || !s.contains("jobs")) spec.jobs = jobs;
            const auto table = run_sweep(spec);
            const auto fmt = report_format_from_string(out.format);
            std::ostringstream os;
            emit_report(table, fmt, os);
            out.emit("sweep" + extension(fmt), os.str());
        }
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return exit_io;
    } catch (const SpecError& e) {
        std::cerr << "spec error: " << e.what() << '\n';
        return exit_spec;
    } catch (const json::exception& e) {
        std::cerr << "spec error: " << e.what() << '\n';
        return exit_spec;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
