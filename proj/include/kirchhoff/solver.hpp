#pragma once

// Critical points of I restricted to the mass sphere S_c = {||u||_2 = c}:
// constrained minimizers by preconditioned projected descent, mountain-pass
// saddles by a climbing string, both finished with a bordered Newton solve
// of -M(D) Delta u = lambda u + f(u), ||u||_2^2 = c^2.

#include "kirchhoff/errors.hpp"
#include "kirchhoff/functional.hpp"
#include "kirchhoff/gn_ground_state.hpp"
#include "kirchhoff/models.hpp"
#include "kirchhoff/omega_thresholds.hpp"
#include "kirchhoff/radial_grid.hpp"
#include "kirchhoff/tridiag.hpp"

#include <boost/math/tools/roots.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace kirchhoff {

struct SolveParams {
    /// Relative tolerance for the PDE residual and the Pohozaev residual.
    double tol = 1e-5;
    std::size_t max_iterations = 6000;
    /// First trial step of the preconditioned descent.
    double step = 1.0;
    /// Backtracking floor; reaching it ends the restart.
    double step_floor = 1e-12;
    /// Tolerance of |G| at the Pohozaev projection root.
    double projection_tol = 1e-10;
    /// Number of initial profiles tried (deterministic widths first, then random).
    int restarts = 6;
    std::vector<double> widths{0.5, 1.0, 2.0, 4.0};
    bool include_trial_profile = true;
    std::uint64_t seed = 0;

    double r_max = 20.0;
    std::size_t cells = 4000;
    double stretch = RadialGrid::default_stretch;
    /// Enlarge r_max from the trial-family length scale when it is larger.
    bool auto_r_max = true;

    /// Relative residual at which descent hands over to Newton.
    double newton_switch = 1e-3;
    std::size_t newton_iterations = 100;
    /// Largest admissible mass fraction beyond 0.9 r_max for a converged candidate.
    double max_tail_fraction = 1e-8;
    double min_grad_sq = 1e-6;

    int beads = 32;
    std::size_t string_iterations = 400;
    /// The string runs on a grid e^{spread} times wider than the endpoint's, reaching T(u0, -spread).
    double string_spread = 2.5;
    /// Cells of the string grid; 0 means twice the solver cells.
    std::size_t string_cells = 0;

    void validate() const {
        if (!(tol > 0.0) || !(projection_tol > 0.0) || !(step > 0.0) || !(step_floor > 0.0))
            throw SpecError("solver tolerances and steps must be positive");
        if (max_iterations == 0 || max_iterations > 10000000) throw SpecError("max_iterations out of range");
        if (restarts < 1) throw SpecError("at least one restart is needed");
        if (beads < 3) throw SpecError("the string needs at least 3 beads");
        for (double w : widths)
            if (!(w > 0.0)) throw SpecError("initial widths must be positive");
    }

    nlohmann::json to_json() const {
        return {{"tol", tol},
                {"max_iterations", max_iterations},
                {"step", step},
                {"restarts", restarts},
                {"widths", widths},
                {"seed", seed},
                {"r_max", r_max},
                {"cells", cells},
                {"stretch", stretch},
                {"auto_r_max", auto_r_max},
                {"beads", beads}};
    }
};

enum class SolveStatus { converged_minimizer, converged_mountain_pass, no_nontrivial_solution_found, diverged };

inline std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::converged_minimizer: return "converged_minimizer";
        case SolveStatus::converged_mountain_pass: return "converged_mountain_pass";
        case SolveStatus::no_nontrivial_solution_found: return "no_nontrivial_solution_found";
        default: return "diverged";
    }
}

/// Outcome of the acceptance filters on one candidate.
struct FilterVerdict {
    bool pass = false;
    std::string reason;
};

struct RestartRecord {
    std::string start;
    double final_energy = 0.0;
    double relative_residual = 0.0;
    std::size_t iterations = 0;
    bool polished = false;
    FilterVerdict verdict;
};

struct SolveReport {
    SolveStatus status = SolveStatus::no_nontrivial_solution_found;
    std::optional<CriticalPointCandidate> candidate;
    /// Mountain-pass level estimate (max along the final string).
    std::optional<double> path_level;
    /// Lowest energy seen on S_c, including the vanishing limit along fibers.
    double energy_infimum = 0.0;
    double r_max = 0.0;
    std::size_t iterations = 0;
    std::vector<double> residual_history;
    std::vector<RestartRecord> restarts;
    /// Every candidate that passed the filters (one per successful restart).
    std::vector<CriticalPointCandidate> accepted;
    std::string note;

    nlohmann::json to_json() const {
        nlohmann::json j = {{"status", to_string(status)},
                            {"energy_infimum", energy_infimum},
                            {"r_max", r_max},
                            {"iterations", iterations},
                            {"note", note}};
        j["candidate"] = candidate ? candidate->to_json() : nlohmann::json(nullptr);
        j["path_level"] = path_level ? nlohmann::json(*path_level) : nlohmann::json(nullptr);
        nlohmann::json rs = nlohmann::json::array();
        for (const auto& r : restarts)
            rs.push_back({{"start", r.start},
                          {"final_energy", r.final_energy},
                          {"relative_residual", r.relative_residual},
                          {"iterations", r.iterations},
                          {"polished", r.polished},
                          {"accepted", r.verdict.pass},
                          {"reason", r.verdict.reason}});
        j["restarts"] = rs;
        j["residual_history"] = residual_history;
        return j;
    }
};

namespace detail {

/// Discrete operators on the free nodes r_0..r_{K-1}.
struct Discretization {
    GridPtr grid;
    Tridiagonal stiff;
    std::vector<double> w;
    std::size_t n = 0;

    explicit Discretization(GridPtr g) : grid(std::move(g)), stiff(stiffness(*grid)) {
        n = grid->size() - 1;
        w.assign(grid->weights().begin(), grid->weights().begin() + n);
    }
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline std::vector<double> free_values(const RadialFunction& u) {
    return {u.values().begin(), u.values().end() - 1};
}

inline RadialFunction from_free(const Discretization& d, const std::vector<double>& x) {
    std::vector<double> v(x);
    v.push_back(0.0);
    return RadialFunction(d.grid, std::move(v));
}

/// Euclidean gradient of the discrete energy: M(D) K u - W f(u).
inline std::vector<double> euclidean_gradient(const Model& model, const Discretization& d,
                                              const std::vector<double>& u, double* dn_out = nullptr) {
    const auto ku = d.stiff.apply(u);
    const double dn = dot(u, ku);
    const double m = model.coefficient.M(dn);
    std::vector<double> e(d.n);
    for (std::size_t i = 0; i < d.n; ++i) e[i] = m * ku[i] - d.w[i] * model.nonlinearity.f(u[i]);
    if (dn_out) *dn_out = dn;
    return e;
}

inline double discrete_energy(const Model& model, const Discretization& d, const std::vector<double>& u) {
    const double dn = dot(u, d.stiff.apply(u));
    double pot = 0.0;
    for (std::size_t i = 0; i < d.n; ++i) pot += d.w[i] * model.nonlinearity.F(u[i]);
    return 0.5 * model.coefficient.M_hat(dn) - pot;
}

inline double safe_energy(const Model& model, const Discretization& d, const std::vector<double>& u) {
    try {
        return discrete_energy(model, d, u);
    } catch (const RangeError&) {
        return std::numeric_limits<double>::infinity();
    }
}

inline double weighted_mass(const Discretization& d, const std::vector<double>& u) {
    double s = 0.0;
    for (std::size_t i = 0; i < d.n; ++i) s += d.w[i] * u[i] * u[i];
    return s;
}

inline void renormalize(const Discretization& d, std::vector<double>& u, double c) {
    const double s = c / std::sqrt(weighted_mass(d, u));
    for (double& v : u) v *= s;
}

/// Relative W^{-1}-norm of the constrained residual and the multiplier estimate.
struct ResidualInfo {
    double lambda = 0.0;
    double residual = 0.0;  // ||W^{-1} e - lambda u||_W
    double h1 = 0.0;
    double relative() const { return h1 > 0.0 ? residual / h1 : residual; }
};

inline ResidualInfo residual_info(const Model& model, const Discretization& d, const std::vector<double>& u,
                                  const std::vector<double>& e, double dn) {
    ResidualInfo r;
    const double mu = weighted_mass(d, u);
    r.lambda = dot(u, e) / mu;
    double s = 0.0;
    for (std::size_t i = 0; i < d.n; ++i) {
        const double v = e[i] / d.w[i] - r.lambda * u[i];
        s += d.w[i] * v * v;
    }
    r.residual = std::sqrt(s);
    r.h1 = std::sqrt(dn + mu);
    (void)model;
    return r;
}

struct DescentResult {
    std::vector<double> u;
    double energy = 0.0;
    double relative_residual = 0.0;
    std::size_t iterations = 0;
    bool reached_switch = false;
    bool vanishing = false;
    std::vector<double> history;
};

/// Preconditioned projected gradient descent on S_c with Armijo backtracking.
inline DescentResult descend(const Model& model, const Discretization& d, std::vector<double> u, double c,
                             const SolveParams& prm, std::size_t max_iter, double switch_tol) {
    DescentResult out;
    renormalize(d, u, c);
    double en = safe_energy(model, d, u);
    double tau = prm.step;
    const auto& r = d.grid->nodes();
    std::size_t tail_run = 0;
    for (std::size_t it = 0; it < max_iter; ++it) {
        double dn = 0.0;
        const auto e = euclidean_gradient(model, d, u, &dn);
        const auto ri = residual_info(model, d, u, e, dn);
        out.relative_residual = ri.relative();
        if (it % 10 == 0) out.history.push_back(out.relative_residual);
        out.iterations = it;
        if (out.relative_residual <= switch_tol) {
            out.reached_switch = true;
            break;
        }
        // Escaping mass means the iterate is vanishing into the truncation boundary.
        double tail = 0.0;
        for (std::size_t i = 0; i < d.n; ++i)
            if (r[i] >= 0.9 * d.grid->r_max()) tail += d.w[i] * u[i] * u[i];
        tail_run = tail > 1e-3 * c * c ? tail_run + 1 : 0;
        if (tail_run > 100) {
            out.vanishing = true;
            break;
        }
        const double m = model.coefficient.M(dn);
        const double sigma = std::abs(ri.lambda) + 1e-8 * m;
        Tridiagonal p = d.stiff;
        for (std::size_t i = 0; i < d.n; ++i) p.diag[i] = m * p.diag[i] + sigma * d.w[i];
        for (double& o : p.off) o *= m;
        std::vector<double> xi(e), eta(d.n);
        for (std::size_t i = 0; i < d.n; ++i) eta[i] = d.w[i] * u[i];
        solve_in_place(p, {&xi, &eta});
        double wxi = 0.0, weta = 0.0;
        for (std::size_t i = 0; i < d.n; ++i) {
            wxi += d.w[i] * u[i] * xi[i];
            weta += d.w[i] * u[i] * eta[i];
        }
        const double beta = wxi / weta;
        std::vector<double> dir(d.n);
        for (std::size_t i = 0; i < d.n; ++i) dir[i] = xi[i] - beta * eta[i];
        const double slope = dot(dir, e);
        if (!(slope > 0.0)) break;
        bool accepted = false;
        std::vector<double> trial(d.n);
        while (tau >= prm.step_floor) {
            for (std::size_t i = 0; i < d.n; ++i) trial[i] = u[i] - tau * dir[i];
            renormalize(d, trial, c);
            const double et = safe_energy(model, d, trial);
            if (et <= en - 1e-4 * tau * slope) {
                accepted = true;
                u.swap(trial);
                en = et;
                break;
            }
            tau *= 0.5;
        }
        if (!accepted) break;
        tau = std::min(prm.step, 2.0 * tau);
    }
    out.u = std::move(u);
    out.energy = en;
    return out;
}

/// Bordered Newton iteration for (u, lambda); returns false when it fails to reduce the residual.
inline bool newton_polish(const Model& model, const Discretization& d, std::vector<double>& u, double c,
                          const SolveParams& prm, std::vector<double>* history = nullptr) {
    renormalize(d, u, c);
    double dn = 0.0;
    auto e = euclidean_gradient(model, d, u, &dn);
    auto ri = residual_info(model, d, u, e, dn);
    double lambda = ri.lambda;
    auto merit = [&](const std::vector<double>& v, double lam, double* rel) {
        double dd = 0.0;
        const auto ev = euclidean_gradient(model, d, v, &dd);
        double s = 0.0;
        for (std::size_t i = 0; i < d.n; ++i) {
            const double rr = ev[i] / d.w[i] - lam * v[i];
            s += d.w[i] * rr * rr;
        }
        const double cc = 0.5 * (weighted_mass(d, v) - c * c);
        if (rel) *rel = std::sqrt(s) / std::sqrt(dd + weighted_mass(d, v));
        return s + cc * cc;
    };
    double rel = 0.0;
    double phi = merit(u, lambda, &rel);
    for (std::size_t it = 0; it < prm.newton_iterations; ++it) {
        if (history) history->push_back(rel);
        if (rel < 1e-13) break;
        const auto ku = d.stiff.apply(u);
        dn = dot(u, ku);
        const double m = model.coefficient.M(dn);
        const double gamma = 2.0 * model.coefficient.M_prime(dn);
        Tridiagonal t = d.stiff;
        std::vector<double> res(d.n), wu(d.n);
        for (std::size_t i = 0; i < d.n; ++i) {
            const double fpr = model.nonlinearity.f_prime(u[i]);
            t.diag[i] = m * t.diag[i] - d.w[i] * fpr - lambda * d.w[i];
            res[i] = m * ku[i] - d.w[i] * model.nonlinearity.f(u[i]) - lambda * d.w[i] * u[i];
            wu[i] = d.w[i] * u[i];
        }
        for (double& o : t.off) o *= m;
        const double cres = 0.5 * (weighted_mass(d, u) - c * c);
        std::vector<double> x(res), y(wu), z(ku);
        for (double& v : x) v = -v;
        try {
            solve_in_place(t, {&x, &y, &z});
        } catch (const NumericalFailure&) {
            return false;
        }
        // Sherman-Morrison for the rank-one Kirchhoff term gamma (Ku)(Ku)^T.
        const double denom = 1.0 + gamma * dot(ku, z);
        const double sx = gamma * dot(ku, x) / denom, sy = gamma * dot(ku, y) / denom;
        for (std::size_t i = 0; i < d.n; ++i) {
            x[i] -= sx * z[i];
            y[i] -= sy * z[i];
        }
        const double wy = dot(wu, y);
        if (!(std::abs(wy) > 0.0)) return false;
        const double dl = (-cres - dot(wu, x)) / wy;
        std::vector<double> du(d.n);
        for (std::size_t i = 0; i < d.n; ++i) du[i] = x[i] + dl * y[i];
        double alpha = 1.0;
        bool improved = false;
        std::vector<double> trial(d.n);
        for (int k = 0; k < 30; ++k, alpha *= 0.5) {
            for (std::size_t i = 0; i < d.n; ++i) trial[i] = u[i] + alpha * du[i];
            double rel_t = 0.0;
            double ph = std::numeric_limits<double>::infinity();
            try {
                ph = merit(trial, lambda + alpha * dl, &rel_t);
            } catch (const RangeError&) {
            }
            if (ph < phi) {
                u.swap(trial);
                lambda += alpha * dl;
                phi = ph;
                rel = rel_t;
                improved = true;
                break;
            }
        }
        if (!improved) break;
    }
    renormalize(d, u, c);
    return rel < 1e-3 * prm.tol;
}

}  // namespace detail

/// Acceptance filters shared by every solver mode.
inline FilterVerdict check_candidate(const CriticalPointCandidate& cand, const SolveParams& prm) {
    FilterVerdict v;
    if (!(cand.energy.grad_l2 > prm.min_grad_sq)) {
        v.reason = "gradient norm below the nontrivial threshold";
        return v;
    }
    if (!(cand.pde_residual <= prm.tol * cand.h1_norm)) {
        v.reason = "PDE residual above tolerance";
        return v;
    }
    if (!(cand.pohozaev_residual <= prm.tol * cand.pohozaev_scale)) {
        v.reason = "Pohozaev residual above tolerance";
        return v;
    }
    const double tail = tail_mass_fraction(cand.u, 0.9);
    if (tail > prm.max_tail_fraction) {
        v.reason = "mass reaches the truncation boundary";
        return v;
    }
    v.pass = true;
    v.reason = "ok";
    return v;
}

/// Length scale 1/t of the best trial profile Q_t for the combined power model, if defined.
inline std::optional<double> trial_length_scale(const Model& model, double c, const GroundStateProfile& q) {
    const auto& nl = model.nonlinearity;
    if (nl.kind() != Nonlinearity::Kind::power || model.coefficient.kind() != KirchhoffCoefficient::Kind::affine)
        return std::nullopt;
    const int dim = nl.dim();
    const GroundStateNorms gn = GroundStateNorms::from(q);
    auto energy_at = [&](double x) {
        return trial_energy(model.coefficient.a(), model.coefficient.b(), nl.p(), dim, gn, c, std::exp(x));
    };
    // Lowest interior local minimum of the trial fiber on a coarse log grid; without one there is
    // no preferred scale and the profile of Q itself is used.
    const int samples = 400;
    std::vector<double> xs(samples + 1), vs(samples + 1);
    for (int i = 0; i <= samples; ++i) {
        xs[i] = -12.0 + 16.0 * i / samples;
        vs[i] = energy_at(xs[i]);
    }
    std::optional<double> best_x;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 1; i < samples; ++i)
        if (vs[i] <= vs[i - 1] && vs[i] <= vs[i + 1] && vs[i] < best) {
            best = vs[i];
            best_x = xs[i];
        }
    return best_x ? std::exp(-*best_x) : 1.0;
}

namespace detail {

inline RadialFunction resample_profile(const GroundStateProfile& q, const GridPtr& grid, double c, double t) {
    const RadialInterpolant interp(q.profile);
    auto v = RadialFunction::sample(grid, [&](double r) { return interp(t * r); });
    v[v.size() - 1] = 0.0;
    return normalize_mass(v, c);
}

inline RadialFunction gaussian_profile(const GridPtr& grid, double c, double width) {
    auto v = RadialFunction::sample(grid, [&](double r) { return std::exp(-0.5 * r * r / (width * width)); });
    v[v.size() - 1] = 0.0;
    return normalize_mass(v, c);
}

struct Start {
    std::string label;
    RadialFunction u;
};

inline std::vector<Start> initial_profiles(const Model& model, double c, const GridPtr& grid, const SolveParams& prm,
                                           const std::optional<GroundStateProfile>& q, double length) {
    std::vector<Start> out;
    std::mt19937_64 rng(prm.seed);
    std::uniform_real_distribution<double> U(std::log(0.25), std::log(8.0));
    if (prm.include_trial_profile && q) {
        out.push_back({"trial", resample_profile(*q, grid, c, 1.0 / length)});
    }
    for (double w : prm.widths) {
        if (static_cast<int>(out.size()) >= prm.restarts) break;
        out.push_back({"gaussian w=" + std::to_string(w * length), gaussian_profile(grid, c, w * length)});
    }
    while (static_cast<int>(out.size()) < prm.restarts) {
        const double w = std::exp(U(rng)) * length;
        out.push_back({"random gaussian w=" + std::to_string(w), gaussian_profile(grid, c, w)});
    }
    (void)model;
    return out;
}

inline std::optional<GroundStateProfile> trial_ground_state(const Model& model) {
    const auto& nl = model.nonlinearity;
    if (nl.kind() != Nonlinearity::Kind::power) return std::nullopt;
    if (!(nl.p() > 2.0)) return std::nullopt;
    if (nl.dim() >= 3 && !(nl.p() < critical_exponent(nl.dim()))) return std::nullopt;
    ShootOptions so;
    so.truncation_check = false;
    return shoot_ground_state(nl.dim(), nl.p(), so);
}

/// Radius where Q has decayed to 1e-9 of its height.
inline double decay_radius(const GroundStateProfile& q) {
    const auto& g = q.profile.grid();
    for (std::size_t i = 0; i < q.profile.size(); ++i)
        if (q.profile[i] < 1e-9 * q.height) return g.node(i);
    return g.r_max();
}

inline GridPtr solver_grid(int dim, const SolveParams& prm, double r_max) {
    return make_grid(dim, r_max, prm.cells, GridScheme::graded, prm.stretch);
}

inline int model_dim(const Model& model) { return model.nonlinearity.dim(); }

}  // namespace detail

/// Chooses r_max and the initial-profile length scale for the given mass.
struct SolverSetup {
    GridPtr grid;
    double length = 1.0;
    std::optional<GroundStateProfile> q;
};

inline SolverSetup solver_setup(const Model& model, double c, const SolveParams& prm) {
    SolverSetup s;
    s.q = detail::trial_ground_state(model);
    double r_max = prm.r_max;
    if (s.q) {
        if (auto L = trial_length_scale(model, c, *s.q)) {
            s.length = *L;
            if (prm.auto_r_max) r_max = std::max(r_max, 1.3 * detail::decay_radius(*s.q) * s.length);
        }
    }
    s.grid = detail::solver_grid(detail::model_dim(model), prm, r_max);
    return s;
}

struct ProjectionResult {
    double s = 0.0;
    RadialFunction v;
    bool monotone = false;
};

/// Root s* of s -> G(T(u,s)); picks the fiber minimizer when I(u) < 0, else the fiber maximizer.
inline ProjectionResult pohozaev_project(const Model& model, const RadialFunction& u, double c,
                                         const SolveParams& prm = {}) {
    if (std::abs(mass(u) - c * c) > 1e-6 * c * c) throw SpecError("pohozaev_project needs u on the mass sphere");
    if (!(grad_norm_sq(u) > 0.0)) throw SpecError("pohozaev_project needs a nonconstant u");
    auto g = [&](double s) {
        try {
            return fiber_pohozaev(model, u, s);
        } catch (const RangeError&) {
            return -std::numeric_limits<double>::infinity();
        }
    };
    auto j = [&](double s) {
        try {
            return fiber_energy(model, u, s);
        } catch (const RangeError&) {
            return -std::numeric_limits<double>::infinity();
        }
    };
    // Scan the fiber for sign changes of G = dJ/ds.
    const int samples = 400;
    const double lo = -8.0, hi = 8.0;
    std::vector<std::pair<double, double>> brackets;
    double prev_s = lo, prev_g = g(lo);
    for (int i = 1; i <= samples; ++i) {
        const double s = lo + (hi - lo) * i / samples;
        const double gv = g(s);
        if (std::isfinite(prev_g) && std::isfinite(gv) && (prev_g > 0.0) != (gv > 0.0))
            brackets.emplace_back(prev_s, s);
        prev_s = s;
        prev_g = gv;
    }
    ProjectionResult res;
    if (brackets.empty()) {
        res.monotone = true;
        res.v = u;
        return res;
    }
    const bool want_min = energy(model, u).total < 0.0;
    double best_s = 0.0, best_j = want_min ? std::numeric_limits<double>::infinity()
                                           : -std::numeric_limits<double>::infinity();
    for (auto [a, b] : brackets) {
        const auto r = boost::math::tools::bisect(
            g, a, b, [](double x, double y) { return std::abs(y - x) <= 1e-15 * std::max(1.0, std::abs(y)); });
        const double s = 0.5 * (r.first + r.second);
        const double jv = j(s);
        if (want_min ? jv < best_j : jv > best_j) {
            best_j = jv;
            best_s = s;
        }
    }
    res.s = best_s;
    // Refine on the resampled function so the returned v itself has tiny |G|.
    auto gv = [&](double s) { return pohozaev(model, normalize_mass(fiber_scale(u, s), c)); };
    double a = best_s - 1e-3, b = best_s + 1e-3;
    double ga = gv(a), gb = gv(b);
    for (int k = 0; k < 20 && (ga > 0.0) == (gb > 0.0); ++k) {
        a -= 1e-2;
        b += 1e-2;
        ga = gv(a);
        gb = gv(b);
    }
    if ((ga > 0.0) != (gb > 0.0)) {
        for (int k = 0; k < 200; ++k) {
            const double mid = 0.5 * (a + b);
            const double gm = gv(mid);
            if (std::abs(gm) <= prm.projection_tol || b - a < 1e-15) {
                a = b = mid;
                break;
            }
            if ((gm > 0.0) == (ga > 0.0)) {
                a = mid;
                ga = gm;
            } else {
                b = mid;
            }
        }
        res.s = 0.5 * (a + b);
    }
    res.v = normalize_mass(fiber_scale(u, res.s), c);
    return res;
}

namespace detail {

/// Fiber samples J(u, s) for s -> -infinity: the vanishing limit that bounds I_c from above by ~0.
inline double vanishing_limit(const Model& model, const RadialFunction& u) {
    double best = std::numeric_limits<double>::infinity();
    for (double s : {-4.0, -8.0, -16.0, -32.0}) {
        try {
            best = std::min(best, fiber_energy(model, u, s));
        } catch (const RangeError&) {
        }
    }
    return best;
}

}  // namespace detail

/// Searches for the constrained minimizer of I on S_c from several initial profiles.
inline SolveReport minimize_on_sphere(const Model& model, double c, const SolveParams& prm = {}) {
    prm.validate();
    if (!(c > 0.0)) throw SpecError("mass parameter c must be positive");
    const auto setup = solver_setup(model, c, prm);
    const detail::Discretization d(setup.grid);
    SolveReport rep;
    rep.r_max = setup.grid->r_max();
    rep.energy_infimum = std::numeric_limits<double>::infinity();
    const auto starts = detail::initial_profiles(model, c, setup.grid, prm, setup.q, setup.length);
    std::optional<CriticalPointCandidate> best;
    std::optional<RestartRecord> witness;
    for (const auto& st : starts) {
        RestartRecord rec;
        rec.start = st.label;
        const double e_start = detail::safe_energy(model, d, detail::free_values(st.u));
        // Descend until Newton takes over; tighten the hand-over point when the polish does not converge.
        auto dr = detail::descend(model, d, detail::free_values(st.u), c, prm, prm.max_iterations, prm.newton_switch);
        std::vector<double> u = dr.u;
        double switch_tol = prm.newton_switch;
        rep.iterations += dr.iterations;
        while (!dr.vanishing) {
            u = dr.u;
            rec.polished = detail::newton_polish(model, d, u, c, prm);
            if (rec.polished || !dr.reached_switch || switch_tol < 1e-9) break;
            switch_tol *= 0.1;
            auto more = detail::descend(model, d, dr.u, c, prm, prm.max_iterations, switch_tol);
            more.iterations += dr.iterations;
            more.history.insert(more.history.begin(), dr.history.begin(), dr.history.end());
            rep.iterations += more.iterations - dr.iterations;
            dr = std::move(more);
        }
        rec.iterations = dr.iterations;
        rec.final_energy = dr.energy;
        rec.relative_residual = dr.relative_residual;
        rep.energy_infimum = std::min(rep.energy_infimum, dr.energy);
        if (!rec.polished && dr.energy < -1e6 * std::max(1.0, std::abs(e_start))) {
            rec.verdict.reason = "energy unbounded below along this restart";
            if (!witness) witness = rec;
            rep.restarts.push_back(rec);
            continue;
        }
        if (rep.residual_history.empty()) rep.residual_history = dr.history;
        const auto u_desc = detail::from_free(d, dr.u);
        rep.energy_infimum = std::min(rep.energy_infimum, detail::vanishing_limit(model, u_desc));
        if (dr.vanishing) {
            rec.verdict.reason = "iterate vanishes into the truncation boundary";
            rep.restarts.push_back(rec);
            continue;
        }
        const auto uf = detail::from_free(d, u);
        try {
            auto cand = make_candidate(model, uf, c);
            rec.verdict = check_candidate(cand, prm);
            // Newton may land on a critical point above the descent energy; keep it only if it is not higher.
            if (rec.verdict.pass && cand.energy.total > dr.energy + 1e-8 * std::max(1.0, std::abs(dr.energy))) {
                rec.verdict.pass = false;
                rec.verdict.reason = "polished point lies above the descent energy";
            }
            if (rec.verdict.pass) {
                rep.accepted.push_back(cand);
                if (!best || cand.energy.total < best->energy.total) best = cand;
            }
            rec.final_energy = std::min(rec.final_energy, cand.energy.total);
        } catch (const SpecError& e) {
            rec.verdict.reason = e.what();
        }
        rep.restarts.push_back(rec);
    }
    if (witness) {
        rep.status = SolveStatus::diverged;
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6g", witness->final_energy);
        rep.note = "energy decreases without bound from start '" + witness->start + "' (I = " + buf +
                   ") without residual convergence";
        return rep;
    }
    // A candidate above the vanishing limit is only a local minimizer; the infimum is then not attained.
    if (best && best->energy.total <= rep.energy_infimum + prm.tol * std::max(1.0, best->pohozaev_scale)) {
        rep.status = SolveStatus::converged_minimizer;
        rep.energy_infimum = std::min(rep.energy_infimum, best->energy.total);
        rep.candidate = best;
    } else if (best) {
        rep.status = SolveStatus::no_nontrivial_solution_found;
        rep.note = "only local minimizers above the vanishing limit were found; the infimum is not attained";
    } else {
        rep.status = SolveStatus::no_nontrivial_solution_found;
        rep.note = "no restart produced a nontrivial candidate within tolerance; energies approach the vanishing limit";
    }
    return rep;
}

namespace detail {

/// Piecewise-linear reparametrization of the bead values to equal H1 arc length.
inline void reparametrize(const Discretization& d, std::vector<std::vector<double>>& beads, double c) {
    const std::size_t B = beads.size();
    std::vector<double> arc(B, 0.0);
    for (std::size_t k = 1; k < B; ++k) {
        std::vector<double> diff(d.n);
        for (std::size_t i = 0; i < d.n; ++i) diff[i] = beads[k][i] - beads[k - 1][i];
        const double h1 = dot(diff, d.stiff.apply(diff)) + weighted_mass(d, diff);
        arc[k] = arc[k - 1] + std::sqrt(h1);
    }
    if (!(arc.back() > 0.0)) return;
    std::vector<std::vector<double>> out(B);
    out.front() = beads.front();
    out.back() = beads.back();
    std::size_t seg = 1;
    for (std::size_t k = 1; k + 1 < B; ++k) {
        const double target = arc.back() * k / (B - 1);
        while (seg < B - 1 && arc[seg] < target) ++seg;
        const double span = arc[seg] - arc[seg - 1];
        const double t = span > 0.0 ? (target - arc[seg - 1]) / span : 0.0;
        out[k].resize(d.n);
        for (std::size_t i = 0; i < d.n; ++i) out[k][i] = (1.0 - t) * beads[seg - 1][i] + t * beads[seg][i];
        renormalize(d, out[k], c);
    }
    beads.swap(out);
}

}  // namespace detail

namespace detail {

inline SolveReport mountain_pass_impl(const Model& model, double c, const SolveParams& prm = {},
                                 std::optional<RadialFunction> endpoint = std::nullopt) {
    prm.validate();
    if (!(c > 0.0)) throw SpecError("mass parameter c must be positive");
    SolveReport rep;
    rep.energy_infimum = std::numeric_limits<double>::infinity();
    RadialFunction base;
    if (endpoint) {
        base = normalize_mass(*endpoint, c);
    } else {
        // Low-energy endpoint: the best accepted descent result, a local minimizer when one exists.
        auto m = minimize_on_sphere(model, c, prm);
        rep.energy_infimum = m.energy_infimum;
        const CriticalPointCandidate* low = nullptr;
        for (const auto& a : m.accepted)
            if (!low || a.energy.total < low->energy.total) low = &a;
        if (low) {
            base = low->u;
        } else {
            // Otherwise the first point of negative energy along the trial fiber.
            const auto setup = solver_setup(model, c, prm);
            const auto starts = detail::initial_profiles(model, c, setup.grid, prm, setup.q, setup.length);
            base = starts.front().u;
            bool found = false;
            for (double s = 0.0; s < 6.0 && !found; s += 0.25) {
                try {
                    auto v = normalize_mass(fiber_scale(starts.front().u, s), c);
                    if (energy(model, v).total < 0.0) {
                        base = v;
                        found = true;
                    }
                } catch (const std::exception&) {
                    break;
                }
            }
            if (!found) {
                rep.status = SolveStatus::diverged;
                rep.note = "no low-energy endpoint: no local minimizer and no negative-energy trial point";
                return rep;
            }
        }
    }
    // The string lives on a wider grid so the low-gradient endpoint fits inside the truncation radius.
    const double spread = prm.string_spread;
    const GridPtr grid = make_grid(base.grid().dim(), base.grid().r_max() * std::exp(spread),
                                   prm.string_cells > 0 ? prm.string_cells : 2 * prm.cells, GridScheme::graded,
                                   prm.stretch);
    RadialFunction u0;
    {
        const RadialInterpolant interp(base);
        u0 = RadialFunction::sample(grid, [&](double r) { return interp(r); });
        u0[u0.size() - 1] = 0.0;
        u0 = normalize_mass(u0, c);
    }
    rep.r_max = grid->r_max();
    const detail::Discretization d(grid);
    const double e0 = energy(model, u0).total;

    // Low-gradient endpoint: spread u0 along its fiber as far as the truncation allows.
    double s1 = 0.0;
    RadialFunction u1;
    for (double s = -spread; s < -0.05; s += 0.05) {
        try {
            u1 = normalize_mass(fiber_scale(u0, s), c);
            s1 = s;
            break;
        } catch (const TruncationLoss&) {
        }
    }
    if (s1 == 0.0) {
        rep.status = SolveStatus::diverged;
        rep.note = "no low-gradient endpoint fits inside the truncation radius";
        return rep;
    }
    const double e1 = energy(model, u1).total;

    const int B = prm.beads;
    std::vector<std::vector<double>> beads(B);
    for (int k = 0; k < B; ++k) {
        const double s = s1 * (1.0 - static_cast<double>(k) / (B - 1));
        beads[k] = detail::free_values(normalize_mass(fiber_scale(u0, s), c));
    }
    std::vector<double> en(B);
    auto refresh = [&] {
        for (int k = 0; k < B; ++k) en[k] = detail::safe_energy(model, d, beads[k]);
    };
    refresh();
    const int first_top = static_cast<int>(std::max_element(en.begin(), en.end()) - en.begin());
    if (first_top == 0 || first_top == B - 1) {
        rep.status = SolveStatus::diverged;
        rep.note = "energy along the initial path has no interior maximum";
        rep.path_level = en[first_top];
        return rep;
    }

    const double tau = 0.2;
    double switch_tol = prm.newton_switch;
    std::size_t it = 0;
    std::vector<double> saddle;
    RestartRecord rec;
    rec.start = "string top bead";
    for (;;) {
    for (; it < prm.string_iterations; ++it) {
        const int top = static_cast<int>(std::max_element(en.begin() + 1, en.end() - 1) - en.begin());
        for (int k = 1; k < B - 1; ++k) {
            auto& u = beads[k];
            double dn = 0.0;
            const auto e = detail::euclidean_gradient(model, d, u, &dn);
            const auto ri = detail::residual_info(model, d, u, e, dn);
            const double m = model.coefficient.M(dn);
            Tridiagonal p = d.stiff;
            const double sigma = std::abs(ri.lambda) + 1e-8 * m;
            for (std::size_t i = 0; i < d.n; ++i) p.diag[i] = m * p.diag[i] + sigma * d.w[i];
            for (double& o : p.off) o *= m;
            std::vector<double> xi(e), eta(d.n);
            for (std::size_t i = 0; i < d.n; ++i) eta[i] = d.w[i] * u[i];
            solve_in_place(p, {&xi, &eta});
            double wxi = 0.0, weta = 0.0;
            for (std::size_t i = 0; i < d.n; ++i) {
                wxi += d.w[i] * u[i] * xi[i];
                weta += d.w[i] * u[i] * eta[i];
            }
            const double beta = wxi / weta;
            std::vector<double> dir(d.n);
            for (std::size_t i = 0; i < d.n; ++i) dir[i] = xi[i] - beta * eta[i];
            if (k == top) {
                // Climbing image: invert the component along the path tangent.
                std::vector<double> tan(d.n);
                for (std::size_t i = 0; i < d.n; ++i) tan[i] = beads[k + 1][i] - beads[k - 1][i];
                const double tt = detail::dot(tan, p.apply(tan));
                if (tt > 0.0) {
                    const double proj = detail::dot(tan, p.apply(dir)) / tt;
                    for (std::size_t i = 0; i < d.n; ++i) dir[i] -= 2.0 * proj * tan[i];
                }
            }
            for (std::size_t i = 0; i < d.n; ++i) u[i] -= tau * dir[i];
            detail::renormalize(d, u, c);
        }
        detail::reparametrize(d, beads, c);
        refresh();
        const int nt = static_cast<int>(std::max_element(en.begin() + 1, en.end() - 1) - en.begin());
        double dn = 0.0;
        const auto e = detail::euclidean_gradient(model, d, beads[nt], &dn);
        const double rel = detail::residual_info(model, d, beads[nt], e, dn).relative();
        if (it % 10 == 0) rep.residual_history.push_back(rel);
        rep.iterations = it + 1;
        if (rel < switch_tol) break;
    }
    const int top = static_cast<int>(std::max_element(en.begin() + 1, en.end() - 1) - en.begin());
    rep.path_level = en[top];
    saddle = beads[top];
    rec.iterations = rep.iterations;
    rec.polished = detail::newton_polish(model, d, saddle, c, prm, &rep.residual_history);
    // Continue the string towards a tighter hand-over point when Newton fails.
    if (rec.polished || it >= prm.string_iterations || switch_tol < 1e-9) break;
    switch_tol *= 0.1;
    }
    const auto us = detail::from_free(d, saddle);
    auto cand = make_candidate(model, us, c);
    rec.final_energy = cand.energy.total;
    rec.relative_residual = cand.pde_residual / cand.h1_norm;
    rec.verdict = check_candidate(cand, prm);
    if (rec.verdict.pass && !(cand.energy.total > std::max(e0, e1))) {
        rec.verdict.pass = false;
        rec.verdict.reason = "saddle level does not exceed the endpoint energies";
    }
    rep.restarts.push_back(rec);
    rep.energy_infimum = std::min({rep.energy_infimum, e0, e1});
    if (rec.verdict.pass) {
        rep.status = SolveStatus::converged_mountain_pass;
        rep.accepted.push_back(cand);
        rep.candidate = cand;
    } else {
        rep.status = SolveStatus::diverged;
        rep.note = "string did not converge to an admissible saddle: " + rec.verdict.reason;
        rep.candidate = cand;
    }
    return rep;
}

}  // namespace detail

/// Mountain-pass candidate between a low-gradient point T(u0, s1) and a low-energy point u0.
inline SolveReport mountain_pass(const Model& model, double c, const SolveParams& prm = {},
                                 std::optional<RadialFunction> endpoint = std::nullopt) {
    try {
        return detail::mountain_pass_impl(model, c, prm, std::move(endpoint));
    } catch (const RangeError& e) {
        SolveReport rep;
        rep.status = SolveStatus::diverged;
        rep.note = std::string("nonlinearity overflow along the path: ") + e.what();
        return rep;
    }
}

}  // namespace kirchhoff
