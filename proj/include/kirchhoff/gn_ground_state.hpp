#pragma once

// Radial ground state of -kappa Delta Q + m Q = Q^{p-1}, kappa = N(p-2)/4,
// m = 1 + (p-2)(2-N)/4, by shooting on Q(0), and the sharp
// Gagliardo-Nirenberg constant built from its L2 norm.

#include "kirchhoff/errors.hpp"
#include "kirchhoff/radial_grid.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace kirchhoff {

struct ShootOptions {
    /// Truncation radius; 0 picks one from the decay rate.
    double r_max = 0.0;
    /// RK4 steps on [0, r_max].
    std::size_t steps = 20000;
    /// Also solve on 2 r_max to report the truncation gap.
    bool truncation_check = true;
};

struct GroundStateProfile {
    int dim = 0;
    double p = 0.0;
    /// p = 2: the inequality is the identity and there is no profile.
    bool identity = false;
    double kappa = 0.0, m = 0.0;
    RadialFunction profile;
    std::vector<double> derivative;
    double height = 0.0;
    double mass = 0.0;         // ||Q||_2^2
    double grad_sq = 0.0;      // ||grad Q||_2^2
    double lp_power = 0.0;     // ||Q||_p^p
    double crit_power = std::numeric_limits<double>::quiet_NaN();  // ||Q||_{2*}^{2*}, N >= 3
    double r_max = 0.0;
    double match_radius = 0.0;
    int bisection_steps = 0;
    /// Relative change of ||Q||_2^2 when r_max is doubled.
    std::optional<double> truncation_gap;

    double l2_norm() const { return std::sqrt(mass); }

    /// C in ||u||_p <= C ||grad u||^{gamma} ||u||^{1-gamma}.
    double gn_constant() const {
        if (identity) return 1.0;
        return std::pow(p / (2.0 * std::pow(l2_norm(), p - 2.0)), 1.0 / p);
    }

    nlohmann::json to_json() const {
        nlohmann::json j = {{"dim", dim}, {"p", p}, {"identity", identity}, {"gn_constant", gn_constant()}};
        if (identity) return j;
        j.update({{"kappa", kappa},
                  {"m", m},
                  {"height", height},
                  {"mass", mass},
                  {"l2_norm", l2_norm()},
                  {"grad_sq", grad_sq},
                  {"lp_power", lp_power},
                  {"r_max", r_max},
                  {"match_radius", match_radius},
                  {"bisection_steps", bisection_steps}});
        j["crit_power"] = std::isfinite(crit_power) ? nlohmann::json(crit_power) : nlohmann::json(nullptr);
        j["truncation_gap"] = truncation_gap ? nlohmann::json(*truncation_gap) : nlohmann::json(nullptr);
        return j;
    }
};

namespace detail {

enum class ShotOutcome { crosses_zero, turns_up, survives };

struct Shot {
    ShotOutcome outcome;
    std::vector<double> q, dq;  // samples at r_i = i h up to the stopping index
};

inline Shot shoot_once(int dim, double p, double kappa, double m, double q0, double h, std::size_t steps,
                       bool keep) {
    auto rhs = [&](double r, double q, double dq) {
        const double src = (m * q - std::pow(std::abs(q), p - 2.0) * q) / kappa;
        return std::array<double, 2>{dq, src - (dim - 1) * dq / r};
    };
    Shot s{ShotOutcome::survives, {}, {}};
    if (keep) {
        s.q.reserve(steps + 1);
        s.dq.reserve(steps + 1);
    }
    // Series start: Q(r) = Q0 + c r^2 / 2 with c = (m Q0 - Q0^{p-1}) / (N kappa).
    const double c = (m * q0 - std::pow(q0, p - 1.0)) / (dim * kappa);
    double q = q0 + 0.5 * c * h * h, dq = c * h;
    if (keep) {
        s.q.push_back(q0);
        s.dq.push_back(0.0);
        s.q.push_back(q);
        s.dq.push_back(dq);
    }
    for (std::size_t i = 1; i < steps; ++i) {
        const double r = i * h;
        const auto k1 = rhs(r, q, dq);
        const auto k2 = rhs(r + 0.5 * h, q + 0.5 * h * k1[0], dq + 0.5 * h * k1[1]);
        const auto k3 = rhs(r + 0.5 * h, q + 0.5 * h * k2[0], dq + 0.5 * h * k2[1]);
        const auto k4 = rhs(r + h, q + h * k3[0], dq + h * k3[1]);
        q += h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
        dq += h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
        if (keep) {
            s.q.push_back(q);
            s.dq.push_back(dq);
        }
        if (q < 0.0) {
            s.outcome = ShotOutcome::crosses_zero;
            return s;
        }
        if (dq > 0.0) {
            s.outcome = ShotOutcome::turns_up;
            return s;
        }
    }
    return s;
}

/// Composite Simpson for samples on a uniform grid (odd count), trapezoid on a leftover cell.
inline double simpson(const std::vector<double>& y, double h) {
    const std::size_t n = y.size();
    if (n < 3) return 0.0;
    const std::size_t last = (n - 1) % 2 == 0 ? n - 1 : n - 2;
    double s = y[0] + y[last];
    for (std::size_t i = 1; i < last; ++i) s += (i % 2 ? 4.0 : 2.0) * y[i];
    s *= h / 3.0;
    if (last != n - 1) s += 0.5 * h * (y[n - 2] + y[n - 1]);
    return s;
}

}  // namespace detail

inline double gn_exponent(int dim, double p) { return dim * (p - 2.0) / (2.0 * p); }

inline GroundStateProfile shoot_ground_state(int dim, double p, ShootOptions opt = {}) {
    if (dim < 1 || dim > 10) throw SpecError("dimension must be in 1..10");
    if (!(p >= 2.0) || !std::isfinite(p)) throw SpecError("GN exponent must satisfy p >= 2");
    if (dim >= 3 && !(p < 2.0 * dim / (dim - 2.0))) throw SpecError("GN exponent must be below 2* for N >= 3");
    if (opt.steps < 64) throw SpecError("shooting needs at least 64 steps");
    GroundStateProfile gs;
    gs.dim = dim;
    gs.p = p;
    if (p == 2.0) {
        gs.identity = true;
        return gs;
    }
    const double kappa = dim * (p - 2.0) / 4.0;
    const double m = 1.0 + (p - 2.0) * (2.0 - dim) / 4.0;
    if (!(m > 0.0)) throw HypothesisViolation("shooting needs a positive mass coefficient");
    gs.kappa = kappa;
    gs.m = m;
    const double mu = std::sqrt(m / kappa);
    const double r_max = opt.r_max > 0.0 ? opt.r_max : std::max(20.0, std::ceil(24.0 / mu));
    gs.r_max = r_max;
    const double h = r_max / static_cast<double>(opt.steps);

    // The constant state m^{1/(p-2)} undershoots; raise hi until the shot crosses zero.
    const double eq = std::pow(m, 1.0 / (p - 2.0));
    double lo = eq, hi = 10.0 * eq;
    int expansions = 0;
    while (detail::shoot_once(dim, p, kappa, m, hi, h, opt.steps, false).outcome != detail::ShotOutcome::crosses_zero) {
        lo = hi;
        hi *= 2.0;
        if (++expansions > 60) throw NumericalFailure("could not bracket the shooting height");
    }
    int iters = 0;
    while (hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const auto o = detail::shoot_once(dim, p, kappa, m, mid, h, opt.steps, false).outcome;
        if (o == detail::ShotOutcome::crosses_zero) hi = mid;
        else lo = mid;
        if (++iters > 200) throw NumericalFailure("shooting bisection stagnated");
    }
    gs.bisection_steps = iters;
    gs.height = 0.5 * (lo + hi);

    const auto a = detail::shoot_once(dim, p, kappa, m, lo, h, opt.steps, true);
    const auto b = detail::shoot_once(dim, p, kappa, m, hi, h, opt.steps, true);
    // Trust the shot while both bracketing trajectories agree and decrease.
    const std::size_t n = std::min(a.q.size(), b.q.size());
    std::size_t match = 1;
    for (std::size_t i = 1; i < n; ++i) {
        const double qa = a.q[i], qb = b.q[i];
        if (!(qa > 0.0) || !(qb > 0.0) || a.dq[i] >= 0.0 || b.dq[i] >= 0.0) break;
        if (std::abs(qa - qb) > 1e-6 * qa) break;
        match = i;
    }
    if (match < 8) throw NumericalFailure("shooting trajectories diverge immediately");

    // Linearized tail: Q ~ A r^{-nu} K_nu(mu r), nu = N/2 - 1.
    const double nu = 0.5 * dim - 1.0;
    const double rm = match * h;
    auto tail = [&](double r) { return std::pow(r, -nu) * std::cyl_bessel_k(std::abs(nu), mu * r); };
    auto tail_d = [&](double r) { return -mu * std::pow(r, -nu) * std::cyl_bessel_k(nu + 1.0, mu * r); };
    const double amp = a.q[match] / tail(rm);
    gs.match_radius = rm;

    std::vector<double> q(opt.steps + 1), dq(opt.steps + 1);
    for (std::size_t i = 0; i <= opt.steps; ++i) {
        if (i <= match) {
            q[i] = 0.5 * (a.q[i] + b.q[i]);
            dq[i] = 0.5 * (a.dq[i] + b.dq[i]);
        } else {
            const double r = i * h;
            const double t = amp * tail(r);
            // Underflow of K_nu is fine: the tail is then zero to double precision.
            q[i] = std::isfinite(t) ? t : 0.0;
            const double td = amp * tail_d(r);
            dq[i] = std::isfinite(td) ? td : 0.0;
        }
    }

    const double area = sphere_area(dim);
    std::vector<double> f2(q.size()), fg(q.size()), fp(q.size()), fc(q.size());
    const double pc = dim >= 3 ? 2.0 * dim / (dim - 2.0) : 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        const double r = i * h;
        const double jac = area * std::pow(r, dim - 1);
        f2[i] = jac * q[i] * q[i];
        fg[i] = jac * dq[i] * dq[i];
        fp[i] = jac * std::pow(q[i], p);
        fc[i] = dim >= 3 ? jac * std::pow(q[i], pc) : 0.0;
    }
    gs.mass = detail::simpson(f2, h);
    gs.grad_sq = detail::simpson(fg, h);
    gs.lp_power = detail::simpson(fp, h);
    if (dim >= 3) gs.crit_power = detail::simpson(fc, h);

    auto grid = make_grid(dim, r_max, opt.steps, GridScheme::uniform);
    std::vector<double> prof(q);
    prof.back() = 0.0;
    gs.profile = RadialFunction(grid, std::move(prof));
    gs.derivative = std::move(dq);

    if (opt.truncation_check) {
        ShootOptions wide = opt;
        wide.r_max = 2.0 * r_max;
        wide.steps = 2 * opt.steps;
        wide.truncation_check = false;
        const auto w = shoot_ground_state(dim, p, wide);
        gs.truncation_gap = std::abs(w.mass - gs.mass) / gs.mass;
    }
    return gs;
}

inline double gn_constant(int dim, double p, ShootOptions opt = {}) {
    if (p == 2.0) return 1.0;
    opt.truncation_check = false;
    return shoot_ground_state(dim, p, opt).gn_constant();
}

/// ||u||_p / (||grad u||^{gamma} ||u||_2^{1-gamma}); equals C at u = Q.
inline double gn_quotient(const RadialFunction& u, double p) {
    const double gamma = gn_exponent(u.grid().dim(), p);
    return lp_norm(u, p) / (std::pow(grad_norm_sq(u), 0.5 * gamma) * std::pow(mass(u), 0.5 * (1.0 - gamma)));
}

}  // namespace kirchhoff
