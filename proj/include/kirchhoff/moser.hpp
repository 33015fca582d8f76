#pragma once

// Moser functions on R^2, Trudinger-Moser integrals, the fiber map
// g_n(t) = M_hat(t^2 |grad w_n|^2)/2 - t^{-2} int F(t w_n), and the check
// max_t g_n(t) < M_hat(4 pi / alpha0) / 2.

#include "kirchhoff/errors.hpp"
#include "kirchhoff/functional.hpp"
#include "kirchhoff/models.hpp"
#include "kirchhoff/radial_grid.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace kirchhoff {

/// w_bar_n(r): sqrt(log n / 2pi) on [0, 1/n], log(1/r) / sqrt(2pi log n) on [1/n, 1], 0 outside.
inline double moser_profile(long n, double r) {
    const double ln = std::log(static_cast<double>(n));
    if (r <= 1.0 / n) return std::sqrt(ln / (2.0 * std::numbers::pi));
    if (r >= 1.0) return 0.0;
    return std::log(1.0 / r) / std::sqrt(2.0 * std::numbers::pi * ln);
}

/// ||w_bar_n||_2^2 in closed form.
inline double moser_mass_exact(long n) {
    const double ln = std::log(static_cast<double>(n));
    const double n2 = static_cast<double>(n) * static_cast<double>(n);
    return ln / (2.0 * n2) + (0.25 - 0.25 / n2 - ln / (2.0 * n2) - ln * ln / (2.0 * n2)) / ln;
}

/// Unit-ball grid with r = 1/n as a node: uniform on [0, 1/n], geometric on [1/n, 1].
inline GridPtr moser_grid(long n, std::size_t plateau_cells = 16, double log_step = 1e-3) {
    if (n < 2) throw SpecError("Moser index n must be >= 2");
    if (plateau_cells < 8) throw SpecError("at least 8 cells are needed inside [0, 1/n]");
    if (!(log_step > 0.0) || log_step > 0.5) throw SpecError("log_step must lie in (0, 0.5]");
    const double kink = 1.0 / static_cast<double>(n);
    const double ln = std::log(static_cast<double>(n));
    const auto log_cells = static_cast<std::size_t>(std::ceil(ln / log_step));
    std::vector<double> r;
    r.reserve(plateau_cells + log_cells + 1);
    for (std::size_t i = 0; i < plateau_cells; ++i) r.push_back(kink * i / plateau_cells);
    for (std::size_t i = 0; i <= log_cells; ++i) r.push_back(kink * std::exp(ln * i / log_cells));
    r.back() = 1.0;
    return std::make_shared<const RadialGrid>(RadialGrid::from_nodes(2, std::move(r), GridScheme::graded));
}

struct MoserFunction {
    long n = 0;
    double c = 0.0;
    /// w_bar_n and w_n = c w_bar_n / ||w_bar_n||_2 (quadrature norm) on the grid.
    RadialFunction bar, omega;
    double grad_sq_exact = 1.0;
    double grad_sq_quadrature = 0.0;
    double mass_exact = 0.0;
    double mass_quadrature = 0.0;

    /// |grad w_n|^2 from the exact |grad w_bar_n| = 1 and the applied scaling.
    double omega_grad_sq() const { return c * c / mass_quadrature; }
    double omega_at(double r) const { return c * moser_profile(n, r) / std::sqrt(mass_quadrature); }

    nlohmann::json to_json() const {
        return {{"n", n},
                {"c", c},
                {"grad_sq_exact", grad_sq_exact},
                {"grad_sq_quadrature", grad_sq_quadrature},
                {"mass_exact", mass_exact},
                {"mass_quadrature", mass_quadrature},
                {"peak", omega_at(0.0)}};
    }
};

inline MoserFunction moser(long n, double c, GridPtr grid = nullptr) {
    if (n < 2) throw SpecError("Moser index n must be >= 2");
    if (!(c > 0.0)) throw SpecError("mass parameter c must be positive");
    if (!grid) grid = moser_grid(n);
    if (grid->dim() != 2) throw SpecError("Moser functions live on R^2");
    if (grid->r_max() < 1.0) throw SpecError("grid must cover [0, 1]");
    const double kink = 1.0 / static_cast<double>(n);
    std::size_t inside = 0;
    bool snapped = false;
    for (double r : grid->nodes()) {
        if (r <= kink * (1.0 + 1e-14)) ++inside;
        if (std::abs(r - kink) <= 1e-14 * kink) snapped = true;
    }
    if (!snapped) throw SpecError("grid must contain the node r = 1/n");
    if (inside < 9) throw SpecError("grid too coarse: fewer than 8 cells inside [0, 1/n]");
    MoserFunction m;
    m.n = n;
    m.c = c;
    m.bar = RadialFunction::sample(grid, [&](double r) { return moser_profile(n, r); });
    m.grad_sq_quadrature = grad_norm_sq(m.bar);
    m.mass_exact = moser_mass_exact(n);
    m.mass_quadrature = mass(m.bar);
    m.omega = m.bar;
    m.omega *= c / std::sqrt(m.mass_quadrature);
    return m;
}

/// int (e^{alpha u^2} - 1) over the grid; RangeError when alpha u^2 leaves the double range.
inline double tm_integral(const RadialFunction& u, double alpha) {
    if (!(alpha > 0.0)) throw SpecError("Trudinger-Moser exponent must be positive");
    const auto w = u.grid().weights();
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double x = alpha * u[i] * u[i];
        if (x > exp_argument_cap) throw RangeError("Trudinger-Moser integrand overflows at r = " +
                                                   std::to_string(u.grid().node(i)));
        s += w[i] * std::expm1(x);
    }
    return s;
}

/// int F(t w_n): plateau in closed form, log region by Gauss-Kronrod in x = log(1/r).
inline double moser_potential(const Model& model, const MoserFunction& mf, double t) {
    const double ln = std::log(static_cast<double>(mf.n));
    const double amp = t * mf.c / std::sqrt(mf.mass_quadrature * 2.0 * std::numbers::pi * ln);
    const double plateau = std::numbers::pi / (static_cast<double>(mf.n) * mf.n) * model.nonlinearity.F(t * mf.omega_at(0.0));
    auto integrand = [&](double x) { return model.nonlinearity.F(amp * x) * std::exp(-2.0 * x); };
    const double tail = 2.0 * std::numbers::pi *
                        boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, ln, 15, 1e-13);
    return plateau + tail;
}

/// g_n(t); RangeError when F(t w_n) overflows.
inline double g_fiber(const Model& model, const MoserFunction& mf, double t) {
    if (!(t > 0.0)) throw SpecError("g_n needs t > 0");
    return 0.5 * model.coefficient.M_hat(t * t * mf.omega_grad_sq()) - moser_potential(model, mf, t) / (t * t);
}

/// log of a lower bound for t^{-2} int F(t w_n) from the plateau, via F(v) v^2 >= (beta - delta) e^{alpha0 v^2} / (2 alpha0).
inline double log_potential_lower_bound(const Model& model, const MoserFunction& mf, double t, double delta) {
    const auto& nl = model.nonlinearity;
    const double v = t * mf.omega_at(0.0);
    const double n = static_cast<double>(mf.n);
    return std::log(std::numbers::pi / (n * n)) + std::log((nl.beta() - delta) / (2.0 * nl.alpha0())) +
           nl.alpha0() * v * v - 2.0 * std::log(v) - 2.0 * std::log(t);
}

struct MoserBoundRow {
    long n = 0;
    double max_g = 0.0;
    double argmax_t = 0.0;
    double bound = 0.0;
    double margin = 0.0;
    /// t_n^2 log n, expected to settle near a constant multiple of 1 / (alpha0 c^2).
    double t2_log_n = 0.0;
    /// Samples of t where g_n was certified negative by the overflow bound.
    std::size_t certified_samples = 0;
    bool pass = false;
};

struct MoserBoundReport {
    double c = 0.0;
    double bound = 0.0;
    std::vector<MoserBoundRow> rows;
    /// Smallest listed n from which every larger listed n passes.
    std::optional<long> empirical_n0;
    bool all_pass = false;

    nlohmann::json to_json() const {
        nlohmann::json rs = nlohmann::json::array();
        for (const auto& r : rows)
            rs.push_back({{"n", r.n},
                          {"max_g", r.max_g},
                          {"argmax_t", r.argmax_t},
                          {"bound", r.bound},
                          {"margin", r.margin},
                          {"t2_log_n", r.t2_log_n},
                          {"certified_samples", r.certified_samples},
                          {"pass", r.pass}});
        nlohmann::json j = {{"c", c}, {"bound", bound}, {"rows", rs}, {"all_pass", all_pass}};
        j["empirical_n0"] = empirical_n0 ? nlohmann::json(*empirical_n0) : nlohmann::json(nullptr);
        return j;
    }
};

inline MoserBoundRow moser_bound_row(const Model& model, double c, long n) {
    const auto& nl = model.nonlinearity;
    const double cap = 4.0 * std::numbers::pi / nl.alpha0();
    MoserBoundRow row;
    row.n = n;
    row.bound = 0.5 * model.coefficient.M_hat(cap);
    const auto mf = moser(n, c);
    const double delta = 0.5 * nl.beta();
    // Scan log t; past the overflow point g_n must be certified negative instead of evaluated.
    const int samples = 400;
    const double lo = std::log(1e-4), hi = std::log(1e3);
    double best = -std::numeric_limits<double>::infinity(), best_x = lo;
    int best_i = 0;
    std::vector<double> xs(samples + 1), gs(samples + 1, -std::numeric_limits<double>::infinity());
    for (int i = 0; i <= samples; ++i) {
        xs[i] = lo + (hi - lo) * i / samples;
        const double t = std::exp(xs[i]);
        try {
            gs[i] = g_fiber(model, mf, t);
        } catch (const RangeError&) {
            const double kin = 0.5 * model.coefficient.M_hat(t * t * mf.omega_grad_sq());
            if (!(log_potential_lower_bound(model, mf, t, delta) > std::log(kin)))
                throw NumericalFailure("g_n overflows but the lower bound does not certify it negative");
            ++row.certified_samples;
        }
        if (gs[i] > best) {
            best = gs[i];
            best_x = xs[i];
            best_i = i;
        }
    }
    if (best_i == 0 || best_i == samples || !(best > 0.0))
        throw NumericalFailure("could not bracket the positive hump of g_n");
    auto neg = [&](double x) {
        try {
            return -g_fiber(model, mf, std::exp(x));
        } catch (const RangeError&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    const auto r = boost::math::tools::brent_find_minima(neg, xs[best_i - 1], xs[best_i + 1], 50);
    row.argmax_t = std::exp(r.first);
    row.max_g = std::max(-r.second, best);
    if (-r.second < best) row.argmax_t = std::exp(best_x);
    row.margin = row.bound - row.max_g;
    row.pass = row.margin > 0.0;
    row.t2_log_n = row.argmax_t * row.argmax_t * std::log(static_cast<double>(n));
    return row;
}

inline MoserBoundReport mp_bound_check(const Model& model, double c, const std::vector<long>& n_list) {
    if (model.nonlinearity.kind() != Nonlinearity::Kind::exp_critical)
        throw SpecError("the Moser bound check needs the exponential nonlinearity");
    if (!(c > 0.0)) throw SpecError("mass parameter c must be positive");
    if (n_list.empty()) throw SpecError("n list is empty");
    const auto hyp = check_hypotheses(model);
    if (!hyp.all_applicable_pass()) throw HypothesisViolation("model fails the sampled hypotheses");
    MoserBoundReport rep;
    rep.c = c;
    rep.bound = 0.5 * model.coefficient.M_hat(4.0 * std::numbers::pi / model.nonlinearity.alpha0());
    for (long n : n_list) rep.rows.push_back(moser_bound_row(model, c, n));
    std::sort(rep.rows.begin(), rep.rows.end(), [](const auto& x, const auto& y) { return x.n < y.n; });
    rep.all_pass = true;
    for (auto it = rep.rows.rbegin(); it != rep.rows.rend(); ++it) {
        if (!it->pass) {
            rep.all_pass = false;
            break;
        }
        rep.empirical_n0 = it->n;
    }
    return rep;
}

}  // namespace kirchhoff
