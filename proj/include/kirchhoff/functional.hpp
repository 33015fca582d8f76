#pragma once

// Energy I(u) = M_hat(|grad u|^2)/2 - int F(u), the Pohozaev functional, the
// fiber energy along mass-preserving dilations, and multiplier estimators.

#include "kirchhoff/models.hpp"
#include "kirchhoff/radial_grid.hpp"
#include "kirchhoff/tridiag.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <limits>
#include <optional>

namespace kirchhoff {

struct EnergyBreakdown {
    double kinetic = 0.0;
    double potential = 0.0;
    double total = 0.0;
    double grad_l2 = 0.0;
    double mass_l2 = 0.0;

    nlohmann::json to_json() const {
        return {{"kinetic", kinetic}, {"potential", potential}, {"total", total}, {"gradL2", grad_l2},
                {"massL2", mass_l2}};
    }
    static EnergyBreakdown from_json(const nlohmann::json& j) {
        return {j.at("kinetic").get<double>(), j.at("potential").get<double>(), j.at("total").get<double>(),
                j.at("gradL2").get<double>(), j.at("massL2").get<double>()};
    }
};

inline double potential(const Model& model, const RadialFunction& u) {
    const auto w = u.grid().weights();
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * model.nonlinearity.F(u[i]);
    return s;
}

inline EnergyBreakdown energy(const Model& model, const RadialFunction& u) {
    EnergyBreakdown e;
    e.grad_l2 = grad_norm_sq(u);
    e.mass_l2 = mass(u);
    e.kinetic = 0.5 * model.coefficient.M_hat(e.grad_l2);
    e.potential = potential(model, u);
    e.total = e.kinetic - e.potential;
    return e;
}

/// G(u) = M(D) D + N int F(u) - (N/2) int f(u) u.
inline double pohozaev(const Model& model, const RadialFunction& u) {
    const auto& g = u.grid();
    const double n = g.dim();
    const double d = grad_norm_sq(u);
    const auto w = g.weights();
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
        s += w[i] * (n * model.nonlinearity.F(u[i]) - 0.5 * n * model.nonlinearity.f(u[i]) * u[i]);
    return model.coefficient.M(d) * d + s;
}

/// J(u, s) = I(T(u, s)) through the change of variables x -> e^{-s} x; no resampling.
inline double fiber_energy(const Model& model, const RadialFunction& u, double s) {
    const auto& g = u.grid();
    const double n = g.dim();
    const double amp = std::exp(0.5 * n * s);
    const auto w = g.weights();
    double pot = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) pot += w[i] * model.nonlinearity.F(amp * u[i]);
    return 0.5 * model.coefficient.M_hat(std::exp(2.0 * s) * grad_norm_sq(u)) - std::exp(-n * s) * pot;
}

/// G(T(u, s)), again by change of variables.
inline double fiber_pohozaev(const Model& model, const RadialFunction& u, double s) {
    const auto& g = u.grid();
    const double n = g.dim();
    const double amp = std::exp(0.5 * n * s);
    const auto w = g.weights();
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double v = amp * u[i];
        acc += w[i] * (n * model.nonlinearity.F(v) - 0.5 * n * model.nonlinearity.f(v) * v);
    }
    const double d = std::exp(2.0 * s) * grad_norm_sq(u);
    return model.coefficient.M(d) * d + std::exp(-n * s) * acc;
}

/// J(u, s) evaluated on the resampled dilation; subject to truncation loss.
inline double fiber_energy_resampled(const Model& model, const RadialFunction& u, double s) {
    return energy(model, fiber_scale(u, s)).total;
}

/// Discrete stiffness matrix on the free nodes r_0..r_{K-1}; r_K is Dirichlet.
inline Tridiagonal stiffness(const RadialGrid& g) {
    const auto a = g.conductance();
    const std::size_t n = g.size() - 1;
    Tridiagonal t;
    t.diag.assign(n, 0.0);
    t.off.assign(n - 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        t.diag[i] = a[i] + (i > 0 ? a[i - 1] : 0.0);
        if (i + 1 < n) t.off[i] = -a[i];
    }
    return t;
}

/// -M(D) Delta u - lambda u - f(u); zero at the Dirichlet node.
inline RadialFunction l2_gradient(const Model& model, const RadialFunction& u, double lambda) {
    const double m = model.coefficient.M(grad_norm_sq(u));
    RadialFunction r = neg_laplacian(u);
    const std::size_t last = u.size() - 1;
    for (std::size_t i = 0; i < last; ++i) r[i] = m * r[i] - lambda * u[i] - model.nonlinearity.f(u[i]);
    r[last] = 0.0;
    return r;
}

/// <I'(u), v> for directions v vanishing at r_max.
inline double directional_derivative(const Model& model, const RadialFunction& u, const RadialFunction& v) {
    return inner(l2_gradient(model, u, 0.0), v);
}

inline double h1_norm(const RadialFunction& u) { return std::sqrt(grad_norm_sq(u) + mass(u)); }

struct MultiplierEstimate {
    double lambda = 0.0;
    /// (N/2 - N/p - 1) ||u||_p^p / c^2, only for the combined power model.
    std::optional<double> lambda_poh;
    /// |lambda - lambda_poh| / |lambda|.
    std::optional<double> gap;
};

inline MultiplierEstimate multiplier_estimate(const Model& model, const RadialFunction& u, double c) {
    if (!(c > 0.0)) throw SpecError("mass parameter c must be positive");
    const double m = mass(u);
    if (std::abs(m - c * c) > 1e-6 * c * c) throw SpecError("multiplier_estimate needs u on the mass sphere");
    const double d = grad_norm_sq(u);
    const auto w = u.grid().weights();
    double fu = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) fu += w[i] * model.nonlinearity.f(u[i]) * u[i];
    MultiplierEstimate est;
    est.lambda = (model.coefficient.M(d) * d - fu) / (c * c);
    const auto& nl = model.nonlinearity;
    if (nl.kind() == Nonlinearity::Kind::power && nl.include_critical()) {
        const double n = u.grid().dim(), p = nl.p();
        est.lambda_poh = (0.5 * n - n / p - 1.0) * lp_power(u, p) / (c * c);
        if (est.lambda != 0.0) est.gap = std::abs(est.lambda - *est.lambda_poh) / std::abs(est.lambda);
    }
    return est;
}

/// W-weighted L2 norm of the residual with lambda from the estimator.
inline double pde_residual(const Model& model, const RadialFunction& u, double lambda) {
    return std::sqrt(mass(l2_gradient(model, u, lambda)));
}

struct CriticalPointCandidate {
    RadialFunction u;
    double lambda = 0.0;
    std::optional<double> lambda_poh;
    std::optional<double> multiplier_gap;
    EnergyBreakdown energy;
    double pohozaev_residual = 0.0;
    double pde_residual = 0.0;
    double h1_norm = 0.0;

    /// Scale for the Pohozaev residual: M(D) D.
    double pohozaev_scale = 0.0;

    nlohmann::json to_json() const {
        nlohmann::json j = {{"lambda", lambda},
                            {"energy", energy.to_json()},
                            {"pohozaev_residual", pohozaev_residual},
                            {"pohozaev_scale", pohozaev_scale},
                            {"pde_residual", pde_residual},
                            {"h1_norm", h1_norm}};
        j["lambda_poh"] = lambda_poh ? nlohmann::json(*lambda_poh) : nlohmann::json(nullptr);
        j["multiplier_gap"] = multiplier_gap ? nlohmann::json(*multiplier_gap) : nlohmann::json(nullptr);
        return j;
    }
};

inline CriticalPointCandidate make_candidate(const Model& model, const RadialFunction& u, double c) {
    CriticalPointCandidate cand;
    cand.u = u;
    const auto est = multiplier_estimate(model, u, c);
    cand.lambda = est.lambda;
    cand.lambda_poh = est.lambda_poh;
    cand.multiplier_gap = est.gap;
    cand.energy = energy(model, u);
    cand.pohozaev_residual = std::abs(pohozaev(model, u));
    cand.pohozaev_scale = model.coefficient.M(cand.energy.grad_l2) * cand.energy.grad_l2;
    cand.pde_residual = pde_residual(model, u, est.lambda);
    cand.h1_norm = std::sqrt(cand.energy.grad_l2 + cand.energy.mass_l2);
    return cand;
}

}  // namespace kirchhoff
