#pragma once

// The two-over-two power infimum
//   Omega = inf_{t>0} (k1 t^p1 + k2 t^p2) / (k3 t^p3 + k4 t^p4),
// its closed forms, the Sobolev constant, and the explicit mass thresholds
// of the combined power problem.

#include "kirchhoff/errors.hpp"
#include "kirchhoff/gn_ground_state.hpp"
#include "kirchhoff/radial_grid.hpp"

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace kirchhoff {

struct OmegaQuery {
    double k1 = 1.0, k2 = 1.0, k3 = 0.0, k4 = 1.0;
    double p1 = 2.0, p2 = 4.0, p3 = 3.0, p4 = 3.0;

    void validate() const {
        if (!(k1 > 0.0) || !(k2 > 0.0)) throw SpecError("Omega needs k1, k2 > 0");
        if (!(k3 >= 0.0) || !(k4 >= 0.0) || (k3 == 0.0 && k4 == 0.0))
            throw SpecError("Omega needs k3, k4 >= 0, not both zero");
        if (!(p1 < p2)) throw SpecError("Omega needs p1 < p2");
        auto inside = [&](double q) { return q > p1 && q < p2; };
        if (k3 > 0.0 && !inside(p3)) throw SpecError("Omega exponent p3 must lie in (p1, p2)");
        if (k4 > 0.0 && !inside(p4)) throw SpecError("Omega exponent p4 must lie in (p1, p2)");
    }
};

struct OmegaResult {
    double value = 0.0;
    double argmin = 0.0;
};

namespace detail {

inline double log_sum_exp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

inline double log_term(double k, double p, double x) {
    return k > 0.0 ? std::log(k) + p * x : -std::numeric_limits<double>::infinity();
}

}  // namespace detail

/// Log of the quotient at t = e^x.
inline double omega_log_quotient(const OmegaQuery& q, double x) {
    using detail::log_sum_exp, detail::log_term;
    return log_sum_exp(log_term(q.k1, q.p1, x), log_term(q.k2, q.p2, x)) -
           log_sum_exp(log_term(q.k3, q.p3, x), log_term(q.k4, q.p4, x));
}

inline OmegaResult omega(const OmegaQuery& q) {
    q.validate();
    auto phi = [&](double x) { return omega_log_quotient(q, x); };
    double lo = std::log(1e-6), hi = std::log(1e6);
    const int samples = 240;
    double best_x = 0.0, step = 0.0;
    for (int expand = 0;; ++expand) {
        step = (hi - lo) / samples;
        int best = 0;
        double best_v = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= samples; ++i) {
            const double v = phi(lo + i * step);
            if (v < best_v) {
                best_v = v;
                best = i;
            }
        }
        best_x = lo + best * step;
        if (best > 0 && best < samples) break;
        if (expand > 30) throw NumericalFailure("Omega minimum not bracketed");
        if (best == 0) lo -= std::log(10.0);
        else hi += std::log(10.0);
    }
    const auto r = boost::math::tools::brent_find_minima(phi, best_x - step, best_x + step, 52);
    return {std::exp(r.second), std::exp(r.first)};
}

/// Omega_{A,B,0,1}^{2,4,.,q} = 2 (q-2)^{-(q/2-1)} (4-q)^{-(2-q/2)} A^{2-q/2} B^{q/2-1}.
inline double omega_closed_form(double A, double B, double q) {
    if (!(A > 0.0) || !(B > 0.0)) throw SpecError("closed-form Omega needs A, B > 0");
    if (!(q > 2.0 && q < 4.0)) throw SpecError("closed-form Omega needs 2 < q < 4");
    return 2.0 * std::pow(q - 2.0, -(0.5 * q - 1.0)) * std::pow(4.0 - q, -(2.0 - 0.5 * q)) *
           std::pow(A, 2.0 - 0.5 * q) * std::pow(B, 0.5 * q - 1.0);
}

inline double critical_exponent(int dim) {
    if (dim < 3) throw SpecError("2* is defined for N >= 3");
    return 2.0 * dim / (dim - 2.0);
}

/// Graded grid wide enough for the algebraic tail of the Aubin-Talenti bubble.
inline GridPtr bubble_grid(int dim) { return make_grid(dim, 1e4, 40000, GridScheme::graded, 12.0); }

inline RadialFunction aubin_talenti_bubble(const GridPtr& grid) {
    const double e = -(grid->dim() - 2.0) / 2.0;
    return RadialFunction::sample(grid, [e](double r) { return std::pow(1.0 + r * r, e); });
}

inline double sobolev_quotient(const RadialFunction& u) {
    const double ps = critical_exponent(u.grid().dim());
    return grad_norm_sq(u) / std::pow(lp_power(u, ps), 2.0 / ps);
}

/// Best constant S in ||grad u||_2^2 >= S ||u||_{2*}^2, from the bubble's Rayleigh quotient.
inline double sobolev_constant(int dim) {
    if (dim < 3) throw SpecError("the Sobolev constant needs N >= 3");
    return sobolev_quotient(aubin_talenti_bubble(bubble_grid(dim)));
}

struct ExistenceCheck {
    int dim = 0;
    bool holds = false;
    double lhs = 0.0;
    double rhs = 0.0;
    /// Omega_{a,b,0,S^{-2*/2}}^{2,4,.,2*} for N >= 5.
    std::optional<double> omega_value;
};

/// N >= 5: (2a/(4-2*))^{(4-2*)/2} (2b/(2*-2))^{(2*-2)/2} > S^{-2*/2}; N = 4: b > 1/S^2.
inline ExistenceCheck existence_condition(double a, double b, int dim, double sobolev) {
    if (dim < 4) throw SpecError("the existence condition is stated for N >= 4");
    ExistenceCheck ec;
    ec.dim = dim;
    if (dim == 4) {
        ec.lhs = b;
        ec.rhs = 1.0 / (sobolev * sobolev);
        ec.holds = ec.lhs > ec.rhs;
        return ec;
    }
    const double ps = critical_exponent(dim);
    ec.lhs = std::pow(2.0 * a / (4.0 - ps), 0.5 * (4.0 - ps)) * std::pow(2.0 * b / (ps - 2.0), 0.5 * (ps - 2.0));
    ec.rhs = std::pow(sobolev, -0.5 * ps);
    ec.holds = ec.lhs > ec.rhs;
    ec.omega_value = omega({a, b, 0.0, std::pow(sobolev, -0.5 * ps), 2.0, 4.0, 3.0, ps}).value;
    return ec;
}

enum class PowerRegime { mass_subcritical, mass_critical, mass_supercritical };

inline std::string to_string(PowerRegime r) {
    switch (r) {
        case PowerRegime::mass_subcritical: return "mass_subcritical";
        case PowerRegime::mass_critical: return "mass_critical";
        default: return "mass_supercritical";
    }
}

/// Position of p relative to 2 + 4/N (for N = 4 this is 3).
inline PowerRegime power_regime(int dim, double p) {
    const double pc = 2.0 + 4.0 / dim;
    if (std::abs(p - pc) <= 1e-12) return PowerRegime::mass_critical;
    return p < pc ? PowerRegime::mass_subcritical : PowerRegime::mass_supercritical;
}

struct ThresholdSet {
    int dim = 0;
    double a = 0.0, b = 0.0, p = 0.0;
    double sobolev = 0.0;
    double gn_constant = 0.0;
    double q_l2 = 0.0;
    PowerRegime regime = PowerRegime::mass_subcritical;
    ExistenceCheck existence;
    /// Non-existence radius: no solution for c below it.
    std::optional<double> c0;
    /// The delta used in the supercritical N >= 5 non-existence radius.
    std::optional<double> c0_delta;
    /// N = 4, p in (3,4): explicit closed-form lower bound for c0.
    std::optional<double> c0_display;
    std::optional<double> c1_lower;
    std::optional<double> c1_upper;
    /// Closed-form c1 where it is known exactly (N = 4, p = 3; mass-subcritical: 0).
    std::optional<double> c1_exact;
    /// L2-critical N >= 5: the quoted upper bound a^{N/4} ||Q||_2.
    std::optional<double> c1_upper_quoted;
    std::optional<double> c_star;
    /// c_* from solving its defining Omega equation, for comparison with the closed form.
    std::optional<double> c_star_definition;
    std::vector<std::string> notes;

    nlohmann::json to_json() const {
        auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
        nlohmann::json ex = {{"holds", existence.holds}, {"lhs", existence.lhs}, {"rhs", existence.rhs},
                             {"omega", opt(existence.omega_value)}};
        return {{"dim", dim},
                {"a", a},
                {"b", b},
                {"p", p},
                {"S", sobolev},
                {"C_GN", gn_constant},
                {"Q_l2", q_l2},
                {"regime", to_string(regime)},
                {"existence_condition", ex},
                {"c0", opt(c0)},
                {"c0_delta", opt(c0_delta)},
                {"c0_display", opt(c0_display)},
                {"c1_lower", opt(c1_lower)},
                {"c1_upper", opt(c1_upper)},
                {"c1_exact", opt(c1_exact)},
                {"c1_upper_quoted", opt(c1_upper_quoted)},
                {"c_star", opt(c_star)},
                {"c_star_definition", opt(c_star_definition)},
                {"notes", notes}};
    }
};

/// Norms of the GN extremal needed by the threshold formulas.
struct GroundStateNorms {
    double l2 = 0.0;          // ||Q||_2
    double crit_power = 0.0;  // ||Q||_{2*}^{2*}
    double gn_constant = 0.0;

    static GroundStateNorms from(const GroundStateProfile& q) {
        return {q.l2_norm(), q.crit_power, q.gn_constant()};
    }
};

namespace detail {

/// Largest x in (0, hi) with pred(x), assuming pred is true near 0 and monotone.
template <class Pred>
double sup_admissible(Pred&& pred, double hi) {
    double lo = 0.0;
    if (pred(hi)) return hi;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (pred(mid)) lo = mid;
        else hi = mid;
    }
    return lo;
}

/// Root of a monotone increasing function on (0, inf) by geometric bracketing then TOMS748.
template <class F>
double increasing_root(F&& f, double guess) {
    double lo = guess, hi = guess;
    int n = 0;
    while (f(lo) > 0.0) {
        lo /= 2.0;
        if (++n > 200) throw NumericalFailure("root bracketing failed below");
    }
    while (f(hi) < 0.0) {
        hi *= 2.0;
        if (++n > 400) throw NumericalFailure("root bracketing failed above");
    }
    if (lo == hi) return lo;
    std::uintmax_t it = 200;
    const auto r = boost::math::tools::toms748_solve(
        f, lo, hi, [](double x, double y) { return std::abs(y - x) <= 1e-14 * std::abs(y); }, it);
    return 0.5 * (r.first + r.second);
}

}  // namespace detail

/// Non-existence radius; see ThresholdSet::c0.
inline double nonexistence_c0(const ThresholdSet& base, double* delta_out = nullptr) {
    const int n = base.dim;
    const double a = base.a, b = base.b, p = base.p, S = base.sobolev, q = base.q_l2;
    if (n < 4) throw SpecError("non-existence radius is stated for N >= 4");
    if (!base.existence.holds) throw HypothesisViolation("existence condition fails");
    const auto regime = power_regime(n, p);
    if (n == 4) {
        if (regime == PowerRegime::mass_critical) return a * q;
        if (!(p > 3.0 && p < 4.0)) throw SpecError("N = 4 non-existence radius needs p in [3, 4)");
        const double w = omega_closed_form(a, b - 1.0 / (S * S), 2.0 * (p - 2.0));
        return std::pow(std::pow(q, p - 2.0) * w / (p - 2.0), 1.0 / (4.0 - p));
    }
    const double ps = critical_exponent(n);
    if (!(p < ps)) throw SpecError("p must be below 2*");
    if (regime == PowerRegime::mass_critical) {
        const double br = a - (4.0 - ps) / (2.0 * std::pow(S, n / (n - 4.0))) *
                                  std::pow((ps - 2.0) / (2.0 * b), 2.0 / (n - 4.0));
        if (!(br > 0.0)) throw HypothesisViolation("non-existence bracket is not positive");
        return q * std::pow(br, 0.25 * n);
    }
    if (regime != PowerRegime::mass_supercritical) throw SpecError("non-existence radius needs p >= 2 + 4/N");
    const double kcrit = std::pow(S, -0.5 * ps);
    auto admissible = [&](double d) {
        return omega({a - d, b - d, 0.0, kcrit, 2.0, 4.0, 3.0, ps}).value > 1.0;
    };
    // c0 grows with delta, so take the supremum of admissible values.
    const double dmax = detail::sup_admissible(admissible, std::min(a, b) * (1.0 - 1e-12));
    const double delta = dmax * (1.0 - 1e-9);
    if (!(delta > 0.0)) throw HypothesisViolation("no admissible delta");
    if (delta_out) *delta_out = delta;
    const double p3 = 0.5 * n * (p - 2.0);
    const double w = omega({2.0 * delta, 2.0 * delta, 1.0, 0.0, 2.0, 4.0, p3, ps}).value;
    return std::pow(2.0 * std::pow(q, p - 2.0) * w / (n * (p - 2.0)), 2.0 / (2.0 * p - n * (p - 2.0)));
}

/// N = 4, p in (3,4): explicit lower bound a||Q||^{(p-2)/(4-p)} / ((4-p)(p-2)^{1/(4-p)}) [(b-1/S^2)/(p-3)]^{(p-3)/(4-p)}.
inline double nonexistence_c0_display_n4(double a, double b, double p, double S, double q) {
    if (!(p > 3.0 && p < 4.0)) throw SpecError("explicit N = 4 bound needs p in (3, 4)");
    const double e = b - 1.0 / (S * S);
    if (!(e > 0.0)) throw HypothesisViolation("needs b > 1/S^2");
    return a * std::pow(q, (p - 2.0) / (4.0 - p)) / ((4.0 - p) * std::pow(p - 2.0, 1.0 / (4.0 - p))) *
           std::pow(e / (p - 3.0), (p - 3.0) / (4.0 - p));
}

inline double c1_exact_n4_p3(double a, double q_l2) {
    if (!(a > 0.0)) throw SpecError("a must be positive");
    return a * q_l2;
}

/// ||Q||_2 [a - (4-2*)/((2*)^{(N-2)/(N-4)} S^{N/(N-4)}) (2(2*-2)/b)^{2/(N-4)}]^{N/4}.
inline double c_star(double a, double b, int dim, double S, double q_l2) {
    if (dim < 5) throw SpecError("c_* is defined for N >= 5");
    const double n = dim, ps = critical_exponent(dim);
    const double br = a - (4.0 - ps) / (std::pow(ps, (n - 2.0) / (n - 4.0)) * std::pow(S, n / (n - 4.0))) *
                              std::pow(2.0 * (ps - 2.0) / b, 2.0 / (n - 4.0));
    if (!(br > 0.0)) throw HypothesisViolation("c_* bracket is not positive");
    return q_l2 * std::pow(br, 0.25 * n);
}

/// c_* as the root of 2* S^{2*/2} Omega_{A,B,0,1}^{2,4,.,2*} = 1 with A = a/2 - c^{4/N}/(2||Q||^{4/N}), B = b/4.
inline double c_star_from_definition(double a, double b, int dim, double S, double q_l2) {
    const double n = dim, ps = critical_exponent(dim);
    // Omega scales as A^{(4-2*)/2}; solve for A first.
    const double base = ps * std::pow(S, 0.5 * ps) * omega_closed_form(1.0, b / 4.0, ps);
    const double A = std::pow(1.0 / base, 2.0 / (4.0 - ps));
    const double br = a - 2.0 * A;
    if (!(br > 0.0)) throw HypothesisViolation("c_* definition has no positive root");
    return q_l2 * std::pow(br, 0.25 * n);
}

/// Lower bound for c1 when p > 2 + 4/N, N >= 5, from the largest k3 keeping
/// Omega_{a/2,b/4,k3,1/(2* S^{2*/2})}^{2,4,N(p-2)/2,2*} above 1.
inline std::optional<double> c1_lower_supercritical(double a, double b, double p, int dim, double S, double q) {
    const double ps = critical_exponent(dim);
    const double p3 = 0.5 * dim * (p - 2.0);
    const double k4 = 1.0 / (ps * std::pow(S, 0.5 * ps));
    auto ok = [&](double k3) { return omega({a / 2.0, b / 4.0, k3, k4, 2.0, 4.0, p3, ps}).value > 1.0; };
    if (!ok(0.0 + 1e-300)) return std::nullopt;
    double hi = 1.0;
    while (ok(hi)) hi *= 2.0;
    const double sigma = detail::sup_admissible(ok, hi);
    return std::pow(2.0 * std::pow(q, p - 2.0) * sigma, 2.0 / (2.0 * p - dim * (p - 2.0)));
}

/// Smallest c at which the trial family Q_t reaches negative energy: an upper bound for c1.
inline double c1_upper_trial(double a, double b, double p, int dim, const GroundStateNorms& q) {
    const double n = dim;
    const double p3 = 0.5 * n * (p - 2.0);
    const double ql = q.l2;
    if (!(p3 > 2.0)) throw SpecError("trial-family bound needs p > 2 + 4/N");
    if (dim == 4) {
        const double B = b / 4.0 - q.crit_power / (4.0 * std::pow(ql, 4));
        if (!(B > 0.0)) throw HypothesisViolation("trial family has a non-positive quartic coefficient");
        // min_s (a/2 s^2 + B s^4 - k3 s^{p3}) < 0 iff k3 > Omega_{a/2,B,0,1}^{2,4,.,p3}.
        const double w = omega_closed_form(a / 2.0, B, p3);
        return std::pow(2.0 * std::pow(ql, p - 2.0) * w, 1.0 / (p - p3));
    }
    const double ps = critical_exponent(dim);
    const double k4 = q.crit_power / (ps * std::pow(ql, ps));
    auto f = [&](double c) {
        const double k3 = std::pow(c, p - p3) / (2.0 * std::pow(ql, p - 2.0));
        return 1.0 - omega({a / 2.0, b / 4.0, k3, k4, 2.0, 4.0, p3, ps}).value;
    };
    return detail::increasing_root(f, ql);
}

/// I(Q_t) for Q_t = c t^{N/2} Q(t x) / ||Q||_2 under M = a + bt and the combined power f.
inline double trial_energy(double a, double b, double p, int dim, const GroundStateNorms& q, double c, double t) {
    const double n = dim;
    double e = 0.5 * a * c * c * t * t + 0.25 * b * std::pow(c * t, 4) -
               std::pow(c, p) * std::pow(t, 0.5 * n * p - n) / (2.0 * std::pow(q.l2, p - 2.0));
    if (dim >= 3) {
        const double ps = critical_exponent(dim);
        e -= std::pow(c, ps) * q.crit_power * std::pow(t, ps) / (ps * std::pow(q.l2, ps));
    }
    return e;
}

inline ThresholdSet compute_thresholds(double a, double b, double p, int dim, const GroundStateNorms& q,
                                       double sobolev) {
    if (!(a > 0.0) || !(b > 0.0)) throw SpecError("thresholds need a, b > 0");
    if (dim < 4) throw SpecError("thresholds are stated for N >= 4");
    const double ps = critical_exponent(dim);
    if (!(p > 2.0 && p < ps)) throw SpecError("thresholds need 2 < p < 2*");
    ThresholdSet t;
    t.dim = dim;
    t.a = a;
    t.b = b;
    t.p = p;
    t.sobolev = sobolev;
    t.gn_constant = q.gn_constant;
    t.q_l2 = q.l2;
    t.regime = power_regime(dim, p);
    t.existence = existence_condition(a, b, dim, sobolev);
    if (!t.existence.holds) {
        t.notes.push_back("existence condition fails; threshold constants not evaluated");
        return t;
    }
    auto attempt = [&](const char* what, auto&& fn) {
        try {
            fn();
        } catch (const HypothesisViolation& e) {
            t.notes.push_back(std::string(what) + ": " + e.what());
        }
    };
    if (t.regime == PowerRegime::mass_subcritical) {
        t.c1_exact = 0.0;
        return t;
    }
    if (dim == 4) {
        if (t.regime == PowerRegime::mass_critical) {
            t.c1_exact = c1_exact_n4_p3(a, q.l2);
            t.c0 = t.c1_exact;
            return t;
        }
        attempt("c0", [&] { t.c0 = nonexistence_c0(t); });
        attempt("c0_display", [&] { t.c0_display = nonexistence_c0_display_n4(a, b, p, sobolev, q.l2); });
        // c1 stays positive while Omega_{a/2,(b-1/S^2)/4,0,k4}^{2,4,.,2(p-2)} > 1.
        const double w = omega_closed_form(a / 2.0, 0.25 * (b - 1.0 / (sobolev * sobolev)), 2.0 * (p - 2.0));
        t.c1_lower = std::pow(2.0 * std::pow(q.l2, p - 2.0) * w, 1.0 / (4.0 - p));
        attempt("c1_upper", [&] { t.c1_upper = c1_upper_trial(a, b, p, dim, q); });
        return t;
    }
    if (t.regime == PowerRegime::mass_critical) {
        attempt("c0", [&] { t.c0 = nonexistence_c0(t); });
        attempt("c_star", [&] { t.c_star = c_star(a, b, dim, sobolev, q.l2); });
        attempt("c_star_definition", [&] { t.c_star_definition = c_star_from_definition(a, b, dim, sobolev, q.l2); });
        t.c1_upper_quoted = std::pow(a, 0.25 * dim) * q.l2;
        t.c1_lower = t.c_star;
        t.c1_upper = t.c1_upper_quoted;
        return t;
    }
    attempt("c0", [&] {
        double d = 0.0;
        t.c0 = nonexistence_c0(t, &d);
        t.c0_delta = d;
    });
    t.c1_lower = c1_lower_supercritical(a, b, p, dim, sobolev, q.l2);
    if (!t.c1_lower) t.notes.push_back("c1 lower bound: the strict Omega inequality for (a/2, b/4) fails");
    attempt("c1_upper", [&] { t.c1_upper = c1_upper_trial(a, b, p, dim, q); });
    return t;
}

}  // namespace kirchhoff
