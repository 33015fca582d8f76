// Acceptance run: one PASS/FAIL line per criterion, exit status 1 when any fails.

#include "kirchhoff/kirchhoff.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace kirchhoff;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    std::string failures;

    void require(bool ok, const std::string& what) {
        if (ok) return;
        failures += (failures.empty() ? "" : "; ") + what;
        pass = false;
    }
};

struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<void(Outcome&)> body;
};

GroundStateNorms norms(int dim, double p) {
    ShootOptions so;
    so.truncation_check = false;
    return GroundStateNorms::from(shoot_ground_state(dim, p, so));
}

OmegaQuery query(double k1, double k2, double k3, double k4, double p3, double p4) {
    return {k1, k2, k3, k4, 2.0, 4.0, p3, p4};
}

void omega_machinery(Outcome& o) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> AB(0.1, 10.0), Q(2.05, 3.95);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double A = AB(rng), B = AB(rng), q = Q(rng);
        const double cf = omega_closed_form(A, B, q);
        worst = std::max(worst, std::abs(omega(query(A, B, 0, 1, 3, q)).value - cf) / cf);
    }
    o.require(worst <= 1e-8, "closed form agreement");
    std::uniform_real_distribution<double> K(0.2, 5.0), P(2.2, 3.8), M(0.01, 100.0);
    int mono = 0, scal = 0;
    for (int i = 0; i < 50; ++i) {
        const auto q = query(K(rng), K(rng), K(rng), K(rng), P(rng), P(rng));
        const double base = omega(q).value;
        bool ok = true;
        for (int idx = 0; idx < 4; ++idx) {
            auto r = q;
            (&r.k1)[idx] *= 1.5;
            const double v = omega(r).value;
            ok = ok && (idx < 2 ? v > base : v < base);
        }
        mono += ok;
        const double A = K(rng), B = K(rng), qq = P(rng), m = M(rng);
        const double one = omega(query(A, B, 0, 1, 3, qq)).value;
        const double scaled = omega(query(A, B, 0, m, 3, qq)).value;
        scal += std::abs(scaled - one / m) <= 1e-10 * one / m;
    }
    o.require(mono == 50, "monotonicity");
    o.require(scal == 50, "scaling identity");
    o.detail << "max rel err " << worst << ", monotone " << mono << "/50, scaling " << scal << "/50";
}

void gn_extremal(Outcome& o) {
    std::mt19937_64 rng(7);
    double worst_chain = 0.0, worst_attain = 0.0, worst_ratio = 0.0;
    for (auto [n, p] : {std::pair{2, 4.0}, {4, 3.0}}) {
        const auto q = shoot_ground_state(n, p);
        worst_chain = std::max({worst_chain, std::abs(q.grad_sq - q.mass) / q.mass,
                                std::abs(2.0 / p * q.lp_power - q.mass) / q.mass});
        const double C = q.gn_constant();
        worst_attain = std::max(worst_attain, std::abs(gn_quotient(q.profile, p) - C) / C);
        const double gamma = n * (p - 2) / (2 * p);
        for (int k = 0; k < 20; ++k) {
            const oracle::RandomProfile g(rng);
            const double R = 20.0;
            const double m = oracle::radial_integral(n, [&](double r) { return g(r) * g(r); }, 0.0, R);
            const double d = oracle::radial_integral(n, [&](double r) { return std::pow(g.derivative(r), 2); }, 0.0, R);
            const double lp = oracle::radial_integral(n, [&](double r) { return std::pow(std::abs(g(r)), p); }, 0.0, R);
            const double quot = std::pow(lp, 1 / p) / (std::pow(d, gamma / 2) * std::pow(m, (1 - gamma) / 2));
            worst_ratio = std::max(worst_ratio, quot / C);
        }
    }
    o.require(worst_chain <= 1e-3, "identity chain");
    o.require(worst_ratio <= 1.0 + 1e-4, "GN inequality on random functions");
    o.require(worst_attain <= 1e-3, "attained by Q");
    o.detail << "chain err " << worst_chain << ", max quotient/C " << worst_ratio << ", attain err " << worst_attain;
}

void sobolev_stationary(Outcome& o) {
    std::mt19937_64 rng(4);
    double worst = 0.0;
    for (int n : {4, 5}) {
        const auto g = bubble_grid(n);
        const auto U = aubin_talenti_bubble(g);
        const double S = sobolev_quotient(U);
        for (int k = 0; k < 20; ++k) {
            const oracle::RandomProfile prof(rng);
            auto w = U;
            w.axpy(0.05, RadialFunction::sample(g, [&](double r) { return prof(r); }));
            worst = std::max(worst, (S - sobolev_quotient(w)) / S);
        }
    }
    o.require(worst <= 1e-4, "quotient decreased under a perturbation");
    o.detail << "largest relative decrease " << worst;
}

void moser_norms(Outcome& o) {
    const double ln = std::log(10.0);
    const double closed10 = ln / 200.0 + (0.25 - 0.0025 - ln / 200.0 - ln * ln / 200.0) / ln;
    o.require(std::abs(closed10 - 0.102487) <= 1e-6, "n=10 closed form");
    double grad_err = 0.0, mass_err = 0.0;
    for (long n : {10L, 100L, 1000L}) {
        const auto mf = moser(n, 1.0);
        grad_err = std::max(grad_err, std::abs(mf.grad_sq_quadrature - 1.0));
        mass_err = std::max(mass_err, std::abs(mf.mass_quadrature - mf.mass_exact));
    }
    o.require(grad_err <= 1e-5, "gradient norm");
    o.require(mass_err <= 1e-6, "mass closed form");
    o.detail << "grad err " << grad_err << ", mass err " << mass_err << ", n=10 mass " << closed10;
}

void moser_bound(Outcome& o) {
    const Model m{KirchhoffCoefficient::affine(1.0, 1.0), Nonlinearity::exp_critical(1.0, 1.0, 1.0)};
    const auto rep = mp_bound_check(m, 1.0, {100, 1000, 10000});
    o.detail << "bound " << rep.bound << ", margins";
    for (const auto& r : rep.rows) o.detail << " n=" << r.n << ":" << r.margin;
    o.require(rep.all_pass, "margin not positive at every listed n");
    const auto ext = mp_bound_check(m, 1.0, {100, 10000, 100000000L, 1000000000000L, 10000000000000000L,
                                             1000000000000000000L});
    o.detail << "; extended list empirical n0 = ";
    if (ext.empirical_n0) o.detail << *ext.empirical_n0;
    else o.detail << "none";
}

void n4_threshold(Outcome& o) {
    const double S = sobolev_constant(4);
    const double a = 1.0, b = 2.0 / (S * S);
    const auto q = norms(4, 3.0);
    const Model m = combined_model(4, 3.0, a, b);
    SolveParams prm;
    {
        const double c = 1.05 * a * q.l2;
        double trial_min = 0.0;
        for (double t = 0.01; t < 5.0; t *= 1.05) trial_min = std::min(trial_min, trial_energy(a, b, 3.0, 4, q, c, t));
        o.require(trial_min < 0.0, "closed-form fiber energy not negative at 1.05");
        const auto rep = minimize_on_sphere(m, c, prm);
        const bool conv = rep.status == SolveStatus::converged_minimizer && rep.candidate;
        o.require(conv, "no converged minimizer at 1.05");
        if (conv) {
            const auto& k = *rep.candidate;
            o.require(k.lambda < 0.0, "lambda sign");
            o.require(k.pohozaev_residual <= 1e-5 * k.pohozaev_scale, "Pohozaev residual");
            o.detail << "c=1.05: trial min " << trial_min << ", I " << k.energy.total << ", lambda " << k.lambda
                     << ", |G|/scale " << k.pohozaev_residual / k.pohozaev_scale;
        }
    }
    {
        const double c = 0.95 * a * q.l2;
        SolveParams low = prm;
        low.restarts = 12;
        const auto rep = minimize_on_sphere(m, c, low);
        o.require(rep.energy_infimum >= -1e-6, "infimum below -1e-6 at 0.95");
        o.require(rep.accepted.empty(), "nontrivial candidate at 0.95");
        o.detail << "; c=0.95: infimum " << rep.energy_infimum << ", accepted " << rep.accepted.size();
    }
}

void multiplier_sweep(Outcome& o) {
    SweepSpec s;
    s.dim = 5;
    s.p = ParamRange::list({2.5, 2.8, 2.9});
    s.a = ParamRange::list({0.1});
    s.b = ParamRange::list({0.005, 0.01, 0.02});
    s.c = ParamRange::list({4.0, 8.0, 12.0});
    s.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    const auto table = run_sweep(s);
    int converged = 0, bad = 0;
    double worst_gap = 0.0, worst_mass = 0.0;
    for (const auto& r : table) {
        if (r.min_status != "converged_minimizer") continue;
        ++converged;
        const bool ok = r.lambda && *r.lambda < 0.0 && r.multiplier_gap && *r.multiplier_gap <= 1e-2 &&
                        r.mass_error && *r.mass_error <= 1e-8;
        bad += !ok;
        if (r.multiplier_gap) worst_gap = std::max(worst_gap, *r.multiplier_gap);
        if (r.mass_error) worst_mass = std::max(worst_mass, *r.mass_error);
    }
    o.require(converged > 0, "no converged candidate in the sweep");
    o.require(bad == 0, std::to_string(bad) + " candidates violate the sign, gap or mass checks");
    o.detail << table.size() << " tuples, " << converged << " converged, max gap " << worst_gap << ", max mass err "
             << worst_mass;
}

void ic_structure(Outcome& o) {
    const Model m = combined_model(5, 2.9, 0.1, 0.01);
    SolveParams prm;
    double prev = std::numeric_limits<double>::infinity();
    int violations = 0;
    o.detail << "I_c:";
    for (double c : {3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0}) {
        const auto rep = minimize_on_sphere(m, c, prm);
        const double e = rep.energy_infimum;
        o.detail << " " << e;
        if (e > prev + 2 * prm.tol) ++violations;
        o.require(e <= 2 * prm.tol, "I_c positive at c=" + std::to_string(c));
        prev = std::min(prev, e);
    }
    o.require(violations == 0, "I_c increases along the grid");
}

void gradient_check(Outcome& o) {
    std::mt19937_64 rng(11);
    const Model models[] = {combined_model(5, 2.9, 0.3, 0.05),
                            {KirchhoffCoefficient::affine(1.0, 1.0), Nonlinearity::exp_critical(1.0, 1.0, 1.0)}};
    int ok = 0, total = 0;
    double worst_ratio = 0.0;
    for (const auto& m : models) {
        const int n = m.nonlinearity.dim();
        auto g = make_grid(n, 12.0, 1500, GridScheme::graded);
        auto smooth = [&] {
            const oracle::RandomProfile prof(rng);
            return RadialFunction::sample(g, [&](double r) { return prof(r) * (1.0 - r * r / 144.0); });
        };
        for (int k = 0; k < 10; ++k) {
            const auto u = smooth(), v = smooth();
            const double dd = directional_derivative(m, u, v);
            double err[2];
            const double hs[2] = {1e-3, 1e-4};
            for (int j = 0; j < 2; ++j) {
                auto up = u, um = u;
                up.axpy(hs[j], v);
                um.axpy(-hs[j], v);
                err[j] = std::abs((energy(m, up).total - energy(m, um).total) / (2 * hs[j]) - dd);
            }
            const double scale = std::max(1.0, std::abs(dd));
            ++total;
            const bool good = err[0] < 1e-4 * scale && err[1] < std::max(0.05 * err[0], 1e-9 * scale);
            ok += good;
            if (err[0] > 1e-9 * scale) worst_ratio = std::max(worst_ratio, err[1] / err[0]);
        }
    }
    o.require(ok == total, "finite differences");
    o.detail << ok << "/" << total << " pairs second order, worst err ratio " << worst_ratio;
}

void nonexistence(Outcome& o) {
    const double S = sobolev_constant(4);
    const Model m = combined_model(4, 3.5, 1.0, 2.0 / (S * S));
    const auto t = thresholds_for(m);
    o.require(t && t->c0, "c0 not computed");
    if (!t || !t->c0) return;
    ClassifyOptions opt;
    opt.solve.restarts = 12;
    const double c = 0.5 * *t->c0;
    const auto cl = classify(m, c, opt, t);
    o.require(cl.accepted_candidates == 0, "a nontrivial candidate passed the filters");
    o.require(cl.agreement == Agreement::corroborated, "phase record not corroborated");
    o.detail << "c0 " << *t->c0 << ", c " << c << ", branch " << cl.predicted.branch << ", infimum "
             << cl.energy_infimum << ", agreement " << to_string(cl.agreement);
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "Omega machinery", 5, omega_machinery},
        {2, "GN extremal", 30, gn_extremal},
        {3, "Sobolev bubble stationarity", 10, sobolev_stationary},
        {4, "Moser norms", 5, moser_norms},
        {5, "Moser mountain-pass bound", 60, moser_bound},
        {6, "N=4 p=3 threshold", 600, n4_threshold},
        {7, "multiplier sign and Pohozaev consistency", 900, multiplier_sweep},
        {8, "I_c structure", 900, ic_structure},
        {9, "gradient correctness", 5, gradient_check},
        {10, "non-existence corroboration", 600, nonexistence},
    };
    int failed = 0;
    for (const auto& cr : criteria) {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            cr.body(o);
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        o.require(secs < cr.budget_s, "runtime over budget");
        failed += !o.pass;
        std::string text = o.detail.str();
        if (!o.failures.empty()) text += " | failed: " + o.failures;
        std::printf("%s %2d %s (%.2f s / %.0f s): %s\n", o.pass ? "PASS" : "FAIL", cr.id, cr.name, secs, cr.budget_s,
                    text.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed ? 1 : 0;
}
