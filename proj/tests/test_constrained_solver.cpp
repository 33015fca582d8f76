#include "kirchhoff/classify.hpp"
#include "kirchhoff/solver.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace kirchhoff;

namespace {

RadialFunction gaussian(int n, double c, double w, double r_max = 30.0, std::size_t cells = 4000) {
    auto g = make_grid(n, r_max, cells, GridScheme::graded);
    return normalize_mass(RadialFunction::sample(g, [&](double r) { return std::exp(-r * r / (2 * w * w)); }), c);
}

double q_l2(int n, double p) {
    ShootOptions so;
    so.truncation_check = false;
    return shoot_ground_state(n, p, so).l2_norm();
}

// Invariants every converged candidate must satisfy.
void expect_converged(const Model& m, const CriticalPointCandidate& k, double c, double tol) {
    EXPECT_NEAR(mass(k.u), c * c, 1e-8 * c * c);
    EXPECT_LE(k.pde_residual, tol * h1_norm(k.u));
    const double D = grad_norm_sq(k.u);
    EXPECT_LE(k.pohozaev_residual, tol * m.coefficient.M(D) * D);
    EXPECT_LT(k.lambda, 0.0);
    if (k.multiplier_gap) {
        EXPECT_LE(*k.multiplier_gap, 1e-2);
    }
}

}  // namespace

TEST(SolveParams, Validation) {
    SolveParams p;
    EXPECT_NO_THROW(p.validate());
    p.tol = 0.0;
    EXPECT_THROW(p.validate(), SpecError);
    p = {};
    p.max_iterations = 0;
    EXPECT_THROW(p.validate(), SpecError);
    p = {};
    p.beads = 2;
    EXPECT_THROW(p.validate(), SpecError);
    EXPECT_THROW(minimize_on_sphere(combined_model(5, 2.9, 0.1, 0.01), -1.0), SpecError);
}

TEST(Projection, PointOnManifoldStaysPut) {
    const auto m = combined_model(5, 2.9, 0.1, 0.01);
    // The fiber root lies about 20 widths out, so the grid must be wide.
    const auto u = gaussian(5, 8.0, 2.0, 400.0, 8000);
    const auto first = pohozaev_project(m, u, 8.0);
    ASSERT_FALSE(first.monotone);
    const auto again = pohozaev_project(m, first.v, 8.0);
    EXPECT_NEAR(again.s, 0.0, 1e-6);
}

TEST(Projection, RootOnGaussianFiber) {
    const auto m = combined_model(5, 2.9, 0.1, 0.01);
    const auto u = gaussian(5, 8.0, 1.0, 400.0, 8000);
    const auto pr = pohozaev_project(m, u, 8.0);
    ASSERT_FALSE(pr.monotone);
    EXPECT_LT(std::abs(pohozaev(m, pr.v)), 1e-8);
    EXPECT_NEAR(mass(pr.v), 64.0, 1e-10 * 64.0);
    // Power identity of the Pohozaev relation at the root.
    const double D = grad_norm_sq(pr.v), p = 2.9, n = 5.0;
    const double lhs = m.coefficient.M(D) * D;
    const double rhs = n * (p - 2) / (2 * p) * lp_power(pr.v, p) + lp_power(pr.v, 10.0 / 3.0);
    EXPECT_NEAR(lhs, rhs, 1e-6 * lhs);
}

TEST(Projection, RejectsOffSphere) {
    const auto m = combined_model(5, 2.9, 0.1, 0.01);
    EXPECT_THROW(pohozaev_project(m, gaussian(5, 8.0, 1.0), 7.0), SpecError);
}

TEST(Descent, EnergyNonIncreasing) {
    const auto m = combined_model(5, 2.9, 0.1, 0.01);
    const auto u = gaussian(5, 8.0, 1.0);
    detail::Discretization d(u.grid_ptr());
    SolveParams prm;
    double prev = detail::discrete_energy(m, d, detail::free_values(u));
    for (std::size_t k : {1, 2, 4, 8, 16, 32, 64}) {
        const auto r = detail::descend(m, d, detail::free_values(u), 8.0, prm, k, 0.0);
        EXPECT_LE(r.energy, prev + 1e-12 * std::abs(prev));
        prev = r.energy;
    }
}

TEST(Minimize, SupercriticalAboveThreshold) {
    const auto m = combined_model(5, 2.9, 0.1, 0.01);
    SolveParams prm;
    const auto rep = minimize_on_sphere(m, 8.0, prm);
    ASSERT_EQ(rep.status, SolveStatus::converged_minimizer) << rep.note;
    ASSERT_TRUE(rep.candidate);
    EXPECT_LT(rep.candidate->energy.total, 0.0);
    expect_converged(m, *rep.candidate, 8.0, prm.tol);
    EXPECT_NEAR(rep.energy_infimum, rep.candidate->energy.total, 1e-12);
    const auto j = rep.to_json();
    EXPECT_EQ(j.at("status"), "converged_minimizer");
}

TEST(Minimize, MassSubcriticalN4) {
    const double S = sobolev_constant(4);
    const auto m = combined_model(4, 2.5, 1.0, 2 / (S * S));
    SolveParams prm;
    for (double c : {3.0, 10.0}) {
        const auto rep = minimize_on_sphere(m, c, prm);
        ASSERT_EQ(rep.status, SolveStatus::converged_minimizer) << "c=" << c << " " << rep.note;
        EXPECT_LT(rep.candidate->energy.total, 0.0);
        expect_converged(m, *rep.candidate, c, prm.tol);
    }
}

TEST(Minimize, N4MassCriticalBelowThreshold) {
    const double S = sobolev_constant(4);
    const auto m = combined_model(4, 3.0, 1.0, 2 / (S * S));
    const double c = 0.5 * q_l2(4, 3.0);
    SolveParams prm;
    prm.restarts = 12;
    const auto rep = minimize_on_sphere(m, c, prm);
    EXPECT_EQ(rep.status, SolveStatus::no_nontrivial_solution_found);
    EXPECT_TRUE(rep.accepted.empty());
    EXPECT_GE(rep.energy_infimum, -1e-6);
    EXPECT_FALSE(rep.note.empty());
}

TEST(Minimize, IcNonIncreasingInC) {
    const auto m = combined_model(5, 2.9, 0.1, 0.01);
    SolveParams prm;
    double prev = 1.0;
    for (double c : {6.0, 8.0, 10.0}) {
        const auto rep = minimize_on_sphere(m, c, prm);
        EXPECT_LE(rep.energy_infimum, prev + 2 * prm.tol);
        EXPECT_LE(rep.energy_infimum, 2 * prm.tol);
        prev = rep.energy_infimum;
    }
}

TEST(MountainPass, SaddleBelowFirstThreshold) {
    const auto m = combined_model(5, 2.9, 0.1, 0.01);
    SolveParams prm;
    const double c = 5.4;
    const auto rep = mountain_pass(m, c, prm);
    ASSERT_EQ(rep.status, SolveStatus::converged_mountain_pass) << rep.note;
    ASSERT_TRUE(rep.candidate && rep.path_level);
    expect_converged(m, *rep.candidate, c, prm.tol);
    EXPECT_GT(*rep.path_level, 0.0);
    // The string's top bead sits near the polished saddle.
    EXPECT_NEAR(rep.candidate->energy.total, *rep.path_level, 0.1 * *rep.path_level);
    const auto mn = minimize_on_sphere(m, c, prm);
    EXPECT_GT(rep.candidate->energy.total, std::min(0.0, mn.energy_infimum));
}

TEST(Classify, N4MassCriticalAboveThreshold) {
    const double S = sobolev_constant(4);
    const auto m = combined_model(4, 3.0, 1.0, 2 / (S * S));
    const auto cl = classify(m, 1.2 * q_l2(4, 3.0));
    EXPECT_EQ(cl.predicted.branch, "N=4 (ii-1)");
    EXPECT_EQ(cl.predicted.expect, Expectation::ground_state);
    EXPECT_EQ(cl.agreement, Agreement::agree) << cl.note;
    EXPECT_EQ(cl.ic_sign, "negative");
    ASSERT_TRUE(cl.lambda);
    EXPECT_LT(*cl.lambda, 0.0);
}

TEST(Classify, N4BelowNonExistenceRadius) {
    const double S = sobolev_constant(4);
    const auto m = combined_model(4, 3.5, 1.0, 2 / (S * S));
    const auto t = thresholds_for(m);
    ASSERT_TRUE(t && t->c0);
    const auto cl = classify(m, 0.5 * *t->c0, {}, t);
    EXPECT_EQ(cl.predicted.branch, "N=4 (i-4)");
    EXPECT_EQ(cl.predicted.expect, Expectation::no_solution);
    EXPECT_EQ(cl.agreement, Agreement::corroborated) << cl.note;
    EXPECT_EQ(cl.accepted_candidates, 0u);
}

TEST(Classify, N5MassCriticalBelowCStar) {
    const auto m = combined_model(5, 2.8, 0.1, 0.01);
    const auto t = thresholds_for(m);
    ASSERT_TRUE(t && t->c_star && t->c0);
    ASSERT_LT(*t->c0, *t->c_star);
    // Between c0 and c*: I_c = 0, not attained.
    const auto mid = classify(m, 0.5 * (*t->c0 + *t->c_star), {}, t);
    EXPECT_EQ(mid.predicted.expect, Expectation::infimum_zero_unattained);
    EXPECT_GE(mid.energy_infimum, -1e-6);
    EXPECT_EQ(mid.agreement, Agreement::corroborated) << mid.note;
    // Well below c*, also below c0.
    const auto low = classify(m, 0.5 * *t->c_star, {}, t);
    EXPECT_EQ(low.predicted.expect, Expectation::no_solution);
    EXPECT_GE(low.energy_infimum, -1e-6);
    EXPECT_EQ(low.agreement, Agreement::corroborated) << low.note;
}

TEST(Classify, PredictionIsPureFunction) {
    const auto m = combined_model(5, 2.9, 0.1, 0.01);
    const auto t = thresholds_for(m);
    ASSERT_TRUE(t);
    EXPECT_EQ(predict_branch(*t, 0.5 * *t->c0).expect, Expectation::no_solution);
    EXPECT_EQ(predict_branch(*t, 2 * *t->c1_upper).expect, Expectation::ground_state);
    EXPECT_EQ(predict_branch(*t, 0.5 * (*t->c0 + *t->c1_lower)).expect, Expectation::infimum_zero_unattained);
    EXPECT_EQ(predict_branch(*t, 0.5 * (*t->c1_lower + *t->c1_upper)).expect, Expectation::undetermined);
    EXPECT_THROW(predict_branch(*t, 0.0), SpecError);
    EXPECT_FALSE(thresholds_for(Model{KirchhoffCoefficient::affine(1, 1), Nonlinearity::exp_critical(1, 1, 1)}));
}

TEST(Classify, BranchLabelsByExponent) {
    for (auto [p, label] : {std::pair{2.5, "N>=5 (iii)"}, {2.8, "N>=5 (ii)"}, {3.0, "N>=5 (i)"}}) {
        const auto t = thresholds_for(combined_model(5, p, 0.5, 0.5));
        ASSERT_TRUE(t);
        const double c = t->c1_lower && t->c1_upper ? 0.5 * (*t->c1_lower + *t->c1_upper) : 1.0;
        const auto br = predict_branch(*t, c).branch;
        EXPECT_EQ(br.substr(0, 6), std::string(label).substr(0, 6));
        EXPECT_NE(br.find(std::string(label).substr(6, 3)), std::string::npos) << br;
    }
}
