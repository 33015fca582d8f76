#include "kirchhoff/models.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace kirchhoff;

namespace {

// f_1(u) - u^{sigma-1} written out independently of the library.
double splice_gap(double u, double alpha0, double beta, double sigma) {
    return beta * (alpha0 * u * u - 1.0) * std::exp(alpha0 * u * u) / (alpha0 * u * u * u) - std::pow(u, sigma - 1.0);
}

double bisect_splice(double alpha0, double beta, double sigma) {
    double lo = 1.0 / std::sqrt(alpha0), hi = 10.0;
    // f_1 < 0 below 1/sqrt(alpha0), so the first positive crossing lies above it.
    while (splice_gap(hi, alpha0, beta, sigma) < 0.0) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (splice_gap(mid, alpha0, beta, sigma) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST(Coefficient, AffineClosedForms) {
    const auto k = KirchhoffCoefficient::affine(0.7, 1.3);
    for (double t : {0.0, 0.5, 3.0, 40.0}) {
        EXPECT_DOUBLE_EQ(k.M(t), 0.7 + 1.3 * t);
        EXPECT_DOUBLE_EQ(k.M_hat(t), 0.7 * t + 0.65 * t * t);
    }
}

TEST(Coefficient, AffineRejectsNonPositive) {
    EXPECT_THROW(KirchhoffCoefficient::affine(0.0, 1.0), SpecError);
    EXPECT_THROW(KirchhoffCoefficient::affine(1.0, -1.0), SpecError);
}

TEST(Coefficient, JsonRoundTrip) {
    const auto k = KirchhoffCoefficient::affine(2.0, 0.25);
    const auto back = KirchhoffCoefficient::from_json(k.to_json());
    EXPECT_EQ(back.kind(), KirchhoffCoefficient::Kind::affine);
    EXPECT_EQ(back.a(), 2.0);
    EXPECT_EQ(back.b(), 0.25);
}

TEST(ExpCritical, SpliceMatchesBisection) {
    const auto f = Nonlinearity::exp_critical(1.0, 1.0, 1.0);
    EXPECT_DOUBLE_EQ(f.sigma(), 6.0);
    const double u1 = f.splice_point();
    EXPECT_NEAR(u1, bisect_splice(1.0, 1.0, 6.0), 1e-10);
    EXPECT_NEAR(f.f(u1 * (1 - 1e-12)), f.f(u1 * (1 + 1e-12)), 1e-10 * std::max(1.0, f.f(u1)));
    EXPECT_NEAR(f.f1(u1), std::pow(u1, 5), 1e-10 * std::pow(u1, 5));
}

TEST(ExpCritical, SpliceOtherParameters) {
    const auto f = Nonlinearity::exp_critical(2.0, 0.5, 0.5);
    EXPECT_NEAR(f.splice_point(), bisect_splice(2.0, 0.5, 5.0), 1e-10);
}

TEST(ExpCritical, VanishesOnNegativeAxis) {
    const auto f = Nonlinearity::exp_critical(1.0, 1.0, 1.0);
    for (double u : {-5.0, -1.0, -1e-3, 0.0}) {
        EXPECT_EQ(f.f(u), 0.0);
        EXPECT_EQ(f.F(u), 0.0);
    }
}

TEST(ExpCritical, AntiderivativeRatioSmallFarOut) {
    const auto f = Nonlinearity::exp_critical(1.0, 1.0, 1.0);
    const double u = f.splice_point() + 10.0;
    EXPECT_LT(f.F(u) / f.f(u), 0.1);
}

TEST(ExpCritical, RejectsLargeSigma) {
    EXPECT_THROW(Nonlinearity::exp_critical(1.0, 1.0, 1.5), SpecError);
    EXPECT_THROW(Nonlinearity::exp_critical(-1.0, 1.0, 1.0), SpecError);
}

TEST(ExpCritical, SmallAmplitudeBehaviour) {
    const auto f = Nonlinearity::exp_critical(1.0, 1.0, 1.0);
    const double u = 1e-4;
    EXPECT_LT(f.f(u) / std::pow(u, 3), 1e-2 * f.splice_point());
}

TEST(Nonlinearity, DerivativeOfAntiderivative) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0.05, 2.5);
    const Nonlinearity fams[] = {Nonlinearity::power(2.9, 5, true), Nonlinearity::power(3.5, 4, true),
                                 Nonlinearity::power(8.0, 2, false), Nonlinearity::exp_critical(1.0, 1.0, 1.0)};
    for (const auto& f : fams) {
        EXPECT_EQ(f.F(0.0), 0.0);
        for (int i = 0; i < 20; ++i) {
            const double u = U(rng);
            const double h = 1e-5 * u;
            const double fd = (f.F(u + h) - f.F(u - h)) / (2 * h);
            EXPECT_NEAR(fd, f.f(u), 1e-6 * std::max(1.0, std::abs(f.f(u))));
        }
    }
}

TEST(Nonlinearity, PowerWithCriticalTerm) {
    const auto f = Nonlinearity::power(3.0, 4, true);
    EXPECT_DOUBLE_EQ(f.critical_exponent(), 4.0);
    EXPECT_NEAR(f.f(2.0), 4.0 + 8.0, 1e-12);
    EXPECT_NEAR(f.F(2.0), 8.0 / 3.0 + 4.0, 1e-12);
    EXPECT_NEAR(f.f(-2.0), -12.0, 1e-12);
}

TEST(Nonlinearity, JsonRoundTrip) {
    for (const auto& f : {Nonlinearity::power(2.9, 5, true), Nonlinearity::exp_critical(1.0, 1.0, 1.0)}) {
        const auto back = Nonlinearity::from_json(f.to_json(), f.dim());
        for (double u : {0.1, 0.9, 2.0}) EXPECT_DOUBLE_EQ(back.f(u), f.f(u));
    }
}

TEST(Model, JsonRequiresBothParts) {
    EXPECT_THROW(Model::from_json(nlohmann::json{{"coefficient", {{"kind", "affine"}, {"a", 1}, {"b", 1}}}}),
                 SpecError);
}

TEST(Hypotheses, AffineWithPowerPasses) {
    const Model m{KirchhoffCoefficient::affine(1.0, 1.0), Nonlinearity::power(3.0, 4, false)};
    const auto rep = check_hypotheses(m);
    EXPECT_TRUE(rep.at("M1").pass);
    EXPECT_TRUE(rep.at("M2").pass);
    EXPECT_GE(rep.at("M2").margin, 0.0);
}

TEST(Hypotheses, ExpNonlinearityF4) {
    const auto f = Nonlinearity::exp_critical(1.0, 1.0, 1.0);
    const Model m{KirchhoffCoefficient::affine(1.0, 1.0), f};
    const auto rep = check_hypotheses(m, {1e-6, f.splice_point() + 5.0, 400});
    EXPECT_TRUE(rep.at("f4").pass);
    EXPECT_GE(rep.at("f4").margin, -1e-12);
}

TEST(Hypotheses, ExpNonlinearityDefaultRange) {
    const Model m{KirchhoffCoefficient::affine(1.0, 1.0), Nonlinearity::exp_critical(1.0, 1.0, 1.0)};
    EXPECT_TRUE(check_hypotheses(m).all_applicable_pass());
}

TEST(Hypotheses, LinearFFailsF1) {
    const Model m{KirchhoffCoefficient::affine(1.0, 1.0), Nonlinearity::power(2.0, 2, false)};
    EXPECT_FALSE(check_hypotheses(m).at("f1").pass);
}

TEST(Hypotheses, GeneralCoefficientViolatingMonotonicity) {
    auto k = KirchhoffCoefficient::general([](double t) { return 1.0 + std::sin(t); },
                                           [](double t) { return t + 1.0 - std::cos(t); }, 1.0);
    const Model m{k, Nonlinearity::power(3.0, 4, false)};
    EXPECT_FALSE(check_hypotheses(m).at("M1").pass);
}

TEST(Hypotheses, UnknownNameThrows) {
    const Model m{KirchhoffCoefficient::affine(1.0, 1.0), Nonlinearity::power(3.0, 4, false)};
    EXPECT_THROW(check_hypotheses(m).at("f9"), SpecError);
}
