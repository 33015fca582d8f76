#pragma once

// Kirchhoff coefficients M, nonlinearities f, and sampled checks of the
// structural hypotheses the existence theory relies on.

#include "kirchhoff/errors.hpp"

#include <boost/math/tools/roots.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace kirchhoff {

/// Largest exponent fed to exp() before we refuse to evaluate.
inline constexpr double exp_argument_cap = 700.0;

class KirchhoffCoefficient {
public:
    enum class Kind { affine, general };

    static KirchhoffCoefficient affine(double a, double b, double theta = 1.0) {
        if (!(a > 0.0) || !(b > 0.0)) throw SpecError("affine coefficient needs a > 0 and b > 0");
        if (!(theta > 0.0)) throw SpecError("theta must be positive");
        KirchhoffCoefficient k;
        k.kind_ = Kind::affine;
        k.a_ = a;
        k.b_ = b;
        k.theta_ = theta;
        return k;
    }

    /// User-supplied M with its antiderivative; M(0) > 0 is required.
    static KirchhoffCoefficient general(std::function<double(double)> m, std::function<double(double)> m_hat,
                                        double theta) {
        if (!m || !m_hat) throw SpecError("general coefficient needs both M and its antiderivative");
        if (!(theta > 0.0)) throw SpecError("theta must be positive");
        if (!(m(0.0) > 0.0)) throw SpecError("general coefficient needs M(0) > 0");
        KirchhoffCoefficient k;
        k.kind_ = Kind::general;
        k.m_ = std::move(m);
        k.m_hat_ = std::move(m_hat);
        k.theta_ = theta;
        k.a_ = k.m_(0.0);
        return k;
    }

    Kind kind() const noexcept { return kind_; }
    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }
    double theta() const noexcept { return theta_; }

    double M(double t) const { return kind_ == Kind::affine ? a_ + b_ * t : m_(t); }
    double M_hat(double t) const { return kind_ == Kind::affine ? a_ * t + 0.5 * b_ * t * t : m_hat_(t); }
    double M_prime(double t) const {
        if (kind_ == Kind::affine) return b_;
        const double h = 1e-6 * std::max(1.0, std::abs(t));
        const double lo = std::max(0.0, t - h);
        return (m_(t + h) - m_(lo)) / (t + h - lo);
    }

    nlohmann::json to_json() const {
        if (kind_ != Kind::affine) return {{"kind", "general"}, {"theta", theta_}};
        return {{"kind", "affine"}, {"a", a_}, {"b", b_}, {"theta", theta_}};
    }

    static KirchhoffCoefficient from_json(const nlohmann::json& j) {
        const std::string kind = j.value("kind", "affine");
        if (kind != "affine") throw SpecError("only affine coefficients can be read from a config");
        if (!j.contains("a") || !j.contains("b")) throw SpecError("affine coefficient needs 'a' and 'b'");
        return affine(j.at("a").get<double>(), j.at("b").get<double>(), j.value("theta", 1.0));
    }

private:
    KirchhoffCoefficient() = default;
    Kind kind_ = Kind::affine;
    double a_ = 1.0, b_ = 0.0, theta_ = 1.0;
    std::function<double(double)> m_, m_hat_;
};

class Nonlinearity {
public:
    enum class Kind { power, exp_critical };

    /// f(u) = |u|^{p-2}u, plus |u|^{2*-2}u when include_critical (needs N >= 3).
    static Nonlinearity power(double p, int dim, bool include_critical) {
        if (!(p > 1.0) || !std::isfinite(p)) throw SpecError("power exponent must be > 1");
        if (dim < 1) throw SpecError("dimension must be positive");
        if (include_critical && dim < 3) throw SpecError("the critical term needs N >= 3");
        Nonlinearity n;
        n.kind_ = Kind::power;
        n.p_ = p;
        n.dim_ = dim;
        n.critical_ = include_critical;
        n.p_crit_ = dim >= 3 ? 2.0 * dim / (dim - 2.0) : std::numeric_limits<double>::infinity();
        return n;
    }

    /// u^{sigma-1} below the splice point u1, beta (alpha0 u^2 - 1) e^{alpha0 u^2} / (alpha0 u^3) above.
    static Nonlinearity exp_critical(double alpha0, double beta, double theta) {
        if (!(alpha0 > 0.0) || !(beta > 0.0) || !(theta > 0.0))
            throw SpecError("exp_critical needs alpha0, beta, theta > 0");
        const double sigma = 2.0 * theta + 4.0;
        if (sigma > 6.0 + 1e-14) throw SpecError("exp_critical needs sigma = 2 theta + 4 <= 6");
        Nonlinearity n;
        n.kind_ = Kind::exp_critical;
        n.alpha0_ = alpha0;
        n.beta_ = beta;
        n.theta_ = theta;
        n.sigma_ = sigma;
        n.dim_ = 2;
        n.u1_ = find_splice(n);
        n.F_u1_ = std::pow(n.u1_, sigma) / sigma;
        n.e1_ = std::exp(alpha0 * n.u1_ * n.u1_) / (n.u1_ * n.u1_);
        return n;
    }

    Kind kind() const noexcept { return kind_; }
    int dim() const noexcept { return dim_; }
    double p() const noexcept { return p_; }
    bool include_critical() const noexcept { return critical_; }
    double critical_exponent() const noexcept { return p_crit_; }
    double alpha0() const noexcept { return alpha0_; }
    double beta() const noexcept { return beta_; }
    double theta() const noexcept { return theta_; }
    double sigma() const noexcept { return sigma_; }
    double splice_point() const noexcept { return u1_; }

    /// The unspliced exponential branch f_1.
    double f1(double u) const {
        const double x = alpha0_ * u * u;
        return beta_ * (x - 1.0) * guarded_exp(x) / (alpha0_ * u * u * u);
    }

    double f(double u) const {
        if (kind_ == Kind::power) {
            const double au = std::abs(u);
            double v = std::pow(au, p_ - 1.0);
            if (critical_) v += std::pow(au, p_crit_ - 1.0);
            return u < 0.0 ? -v : v;
        }
        if (u <= 0.0) return 0.0;
        if (u <= u1_) return std::pow(u, sigma_ - 1.0);
        return f1(u);
    }

    double F(double u) const {
        if (kind_ == Kind::power) {
            const double au = std::abs(u);
            double v = std::pow(au, p_) / p_;
            if (critical_) v += std::pow(au, p_crit_) / p_crit_;
            return v;
        }
        if (u <= 0.0) return 0.0;
        if (u <= u1_) return std::pow(u, sigma_) / sigma_;
        const double x = alpha0_ * u * u;
        return F_u1_ + beta_ / (2.0 * alpha0_) * (guarded_exp(x) / (u * u) - e1_);
    }

    double f_prime(double u) const {
        if (kind_ == Kind::power) {
            const double au = std::abs(u);
            double v = (p_ - 1.0) * std::pow(au, p_ - 2.0);
            if (critical_) v += (p_crit_ - 1.0) * std::pow(au, p_crit_ - 2.0);
            return v;
        }
        if (u <= 0.0) return 0.0;
        if (u <= u1_) return (sigma_ - 1.0) * std::pow(u, sigma_ - 2.0);
        const double x = alpha0_ * u * u;
        const double u2 = u * u;
        return beta_ / alpha0_ * (2.0 * alpha0_ * alpha0_ - 3.0 * alpha0_ / u2 + 3.0 / (u2 * u2)) * guarded_exp(x);
    }

    nlohmann::json to_json() const {
        if (kind_ == Kind::power)
            return {{"kind", "power"}, {"p", p_}, {"dim", dim_}, {"include_critical", critical_}};
        return {{"kind", "exp_critical"}, {"alpha0", alpha0_}, {"beta", beta_}, {"theta", theta_}};
    }

    static Nonlinearity from_json(const nlohmann::json& j, int default_dim = 2) {
        const std::string kind = j.value("kind", "power");
        if (kind == "power") {
            if (!j.contains("p")) throw SpecError("power nonlinearity needs 'p'");
            const int dim = j.value("dim", default_dim);
            return power(j.at("p").get<double>(), dim, j.value("include_critical", dim >= 3));
        }
        if (kind == "exp_critical")
            return exp_critical(j.value("alpha0", 1.0), j.value("beta", 1.0), j.value("theta", 1.0));
        throw SpecError("unknown nonlinearity kind '" + kind + "'");
    }

    static double guarded_exp(double x) {
        if (x > exp_argument_cap) throw RangeError("exp argument " + std::to_string(x) + " exceeds the cap");
        return std::exp(x);
    }

private:
    static double find_splice(const Nonlinearity& n) {
        auto gap = [&](double u) { return n.f1(u) - std::pow(u, n.sigma_ - 1.0); };
        // f1 < 0 below alpha0^{-1/2}, so the crossing lies above it.
        double lo = std::max(1e-3, 1.0 / std::sqrt(n.alpha0_));
        double hi = std::max(10.0, 2.0 * lo);
        while (hi * hi * n.alpha0_ < exp_argument_cap && gap(hi) <= 0.0) {
            lo = hi;
            hi *= 1.5;
        }
        if (!(gap(hi) > 0.0)) throw NumericalFailure("could not bracket the splice point u1");
        // Walk up from lo so that the first crossing is selected.
        const int probes = 400;
        double prev = lo;
        for (int i = 1; i <= probes; ++i) {
            const double u = lo + (hi - lo) * i / probes;
            if (gap(u) > 0.0) {
                hi = u;
                lo = prev;
                break;
            }
            prev = u;
        }
        const auto r = boost::math::tools::bisect(
            gap, lo, hi, [](double a, double b) { return std::abs(b - a) <= 1e-15 * std::abs(b); });
        return 0.5 * (r.first + r.second);
    }

    Kind kind_ = Kind::power;
    int dim_ = 2;
    double p_ = 2.0, p_crit_ = std::numeric_limits<double>::infinity();
    bool critical_ = false;
    double alpha0_ = 0.0, beta_ = 0.0, theta_ = 1.0, sigma_ = 6.0;
    double u1_ = 0.0, F_u1_ = 0.0, e1_ = 0.0;
};

struct Model {
    KirchhoffCoefficient coefficient;
    Nonlinearity nonlinearity;

    nlohmann::json to_json() const {
        return {{"coefficient", coefficient.to_json()}, {"nonlinearity", nonlinearity.to_json()}};
    }
    static Model from_json(const nlohmann::json& j, int default_dim = 2) {
        if (!j.contains("coefficient") || !j.contains("nonlinearity"))
            throw SpecError("model config needs 'coefficient' and 'nonlinearity'");
        return {KirchhoffCoefficient::from_json(j.at("coefficient")),
                Nonlinearity::from_json(j.at("nonlinearity"), default_dim)};
    }
};

/// Combined power model M = a + bt, f = |u|^{p-2}u + |u|^{2*-2}u.
inline Model combined_model(int dim, double p, double a, double b) {
    return {KirchhoffCoefficient::affine(a, b), Nonlinearity::power(p, dim, dim >= 3)};
}

struct SampleRange {
    double lo = 1e-6;
    double hi = 1e3;
    std::size_t count = 400;
};

struct HypothesisResult {
    std::string name;
    bool applicable = true;
    bool pass = false;
    double margin = 0.0;
    std::string detail;
};

struct HypothesisReport {
    std::vector<HypothesisResult> results;

    const HypothesisResult& at(const std::string& name) const {
        for (const auto& r : results)
            if (r.name == name) return r;
        throw SpecError("no hypothesis named '" + name + "'");
    }
    bool all_applicable_pass() const {
        return std::all_of(results.begin(), results.end(), [](const auto& r) { return !r.applicable || r.pass; });
    }
    nlohmann::json to_json() const {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& r : results)
            j.push_back({{"name", r.name}, {"applicable", r.applicable}, {"pass", r.pass}, {"margin", r.margin},
                         {"detail", r.detail}});
        return j;
    }
};

namespace detail {

inline std::vector<double> log_samples(double lo, double hi, std::size_t count) {
    if (!(lo > 0.0) || !(hi > lo) || count < 2) throw SpecError("invalid hypothesis sample range");
    std::vector<double> out(count);
    const double llo = std::log(lo), lhi = std::log(hi);
    for (std::size_t i = 0; i < count; ++i) out[i] = std::exp(llo + (lhi - llo) * i / (count - 1));
    return out;
}

}  // namespace detail

/// Samples (M1)-(M2) on t in the range and (f1)-(f5) on u in the range.
inline HypothesisReport check_hypotheses(const Model& model, SampleRange range = {}) {
    const auto& M = model.coefficient;
    const auto& f = model.nonlinearity;
    HypothesisReport rep;
    const double theta = M.theta();
    const auto ts = detail::log_samples(range.lo, range.hi, range.count);

    {
        HypothesisResult r;
        r.name = "M1";
        double margin = M.M(0.0);
        double prev = M.M(0.0);
        for (double t : ts) {
            const double m = M.M(t);
            margin = std::min(margin, m - prev);
            prev = m;
        }
        r.margin = margin;
        r.pass = M.M(0.0) > 0.0 && margin >= -1e-12 * std::max(1.0, std::abs(prev));
        r.detail = "min of M(0) and successive increments";
        rep.results.push_back(r);
    }
    {
        HypothesisResult r;
        r.name = "M2";
        double margin = std::numeric_limits<double>::infinity();
        for (double t : ts) margin = std::min(margin, M.M_hat(t) - M.M(t) * t / (theta + 1.0));
        r.margin = margin;
        r.pass = margin >= -1e-12;
        r.detail = "min of M_hat(t) - M(t) t / (theta + 1)";
        rep.results.push_back(r);
    }

    // Exponential families cannot be sampled beyond the exp cap.
    double u_hi = range.hi;
    if (f.kind() == Nonlinearity::Kind::exp_critical)
        u_hi = std::min(u_hi, std::sqrt(exp_argument_cap / f.alpha0()) * (1.0 - 1e-9));
    const auto us = detail::log_samples(range.lo, u_hi, range.count);
    const bool is_exp = f.kind() == Nonlinearity::Kind::exp_critical;

    {
        HypothesisResult r;
        r.name = "f1";
        bool nonneg = true;
        for (double u : us) nonneg = nonneg && f.f(u) >= 0.0;
        const double r0 = f.f(us[0]) / std::pow(us[0], 3);
        const double r1 = f.f(us[1]) / std::pow(us[1], 3);
        r.margin = r0;
        r.pass = nonneg && r0 < 1e-2 && r0 <= r1;
        r.detail = "f >= 0 on the sample; f(u)/u^3 at the smallest sample";
        rep.results.push_back(r);
    }
    {
        HypothesisResult r;
        r.name = "f2";
        r.applicable = is_exp;
        if (is_exp) {
            const double a0 = f.alpha0();
            const std::size_t n = us.size();
            auto ratio = [&](double alpha, double u) { return std::log(f.f(u)) - alpha * u * u; };
            const double u_a = us[n - 2], u_b = us[n - 1];
            const bool above = ratio(1.1 * a0, u_b) < ratio(1.1 * a0, u_a);
            const bool below = ratio(0.9 * a0, u_b) > ratio(0.9 * a0, u_a);
            r.pass = above && below;
            r.margin = ratio(0.9 * a0, u_b) - ratio(1.1 * a0, u_b);
            r.detail = "log f - alpha u^2 trend at the top of the sample for alpha = 0.9, 1.1 alpha0";
        } else {
            r.pass = true;
            r.detail = "exponential growth condition, not applicable to power nonlinearities";
        }
        rep.results.push_back(r);
    }
    {
        HypothesisResult r;
        r.name = "f3";
        r.applicable = is_exp;
        if (is_exp) {
            const double u = us.back();
            const double v = f.f(u) * u / std::exp(f.alpha0() * u * u);
            r.margin = v - f.beta();
            r.pass = v >= 0.99 * f.beta();
            r.detail = "f(u) u e^{-alpha0 u^2} - beta at the largest sample";
        } else {
            r.pass = true;
            r.detail = "not applicable to power nonlinearities";
        }
        rep.results.push_back(r);
    }
    {
        HypothesisResult r;
        r.name = "f4";
        const double sigma = 2.0 * theta + 4.0;
        double margin = std::numeric_limits<double>::infinity();
        bool pass = true;
        for (double u : us) {
            const double Fu = f.F(u);
            const double m = f.f(u) * u / sigma - Fu;
            margin = std::min(margin, m);
            pass = pass && m >= -1e-12 * std::max(1.0, std::abs(Fu));
        }
        r.margin = margin;
        r.pass = pass;
        r.detail = "min of f(u) u / (2 theta + 4) - F(u)";
        rep.results.push_back(r);
    }
    {
        HypothesisResult r;
        r.name = "f5";
        double worst = 0.0;
        for (std::size_t i = us.size() / 2; i < us.size(); ++i) {
            const double fu = f.f(us[i]);
            if (fu > 0.0) worst = std::max(worst, f.F(us[i]) / fu);
        }
        r.margin = worst;
        r.pass = std::isfinite(worst);
        r.detail = "empirical sup of F/f over the upper half of the sample (candidate L0)";
        rep.results.push_back(r);
    }
    return rep;
}

}  // namespace kirchhoff
