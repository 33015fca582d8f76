#pragma once

// Predicted regime for (N, p, a, b, c) from the threshold constants, and its
// comparison with what the solver observes.

#include "kirchhoff/omega_thresholds.hpp"
#include "kirchhoff/solver.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>

namespace kirchhoff {

enum class Expectation { ground_state, no_solution, infimum_zero_unattained, undetermined };

inline std::string to_string(Expectation e) {
    switch (e) {
        case Expectation::ground_state: return "ground_state";
        case Expectation::no_solution: return "no_solution";
        case Expectation::infimum_zero_unattained: return "infimum_zero_unattained";
        default: return "undetermined";
    }
}

enum class Agreement { agree, corroborated, disagree, inconclusive };

inline std::string to_string(Agreement a) {
    switch (a) {
        case Agreement::agree: return "agree";
        case Agreement::corroborated: return "corroborated";
        case Agreement::disagree: return "disagree";
        default: return "inconclusive";
    }
}

inline Agreement agreement_from_string(const std::string& s) {
    if (s == "agree") return Agreement::agree;
    if (s == "corroborated") return Agreement::corroborated;
    if (s == "disagree") return Agreement::disagree;
    if (s == "inconclusive") return Agreement::inconclusive;
    throw SpecError("unknown agreement flag '" + s + "'");
}

struct Prediction {
    /// Branch label such as "N>=5 (i-1)" or "N=4 (ii-2)".
    std::string branch;
    Expectation expect = Expectation::undetermined;
    std::string detail;
};

/// Pure function of the thresholds and c.
inline Prediction predict_branch(const ThresholdSet& t, double c) {
    if (!(c > 0.0)) throw SpecError("mass parameter c must be positive");
    Prediction pr;
    const std::string tag = t.dim == 4 ? "N=4 " : "N>=5 ";
    if (!t.existence.holds) {
        pr.branch = "hypothesis fails";
        pr.detail = "the existence condition on (a, b) does not hold";
        return pr;
    }
    if (t.regime == PowerRegime::mass_subcritical) {
        pr.branch = tag + "(iii)";
        pr.expect = Expectation::ground_state;
        pr.detail = "I_c < 0 is attained for all c";
        return pr;
    }
    if (t.dim == 4 && t.regime == PowerRegime::mass_critical) {
        const double c1 = t.c1_exact.value_or(0.0);
        if (c > c1) {
            pr.branch = tag + "(ii-1)";
            pr.expect = Expectation::ground_state;
            pr.detail = "c > a ||Q||_2";
        } else {
            pr.branch = tag + "(ii-2)";
            pr.expect = Expectation::no_solution;
            pr.detail = "c <= a ||Q||_2";
        }
        return pr;
    }
    const bool critical = t.regime == PowerRegime::mass_critical;
    if (t.c0 && c < *t.c0) {
        pr.branch = tag + (critical ? "(ii-2)" : "(i-4)");
        pr.expect = Expectation::no_solution;
        pr.detail = "c below the non-existence radius c0";
        return pr;
    }
    if (t.c1_upper && c > *t.c1_upper) {
        pr.branch = tag + (critical ? "(ii-1)" : "(i-1)");
        pr.expect = Expectation::ground_state;
        pr.detail = "c above the upper bound for c1";
        return pr;
    }
    if (t.c1_lower && c < *t.c1_lower) {
        pr.branch = tag + (critical ? "(ii-1)" : "(i-1)");
        pr.expect = Expectation::infimum_zero_unattained;
        pr.detail = "c below the lower bound for c1: I_c = 0";
        return pr;
    }
    pr.branch = tag + (critical ? "(ii)" : "(i)");
    pr.detail = "c inside the c1 bracket";
    return pr;
}

/// Thresholds for an affine combined power model; nullopt outside that family.
inline std::optional<ThresholdSet> thresholds_for(const Model& model) {
    const auto& nl = model.nonlinearity;
    const auto& k = model.coefficient;
    if (nl.kind() != Nonlinearity::Kind::power || !nl.include_critical() ||
        k.kind() != KirchhoffCoefficient::Kind::affine || nl.dim() < 4)
        return std::nullopt;
    if (!(nl.p() > 2.0 && nl.p() < critical_exponent(nl.dim()))) return std::nullopt;
    ShootOptions so;
    so.truncation_check = false;
    const auto q = GroundStateNorms::from(shoot_ground_state(nl.dim(), nl.p(), so));
    return compute_thresholds(k.a(), k.b(), nl.p(), nl.dim(), q, sobolev_constant(nl.dim()));
}

struct ClassifyOptions {
    SolveParams solve;
    /// Also run the string method and record its status.
    bool mountain_pass = false;
    /// Energies above -energy_tol count as I_c = 0.
    double energy_tol = 1e-6;
    /// Restarts needed before a non-existence observation counts as corroborated.
    int corroboration_restarts = 12;
};

struct Classification {
    double c = 0.0;
    Prediction predicted;
    SolveStatus min_status = SolveStatus::no_nontrivial_solution_found;
    std::optional<SolveStatus> mp_status;
    double energy_infimum = 0.0;
    std::optional<double> lambda;
    std::optional<CriticalPointCandidate> candidate;
    std::size_t accepted_candidates = 0;
    std::string ic_sign;
    Agreement agreement = Agreement::inconclusive;
    std::string note;

    nlohmann::json to_json() const {
        nlohmann::json j = {{"c", c},
                            {"branch", predicted.branch},
                            {"expectation", to_string(predicted.expect)},
                            {"detail", predicted.detail},
                            {"min_status", to_string(min_status)},
                            {"energy_infimum", energy_infimum},
                            {"accepted_candidates", accepted_candidates},
                            {"ic_sign", ic_sign},
                            {"agreement", to_string(agreement)},
                            {"note", note}};
        j["mp_status"] = mp_status ? nlohmann::json(to_string(*mp_status)) : nlohmann::json(nullptr);
        j["lambda"] = lambda ? nlohmann::json(*lambda) : nlohmann::json(nullptr);
        return j;
    }
};

inline Agreement compare(const Prediction& pr, const SolveReport& rep, bool enough_restarts, double energy_tol) {
    const bool negative = rep.energy_infimum < -energy_tol;
    switch (pr.expect) {
        case Expectation::ground_state:
            return rep.status == SolveStatus::converged_minimizer && rep.candidate && rep.candidate->lambda < 0.0
                       ? Agreement::agree
                       : Agreement::disagree;
        case Expectation::no_solution:
            if (!rep.accepted.empty() || negative) return Agreement::disagree;
            return enough_restarts ? Agreement::corroborated : Agreement::inconclusive;
        case Expectation::infimum_zero_unattained:
            if (rep.status == SolveStatus::converged_minimizer || negative) return Agreement::disagree;
            return enough_restarts ? Agreement::corroborated : Agreement::inconclusive;
        default: return Agreement::inconclusive;
    }
}

inline Classification classify(const Model& model, double c, const ClassifyOptions& opt = {},
                               const std::optional<ThresholdSet>& thresholds = std::nullopt) {
    if (!(c > 0.0)) throw SpecError("mass parameter c must be positive");
    Classification out;
    out.c = c;
    const auto t = thresholds ? thresholds : thresholds_for(model);
    if (t) {
        out.predicted = predict_branch(*t, c);
    } else {
        out.predicted.branch = "outside the classified family";
        out.predicted.detail = "thresholds are defined for the affine combined power model with N >= 4";
    }
    SolveParams prm = opt.solve;
    if (out.predicted.expect == Expectation::no_solution || out.predicted.expect == Expectation::infimum_zero_unattained)
        prm.restarts = std::max(prm.restarts, opt.corroboration_restarts);
    const auto rep = minimize_on_sphere(model, c, prm);
    out.min_status = rep.status;
    out.energy_infimum = rep.energy_infimum;
    out.accepted_candidates = rep.accepted.size();
    if (rep.candidate) out.lambda = rep.candidate->lambda;
    out.candidate = rep.candidate;
    out.ic_sign = rep.energy_infimum < -opt.energy_tol ? "negative" : (rep.energy_infimum > opt.energy_tol ? "positive" : "zero");
    out.agreement = compare(out.predicted, rep, prm.restarts >= opt.corroboration_restarts, opt.energy_tol);
    if (opt.mountain_pass) {
        try {
            out.mp_status = mountain_pass(model, c, prm).status;
        } catch (const std::exception& e) {
            out.mp_status = SolveStatus::diverged;
            out.note = std::string("mountain pass: ") + e.what();
        }
    }
    if (out.note.empty()) out.note = rep.note;
    return out;
}

}  // namespace kirchhoff
