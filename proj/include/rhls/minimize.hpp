#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rhls/kernel.hpp"
#include "rhls/params.hpp"
#include "rhls/radial.hpp"

namespace rhls {

/// Candidate for the relaxed problem: a radial non-increasing density plus a
/// Dirac mass M >= 0 at the origin. Solver-internal normalization after each
/// renormalization pass: mass(rho) + M = 1 and lq(rho) = 1.
struct RelaxedState {
    RadialDensity rho;
    double M = 0.0;
};

struct QuotientBreakdown {
    double I = 0.0;       // I_lambda[rho]
    double mass = 0.0;
    double lq = 0.0;
    double moment = 0.0;  // int |x|^lambda rho
    double M = 0.0;
    double Q = 0.0;       // (I + 2 M moment) / ((mass+M)^alpha lq^{(2-alpha)/q})
};

QuotientBreakdown quotient(const RelaxedState& state, const KernelTable& table, const Params& p);

/// Lemma-16 mass step: with A = I/(2 moment) and B = mass, the quotient's
/// M-section is minimized at 0 when alpha <= 0 or alpha A <= B, and at
/// (alpha A - B)/(1 - alpha) otherwise. Requires alpha < 1.
double optimal_mass_step(double I, double moment, double mass, double alpha);

enum class TrichotomyCase {
    BoundedNoMass,    // mass > (alpha/2) I / moment
    UnboundedNoMass,  // equality: M = 0 but rho blows up like r^{-2/(1-q)}
    PositiveMass,     // strict inequality the other way: M > 0
    ConformalKnown,
};

struct MinimizeDiagnostics {
    std::optional<double> origin_value_prediction;
    std::optional<double> origin_exponent_fit;
    double pin_multiplier = 0.0;  // fitted gauge-pin multiplier at the solution
    double M_star_prediction = 0.0;
    double lower_bound = 0.0;        // applicable lower bound on C
    std::string lower_bound_kind;    // "lemma4" or "conformal-reference"
    bool lower_bound_ok = true;
    double restart_spread = 0.0;     // relative spread of converged restart Q's
    bool restart_agreement = true;
    double tail_mass_estimate = 0.0;
    bool tail_warning = false;
};

struct MinimizeResult {
    RelaxedState state;
    double C_estimate = 0.0;
    double residual = 0.0;
    size_t iterations = 0;
    bool converged = false;
    bool boundary_degenerate = false;  // persistent D <= 0 rejections near q ~ N/(N+lambda)
    TrichotomyCase case_label = TrichotomyCase::BoundedNoMass;
    MinimizeDiagnostics diagnostics;
};

struct MinimizeOptions {
    double tol = 1e-8;
    size_t max_iter = 20000;
    double damping = 0.5;
    bool relaxed = true;  // false forces M = 0 throughout
};

struct StepOutcome {
    bool accepted = false;
    RelaxedState state;
    std::string diagnostic;
};

/// One damped Euler-Lagrange fixed-point pass: profile update from the EL
/// identity, Lemma-16 mass step, renormalization to the solver gauge, and
/// isotonic (non-increasing) projection. Rejected (accepted = false) when the
/// EL denominator D(r) is non-positive at a node with r > 0; the caller
/// halves the damping and retries.
StepOutcome el_fixed_point_step(const RelaxedState& state, const KernelTable& table,
                                const Params& p, double damping, bool allow_mass = true);

/// Sup-norm EL defect over nodes with rho > 1e-12 max(rho), measured relative
/// to rho^{q-1} so the value is invariant under state scaling.
double el_residual(const RelaxedState& state, const KernelTable& table, const Params& p);

MinimizeResult minimize_relaxed(const Params& p, const RadialGrid& grid,
                                const MinimizeOptions& opts = {});
MinimizeResult minimize_relaxed(const Params& p, const KernelTable& table,
                                const MinimizeOptions& opts = {});

/// Fill the Prop.-15 style classification and origin diagnostics of a
/// converged result.
void classify_dichotomy(MinimizeResult& result, const KernelTable& table, const Params& p);

/// Weighted isotonic projection onto non-increasing sequences
/// (pool-adjacent-violators).
std::vector<double> isotonic_nonincreasing(const std::vector<double>& values,
                                           const std::vector<double>& weights);

const char* to_string(TrichotomyCase c);

}  // namespace rhls
