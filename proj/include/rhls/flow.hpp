#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rhls/kernel.hpp"
#include "rhls/params.hpp"
#include "rhls/radial.hpp"

namespace rhls {

/// F[rho] = I_lambda[rho]/(2 lambda) - (1/(1-q)) int rho^q dx.
double free_energy(const RadialDensity& rho, const KernelTable& table, const Params& p);
double free_energy(double I, double lq, const Params& p);

struct OptimalDilation {
    double tau0 = 0.0;
    double F_at_tau0 = 0.0;
    double lower_bound = 0.0;  // -kappa (C M^alpha)^{-N(1-q)/(lambda-N(1-q))}
};

/// Best dilation rho_tau(x) = tau^N rho(tau x) of the free energy;
/// tau0^{lambda - N(1-q)} = I / (2N lq). `C_estimate` feeds the lower bound.
OptimalDilation optimal_dilation(const RadialDensity& rho, const KernelTable& table,
                                 const Params& p, double C_estimate);

struct EvolutionTrace {
    std::vector<double> times;
    std::vector<double> mass_series;
    std::vector<double> free_energy_series;
    std::vector<double> origin_value_series;
    std::vector<std::pair<double, RadialDensity>> snapshots;
    bool concentration_flag = false;
    bool dt_underflow = false;
    double max_step_energy_increase = 0.0;  // largest per-step F increase seen
    double mass_drift = 0.0;                // |mass(end) - mass(0)| / mass(0)
};

struct EvolveOptions {
    double t_final = 1.0;
    double cfl = 0.4;
    double snapshot_every = 0.0;  // 0: first and last only
    size_t max_record = 4096;     // series decimation cap
};

/// Conservative finite-volume integration of the radial aggregation-diffusion
/// equation d rho/dt = r^{1-N} d_r ( r^{N-1} ( d_r rho^q + rho d_r phi ) ),
/// with phi = W_lambda * rho recomputed from the kernel table each step.
/// No-flux at both ends; explicit stepping under a combined
/// diffusion/advection CFL bound.
EvolutionTrace evolve(const RadialDensity& rho0, const Params& p, const KernelTable& table,
                      const EvolveOptions& opts);

/// Same scheme with the frozen external drift d_r V, V = 1 + r^2/2 + r^lambda/lambda.
EvolutionTrace evolve_external(const RadialDensity& rho0, const Params& p,
                               const EvolveOptions& opts);

/// Sup-norm of rho - (mu + W_lambda*rho)^{-1/(1-q)} over nodes.
double stationary_residual(const RadialDensity& rho, const KernelTable& table, const Params& p,
                           double mu);

struct ExternalModel {
    RadialDensity profile;   // u_mu on the grid
    double mass_of_mu = 0.0;
    double critical_mass = 0.0;  // M(-1)
};

/// Barenblatt-type external-potential model: u_mu = (mu + V)^{-1/(1-q)} with
/// masses by adaptive quadrature (analytic origin term at mu = -1). Reports
/// infinite mass when q <= 1 - lambda/N.
ExternalModel external_model(const Params& p, double mu, const RadialGrid& grid);

/// M(mu) alone (quadrature over all of R^N, no grid truncation).
double external_mass(const Params& p, double mu);

void write_trace_csv(const EvolutionTrace& trace, const std::string& path);

}  // namespace rhls
