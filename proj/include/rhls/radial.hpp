#pragma once

#include <string>
#include <vector>

#include "rhls/params.hpp"

namespace rhls {

/// Surface area of the unit sphere in R^N: 2 pi^{N/2} / Gamma(N/2).
double sphere_area(int N);

/// Volume of the ball of radius R in R^N.
double ball_volume(int N, double R);

/// Radial quadrature grid on [0, r_max]. Node i owns the cell
/// [left(i), right(i)]; cell boundaries are midpoints between nodes, with
/// left(0) = 0 and right(n-1) = r_max. Weights are the exact cell volumes
/// |S^{N-1}| (b^N - a^N) / N, so the weight sum equals |B_{r_max}|.
struct RadialGrid {
    int dim = 0;
    double r_max = 0.0;
    std::vector<double> nodes;       // r_0 = 0 < r_1 < ... < r_{n-1} < r_max
    std::vector<double> boundaries;  // n+1 entries, b_0 = 0, b_n = r_max
    std::vector<double> weights;

    size_t size() const { return nodes.size(); }
    bool same_layout(const RadialGrid& other) const;
};

/// Geometric-stretched grid: spacing grows by `stretch` per cell (uniform at
/// stretch = 1, denser near the origin when stretch > 1).
RadialGrid make_grid(int N, double r_max, size_t n, double stretch = 1.0);

/// Stretch factor that places the first node near target_ratio * r_max.
double default_stretch(size_t n, double target_ratio = 1e-4);

/// Default solver grid: n = 512, first node around 1e-4 * r_max.
RadialGrid default_grid(int N, double r_max, size_t n = 512);

/// Nonnegative radial profile sampled at grid nodes.
struct RadialDensity {
    RadialGrid grid;
    std::vector<double> values;
    bool monotone_flag = false;

    double operator[](size_t i) const { return values[i]; }
    /// Piecewise-linear evaluation at radius r (0 beyond r_max).
    double interpolate(double r) const;
};

struct RadialIntegrals {
    double mass = 0.0;    // int rho dx
    double lq = 0.0;      // int rho^q dx
    double moment = 0.0;  // int |x|^lambda rho dx
};

RadialIntegrals integrals(const RadialDensity& rho, const Params& p);

double mass_of(const RadialDensity& rho);

// Named sample profiles.
RadialDensity sample_lemma4_optimizer(const Params& p, const RadialGrid& grid);
/// |x|^{-(N+lambda)} on the annulus 1 <= |x| <= R (exact cell averages).
RadialDensity sample_annulus_trial(double R, double lambda, const RadialGrid& grid);
RadialDensity sample_ball_indicator(double R, const RadialGrid& grid);
RadialDensity sample_gaussian(double s, const RadialGrid& grid);
RadialDensity sample_external_barenblatt(double mu, const Params& p, const RadialGrid& grid);

/// Estimated mass beyond r_max from the decay bound rho <= C r^{-N/q},
/// with C fitted at the outermost node.
double estimated_tail_mass(const RadialDensity& rho, double q);

/// Mass-preserving dilation tau^N rho(tau r), resampled linearly onto the
/// same grid (0 beyond the original support).
RadialDensity dilate(const RadialDensity& rho, double tau);

/// Profile CSV: header "r,rho", one row per node, full double precision.
void write_profile_csv(const RadialDensity& rho, const std::string& path);
/// Reads (r, value) pairs; accepts scientific notation.
std::vector<std::pair<double, double>> read_profile_csv(const std::string& path);
/// Linear resampling of CSV data onto a grid.
RadialDensity resample_onto(const std::vector<std::pair<double, double>>& data,
                            const RadialGrid& grid);

}  // namespace rhls
