#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rhls/radial.hpp"

namespace rhls {

/// Wallis integral W_N = int_0^pi sin^{N-2} phi dphi.
double wallis_integral(int N);

/// Spherical average of |x-y|^lambda over the angle between x and y with
/// |x| = r, |y| = s. Closed forms for N = 1, 3; adaptive Gauss-Legendre in
/// phi otherwise (the integrand has an algebraic singularity at phi = 0 when
/// r = s and lambda/2 is not an integer).
double angular_kernel(int N, double lambda, double r, double s);

/// Dense symmetric table of angular_kernel over all grid node pairs.
struct KernelTable {
    RadialGrid grid;
    double lambda = 0.0;
    std::vector<double> entries;  // row-major n x n, symmetric

    double at(size_t i, size_t j) const { return entries[i * grid.size() + j]; }
    size_t size() const { return grid.size(); }
};

KernelTable build_table(const RadialGrid& grid, double lambda);

/// I_lambda[rho] = sum_{i,j} w_i w_j rho_i rho_j K_ij.
double interaction_energy(const RadialDensity& rho, const KernelTable& table);

/// Bilinear cross energy int int a(x) |x-y|^lambda b(y).
double cross_interaction_energy(const RadialDensity& a, const RadialDensity& b,
                                const KernelTable& table);

/// (W_lambda * rho)(r_i) = (1/lambda) sum_j w_j rho_j K_ij, as a profile on
/// the same grid (not a density; monotone_flag unset).
RadialDensity potential(const RadialDensity& rho, const KernelTable& table);
std::vector<double> potential_values(const RadialDensity& rho, const KernelTable& table);

struct OracleEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// Direct Cartesian estimate of I_lambda[rho], bypassing the angular
/// reduction: tensor Gauss-Legendre for N = 1, randomized Halton for
/// N = 2, 3. Rejects N > 3.
OracleEstimate interaction_energy_oracle(const RadialDensity& rho, int N, double lambda,
                                         size_t samples, uint64_t seed = 12345);

/// Binary table cache. save/load validate symmetry, row-0 and bound
/// invariants before use. cache_path composes a file name from
/// (N, lambda, grid hash) under the given directory.
void save_table(const KernelTable& table, const std::string& path);
std::optional<KernelTable> load_table(const std::string& path);
std::string cache_path(const std::string& dir, const RadialGrid& grid, double lambda);

/// Table via cache when the RHLS_CACHE_DIR environment variable is set.
KernelTable build_table_cached(const RadialGrid& grid, double lambda);

}  // namespace rhls
