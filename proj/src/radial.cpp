#include "rhls/radial.hpp"

#include <algorithm>
#include <cmath>

#include "rhls/quadrature.hpp"
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace rhls {

double sphere_area(int N) {
    return 2.0 * std::pow(M_PI, 0.5 * N) / std::tgamma(0.5 * N);
}

double ball_volume(int N, double R) {
    return sphere_area(N) * std::pow(R, N) / N;
}

bool RadialGrid::same_layout(const RadialGrid& other) const {
    if (dim != other.dim || nodes.size() != other.nodes.size()) return false;
    if (r_max != other.r_max) return false;
    for (size_t i = 0; i < nodes.size(); i += std::max<size_t>(1, nodes.size() / 8))
        if (nodes[i] != other.nodes[i]) return false;
    return true;
}

RadialGrid make_grid(int N, double r_max, size_t n, double stretch) {
    if (n < 16) throw std::invalid_argument("make_grid: need at least 16 nodes");
    if (!(r_max > 0.0)) throw std::invalid_argument("make_grid: r_max must be > 0");
    if (!(stretch >= 1.0)) throw std::invalid_argument("make_grid: stretch must be >= 1");
    RadialGrid g;
    g.dim = N;
    g.r_max = r_max;
    g.nodes.resize(n);
    g.nodes[0] = 0.0;
    // Spacings d_k = d_1 * stretch^{k-1}, summing to r_max over n-1 gaps.
    // The last "gap" runs from node n-1 to r_max so every node stays interior.
    double d1;
    if (stretch == 1.0) {
        d1 = r_max / static_cast<double>(n);
    } else {
        d1 = r_max * (stretch - 1.0) / (std::pow(stretch, static_cast<double>(n)) - 1.0);
    }
    double d = d1;
    for (size_t i = 1; i < n; ++i) {
        g.nodes[i] = g.nodes[i - 1] + d;
        d *= stretch;
    }
    g.boundaries.resize(n + 1);
    g.boundaries[0] = 0.0;
    g.boundaries[n] = r_max;
    for (size_t i = 1; i < n; ++i) g.boundaries[i] = 0.5 * (g.nodes[i - 1] + g.nodes[i]);
    const double S = sphere_area(N);
    g.weights.resize(n);
    for (size_t i = 0; i < n; ++i) {
        g.weights[i] = S * (std::pow(g.boundaries[i + 1], N) - std::pow(g.boundaries[i], N)) / N;
    }
    return g;
}

double default_stretch(size_t n, double target_ratio) {
    // Solve d1/r_max = (s-1)/(s^n - 1) = target_ratio for s by bisection.
    double lo = 1.0 + 1e-12, hi = 2.0;
    auto ratio = [n](double s) {
        return (s - 1.0) / (std::pow(s, static_cast<double>(n)) - 1.0);
    };
    if (ratio(lo) <= target_ratio) return 1.0;  // uniform already finer
    while (ratio(hi) > target_ratio) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (ratio(mid) > target_ratio)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

RadialGrid default_grid(int N, double r_max, size_t n) {
    return make_grid(N, r_max, n, default_stretch(n));
}

double RadialDensity::interpolate(double r) const {
    const auto& xs = grid.nodes;
    if (r <= xs.front()) return values.front();
    if (r >= xs.back()) {
        if (r > grid.r_max) return 0.0;
        return values.back();
    }
    auto it = std::upper_bound(xs.begin(), xs.end(), r);
    size_t j = static_cast<size_t>(it - xs.begin());
    double t = (r - xs[j - 1]) / (xs[j] - xs[j - 1]);
    return (1.0 - t) * values[j - 1] + t * values[j];
}

RadialIntegrals integrals(const RadialDensity& rho, const Params& p) {
    if (rho.grid.dim != p.dim)
        throw std::invalid_argument("integrals: density dimension does not match params");
    KahanSum mass, lq, moment;
    const size_t n = rho.grid.size();
    for (size_t i = 0; i < n; ++i) {
        double w = rho.grid.weights[i];
        double v = rho.values[i];
        mass.add(w * v);
        lq.add(w * std::pow(v, p.q));
        moment.add(w * std::pow(rho.grid.nodes[i], p.lambda) * v);
    }
    return {mass.value(), lq.value(), moment.value()};
}

double mass_of(const RadialDensity& rho) {
    KahanSum m;
    for (size_t i = 0; i < rho.grid.size(); ++i) m.add(rho.grid.weights[i] * rho.values[i]);
    return m.value();
}

RadialDensity sample_lemma4_optimizer(const Params& p, const RadialGrid& grid) {
    RadialDensity rho{grid, std::vector<double>(grid.size()), true};
    const double e = -1.0 / (1.0 - p.q);
    for (size_t i = 0; i < grid.size(); ++i)
        rho.values[i] = std::pow(1.0 + std::pow(grid.nodes[i], p.lambda), e);
    return rho;
}

RadialDensity sample_annulus_trial(double R, double lambda, const RadialGrid& grid) {
    if (!(R > 1.0)) throw std::invalid_argument("sample_annulus_trial: R must exceed 1");
    RadialDensity rho{grid, std::vector<double>(grid.size(), 0.0), false};
    const int N = grid.dim;
    const double a = N + lambda;
    // Exact cell averages of |x|^{-(N+lambda)} 1_{[1,R]} against r^{N-1} dr:
    // integrand r^{-lambda-1}, antiderivative -r^{-lambda}/lambda.
    for (size_t i = 0; i < grid.size(); ++i) {
        double lo = std::max(grid.boundaries[i], 1.0);
        double hi = std::min(grid.boundaries[i + 1], R);
        if (hi <= lo) continue;
        double cell_meas = (std::pow(grid.boundaries[i + 1], N) - std::pow(grid.boundaries[i], N)) / N;
        double integral = (std::pow(lo, -lambda) - std::pow(hi, -lambda)) / lambda;
        rho.values[i] = integral / cell_meas;
        (void)a;
    }
    return rho;
}

RadialDensity sample_ball_indicator(double R, const RadialGrid& grid) {
    if (!(R > 0.0)) throw std::invalid_argument("sample_ball_indicator: R must be > 0");
    RadialDensity rho{grid, std::vector<double>(grid.size(), 0.0), true};
    const int N = grid.dim;
    for (size_t i = 0; i < grid.size(); ++i) {
        double a = grid.boundaries[i], b = grid.boundaries[i + 1];
        if (R >= b)
            rho.values[i] = 1.0;
        else if (R > a)
            rho.values[i] = (std::pow(R, N) - std::pow(a, N)) / (std::pow(b, N) - std::pow(a, N));
    }
    return rho;
}

RadialDensity sample_gaussian(double s, const RadialGrid& grid) {
    if (!(s > 0.0)) throw std::invalid_argument("sample_gaussian: scale must be > 0");
    RadialDensity rho{grid, std::vector<double>(grid.size()), true};
    for (size_t i = 0; i < grid.size(); ++i) {
        double r = grid.nodes[i] / s;
        rho.values[i] = std::exp(-0.5 * r * r);
    }
    return rho;
}

RadialDensity sample_external_barenblatt(double mu, const Params& p, const RadialGrid& grid) {
    if (mu < -1.0) throw std::invalid_argument("sample_external_barenblatt: mu must be >= -1");
    RadialDensity rho{grid, std::vector<double>(grid.size()), true};
    const double e = -1.0 / (1.0 - p.q);
    for (size_t i = 0; i < grid.size(); ++i) {
        double r = grid.nodes[i];
        double V = 1.0 + 0.5 * r * r + std::pow(r, p.lambda) / p.lambda;
        rho.values[i] = std::pow(mu + V, e);
    }
    return rho;
}

double estimated_tail_mass(const RadialDensity& rho, double q) {
    const auto& g = rho.grid;
    size_t last = g.size() - 1;
    double r = g.nodes[last];
    double v = rho.values[last];
    if (v <= 0.0 || r <= 0.0) return 0.0;
    double p = g.dim / q;  // decay bound rho <= C r^{-N/q}
    if (p <= g.dim) return std::numeric_limits<double>::infinity();
    double C = v * std::pow(r, p);
    // int_{r_max}^inf C r^{-p} S r^{N-1} dr
    return C * sphere_area(g.dim) * std::pow(g.r_max, g.dim - p) / (p - g.dim);
}

RadialDensity dilate(const RadialDensity& rho, double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("dilate: tau must be > 0");
    RadialDensity out{rho.grid, std::vector<double>(rho.grid.size()), rho.monotone_flag};
    double scale = std::pow(tau, rho.grid.dim);
    for (size_t i = 0; i < rho.grid.size(); ++i)
        out.values[i] = scale * rho.interpolate(tau * rho.grid.nodes[i]);
    return out;
}

void write_profile_csv(const RadialDensity& rho, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_profile_csv: cannot open " + path);
    out << "r,rho\n";
    char buf[80];
    for (size_t i = 0; i < rho.grid.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", rho.grid.nodes[i], rho.values[i]);
        out << buf;
    }
}

std::vector<std::pair<double, double>> read_profile_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_profile_csv: cannot open " + path);
    std::vector<std::pair<double, double>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.find("r") != std::string::npos && line.find("rho") != std::string::npos)
                continue;  // header
        }
        std::istringstream ss(line);
        std::string a, b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',')) continue;
        rows.emplace_back(std::stod(a), std::stod(b));
    }
    if (rows.empty()) throw std::runtime_error("read_profile_csv: no data rows in " + path);
    return rows;
}

RadialDensity resample_onto(const std::vector<std::pair<double, double>>& data,
                            const RadialGrid& grid) {
    RadialDensity rho{grid, std::vector<double>(grid.size(), 0.0), false};
    for (size_t i = 0; i < grid.size(); ++i) {
        double r = grid.nodes[i];
        auto it = std::lower_bound(data.begin(), data.end(), r,
                                   [](const auto& row, double x) { return row.first < x; });
        if (it == data.begin()) {
            rho.values[i] = it->second;
        } else if (it == data.end()) {
            rho.values[i] = 0.0;
        } else {
            auto prev = it - 1;
            double t = (r - prev->first) / (it->first - prev->first);
            rho.values[i] = (1.0 - t) * prev->second + t * it->second;
        }
        if (rho.values[i] < 0.0) rho.values[i] = 0.0;
    }
    return rho;
}

}  // namespace rhls
