#include "rhls/kernel.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>
#include <thread>

#include "rhls/quadrature.hpp"

namespace rhls {

double wallis_integral(int N) {
    return std::sqrt(M_PI) * std::tgamma(0.5 * (N - 1)) / std::tgamma(0.5 * N);
}

namespace {

// N = 3 closed form ((r+s)^{l+2} - |r-s|^{l+2}) / (2 r s (l+2)), with a series
// branch when s << r to avoid the cancellation in the difference.
double kernel_n3(double lambda, double r, double s) {
    if (r < s) std::swap(r, s);
    if (s == 0.0) return std::pow(r, lambda);
    double t = s / r;
    double scale = std::pow(r, lambda);
    double m = lambda + 2.0;
    if (t < 1e-4) {
        // (1+t)^m - (1-t)^m = 2(mt + C(m,3)t^3 + C(m,5)t^5 + ...)
        double c3 = m * (m - 1.0) * (m - 2.0) / 6.0;
        double c5 = c3 * (m - 3.0) * (m - 4.0) / 20.0;
        double t2 = t * t;
        double diff = 2.0 * t * (m + c3 * t2 + c5 * t2 * t2);
        return scale * diff / (2.0 * t * m);
    }
    double diff = std::pow(1.0 + t, m) - std::pow(1.0 - t, m);
    return scale * diff / (2.0 * t * m);
}

}  // namespace

double angular_kernel(int N, double lambda, double r, double s) {
    if (r < 0.0 || s < 0.0) throw std::invalid_argument("angular_kernel: negative radius");
    if (r == 0.0 || s == 0.0) return std::pow(std::max(r, s), lambda);
    if (N == 1) return 0.5 * (std::pow(r + s, lambda) + std::pow(std::abs(r - s), lambda));
    if (N == 3) return kernel_n3(lambda, r, s);

    // General N: integrate h(phi) = ((r-s)^2 + 4 r s sin^2(phi/2))^{lambda/2}
    // sin^{N-2}(phi) over [0, pi], normalized by the Wallis integral.
    const double d2 = (r - s) * (r - s);
    const double rs4 = 4.0 * r * s;
    const double half_l = 0.5 * lambda;
    auto h = [&](double phi) {
        double sh = std::sin(0.5 * phi);
        double base = d2 + rs4 * sh * sh;
        double v = std::pow(base, half_l);
        if (N > 2) v *= std::pow(std::sin(phi), N - 2);
        return v;
    };
    // Far pairs and even lambda: the integrand is analytic; a single
    // Gauss-Legendre panel converges spectrally. Otherwise refine toward 0.
    bool near_diagonal = d2 < 1e-3 * (r * r + s * s);
    bool lambda_even = std::abs(lambda - 2.0 * std::round(half_l)) < 1e-13;
    double num;
    if (!near_diagonal || lambda_even) {
        double a = integrate_gl(h, 0.0, M_PI, 64);
        double b = integrate_gl(h, 0.0, M_PI, 96);
        num = (std::abs(a - b) <= 1e-12 * std::abs(b))
                  ? b
                  : integrate_adaptive(h, 0.0, M_PI, 1e-13);
    } else {
        num = integrate_adaptive(h, 0.0, M_PI, 1e-13);
    }
    return num / wallis_integral(N);
}

KernelTable build_table(const RadialGrid& grid, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("build_table: lambda must be > 0");
    KernelTable t;
    t.grid = grid;
    t.lambda = lambda;
    const size_t n = grid.size();
    t.entries.assign(n * n, 0.0);

    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    auto fill_rows = [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i)
            for (size_t j = 0; j <= i; ++j)
                t.entries[i * n + j] = angular_kernel(grid.dim, lambda, grid.nodes[i], grid.nodes[j]);
    };
    if (hw > 1 && n >= 128) {
        std::vector<std::thread> pool;
        size_t chunk = (n + hw - 1) / hw;
        for (unsigned c = 0; c < hw; ++c) {
            size_t b = c * chunk, e = std::min(n, b + chunk);
            if (b < e) pool.emplace_back(fill_rows, b, e);
        }
        for (auto& th : pool) th.join();
    } else {
        fill_rows(0, n);
    }
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) t.entries[i * n + j] = t.entries[j * n + i];
    return t;
}

double interaction_energy(const RadialDensity& rho, const KernelTable& table) {
    if (!rho.grid.same_layout(table.grid))
        throw std::invalid_argument("interaction_energy: grid mismatch");
    return cross_interaction_energy(rho, rho, table);
}

double cross_interaction_energy(const RadialDensity& a, const RadialDensity& b,
                                const KernelTable& table) {
    if (!a.grid.same_layout(table.grid) || !b.grid.same_layout(table.grid))
        throw std::invalid_argument("cross_interaction_energy: grid mismatch");
    const size_t n = table.size();
    const auto& w = table.grid.weights;
    // Row partial sums combined in fixed index order with compensation, so
    // the result is schedule-independent and descent checks stay noise-free.
    KahanSum total;
    for (size_t i = 0; i < n; ++i) {
        double fa = w[i] * a.values[i];
        if (fa == 0.0) continue;
        const double* row = table.entries.data() + i * n;
        KahanSum rowsum;
        for (size_t j = 0; j < n; ++j) rowsum.add(w[j] * b.values[j] * row[j]);
        total.add(fa * rowsum.value());
    }
    return total.value();
}

std::vector<double> potential_values(const RadialDensity& rho, const KernelTable& table) {
    if (!rho.grid.same_layout(table.grid))
        throw std::invalid_argument("potential: grid mismatch");
    const size_t n = table.size();
    const auto& w = table.grid.weights;
    std::vector<double> phi(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        const double* row = table.entries.data() + i * n;
        double sum = 0.0;
        for (size_t j = 0; j < n; ++j) sum += w[j] * rho.values[j] * row[j];
        phi[i] = sum / table.lambda;
    }
    return phi;
}

RadialDensity potential(const RadialDensity& rho, const KernelTable& table) {
    RadialDensity out{table.grid, potential_values(rho, table), false};
    return out;
}

namespace {

// Halton sequence with a random shift (randomized QMC); bases cover up to 6 dims.
constexpr int kHaltonBases[6] = {2, 3, 5, 7, 11, 13};

double halton(uint64_t index, int base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * static_cast<double>(index % base);
        index /= base;
    }
    return r;
}

}  // namespace

OracleEstimate interaction_energy_oracle(const RadialDensity& rho, int N, double lambda,
                                         size_t samples, uint64_t seed) {
    if (N > 3) throw std::invalid_argument("interaction_energy_oracle: N > 3 rejected (cost)");
    if (rho.grid.dim != N) throw std::invalid_argument("interaction_energy_oracle: dim mismatch");
    const double R = rho.grid.r_max;

    if (N == 1) {
        // Tensor-product Gauss-Legendre over [-R, R]^2.
        int m = static_cast<int>(std::sqrt(static_cast<double>(std::max<size_t>(samples, 1024))));
        m = std::min(m, 512);
        const GaussLegendre& rule = gauss_legendre(m);
        double sum = 0.0;
        for (int i = 0; i < m; ++i) {
            double x = R * rule.nodes[i];
            double fx = rho.interpolate(std::abs(x));
            if (fx == 0.0) continue;
            double inner = 0.0;
            for (int j = 0; j < m; ++j) {
                double y = R * rule.nodes[j];
                double fy = rho.interpolate(std::abs(y));
                if (fy == 0.0) continue;
                inner += rule.weights[j] * fy * std::pow(std::abs(x - y), lambda);
            }
            sum += rule.weights[i] * fx * inner;
        }
        return {sum * R * R, 0.0};
    }

    // N = 2, 3: randomized Halton over the cube [-R, R]^{2N}, 8 shift replicates.
    const int dims = 2 * N;
    const int replicates = 8;
    const size_t per_rep = std::max<size_t>(samples / replicates, 256);
    const double volume = std::pow(2.0 * R, dims);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> means(replicates, 0.0);
    std::vector<double> shift(dims);
    std::vector<double> pt(dims);
    for (int rep = 0; rep < replicates; ++rep) {
        for (int d = 0; d < dims; ++d) shift[d] = unif(rng);
        double acc = 0.0;
        for (size_t k = 0; k < per_rep; ++k) {
            for (int d = 0; d < dims; ++d) {
                double u = halton(k + 1, kHaltonBases[d]) + shift[d];
                u -= std::floor(u);
                pt[d] = (2.0 * u - 1.0) * R;
            }
            double rx = 0.0, ry = 0.0, dist2 = 0.0;
            for (int d = 0; d < N; ++d) {
                rx += pt[d] * pt[d];
                ry += pt[N + d] * pt[N + d];
                double diff = pt[d] - pt[N + d];
                dist2 += diff * diff;
            }
            double fx = rho.interpolate(std::sqrt(rx));
            if (fx == 0.0) continue;
            double fy = rho.interpolate(std::sqrt(ry));
            if (fy == 0.0) continue;
            acc += fx * fy * std::pow(dist2, 0.5 * lambda);
        }
        means[rep] = volume * acc / static_cast<double>(per_rep);
    }
    double mean = 0.0;
    for (double m : means) mean += m;
    mean /= replicates;
    double var = 0.0;
    for (double m : means) var += (m - mean) * (m - mean);
    var /= (replicates - 1);
    return {mean, std::sqrt(var / replicates)};
}

namespace {

uint64_t fnv1a(const void* data, size_t len, uint64_t h = 1469598103934665603ull) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

constexpr char kMagic[8] = {'R', 'H', 'L', 'S', 'K', 'T', '0', '1'};

bool validate_table(const KernelTable& t) {
    const size_t n = t.size();
    if (t.entries.size() != n * n) return false;
    size_t step = std::max<size_t>(1, n / 64);
    for (size_t i = 0; i < n; i += step) {
        for (size_t j = 0; j < n; j += step) {
            double k = t.at(i, j);
            if (k != t.at(j, i)) return false;
            double r = t.grid.nodes[i], s = t.grid.nodes[j];
            double lo = std::pow(std::abs(r - s), t.lambda);
            double hi = std::pow(r + s, t.lambda);
            if (k < lo * (1.0 - 1e-9) - 1e-300 || k > hi * (1.0 + 1e-9) + 1e-300) return false;
        }
        if (t.grid.nodes[0] == 0.0 &&
            std::abs(t.at(i, 0) - std::pow(t.grid.nodes[i], t.lambda)) >
                1e-9 * (1.0 + std::pow(t.grid.nodes[i], t.lambda)))
            return false;
    }
    return true;
}

}  // namespace

std::string cache_path(const std::string& dir, const RadialGrid& grid, double lambda) {
    uint64_t h = fnv1a(grid.nodes.data(), grid.nodes.size() * sizeof(double));
    h = fnv1a(&lambda, sizeof(lambda), h);
    h = fnv1a(&grid.dim, sizeof(grid.dim), h);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "/ktab_%d_%016llx.bin", grid.dim,
                  static_cast<unsigned long long>(h));
    return dir + buf;
}

void save_table(const KernelTable& t, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_table: cannot open " + path);
    out.write(kMagic, 8);
    int32_t dim = t.grid.dim;
    uint64_t n = t.grid.size();
    out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
    out.write(reinterpret_cast<const char*>(&n), sizeof(n));
    out.write(reinterpret_cast<const char*>(&t.lambda), sizeof(double));
    out.write(reinterpret_cast<const char*>(&t.grid.r_max), sizeof(double));
    out.write(reinterpret_cast<const char*>(t.grid.nodes.data()), n * sizeof(double));
    out.write(reinterpret_cast<const char*>(t.grid.boundaries.data()), (n + 1) * sizeof(double));
    out.write(reinterpret_cast<const char*>(t.grid.weights.data()), n * sizeof(double));
    out.write(reinterpret_cast<const char*>(t.entries.data()), n * n * sizeof(double));
}

std::optional<KernelTable> load_table(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0) return std::nullopt;
    KernelTable t;
    int32_t dim = 0;
    uint64_t n = 0;
    in.read(reinterpret_cast<char*>(&dim), sizeof(dim));
    in.read(reinterpret_cast<char*>(&n), sizeof(n));
    if (!in || n == 0 || n > (1u << 20)) return std::nullopt;
    t.grid.dim = dim;
    in.read(reinterpret_cast<char*>(&t.lambda), sizeof(double));
    in.read(reinterpret_cast<char*>(&t.grid.r_max), sizeof(double));
    t.grid.nodes.resize(n);
    t.grid.boundaries.resize(n + 1);
    t.grid.weights.resize(n);
    t.entries.resize(n * n);
    in.read(reinterpret_cast<char*>(t.grid.nodes.data()), n * sizeof(double));
    in.read(reinterpret_cast<char*>(t.grid.boundaries.data()), (n + 1) * sizeof(double));
    in.read(reinterpret_cast<char*>(t.grid.weights.data()), n * sizeof(double));
    in.read(reinterpret_cast<char*>(t.entries.data()), n * n * sizeof(double));
    if (!in) return std::nullopt;
    if (!validate_table(t)) return std::nullopt;
    return t;
}

KernelTable build_table_cached(const RadialGrid& grid, double lambda) {
    const char* dir = std::getenv("RHLS_CACHE_DIR");
    if (dir == nullptr || *dir == '\0') return build_table(grid, lambda);
    std::string path = cache_path(dir, grid, lambda);
    if (auto cached = load_table(path)) {
        if (cached->grid.same_layout(grid) && cached->lambda == lambda) return std::move(*cached);
    }
    KernelTable t = build_table(grid, lambda);
    try {
        save_table(t, path);
    } catch (const std::exception&) {
        // cache directory not writable; proceed without caching
    }
    return t;
}

}  // namespace rhls
