#include "rhls/constants.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "rhls/kernel.hpp"
#include "rhls/quadrature.hpp"
#include "rhls/radial.hpp"

namespace rhls {

namespace {

bool near_gamma_pole(double x, double tol = 1e-8) {
    if (x > tol) return false;
    return std::abs(x - std::round(x)) < tol;
}

// Plain single-panel Gauss-Legendre evaluation of the angular average; exact
// enough for lambda >= 2 where the phi = 0 endpoint behavior is mild.
double kernel_gl(int N, double lambda, double r, double s, int order = 64) {
    if (r == 0.0 || s == 0.0) return std::pow(std::max(r, s), lambda);
    if (N == 1 || N == 3 || lambda < 2.0) return angular_kernel(N, lambda, r, s);
    const double d2 = (r - s) * (r - s);
    const double rs4 = 4.0 * r * s;
    const double half_l = 0.5 * lambda;
    const GaussLegendre& rule = gauss_legendre(order);
    double sum = 0.0;
    for (size_t i = 0; i < rule.nodes.size(); ++i) {
        double phi = 0.5 * M_PI * (1.0 + rule.nodes[i]);
        double sh = std::sin(0.5 * phi);
        double v = std::pow(d2 + rs4 * sh * sh, half_l);
        if (N > 2) v *= std::pow(std::sin(phi), N - 2);
        sum += rule.weights[i] * v;
    }
    return sum * 0.5 * M_PI / wallis_integral(N);
}

// int_0^1 t^{A-1} (1-t)^{B-1} dt by adaptive quadrature on [eps, 1-eps] with
// three-term analytic endpoint series; robust for small A or B.
double beta_integral(double A, double B) {
    if (!(A > 0.0) || !(B > 0.0))
        throw std::invalid_argument("beta_integral: arguments must be positive");
    const double eps = 1e-3;
    auto endpoint = [eps](double a, double b) {
        // int_0^eps t^{a-1}(1-t)^{b-1} dt, (1-t)^{b-1} expanded to 4 terms
        double c0 = 1.0;
        double c1 = -(b - 1.0);
        double c2 = (b - 1.0) * (b - 2.0) / 2.0;
        double c3 = -(b - 1.0) * (b - 2.0) * (b - 3.0) / 6.0;
        return c0 * std::pow(eps, a) / a + c1 * std::pow(eps, a + 1.0) / (a + 1.0) +
               c2 * std::pow(eps, a + 2.0) / (a + 2.0) + c3 * std::pow(eps, a + 3.0) / (a + 3.0);
    };
    double middle = integrate_adaptive(
        [A, B](double t) { return std::pow(t, A - 1.0) * std::pow(1.0 - t, B - 1.0); }, eps,
        1.0 - eps, 1e-13);
    return endpoint(A, B) + endpoint(B, A) + middle;
}

}  // namespace

FlaggedValue conformal_constant(int N, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("conformal_constant: lambda must be > 0");
    const double a1 = 0.5 * N - 0.5 * lambda;
    const double a2 = N - 0.5 * lambda;
    FlaggedValue out;
    if (near_gamma_pole(a1) || near_gamma_pole(a2)) {
        out.value = std::numeric_limits<double>::quiet_NaN();
        out.reliable = false;
        return out;
    }
    double v = std::pow(M_PI, 0.5 * lambda) * std::tgamma(a1) / std::tgamma(a2) *
               std::pow(std::tgamma(static_cast<double>(N)) / std::tgamma(0.5 * N),
                        1.0 - lambda / N);
    out.value = v;
    out.reliable = std::isfinite(v) && v > 0.0;
    return out;
}

double lemma4_constant(const Params& p, Lemma4Mode mode) {
    const int N = p.dim;
    const double lambda = p.lambda;
    const double q = p.q;
    if (!(q > validity_threshold(N, lambda)))
        throw std::invalid_argument("lemma4_constant: q must exceed N/(N+lambda)");
    const double theta = N * (1.0 - q) / (lambda * q);

    if (mode == Lemma4Mode::OptimizeR) {
        const double S = sphere_area(N);
        const double u = N * (1.0 - q);   // exponent of the inner-ball piece
        const double m = lambda * q;      // total exponent drop of the outer piece
        const double C1 = std::pow(ball_volume(N, 1.0), 1.0 - q);
        const double C2 = std::pow(S * (1.0 - q) / (m - u), 1.0 - q);
        // min_R C1 R^u X^q + C2 R^{u-m} Y^q = K X^{q(1-theta)} Y^{q theta}
        const double K = (m / (m - u)) * std::pow(C1, 1.0 - theta) * std::pow(C2, theta) *
                         std::pow((m - u) / u, theta);
        return std::pow(K, -1.0 / q);
    }

    // ExplicitOptimizer: quotient at (1+r^lambda)^{-1/(1-q)}. Substituting
    // t = r^lambda/(1+r^lambda) turns each radial integral into
    // (1/lambda) int t^{A-1}(1-t)^{B-1} dt.
    const double S = sphere_area(N);
    const double c = 1.0 / (1.0 - q);
    double mass = S / lambda * beta_integral(N / lambda, c - N / lambda);
    double moment = S / lambda * beta_integral((N + lambda) / lambda, c - (N + lambda) / lambda);
    double lq = S / lambda * beta_integral(N / lambda, q * c - N / lambda);
    return std::pow(mass, 1.0 - theta) * std::pow(moment, theta) / std::pow(lq, 1.0 / q);
}

double ratio_F(int N, double lambda, double s) {
    if (!(s > 0.0)) throw std::invalid_argument("ratio_F: s must be > 0");
    // F(1, s) with the inner ball substituted sigma = s v, both on [0, 1].
    const int order = 32;
    const GaussLegendre& rule = gauss_legendre(order);
    double num = 0.0;
    for (int i = 0; i < order; ++i) {
        double r = 0.5 * (1.0 + rule.nodes[i]);
        double wr = 0.5 * rule.weights[i] * std::pow(r, N - 1);
        double inner = 0.0;
        for (int j = 0; j < order; ++j) {
            double v = 0.5 * (1.0 + rule.nodes[j]);
            inner += 0.5 * rule.weights[j] * std::pow(v, N - 1) *
                     kernel_gl(N, lambda, r, s * v);
        }
        num += wr * inner;
    }
    return N * (N + lambda) * num / (1.0 + std::pow(s, lambda));
}

double ratio_F_full(int N, double lambda, double R, double S) {
    if (!(R > 0.0) || !(S > 0.0)) throw std::invalid_argument("ratio_F_full: radii must be > 0");
    const int order = 32;
    const GaussLegendre& rule = gauss_legendre(order);
    double num = 0.0;
    for (int i = 0; i < order; ++i) {
        double r = 0.5 * R * (1.0 + rule.nodes[i]);
        double wr = 0.5 * R * rule.weights[i] * std::pow(r, N - 1);
        double inner = 0.0;
        for (int j = 0; j < order; ++j) {
            double sig = 0.5 * S * (1.0 + rule.nodes[j]);
            inner += 0.5 * S * rule.weights[j] * std::pow(sig, N - 1) *
                     kernel_gl(N, lambda, r, sig);
        }
        num += wr * inner;
    }
    double den = (std::pow(R, N) * std::pow(S, N + lambda) +
                  std::pow(S, N) * std::pow(R, N + lambda)) /
                 (static_cast<double>(N) * (N + lambda));
    return num / den;
}

double layercake_constant(int N, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("layercake_constant: lambda must be > 0");
    const double lo = -6.0, hi = 6.0;
    const int steps = 241;
    double best_x = 0.0, best = -1.0;
    for (int i = 0; i < steps; ++i) {
        double x = lo + (hi - lo) * i / (steps - 1);
        double f = ratio_F(N, lambda, std::pow(10.0, x));
        if (f > best) {
            best = f;
            best_x = x;
        }
    }
    // ternary refinement to 1e-6 in log10 s
    double a = best_x - (hi - lo) / (steps - 1);
    double b = best_x + (hi - lo) / (steps - 1);
    while (b - a > 1e-6) {
        double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
        if (ratio_F(N, lambda, std::pow(10.0, m1)) < ratio_F(N, lambda, std::pow(10.0, m2)))
            a = m1;
        else
            b = m2;
    }
    double refined = ratio_F(N, lambda, std::pow(10.0, 0.5 * (a + b)));
    return std::max(best, refined);
}

double jensen_bound(int N, double lambda) {
    if (lambda < 2.0) throw std::invalid_argument("jensen_bound: requires lambda >= 2");
    return (N + lambda) / (2.0 * N) * std::pow(2.0 * N / (N + 2.0), 0.5 * lambda);
}

double qbar(int N, double lambda, QbarMode mode) {
    double A;
    if (mode == QbarMode::Crude) {
        if (!(lambda > 1.0)) throw std::invalid_argument("qbar: Crude requires lambda > 1");
        A = std::pow(2.0, lambda - 1.0);
    } else {
        if (!(lambda > 2.0)) throw std::invalid_argument("qbar: LayerCake requires lambda > 2");
        A = layercake_constant(N, lambda);
        if (A <= 1.0) return 0.0;  // no constraint
    }
    double c = 1.0 - 1.0 / (2.0 * A);
    return 2.0 * N * c / (2.0 * N * c + lambda);
}

double qbar_cached(int N, double lambda) {
    static std::map<std::pair<int, double>, double> cache;
    static std::mutex mtx;
    {
        std::lock_guard<std::mutex> lock(mtx);
        auto it = cache.find({N, lambda});
        if (it != cache.end()) return it->second;
    }
    double v = qbar(N, lambda, QbarMode::LayerCake);
    std::lock_guard<std::mutex> lock(mtx);
    cache[{N, lambda}] = v;
    return v;
}

ConstantsReport make_constants_report(int N, double lambda, std::optional<double> q) {
    ConstantsReport rep;
    rep.dim = N;
    rep.lambda = lambda;
    rep.conformal_q = conformal_q(N, lambda);
    rep.validity_threshold = validity_threshold(N, lambda);
    rep.conformal_constant = conformal_constant(N, lambda);
    rep.A = layercake_constant(N, lambda);
    if (lambda >= 2.0) rep.B_jensen = jensen_bound(N, lambda);
    rep.qbar = (lambda > 2.0) ? qbar(N, lambda, QbarMode::LayerCake) : 0.0;
    rep.qbar_crude = (lambda > 1.0) ? qbar(N, lambda, QbarMode::Crude) : 0.0;
    if (q) {
        Params p(N, lambda, *q);
        rep.q = *q;
        rep.alpha = p.alpha();
        rep.regime = classify(p);
        if (*q > rep.validity_threshold) {
            rep.lemma4_sharp = lemma4_constant(p, Lemma4Mode::ExplicitOptimizer);
            rep.lemma4_proof = lemma4_constant(p, Lemma4Mode::OptimizeR);
        }
    }
    return rep;
}

}  // namespace rhls
