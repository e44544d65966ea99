#pragma once

#include <functional>
#include <vector>

namespace rhls {

/// Compensated accumulator; keeps long reductions reproducible to ~1 ulp so
/// descent checks on the quotient are not noise-dominated.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double x) {
        double y = x - carry;
        double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

/// Gauss-Legendre rule on [-1, 1]; nodes/weights cached per order.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};

const GaussLegendre& gauss_legendre(int order);

/// Integrate f over [a, b] with a fixed-order Gauss-Legendre rule.
double integrate_gl(const std::function<double(double)>& f, double a, double b,
                    int order = 32);

/// Adaptive Gauss-Legendre (G16 vs G32 error estimate, bisection).
/// Handles integrable endpoint singularities via geometric refinement;
/// `rel_tol` is relative to the accumulated integral scale.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol = 1e-12, int max_depth = 52);

}  // namespace rhls
