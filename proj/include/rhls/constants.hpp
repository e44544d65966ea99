#pragma once

#include <optional>

#include "rhls/params.hpp"

namespace rhls {

/// A number whose evaluation may sit on a Gamma pole or produce a
/// non-positive value; consumers must not treat unreliable values as truth.
struct FlaggedValue {
    double value = 0.0;
    bool reliable = false;
};

/// The conformal-line constant formula as printed:
///   pi^{lambda/2} Gamma(N/2 - lambda/2)/Gamma(N - lambda/2)
///   (Gamma(N)/Gamma(N/2))^{1 - lambda/N}.
/// Flagged unreliable when a Gamma argument is within 1e-8 of a pole or the
/// result is non-positive. The numeric minimizer is the operative
/// cross-check; this formula is never used as silent ground truth.
FlaggedValue conformal_constant(int N, double lambda);

enum class Lemma4Mode { OptimizeR, ExplicitOptimizer };

/// Interpolation constant c_{N,lambda,q} of
///   mass^{1-theta} moment^{theta} >= c (int rho^q)^{1/q},  theta = N(1-q)/(lambda q).
/// OptimizeR: best constant from the two-piece Hoelder bound, optimized over
/// the split radius in closed form. ExplicitOptimizer: the quotient evaluated
/// at (1+r^lambda)^{-1/(1-q)}, which realizes equality; computed by
/// Beta-substitution quadrature that stays accurate as q approaches
/// N/(N+lambda) where the integrals nearly diverge.
double lemma4_constant(const Params& p, Lemma4Mode mode);

/// F(1, s): ball-pair interaction ratio; depends only on S/R by degree-0
/// homogeneity.
double ratio_F(int N, double lambda, double s);

/// F(R, S) straight from its definition (no homogeneity reduction); used as
/// the validation oracle for the 1-D search.
double ratio_F_full(int N, double lambda, double R, double S);

/// A_{N,lambda} = sup_s F(1, s): grid scan on log10 s over [-6, 6] plus
/// ternary refinement to 1e-6 in log s.
double layercake_constant(int N, double lambda);

/// B_{N,lambda} = (N+lambda)/(2N) (2N/(N+2))^{lambda/2}; requires lambda >= 2.
double jensen_bound(int N, double lambda);

enum class QbarMode { LayerCake, Crude };

/// Existence-threshold curve qbar = 2Nc/(2Nc + lambda) with c = 1 - 1/(2A).
/// LayerCake uses A_{N,lambda} (lambda > 2; returns 0 when A <= 1);
/// Crude substitutes A = 2^{lambda-1}, giving the printed
/// 2N(1-2^{-lambda})/(2N(1-2^{-lambda})+lambda) curve.
double qbar(int N, double lambda, QbarMode mode);

/// Memoized LayerCake qbar, shared by the params classifier and sweeps.
double qbar_cached(int N, double lambda);

struct ConstantsReport {
    int dim = 0;
    double lambda = 0.0;
    double conformal_q = 0.0;
    double validity_threshold = 0.0;
    FlaggedValue conformal_constant;
    double A = 0.0;
    std::optional<double> B_jensen;  // lambda >= 2 only
    double qbar = 0.0;               // 0 when no constraint
    double qbar_crude = 0.0;
    // present when q was supplied
    std::optional<double> alpha;
    std::optional<double> q;
    std::optional<double> lemma4_sharp;
    std::optional<double> lemma4_proof;
    std::optional<Regime> regime;
};

ConstantsReport make_constants_report(int N, double lambda,
                                      std::optional<double> q = std::nullopt);

}  // namespace rhls
