#pragma once

#include <stdexcept>

namespace rhls {

/// The (N, lambda, q) triple of the interaction--diffusion quotient.
/// Valid ranges are enforced at construction: N >= 1, lambda > 0, 0 < q < 1.
struct Params {
    int dim;
    double lambda;
    double q;

    Params(int N, double lambda_, double q_) : dim(N), lambda(lambda_), q(q_) {
        if (N < 1) throw std::invalid_argument("Params: dimension must be >= 1");
        if (!(lambda_ > 0.0)) throw std::invalid_argument("Params: lambda must be > 0");
        if (!(q_ > 0.0 && q_ < 1.0)) throw std::invalid_argument("Params: q must lie in (0,1)");
    }

    /// Scaling exponent alpha = (2N - q(2N+lambda)) / (N(1-q)).
    double alpha() const {
        return (2.0 * dim - q * (2.0 * dim + lambda)) / (dim * (1.0 - q));
    }
};

/// q below which the inequality fails (alpha >= 1).
inline double validity_threshold(int N, double lambda) { return N / (N + lambda); }

/// q on the conformally invariant line (alpha = 0).
inline double conformal_q(int N, double lambda) { return 2.0 * N / (2.0 * N + lambda); }

/// Explicit existence threshold min{1 - 2/N, 2N/(2N+lambda)} for N >= 3.
inline double explicit_existence_q(int N, double lambda) {
    double a = 1.0 - 2.0 / N;
    double b = conformal_q(N, lambda);
    return a < b ? a : b;
}

enum class Validity { Invalid, Valid };

enum class SignClass {
    SubConformal,    // 0 < alpha < 1
    Conformal,       // alpha = 0
    SuperConformal,  // alpha < 0
    Degenerate,      // alpha >= 1 (no inequality)
};

enum class Existence {
    MinimizerGuaranteed,
    RelaxedOnly,  // relaxed minimizer exists; qbar not consulted
    OpenRegion,   // relaxed minimizer exists; Dirac mass not excluded
    NotApplicable,
};

struct Regime {
    Validity validity;
    SignClass sign_class;
    Existence existence;
};

/// Classify (lambda, q) for dimension N. When `use_qbar` is set and the point
/// falls in the N >= 3, lambda > 2N/(N-2) window below the explicit existence
/// threshold, the layer-cake curve qbar is computed lazily (and cached) to
/// decide between MinimizerGuaranteed and OpenRegion; otherwise such points
/// report RelaxedOnly.
Regime classify(const Params& p, bool use_qbar = true);

const char* to_string(Validity v);
const char* to_string(SignClass s);
const char* to_string(Existence e);

}  // namespace rhls
