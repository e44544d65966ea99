#include "rhls/params.hpp"

#include <cmath>

#include "rhls/constants.hpp"

namespace rhls {

Regime classify(const Params& p, bool use_qbar) {
    Regime r{};
    const int N = p.dim;
    const double q_min = validity_threshold(N, p.lambda);
    const double q_conf = conformal_q(N, p.lambda);

    if (!(p.q > q_min)) {
        r.validity = Validity::Invalid;
        r.sign_class = SignClass::Degenerate;
        r.existence = Existence::NotApplicable;
        return r;
    }
    r.validity = Validity::Valid;

    // The conformal line only matters for annotation; relative tolerance 1e-12.
    if (std::abs(p.q - q_conf) <= 1e-12 * q_conf)
        r.sign_class = SignClass::Conformal;
    else if (p.q > q_conf)
        r.sign_class = SignClass::SuperConformal;
    else
        r.sign_class = SignClass::SubConformal;

    if (N <= 2 || p.q >= explicit_existence_q(N, p.lambda)) {
        r.existence = Existence::MinimizerGuaranteed;
        return r;
    }
    // N >= 3 below the explicit threshold; this forces lambda > 2N/(N-2),
    // where the layer-cake curve decides a strictly larger existence region.
    if (!use_qbar) {
        r.existence = Existence::RelaxedOnly;
        return r;
    }
    double qb = qbar_cached(N, p.lambda);
    double gate = std::max(qb, q_min);
    r.existence = (p.q > gate) ? Existence::MinimizerGuaranteed : Existence::OpenRegion;
    return r;
}

const char* to_string(Validity v) {
    return v == Validity::Valid ? "Valid" : "Invalid";
}

const char* to_string(SignClass s) {
    switch (s) {
        case SignClass::SubConformal: return "SubConformal";
        case SignClass::Conformal: return "Conformal";
        case SignClass::SuperConformal: return "SuperConformal";
        default: return "Degenerate";
    }
}

const char* to_string(Existence e) {
    switch (e) {
        case Existence::MinimizerGuaranteed: return "MinimizerGuaranteed";
        case Existence::RelaxedOnly: return "RelaxedOnly";
        case Existence::OpenRegion: return "OpenRegion";
        default: return "NotApplicable";
    }
}

}  // namespace rhls
