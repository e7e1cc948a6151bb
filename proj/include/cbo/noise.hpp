#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "cbo/errors.hpp"
#include "cbo/rng.hpp"

namespace cbo {

/// The generalized update is driven by an effective drift gamma and an
/// i.i.d. mean-zero noise eta with variance zeta^2. The three concrete
/// models map (lambda, sigma, h) onto (gamma, zeta):
///   Model A: gamma = lambda h,        zeta = sigma sqrt(h)
///   Model B: gamma = 1 - e^{-lambda h}, zeta = e^{-lambda h} sigma sqrt(h)
///   Model C: gamma = 1 - e^{-lambda h}, zeta = e^{-lambda h} sqrt(e^{sigma^2 h} - 1)
/// GenericGaussian exposes (gamma, zeta) directly for theorem-level tests.
enum class SchemeKind { GenericGaussian, ModelA, ModelB, ModelC };

inline const char* to_string(SchemeKind k) {
    switch (k) {
        case SchemeKind::GenericGaussian: return "generic";
        case SchemeKind::ModelA: return "A";
        case SchemeKind::ModelB: return "B";
        case SchemeKind::ModelC: return "C";
    }
    return "?";
}

struct ModelParams {
    double lambda = 0.0;
    double sigma = 0.0;
    double h = 0.0;
};

struct NoiseScheme {
    double gamma = 0.0;
    double zeta = 0.0;
    SchemeKind kind = SchemeKind::GenericGaussian;
    ModelParams params;  // meaningful when kind != GenericGaussian
};

inline NoiseScheme make_scheme(SchemeKind kind, double lambda, double sigma,
                               double h) {
    if (kind == SchemeKind::GenericGaussian)
        throw ParameterError("make_scheme: use generic_scheme for (gamma, zeta)");
    if (!(lambda > 0.0)) throw ParameterError("lambda must be positive");
    if (!(h > 0.0)) throw ParameterError("h must be positive");
    if (sigma < 0.0) throw ParameterError("sigma must be nonnegative");
    NoiseScheme s;
    s.kind = kind;
    s.params = {lambda, sigma, h};
    const double decay = std::exp(-lambda * h);
    switch (kind) {
        case SchemeKind::ModelA:
            s.gamma = lambda * h;
            s.zeta = sigma * std::sqrt(h);
            break;
        case SchemeKind::ModelB:
            s.gamma = -std::expm1(-lambda * h);
            s.zeta = decay * sigma * std::sqrt(h);
            break;
        case SchemeKind::ModelC:
            s.gamma = -std::expm1(-lambda * h);
            s.zeta = decay * std::sqrt(std::expm1(sigma * sigma * h));
            break;
        default:
            break;
    }
    return s;
}

inline NoiseScheme generic_scheme(double gamma, double zeta) {
    if (!std::isfinite(gamma)) throw ParameterError("gamma must be finite");
    if (!(zeta >= 0.0) || !std::isfinite(zeta))
        throw ParameterError("zeta must be finite and nonnegative");
    return NoiseScheme{gamma, zeta, SchemeKind::GenericGaussian, {}};
}

/// Reproducible i.i.d. noise source: every draw is addressed by
/// (seed, replica, step, dimension), so identical coordinates always give
/// identical values regardless of call order or threading.
struct NoiseStream {
    std::uint64_t seed = 0;
    std::uint32_t replica = 0;
};

/// One eta_n^l draw. Gaussian kinds return zeta * Z; Model C applies the
/// exact lognormal transform e^{-lambda h}(exp(-sigma^2 h/2 + sigma sqrt(h) Z) - 1),
/// which has mean 0 and variance zeta^2 but is not Gaussian.
inline double sample_eta(const NoiseScheme& scheme, const NoiseStream& stream,
                         long n, std::size_t l) {
    const double z = rng::normal(stream.seed, stream.replica,
                                 static_cast<std::uint32_t>(n),
                                 static_cast<std::uint32_t>(l),
                                 rng::Purpose::dynamics_noise);
    if (scheme.kind == SchemeKind::ModelC) {
        const double sigma = scheme.params.sigma, h = scheme.params.h;
        return std::exp(-scheme.params.lambda * h) *
               std::expm1(-0.5 * sigma * sigma * h + sigma * std::sqrt(h) * z);
    }
    return scheme.zeta * z;
}

/// 2 gamma - gamma^2 - zeta^2, the almost-sure contraction exponent.
/// Evaluated as 1 - ((1-gamma)^2 + zeta^2) so that positivity is exactly
/// equivalent to the L^2 stability condition in floating point.
inline double decay_rate(const NoiseScheme& s) {
    const double one_minus = 1.0 - s.gamma;
    return 1.0 - (one_minus * one_minus + s.zeta * s.zeta);
}

}  // namespace cbo
