#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cbo/dynamics.hpp"
#include "cbo/ensemble.hpp"
#include "cbo/errors.hpp"
#include "cbo/noise.hpp"
#include "cbo/parallel.hpp"

namespace cbo {

struct ModelCondition {
    std::string text;
    bool holds = false;
    double lhs = 0.0;
    double rhs = 0.0;
};

struct StabilityReport {
    bool mean_consensus = false;  // |1 - gamma| < 1
    bool l2_consensus = false;    // (1 - gamma)^2 + zeta^2 < 1
    bool boundary = false;        // exactly on a stability boundary
    double rate = 0.0;            // 2 gamma - gamma^2 - zeta^2
    std::optional<ModelCondition> model_condition;
};

/// h_max of the Model A stability region; 0 when lambda <= sigma^2/2
/// (empty region).
inline double stability_boundary_modelA(double lambda, double sigma) {
    if (!(lambda > 0.0)) throw ParameterError("lambda must be positive");
    if (sigma < 0.0) throw ParameterError("sigma must be nonnegative");
    if (lambda <= 0.5 * sigma * sigma) return 0.0;
    return (2.0 * lambda - sigma * sigma) / (lambda * lambda);
}

/// Model B is stable for every h > 0 once lambda >= sigma^2/2, via
/// e^{2 lambda h} > 1 + 2 lambda h >= 1 + sigma^2 h.
inline bool check_modelB_unconditional(double lambda, double sigma) {
    return lambda >= 0.5 * sigma * sigma;
}

/// Strict inequalities throughout; a value sitting exactly on a boundary
/// reports not-stable with the boundary flag set (rate 0 gives no decay).
inline StabilityReport check_stability(const NoiseScheme& s) {
    StabilityReport r;
    r.rate = decay_rate(s);
    r.mean_consensus = std::abs(1.0 - s.gamma) < 1.0;
    r.l2_consensus = r.rate > 0.0;
    r.boundary = (r.rate == 0.0) || (std::abs(1.0 - s.gamma) == 1.0);
    const double lambda = s.params.lambda, sigma = s.params.sigma, h = s.params.h;
    switch (s.kind) {
        case SchemeKind::ModelA: {
            const double h_max = stability_boundary_modelA(lambda, sigma);
            r.model_condition = ModelCondition{
                "lambda > sigma^2/2 and h < (2*lambda - sigma^2)/lambda^2",
                lambda > 0.5 * sigma * sigma && h < h_max, h, h_max};
            break;
        }
        case SchemeKind::ModelB: {
            const double lhs = (1.0 + sigma * sigma * h) * std::exp(-2.0 * lambda * h);
            r.model_condition =
                ModelCondition{"(1 + sigma^2 h) e^{-2 lambda h} < 1", lhs < 1.0, lhs, 1.0};
            break;
        }
        case SchemeKind::ModelC: {
            r.model_condition = ModelCondition{"lambda > sigma^2/2 (any h > 0)",
                                               lambda > 0.5 * sigma * sigma, lambda,
                                               0.5 * sigma * sigma};
            break;
        }
        case SchemeKind::GenericGaussian:
            break;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Monte-Carlo estimators backing the empirical stability checks.

/// E (1 - gamma - eta)^4, exact for each noise kind (Gaussian moments, or
/// lognormal moments for Model C).
inline double fourth_moment_factor(const NoiseScheme& s) {
    if (s.kind == SchemeKind::ModelC) {
        const double a = s.params.sigma * s.params.sigma * s.params.h;
        // 1 - gamma - eta = e^{-lambda h} (2 - X), X ~ Lognormal with E X^j = e^{a j(j-1)/2}
        const double m2 = std::exp(a), m3 = std::exp(3.0 * a), m4 = std::exp(6.0 * a);
        const double e = std::exp(-s.params.lambda * s.params.h);
        return e * e * e * e * (-16.0 + 24.0 * m2 - 8.0 * m3 + m4);
    }
    const double g1 = 1.0 - s.gamma, z2 = s.zeta * s.zeta;
    return g1 * g1 * g1 * g1 + 6.0 * g1 * g1 * z2 + 3.0 * z2 * z2;
}

struct MomentRow {
    long n = 0;
    double emp_diff = 0.0;     // replica average of x^1_n - x^2_n
    double theory_diff = 0.0;  // (1-gamma)^n * initial difference
    double se_diff = 0.0;      // exact standard error of the replica average
    double emp_diff2 = 0.0;
    double theory_diff2 = 0.0;  // ((1-gamma)^2 + zeta^2)^n * initial^2
    double se_diff2 = 0.0;
};

/// Runs `replicas` independent two-particle, one-dimensional CBO runs with
/// the full update (Gibbs consensus each step) from the fixed pair
/// (x0_hi, x0_lo) and tabulates the pairwise-difference moments against the
/// closed-form laws. Standard errors come from the exact moment formulas,
/// not the sample, because products of step factors are heavy-tailed enough
/// to starve a sample estimate at large n.
inline std::vector<MomentRow> pair_moment_table(
    const NoiseScheme& scheme, const Objective& objective, double beta,
    long n_max, std::size_t replicas, std::uint64_t seed, int threads = 1,
    double x0_hi = 1.0, double x0_lo = 0.0) {
    if (objective.dim != 1)
        throw ParameterError("pair_moment_table needs a 1-d objective");
    if (n_max < 1) throw ParameterError("n_max must be >= 1");
    if (replicas < 2) throw ParameterError("need at least 2 replicas");

    const std::size_t steps = static_cast<std::size_t>(n_max);
    std::vector<double> sum_diff(steps + 1, 0.0), sum_diff2(steps + 1, 0.0);
    std::vector<std::vector<double>> slots(replicas);

    RunConfig config;
    config.beta = beta;
    config.scheme = scheme;
    config.max_steps = n_max;
    config.consensus_tol = 1e-300;  // run the full horizon
    config.seed = seed;

    parallel_for(replicas, resolve_threads(threads), [&](std::size_t r) {
        Ensemble e({x0_hi, x0_lo}, 2, 1);
        const NoiseStream stream{seed, static_cast<std::uint32_t>(r)};
        std::vector<double> diffs(steps + 1);
        diffs[0] = e.at(0, 0) - e.at(1, 0);
        for (std::size_t n = 0; n < steps; ++n) {
            const ConsensusPoint cp = gibbs_consensus(e, objective, beta);
            const double eta = sample_eta(scheme, stream, e.step(), 0);
            apply_update(e, cp.point, scheme.gamma, std::span<const double>(&eta, 1));
            diffs[n + 1] = e.at(0, 0) - e.at(1, 0);
        }
        slots[r] = std::move(diffs);
    });
    for (const auto& diffs : slots)
        for (std::size_t n = 0; n <= steps; ++n) {
            sum_diff[n] += diffs[n];
            sum_diff2[n] += diffs[n] * diffs[n];
        }

    const double d0 = x0_hi - x0_lo;
    const double f1 = 1.0 - scheme.gamma;
    const double f2 = f1 * f1 + scheme.zeta * scheme.zeta;
    const double f4 = fourth_moment_factor(scheme);
    const double rcount = static_cast<double>(replicas);
    std::vector<MomentRow> rows(steps + 1);
    for (std::size_t n = 0; n <= steps; ++n) {
        MomentRow& row = rows[n];
        row.n = static_cast<long>(n);
        row.emp_diff = sum_diff[n] / rcount;
        row.emp_diff2 = sum_diff2[n] / rcount;
        row.theory_diff = d0 * std::pow(f1, static_cast<double>(n));
        row.theory_diff2 = d0 * d0 * std::pow(f2, static_cast<double>(n));
        const double var1 = d0 * d0 * (std::pow(f2, static_cast<double>(n)) -
                                       std::pow(f1 * f1, static_cast<double>(n)));
        const double var2 =
            d0 * d0 * d0 * d0 * (std::pow(f4, static_cast<double>(n)) -
                                 std::pow(f2 * f2, static_cast<double>(n)));
        row.se_diff = std::sqrt(std::max(0.0, var1) / rcount);
        row.se_diff2 = std::sqrt(std::max(0.0, var2) / rcount);
    }
    return rows;
}

struct ContractionEstimate {
    double factor = 0.0;  // estimated per-step L^2 contraction factor
    double slope = 0.0;   // regression slope of log moments over the window
    double slope_se = 0.0;
    long window_lo = 0;
    long window_hi = 0;
};

/// L^2 contraction factor of the pairwise-difference process. The moment
/// curve E|x^1_n - x^2_n|^2 is estimated as the running product of per-step
/// replica means of (1 - gamma - eta_m)^2 (exactly unbiased, variance linear
/// in n; a plain replica average of the product is tail-starved near the
/// stability boundary), then the factor is the least-squares slope of the
/// log curve over [window_lo, window_hi].
inline ContractionEstimate estimate_contraction(const NoiseScheme& scheme,
                                                long n_max, std::size_t replicas,
                                                long window_lo, long window_hi,
                                                std::uint64_t seed,
                                                int threads = 1) {
    if (!(0 <= window_lo && window_lo < window_hi && window_hi <= n_max))
        throw ParameterError("bad regression window");
    const std::size_t steps = static_cast<std::size_t>(n_max);
    std::vector<double> mean_sq(steps, 0.0), var_sq(steps, 0.0);
    std::vector<std::vector<double>> slots(replicas);
    parallel_for(replicas, resolve_threads(threads), [&](std::size_t r) {
        const NoiseStream stream{seed, static_cast<std::uint32_t>(r)};
        std::vector<double> sq(steps);
        for (std::size_t m = 0; m < steps; ++m) {
            const double f = 1.0 - scheme.gamma -
                             sample_eta(scheme, stream, static_cast<long>(m), 0);
            sq[m] = f * f;
        }
        slots[r] = std::move(sq);
    });
    const double rc = static_cast<double>(replicas);
    for (const auto& sq : slots)
        for (std::size_t m = 0; m < steps; ++m) mean_sq[m] += sq[m];
    for (std::size_t m = 0; m < steps; ++m) mean_sq[m] /= rc;
    for (const auto& sq : slots)
        for (std::size_t m = 0; m < steps; ++m) {
            const double dev = sq[m] - mean_sq[m];
            var_sq[m] += dev * dev;
        }
    for (std::size_t m = 0; m < steps; ++m) var_sq[m] /= rc * (rc - 1.0);

    // log M_n = sum_{m<n} log mean_sq[m]
    std::vector<double> logM(steps + 1, 0.0);
    for (std::size_t m = 0; m < steps; ++m)
        logM[m + 1] = logM[m] + std::log(mean_sq[m]);

    const long count = window_hi - window_lo + 1;
    double xbar = 0.0;
    for (long n = window_lo; n <= window_hi; ++n) xbar += static_cast<double>(n);
    xbar /= static_cast<double>(count);
    double sxx = 0.0, sxy = 0.0;
    for (long n = window_lo; n <= window_hi; ++n) {
        const double x = static_cast<double>(n) - xbar;
        sxx += x * x;
        sxy += x * logM[static_cast<std::size_t>(n)];
    }
    const double slope = sxy / sxx;

    // slope = sum_m eps_m * c_m with c_m = sum_{n in window, n > m} x_n / sxx
    double slope_var = 0.0;
    for (std::size_t m = 0; m < steps; ++m) {
        double c = 0.0;
        for (long n = std::max<long>(window_lo, static_cast<long>(m) + 1);
             n <= window_hi; ++n)
            c += (static_cast<double>(n) - xbar) / sxx;
        const double log_se2 = var_sq[m] / (mean_sq[m] * mean_sq[m]);
        slope_var += c * c * log_se2;
    }

    ContractionEstimate est;
    est.slope = slope;
    est.factor = std::exp(slope);
    est.slope_se = std::sqrt(slope_var);
    est.window_lo = window_lo;
    est.window_hi = window_hi;
    return est;
}

struct SllnStat {
    double value = 0.0;  // Y_n = (1/n) sum_{m<n} (gamma + eta_m)(2 - gamma - eta_m)
    double std_error = 0.0;
};

/// Path average whose almost-sure limit is the decay rate 2g - g^2 - z^2.
inline SllnStat slln_path_average(const NoiseScheme& scheme, long n,
                                  const NoiseStream& stream) {
    if (n < 2) throw ParameterError("n must be >= 2");
    double sum = 0.0, sumsq = 0.0;
    for (long m = 0; m < n; ++m) {
        const double eta = sample_eta(scheme, stream, m, 0);
        const double term = (scheme.gamma + eta) * (2.0 - scheme.gamma - eta);
        sum += term;
        sumsq += term * term;
    }
    const double nn = static_cast<double>(n);
    const double mean = sum / nn;
    const double var = std::max(0.0, (sumsq - nn * mean * mean) / (nn - 1.0));
    return {mean, std::sqrt(var / nn)};
}

}  // namespace cbo
