#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cbo/dynamics.hpp"
#include "cbo/errors.hpp"
#include "cbo/initial_law.hpp"
#include "cbo/noise.hpp"
#include "cbo/objectives.hpp"
#include "cbo/parallel.hpp"

namespace cbo {

struct WellPreparedness {
    double value = 0.0;  // sum_l E max_i (x0^{i,l} - mean^l)^2
    double std_error = 0.0;
    std::size_t replicas = 0;
};

/// Monte-Carlo estimate of the well-preparedness statistic
/// sum_l E[max_i (x0^{i,l} - xbar0^l)^2] for N i.i.d. particles per replica.
inline WellPreparedness well_preparedness(const InitialLaw& law, std::size_t particles,
                                          std::size_t replicas, std::uint64_t seed,
                                          int threads = 1) {
    if (particles < 1) throw ParameterError("need at least one particle");
    if (replicas < 100) throw ParameterError("well_preparedness needs replicas >= 100");
    std::vector<double> slot(replicas, 0.0);
    parallel_for(replicas, resolve_threads(threads), [&](std::size_t r) {
        const Ensemble e =
            sample_ensemble(law, particles, seed, static_cast<std::uint32_t>(r));
        double stat = 0.0;
        for (std::size_t l = 0; l < law.dim; ++l) {
            double mean = 0.0;
            for (std::size_t i = 0; i < particles; ++i) mean += e.at(i, l);
            mean /= static_cast<double>(particles);
            double worst = 0.0;
            for (std::size_t i = 0; i < particles; ++i) {
                const double dev = e.at(i, l) - mean;
                worst = std::max(worst, dev * dev);
            }
            stat += worst;
        }
        slot[r] = stat;
    });
    double sum = 0.0, sumsq = 0.0;
    for (double v : slot) {
        sum += v;
        sumsq += v * v;
    }
    const double rc = static_cast<double>(replicas);
    const double mean = sum / rc;
    const double var = std::max(0.0, (sumsq - rc * mean * mean) / (rc - 1.0));
    return {mean, std::sqrt(var / rc), replicas};
}

struct LaplaceEstimate {
    double value = 0.0;  // -(1/beta) log (1/S) sum_s e^{-beta L(x_s)}
    double std_error = 0.0;
    double ess = 0.0;  // effective sample size (sum w)^2 / sum w^2
    bool low_ess = false;
};

/// Laplace-principle estimator with max-shift stabilization of the
/// log-mean-exp; flags importance concentration when ESS < 10.
inline LaplaceEstimate laplace_estimate(const Objective& obj, const InitialLaw& law,
                                        double beta, std::size_t samples,
                                        std::uint64_t seed, int threads = 1) {
    if (!(beta > 0.0) || !std::isfinite(beta))
        throw ParameterError("beta must be positive and finite");
    if (samples < 2) throw ParameterError("need at least 2 samples");
    if (law.dim != obj.dim) throw ParameterError("law/objective dimension mismatch");
    std::vector<double> a(samples);
    parallel_for(samples, resolve_threads(threads), [&](std::size_t s) {
        const auto x = sample_mc_point(law, seed, static_cast<std::uint32_t>(s));
        const double v = obj(x);
        if (!std::isfinite(v))
            throw EvaluationError("objective non-finite at a Laplace sample");
        a[s] = -beta * v;
    });
    const double shift = *std::max_element(a.begin(), a.end());
    double sum = 0.0, sumsq = 0.0;
    for (double& v : a) {
        v = std::exp(v - shift);
        sum += v;
        sumsq += v * v;
    }
    const double sc = static_cast<double>(samples);
    const double mean = sum / sc;
    const double var = std::max(0.0, (sumsq - sc * mean * mean) / (sc - 1.0));
    LaplaceEstimate est;
    est.value = -(shift + std::log(mean)) / beta;
    est.std_error = std::sqrt(var / sc) / (mean * beta);
    est.ess = sum * sum / sumsq;
    est.low_ess = est.ess < 10.0;
    return est;
}

struct CertificateResult {
    bool holds = false;  // lhs >= rhs
    double lhs = 0.0;    // (1 - eps) E e^{-beta L(X_in)}, scaled by e^{beta L_m}
    double rhs = 0.0;    // paper right-hand side under the same scaling
    double epsilon = 0.0;
    double bound_value = 0.0;  // explicit part of the resulting error bound
    double gibbs_mean = 0.0;   // estimate of E e^{-beta (L - L_m)}
    double gibbs_mean_se = 0.0;
    WellPreparedness well_prep;
};

namespace detail {

inline double theorem_coefficient(const Objective& obj, const NoiseScheme& s) {
    const double f = (1.0 - s.gamma) * (1.0 - s.gamma) + s.zeta * s.zeta;
    const double drive = s.gamma * s.gamma + s.zeta * s.zeta;
    const double rate = decay_rate(s);
    return 2.0 * (*obj.hessian_bound) * std::sqrt((1.0 + f) * drive) /
           (-std::expm1(-rate));
}

/// Mean of e^{-beta (L - L_m)} over S i.i.d. samples of the law; values are
/// bounded by ~1 so a plain mean is exact where the raw formula underflows.
inline void normalized_gibbs_mean(const Objective& obj, const InitialLaw& law,
                                  double beta, std::size_t samples,
                                  std::uint64_t seed, int threads, double& mean,
                                  double& se) {
    std::vector<double> w(samples);
    const double lm = *obj.min_value;
    parallel_for(samples, resolve_threads(threads), [&](std::size_t s) {
        const auto x = sample_mc_point(law, seed, static_cast<std::uint32_t>(s));
        const double v = obj(x);
        if (!std::isfinite(v))
            throw EvaluationError("objective non-finite at a certificate sample");
        w[s] = std::exp(-beta * (v - lm));
    });
    double sum = 0.0, sumsq = 0.0;
    for (double v : w) {
        sum += v;
        sumsq += v * v;
    }
    const double sc = static_cast<double>(samples);
    mean = sum / sc;
    const double var = std::max(0.0, (sumsq - sc * mean * mean) / (sc - 1.0));
    se = std::sqrt(var / sc);
}

inline void require_certificate_inputs(const Objective& obj, const InitialLaw& law,
                                       const NoiseScheme& scheme, double beta,
                                       double epsilon) {
    if (!obj.min_value || !obj.hessian_bound)
        throw UsageError("certificate needs min_value and hessian_bound metadata");
    if (law.dim != obj.dim) throw ParameterError("law/objective dimension mismatch");
    if (!(beta > 0.0) || !std::isfinite(beta))
        throw ParameterError("beta must be positive and finite");
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw ParameterError("epsilon must lie in (0, 1)");
    if (!(decay_rate(scheme) > 0.0))
        throw ParameterError("certificate needs (1-gamma)^2 + zeta^2 < 1");
}

}  // namespace detail

/// Checks the hypothesis inequality of the error theorem: both sides are
/// reported after multiplying by e^{beta L_m} (the factor cancels exactly
/// and the raw sides underflow for large beta). bound_value carries the
/// explicit (d/2) log(beta)/beta term of the resulting estimate; the
/// remaining E(beta) term is only O(1/beta) and is never materialized.
inline CertificateResult check_theorem_3_2(const Objective& obj, const InitialLaw& law,
                                           const NoiseScheme& scheme, double beta,
                                           double epsilon, std::size_t particles,
                                           std::size_t replicas, std::uint64_t seed,
                                           int threads = 1) {
    detail::require_certificate_inputs(obj, law, scheme, beta, epsilon);
    CertificateResult res;
    res.epsilon = epsilon;
    res.well_prep = well_preparedness(law, particles, replicas, seed, threads);
    detail::normalized_gibbs_mean(obj, law, beta, 100 * replicas, seed, threads,
                                  res.gibbs_mean, res.gibbs_mean_se);
    res.lhs = (1.0 - epsilon) * res.gibbs_mean;
    res.rhs = detail::theorem_coefficient(obj, scheme) * beta * res.well_prep.value;
    res.holds = res.lhs >= res.rhs;
    res.bound_value = 0.5 * static_cast<double>(obj.dim) * std::log(beta) / beta;
    return res;
}

struct SupEstimate {
    double max_found = 0.0;  // best value seen on the refinement grid
    double pad = 0.0;        // Lipschitz padding: sup <= max_found + pad
    double upper() const { return max_found + pad; }
};

/// sup of L over the support of the law by nested grid refinement. The
/// guarantee uses the level-0 spacing with a Lipschitz constant derived from
/// the Hessian bound and the support's distance to the minimizer (where the
/// gradient vanishes); refinement levels only sharpen the lower bound.
inline SupEstimate sup_on_support(const Objective& obj, const InitialLaw& law,
                                  int levels = 2) {
    if (!obj.hessian_bound || !obj.minimizer)
        throw UsageError("sup_on_support needs hessian_bound and minimizer metadata");
    const std::size_t d = law.dim;
    auto lo = law.rect_lower();
    auto hi = law.rect_upper();

    double far_sq = 0.0;
    for (std::size_t l = 0; l < d; ++l) {
        const double a = std::abs(lo[l] - (*obj.minimizer)[l]);
        const double b = std::abs(hi[l] - (*obj.minimizer)[l]);
        const double t = std::max(a, b);
        far_sq += t * t;
    }
    const double lipschitz = (*obj.hessian_bound) * std::sqrt(far_sq);

    std::size_t k = 2;
    while (std::pow(static_cast<double>(k + 1), static_cast<double>(d)) <= 32768.0)
        ++k;

    std::vector<double> x(d), best_x(d);
    std::vector<std::size_t> idx(d, 0);
    double pad0 = 0.0;
    SupEstimate est;
    est.max_found = -std::numeric_limits<double>::infinity();

    auto clamp_to_ball = [&](std::vector<double>& p) {
        if (law.kind != LawKind::UniformBall) return;
        double dist_sq = 0.0;
        for (std::size_t l = 0; l < d; ++l) {
            const double t = p[l] - law.center[l];
            dist_sq += t * t;
        }
        if (dist_sq <= law.radius * law.radius || dist_sq == 0.0) return;
        const double scale = law.radius / std::sqrt(dist_sq);
        for (std::size_t l = 0; l < d; ++l)
            p[l] = law.center[l] + scale * (p[l] - law.center[l]);
    };

    for (int level = 0; level < levels; ++level) {
        std::vector<double> span(d), step(d);
        double diag_sq = 0.0;
        for (std::size_t l = 0; l < d; ++l) {
            span[l] = hi[l] - lo[l];
            step[l] = span[l] / static_cast<double>(k);
            diag_sq += step[l] * step[l];
        }
        if (level == 0) pad0 = 0.5 * lipschitz * std::sqrt(diag_sq);

        std::fill(idx.begin(), idx.end(), 0);
        for (;;) {
            for (std::size_t l = 0; l < d; ++l)
                x[l] = lo[l] + step[l] * static_cast<double>(idx[l]);
            auto p = x;
            clamp_to_ball(p);
            const double v = obj(p);
            if (v > est.max_found) {
                est.max_found = v;
                best_x = p;
            }
            std::size_t l = 0;
            while (l < d && ++idx[l] > k) idx[l++] = 0;
            if (l == d) break;
        }
        // zoom into one cell around the best point
        for (std::size_t l = 0; l < d; ++l) {
            const double nl = std::max(lo[l], best_x[l] - step[l]);
            const double nh = std::min(hi[l], best_x[l] + step[l]);
            lo[l] = nl;
            hi[l] = nh;
        }
    }
    est.pad = pad0;
    return est;
}

struct TheoremA1Certificate {
    CertificateResult inequality;
    double sup_gap = 0.0;  // upper bound for sup_{support} L - L_m
    double delta = 0.0;
    bool sup_condition = false;  // sup_gap < delta
    bool holds = false;          // sup_condition && inequality.holds
};

/// Appendix-theorem certificate. The default inequality is the same
/// hypothesis as the main error theorem; the rectangle variant replaces the
/// well-preparedness sum by diam(R_in)^2 and carries the e^{beta sup_gap}
/// factor (evaluated through logarithms so large beta cannot overflow).
inline TheoremA1Certificate check_theorem_A1(const Objective& obj, const InitialLaw& law,
                                             const NoiseScheme& scheme, double beta,
                                             double epsilon, double delta,
                                             std::size_t particles, std::size_t replicas,
                                             std::uint64_t seed,
                                             bool rectangle_variant = false,
                                             int threads = 1) {
    detail::require_certificate_inputs(obj, law, scheme, beta, epsilon);
    if (!(delta > 0.0)) throw ParameterError("delta must be positive");
    if (!obj.minimizer) throw UsageError("certificate needs the minimizer metadata");
    if (!law.contains(*obj.minimizer))
        throw ParameterError("support of the initial law must contain the minimizer");

    TheoremA1Certificate cert;
    cert.delta = delta;
    const SupEstimate sup = sup_on_support(obj, law);
    cert.sup_gap = sup.upper() - *obj.min_value;
    cert.sup_condition = cert.sup_gap < delta;

    if (rectangle_variant) {
        CertificateResult& res = cert.inequality;
        res.epsilon = epsilon;
        res.lhs = 1.0 - epsilon;
        const double log_rhs = std::log(detail::theorem_coefficient(obj, scheme) *
                                        beta * law.rect_diameter_sq()) +
                               beta * cert.sup_gap;
        res.rhs = std::exp(log_rhs);
        res.holds = std::log(res.lhs) >= log_rhs;
        res.bound_value = delta + std::abs(std::log(epsilon)) / beta;
    } else {
        cert.inequality = check_theorem_3_2(obj, law, scheme, beta, epsilon,
                                            particles, replicas, seed, threads);
        cert.inequality.bound_value = delta + std::abs(std::log(epsilon)) / beta;
    }
    cert.holds = cert.sup_condition && cert.inequality.holds;
    return cert;
}

struct EmpiricalErrorReport {
    double min_L_at_limit = std::numeric_limits<double>::quiet_NaN();
    std::optional<double> bound_3_2;  // L(X*) + (d/2) log(beta)/beta
    std::optional<double> bound_A1;   // L_m + delta + |log eps|/beta
    std::size_t replicas = 0;
    std::size_t failed = 0;  // replicas that missed consensus_tol
    bool unreliable = false; // more than 10% failed
};

/// Runs independent CBO replicas from i.i.d. initial ensembles and reports
/// the smallest objective value at the limit points — the finite-sample
/// proxy for essinf L(X_inf) — next to the theorem bounds.
inline EmpiricalErrorReport empirical_error(const Objective& obj, const InitialLaw& law,
                                            const RunConfig& config, std::size_t particles,
                                            std::size_t replicas,
                                            std::optional<double> delta = std::nullopt,
                                            std::optional<double> epsilon = std::nullopt,
                                            int threads = 1) {
    if (replicas < 100) throw ParameterError("empirical_error needs replicas >= 100");
    if (!(decay_rate(config.scheme) > 0.0))
        throw ParameterError("empirical_error needs a stable scheme");
    if (law.dim != obj.dim) throw ParameterError("law/objective dimension mismatch");
    config.validate();

    struct Slot {
        double value = 0.0;
        bool ok = false;
    };
    std::vector<Slot> slots(replicas);
    parallel_for(replicas, resolve_threads(threads), [&](std::size_t r) {
        const Ensemble init =
            sample_ensemble(law, particles, config.seed, static_cast<std::uint32_t>(r));
        const RunResult res = run(init, obj, config, static_cast<std::uint32_t>(r));
        slots[r].ok = res.consensus_reached;
        slots[r].value = obj(res.limit_point);
    });

    EmpiricalErrorReport report;
    report.replicas = replicas;
    double best = std::numeric_limits<double>::infinity();
    for (const Slot& s : slots) {
        if (!s.ok) {
            ++report.failed;
            continue;
        }
        best = std::min(best, s.value);
    }
    if (report.failed < replicas) report.min_L_at_limit = best;
    report.unreliable =
        report.failed * 10 > replicas;  // > 10% missed consensus
    if (obj.min_value)
        report.bound_3_2 = *obj.min_value + 0.5 * static_cast<double>(obj.dim) *
                                                std::log(config.beta) / config.beta;
    if (delta && epsilon && obj.min_value)
        report.bound_A1 =
            *obj.min_value + *delta + std::abs(std::log(*epsilon)) / config.beta;
    return report;
}

}  // namespace cbo
