#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cbo/ensemble.hpp"
#include "cbo/errors.hpp"
#include "cbo/noise.hpp"

namespace cbo {

struct RunConfig {
    double beta = 1.0;
    NoiseScheme scheme;
    long max_steps = 10000;
    double consensus_tol = 1e-8;  // stop when the ensemble diameter falls below
    bool record_noise = false;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(beta > 0.0) || !std::isfinite(beta))
            throw ParameterError("beta must be positive and finite");
        if (max_steps < 1) throw ParameterError("max_steps must be >= 1");
        if (!(consensus_tol > 0.0))
            throw ParameterError("consensus_tol must be positive");
    }
};

/// Pre-update snapshot of step n plus the noise vector applied at step n
/// (noise empty for the final record or when recording is off).
struct StepRecord {
    long step = 0;
    std::vector<double> consensus;
    std::vector<double> mean;
    double diameter = 0.0;
    double spread = 0.0;
    std::vector<double> noise;
};

struct RunTrace {
    std::vector<StepRecord> records;
    bool has_noise = false;
};

struct RunResult {
    Ensemble final;
    bool consensus_reached = false;
    long steps_taken = 0;
    std::vector<double> limit_point;  // ensemble mean at termination
    RunTrace trace;
};

/// Synchronous update x <- x - (gamma + eta_l)(x - consensus_l), shared by
/// the live step and replay so both follow the same arithmetic.
inline void apply_update(Ensemble& e, std::span<const double> consensus,
                         double gamma, std::span<const double> eta) {
    const std::size_t d = e.dims();
    for (std::size_t i = 0; i < e.particles(); ++i) {
        auto xi = e.row(i);
        for (std::size_t l = 0; l < d; ++l)
            xi[l] -= (gamma + eta[l]) * (xi[l] - consensus[l]);
    }
    e.set_step(e.step() + 1);
}

/// One synchronous step of Eq.-style dynamics: the consensus point is
/// computed once from the pre-update ensemble and eta_n^l is shared across
/// particles (it carries no particle index).
inline Ensemble step(const Ensemble& e, const Objective& obj,
                     const RunConfig& config, const NoiseStream& stream) {
    config.validate();
    const ConsensusPoint cp = gibbs_consensus(e, obj, config.beta);
    std::vector<double> eta(e.dims());
    for (std::size_t l = 0; l < e.dims(); ++l)
        eta[l] = sample_eta(config.scheme, stream, e.step(), l);
    Ensemble out = e;
    apply_update(out, cp.point, config.scheme.gamma, eta);
    return out;
}

/// Iterates the update until the diameter reaches consensus_tol or
/// max_steps updates have been applied. The trace holds one record per
/// visited state (so steps_taken + 1 records).
inline RunResult run(const Ensemble& initial, const Objective& obj,
                     const RunConfig& config, std::uint32_t replica = 0) {
    config.validate();
    const NoiseStream stream{config.seed, replica};
    Ensemble cur = initial;
    RunResult result{cur};
    result.trace.has_noise = config.record_noise;
    std::vector<double> eta(cur.dims());
    for (;;) {
        EnsembleStats stats = ensemble_stats(cur);
        ConsensusPoint cp;
        try {
            cp = gibbs_consensus(cur, obj, config.beta);
        } catch (const Error& err) {
            throw EvaluationError(std::string(err.what()) + " at step " +
                                  std::to_string(cur.step()));
        }
        result.trace.records.push_back(
            {cur.step(), cp.point, stats.mean, stats.diameter, stats.spread, {}});
        if (stats.diameter <= config.consensus_tol) {
            result.consensus_reached = true;
            result.limit_point = std::move(stats.mean);
            break;
        }
        if (cur.step() - initial.step() >= config.max_steps) {
            result.consensus_reached = false;
            result.limit_point = std::move(stats.mean);
            break;
        }
        for (std::size_t l = 0; l < cur.dims(); ++l)
            eta[l] = sample_eta(config.scheme, stream, cur.step(), l);
        if (config.record_noise) result.trace.records.back().noise = eta;
        apply_update(cur, cp.point, config.scheme.gamma, eta);
    }
    result.steps_taken = cur.step() - initial.step();
    result.final = std::move(cur);
    return result;
}

/// Replays a recorded run and checks the closed-form pairwise identity
///   x^{i,l}_n - x^{j,l}_n = (x^{i,l}_0 - x^{j,l}_0) prod_{m<n} (1 - gamma - eta_m^l)
/// for every pair, step, and dimension. Returns the largest absolute
/// deviation between the simulated difference and the product form.
inline double replay_check(const RunTrace& trace, const Ensemble& initial,
                           const Objective& obj, const RunConfig& config) {
    if (!trace.has_noise)
        throw UsageError("replay_check needs a trace recorded with record_noise");
    const std::size_t n = initial.particles(), d = initial.dims();
    const double gamma = config.scheme.gamma;

    Ensemble cur = initial;
    std::vector<double> product(d, 1.0);
    double max_err = 0.0;
    const std::size_t updates =
        trace.records.empty() ? 0 : trace.records.size() - 1;

    for (std::size_t m = 0; m <= updates; ++m) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                for (std::size_t l = 0; l < d; ++l) {
                    const double sim = cur.at(i, l) - cur.at(j, l);
                    const double closed =
                        (initial.at(i, l) - initial.at(j, l)) * product[l];
                    max_err = std::max(max_err, std::abs(sim - closed));
                }
            }
        }
        if (m == updates) break;
        const auto& eta = trace.records[m].noise;
        if (eta.size() != d)
            throw UsageError("replay_check: missing noise record at step " +
                             std::to_string(trace.records[m].step));
        const ConsensusPoint cp = gibbs_consensus(cur, obj, config.beta);
        apply_update(cur, cp.point, gamma, eta);
        for (std::size_t l = 0; l < d; ++l)
            product[l] *= 1.0 - gamma - eta[l];
    }
    return max_err;
}

}  // namespace cbo
