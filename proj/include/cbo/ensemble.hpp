#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cbo/errors.hpp"
#include "cbo/objectives.hpp"

namespace cbo {

/// N particles in R^d at a step index. Row-major storage, one contiguous
/// row per particle (the update loop reads whole particles).
class Ensemble {
public:
    Ensemble(std::size_t particles, std::size_t dims, long step = 0)
        : n_(particles), d_(dims), step_(step), data_(particles * dims, 0.0) {
        if (n_ < 1 || d_ < 1)
            throw ParameterError("ensemble needs N >= 1 and d >= 1");
    }

    Ensemble(std::vector<double> data, std::size_t particles, std::size_t dims,
             long step = 0)
        : n_(particles), d_(dims), step_(step), data_(std::move(data)) {
        if (n_ < 1 || d_ < 1)
            throw ParameterError("ensemble needs N >= 1 and d >= 1");
        if (data_.size() != n_ * d_)
            throw ParameterError("ensemble data size does not match N x d");
        for (double v : data_)
            if (!std::isfinite(v))
                throw ParameterError("ensemble entries must be finite");
    }

    std::size_t particles() const { return n_; }
    std::size_t dims() const { return d_; }
    long step() const { return step_; }
    void set_step(long s) { step_ = s; }

    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * d_, d_};
    }
    std::span<double> row(std::size_t i) { return {data_.data() + i * d_, d_}; }
    double at(std::size_t i, std::size_t l) const { return data_[i * d_ + l]; }
    double& at(std::size_t i, std::size_t l) { return data_[i * d_ + l]; }
    std::span<const double> flat() const { return data_; }

private:
    std::size_t n_, d_;
    long step_;
    std::vector<double> data_;
};

/// Gibbs-weighted consensus point: weights are nonnegative and sum to 1,
/// and the point is the weights-weighted average of the particle rows.
struct ConsensusPoint {
    std::vector<double> point;
    std::vector<double> weights;
};

struct EnsembleStats {
    std::vector<double> mean;  // per-dimension ensemble average
    double diameter = 0.0;     // max pairwise Euclidean distance
    double spread = 0.0;       // (1/N) sum_i |X^i - mean|^2
};

/// Consensus point with weights proportional to
/// exp(-beta (L(X^j) - min_k L(X^k))); subtracting the minimum keeps the
/// exponents representable for any beta and leaves the ratios unchanged.
inline ConsensusPoint gibbs_consensus(const Ensemble& e, const Objective& obj,
                                      double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta))
        throw ParameterError("beta must be positive and finite");
    if (obj.dim != e.dims())
        throw ParameterError("objective dimension does not match ensemble");
    const std::size_t n = e.particles();

    std::vector<double> values(n);
    double min_value = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        values[i] = obj(e.row(i));
        if (!std::isfinite(values[i]))
            throw EvaluationError("objective non-finite at particle " +
                                  std::to_string(i));
        min_value = std::min(min_value, values[i]);
    }

    ConsensusPoint cp;
    cp.weights.resize(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cp.weights[i] = std::exp(-beta * (values[i] - min_value));
        sum += cp.weights[i];
    }
    if (!(sum > 0.0))  // unreachable after the shift unless values are non-finite
        throw EvaluationError("all Gibbs weights vanished");
    for (double& w : cp.weights) w /= sum;

    cp.point.assign(e.dims(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto xi = e.row(i);
        for (std::size_t l = 0; l < e.dims(); ++l)
            cp.point[l] += cp.weights[i] * xi[l];
    }
    // clamp to the coordinate-wise hull; the point lies inside it in real
    // arithmetic, rounding may spill by an ulp
    for (std::size_t l = 0; l < e.dims(); ++l) {
        double lo = e.at(0, l), hi = e.at(0, l);
        for (std::size_t i = 1; i < n; ++i) {
            lo = std::min(lo, e.at(i, l));
            hi = std::max(hi, e.at(i, l));
        }
        cp.point[l] = std::clamp(cp.point[l], lo, hi);
    }
    return cp;
}

inline EnsembleStats ensemble_stats(const Ensemble& e) {
    const std::size_t n = e.particles(), d = e.dims();
    EnsembleStats s;
    s.mean.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto xi = e.row(i);
        for (std::size_t l = 0; l < d; ++l) s.mean[l] += xi[l];
    }
    for (std::size_t l = 0; l < d; ++l) s.mean[l] /= static_cast<double>(n);

    for (std::size_t i = 0; i < n; ++i) {
        const auto xi = e.row(i);
        double dev = 0.0;
        for (std::size_t l = 0; l < d; ++l) {
            const double t = xi[l] - s.mean[l];
            dev += t * t;
        }
        s.spread += dev;
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto xj = e.row(j);
            double dist = 0.0;
            for (std::size_t l = 0; l < d; ++l) {
                const double t = xi[l] - xj[l];
                dist += t * t;
            }
            s.diameter = std::max(s.diameter, dist);
        }
    }
    s.diameter = std::sqrt(s.diameter);
    s.spread /= static_cast<double>(n);
    return s;
}

}  // namespace cbo
