#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cbo/errors.hpp"
#include "cbo/rng.hpp"

namespace cbo {

struct AssumptionFlags {
    bool c2 = true;            // objective is C^2 everywhere
    bool unique_min = true;    // exactly one global minimizer
    bool positive_min = true;  // min value > 0
};

/// Evaluatable map R^d -> R plus the metadata the error-estimate
/// machinery needs (global minimizer, minimum value, Hessian spectral-norm
/// bound). Metadata fields are optional; operations that need a field throw
/// UsageError when it is absent.
struct Objective {
    std::function<double(std::span<const double>)> evaluate;
    std::size_t dim = 0;
    std::optional<std::vector<double>> minimizer;
    std::optional<double> min_value;
    std::optional<double> hessian_bound;  // box-restricted for rastrigin/ackley
    AssumptionFlags flags;
    std::string name;

    double operator()(std::span<const double> x) const { return evaluate(x); }
};

namespace detail {

inline std::string point_to_string(std::span<const double> x) {
    std::ostringstream os;
    os.precision(17);
    os << "(";
    for (std::size_t l = 0; l < x.size(); ++l) os << (l ? ", " : "") << x[l];
    os << ")";
    return os.str();
}

}  // namespace detail

/// Benchmark suite. All builtins are shifted so the minimum value is 1 > 0
/// with a known unique global minimizer.
inline Objective builtin(std::string_view name, std::size_t dim) {
    if (dim < 1) throw ParameterError("objective dimension must be >= 1");
    Objective obj;
    obj.dim = dim;
    obj.name = std::string(name);
    if (name == "sphere_plus_one") {
        // L(x) = |x|^2 + 1
        obj.evaluate = [](std::span<const double> x) {
            double s = 0.0;
            for (double v : x) s += v * v;
            return s + 1.0;
        };
        obj.minimizer = std::vector<double>(dim, 0.0);
        obj.min_value = 1.0;
        obj.hessian_bound = 2.0;
    } else if (name == "quadratic_well") {
        // L(x) = sum_l a (x_l - m)^2 + 1 with a = 2, m = 0.5
        constexpr double a = 2.0, m = 0.5;
        obj.evaluate = [](std::span<const double> x) {
            double s = 0.0;
            for (double v : x) s += a * (v - m) * (v - m);
            return s + 1.0;
        };
        obj.minimizer = std::vector<double>(dim, m);
        obj.min_value = 1.0;
        obj.hessian_bound = 2.0 * a;
    } else if (name == "rastrigin_shifted") {
        // L(x) = 10 d + sum_l (x_l^2 - 10 cos(2 pi x_l)) + 1
        obj.evaluate = [dim](std::span<const double> x) {
            double s = 10.0 * static_cast<double>(dim);
            for (double v : x)
                s += v * v - 10.0 * std::cos(2.0 * std::numbers::pi * v);
            return s + 1.0;
        };
        obj.minimizer = std::vector<double>(dim, 0.0);
        obj.min_value = 1.0;
        // diagonal Hessian, per-coordinate |2 + 40 pi^2 cos(2 pi x)|;
        // global over any box since cos is bounded
        obj.hessian_bound = 2.0 + 40.0 * std::numbers::pi * std::numbers::pi;
    } else if (name == "ackley_shifted") {
        // standard Ackley + 1; not C^2 at the minimizer (the |x| term),
        // so c2=false and no Hessian bound: excluded from Laplace tests.
        obj.evaluate = [dim](std::span<const double> x) {
            double sq = 0.0, sc = 0.0;
            for (double v : x) {
                sq += v * v;
                sc += std::cos(2.0 * std::numbers::pi * v);
            }
            const double d = static_cast<double>(dim);
            return -20.0 * std::exp(-0.2 * std::sqrt(sq / d)) -
                   std::exp(sc / d) + 20.0 + std::numbers::e + 1.0;
        };
        obj.minimizer = std::vector<double>(dim, 0.0);
        obj.min_value = 1.0;
        obj.flags.c2 = false;
    } else {
        throw ParameterError("unknown builtin objective: " + std::string(name));
    }
    return obj;
}

/// Separable polynomial objective L(x) = sum_l p(x_l) with
/// p(t) = c[0] + c[1] t + ... + c[k] t^k. Metadata must be supplied by the
/// caller when known.
inline Objective polynomial_objective(std::vector<double> coeffs, std::size_t dim) {
    if (dim < 1) throw ParameterError("objective dimension must be >= 1");
    if (coeffs.empty()) throw ParameterError("polynomial needs at least one coefficient");
    Objective obj;
    obj.dim = dim;
    obj.name = "polynomial";
    obj.flags.unique_min = false;  // unknown in general
    obj.evaluate = [c = std::move(coeffs)](std::span<const double> x) {
        double s = 0.0;
        for (double v : x) {
            double p = 0.0;
            for (std::size_t k = c.size(); k-- > 0;) p = p * v + c[k];
            s += p;
        }
        return s;
    };
    return obj;
}

namespace detail {

/// Central-difference Hessian at x, spectral norm via Jacobi eigenvalues.
inline double fd_hessian_spectral_norm(const Objective& obj,
                                       std::span<const double> x) {
    const std::size_t d = obj.dim;
    std::vector<double> h(d);
    for (std::size_t i = 0; i < d; ++i)
        h[i] = 1e-4 * std::max(1.0, std::abs(x[i]));
    std::vector<double> H(d * d, 0.0);
    std::vector<double> p(x.begin(), x.end());
    const double f0 = obj(p);
    for (std::size_t i = 0; i < d; ++i) {
        p[i] = x[i] + h[i];
        const double fp = obj(p);
        p[i] = x[i] - h[i];
        const double fm = obj(p);
        p[i] = x[i];
        H[i * d + i] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
    }
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) {
            p[i] = x[i] + h[i]; p[j] = x[j] + h[j];
            const double fpp = obj(p);
            p[j] = x[j] - h[j];
            const double fpm = obj(p);
            p[i] = x[i] - h[i]; p[j] = x[j] + h[j];
            const double fmp = obj(p);
            p[j] = x[j] - h[j];
            const double fmm = obj(p);
            p[i] = x[i]; p[j] = x[j];
            const double v = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
            H[i * d + j] = H[j * d + i] = v;
        }
    }
    // cyclic Jacobi; d is small here
    for (int sweep = 0; sweep < 50; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i + 1; j < d; ++j) off += H[i * d + j] * H[i * d + j];
        if (off < 1e-22) break;
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = i + 1; j < d; ++j) {
                const double a = H[i * d + i], b = H[j * d + j], g = H[i * d + j];
                if (g == 0.0) continue;
                const double theta = 0.5 * std::atan2(2.0 * g, b - a);
                const double c = std::cos(theta), s = std::sin(theta);
                for (std::size_t k = 0; k < d; ++k) {
                    const double hik = H[i * d + k], hjk = H[j * d + k];
                    H[i * d + k] = c * hik - s * hjk;
                    H[j * d + k] = s * hik + c * hjk;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    const double hki = H[k * d + i], hkj = H[k * d + j];
                    H[k * d + i] = c * hki - s * hkj;
                    H[k * d + j] = s * hki + c * hkj;
                }
            }
        }
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < d; ++i) norm = std::max(norm, std::abs(H[i * d + i]));
    return norm;
}

}  // namespace detail

struct ValidationReport {
    std::size_t trials = 0;
    double worst_value = 0.0;        // smallest objective value seen
    double max_hessian_norm = 0.0;   // 0 when no hessian_bound metadata
};

/// Random-search check of declared metadata inside [lower, upper]:
/// no sampled point may undercut min_value by more than 1e-9, and the
/// finite-difference Hessian norm at sampled points must stay within
/// hessian_bound * (1 + 1e-3). Throws MetadataError naming the offending
/// point.
inline ValidationReport validate_metadata(const Objective& obj,
                                          std::size_t trials,
                                          std::span<const double> lower,
                                          std::span<const double> upper,
                                          std::uint64_t seed = 0,
                                          std::size_t hessian_trials = 64) {
    if (!obj.min_value) throw UsageError("validate_metadata: objective has no min_value");
    if (lower.size() != obj.dim || upper.size() != obj.dim)
        throw ParameterError("validate_metadata: box dimension mismatch");
    if (obj.minimizer) {
        const double at_min = obj(*obj.minimizer);
        if (std::abs(at_min - *obj.min_value) > 1e-10)
            throw MetadataError("objective \"" + obj.name +
                                "\": evaluate(minimizer) = " + std::to_string(at_min) +
                                " does not match min_value");
    }
    ValidationReport report;
    report.trials = trials;
    report.worst_value = std::numeric_limits<double>::infinity();
    std::vector<double> x(obj.dim);
    for (std::size_t t = 0; t < trials; ++t) {
        for (std::size_t l = 0; l < obj.dim; ++l) {
            const double u = rng::uniform(seed, static_cast<std::uint32_t>(t), 0,
                                          static_cast<std::uint32_t>(l),
                                          rng::Purpose::search_point);
            x[l] = lower[l] + (upper[l] - lower[l]) * u;
        }
        const double v = obj(x);
        if (!std::isfinite(v))
            throw EvaluationError("objective \"" + obj.name +
                                  "\" non-finite at " + detail::point_to_string(x));
        report.worst_value = std::min(report.worst_value, v);
        if (v < *obj.min_value - 1e-9)
            throw MetadataError("objective \"" + obj.name + "\": value " +
                                std::to_string(v) + " below declared minimum at " +
                                detail::point_to_string(x));
        if (obj.hessian_bound && t < hessian_trials) {
            const double hn = detail::fd_hessian_spectral_norm(obj, x);
            report.max_hessian_norm = std::max(report.max_hessian_norm, hn);
            if (hn > *obj.hessian_bound * (1.0 + 1e-3))
                throw MetadataError("objective \"" + obj.name +
                                    "\": Hessian norm " + std::to_string(hn) +
                                    " exceeds declared bound at " +
                                    detail::point_to_string(x));
        }
    }
    return report;
}

}  // namespace cbo
