#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "commute/errors.hpp"

namespace commute::stats {

/// Spatial weights, row-major n x n, zero diagonal.
struct WeightsMatrix {
    int n = 0;
    std::vector<double> weights; // n*n
    std::string spec_label;
    std::vector<bool> isolated; // rows with no nonzero entry

    double at(int i, int j) const { return weights[static_cast<size_t>(i) * n + j]; }
    double& at(int i, int j) { return weights[static_cast<size_t>(i) * n + j]; }
};

struct DiagnosticResult {
    double statistic = 0.0;
    double p_value = 0.0;
    std::string method;
    std::string detail;
};

/// Inverse standard normal CDF (rational approximation refined to near
/// machine precision).
double normal_quantile(double p);

/// Correlation between the order statistics and normal scores at Blom
/// plotting positions (i - 3/8) / (n + 1/4). p_value is read off the
/// published critical-value curves: below the 1% point the detail reads
/// "<0.010", above the 10% point ">0.100", in between it is interpolated.
/// Throws InsufficientDataError (n < 4) or DegenerateError (constant input).
DiagnosticResult ryan_joiner(std::span<const double> values);

/// Deterministic weights from planar coordinates.
/// Specs: "knn:K"  and  "inverse-distance:band=B", either with an
/// optional ":row" suffix requesting row standardization.
/// Coincident points under inverse distance get a capped weight and a
/// flag in spec_label. Throws ConfigError for an unknown spec.
WeightsMatrix build_weights(std::span<const std::pair<double, double>> coords,
                            const std::string& spec);

/// Closed-form I = (n/S0) * sum_ij w_ij z_i z_j / sum_i z_i^2.
double morans_i_statistic(std::span<const double> values, const WeightsMatrix& w);

/// Two-sided permutation test around the null expectation -1/(n-1).
/// Permutation k is generated from (seed, k) alone, so results are
/// bit-identical regardless of execution order; the parallel kernel and
/// the serial reference return the same bytes.
DiagnosticResult morans_i(std::span<const double> values, const WeightsMatrix& w,
                          int permutations, std::uint64_t seed);

/// Serial reference implementation of the same test, kept for testing
/// and benchmarking against the parallel kernel.
DiagnosticResult morans_i_serial(std::span<const double> values, const WeightsMatrix& w,
                                 int permutations, std::uint64_t seed);

nlohmann::json diagnostic_json(const DiagnosticResult& r);

} // namespace commute::stats
