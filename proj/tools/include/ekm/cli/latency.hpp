#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ekm/crossval.hpp"

namespace ekm::cli {

struct LatencyOptions {
    std::vector<KernelConfig> kernels;
    std::vector<std::size_t> lengths{10, 15, 20, 25, 30};
    std::size_t repetitions = 30;
    std::size_t warmup = 3;
    double C = 1.0;
    DownsampleMode mode = DownsampleMode::adaptive_greedy;
    std::string descriptor = "identity";
    /// Workers for training only; timed classification is single-threaded.
    std::size_t train_workers = 1;

    void validate() const;
};

struct LatencyRow {
    KernelConfig kernel;
    std::size_t length = 0;
    std::size_t train_size = 0;
    std::size_t repetitions = 0;
    double mean_ms = 0.0;
    double median_of_means_ms = 0.0;
    double min_ms = 0.0;
    bool low_confidence = false;  ///< fewer than 30 timed repetitions
};

/// Per (kernel, L): trains a one-vs-one model on the whole resampled set,
/// then times the classification of one sequence at a time (cross-kernel row
/// plus voting), cycling through the set. Repetitions visit the cells in
/// turn, so drift in machine speed spreads evenly over them. Rows are
/// kernel-major.
std::vector<LatencyRow> bench_latency(std::span<const MotionSequence> data, const LatencyOptions& opts);

/// Median over up to five consecutive groups of the per-group mean.
double median_of_means(std::span<const double> samples);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

void write_latency_csv(std::ostream& out, std::span<const LatencyRow> rows);

}  // namespace ekm::cli
