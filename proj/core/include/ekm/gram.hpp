#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "ekm/kernels.hpp"
#include "ekm/motion.hpp"

namespace ekm {

/// Dense row-major kernel matrix with its provenance. Square when built by
/// gram(), rectangular (test x train) when built by gram_cross().
struct KernelMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;
    KernelId kernel_id = KernelId::rdtw;
    KernelParams params;
    std::optional<NormBounds> norm_bounds;

    double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
    double& operator()(std::size_t i, std::size_t j) { return values[i * cols + j]; }
    bool square() const noexcept { return rows == cols; }
};

/// Symmetric training Gram matrix.
using GramMatrix = KernelMatrix;

/// Square matrix of log kernel values (unnormalized). Upper triangle is
/// computed and mirrored; `workers` threads split the work and the result is
/// independent of the worker count.
KernelMatrix log_gram(std::span<const SeriesView> seqs, KernelId id, const KernelParams& params,
                      std::size_t workers = 1);

/// Training Gram. For rdtw_normalized the bounds are taken from this set.
GramMatrix gram(std::span<const SeriesView> seqs, KernelId id, const KernelParams& params,
                std::size_t workers = 1);
GramMatrix gram(std::span<const MotionSequence> seqs, KernelId id, const KernelParams& params,
                std::size_t workers = 1);

/// Maps a raw rdtw Gram onto [1, e^alpha] using its own log extremes.
GramMatrix normalize_kernel(const GramMatrix& raw);

/// Same as normalize_kernel but from log values, so entries that would
/// underflow as doubles stay usable.
GramMatrix normalize_log_gram(const KernelMatrix& log_values);

/// Extremes of a square log-kernel matrix (diagonal included).
NormBounds capture_bounds(const KernelMatrix& log_values);

/// Entry (i, j) = kernel(test_i, train_j). The normalized kernel reuses the
/// training bounds, which are required.
KernelMatrix gram_cross(std::span<const SeriesView> test, std::span<const SeriesView> train,
                        KernelId id, const KernelParams& params,
                        std::optional<NormBounds> norm_bounds = {}, std::size_t workers = 1);
KernelMatrix gram_cross(std::span<const MotionSequence> test, std::span<const MotionSequence> train,
                        KernelId id, const KernelParams& params,
                        std::optional<NormBounds> norm_bounds = {}, std::size_t workers = 1);

/// Turns a block of log values into kernel values for `id`.
KernelMatrix exponentiate(const KernelMatrix& log_values, KernelId id,
                          std::optional<NormBounds> norm_bounds);

/// Binary layout: 8-byte magic "EKMGRAM1", little-endian uint64 header size,
/// UTF-8 JSON header, then rows*cols little-endian float64 row-major.
void write_kernel_binary(std::ostream& out, const KernelMatrix& m);
KernelMatrix read_kernel_binary(std::istream& in);
void save_kernel_binary(const std::filesystem::path& path, const KernelMatrix& m);
KernelMatrix load_kernel_binary(const std::filesystem::path& path);

/// Plain CSV, one row per matrix row, 17 significant digits.
void write_kernel_csv(std::ostream& out, const KernelMatrix& m);

std::vector<SeriesView> views_of(std::span<const MotionSequence> seqs);

}  // namespace ekm
