#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "ekm/motion.hpp"

namespace ekm {

/// Selected frame indices for a length-T sequence plus the RMS error of the
/// piecewise-linear reconstruction through those frames.
struct DownsamplePlan {
    std::size_t source_length = 0;
    std::vector<std::size_t> indices;
    double rms_error = 0.0;

    std::size_t target_length() const noexcept { return indices.size(); }
    /// Endpoints kept, strictly increasing, within [0, T-1].
    void validate() const;
};

enum class DownsampleMode { uniform, adaptive_greedy, adaptive_optimal };

std::string_view to_string(DownsampleMode mode) noexcept;
/// Accepts "uniform", "adaptive-greedy", "adaptive-optimal".
DownsampleMode parse_downsample_mode(std::string_view name);

inline constexpr std::size_t kDefaultOptimalCap = 512;

/// Evenly spaced indices round(i (T-1) / (L-1)); rms_error is left at 0.
DownsamplePlan uniform_plan(std::size_t source_length, std::size_t target_length);
/// Same indices with rms_error measured against `seq`.
DownsamplePlan uniform_plan(SeriesView seq, std::size_t target_length);
DownsamplePlan uniform_plan(const MotionSequence& seq, std::size_t target_length);

/// Top-down refinement: repeatedly keep the frame farthest (Euclidean norm in
/// pose space) from the current piecewise-linear reconstruction. Falls back to
/// the uniform plan when that reconstructs the sequence strictly better.
DownsamplePlan adaptive_plan_greedy(SeriesView seq, std::size_t target_length);
DownsamplePlan adaptive_plan_greedy(const MotionSequence& seq, std::size_t target_length);

/// Relative tolerance under which two plan costs count as tied, measured
/// against the cost of the two-frame plan.
inline constexpr double kOptimalTieTolerance = 1e-12;

/// Exact minimizer of the summed squared reconstruction residual over all
/// index sets containing both endpoints. Ties (see kOptimalTieTolerance) go
/// to the lexicographically smallest index list. Throws oversized_input when
/// T exceeds `cap`.
DownsamplePlan adaptive_plan_optimal(SeriesView seq, std::size_t target_length,
                                     std::size_t cap = kDefaultOptimalCap);
DownsamplePlan adaptive_plan_optimal(const MotionSequence& seq, std::size_t target_length,
                                     std::size_t cap = kDefaultOptimalCap);

DownsamplePlan make_plan(const MotionSequence& seq, std::size_t target_length, DownsampleMode mode,
                         std::size_t optimal_cap = kDefaultOptimalCap);

/// Sum over frames of the squared residual against the linear interpolation
/// through `indices`.
double reconstruction_sse(SeriesView seq, std::span<const std::size_t> indices);
/// sqrt(sse / (T * k)).
double reconstruction_rms(SeriesView seq, std::span<const std::size_t> indices);

/// Keeps the planned frames; timestamps become explicit.
MotionSequence apply_plan(const MotionSequence& seq, const DownsamplePlan& plan);

/// Length-T linear reconstruction. `seq` may be either the source sequence
/// (length T) or the reduced one produced by apply_plan (length L).
MotionSequence reconstruct_linear(const MotionSequence& seq, const DownsamplePlan& plan);

/// Fixed-length resampling: linear up-sampling when T < L, otherwise the
/// planner selected by `mode`.
MotionSequence resample_to_length(const MotionSequence& seq, std::size_t target_length,
                                  DownsampleMode mode = DownsampleMode::adaptive_greedy);

}  // namespace ekm
