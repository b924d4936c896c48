#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

#include "ekm/motion.hpp"

namespace ekm {

enum class KernelId { euclid_rbf, dtw_rbf, rdtw, rdtw_normalized };

std::string_view to_string(KernelId id) noexcept;
KernelId parse_kernel_id(std::string_view name);

/// Kernel hyperparameters. `nu` is the stiffness of the local Gaussian
/// factors e^{-nu d^2}; an RBF written with a bandwidth sigma uses
/// nu = 1 / (2 sigma^2).
struct KernelParams {
    double nu = 1.0;
    /// Sakoe-Chiba band |p - q| <= radius; unset means unconstrained.
    std::optional<std::size_t> corridor_radius;
    /// Exponent scale of the normalized rdtw kernel.
    double alpha = 1.0;

    void validate() const;
    bool operator==(const KernelParams&) const = default;
};

/// Squared Euclidean distance between two poses.
double euclidean_sq(std::span<const double> a, std::span<const double> b);

/// DTW with squared Euclidean local cost. Lengths may differ. Returns +inf
/// when the corridor admits no alignment path.
double dtw_distance(SeriesView x, SeriesView y, std::optional<std::size_t> corridor_radius = {});

/// exp(-nu * dtw_distance).
double dtw_rbf(SeriesView x, SeriesView y, const KernelParams& params);

/// exp(-nu * sum_t |x(t) - y(t)|^2); requires equal lengths.
double euclid_rbf_kernel(SeriesView x, SeriesView y, const KernelParams& params);

/// Regularized DTW kernel K^xy + K^xx for equal-length sequences.
double rdtw_kernel(SeriesView x, SeriesView y, const KernelParams& params);

/// log of rdtw_kernel. Falls back to log-sum-exp accumulation when a table
/// cell drops below 1e-300, so the result stays finite where the direct
/// value would underflow.
double rdtw_log_kernel(SeriesView x, SeriesView y, const KernelParams& params);

/// Training-set extremes of log K used by the normalized rdtw kernel.
struct NormBounds {
    double log_min = 0.0;
    double log_max = 0.0;

    /// exp(alpha * (log_k - log_min) / (log_max - log_min)); not clamped.
    double apply(double log_k, double alpha) const;
    bool operator==(const NormBounds&) const = default;
};

/// Unnormalized evaluation for `id`, in log space. For rdtw_normalized this
/// is the raw rdtw log value the normalization is applied to.
double log_kernel(KernelId id, SeriesView x, SeriesView y, const KernelParams& params);

}  // namespace ekm
