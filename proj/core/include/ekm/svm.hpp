#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ekm/gram.hpp"

namespace ekm {

struct SmoOptions {
    double C = 1.0;
    /// Stop once the maximal KKT violation m(a) - M(a) drops below tol.
    double tol = 1e-3;
    /// Budget of kernel-matrix lookups before giving up (2n per iteration).
    std::uint64_t max_kernel_lookups = 10'000'000;

    void validate() const;
};

/// Soft-margin dual solution of one binary problem. Indices refer to rows of
/// the Gram matrix the problem was trained on.
struct BinaryDual {
    std::vector<std::size_t> support_indices;
    std::vector<double> alphas;
    std::vector<int> labels;
    double bias = 0.0;
    double C = 1.0;
    bool converged = false;
    std::uint64_t iterations = 0;

    /// sum_i alpha_i y_i K(x, x_i) + bias, where `kernel_row[r]` is the kernel
    /// against Gram row r.
    double decision(std::span<const double> kernel_row) const;
};

/// Trains on every row of `gram`; labels are +1 / -1.
BinaryDual train_binary(const GramMatrix& gram, std::span<const int> labels, const SmoOptions& opts);

/// Trains on the sub-problem formed by `rows` (labels aligned with rows).
/// Support indices are reported as Gram rows, not positions in `rows`.
BinaryDual train_binary(const GramMatrix& gram, std::span<const std::size_t> rows,
                        std::span<const int> labels, const SmoOptions& opts);

/// sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij over the support set.
double dual_objective(const GramMatrix& gram, const BinaryDual& dual);

struct PairwiseModel {
    std::size_t positive = 0;  ///< index into class_labels, label +1
    std::size_t negative = 0;  ///< index into class_labels, label -1
    BinaryDual dual;
};

struct ModelProvenance {
    KernelId kernel_id = KernelId::rdtw_normalized;
    KernelParams params;
    std::optional<NormBounds> norm_bounds;
    std::size_t train_size = 0;

    bool operator==(const ModelProvenance&) const = default;
};

/// One-vs-one ensemble: one binary model per unordered class pair.
struct SvmModel {
    std::vector<std::string> class_labels;
    std::vector<PairwiseModel> pairwise;
    ModelProvenance provenance;
    double C = 1.0;

    bool converged() const;
};

/// Classes are ordered lexicographically; pair (a, b) with a < b treats a as +1.
SvmModel train_one_vs_one(const GramMatrix& gram, std::span<const std::string> labels,
                          const SmoOptions& opts);

struct Prediction {
    std::vector<std::string> labels;
    /// Per test row, one decision value per pairwise model.
    std::vector<std::vector<double>> decision_values;
    /// Per test row, votes per class.
    std::vector<std::vector<std::size_t>> votes;
};

/// Majority vote; ties go to the larger summed |decision| over won contests,
/// then to the earlier class. Refuses matrices whose provenance differs from
/// the model's.
Prediction predict(const SvmModel& model, const KernelMatrix& cross);

double accuracy(std::span<const std::string> predicted, std::span<const std::string> truth);

std::string model_to_json(const SvmModel& model);
SvmModel model_from_json(const std::string& text);
void save_model(const std::filesystem::path& path, const SvmModel& model);
SvmModel load_model(const std::filesystem::path& path);

}  // namespace ekm
