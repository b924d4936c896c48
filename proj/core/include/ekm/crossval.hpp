#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ekm/downsample.hpp"
#include "ekm/kernels.hpp"
#include "ekm/motion.hpp"
#include "ekm/svm.hpp"

namespace ekm {

struct SplitSpec {
    enum class Kind { kfold, subject_groups };
    Kind kind = Kind::kfold;
    /// k for stratified k-fold.
    std::size_t folds = 5;
    /// Subjects in the training partition; every C(n_subjects, train_subjects)
    /// subject subset becomes one split.
    std::size_t train_subjects = 5;
    std::uint64_t seed = 0;
};

/// Dataset positions of one train/test partition, each sorted by sequence id.
struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    /// Set for subject-group splits: no subject may sit on both sides.
    bool subject_disjoint = false;
};

/// Splits depend on sequence ids, labels and subjects only, never on the
/// order of `data`.
std::vector<Split> make_splits(std::span<const MotionSequence> data, const SplitSpec& spec);

/// Throws invalid_split when a position appears on both sides, or a subject
/// does in a subject-disjoint split.
void validate_split(std::span<const MotionSequence> data, const Split& split);

struct KernelConfig {
    KernelId id = KernelId::rdtw_normalized;
    KernelParams params;
};

struct NamedDescriptor {
    std::string name;
    DescriptorSpec spec;
};

struct ExperimentGrid {
    std::vector<NamedDescriptor> descriptors;
    std::vector<DownsampleMode> modes;
    std::vector<std::size_t> lengths;
    std::vector<KernelConfig> kernels;
    std::vector<double> Cs;
    SmoOptions smo;  ///< C is overridden per grid cell

    void validate() const;
};

/// Grid defaults: C in {0.1, 1, 10, 100}, nu in {0.01, 0.1, 1, 10},
/// L in {5, 10, 15, 20, 25, 30}.
std::vector<double> default_C_grid();
std::vector<double> default_nu_grid();
std::vector<std::size_t> default_length_grid();

struct ResultRow {
    std::string descriptor;
    DownsampleMode mode = DownsampleMode::adaptive_greedy;
    std::size_t length = 0;
    KernelConfig kernel;
    double C = 1.0;
    std::size_t split = 0;
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
    bool converged = true;
};

struct ConfigSummary {
    std::string descriptor;
    DownsampleMode mode = DownsampleMode::adaptive_greedy;
    std::size_t length = 0;
    KernelConfig kernel;
    double C = 1.0;
    std::size_t splits = 0;
    double train_mean = 0.0, train_std = 0.0;
    double test_mean = 0.0, test_std = 0.0;
};

struct CrossValidationReport {
    std::vector<ResultRow> rows;

    /// Mean and population standard deviation per configuration, in row order.
    std::vector<ConfigSummary> summary() const;
};

/// Runs every (descriptor, mode, L, kernel, C) cell over every split. Each
/// split trains a one-vs-one SVM on its training rows and scores both
/// partitions. The normalized kernel takes its bounds from the training rows
/// of each split. Splits run on `workers` threads; results do not depend on
/// the worker count.
CrossValidationReport cross_validate(std::span<const MotionSequence> data, const SplitSpec& split_spec,
                                     const ExperimentGrid& grid, std::size_t workers = 1);

/// Same, over precomputed splits.
CrossValidationReport cross_validate(std::span<const MotionSequence> data, std::span<const Split> splits,
                                     const ExperimentGrid& grid, std::size_t workers = 1);

/// Descriptor extraction followed by fixed-length resampling.
std::vector<MotionSequence> preprocess(std::span<const MotionSequence> data, const DescriptorSpec& descriptor,
                                       DownsampleMode mode, std::size_t length, std::size_t workers = 1);

/// Mean squared distance between a frame and the mean pose, over every frame
/// of every sequence. Relative stiffness grids are divided by it.
double feature_scale(std::span<const MotionSequence> data);

/// Nested selection for one kernel: on each outer training partition, every
/// (relative nu, C) pair is scored by an inner stratified k-fold and the best
/// mean inner accuracy wins (ties go to the earlier grid entry, nu first).
struct TuningSpec {
    KernelId id = KernelId::rdtw_normalized;
    KernelParams base;  ///< alpha and corridor; nu comes from the grid
    std::vector<double> relative_nus = default_nu_grid();
    std::vector<double> Cs = default_C_grid();
    std::size_t inner_folds = 4;
    std::uint64_t seed = 0;
    SmoOptions smo;

    void validate() const;
};

struct TunedSplitResult {
    std::size_t split = 0;
    KernelParams params;  ///< nu is absolute (relative nu / feature scale)
    double relative_nu = 0.0;
    double C = 1.0;
    double inner_accuracy = 0.0;
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
    bool converged = true;
};

/// `data` must already be fixed-length (see preprocess).
std::vector<TunedSplitResult> tuned_cross_validate(std::span<const MotionSequence> data,
                                                   std::span<const Split> splits, const TuningSpec& spec,
                                                   std::size_t workers = 1);

void write_tuned_csv(std::ostream& out, std::span<const TunedSplitResult> results);

void write_results_csv(std::ostream& out, const CrossValidationReport& report);
void write_summary_csv(std::ostream& out, const std::vector<ConfigSummary>& summary);

}  // namespace ekm
