#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ekm/crossval.hpp"
#include "ekm/dataio.hpp"

namespace ekm::cli {

/// Either a manifest on disk or a generator spec.
struct DatasetSource {
    std::optional<std::filesystem::path> manifest;
    std::optional<SyntheticSpec> synthetic;

    std::vector<MotionSequence> load() const;
};

/// Experiment config, JSON:
///
///     {"dataset": "data/manifest.json" | {"synthetic": {...}},
///      "descriptors": ["identity"], "modes": ["adaptive-greedy"],
///      "lengths": [15], "C": [1],
///      "kernels": [{"id": "rdtw_normalized", "nu": 0.1, "alpha": 1, "corridor": null}],
///      "split": {"kind": "kfold", "folds": 5, "seed": 0, "limit": null},
///      "smo": {"tol": 1e-3, "max_kernel_lookups": 10000000}}
///
/// `split.kind` is "kfold" or "subject_groups" (with "train_subjects").
/// `limit` keeps only the first n splits. Unknown keys are schema errors.
struct ExperimentConfig {
    DatasetSource dataset;
    std::vector<std::string> descriptors;
    std::vector<DownsampleMode> modes;
    std::vector<std::size_t> lengths;
    std::vector<KernelConfig> kernels;
    std::vector<double> Cs;
    SplitSpec split;
    std::optional<std::size_t> split_limit;
    SmoOptions smo;
};

/// Relative paths resolve against `base_dir`. `default_seed` fills seeds the
/// config leaves out.
ExperimentConfig parse_experiment_config(const std::string& text, const std::filesystem::path& base_dir,
                                         std::uint64_t default_seed);

/// Keys: n_classes, sequences_per_class, min_length, max_length, pose_dim,
/// warp_intensity, noise_sigma, noise_relative, translation_sigma,
/// n_subjects, sample_rate_hz, seed. `noise_relative` scales the noise by
/// the noise-free signal RMS and overrides noise_sigma.
SyntheticSpec parse_synthetic_spec(const std::string& json_text, std::uint64_t default_seed);

}  // namespace ekm::cli
