#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ekm/motion.hpp"

namespace ekm {

struct ManifestEntry {
    std::string file;  ///< relative to the manifest directory
    std::string label;
    std::string subject;
    std::string id;    ///< defaults to the file stem
    double sample_rate_hz = 30.0;
};

/// JSON manifest: {"format_version": 1, "topology": {"joints": [...],
/// "root": <index>}, "entries": [{"file", "label", "subject", ...}]}.
struct DatasetManifest {
    int format_version = 1;
    TopologyPtr topology;
    std::vector<ManifestEntry> entries;
};

DatasetManifest read_manifest(const std::filesystem::path& manifest_path);

/// One row per frame, header `<joint>_x,<joint>_y,<joint>_z,...` in topology
/// order, optionally preceded by a `time` column holding explicit timestamps.
MotionSequence read_sequence_csv(std::istream& in, TopologyPtr topology, const std::string& source_name,
                                 double sample_rate_hz = 30.0);
void write_sequence_csv(std::ostream& out, const MotionSequence& seq);

/// Loads every entry; labels, subjects and ids are attached.
std::vector<MotionSequence> load_dataset(const std::filesystem::path& manifest_path);

/// Writes `<dir>/manifest.json` and one CSV per sequence. All sequences must
/// share one topology. Returns the manifest path.
std::filesystem::path save_dataset(const std::filesystem::path& dir,
                                   std::span<const MotionSequence> sequences);

/// Parameters of the synthetic gesture generator.
struct SyntheticSpec {
    std::size_t n_classes = 5;
    std::size_t sequences_per_class = 20;
    std::size_t min_length = 40;
    std::size_t max_length = 120;
    /// Pose dimension k, a multiple of 3 (k / 3 joints, joint 0 is the root).
    std::size_t pose_dim = 15;
    /// Strength of the random monotone time warp, in [0, 1].
    double warp_intensity = 0.6;
    /// Standard deviation of the additive Gaussian noise (absolute units).
    double noise_sigma = 0.0;
    /// Standard deviation of the per-instance global 3D offset.
    double translation_sigma = 0.1;
    /// Instances are assigned round-robin to this many subjects.
    std::size_t n_subjects = 10;
    double sample_rate_hz = 30.0;
    std::uint64_t seed = 1;

    void validate() const;
};

/// Per class, a smooth prototype (three random sinusoids per coordinate);
/// each instance is a monotone re-timing of it plus noise and an offset.
/// Pure function of `spec`.
std::vector<MotionSequence> generate_synthetic(const SyntheticSpec& spec);

/// Class prototype sampled at `samples` evenly spaced phases.
std::vector<double> synthetic_prototype(const SyntheticSpec& spec, std::size_t class_index,
                                        std::size_t samples);

/// RMS of every coordinate of the noise-free dataset for `spec`.
double synthetic_signal_rms(const SyntheticSpec& spec);

}  // namespace ekm
