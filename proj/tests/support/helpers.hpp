#pragma once

#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "ekm/motion.hpp"
#include "oracles.hpp"

namespace ekm::test {

inline TopologyPtr generic_topology(std::size_t joints) {
    return std::make_shared<const SkeletonTopology>(SkeletonTopology::generic(joints));
}

inline MotionSequence make_seq(std::vector<double> values, std::size_t joints = 1) {
    return MotionSequence(generic_topology(joints), std::move(values));
}

/// Single-joint sequence whose x coordinate follows `xs` (y = z = 0).
inline MotionSequence make_x_seq(const std::vector<double>& xs) {
    std::vector<double> v;
    for (double x : xs) v.insert(v.end(), {x, 0.0, 0.0});
    return make_seq(std::move(v));
}

inline SeriesView view_of(const oracle::Series& s) { return {s.values, s.length, s.dim}; }

inline oracle::Series series_of(const MotionSequence& s) {
    return {s.length(), s.dim(), std::vector<double>(s.data().begin(), s.data().end())};
}

inline MotionSequence random_seq(std::mt19937_64& rng, std::size_t length, std::size_t joints,
                                 double scale = 1.0) {
    auto s = oracle::random_series(rng, length, 3 * joints, scale);
    return make_seq(std::move(s.values), joints);
}

/// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("ekm_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace ekm::test
