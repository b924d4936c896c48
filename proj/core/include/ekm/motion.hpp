#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ekm {

/// Ordered joint list with a designated root. Each joint contributes an
/// (x, y, z) triple to a pose.
class SkeletonTopology {
public:
    SkeletonTopology(std::vector<std::string> joint_names, std::size_t root_index);

    /// Joints named "j0", "j1", ... with the root at `root_index`.
    static SkeletonTopology generic(std::size_t joint_count, std::size_t root_index = 0);

    /// The 20-joint Kinect skeleton (root at hip_center).
    static SkeletonTopology kinect20();

    std::size_t joint_count() const noexcept { return names_.size(); }
    std::size_t root_index() const noexcept { return root_; }
    std::size_t pose_dim() const noexcept { return 3 * names_.size(); }
    const std::vector<std::string>& joint_names() const noexcept { return names_; }
    std::optional<std::size_t> index_of(std::string_view name) const;

    bool operator==(const SkeletonTopology&) const = default;

private:
    std::vector<std::string> names_;
    std::size_t root_;
};

using TopologyPtr = std::shared_ptr<const SkeletonTopology>;

/// Read-only view of a T x k row-major pose buffer.
struct SeriesView {
    std::span<const double> data;
    std::size_t length = 0;
    std::size_t dim = 0;

    std::span<const double> pose(std::size_t t) const { return data.subspan(t * dim, dim); }
};

/// A variable-length sequence of poses sharing one topology. Immutable after
/// construction.
class MotionSequence {
public:
    /// `poses` is row-major, one pose of 3*N values per frame.
    MotionSequence(TopologyPtr topology, std::vector<double> poses, double sample_rate_hz = 30.0);

    const TopologyPtr& topology() const noexcept { return topology_; }
    std::size_t length() const noexcept { return length_; }
    std::size_t dim() const noexcept { return dim_; }
    std::span<const double> pose(std::size_t t) const;
    std::span<const double> data() const noexcept { return values_; }
    SeriesView view() const noexcept { return {values_, length_, dim_}; }

    double sample_rate_hz() const noexcept { return sample_rate_hz_; }
    /// Seconds; explicit timestamps when present, otherwise t / sample_rate.
    double time_at(std::size_t t) const;
    const std::optional<std::vector<double>>& timestamps() const noexcept { return timestamps_; }

    const std::optional<std::string>& label() const noexcept { return label_; }
    const std::optional<std::string>& subject() const noexcept { return subject_; }
    const std::string& id() const noexcept { return id_; }

    MotionSequence with_label(std::optional<std::string> label) const;
    MotionSequence with_subject(std::optional<std::string> subject) const;
    MotionSequence with_id(std::string id) const;
    /// Timestamps must be strictly increasing and one per frame.
    MotionSequence with_timestamps(std::vector<double> timestamps) const;
    /// Copies metadata (label, subject, id, sample rate) onto new pose data.
    MotionSequence with_poses(TopologyPtr topology, std::vector<double> poses) const;

private:
    TopologyPtr topology_;
    std::vector<double> values_;
    std::size_t length_ = 0;
    std::size_t dim_ = 0;
    double sample_rate_hz_ = 30.0;
    std::optional<std::vector<double>> timestamps_;
    std::optional<std::string> label_;
    std::optional<std::string> subject_;
    std::string id_;
};

/// Joint selection plus optional root-relativization.
struct DescriptorSpec {
    std::vector<std::size_t> selected_joints;
    bool root_relative = true;

    std::size_t feature_dim() const noexcept { return 3 * selected_joints.size(); }
    void validate(const SkeletonTopology& topology) const;

    /// All joints, absolute coordinates.
    static DescriptorSpec identity(const SkeletonTopology& topology);
    /// Full-body descriptor: every non-root joint, root-relative.
    static DescriptorSpec full_body(const SkeletonTopology& topology);
    /// Elbows, hands, knees and feet (8 joints, 24D), root-relative.
    static DescriptorSpec eed8(const SkeletonTopology& topology);
    /// eed8 plus the head (9 joints, 27D).
    static DescriptorSpec eed9(const SkeletonTopology& topology);
};

/// Names accepted: identity, fbd, eed8, eed9.
DescriptorSpec descriptor_preset(std::string_view name, const SkeletonTopology& topology);

MotionSequence extract_descriptor(const MotionSequence& seq, const DescriptorSpec& spec);

/// 1 - (T_r * k_r) / (T_o * k_o).
double compression_ratio(const MotionSequence& original, const MotionSequence& reduced);

}  // namespace ekm
