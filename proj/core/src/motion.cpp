#include "ekm/motion.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ekm/error.hpp"

namespace ekm {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::invalid_argument: return "invalid-argument";
        case ErrorKind::topology_mismatch: return "topology-mismatch";
        case ErrorKind::dimension_mismatch: return "dimension-mismatch";
        case ErrorKind::empty_sequence: return "empty-sequence";
        case ErrorKind::invalid_plan: return "invalid-plan";
        case ErrorKind::oversized_input: return "oversized-input";
        case ErrorKind::fixed_length_required: return "fixed-length-required";
        case ErrorKind::degenerate_normalization: return "degenerate-normalization";
        case ErrorKind::domain: return "domain";
        case ErrorKind::degenerate_training: return "degenerate-training";
        case ErrorKind::provenance_mismatch: return "provenance-mismatch";
        case ErrorKind::invalid_split: return "invalid-split";
        case ErrorKind::schema: return "schema";
        case ErrorKind::data: return "data";
        case ErrorKind::io: return "io";
    }
    return "unknown";
}

SkeletonTopology::SkeletonTopology(std::vector<std::string> joint_names, std::size_t root_index)
    : names_(std::move(joint_names)), root_(root_index) {
    if (names_.empty()) fail(ErrorKind::invalid_argument, "topology needs at least one joint");
    if (root_ >= names_.size())
        fail(ErrorKind::invalid_argument, "root index " + std::to_string(root_) + " out of range");
    std::set<std::string> seen;
    for (const auto& n : names_) {
        if (!seen.insert(n).second) fail(ErrorKind::invalid_argument, "duplicate joint name '" + n + "'");
    }
}

SkeletonTopology SkeletonTopology::generic(std::size_t joint_count, std::size_t root_index) {
    std::vector<std::string> names;
    names.reserve(joint_count);
    for (std::size_t j = 0; j < joint_count; ++j) names.push_back("j" + std::to_string(j));
    return {std::move(names), root_index};
}

SkeletonTopology SkeletonTopology::kinect20() {
    return {{"hip_center", "spine", "shoulder_center", "head", "shoulder_left", "elbow_left",
             "wrist_left", "hand_left", "shoulder_right", "elbow_right", "wrist_right", "hand_right",
             "hip_left", "knee_left", "ankle_left", "foot_left", "hip_right", "knee_right",
             "ankle_right", "foot_right"},
            0};
}

std::optional<std::size_t> SkeletonTopology::index_of(std::string_view name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names_.begin());
}

MotionSequence::MotionSequence(TopologyPtr topology, std::vector<double> poses, double sample_rate_hz)
    : topology_(std::move(topology)), values_(std::move(poses)), sample_rate_hz_(sample_rate_hz) {
    if (!topology_) fail(ErrorKind::invalid_argument, "sequence without topology");
    dim_ = topology_->pose_dim();
    if (values_.empty()) fail(ErrorKind::empty_sequence, "sequence must hold at least one pose");
    if (values_.size() % dim_ != 0)
        fail(ErrorKind::dimension_mismatch, "pose buffer of " + std::to_string(values_.size()) +
                                                " values is not a multiple of pose dimension " +
                                                std::to_string(dim_));
    if (!(sample_rate_hz_ > 0.0) || !std::isfinite(sample_rate_hz_))
        fail(ErrorKind::invalid_argument, "sample rate must be positive");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i]))
            fail(ErrorKind::data, "non-finite value at frame " + std::to_string(i / dim_));
    }
    length_ = values_.size() / dim_;
}

std::span<const double> MotionSequence::pose(std::size_t t) const {
    if (t >= length_) fail(ErrorKind::invalid_argument, "frame index out of range");
    return std::span<const double>(values_).subspan(t * dim_, dim_);
}

double MotionSequence::time_at(std::size_t t) const {
    if (timestamps_) return timestamps_->at(t);
    return static_cast<double>(t) / sample_rate_hz_;
}

MotionSequence MotionSequence::with_label(std::optional<std::string> label) const {
    MotionSequence out = *this;
    out.label_ = std::move(label);
    return out;
}

MotionSequence MotionSequence::with_subject(std::optional<std::string> subject) const {
    MotionSequence out = *this;
    out.subject_ = std::move(subject);
    return out;
}

MotionSequence MotionSequence::with_id(std::string id) const {
    MotionSequence out = *this;
    out.id_ = std::move(id);
    return out;
}

MotionSequence MotionSequence::with_timestamps(std::vector<double> timestamps) const {
    if (timestamps.size() != length_)
        fail(ErrorKind::invalid_argument, "timestamp count does not match frame count");
    for (std::size_t i = 1; i < timestamps.size(); ++i) {
        if (!(timestamps[i] > timestamps[i - 1]))
            fail(ErrorKind::invalid_argument, "timestamps must be strictly increasing");
    }
    MotionSequence out = *this;
    out.timestamps_ = std::move(timestamps);
    return out;
}

MotionSequence MotionSequence::with_poses(TopologyPtr topology, std::vector<double> poses) const {
    MotionSequence out(std::move(topology), std::move(poses), sample_rate_hz_);
    out.label_ = label_;
    out.subject_ = subject_;
    out.id_ = id_;
    return out;
}

void DescriptorSpec::validate(const SkeletonTopology& topology) const {
    if (selected_joints.empty())
        fail(ErrorKind::invalid_argument, "descriptor must select at least one joint");
    std::set<std::size_t> seen;
    for (auto j : selected_joints) {
        if (j >= topology.joint_count())
            fail(ErrorKind::topology_mismatch, "joint index " + std::to_string(j) +
                                                   " out of range for a " +
                                                   std::to_string(topology.joint_count()) +
                                                   "-joint topology");
        if (!seen.insert(j).second)
            fail(ErrorKind::invalid_argument, "joint index " + std::to_string(j) + " selected twice");
    }
}

DescriptorSpec DescriptorSpec::identity(const SkeletonTopology& topology) {
    DescriptorSpec spec;
    spec.root_relative = false;
    for (std::size_t j = 0; j < topology.joint_count(); ++j) spec.selected_joints.push_back(j);
    return spec;
}

DescriptorSpec DescriptorSpec::full_body(const SkeletonTopology& topology) {
    DescriptorSpec spec;
    spec.root_relative = true;
    for (std::size_t j = 0; j < topology.joint_count(); ++j) {
        if (j != topology.root_index()) spec.selected_joints.push_back(j);
    }
    if (spec.selected_joints.empty()) spec.selected_joints.push_back(topology.root_index());
    return spec;
}

namespace {

DescriptorSpec by_names(const SkeletonTopology& topology, std::initializer_list<std::string_view> names) {
    DescriptorSpec spec;
    spec.root_relative = true;
    for (auto name : names) {
        auto idx = topology.index_of(name);
        if (!idx)
            fail(ErrorKind::topology_mismatch,
                 "topology has no joint named '" + std::string(name) + "'");
        spec.selected_joints.push_back(*idx);
    }
    return spec;
}

}  // namespace

DescriptorSpec DescriptorSpec::eed8(const SkeletonTopology& topology) {
    return by_names(topology, {"elbow_left", "elbow_right", "hand_left", "hand_right", "knee_left",
                               "knee_right", "foot_left", "foot_right"});
}

DescriptorSpec DescriptorSpec::eed9(const SkeletonTopology& topology) {
    auto spec = eed8(topology);
    spec.selected_joints.push_back(by_names(topology, {"head"}).selected_joints.front());
    return spec;
}

DescriptorSpec descriptor_preset(std::string_view name, const SkeletonTopology& topology) {
    if (name == "identity") return DescriptorSpec::identity(topology);
    if (name == "fbd") return DescriptorSpec::full_body(topology);
    if (name == "eed8") return DescriptorSpec::eed8(topology);
    if (name == "eed9") return DescriptorSpec::eed9(topology);
    fail(ErrorKind::invalid_argument, "unknown descriptor preset '" + std::string(name) + "'");
}

MotionSequence extract_descriptor(const MotionSequence& seq, const DescriptorSpec& spec) {
    const auto& topo = *seq.topology();
    spec.validate(topo);

    std::vector<std::string> names;
    std::size_t new_root = 0;
    for (std::size_t s = 0; s < spec.selected_joints.size(); ++s) {
        auto j = spec.selected_joints[s];
        names.push_back(topo.joint_names()[j]);
        if (j == topo.root_index()) new_root = s;
    }
    auto out_topo = std::make_shared<const SkeletonTopology>(std::move(names), new_root);

    const std::size_t root = topo.root_index();
    const std::size_t out_dim = spec.feature_dim();
    std::vector<double> out(seq.length() * out_dim);
    for (std::size_t t = 0; t < seq.length(); ++t) {
        auto pose = seq.pose(t);
        double* dst = out.data() + t * out_dim;
        for (std::size_t s = 0; s < spec.selected_joints.size(); ++s) {
            auto j = spec.selected_joints[s];
            for (std::size_t c = 0; c < 3; ++c) {
                double v = pose[3 * j + c];
                if (spec.root_relative) v -= pose[3 * root + c];
                dst[3 * s + c] = v;
            }
        }
    }
    auto result = seq.with_poses(std::move(out_topo), std::move(out));
    if (seq.timestamps()) result = result.with_timestamps(*seq.timestamps());
    return result;
}

double compression_ratio(const MotionSequence& original, const MotionSequence& reduced) {
    const double o = static_cast<double>(original.length()) * static_cast<double>(original.dim());
    const double r = static_cast<double>(reduced.length()) * static_cast<double>(reduced.dim());
    return 1.0 - r / o;
}

}  // namespace ekm
