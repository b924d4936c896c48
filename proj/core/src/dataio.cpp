#include "ekm/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ekm/error.hpp"

namespace ekm {

namespace fs = std::filesystem;

namespace {

std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (;;) {
        auto comma = line.find(',', start);
        auto cell = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
        while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
        while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r'))
            cell.remove_suffix(1);
        cells.push_back(cell);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

DatasetManifest read_manifest(const fs::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) fail(ErrorKind::io, "cannot open manifest " + manifest_path.string());
    DatasetManifest m;
    try {
        const auto j = nlohmann::json::parse(in);
        m.format_version = j.value("format_version", 1);
        if (m.format_version != 1)
            fail(ErrorKind::schema, manifest_path.string() + ": unsupported format_version " +
                                        std::to_string(m.format_version));
        const auto& entries = j.at("entries");
        const auto& topo = j.at("topology");
        auto joints = topo.at("joints").get<std::vector<std::string>>();
        if (joints.empty()) {
            if (!entries.empty())
                fail(ErrorKind::schema, manifest_path.string() + ": topology lists no joints");
            return m;
        }
        std::size_t root = 0;
        if (topo.contains("root")) {
            const auto& r = topo.at("root");
            if (r.is_string()) {
                auto it = std::find(joints.begin(), joints.end(), r.get<std::string>());
                if (it == joints.end())
                    fail(ErrorKind::schema, manifest_path.string() + ": unknown root joint");
                root = static_cast<std::size_t>(it - joints.begin());
            } else {
                root = r.get<std::size_t>();
            }
        }
        m.topology = std::make_shared<const SkeletonTopology>(std::move(joints), root);
        for (const auto& e : entries) {
            ManifestEntry entry;
            entry.file = e.at("file").get<std::string>();
            entry.label = e.at("label").get<std::string>();
            entry.subject = e.value("subject", std::string{});
            entry.id = e.value("id", fs::path(entry.file).stem().string());
            entry.sample_rate_hz = e.value("sample_rate_hz", 30.0);
            if (entry.label.empty())
                fail(ErrorKind::schema, manifest_path.string() + ": entry '" + entry.file +
                                            "' has an empty label");
            m.entries.push_back(std::move(entry));
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::schema, manifest_path.string() + ": " + e.what());
    }
    return m;
}

MotionSequence read_sequence_csv(std::istream& in, TopologyPtr topology, const std::string& source_name,
                                 double sample_rate_hz) {
    std::string line;
    if (!std::getline(in, line)) fail(ErrorKind::schema, source_name + ": missing header row");
    const auto header = split_csv_line(line);
    const std::size_t k = topology->pose_dim();
    const bool has_time = !header.empty() && header.front() == "time";
    const std::size_t expected = k + (has_time ? 1 : 0);
    if (header.size() != expected)
        fail(ErrorKind::schema, source_name + ": header has " + std::to_string(header.size()) +
                                    " columns, topology needs " + std::to_string(expected));
    static constexpr const char* axes[] = {"_x", "_y", "_z"};
    for (std::size_t c = 0; c < k; ++c) {
        const std::string want = topology->joint_names()[c / 3] + axes[c % 3];
        if (header[c + (has_time ? 1 : 0)] != want)
            fail(ErrorKind::schema, source_name + ": header column " + std::to_string(c + 1) +
                                        " is '" + std::string(header[c + (has_time ? 1 : 0)]) +
                                        "', expected '" + want + "'");
    }

    std::vector<double> values;
    std::vector<double> times;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        ++row;
        const auto cells = split_csv_line(line);
        if (cells.size() != expected)
            fail(ErrorKind::schema, source_name + ": row " + std::to_string(row) + " has " +
                                        std::to_string(cells.size()) + " columns, expected " +
                                        std::to_string(expected));
        for (std::size_t c = 0; c < cells.size(); ++c) {
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(cells[c].data(), cells[c].data() + cells[c].size(), v);
            if (ec != std::errc{} || ptr != cells[c].data() + cells[c].size())
                fail(ErrorKind::data, source_name + ": row " + std::to_string(row) + ", column " +
                                          std::to_string(c + 1) + ": cannot parse '" +
                                          std::string(cells[c]) + "'");
            if (!std::isfinite(v))
                fail(ErrorKind::data, source_name + ": row " + std::to_string(row) + ", column " +
                                          std::to_string(c + 1) + ": non-finite value");
            if (has_time && c == 0) times.push_back(v);
            else values.push_back(v);
        }
    }
    if (row == 0) fail(ErrorKind::data, source_name + ": no frames");
    MotionSequence seq(std::move(topology), std::move(values), sample_rate_hz);
    if (has_time) {
        try {
            seq = seq.with_timestamps(std::move(times));
        } catch (const Error& e) {
            fail(ErrorKind::data, source_name + ": " + e.what());
        }
    }
    return seq;
}

void write_sequence_csv(std::ostream& out, const MotionSequence& seq) {
    static constexpr const char* axes[] = {"_x", "_y", "_z"};
    const bool has_time = seq.timestamps().has_value();
    const auto& names = seq.topology()->joint_names();
    std::string line;
    if (has_time) line = "time";
    for (std::size_t c = 0; c < seq.dim(); ++c) {
        if (!line.empty()) line += ',';
        line += names[c / 3] + axes[c % 3];
    }
    out << line << '\n';
    for (std::size_t t = 0; t < seq.length(); ++t) {
        line.clear();
        if (has_time) line = format_double(seq.time_at(t));
        for (double v : seq.pose(t)) {
            if (!line.empty()) line += ',';
            line += format_double(v);
        }
        out << line << '\n';
    }
}

std::vector<MotionSequence> load_dataset(const fs::path& manifest_path) {
    const auto manifest = read_manifest(manifest_path);
    const auto base = manifest_path.parent_path();
    std::vector<MotionSequence> out;
    out.reserve(manifest.entries.size());
    for (const auto& e : manifest.entries) {
        const auto path = base / e.file;
        std::ifstream in(path);
        if (!in) fail(ErrorKind::io, "cannot open sequence file " + path.string());
        auto seq = read_sequence_csv(in, manifest.topology, path.string(), e.sample_rate_hz);
        seq = seq.with_label(e.label).with_id(e.id);
        if (!e.subject.empty()) seq = seq.with_subject(e.subject);
        out.push_back(std::move(seq));
    }
    return out;
}

fs::path save_dataset(const fs::path& dir, std::span<const MotionSequence> sequences) {
    fs::create_directories(dir);
    nlohmann::json j;
    j["format_version"] = 1;
    j["entries"] = nlohmann::json::array();
    TopologyPtr topo;
    for (std::size_t i = 0; i < sequences.size(); ++i) {
        const auto& s = sequences[i];
        if (!topo) topo = s.topology();
        else if (!(*topo == *s.topology()))
            fail(ErrorKind::topology_mismatch, "dataset sequences do not share one topology");
        char name[32];
        std::snprintf(name, sizeof(name), "seq_%05zu.csv", i);
        std::ofstream out(dir / name);
        if (!out) fail(ErrorKind::io, "cannot write " + (dir / name).string());
        write_sequence_csv(out, s);
        nlohmann::json e;
        e["file"] = name;
        e["label"] = s.label().value_or("");
        e["subject"] = s.subject().value_or("");
        e["id"] = s.id().empty() ? fs::path(name).stem().string() : s.id();
        e["sample_rate_hz"] = s.sample_rate_hz();
        j["entries"].push_back(std::move(e));
    }
    const auto& joints = topo ? topo->joint_names() : std::vector<std::string>{};
    j["topology"]["joints"] = joints;
    j["topology"]["root"] = topo ? topo->root_index() : 0;
    const auto manifest = dir / "manifest.json";
    std::ofstream out(manifest);
    if (!out) fail(ErrorKind::io, "cannot write " + manifest.string());
    out << j.dump(2) << '\n';
    return manifest;
}

}  // namespace ekm
