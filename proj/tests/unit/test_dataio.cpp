#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ekm/dataio.hpp"
#include "ekm/error.hpp"
#include "helpers.hpp"

using namespace ekm;

namespace {

std::pair<ErrorKind, std::string> error_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return {e.kind(), e.what()};
    }
    FAIL("expected an ekm::Error");
    return {ErrorKind::io, ""};
}

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
}

bool bits_equal(std::span<const double> a, std::span<const double> b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

const char* kTwoJointManifest = R"({
  "format_version": 1,
  "topology": {"joints": ["hip", "hand"], "root": "hip"},
  "entries": [{"file": "a.csv", "label": "wave", "subject": "s1"}]
})";

std::string csv_with_nan_at(std::size_t bad_row) {
    std::string text = "hip_x,hip_y,hip_z,hand_x,hand_y,hand_z\n";
    for (std::size_t r = 1; r <= 9; ++r)
        text += r == bad_row ? "0,0,0,1,nan,1\n" : "0,0,0,1," + std::to_string(r) + ",1\n";
    return text;
}

}  // namespace

TEST_CASE("empty manifest loads as an empty list") {
    test::TempDir dir("empty");
    write_file(dir.path() / "manifest.json", R"({"format_version": 1, "topology": {"joints": [], "root": 0}, "entries": []})");
    CHECK(load_dataset(dir.path() / "manifest.json").empty());
}

TEST_CASE("two-frame sequence round-trips bit-identically") {
    test::TempDir dir("roundtrip");
    auto seq = test::make_seq({0.1, -2.5e-17, 1.0 / 3.0, 123456.789, std::nextafter(1.0, 2.0), -0.0}, 1)
                   .with_label("wave")
                   .with_subject("s3")
                   .with_id("take_1");
    const std::vector<MotionSequence> data{seq};
    auto manifest = save_dataset(dir.path(), data);
    auto back = load_dataset(manifest);
    REQUIRE(back.size() == 1);
    CHECK(bits_equal(back[0].data(), seq.data()));
    CHECK(back[0].label() == seq.label());
    CHECK(back[0].subject() == seq.subject());
    CHECK(back[0].id() == "take_1");
    CHECK(*back[0].topology() == *seq.topology());
}

TEST_CASE("property: save/load is lossless for random finite values") {
    test::TempDir dir("lossless");
    std::mt19937_64 rng(3);
    std::vector<MotionSequence> data;
    for (int i = 0; i < 6; ++i) {
        auto s = test::random_seq(rng, 3 + std::size_t(i), 2, std::pow(10.0, i * 3 - 9));
        data.push_back(s.with_label("c" + std::to_string(i % 2)).with_id("n" + std::to_string(i)));
    }
    data[2] = data[2].with_timestamps({0.0, 0.25, 0.5, 1.5, 2.0});
    auto back = load_dataset(save_dataset(dir.path(), data));
    REQUIRE(back.size() == data.size());
    for (std::size_t i = 0; i < data.size(); ++i) CHECK(bits_equal(back[i].data(), data[i].data()));
    REQUIRE(back[2].timestamps().has_value());
    CHECK(*back[2].timestamps() == *data[2].timestamps());
}

TEST_CASE("NaN at row 7 is reported with its row") {
    test::TempDir dir("nan");
    write_file(dir.path() / "manifest.json", kTwoJointManifest);
    write_file(dir.path() / "a.csv", csv_with_nan_at(7));
    auto [kind, msg] = error_of([&] { (void)load_dataset(dir.path() / "manifest.json"); });
    CHECK(kind == ErrorKind::data);
    CHECK(msg.find("row 7") != std::string::npos);
    CHECK(msg.find("column 5") != std::string::npos);
    CHECK(msg.find("a.csv") != std::string::npos);
}

TEST_CASE("column count mismatch is a schema error naming file and row") {
    test::TempDir dir("schema");
    write_file(dir.path() / "manifest.json", kTwoJointManifest);
    write_file(dir.path() / "a.csv", "hip_x,hip_y,hip_z,hand_x,hand_y,hand_z\n0,0,0,1,1,1\n0,0,0,1,1\n");
    auto [kind, msg] = error_of([&] { (void)load_dataset(dir.path() / "manifest.json"); });
    CHECK(kind == ErrorKind::schema);
    CHECK(msg.find("a.csv") != std::string::npos);
    CHECK(msg.find("row 2") != std::string::npos);

    write_file(dir.path() / "a.csv", "hip_x,hip_y,hip_z\n0,0,0\n");
    CHECK(error_of([&] { (void)load_dataset(dir.path() / "manifest.json"); }).first == ErrorKind::schema);
    write_file(dir.path() / "a.csv", "hip_x,hip_y,hip_z,hand_y,hand_x,hand_z\n0,0,0,1,1,1\n");
    CHECK(error_of([&] { (void)load_dataset(dir.path() / "manifest.json"); }).first == ErrorKind::schema);
    write_file(dir.path() / "a.csv", "hip_x,hip_y,hip_z,hand_x,hand_y,hand_z\n0,0,0,1,abc,1\n");
    CHECK(error_of([&] { (void)load_dataset(dir.path() / "manifest.json"); }).first == ErrorKind::data);
}

TEST_CASE("manifest problems") {
    test::TempDir dir("manifest");
    CHECK(error_of([&] { (void)load_dataset(dir.path() / "nope.json"); }).first == ErrorKind::io);
    write_file(dir.path() / "manifest.json", "{not json");
    CHECK(error_of([&] { (void)read_manifest(dir.path() / "manifest.json"); }).first == ErrorKind::schema);
    write_file(dir.path() / "manifest.json",
               R"({"format_version": 1, "topology": {"joints": ["a"], "root": 0}, "entries": [{"file": "x.csv", "label": ""}]})");
    CHECK(error_of([&] { (void)read_manifest(dir.path() / "manifest.json"); }).first == ErrorKind::schema);
    write_file(dir.path() / "manifest.json",
               R"({"format_version": 1, "topology": {"joints": ["a"], "root": 0}, "entries": [{"file": "x.csv", "label": "w"}]})");
    auto m = read_manifest(dir.path() / "manifest.json");
    CHECK(m.entries.at(0).id == "x");
    CHECK(error_of([&] { (void)load_dataset(dir.path() / "manifest.json"); }).first == ErrorKind::io);
}

TEST_CASE("csv with a time column keeps explicit timestamps") {
    std::istringstream in("time,j0_x,j0_y,j0_z\n0.0,1,2,3\n0.5,4,5,6\n");
    auto seq = read_sequence_csv(in, test::generic_topology(1), "mem");
    CHECK(seq.length() == 2);
    CHECK(seq.time_at(1) == 0.5);
    std::ostringstream out;
    write_sequence_csv(out, seq);
    CHECK(out.str() == "time,j0_x,j0_y,j0_z\n0,1,2,3\n0.5,4,5,6\n");
}

TEST_CASE("synthetic generator: shape and determinism") {
    SyntheticSpec spec;
    spec.sequences_per_class = 4;
    auto a = generate_synthetic(spec);
    auto b = generate_synthetic(spec);
    REQUIRE(a.size() == 20);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(bits_equal(a[i].data(), b[i].data()));
        CHECK(a[i].id() == b[i].id());
        CHECK(a[i].dim() == 15);
        CHECK(a[i].length() >= 40);
        CHECK(a[i].length() <= 120);
        CHECK(a[i].label().has_value());
        CHECK(a[i].subject().has_value());
    }
    spec.seed = 2;
    auto c = generate_synthetic(spec);
    CHECK_FALSE(bits_equal(a[0].data(), c[0].data()));
    spec.min_length = 1;
    CHECK_THROWS_AS(spec.validate(), Error);
}

TEST_CASE("synthetic generator: no warp and no noise means identical up to translation") {
    SyntheticSpec spec;
    spec.n_classes = 2;
    spec.sequences_per_class = 5;
    spec.min_length = spec.max_length = 50;
    spec.warp_intensity = 0.0;
    spec.noise_sigma = 0.0;
    auto data = generate_synthetic(spec);
    for (std::size_t c = 0; c < 2; ++c) {
        const auto& ref = data[c * 5];
        for (std::size_t i = 1; i < 5; ++i) {
            const auto& other = data[c * 5 + i];
            REQUIRE(other.length() == ref.length());
            double shift[3];
            for (int a = 0; a < 3; ++a) shift[a] = other.data()[std::size_t(a)] - ref.data()[std::size_t(a)];
            for (std::size_t v = 0; v < ref.data().size(); ++v)
                CHECK(std::abs(other.data()[v] - ref.data()[v] - shift[v % 3]) <= 1e-12);
        }
    }
}

TEST_CASE("synthetic generator: distinct prototypes and preserved endpoints") {
    SyntheticSpec spec;
    spec.noise_sigma = 0.0;
    spec.translation_sigma = 0.0;
    spec.warp_intensity = 1.0;
    spec.sequences_per_class = 6;
    auto p0 = synthetic_prototype(spec, 0, 64);
    auto p1 = synthetic_prototype(spec, 1, 64);
    double gap = 0.0;
    for (std::size_t i = 0; i < p0.size(); ++i) gap = std::max(gap, std::abs(p0[i] - p1[i]));
    CHECK(gap > 0.0);

    auto data = generate_synthetic(spec);
    for (const auto& seq : data) {
        const std::size_t cls = std::size_t(std::stoul(seq.label()->substr(1)));
        auto first = synthetic_prototype(spec, cls, 2);
        const std::size_t k = seq.dim();
        for (std::size_t c = 0; c < k; ++c) {
            CHECK(std::abs(seq.pose(0)[c] - first[c]) <= 1e-12);
            CHECK(std::abs(seq.pose(seq.length() - 1)[c] - first[k + c]) <= 1e-12);
        }
    }
    CHECK(synthetic_signal_rms(spec) > 0.0);
}
