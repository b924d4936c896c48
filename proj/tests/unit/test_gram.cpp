#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

#include "ekm/error.hpp"
#include "ekm/gram.hpp"
#include "helpers.hpp"

using namespace ekm;
using test::view_of;

namespace {

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an ekm::Error");
    return ErrorKind::io;
}

struct Bank {
    std::vector<oracle::Series> store;
    std::vector<SeriesView> views;

    Bank(std::mt19937_64& rng, std::size_t count, std::size_t length, std::size_t dim) {
        for (std::size_t i = 0; i < count; ++i) store.push_back(oracle::random_series(rng, length, dim));
        for (const auto& s : store) views.push_back(view_of(s));
    }
};

constexpr KernelId kAll[] = {KernelId::euclid_rbf, KernelId::dtw_rbf, KernelId::rdtw, KernelId::rdtw_normalized};

}  // namespace

TEST_CASE("single sequence gives a 1x1 self-value") {
    std::mt19937_64 rng(1);
    Bank b(rng, 1, 5, 3);
    KernelParams p;
    p.nu = 0.3;
    CHECK(gram(b.views, KernelId::euclid_rbf, p).values == std::vector<double>{1.0});
    auto g = gram(b.views, KernelId::rdtw, p);
    CHECK(g.rows == 1);
    CHECK(g.values[0] == rdtw_kernel(b.views[0], b.views[0], p));
    CHECK(kind_of([&] { (void)gram(b.views, KernelId::rdtw_normalized, p); }) ==
          ErrorKind::degenerate_normalization);
}

TEST_CASE("gram is symmetric with a positive diagonal for every kernel") {
    std::mt19937_64 rng(2);
    Bank b(rng, 9, 6, 3);
    KernelParams p;
    p.nu = 0.1;
    for (auto id : kAll) {
        auto g = gram(b.views, id, p);
        CHECK(g.kernel_id == id);
        CHECK(g.norm_bounds.has_value() == (id == KernelId::rdtw_normalized));
        for (std::size_t i = 0; i < 9; ++i) {
            CHECK(g(i, i) > 0.0);
            for (std::size_t j = 0; j < 9; ++j) CHECK(g(i, j) == g(j, i));
        }
    }
}

TEST_CASE("permuting the inputs permutes rows and columns") {
    std::mt19937_64 rng(3);
    Bank b(rng, 8, 5, 3);
    std::vector<std::size_t> perm{3, 0, 7, 5, 1, 6, 2, 4};
    std::vector<SeriesView> shuffled;
    for (auto i : perm) shuffled.push_back(b.views[i]);
    KernelParams p;
    p.nu = 0.2;
    for (auto id : kAll) {
        auto g = gram(b.views, id, p);
        auto h = gram(shuffled, id, p);
        for (std::size_t i = 0; i < 8; ++i)
            for (std::size_t j = 0; j < 8; ++j) CHECK(h(i, j) == g(perm[i], perm[j]));
    }
}

TEST_CASE("parallel and serial assembly are bit-identical") {
    std::mt19937_64 rng(4);
    Bank b(rng, 23, 7, 6);
    KernelParams p;
    p.nu = 0.05;
    for (auto id : kAll) {
        auto serial = gram(b.views, id, p, 1);
        for (std::size_t workers : {2u, 3u, 8u}) {
            auto par = gram(b.views, id, p, workers);
            CHECK(std::memcmp(serial.values.data(), par.values.data(), serial.values.size() * sizeof(double)) == 0);
        }
    }
}

TEST_CASE("kernel errors name the offending pair") {
    std::mt19937_64 rng(5);
    std::vector<oracle::Series> store{oracle::random_series(rng, 5, 3), oracle::random_series(rng, 5, 3),
                                      oracle::random_series(rng, 4, 3)};
    std::vector<SeriesView> views;
    for (const auto& s : store) views.push_back(view_of(s));
    try {
        (void)gram(views, KernelId::rdtw, KernelParams{});
        FAIL("expected fixed-length error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::fixed_length_required);
        CHECK(std::string(e.what()).find("pair (0, 2)") != std::string::npos);
    }
    CHECK_NOTHROW((void)gram(views, KernelId::dtw_rbf, KernelParams{}));
}

TEST_CASE("normalize_kernel") {
    std::mt19937_64 rng(6);
    Bank b(rng, 12, 6, 3);
    KernelParams p;
    p.nu = 0.1;
    p.alpha = 2.5;
    auto raw = gram(b.views, KernelId::rdtw, p);
    auto norm = normalize_kernel(raw);
    REQUIRE(norm.norm_bounds.has_value());
    CHECK(norm.kernel_id == KernelId::rdtw_normalized);
    const auto [lo, hi] = std::minmax_element(raw.values.begin(), raw.values.end());
    const std::size_t at_lo = std::size_t(lo - raw.values.begin());
    const std::size_t at_hi = std::size_t(hi - raw.values.begin());
    CHECK(norm.values[at_lo] == 1.0);
    CHECK(norm.values[at_hi] == std::exp(2.5));
    for (std::size_t a = 0; a < raw.values.size(); ++a) {
        CHECK(norm.values[a] >= 1.0);
        CHECK(norm.values[a] <= std::exp(2.5));
        for (std::size_t c = 0; c < raw.values.size(); ++c) {
            if (raw.values[a] < raw.values[c]) CHECK(norm.values[a] <= norm.values[c]);
        }
    }

    auto constant = raw;
    std::fill(constant.values.begin(), constant.values.end(), 0.5);
    CHECK(kind_of([&] { (void)normalize_kernel(constant); }) == ErrorKind::degenerate_normalization);
    auto negative = raw;
    negative.values[3] = -1.0;
    CHECK(kind_of([&] { (void)normalize_kernel(negative); }) == ErrorKind::domain);
    auto wrong = raw;
    wrong.kernel_id = KernelId::dtw_rbf;
    CHECK(kind_of([&] { (void)normalize_kernel(wrong); }) == ErrorKind::invalid_argument);
}

TEST_CASE("property: normalized extremes are exact for any alpha") {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> alphas(0.1, 8.0);
    for (int trial = 0; trial < 100; ++trial) {
        Bank b(rng, 6, 5, 3);
        KernelParams p;
        p.nu = 0.2;
        p.alpha = alphas(rng);
        auto g = gram(b.views, KernelId::rdtw_normalized, p);
        CHECK(*std::min_element(g.values.begin(), g.values.end()) == 1.0);
        CHECK(*std::max_element(g.values.begin(), g.values.end()) == std::exp(p.alpha));
    }
}

TEST_CASE("gram_cross") {
    std::mt19937_64 rng(7);
    Bank b(rng, 10, 6, 3);
    KernelParams p;
    p.nu = 0.2;
    for (auto id : kAll) {
        auto g = gram(b.views, id, p);
        auto c = gram_cross(b.views, b.views, id, p, g.norm_bounds);
        CHECK(c.values == g.values);
        CHECK(c.norm_bounds == g.norm_bounds);
    }
    auto empty = gram_cross(std::span<const SeriesView>{}, b.views, KernelId::rdtw, p);
    CHECK(empty.rows == 0);
    CHECK(empty.cols == 10);
    CHECK(empty.values.empty());
    CHECK(kind_of([&] { (void)gram_cross(b.views, b.views, KernelId::rdtw_normalized, p); }) ==
          ErrorKind::invalid_argument);

    // values outside the training range are not clamped
    auto g = gram(b.views, KernelId::rdtw_normalized, p);
    auto far = oracle::random_series(rng, 6, 3, 5.0);
    const SeriesView probes[] = {view_of(far), b.views[0]};
    auto c = gram_cross(probes, b.views, KernelId::rdtw_normalized, p, g.norm_bounds);
    CHECK(c(0, 0) < 1.0);
    CHECK(c(1, 0) == g(0, 0));
}

TEST_CASE("statistical: a copy of train_j peaks at column j") {
    std::mt19937_64 rng(8);
    std::size_t hits = 0, total = 0;
    for (int trial = 0; trial < 20; ++trial) {
        Bank b(rng, 15, 8, 6);
        KernelParams p;
        p.nu = 0.1;
        for (std::size_t j = 0; j < 15; ++j) {
            auto row = gram_cross(std::span<const SeriesView>(&b.views[j], 1), b.views, KernelId::rdtw, p);
            hits += std::size_t(std::max_element(row.values.begin(), row.values.end()) - row.values.begin()) == j;
            ++total;
        }
    }
    CHECK(double(hits) >= 0.95 * double(total));
}

TEST_CASE("binary and csv serialization") {
    std::mt19937_64 rng(9);
    Bank b(rng, 6, 5, 3);
    KernelParams p;
    p.nu = 0.37;
    p.alpha = 1.25;
    p.corridor_radius = 2;
    auto g = gram(b.views, KernelId::rdtw_normalized, p);
    std::stringstream buf;
    write_kernel_binary(buf, g);
    const std::string bytes = buf.str();
    CHECK(bytes.substr(0, 8) == "EKMGRAM1");
    CHECK(bytes.find("\"norm_bounds\":{") != std::string::npos);
    auto back = read_kernel_binary(buf);
    CHECK(back.values == g.values);
    CHECK(back.rows == 6);
    CHECK(back.kernel_id == g.kernel_id);
    CHECK(back.params == g.params);
    CHECK(back.norm_bounds == g.norm_bounds);

    std::stringstream again;
    write_kernel_binary(again, back);
    CHECK(again.str() == bytes);

    std::stringstream bad("NOTAGRAM........");
    CHECK(kind_of([&] { (void)read_kernel_binary(bad); }) == ErrorKind::schema);
    std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
    CHECK(kind_of([&] { (void)read_kernel_binary(truncated); }) == ErrorKind::schema);

    std::stringstream csv;
    write_kernel_csv(csv, g);
    std::string first;
    std::getline(csv, first);
    CHECK(std::count(first.begin(), first.end(), ',') == 5);
    CHECK(std::stod(first.substr(0, first.find(','))) == g(0, 0));

    test::TempDir dir("gram");
    save_kernel_binary(dir.path() / "g.bin", g);
    CHECK(load_kernel_binary(dir.path() / "g.bin").values == g.values);
    CHECK(kind_of([&] { (void)load_kernel_binary(dir.path() / "missing.bin"); }) == ErrorKind::io);
}
