#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>

#include "ekm/error.hpp"
#include "ekm/svm.hpp"
#include "helpers.hpp"

using namespace ekm;

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

GramMatrix square(std::vector<double> values, KernelId id = KernelId::euclid_rbf) {
    GramMatrix g;
    g.rows = g.cols = static_cast<std::size_t>(std::llround(std::sqrt(double(values.size()))));
    g.values = std::move(values);
    g.kernel_id = id;
    return g;
}

std::vector<double> row_of(const GramMatrix& g, std::size_t i) {
    return {g.values.begin() + std::ptrdiff_t(i * g.cols), g.values.begin() + std::ptrdiff_t((i + 1) * g.cols)};
}

void check_feasible(const BinaryDual& d, std::span<const int> labels_by_row, std::size_t n) {
    double balance = 0.0;
    for (std::size_t s = 0; s < d.alphas.size(); ++s) {
        CHECK(d.alphas[s] > 0.0);
        CHECK(d.alphas[s] <= d.C);
        CHECK(d.labels[s] == labels_by_row[d.support_indices[s]]);
        balance += d.alphas[s] * d.labels[s];
    }
    CHECK(std::abs(balance) <= 1e-8 * d.C * double(n));
}

std::size_t margin_violations(const GramMatrix& g, const BinaryDual& d, std::span<const int> y) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < g.rows; ++i) {
        auto row = row_of(g, i);
        if (y[i] * d.decision(row) < 1.0 - 1e-3) ++count;
    }
    return count;
}

}  // namespace

TEST_CASE("two points become support vectors on either side of the boundary") {
    auto g = square({1.0, 0.2, 0.2, 1.0});
    const std::vector<int> y{1, -1};
    auto d = train_binary(g, y, SmoOptions{});
    CHECK(d.converged);
    CHECK(d.support_indices.size() == 2);
    check_feasible(d, y, 2);
    CHECK(d.decision(row_of(g, 0)) > 0.0);
    CHECK(d.decision(row_of(g, 1)) < 0.0);
    CHECK(std::abs(d.decision(row_of(g, 0)) + d.decision(row_of(g, 1))) <= 1e-12);
}

TEST_CASE("conflicting duplicates with small C terminate") {
    auto g = square({1, 1, 0.3, 1, 1, 0.3, 0.3, 0.3, 1});
    const std::vector<int> y{1, -1, -1};
    SmoOptions o;
    o.C = 0.05;
    auto d = train_binary(g, y, o);
    CHECK(d.converged);
    check_feasible(d, y, 3);
    CHECK(std::isfinite(dual_objective(g, d)));
    CHECK(dual_objective(g, d) <= 3 * o.C);
}

TEST_CASE("single-class training is rejected") {
    auto g = square({1, 0.5, 0.5, 1});
    const std::vector<int> y{1, 1};
    CHECK(kind_of([&] { (void)train_binary(g, y, SmoOptions{}); }) == ErrorKind::degenerate_training);
    const std::vector<int> bad{1, 0};
    CHECK_THROWS_AS((void)train_binary(g, bad, SmoOptions{}), Error);
    SmoOptions o;
    o.C = 0.0;
    CHECK_THROWS_AS(o.validate(), Error);
}

TEST_CASE("dual objective agrees with projected gradient") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<int> y;
        auto K = oracle::random_rbf_gram(rng, 20, 3, 0.5, y);
        auto g = square(K);
        SmoOptions o;
        o.C = std::array{0.1, 1.0, 10.0}[trial % 3];
        o.tol = 1e-6;
        auto d = train_binary(g, y, o);
        CHECK(d.converged);
        check_feasible(d, y, 20);
        const double ours = dual_objective(g, d);
        const double want = oracle::solve_dual_projected_gradient(K, y, o.C).objective;
        CHECK(std::abs(ours - want) <= 1e-4 * std::abs(want));
    }
}

TEST_CASE("indefinite Gram under a lookup cap stays feasible") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(0.0, 1.0);
    const std::size_t size = 16;
    std::vector<double> K(size * size);
    for (std::size_t i = 0; i < size; ++i)
        for (std::size_t j = 0; j <= i; ++j) K[i * size + j] = K[j * size + i] = n(rng);
    REQUIRE(oracle::min_eigenvalue(K, size) < 0.0);
    auto g = square(K, KernelId::dtw_rbf);
    std::vector<int> y(size);
    for (std::size_t i = 0; i < size; ++i) y[i] = i % 2 ? -1 : 1;
    for (std::uint64_t cap : {std::uint64_t{64}, std::uint64_t{2000}, std::uint64_t{10'000'000}}) {
        SmoOptions o;
        o.C = 2.0;
        o.max_kernel_lookups = cap;
        auto d = train_binary(g, y, o);
        check_feasible(d, y, size);
        CHECK(d.iterations * 2 * size <= cap);
        CHECK(std::isfinite(d.bias));
    }
}

TEST_CASE("property: dual feasibility at every exit") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 60; ++trial) {
        std::vector<int> y;
        const std::size_t n = 4 + trial % 20;
        auto g = square(oracle::random_rbf_gram(rng, n, 2, 1.0, y));
        SmoOptions o;
        o.C = std::array{0.01, 0.5, 3.0, 50.0}[trial % 4];
        o.max_kernel_lookups = trial % 2 ? 10'000'000 : 6 * n;
        check_feasible(train_binary(g, y, o), y, n);
    }
}

TEST_CASE("property: decision values do not depend on training row order") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<int> y;
        const std::size_t n = 18;
        auto K = oracle::random_rbf_gram(rng, n, 3, 0.4, y);
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<double> Kp(n * n);
        std::vector<int> yp(n);
        for (std::size_t i = 0; i < n; ++i) {
            yp[i] = y[perm[i]];
            for (std::size_t j = 0; j < n; ++j) Kp[i * n + j] = K[perm[i] * n + perm[j]];
        }
        SmoOptions o;
        o.tol = 1e-9;
        auto a = train_binary(square(K), y, o);
        auto b = train_binary(square(Kp), yp, o);
        for (std::size_t i = 0; i < n; ++i) {
            // decision at original row perm[i] equals decision at permuted row i
            CHECK(a.decision(row_of(square(K), perm[i])) ==
                  doctest::Approx(b.decision(row_of(square(Kp), i))).epsilon(1e-6));
        }
    }
}

TEST_CASE("wide-margin 1D data: perfect fit and no interior support vectors") {
    std::vector<double> xs;
    std::vector<int> y;
    for (int i = 0; i < 10; ++i) {
        xs.push_back(-5.0 - 0.5 * i);
        y.push_back(-1);
        xs.push_back(5.0 + 0.5 * i);
        y.push_back(1);
    }
    const std::size_t n = xs.size();
    std::vector<double> K(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) K[i * n + j] = std::exp(-0.01 * std::pow(xs[i] - xs[j], 2));
    auto g = square(K);
    SmoOptions o;
    o.C = 10.0;
    auto d = train_binary(g, y, o);
    for (std::size_t i = 0; i < n; ++i) CHECK(y[i] * d.decision(row_of(g, i)) > 0.0);
    for (auto s : d.support_indices) CHECK(std::abs(xs[s]) < 6.0);
}

TEST_CASE("statistical: larger C does not add margin violations") {
    std::mt19937_64 rng(5);
    int trials = 0, ok = 0;
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<int> y;
        auto g = square(oracle::random_rbf_gram(rng, 24, 2, 0.8, y));
        SmoOptions lo, hi;
        lo.C = 0.5;
        hi.C = 5.0;
        lo.tol = hi.tol = 1e-6;
        auto a = train_binary(g, y, lo);
        auto b = train_binary(g, y, hi);
        ++trials;
        ok += margin_violations(g, b, y) <= margin_violations(g, a, y);
    }
    CHECK(double(ok) >= 0.95 * double(trials));
}

namespace {

// three well separated clusters of four points each
GramMatrix cluster_gram(std::vector<std::string>& labels) {
    const double centers[3] = {0.0, 10.0, 20.0};
    std::vector<double> xs;
    labels.clear();
    for (int c = 0; c < 3; ++c) {
        for (int i = 0; i < 4; ++i) {
            xs.push_back(centers[c] + 0.3 * i);
            labels.push_back(std::string(1, char('a' + c)));
        }
    }
    std::vector<double> K(xs.size() * xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t j = 0; j < xs.size(); ++j) K[i * xs.size() + j] = std::exp(-0.05 * std::pow(xs[i] - xs[j], 2));
    return square(K);
}

}  // namespace

TEST_CASE("one-vs-one training and prediction") {
    std::vector<std::string> labels;
    auto g = cluster_gram(labels);
    auto model = train_one_vs_one(g, labels, SmoOptions{});
    CHECK(model.class_labels == std::vector<std::string>{"a", "b", "c"});
    CHECK(model.pairwise.size() == 3);
    CHECK(model.converged());

    auto pred = predict(model, g);
    CHECK(pred.labels == labels);
    CHECK(accuracy(pred.labels, labels) == 1.0);
    for (const auto& v : pred.votes) CHECK(std::accumulate(v.begin(), v.end(), std::size_t{0}) == 3);
    for (const auto& dv : pred.decision_values) CHECK(dv.size() == 3);

    KernelMatrix none = g;
    none.rows = 0;
    none.values.clear();
    auto empty = predict(model, none);
    CHECK(empty.labels.empty());

    KernelMatrix other = g;
    other.kernel_id = KernelId::rdtw;
    CHECK(kind_of([&] { (void)predict(model, other); }) == ErrorKind::provenance_mismatch);
    other = g;
    other.params.nu = 3.0;
    CHECK(kind_of([&] { (void)predict(model, other); }) == ErrorKind::provenance_mismatch);
    other = g;
    other.cols = 11;
    other.rows = 0;
    other.values.clear();
    CHECK(kind_of([&] { (void)predict(model, other); }) == ErrorKind::provenance_mismatch);

    const std::vector<std::string> one_class(12, "a");
    CHECK(kind_of([&] { (void)train_one_vs_one(g, one_class, SmoOptions{}); }) == ErrorKind::degenerate_training);
}

TEST_CASE("model json round trip") {
    std::vector<std::string> labels;
    auto g = cluster_gram(labels);
    g.norm_bounds = NormBounds{-3.5, -0.25};
    g.kernel_id = KernelId::rdtw_normalized;
    g.params.corridor_radius = 4;
    auto model = train_one_vs_one(g, labels, SmoOptions{});
    const auto text = model_to_json(model);
    auto back = model_from_json(text);
    CHECK(model_to_json(back) == text);
    CHECK(back.provenance == model.provenance);
    CHECK(predict(back, g).decision_values == predict(model, g).decision_values);

    test::TempDir dir("svm");
    save_model(dir.path() / "m.json", model);
    CHECK(model_to_json(load_model(dir.path() / "m.json")) == text);
    CHECK_THROWS_AS((void)model_from_json("{\"format\": \"something-else\"}"), Error);
    CHECK_THROWS_AS((void)model_from_json("not json"), Error);
}
