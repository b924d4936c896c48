#include <doctest.h>

#include <cmath>
#include <array>
#include <cstring>
#include <random>

#include "ekm/error.hpp"
#include "ekm/gram.hpp"
#include "ekm/kernels.hpp"
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

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("euclidean_sq") {
    const std::vector<double> z{0, 0, 0}, b{1, 2, 2};
    CHECK(euclidean_sq(z, z) == 0.0);
    CHECK(euclidean_sq(z, b) == 9.0);
    CHECK(kind_of([&] { (void)euclidean_sq(z, std::vector<double>{1, 2}); }) == ErrorKind::dimension_mismatch);

    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 100; ++trial) {
        auto s = oracle::random_series(rng, 2, 12);
        double naive = 0.0;
        for (std::size_t c = 12; c-- > 0;) naive += (s.at(0, c) - s.at(1, c)) * (s.at(0, c) - s.at(1, c));
        auto v = view_of(s);
        CHECK(std::abs(euclidean_sq(v.pose(0), v.pose(1)) - naive) <= 1e-12 * (1.0 + naive));
    }
}

TEST_CASE("dtw_distance examples") {
    std::mt19937_64 rng(2);
    auto x = oracle::random_series(rng, 7, 3);
    CHECK(dtw_distance(view_of(x), view_of(x)) == 0.0);

    auto a = oracle::random_series(rng, 1, 3), b = oracle::random_series(rng, 1, 3);
    CHECK(dtw_distance(view_of(a), view_of(b)) == oracle::sq_dist(a, 0, b, 0));

    auto empty = oracle::Series{0, 3, {}};
    CHECK(kind_of([&] { (void)dtw_distance(view_of(empty), view_of(a)); }) == ErrorKind::empty_sequence);
    auto other_dim = oracle::random_series(rng, 2, 2);
    CHECK(kind_of([&] { (void)dtw_distance(view_of(other_dim), view_of(a)); }) == ErrorKind::dimension_mismatch);
}

TEST_CASE("property: dtw matches path enumeration, is symmetric, and respects the corridor") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<std::size_t> len(1, 6), dim(1, 4);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t k = dim(rng);
        auto x = oracle::random_series(rng, len(rng), k);
        auto y = oracle::random_series(rng, len(rng), k);
        const double d = dtw_distance(view_of(x), view_of(y));
        CHECK(std::abs(d - oracle::dtw_by_path_enumeration(x, y)) <= 1e-9);
        CHECK(d == dtw_distance(view_of(y), view_of(x)));
        CHECK(dtw_distance(view_of(x), view_of(y), std::size_t{1000}) == d);

        double prev = d;
        for (std::size_t r = 6; r-- > 0;) {
            const double banded = dtw_distance(view_of(x), view_of(y), r);
            CHECK(banded >= prev);
            prev = banded;
        }
    }
}

TEST_CASE("dtw corridor that admits no path yields infinity") {
    std::mt19937_64 rng(4);
    auto x = oracle::random_series(rng, 2, 3), y = oracle::random_series(rng, 6, 3);
    CHECK(std::isinf(dtw_distance(view_of(x), view_of(y), std::size_t{1})));
    KernelParams p;
    p.corridor_radius = 1;
    CHECK(dtw_rbf(view_of(x), view_of(y), p) == 0.0);
}

TEST_CASE("dtw_rbf") {
    std::mt19937_64 rng(5);
    auto x = oracle::random_series(rng, 5, 3), y = oracle::random_series(rng, 4, 3);
    KernelParams p;
    CHECK(dtw_rbf(view_of(x), view_of(x), p) == 1.0);
    p.nu = 0.5;
    CHECK(dtw_rbf(view_of(x), view_of(y), p) == std::exp(-0.5 * dtw_distance(view_of(x), view_of(y))));

    double prev = 1.0;
    for (double nu : {0.01, 0.1, 1.0, 10.0, 100.0}) {
        p.nu = nu;
        const double v = dtw_rbf(view_of(x), view_of(y), p);
        CHECK(v < prev);
        prev = v;
    }
    CHECK(prev < 1e-10);
}

TEST_CASE("euclid_rbf_kernel") {
    std::mt19937_64 rng(6);
    auto x = oracle::random_series(rng, 6, 3), y = oracle::random_series(rng, 6, 3);
    KernelParams p;
    CHECK(euclid_rbf_kernel(view_of(x), view_of(x), p) == 1.0);
    double prev = 1.0;
    for (double nu : {0.01, 0.1, 1.0, 10.0}) {
        p.nu = nu;
        const double v = euclid_rbf_kernel(view_of(x), view_of(y), p);
        CHECK(v < prev);
        prev = v;
    }
    auto shorter = oracle::random_series(rng, 5, 3);
    CHECK(kind_of([&] { (void)euclid_rbf_kernel(view_of(x), view_of(shorter), p); }) ==
          ErrorKind::fixed_length_required);

    // poses ten units apart along x with sub-unit jitter: any non-diagonal
    // alignment pays at least one cross-frame cost near 100
    std::uniform_real_distribution<double> jitter(-0.1, 0.1);
    oracle::Series a{8, 3, std::vector<double>(24, 0.0)}, b = a;
    for (std::size_t t = 0; t < 8; ++t) {
        a.values[t * 3] = 10.0 * double(t);
        for (std::size_t c = 0; c < 3; ++c) b.values[t * 3 + c] = a.values[t * 3 + c] + jitter(rng);
    }
    p.nu = 0.3;
    CHECK(euclid_rbf_kernel(view_of(a), view_of(b), p) ==
          doctest::Approx(dtw_rbf(view_of(a), view_of(b), p)).epsilon(1e-14));
}

TEST_CASE("rdtw hand expansion of the 1x1 table") {
    // K^xy(1,1) = e/3 and K^xx(1,1) = e/3 where e = exp(-nu d^2)
    const std::vector<double> x{0, 0, 0}, y{1, 2, 2};
    KernelParams p;
    p.nu = 0.25;
    const double e = std::exp(-0.25 * 9.0);
    CHECK(rdtw_kernel({x, 1, 3}, {y, 1, 3}, p) == doctest::Approx(2.0 * e / 3.0).epsilon(1e-15));
    CHECK(rdtw_kernel({x, 1, 3}, {x, 1, 3}, p) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("rdtw hand expansion of the 2x2 table") {
    std::mt19937_64 rng(7);
    auto x = oracle::random_series(rng, 2, 3), y = oracle::random_series(rng, 2, 3);
    const double nu = 0.4;
    auto E = [&](std::size_t p, std::size_t q) { return std::exp(-nu * oracle::sq_dist(x, p - 1, y, q - 1)); };
    const double a = E(1, 1), b = E(1, 2), c = E(2, 1), e = E(2, 2);
    const double kxy = e / 3.0 * (a * b / 9.0 + a / 3.0 + a * c / 9.0);
    const double kxx = (a * e * e / 9.0 + a * e / 3.0 + a * e * e / 9.0) / 3.0;
    KernelParams p;
    p.nu = nu;
    CHECK(rdtw_kernel(view_of(x), view_of(y), p) == doctest::Approx(kxy + kxx).epsilon(1e-14));
}

TEST_CASE("property: rdtw matches the literal recursion, with and without corridor") {
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<std::size_t> len(1, 9), dim(1, 6);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = len(rng), k = dim(rng);
        auto x = oracle::random_series(rng, n, k), y = oracle::random_series(rng, n, k);
        KernelParams p;
        p.nu = std::uniform_real_distribution<double>(0.01, 3.0)(rng);
        const long radius = trial % 3 == 0 ? long(trial % 4) : -1;
        if (radius >= 0) p.corridor_radius = std::size_t(radius);
        const double got = rdtw_log_kernel(view_of(x), view_of(y), p);
        const double want = double(oracle::rdtw_log_long_double(x, y, p.nu, radius));
        CHECK(std::abs(got - want) <= 1e-11 * (1.0 + std::abs(want)));
    }
}

TEST_CASE("rdtw stays finite in log space where direct products underflow") {
    std::mt19937_64 rng(9);
    auto x = oracle::random_series(rng, 30, 9), y = oracle::random_series(rng, 30, 9);
    KernelParams p;
    p.nu = 5.0;
    const double got = rdtw_log_kernel(view_of(x), view_of(y), p);
    const long double want = oracle::rdtw_log_long_double(x, y, p.nu);
    REQUIRE(std::isfinite(got));
    CHECK(got < std::log(1e-300));
    CHECK(std::abs(got - double(want)) <= 1e-10 * std::abs(double(want)));
    CHECK(kind_of([&] { (void)rdtw_kernel(view_of(x), view_of(oracle::random_series(rng, 29, 9)), p); }) ==
          ErrorKind::fixed_length_required);
}

TEST_CASE("property: rdtw is bit-symmetric and strictly positive") {
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + trial % 12;
        auto x = oracle::random_series(rng, n, 6), y = oracle::random_series(rng, n, 6);
        KernelParams p;
        p.nu = trial % 2 ? 0.05 : 2.0;
        const double xy = rdtw_log_kernel(view_of(x), view_of(y), p);
        const double yx = rdtw_log_kernel(view_of(y), view_of(x), p);
        CHECK(same_bits(xy, yx));
        CHECK(std::isfinite(xy));
        CHECK(rdtw_kernel(view_of(x), view_of(y), p) > 0.0);
    }
}

TEST_CASE("property: rdtw Gram over random short sequences is positive semi-definite") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<oracle::Series> store;
        for (int i = 0; i < 20; ++i) store.push_back(oracle::random_series(rng, 6, 3));
        std::vector<SeriesView> views;
        for (const auto& s : store) views.push_back(view_of(s));
        KernelParams p;
        p.nu = std::array{0.05, 0.2, 1.0}[trial % 3];
        auto g = gram(views, KernelId::rdtw, p);
        const double lo = oracle::min_eigenvalue(g.values, 20);
        const double hi = oracle::max_eigenvalue(g.values, 20);
        CHECK(lo >= -1e-8 * hi);
    }
}

TEST_CASE("normalization bounds") {
    NormBounds b{-10.0, -2.0};
    CHECK(b.apply(-10.0, 1.5) == 1.0);
    CHECK(b.apply(-2.0, 1.5) == std::exp(1.5));
    CHECK(b.apply(-1.0, 1.0) > std::exp(1.0));
    CHECK(b.apply(-11.0, 1.0) < 1.0);
}

TEST_CASE("kernel names and parameters") {
    for (auto id : {KernelId::euclid_rbf, KernelId::dtw_rbf, KernelId::rdtw, KernelId::rdtw_normalized})
        CHECK(parse_kernel_id(to_string(id)) == id);
    CHECK(kind_of([] { (void)parse_kernel_id("twed"); }) == ErrorKind::invalid_argument);
    KernelParams p;
    p.nu = 0.0;
    CHECK_THROWS_AS(p.validate(), Error);
    p.nu = 1.0;
    p.alpha = -1.0;
    CHECK_THROWS_AS(p.validate(), Error);
}
