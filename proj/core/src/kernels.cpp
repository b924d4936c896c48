#include "ekm/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ekm/error.hpp"

namespace ekm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kUnderflowFloor = 1e-300;

void check_pair(SeriesView x, SeriesView y) {
    if (x.length == 0 || y.length == 0) fail(ErrorKind::empty_sequence, "kernel input is empty");
    if (x.dim != y.dim)
        fail(ErrorKind::dimension_mismatch, "pose dimensions differ: " + std::to_string(x.dim) +
                                                " vs " + std::to_string(y.dim));
}

void check_equal_length(SeriesView x, SeriesView y, std::string_view what) {
    if (x.length != y.length)
        fail(ErrorKind::fixed_length_required,
             std::string(what) + " requires equal-length sequences, got " +
                 std::to_string(x.length) + " and " + std::to_string(y.length));
}

bool in_band(std::size_t p, std::size_t q, std::optional<std::size_t> radius) {
    if (!radius) return true;
    return (p > q ? p - q : q - p) <= *radius;
}

// (up + left) + diag: swapping the two sequences swaps up and left, and IEEE
// addition is commutative, so the recursions stay bit-symmetric.
double log_sum_exp(double up, double left, double diag) {
    const double m = std::max({up, left, diag});
    if (m == -kInf) return -kInf;
    return m + std::log((std::exp(up - m) + std::exp(left - m)) + std::exp(diag - m));
}

// Shared pairwise and diagonal squared distances for the rdtw recursions.
struct LocalCosts {
    std::size_t n = 0;
    std::vector<double> cross;  // d^2(x(p), y(q)), 1-based p,q packed row-major
    std::vector<double> diag;   // d^2(x(p), y(p))

    LocalCosts(SeriesView x, SeriesView y, std::optional<std::size_t> radius) : n(x.length) {
        cross.assign(n * n, 0.0);
        diag.assign(n, 0.0);
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = 0; q < n; ++q) {
                if (in_band(p, q, radius)) cross[p * n + q] = euclidean_sq(x.pose(p), y.pose(q));
            }
            diag[p] = cross[p * n + p];
        }
    }
    double at(std::size_t p, std::size_t q) const { return cross[(p - 1) * n + (q - 1)]; }
    double on_diag(std::size_t p) const { return diag[p - 1]; }
};

// Direct-product recursion. Returns false when a live cell underflows.
bool rdtw_direct(const LocalCosts& lc, double nu, std::optional<std::size_t> radius, double& out) {
    const std::size_t n = lc.n;
    const std::size_t w = n + 1;
    std::vector<double> kxy(w * w, 0.0);
    std::vector<double> kxx(w * w, 0.0);
    kxy[0] = kxx[0] = 1.0;
    std::vector<double> diag_factor(n + 1, 0.0);
    for (std::size_t p = 1; p <= n; ++p) diag_factor[p] = std::exp(-nu * lc.on_diag(p));

    for (std::size_t p = 1; p <= n; ++p) {
        for (std::size_t q = 1; q <= n; ++q) {
            if (!in_band(p, q, radius)) continue;
            const double local = std::exp(-nu * lc.at(p, q));
            const double up = kxy[(p - 1) * w + q];
            const double diag = kxy[(p - 1) * w + (q - 1)];
            const double left = kxy[p * w + (q - 1)];
            const double xy = local * ((up + left) + diag) / 3.0;

            double xx = kxx[(p - 1) * w + q] * diag_factor[p] + kxx[p * w + (q - 1)] * diag_factor[q];
            if (p == q) xx += kxx[(p - 1) * w + (q - 1)] * local;
            xx /= 3.0;

            if (xy < kUnderflowFloor || xx < kUnderflowFloor) return false;
            kxy[p * w + q] = xy;
            kxx[p * w + q] = xx;
        }
    }
    out = std::log(kxy[n * w + n] + kxx[n * w + n]);
    return true;
}

double rdtw_logspace(const LocalCosts& lc, double nu, std::optional<std::size_t> radius) {
    const std::size_t n = lc.n;
    const std::size_t w = n + 1;
    const double log_third = -std::log(3.0);
    std::vector<double> lxy(w * w, -kInf);
    std::vector<double> lxx(w * w, -kInf);
    lxy[0] = lxx[0] = 0.0;

    for (std::size_t p = 1; p <= n; ++p) {
        for (std::size_t q = 1; q <= n; ++q) {
            if (!in_band(p, q, radius)) continue;
            const double local = -nu * lc.at(p, q);
            lxy[p * w + q] = log_third + local +
                             log_sum_exp(lxy[(p - 1) * w + q], lxy[p * w + (q - 1)],
                                         lxy[(p - 1) * w + (q - 1)]);
            const double mid = p == q ? lxx[(p - 1) * w + (q - 1)] + local : -kInf;
            lxx[p * w + q] = log_third + log_sum_exp(lxx[(p - 1) * w + q] - nu * lc.on_diag(p),
                                                     lxx[p * w + (q - 1)] - nu * lc.on_diag(q), mid);
        }
    }
    const double a = lxy[n * w + n];
    const double b = lxx[n * w + n];
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace

std::string_view to_string(KernelId id) noexcept {
    switch (id) {
        case KernelId::euclid_rbf: return "euclid_rbf";
        case KernelId::dtw_rbf: return "dtw_rbf";
        case KernelId::rdtw: return "rdtw";
        case KernelId::rdtw_normalized: return "rdtw_normalized";
    }
    return "unknown";
}

KernelId parse_kernel_id(std::string_view name) {
    if (name == "euclid_rbf") return KernelId::euclid_rbf;
    if (name == "dtw_rbf") return KernelId::dtw_rbf;
    if (name == "rdtw") return KernelId::rdtw;
    if (name == "rdtw_normalized") return KernelId::rdtw_normalized;
    fail(ErrorKind::invalid_argument, "unknown kernel '" + std::string(name) + "'");
}

void KernelParams::validate() const {
    if (!(nu > 0.0) || !std::isfinite(nu)) fail(ErrorKind::invalid_argument, "nu must be positive");
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        fail(ErrorKind::invalid_argument, "alpha must be positive");
}

double euclidean_sq(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        fail(ErrorKind::dimension_mismatch, "pose dimensions differ: " + std::to_string(a.size()) +
                                                " vs " + std::to_string(b.size()));
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

double dtw_distance(SeriesView x, SeriesView y, std::optional<std::size_t> corridor_radius) {
    check_pair(x, y);
    const std::size_t n = x.length;
    const std::size_t m = y.length;
    const std::size_t w = m + 1;
    std::vector<double> table((n + 1) * w, kInf);
    table[0] = 0.0;
    for (std::size_t p = 1; p <= n; ++p) {
        for (std::size_t q = 1; q <= m; ++q) {
            if (!in_band(p, q, corridor_radius)) continue;
            const double best = std::min({table[(p - 1) * w + q], table[(p - 1) * w + (q - 1)],
                                          table[p * w + (q - 1)]});
            if (best == kInf) continue;
            table[p * w + q] = euclidean_sq(x.pose(p - 1), y.pose(q - 1)) + best;
        }
    }
    return table[n * w + m];
}

double dtw_rbf(SeriesView x, SeriesView y, const KernelParams& params) {
    params.validate();
    return std::exp(-params.nu * dtw_distance(x, y, params.corridor_radius));
}

double euclid_rbf_kernel(SeriesView x, SeriesView y, const KernelParams& params) {
    return std::exp(log_kernel(KernelId::euclid_rbf, x, y, params));
}

double rdtw_log_kernel(SeriesView x, SeriesView y, const KernelParams& params) {
    params.validate();
    check_pair(x, y);
    check_equal_length(x, y, "the rdtw kernel");
    const LocalCosts lc(x, y, params.corridor_radius);
    double out = 0.0;
    if (rdtw_direct(lc, params.nu, params.corridor_radius, out)) return out;
    return rdtw_logspace(lc, params.nu, params.corridor_radius);
}

double rdtw_kernel(SeriesView x, SeriesView y, const KernelParams& params) {
    return std::exp(rdtw_log_kernel(x, y, params));
}

double NormBounds::apply(double log_k, double alpha) const {
    return std::exp(alpha * ((log_k - log_min) / (log_max - log_min)));
}

double log_kernel(KernelId id, SeriesView x, SeriesView y, const KernelParams& params) {
    switch (id) {
        case KernelId::euclid_rbf: {
            params.validate();
            check_pair(x, y);
            check_equal_length(x, y, "the Euclidean kernel");
            double acc = 0.0;
            for (std::size_t t = 0; t < x.length; ++t) acc += euclidean_sq(x.pose(t), y.pose(t));
            return -params.nu * acc;
        }
        case KernelId::dtw_rbf:
            params.validate();
            return -params.nu * dtw_distance(x, y, params.corridor_radius);
        case KernelId::rdtw:
        case KernelId::rdtw_normalized: return rdtw_log_kernel(x, y, params);
    }
    fail(ErrorKind::invalid_argument, "unknown kernel");
}

}  // namespace ekm
