#include "ekm/cli/latency.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>

#include "ekm/error.hpp"
#include "ekm/gram.hpp"
#include "ekm/svm.hpp"

namespace ekm::cli {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> labels_of(std::span<const MotionSequence> data) {
    std::vector<std::string> out;
    out.reserve(data.size());
    for (const auto& s : data) {
        if (!s.label()) fail(ErrorKind::invalid_argument, "sequence '" + s.id() + "' has no label");
        out.push_back(*s.label());
    }
    return out;
}

}  // namespace

void LatencyOptions::validate() const {
    if (kernels.empty()) fail(ErrorKind::invalid_argument, "latency bench needs at least one kernel");
    if (lengths.empty()) fail(ErrorKind::invalid_argument, "latency bench needs at least one length");
    for (auto L : lengths)
        if (L < 2) fail(ErrorKind::invalid_argument, "length must be at least 2");
    if (repetitions == 0) fail(ErrorKind::invalid_argument, "repetitions must be at least 1");
    if (train_workers == 0) fail(ErrorKind::invalid_argument, "worker count must be at least 1");
    if (!(C > 0.0)) fail(ErrorKind::invalid_argument, "C must be positive");
    for (const auto& k : kernels) k.params.validate();
}

double median_of_means(std::span<const double> samples) {
    if (samples.empty()) return 0.0;
    const std::size_t groups = std::min<std::size_t>(5, samples.size());
    std::vector<double> means;
    for (std::size_t g = 0; g < groups; ++g) {
        const std::size_t lo = g * samples.size() / groups, hi = (g + 1) * samples.size() / groups;
        double sum = 0.0;
        for (std::size_t i = lo; i < hi; ++i) sum += samples[i];
        means.push_back(sum / double(hi - lo));
    }
    std::sort(means.begin(), means.end());
    const std::size_t m = means.size();
    return m % 2 ? means[m / 2] : 0.5 * (means[m / 2 - 1] + means[m / 2]);
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        fail(ErrorKind::invalid_argument, "slope fit needs at least two paired points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) fail(ErrorKind::domain, "log-log fit needs positive values");
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= double(x.size());
    my /= double(x.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    if (sxx == 0.0) fail(ErrorKind::domain, "log-log fit needs distinct x values");
    return sxy / sxx;
}

std::vector<LatencyRow> bench_latency(std::span<const MotionSequence> data, const LatencyOptions& opts) {
    opts.validate();
    if (data.size() < 2) fail(ErrorKind::invalid_argument, "latency bench needs at least two sequences");
    const auto labels = labels_of(data);
    const auto descriptor = descriptor_preset(opts.descriptor, *data.front().topology());

    struct Cell {
        KernelConfig kernel;
        const std::vector<MotionSequence>* fixed = nullptr;
        std::optional<NormBounds> bounds;
        SvmModel model;
        std::vector<double> ms;
    };
    std::vector<std::vector<MotionSequence>> resampled;
    resampled.reserve(opts.lengths.size());
    for (auto L : opts.lengths) resampled.push_back(preprocess(data, descriptor, opts.mode, L, opts.train_workers));

    std::vector<Cell> cells;
    for (const auto& k : opts.kernels) {
        for (const auto& fixed : resampled) {
            const auto g = gram(fixed, k.id, k.params, opts.train_workers);
            SmoOptions smo;
            smo.C = opts.C;
            cells.push_back({k, &fixed, g.norm_bounds, train_one_vs_one(g, labels, smo), {}});
        }
    }

    using clock = std::chrono::steady_clock;
    auto classify_one = [](const Cell& c, std::size_t probe) {
        const auto& fixed = *c.fixed;
        const auto one = std::span<const MotionSequence>(&fixed[probe % fixed.size()], 1);
        const auto cross = gram_cross(one, fixed, c.kernel.id, c.kernel.params, c.bounds, 1);
        return predict(c.model, cross).labels.size();
    };
    // round-robin over cells so slow phases of the machine hit every cell alike
    for (std::size_t w = 0; w < opts.warmup; ++w)
        for (const auto& c : cells) (void)classify_one(c, w);
    for (std::size_t r = 0; r < opts.repetitions; ++r) {
        for (auto& c : cells) {
            const auto t0 = clock::now();
            const auto n = classify_one(c, opts.warmup + r);
            const auto t1 = clock::now();
            if (n != 1) fail(ErrorKind::invalid_argument, "classification returned no label");
            c.ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
        }
    }

    std::vector<LatencyRow> rows;
    for (const auto& c : cells) {
        LatencyRow row;
        row.kernel = c.kernel;
        row.length = c.fixed->front().length();
        row.train_size = c.fixed->size();
        row.repetitions = c.ms.size();
        double sum = 0.0;
        for (double v : c.ms) sum += v;
        row.mean_ms = sum / double(c.ms.size());
        row.median_of_means_ms = median_of_means(c.ms);
        row.min_ms = *std::min_element(c.ms.begin(), c.ms.end());
        row.low_confidence = c.ms.size() < 30;
        rows.push_back(row);
    }
    return rows;
}

void write_latency_csv(std::ostream& out, std::span<const LatencyRow> rows) {
    out << "kernel,nu,alpha,corridor,L,train_size,repetitions,mean_ms,median_of_means_ms,min_ms,low_confidence\n";
    for (const auto& r : rows) {
        const auto& p = r.kernel.params;
        out << to_string(r.kernel.id) << ',' << fmt(p.nu) << ',' << fmt(p.alpha) << ','
            << (p.corridor_radius ? std::to_string(*p.corridor_radius) : std::string("none")) << ','
            << r.length << ',' << r.train_size << ',' << r.repetitions << ',' << fmt(r.mean_ms) << ','
            << fmt(r.median_of_means_ms) << ',' << fmt(r.min_ms) << ',' << (r.low_confidence ? 1 : 0) << '\n';
    }
}

}  // namespace ekm::cli
