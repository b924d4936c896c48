#include "ekm/downsample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ekm/error.hpp"

namespace ekm {

namespace {

void check_lengths(std::size_t source_length, std::size_t target_length) {
    if (target_length < 2)
        fail(ErrorKind::invalid_argument,
             "target length must be at least 2, got " + std::to_string(target_length));
    if (target_length > source_length)
        fail(ErrorKind::invalid_argument,
             "target length " + std::to_string(target_length) + " exceeds source length " +
                 std::to_string(source_length) + "; use resample_to_length to up-sample");
}

// Squared residual of frame t against the chord between kept frames a < t < b.
double chord_residual_sq(SeriesView s, std::size_t a, std::size_t b, std::size_t t) {
    const double w = static_cast<double>(t - a) / static_cast<double>(b - a);
    auto ya = s.pose(a);
    auto yb = s.pose(b);
    auto yt = s.pose(t);
    double acc = 0.0;
    for (std::size_t c = 0; c < s.dim; ++c) {
        const double r = yt[c] - (ya[c] + w * (yb[c] - ya[c]));
        acc += r * r;
    }
    return acc;
}

}  // namespace

void DownsamplePlan::validate() const {
    if (indices.size() < 2) fail(ErrorKind::invalid_plan, "plan must keep at least 2 frames");
    if (source_length == 0) fail(ErrorKind::invalid_plan, "plan has empty source");
    if (indices.front() != 0 || indices.back() != source_length - 1)
        fail(ErrorKind::invalid_plan, "plan must keep both endpoints");
    for (std::size_t i = 1; i < indices.size(); ++i) {
        if (indices[i] <= indices[i - 1])
            fail(ErrorKind::invalid_plan, "plan indices must be strictly increasing");
    }
    if (!(rms_error >= 0.0)) fail(ErrorKind::invalid_plan, "plan rms error must be non-negative");
}

std::string_view to_string(DownsampleMode mode) noexcept {
    switch (mode) {
        case DownsampleMode::uniform: return "uniform";
        case DownsampleMode::adaptive_greedy: return "adaptive-greedy";
        case DownsampleMode::adaptive_optimal: return "adaptive-optimal";
    }
    return "unknown";
}

DownsampleMode parse_downsample_mode(std::string_view name) {
    if (name == "uniform" || name == "uds") return DownsampleMode::uniform;
    if (name == "adaptive-greedy" || name == "ads") return DownsampleMode::adaptive_greedy;
    if (name == "adaptive-optimal") return DownsampleMode::adaptive_optimal;
    fail(ErrorKind::invalid_argument, "unknown down-sampling mode '" + std::string(name) + "'");
}

double reconstruction_sse(SeriesView seq, std::span<const std::size_t> indices) {
    double sse = 0.0;
    for (std::size_t s = 1; s < indices.size(); ++s) {
        for (std::size_t t = indices[s - 1] + 1; t < indices[s]; ++t)
            sse += chord_residual_sq(seq, indices[s - 1], indices[s], t);
    }
    return sse;
}

double reconstruction_rms(SeriesView seq, std::span<const std::size_t> indices) {
    const double n = static_cast<double>(seq.length) * static_cast<double>(seq.dim);
    return std::sqrt(reconstruction_sse(seq, indices) / n);
}

DownsamplePlan uniform_plan(std::size_t source_length, std::size_t target_length) {
    check_lengths(source_length, target_length);
    DownsamplePlan plan;
    plan.source_length = source_length;
    plan.indices.resize(target_length);
    const std::size_t span = source_length - 1;
    const std::size_t steps = target_length - 1;
    // round-half-up of i * span / steps in integer arithmetic
    for (std::size_t i = 0; i < target_length; ++i)
        plan.indices[i] = (2 * i * span + steps) / (2 * steps);
    return plan;
}

DownsamplePlan uniform_plan(SeriesView seq, std::size_t target_length) {
    auto plan = uniform_plan(seq.length, target_length);
    plan.rms_error = reconstruction_rms(seq, plan.indices);
    return plan;
}

DownsamplePlan uniform_plan(const MotionSequence& seq, std::size_t target_length) {
    return uniform_plan(seq.view(), target_length);
}

DownsamplePlan adaptive_plan_greedy(const MotionSequence& seq, std::size_t target_length) {
    return adaptive_plan_greedy(seq.view(), target_length);
}

DownsamplePlan adaptive_plan_optimal(const MotionSequence& seq, std::size_t target_length,
                                     std::size_t cap) {
    return adaptive_plan_optimal(seq.view(), target_length, cap);
}

DownsamplePlan adaptive_plan_greedy(SeriesView view, std::size_t target_length) {
    const std::size_t T = view.length;
    check_lengths(T, target_length);

    // residual[t] is the squared distance of frame t to its current chord.
    std::vector<char> kept(T, 0);
    kept[0] = kept[T - 1] = 1;
    std::vector<double> residual(T, 0.0);
    auto refresh = [&](std::size_t a, std::size_t b) {
        for (std::size_t t = a + 1; t < b; ++t) residual[t] = chord_residual_sq(view, a, b, t);
    };
    refresh(0, T - 1);

    for (std::size_t held = 2; held < target_length; ++held) {
        std::size_t best = T;
        double best_err = -1.0;
        for (std::size_t t = 1; t + 1 < T; ++t) {
            if (!kept[t] && residual[t] > best_err) {
                best_err = residual[t];
                best = t;
            }
        }
        kept[best] = 1;
        residual[best] = 0.0;
        std::size_t a = best;
        while (!kept[--a]) {}
        std::size_t b = best;
        while (!kept[++b]) {}
        refresh(a, best);
        refresh(best, b);
    }

    DownsamplePlan plan;
    plan.source_length = T;
    for (std::size_t t = 0; t < T; ++t) {
        if (kept[t]) plan.indices.push_back(t);
    }
    plan.rms_error = reconstruction_rms(view, plan.indices);

    // insertion can lose to even spacing on oscillating signals
    auto even = uniform_plan(view, target_length);
    if (even.rms_error < plan.rms_error) return even;
    return plan;
}

DownsamplePlan adaptive_plan_optimal(SeriesView view, std::size_t target_length, std::size_t cap) {
    const std::size_t T = view.length;
    check_lengths(T, target_length);
    if (T > cap)
        fail(ErrorKind::oversized_input,
             "sequence of length " + std::to_string(T) + " exceeds the optimal planner cap of " +
                 std::to_string(cap) + "; use the greedy planner");
    const std::size_t L = target_length;

    // cost[i * T + j]: squared residual of frames strictly between kept i and j.
    std::vector<double> cost(T * T, 0.0);
    for (std::size_t i = 0; i < T; ++i) {
        for (std::size_t j = i + 2; j < T; ++j) {
            double c = 0.0;
            for (std::size_t t = i + 1; t < j; ++t) c += chord_residual_sq(view, i, j, t);
            cost[i * T + j] = c;
        }
    }

    // best[m][i]: least cost to cover [i, T-1] with m kept frames starting at i.
    constexpr double inf = std::numeric_limits<double>::infinity();
    // summation order differs between candidate sets, so exact ties are
    // detected against the scale of the coarsest plan
    const double tie = kOptimalTieTolerance * cost[T - 1];
    std::vector<std::vector<double>> best(L + 1, std::vector<double>(T, inf));
    std::vector<std::vector<std::size_t>> next(L + 1, std::vector<std::size_t>(T, T));
    for (std::size_t i = 0; i + 1 < T; ++i) {
        best[2][i] = cost[i * T + (T - 1)];
        next[2][i] = T - 1;
    }
    for (std::size_t m = 3; m <= L; ++m) {
        for (std::size_t i = 0; i + m <= T; ++i) {
            // the remaining m-1 frames start at j and need j + m - 2 <= T - 1
            double low = inf;
            for (std::size_t j = i + 1; j + m - 1 <= T; ++j) low = std::min(low, cost[i * T + j] + best[m - 1][j]);
            for (std::size_t j = i + 1; j + m - 1 <= T; ++j) {
                const double c = cost[i * T + j] + best[m - 1][j];
                if (c <= low + tie) {
                    best[m][i] = c;
                    next[m][i] = j;
                    break;
                }
            }
        }
    }

    DownsamplePlan plan;
    plan.source_length = T;
    std::size_t at = 0;
    plan.indices.push_back(0);
    for (std::size_t m = L; m >= 2; --m) {
        at = next[m][at];
        plan.indices.push_back(at);
    }
    plan.rms_error = reconstruction_rms(view, plan.indices);
    return plan;
}

DownsamplePlan make_plan(const MotionSequence& seq, std::size_t target_length, DownsampleMode mode,
                         std::size_t optimal_cap) {
    switch (mode) {
        case DownsampleMode::uniform: return uniform_plan(seq, target_length);
        case DownsampleMode::adaptive_greedy: return adaptive_plan_greedy(seq, target_length);
        case DownsampleMode::adaptive_optimal:
            return adaptive_plan_optimal(seq, target_length, optimal_cap);
    }
    fail(ErrorKind::invalid_argument, "unknown down-sampling mode");
}

MotionSequence apply_plan(const MotionSequence& seq, const DownsamplePlan& plan) {
    if (plan.source_length != seq.length())
        fail(ErrorKind::invalid_plan, "plan built for length " + std::to_string(plan.source_length) +
                                          " applied to a sequence of length " +
                                          std::to_string(seq.length()));
    plan.validate();
    const std::size_t k = seq.dim();
    std::vector<double> out;
    out.reserve(plan.indices.size() * k);
    std::vector<double> times;
    times.reserve(plan.indices.size());
    for (auto idx : plan.indices) {
        auto p = seq.pose(idx);
        out.insert(out.end(), p.begin(), p.end());
        times.push_back(seq.time_at(idx));
    }
    return seq.with_poses(seq.topology(), std::move(out)).with_timestamps(std::move(times));
}

MotionSequence reconstruct_linear(const MotionSequence& seq, const DownsamplePlan& plan) {
    plan.validate();
    const std::size_t T = plan.source_length;
    const std::size_t L = plan.indices.size();
    const bool reduced = seq.length() != T;
    if (reduced && seq.length() != L)
        fail(ErrorKind::invalid_plan, "sequence length matches neither the plan source nor target");
    auto kept_pose = [&](std::size_t s) { return seq.pose(reduced ? s : plan.indices[s]); };

    const std::size_t k = seq.dim();
    std::vector<double> out(T * k);
    for (std::size_t s = 1; s < L; ++s) {
        const std::size_t a = plan.indices[s - 1];
        const std::size_t b = plan.indices[s];
        auto ya = kept_pose(s - 1);
        auto yb = kept_pose(s);
        for (std::size_t t = a; t <= b; ++t) {
            const double w = static_cast<double>(t - a) / static_cast<double>(b - a);
            for (std::size_t c = 0; c < k; ++c) out[t * k + c] = ya[c] + w * (yb[c] - ya[c]);
        }
    }
    return seq.with_poses(seq.topology(), std::move(out));
}

MotionSequence resample_to_length(const MotionSequence& seq, std::size_t target_length,
                                  DownsampleMode mode) {
    if (target_length < 2)
        fail(ErrorKind::invalid_argument, "target length must be at least 2");
    const std::size_t T = seq.length();
    if (T >= target_length) return apply_plan(seq, make_plan(seq, target_length, mode));

    const std::size_t k = seq.dim();
    std::vector<double> out(target_length * k);
    std::vector<double> times(target_length);
    for (std::size_t i = 0; i < target_length; ++i) {
        const double pos = static_cast<double>(i) * static_cast<double>(T - 1) /
                           static_cast<double>(target_length - 1);
        std::size_t a = std::min(static_cast<std::size_t>(pos), T - 1);
        std::size_t b = std::min(a + 1, T - 1);
        const double w = pos - static_cast<double>(a);
        auto ya = seq.pose(a);
        auto yb = seq.pose(b);
        for (std::size_t c = 0; c < k; ++c) out[i * k + c] = ya[c] + w * (yb[c] - ya[c]);
        times[i] = seq.time_at(a) + w * (seq.time_at(b) - seq.time_at(a));
    }
    auto result = seq.with_poses(seq.topology(), std::move(out));
    if (T >= 2) result = result.with_timestamps(std::move(times));
    return result;
}

}  // namespace ekm
