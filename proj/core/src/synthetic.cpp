#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "ekm/dataio.hpp"
#include "ekm/error.hpp"

namespace ekm {

namespace {

constexpr std::size_t kPrototypeSamples = 256;
constexpr int kSinusoids = 3;

enum Stream : std::uint64_t { prototype_stream = 1, instance_stream = 2 };

std::mt19937_64 stream_rng(std::uint64_t seed, Stream stream, std::uint64_t a, std::uint64_t b = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(a),
                      static_cast<std::uint32_t>(b)};
    return std::mt19937_64(seq);
}

}  // namespace

void SyntheticSpec::validate() const {
    if (n_classes == 0 || sequences_per_class == 0)
        fail(ErrorKind::invalid_argument, "synthetic spec needs at least one class and sequence");
    if (min_length < 2 || max_length < min_length)
        fail(ErrorKind::invalid_argument, "synthetic length range must satisfy 2 <= min <= max");
    if (pose_dim == 0 || pose_dim % 3 != 0)
        fail(ErrorKind::invalid_argument, "synthetic pose dimension must be a positive multiple of 3");
    if (!(warp_intensity >= 0.0 && warp_intensity <= 1.0))
        fail(ErrorKind::invalid_argument, "warp intensity must lie in [0, 1]");
    if (!(noise_sigma >= 0.0) || !(translation_sigma >= 0.0))
        fail(ErrorKind::invalid_argument, "noise and translation sigmas must be non-negative");
    if (n_subjects == 0) fail(ErrorKind::invalid_argument, "need at least one subject");
    if (!(sample_rate_hz > 0.0)) fail(ErrorKind::invalid_argument, "sample rate must be positive");
}

std::vector<double> synthetic_prototype(const SyntheticSpec& spec, std::size_t class_index,
                                        std::size_t samples) {
    spec.validate();
    if (samples < 2) fail(ErrorKind::invalid_argument, "prototype needs at least 2 samples");
    auto rng = stream_rng(spec.seed, prototype_stream, class_index);
    std::normal_distribution<double> amp(0.0, 1.0);
    std::uniform_real_distribution<double> freq(0.5, 2.5);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

    const std::size_t k = spec.pose_dim;
    std::vector<double> coeffs(k * kSinusoids * 3);
    for (auto& c : coeffs) c = 0.0;
    for (std::size_t d = 0; d < k; ++d) {
        for (int m = 0; m < kSinusoids; ++m) {
            double* c = &coeffs[(d * kSinusoids + m) * 3];
            c[0] = amp(rng);
            c[1] = freq(rng);
            c[2] = phase(rng);
        }
    }
    std::vector<double> out(samples * k);
    for (std::size_t s = 0; s < samples; ++s) {
        const double u = static_cast<double>(s) / static_cast<double>(samples - 1);
        for (std::size_t d = 0; d < k; ++d) {
            double v = 0.0;
            for (int m = 0; m < kSinusoids; ++m) {
                const double* c = &coeffs[(d * kSinusoids + m) * 3];
                v += c[0] * std::sin(2.0 * std::numbers::pi * c[1] * u + c[2]);
            }
            out[s * k + d] = v;
        }
    }
    return out;
}

std::vector<MotionSequence> generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    const std::size_t k = spec.pose_dim;
    auto topology = std::make_shared<const SkeletonTopology>(SkeletonTopology::generic(k / 3, 0));

    std::vector<MotionSequence> out;
    out.reserve(spec.n_classes * spec.sequences_per_class);
    for (std::size_t c = 0; c < spec.n_classes; ++c) {
        const auto proto = synthetic_prototype(spec, c, kPrototypeSamples);
        for (std::size_t i = 0; i < spec.sequences_per_class; ++i) {
            auto rng = stream_rng(spec.seed, instance_stream, c, i);
            std::uniform_int_distribution<std::size_t> length(spec.min_length, spec.max_length);
            std::normal_distribution<double> unit(0.0, 1.0);
            std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

            const std::size_t T = length(rng);

            // Monotone re-timing: cumulative sum of smooth positive increments.
            const double b1 = unit(rng), b2 = unit(rng);
            const double p1 = phase(rng), p2 = phase(rng);
            std::vector<double> tau(T, 0.0);
            for (std::size_t t = 1; t < T; ++t) {
                const double u = static_cast<double>(t) / static_cast<double>(T - 1);
                const double g = b1 * std::sin(2.0 * std::numbers::pi * u + p1) +
                                 b2 * std::sin(4.0 * std::numbers::pi * u + p2);
                tau[t] = tau[t - 1] + std::exp(1.5 * spec.warp_intensity * g);
            }
            const double total = tau[T - 1];
            for (auto& v : tau) v /= total;
            tau[T - 1] = 1.0;

            double offset[3];
            for (double& o : offset) o = spec.translation_sigma * unit(rng);

            std::vector<double> values(T * k);
            for (std::size_t t = 0; t < T; ++t) {
                const double pos = tau[t] * static_cast<double>(kPrototypeSamples - 1);
                const std::size_t a = std::min(static_cast<std::size_t>(pos), kPrototypeSamples - 1);
                const std::size_t b = std::min(a + 1, kPrototypeSamples - 1);
                const double w = pos - static_cast<double>(a);
                for (std::size_t d = 0; d < k; ++d) {
                    double v = proto[a * k + d] + w * (proto[b * k + d] - proto[a * k + d]);
                    v += offset[d % 3];
                    if (spec.noise_sigma > 0.0) v += spec.noise_sigma * unit(rng);
                    values[t * k + d] = v;
                }
            }
            char id[48];
            std::snprintf(id, sizeof(id), "c%zu_n%03zu", c, i);
            out.push_back(MotionSequence(topology, std::move(values), spec.sample_rate_hz)
                              .with_label("c" + std::to_string(c))
                              .with_subject("s" + std::to_string(i % spec.n_subjects))
                              .with_id(id));
        }
    }
    return out;
}

double synthetic_signal_rms(const SyntheticSpec& spec) {
    auto clean = spec;
    clean.noise_sigma = 0.0;
    double acc = 0.0;
    std::size_t n = 0;
    for (const auto& s : generate_synthetic(clean)) {
        for (double v : s.data()) acc += v * v;
        n += s.data().size();
    }
    return std::sqrt(acc / static_cast<double>(n));
}

}  // namespace ekm
