#include "ekm/gram.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "ekm/error.hpp"
#include "parallel.hpp"

namespace ekm {

namespace {

constexpr char kMagic[8] = {'E', 'K', 'M', 'G', 'R', 'A', 'M', '1'};

[[noreturn]] void rethrow_for_pair(const Error& e, std::size_t i, std::size_t j) {
    throw Error(e.kind(), "kernel evaluation failed for pair (" + std::to_string(i) + ", " +
                              std::to_string(j) + "): " + e.what());
}

void put_u64(std::ostream& out, std::uint64_t v) {
    char bytes[8];
    for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((v >> (8 * b)) & 0xffu);
    out.write(bytes, 8);
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char bytes[8];
    in.read(reinterpret_cast<char*>(bytes), 8);
    if (!in) fail(ErrorKind::schema, "truncated kernel matrix file");
    std::uint64_t v = 0;
    for (int b = 7; b >= 0; --b) v = (v << 8) | bytes[b];
    return v;
}

nlohmann::json header_of(const KernelMatrix& m) {
    nlohmann::json h;
    h["format"] = "ekm-kernel-matrix";
    h["version"] = 1;
    h["rows"] = m.rows;
    h["cols"] = m.cols;
    h["kernel_id"] = std::string(to_string(m.kernel_id));
    h["params"]["nu"] = m.params.nu;
    h["params"]["alpha"] = m.params.alpha;
    h["params"]["corridor_radius"] =
        m.params.corridor_radius ? nlohmann::json(*m.params.corridor_radius) : nlohmann::json(nullptr);
    if (m.norm_bounds) {
        h["norm_bounds"]["log_min"] = m.norm_bounds->log_min;
        h["norm_bounds"]["log_max"] = m.norm_bounds->log_max;
    } else {
        h["norm_bounds"] = nullptr;
    }
    return h;
}

}  // namespace

std::vector<SeriesView> views_of(std::span<const MotionSequence> seqs) {
    std::vector<SeriesView> views;
    views.reserve(seqs.size());
    for (const auto& s : seqs) views.push_back(s.view());
    return views;
}

KernelMatrix log_gram(std::span<const SeriesView> seqs, KernelId id, const KernelParams& params,
                      std::size_t workers) {
    params.validate();
    const std::size_t n = seqs.size();
    KernelMatrix m;
    m.rows = m.cols = n;
    m.values.assign(n * n, 0.0);
    m.kernel_id = id;
    m.params = params;
    detail::parallel_for(n, workers, [&](std::size_t i) {
        for (std::size_t j = i; j < n; ++j) {
            try {
                m.values[i * n + j] = log_kernel(id, seqs[i], seqs[j], params);
            } catch (const Error& e) {
                rethrow_for_pair(e, i, j);
            }
        }
    });
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) m.values[i * n + j] = m.values[j * n + i];
    }
    return m;
}

NormBounds capture_bounds(const KernelMatrix& log_values) {
    if (log_values.values.empty())
        fail(ErrorKind::degenerate_normalization, "cannot normalize an empty Gram matrix");
    auto [lo, hi] = std::minmax_element(log_values.values.begin(), log_values.values.end());
    if (!std::isfinite(*lo) || !std::isfinite(*hi))
        fail(ErrorKind::domain, "Gram matrix holds a non-positive or non-finite kernel value");
    if (*lo == *hi)
        fail(ErrorKind::degenerate_normalization,
             "Gram matrix is constant; normalization bounds coincide");
    return {*lo, *hi};
}

KernelMatrix exponentiate(const KernelMatrix& log_values, KernelId id,
                          std::optional<NormBounds> norm_bounds) {
    KernelMatrix m = log_values;
    m.kernel_id = id;
    if (id == KernelId::rdtw_normalized) {
        if (!norm_bounds)
            fail(ErrorKind::invalid_argument, "the normalized rdtw kernel requires training bounds");
        m.norm_bounds = norm_bounds;
        for (auto& v : m.values) v = norm_bounds->apply(v, m.params.alpha);
    } else {
        m.norm_bounds.reset();
        for (auto& v : m.values) v = std::exp(v);
    }
    return m;
}

GramMatrix normalize_log_gram(const KernelMatrix& log_values) {
    return exponentiate(log_values, KernelId::rdtw_normalized, capture_bounds(log_values));
}

GramMatrix normalize_kernel(const GramMatrix& raw) {
    if (raw.kernel_id != KernelId::rdtw)
        fail(ErrorKind::invalid_argument, "normalization applies to raw rdtw Gram matrices only");
    KernelMatrix logs = raw;
    for (auto& v : logs.values) {
        if (!(v > 0.0)) fail(ErrorKind::domain, "Gram matrix holds a non-positive entry");
        v = std::log(v);
    }
    return normalize_log_gram(logs);
}

GramMatrix gram(std::span<const SeriesView> seqs, KernelId id, const KernelParams& params,
                std::size_t workers) {
    auto logs = log_gram(seqs, id, params, workers);
    if (id == KernelId::rdtw_normalized) return normalize_log_gram(logs);
    return exponentiate(logs, id, std::nullopt);
}

GramMatrix gram(std::span<const MotionSequence> seqs, KernelId id, const KernelParams& params,
                std::size_t workers) {
    auto views = views_of(seqs);
    return gram(std::span<const SeriesView>(views), id, params, workers);
}

KernelMatrix gram_cross(std::span<const SeriesView> test, std::span<const SeriesView> train,
                        KernelId id, const KernelParams& params,
                        std::optional<NormBounds> norm_bounds, std::size_t workers) {
    params.validate();
    if (id == KernelId::rdtw_normalized && !norm_bounds)
        fail(ErrorKind::invalid_argument, "the normalized rdtw kernel requires training bounds");
    KernelMatrix m;
    m.rows = test.size();
    m.cols = train.size();
    m.values.assign(m.rows * m.cols, 0.0);
    m.kernel_id = id;
    m.params = params;
    detail::parallel_for(m.rows, workers, [&](std::size_t i) {
        for (std::size_t j = 0; j < m.cols; ++j) {
            try {
                m.values[i * m.cols + j] = log_kernel(id, test[i], train[j], params);
            } catch (const Error& e) {
                rethrow_for_pair(e, i, j);
            }
        }
    });
    return exponentiate(m, id, id == KernelId::rdtw_normalized ? norm_bounds : std::nullopt);
}

KernelMatrix gram_cross(std::span<const MotionSequence> test, std::span<const MotionSequence> train,
                        KernelId id, const KernelParams& params,
                        std::optional<NormBounds> norm_bounds, std::size_t workers) {
    auto tv = views_of(test);
    auto rv = views_of(train);
    return gram_cross(std::span<const SeriesView>(tv), std::span<const SeriesView>(rv), id, params,
                      norm_bounds, workers);
}

void write_kernel_binary(std::ostream& out, const KernelMatrix& m) {
    const std::string header = header_of(m).dump();
    out.write(kMagic, sizeof(kMagic));
    put_u64(out, header.size());
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    for (double v : m.values) put_u64(out, std::bit_cast<std::uint64_t>(v));
    if (!out) fail(ErrorKind::io, "failed writing kernel matrix");
}

KernelMatrix read_kernel_binary(std::istream& in) {
    char magic[8];
    in.read(magic, 8);
    if (!in || !std::equal(magic, magic + 8, kMagic))
        fail(ErrorKind::schema, "not a kernel matrix file (bad magic)");
    const auto header_size = get_u64(in);
    std::string text(header_size, '\0');
    in.read(text.data(), static_cast<std::streamsize>(header_size));
    if (!in) fail(ErrorKind::schema, "truncated kernel matrix header");

    KernelMatrix m;
    try {
        const auto h = nlohmann::json::parse(text);
        m.rows = h.at("rows").get<std::size_t>();
        m.cols = h.at("cols").get<std::size_t>();
        m.kernel_id = parse_kernel_id(h.at("kernel_id").get<std::string>());
        const auto& p = h.at("params");
        m.params.nu = p.at("nu").get<double>();
        m.params.alpha = p.at("alpha").get<double>();
        if (!p.at("corridor_radius").is_null())
            m.params.corridor_radius = p.at("corridor_radius").get<std::size_t>();
        if (!h.at("norm_bounds").is_null())
            m.norm_bounds = NormBounds{h["norm_bounds"].at("log_min").get<double>(),
                                       h["norm_bounds"].at("log_max").get<double>()};
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::schema, std::string("bad kernel matrix header: ") + e.what());
    }
    m.values.resize(m.rows * m.cols);
    for (auto& v : m.values) v = std::bit_cast<double>(get_u64(in));
    return m;
}

void save_kernel_binary(const std::filesystem::path& path, const KernelMatrix& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::io, "cannot open " + path.string() + " for writing");
    write_kernel_binary(out, m);
}

KernelMatrix load_kernel_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::io, "cannot open " + path.string());
    return read_kernel_binary(in);
}

void write_kernel_csv(std::ostream& out, const KernelMatrix& m) {
    char buf[32];
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = 0; j < m.cols; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
            if (j) out << ',';
            out << buf;
        }
        out << '\n';
    }
}

}  // namespace ekm
