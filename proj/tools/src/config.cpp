#include "ekm/cli/config.hpp"

#include <algorithm>
#include <initializer_list>
#include <string_view>

#include <json.hpp>

#include "ekm/error.hpp"

namespace ekm::cli {

namespace {

using nlohmann::json;

[[noreturn]] void schema(const std::string& where, const std::string& what) {
    fail(ErrorKind::schema, "config " + where + ": " + what);
}

void only_keys(const json& obj, const std::string& where, std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) schema(where, "expected an object");
    for (const auto& [key, _] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            schema(where, "unknown key '" + key + "'");
    }
}

double number(const json& v, const std::string& where) {
    if (!v.is_number()) schema(where, "expected a number");
    return v.get<double>();
}

std::size_t count(const json& v, const std::string& where) {
    if (!v.is_number_integer() || v.get<long long>() < 0) schema(where, "expected a non-negative integer");
    return v.get<std::size_t>();
}

std::uint64_t seed_of(const json& v, const std::string& where) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        schema(where, "expected a non-negative integer");
    return v.get<std::uint64_t>();
}

const json& array(const json& obj, const char* key) {
    if (!obj.contains(key)) schema(key, "missing");
    const auto& v = obj.at(key);
    if (!v.is_array() || v.empty()) schema(key, "expected a non-empty array");
    return v;
}

// rethrows library validation failures as schema errors with a location
template <class F>
auto checked(const std::string& where, F&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::schema) throw;
        schema(where, e.what());
    }
}

SyntheticSpec synthetic_from(const json& j, std::uint64_t default_seed, const std::string& where) {
    only_keys(j, where,
              {"n_classes", "sequences_per_class", "min_length", "max_length", "pose_dim", "warp_intensity",
               "noise_sigma", "noise_relative", "translation_sigma", "n_subjects", "sample_rate_hz", "seed"});
    SyntheticSpec s;
    s.seed = default_seed;
    auto at = [&](const char* k) { return where + "." + k; };
    if (j.contains("n_classes")) s.n_classes = count(j["n_classes"], at("n_classes"));
    if (j.contains("sequences_per_class")) s.sequences_per_class = count(j["sequences_per_class"], at("sequences_per_class"));
    if (j.contains("min_length")) s.min_length = count(j["min_length"], at("min_length"));
    if (j.contains("max_length")) s.max_length = count(j["max_length"], at("max_length"));
    if (j.contains("pose_dim")) s.pose_dim = count(j["pose_dim"], at("pose_dim"));
    if (j.contains("warp_intensity")) s.warp_intensity = number(j["warp_intensity"], at("warp_intensity"));
    if (j.contains("noise_sigma")) s.noise_sigma = number(j["noise_sigma"], at("noise_sigma"));
    if (j.contains("translation_sigma")) s.translation_sigma = number(j["translation_sigma"], at("translation_sigma"));
    if (j.contains("n_subjects")) s.n_subjects = count(j["n_subjects"], at("n_subjects"));
    if (j.contains("sample_rate_hz")) s.sample_rate_hz = number(j["sample_rate_hz"], at("sample_rate_hz"));
    if (j.contains("seed")) s.seed = seed_of(j["seed"], at("seed"));
    checked(where, [&] { s.validate(); return 0; });
    if (j.contains("noise_relative")) {
        const double rel = number(j["noise_relative"], at("noise_relative"));
        if (rel < 0.0) schema(at("noise_relative"), "must be non-negative");
        s.noise_sigma = rel * synthetic_signal_rms(s);
    }
    return s;
}

json parse_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorKind::schema, std::string("config is not valid JSON: ") + e.what());
    }
}

KernelConfig kernel_from(const json& j, const std::string& where) {
    only_keys(j, where, {"id", "nu", "alpha", "corridor"});
    if (!j.contains("id") || !j["id"].is_string()) schema(where + ".id", "expected a kernel name");
    KernelConfig k;
    k.id = checked(where + ".id", [&] { return parse_kernel_id(j["id"].get<std::string>()); });
    if (j.contains("nu")) k.params.nu = number(j["nu"], where + ".nu");
    if (j.contains("alpha")) k.params.alpha = number(j["alpha"], where + ".alpha");
    if (j.contains("corridor") && !j["corridor"].is_null())
        k.params.corridor_radius = count(j["corridor"], where + ".corridor");
    checked(where, [&] { k.params.validate(); return 0; });
    return k;
}

}  // namespace

std::vector<MotionSequence> DatasetSource::load() const {
    if (manifest) return load_dataset(*manifest);
    if (synthetic) return generate_synthetic(*synthetic);
    fail(ErrorKind::invalid_argument, "no dataset source");
}

SyntheticSpec parse_synthetic_spec(const std::string& json_text, std::uint64_t default_seed) {
    return synthetic_from(parse_text(json_text), default_seed, "synthetic");
}

ExperimentConfig parse_experiment_config(const std::string& text, const std::filesystem::path& base_dir,
                                         std::uint64_t default_seed) {
    const json j = parse_text(text);
    only_keys(j, "root", {"dataset", "descriptors", "modes", "lengths", "kernels", "C", "split", "smo"});
    ExperimentConfig cfg;

    if (!j.contains("dataset")) schema("dataset", "missing");
    const auto& ds = j["dataset"];
    if (ds.is_string()) {
        std::filesystem::path p = ds.get<std::string>();
        cfg.dataset.manifest = p.is_absolute() ? p : base_dir / p;
    } else if (ds.is_object()) {
        only_keys(ds, "dataset", {"synthetic"});
        if (!ds.contains("synthetic")) schema("dataset", "expected a manifest path or {\"synthetic\": {...}}");
        cfg.dataset.synthetic = synthetic_from(ds["synthetic"], default_seed, "dataset.synthetic");
    } else {
        schema("dataset", "expected a manifest path or {\"synthetic\": {...}}");
    }

    for (const auto& d : array(j, "descriptors")) {
        if (!d.is_string()) schema("descriptors", "expected preset names");
        const auto name = d.get<std::string>();
        if (name != "identity" && name != "fbd" && name != "eed8" && name != "eed9")
            schema("descriptors", "unknown preset '" + name + "'");
        cfg.descriptors.push_back(name);
    }
    for (const auto& m : array(j, "modes")) {
        if (!m.is_string()) schema("modes", "expected mode names");
        cfg.modes.push_back(checked("modes", [&] { return parse_downsample_mode(m.get<std::string>()); }));
    }
    for (const auto& L : array(j, "lengths")) {
        const auto v = count(L, "lengths");
        if (v < 2) schema("lengths", "every length must be at least 2");
        cfg.lengths.push_back(v);
    }
    const auto& ks = array(j, "kernels");
    for (std::size_t i = 0; i < ks.size(); ++i) cfg.kernels.push_back(kernel_from(ks[i], "kernels[" + std::to_string(i) + "]"));
    for (const auto& c : array(j, "C")) {
        const double v = number(c, "C");
        if (!(v > 0.0)) schema("C", "every C must be positive");
        cfg.Cs.push_back(v);
    }

    cfg.split.seed = default_seed;
    if (j.contains("split")) {
        const auto& s = j["split"];
        only_keys(s, "split", {"kind", "folds", "train_subjects", "seed", "limit"});
        if (s.contains("kind")) {
            if (!s["kind"].is_string()) schema("split.kind", "expected a string");
            const auto kind = s["kind"].get<std::string>();
            if (kind == "kfold") cfg.split.kind = SplitSpec::Kind::kfold;
            else if (kind == "subject_groups") cfg.split.kind = SplitSpec::Kind::subject_groups;
            else schema("split.kind", "expected 'kfold' or 'subject_groups'");
        }
        if (s.contains("folds")) cfg.split.folds = count(s["folds"], "split.folds");
        if (s.contains("train_subjects")) cfg.split.train_subjects = count(s["train_subjects"], "split.train_subjects");
        if (s.contains("seed")) cfg.split.seed = seed_of(s["seed"], "split.seed");
        if (s.contains("limit") && !s["limit"].is_null()) {
            cfg.split_limit = count(s["limit"], "split.limit");
            if (*cfg.split_limit == 0) schema("split.limit", "must be at least 1");
        }
    }
    if (cfg.split.kind == SplitSpec::Kind::kfold && cfg.split.folds < 2) schema("split.folds", "must be at least 2");
    if (cfg.split.kind == SplitSpec::Kind::subject_groups && cfg.split.train_subjects == 0)
        schema("split.train_subjects", "must be at least 1");

    if (j.contains("smo")) {
        const auto& s = j["smo"];
        only_keys(s, "smo", {"tol", "max_kernel_lookups"});
        if (s.contains("tol")) cfg.smo.tol = number(s["tol"], "smo.tol");
        if (s.contains("max_kernel_lookups")) cfg.smo.max_kernel_lookups = count(s["max_kernel_lookups"], "smo.max_kernel_lookups");
        checked("smo", [&] { cfg.smo.validate(); return 0; });
    }
    return cfg;
}

}  // namespace ekm::cli
