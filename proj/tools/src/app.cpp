#include "ekm/cli/app.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ekm/cli/config.hpp"
#include "ekm/cli/latency.hpp"
#include "ekm/crossval.hpp"
#include "ekm/dataio.hpp"
#include "ekm/error.hpp"
#include "ekm/gram.hpp"
#include "ekm/svm.hpp"

namespace ekm::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Globals {
    std::uint64_t seed = 1;
    std::size_t workers = 1;
    fs::path out = "ekm_out";
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string corridor_text(const KernelParams& p) {
    return p.corridor_radius ? std::to_string(*p.corridor_radius) : "none";
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Output directory plus the list of files written into it.
class Artifacts {
public:
    explicit Artifacts(fs::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec || !fs::is_directory(dir_)) fail(ErrorKind::io, "cannot create output directory " + dir_.string());
    }

    const fs::path& dir() const { return dir_; }

    void write(const std::string& kind, const std::string& name, const std::string& text) {
        std::ofstream f(dir_ / name, std::ios::binary);
        f << text;
        if (!f) fail(ErrorKind::io, "cannot write " + (dir_ / name).string());
        add(kind, name);
    }

    void add(const std::string& kind, const std::string& name) { list_.push_back({{"kind", kind}, {"path", name}}); }

    void finish(const std::string& command, std::span<const std::string> args, const Globals& g) {
        json m;
        m["format"] = "ekm-artifacts";
        m["version"] = 1;
        m["command"] = command;
        m["arguments"] = std::vector<std::string>(args.begin(), args.end());
        m["seed"] = g.seed;
        m["artifacts"] = list_;
        std::ofstream f(dir_ / "artifacts.json", std::ios::binary);
        f << m.dump(2) << '\n';
        if (!f) fail(ErrorKind::io, "cannot write " + (dir_ / "artifacts.json").string());
    }

private:
    fs::path dir_;
    json list_ = json::array();
};

std::vector<std::string> labels_of(std::span<const MotionSequence> data) {
    std::vector<std::string> out;
    for (const auto& s : data) {
        if (!s.label()) fail(ErrorKind::invalid_argument, "sequence '" + s.id() + "' has no label");
        out.push_back(*s.label());
    }
    return out;
}

std::vector<MotionSequence> load_nonempty(const fs::path& manifest) {
    auto data = load_dataset(manifest);
    if (data.empty()) fail(ErrorKind::invalid_argument, manifest.string() + ": dataset is empty");
    return data;
}

struct KernelFlags {
    std::string id = "rdtw_normalized";
    double nu = 1.0;
    double alpha = 1.0;
    std::optional<std::size_t> corridor;

    void attach(CLI::App* cmd) {
        cmd->add_option("--kernel", id, "euclid_rbf, dtw_rbf, rdtw or rdtw_normalized")
            ->check(CLI::IsMember({"euclid_rbf", "dtw_rbf", "rdtw", "rdtw_normalized"}));
        cmd->add_option("--nu", nu, "Stiffness")->check(CLI::PositiveNumber);
        cmd->add_option("--alpha", alpha, "Exponent range of the normalized kernel")->check(CLI::PositiveNumber);
        cmd->add_option("--corridor", corridor, "Sakoe-Chiba radius (default: none)");
    }

    KernelConfig config() const {
        KernelConfig k;
        k.id = parse_kernel_id(id);
        k.params.nu = nu;
        k.params.alpha = alpha;
        k.params.corridor_radius = corridor;
        k.params.validate();
        return k;
    }
};

// ---- downsample ----

struct DownsampleFlags {
    fs::path input;
    std::string mode;
    std::size_t length = 0;
    std::string descriptor = "identity";
    std::size_t optimal_cap = kDefaultOptimalCap;
};

void cmd_downsample(const DownsampleFlags& f, const Globals& g, Artifacts& art, std::ostream& out) {
    const auto mode = parse_downsample_mode(f.mode);
    auto data = load_nonempty(f.input);
    const auto spec = descriptor_preset(f.descriptor, *data.front().topology());

    std::ostringstream report;
    report << "id,label,subject,source_length,target_length,rms_error,compression_ratio\n";
    std::vector<MotionSequence> reduced;
    double worst = 0.0;
    for (const auto& seq : data) {
        try {
            const auto d = extract_descriptor(seq, spec);
            MotionSequence r = d;
            double rms = 0.0;
            if (d.length() < f.length) {
                r = resample_to_length(d, f.length, mode);
            } else {
                const auto plan = make_plan(d, f.length, mode, f.optimal_cap);
                r = apply_plan(d, plan);
                rms = plan.rms_error;
            }
            worst = std::max(worst, rms);
            report << seq.id() << ',' << seq.label().value_or("") << ',' << seq.subject().value_or("") << ','
                   << seq.length() << ',' << r.length() << ',' << fmt(rms) << ','
                   << fmt(compression_ratio(seq, r)) << '\n';
            reduced.push_back(std::move(r));
        } catch (const Error& e) {
            throw Error(e.kind(), "sequence '" + seq.id() + "': " + e.what());
        }
    }
    (void)g;
    save_dataset(art.dir() / "dataset", reduced);
    art.add("dataset", "dataset/manifest.json");
    art.write("downsample-report", "downsample_report.csv", report.str());
    out << "downsampled " << reduced.size() << " sequences to L=" << f.length << " (" << f.mode
        << "), max rms_error " << fmt(worst) << '\n';
}

// ---- gram ----

struct GramFlags {
    fs::path input;
    KernelFlags kernel;
    bool csv = false;
};

void cmd_gram(const GramFlags& f, const Globals& g, Artifacts& art, std::ostream& out) {
    const auto k = f.kernel.config();
    const auto data = load_nonempty(f.input);
    const auto m = gram(data, k.id, k.params, g.workers);

    std::ostringstream bin;
    write_kernel_binary(bin, m);
    art.write("gram", "gram.bin", bin.str());
    std::ostringstream rows;
    rows << "row,id,label\n";
    for (std::size_t i = 0; i < data.size(); ++i)
        rows << i << ',' << data[i].id() << ',' << data[i].label().value_or("") << '\n';
    art.write("gram-rows", "gram_rows.csv", rows.str());
    if (f.csv) {
        std::ostringstream csv;
        write_kernel_csv(csv, m);
        art.write("gram-csv", "gram.csv", csv.str());
    }
    out << "gram " << m.rows << "x" << m.cols << " (" << to_string(k.id) << ")\n";
}

// ---- train / predict ----

struct TrainFlags {
    fs::path input;
    KernelFlags kernel;
    double C = 1.0;
    double tol = 1e-3;
    std::uint64_t max_lookups = 10'000'000;
};

void cmd_train(const TrainFlags& f, const Globals& g, Artifacts& art, std::ostream& out) {
    const auto k = f.kernel.config();
    SmoOptions smo;
    smo.C = f.C;
    smo.tol = f.tol;
    smo.max_kernel_lookups = f.max_lookups;
    smo.validate();
    const auto data = load_nonempty(f.input);
    const auto labels = labels_of(data);
    const auto m = gram(data, k.id, k.params, g.workers);
    const auto model = train_one_vs_one(m, labels, smo);
    art.write("model", "model.json", model_to_json(model));
    const auto fit = predict(model, m);
    out << "trained on " << data.size() << " sequences, " << model.class_labels.size() << " classes, train accuracy "
        << fmt(accuracy(fit.labels, labels)) << (model.converged() ? "" : " (solver budget exhausted)") << '\n';
}

struct PredictFlags {
    fs::path model;
    fs::path train;
    fs::path input;
};

void cmd_predict(const PredictFlags& f, const Globals& g, Artifacts& art, std::ostream& out) {
    const auto model = load_model(f.model);
    const auto train = load_nonempty(f.train);
    const auto test = load_dataset(f.input);
    const auto& prov = model.provenance;
    if (train.size() != prov.train_size)
        fail(ErrorKind::provenance_mismatch, f.train.string() + " holds " + std::to_string(train.size()) +
                                                 " sequences but the model was trained on " +
                                                 std::to_string(prov.train_size));
    const auto cross = gram_cross(test, train, prov.kernel_id, prov.params, prov.norm_bounds, g.workers);
    const auto pred = predict(model, cross);

    std::ostringstream csv;
    csv << "id,label,predicted\n";
    std::size_t labelled = 0, correct = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        const auto truth = test[i].label().value_or("");
        csv << test[i].id() << ',' << truth << ',' << pred.labels[i] << '\n';
        if (!truth.empty()) {
            ++labelled;
            correct += truth == pred.labels[i];
        }
    }
    art.write("predictions", "predictions.csv", csv.str());
    out << "predicted " << test.size() << " sequences";
    if (labelled) out << ", accuracy " << fmt(double(correct) / double(labelled));
    out << '\n';
}

// ---- experiment ----

std::string accuracy_vs_length(const std::vector<ConfigSummary>& summary, std::span<const std::size_t> lengths) {
    struct Key {
        std::string descriptor;
        DownsampleMode mode;
        KernelConfig kernel;
        double C;
        bool operator==(const Key& o) const {
            return descriptor == o.descriptor && mode == o.mode && kernel.id == o.kernel.id &&
                   kernel.params == o.kernel.params && C == o.C;
        }
    };
    std::vector<Key> keys;
    std::vector<std::map<std::size_t, const ConfigSummary*>> cells;
    for (const auto& s : summary) {
        const Key key{s.descriptor, s.mode, s.kernel, s.C};
        auto it = std::find(keys.begin(), keys.end(), key);
        if (it == keys.end()) {
            keys.push_back(key);
            cells.emplace_back();
            it = keys.end() - 1;
        }
        cells[std::size_t(it - keys.begin())][s.length] = &s;
    }
    std::ostringstream out;
    out << "descriptor,mode,kernel,nu,alpha,corridor,C";
    for (auto L : lengths) out << ",L" << L << "_mean,L" << L << "_std";
    out << '\n';
    for (std::size_t r = 0; r < keys.size(); ++r) {
        const auto& k = keys[r];
        out << k.descriptor << ',' << to_string(k.mode) << ',' << to_string(k.kernel.id) << ','
            << fmt(k.kernel.params.nu) << ',' << fmt(k.kernel.params.alpha) << ','
            << corridor_text(k.kernel.params) << ',' << fmt(k.C);
        for (auto L : lengths) {
            auto it = cells[r].find(L);
            if (it == cells[r].end()) out << ",,";
            else out << ',' << fmt(it->second->test_mean) << ',' << fmt(it->second->test_std);
        }
        out << '\n';
    }
    return out.str();
}

void cmd_experiment(const fs::path& config_path, const Globals& g, Artifacts& art, std::ostream& out) {
    const auto cfg = parse_experiment_config(read_text(config_path), config_path.parent_path(), g.seed);
    const auto data = cfg.dataset.load();
    if (data.empty()) fail(ErrorKind::invalid_argument, "experiment dataset is empty");

    ExperimentGrid grid;
    for (const auto& name : cfg.descriptors)
        grid.descriptors.push_back({name, descriptor_preset(name, *data.front().topology())});
    grid.modes = cfg.modes;
    grid.lengths = cfg.lengths;
    grid.kernels = cfg.kernels;
    grid.Cs = cfg.Cs;
    grid.smo = cfg.smo;
    grid.validate();

    auto splits = make_splits(data, cfg.split);
    if (cfg.split_limit && splits.size() > *cfg.split_limit) splits.resize(*cfg.split_limit);
    const auto report = cross_validate(data, splits, grid, g.workers);
    const auto summary = report.summary();

    std::ostringstream results, sums;
    write_results_csv(results, report);
    write_summary_csv(sums, summary);
    art.write("results", "results.csv", results.str());
    art.write("summary", "summary.csv", sums.str());
    art.write("accuracy-vs-length", "accuracy_vs_L.csv", accuracy_vs_length(summary, cfg.lengths));
    out << report.rows.size() << " result rows over " << splits.size() << " splits, " << summary.size()
        << " configurations\n";
}

// ---- bench ----

struct BenchFlags {
    std::optional<fs::path> input;
    std::size_t per_class = 100;
    std::vector<std::string> kernels{"rdtw_normalized", "euclid_rbf"};
    std::vector<std::size_t> lengths{10, 15, 20, 25, 30};
    std::size_t reps = 30;
    std::size_t warmup = 3;
    std::optional<double> nu;
    double relative_nu = 0.1;
    double alpha = 1.0;
    std::optional<std::size_t> corridor;
    double C = 1.0;
    std::string mode = "adaptive-greedy";
    std::string descriptor = "identity";
};

void cmd_bench(const BenchFlags& f, const Globals& g, Artifacts& art, std::ostream& out) {
    std::vector<MotionSequence> data;
    if (f.input) {
        data = load_nonempty(*f.input);
    } else {
        SyntheticSpec spec;
        spec.sequences_per_class = f.per_class;
        spec.seed = g.seed;
        spec.validate();
        spec.noise_sigma = 0.05 * synthetic_signal_rms(spec);
        data = generate_synthetic(spec);
    }

    double nu = 0.0;
    if (f.nu) {
        nu = *f.nu;
    } else {
        const auto spec = descriptor_preset(f.descriptor, *data.front().topology());
        std::vector<MotionSequence> reduced;
        for (const auto& s : data) reduced.push_back(extract_descriptor(s, spec));
        nu = f.relative_nu / feature_scale(reduced);
    }

    LatencyOptions opts;
    for (const auto& name : f.kernels) {
        KernelConfig k;
        k.id = parse_kernel_id(name);
        k.params.nu = nu;
        k.params.alpha = f.alpha;
        k.params.corridor_radius = f.corridor;
        opts.kernels.push_back(k);
    }
    opts.lengths = f.lengths;
    opts.repetitions = f.reps;
    opts.warmup = f.warmup;
    opts.C = f.C;
    opts.mode = parse_downsample_mode(f.mode);
    opts.descriptor = f.descriptor;
    opts.train_workers = g.workers;

    const auto rows = bench_latency(data, opts);
    std::ostringstream csv;
    write_latency_csv(csv, rows);
    art.write("latency", "latency.csv", csv.str());

    for (const auto& k : opts.kernels) {
        std::vector<double> xs, ys;
        for (const auto& r : rows) {
            if (r.kernel.id != k.id) continue;
            xs.push_back(double(r.length));
            ys.push_back(r.median_of_means_ms);
        }
        out << to_string(k.id);
        if (xs.size() >= 2) out << ": log-log slope " << fmt(loglog_slope(xs, ys));
        out << '\n';
    }
    if (f.reps < 30) out << "fewer than 30 repetitions; rows flagged low_confidence\n";
}

// ---- synth ----

struct SynthFlags {
    SyntheticSpec spec;
    std::optional<double> noise_relative;
};

void cmd_synth(SynthFlags f, const Globals& g, Artifacts& art, std::ostream& out) {
    f.spec.seed = g.seed;
    f.spec.validate();
    if (f.noise_relative) f.spec.noise_sigma = *f.noise_relative * synthetic_signal_rms(f.spec);
    const auto data = generate_synthetic(f.spec);
    save_dataset(art.dir() / "dataset", data);
    art.add("dataset", "dataset/manifest.json");
    out << "wrote " << data.size() << " synthetic sequences\n";
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Elastic kernel machines for motion-capture gesture classification", "ekm"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--seed", g.seed, "Seed for generators and fold assignment")->capture_default_str();
    app.add_option("--workers", g.workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--out", g.out, "Output directory")->capture_default_str();

    DownsampleFlags ds;
    auto* c_ds = app.add_subcommand("downsample", "Reduce every sequence to L frames");
    c_ds->add_option("--input", ds.input, "Dataset manifest")->required()->check(CLI::ExistingFile);
    c_ds->add_option("--mode", ds.mode, "uniform, adaptive-greedy or adaptive-optimal")
        ->required()
        ->check(CLI::IsMember({"uniform", "adaptive-greedy", "adaptive-optimal"}));
    c_ds->add_option("--length,-L", ds.length, "Target length")->required()->check(CLI::Range(std::size_t{2}, std::size_t(1) << 30));
    c_ds->add_option("--descriptor", ds.descriptor, "identity, fbd, eed8 or eed9")->capture_default_str();
    c_ds->add_option("--optimal-cap", ds.optimal_cap, "Longest input the exact planner accepts")->capture_default_str();

    GramFlags gm;
    auto* c_gram = app.add_subcommand("gram", "Training Gram matrix of a dataset");
    c_gram->add_option("--input", gm.input, "Dataset manifest")->required()->check(CLI::ExistingFile);
    gm.kernel.attach(c_gram);
    c_gram->add_flag("--csv", gm.csv, "Also write gram.csv");

    TrainFlags tr;
    auto* c_train = app.add_subcommand("train", "Train a one-vs-one SVM");
    c_train->add_option("--input", tr.input, "Dataset manifest")->required()->check(CLI::ExistingFile);
    tr.kernel.attach(c_train);
    c_train->add_option("--C", tr.C, "Box constraint")->check(CLI::PositiveNumber);
    c_train->add_option("--tol", tr.tol, "KKT tolerance")->check(CLI::PositiveNumber);
    c_train->add_option("--max-lookups", tr.max_lookups, "Kernel lookup budget per binary problem");

    PredictFlags pr;
    auto* c_pred = app.add_subcommand("predict", "Classify a dataset with a trained model");
    c_pred->add_option("--model", pr.model, "model.json from train")->required()->check(CLI::ExistingFile);
    c_pred->add_option("--train", pr.train, "Manifest the model was trained on")->required()->check(CLI::ExistingFile);
    c_pred->add_option("--input", pr.input, "Manifest to classify")->required()->check(CLI::ExistingFile);

    fs::path config;
    auto* c_exp = app.add_subcommand("experiment", "Cross-validated grid from a JSON config");
    c_exp->add_option("--config", config, "Experiment config")->required()->check(CLI::ExistingFile);

    BenchFlags bf;
    auto* c_bench = app.add_subcommand("bench", "Single-sequence classification latency");
    c_bench->add_option("--input", bf.input, "Dataset manifest (default: synthetic)")->check(CLI::ExistingFile);
    c_bench->add_option("--per-class", bf.per_class, "Synthetic sequences per class")->capture_default_str();
    c_bench->add_option("--kernels", bf.kernels, "Kernel names")
        ->check(CLI::IsMember({"euclid_rbf", "dtw_rbf", "rdtw", "rdtw_normalized"}))
        ->delimiter(',');
    c_bench->add_option("--lengths", bf.lengths, "Target lengths")->delimiter(',');
    c_bench->add_option("--reps", bf.reps, "Timed repetitions")->check(CLI::PositiveNumber)->capture_default_str();
    c_bench->add_option("--warmup", bf.warmup, "Discarded repetitions")->capture_default_str();
    c_bench->add_option("--nu", bf.nu, "Absolute stiffness")->check(CLI::PositiveNumber);
    c_bench->add_option("--relative-nu", bf.relative_nu, "Stiffness relative to the feature scale")
        ->check(CLI::PositiveNumber);
    c_bench->add_option("--alpha", bf.alpha)->check(CLI::PositiveNumber);
    c_bench->add_option("--corridor", bf.corridor);
    c_bench->add_option("--C", bf.C)->check(CLI::PositiveNumber);
    c_bench->add_option("--mode", bf.mode)->check(CLI::IsMember({"uniform", "adaptive-greedy", "adaptive-optimal"}));
    c_bench->add_option("--descriptor", bf.descriptor);

    SynthFlags sy;
    auto* c_synth = app.add_subcommand("synth", "Write a synthetic gesture dataset");
    c_synth->add_option("--classes", sy.spec.n_classes)->capture_default_str();
    c_synth->add_option("--per-class", sy.spec.sequences_per_class)->capture_default_str();
    c_synth->add_option("--min-length", sy.spec.min_length)->capture_default_str();
    c_synth->add_option("--max-length", sy.spec.max_length)->capture_default_str();
    c_synth->add_option("--pose-dim", sy.spec.pose_dim)->capture_default_str();
    c_synth->add_option("--warp", sy.spec.warp_intensity)->capture_default_str();
    c_synth->add_option("--noise", sy.spec.noise_sigma, "Absolute noise sigma")->capture_default_str();
    c_synth->add_option("--noise-relative", sy.noise_relative, "Noise sigma as a fraction of the signal RMS");
    c_synth->add_option("--translation", sy.spec.translation_sigma)->capture_default_str();
    c_synth->add_option("--subjects", sy.spec.n_subjects)->capture_default_str();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 2;
    }

    const auto* cmd = app.get_subcommands().front();
    try {
        Artifacts art(g.out);
        if (cmd == c_ds) cmd_downsample(ds, g, art, out);
        else if (cmd == c_gram) cmd_gram(gm, g, art, out);
        else if (cmd == c_train) cmd_train(tr, g, art, out);
        else if (cmd == c_pred) cmd_predict(pr, g, art, out);
        else if (cmd == c_exp) cmd_experiment(config, g, art, out);
        else if (cmd == c_bench) cmd_bench(bf, g, art, out);
        else cmd_synth(sy, g, art, out);
        art.finish(cmd->get_name(), args, g);
    } catch (const Error& e) {
        err << "ekm " << cmd->get_name() << ": " << to_string(e.kind()) << " error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "ekm " << cmd->get_name() << ": " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace ekm::cli
