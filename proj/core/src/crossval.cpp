#include "ekm/crossval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <random>
#include <set>

#include "ekm/error.hpp"
#include "ekm/gram.hpp"
#include "parallel.hpp"

namespace ekm {

namespace {

std::vector<std::size_t> positions_by_id(std::span<const MotionSequence> data,
                                         std::vector<std::size_t> positions) {
    std::sort(positions.begin(), positions.end(),
              [&](std::size_t a, std::size_t b) { return data[a].id() < data[b].id(); });
    return positions;
}

void require_unique_ids(std::span<const MotionSequence> data) {
    std::set<std::string> ids;
    for (const auto& s : data) {
        if (s.id().empty()) fail(ErrorKind::invalid_split, "cross-validation needs sequence ids");
        if (!ids.insert(s.id()).second)
            fail(ErrorKind::invalid_split, "duplicate sequence id '" + s.id() + "'");
    }
}

const std::string& label_of(const MotionSequence& s) {
    if (!s.label()) fail(ErrorKind::invalid_argument, "sequence '" + s.id() + "' has no label");
    return *s.label();
}

KernelMatrix block(const KernelMatrix& full, std::span<const std::size_t> rows,
                   std::span<const std::size_t> cols) {
    KernelMatrix m;
    m.rows = rows.size();
    m.cols = cols.size();
    m.kernel_id = full.kernel_id;
    m.params = full.params;
    m.values.resize(m.rows * m.cols);
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = 0; j < m.cols; ++j) m.values[i * m.cols + j] = full(rows[i], cols[j]);
    }
    return m;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string corridor_text(const KernelParams& p) {
    return p.corridor_radius ? std::to_string(*p.corridor_radius) : std::string("none");
}

bool same_config(const ResultRow& a, const ResultRow& b) {
    return a.descriptor == b.descriptor && a.mode == b.mode && a.length == b.length &&
           a.kernel.id == b.kernel.id && a.kernel.params == b.kernel.params && a.C == b.C;
}

}  // namespace

std::vector<double> default_C_grid() { return {0.1, 1.0, 10.0, 100.0}; }
std::vector<double> default_nu_grid() { return {0.01, 0.1, 1.0, 10.0}; }
std::vector<std::size_t> default_length_grid() { return {5, 10, 15, 20, 25, 30}; }

void ExperimentGrid::validate() const {
    if (descriptors.empty() || modes.empty() || lengths.empty() || kernels.empty() || Cs.empty())
        fail(ErrorKind::invalid_argument, "every experiment grid axis needs at least one value");
    for (auto L : lengths) {
        if (L < 2) fail(ErrorKind::invalid_argument, "sequence lengths in the grid must be >= 2");
    }
    for (const auto& k : kernels) k.params.validate();
    for (double C : Cs) {
        SmoOptions o = smo;
        o.C = C;
        o.validate();
    }
}

std::vector<Split> make_splits(std::span<const MotionSequence> data, const SplitSpec& spec) {
    require_unique_ids(data);
    std::vector<Split> splits;
    if (spec.kind == SplitSpec::Kind::kfold) {
        if (spec.folds < 2) fail(ErrorKind::invalid_argument, "k-fold needs at least 2 folds");
        if (spec.folds > data.size())
            fail(ErrorKind::invalid_argument, "more folds than sequences");
        std::map<std::string, std::vector<std::size_t>> by_class;
        for (std::size_t i = 0; i < data.size(); ++i) by_class[label_of(data[i])].push_back(i);
        std::vector<std::size_t> fold_of(data.size(), 0);
        std::size_t class_rank = 0;
        std::size_t offset = 0;
        for (auto& [label, members] : by_class) {
            members = positions_by_id(data, members);
            std::mt19937_64 rng(spec.seed * 1000003u + class_rank++);
            std::shuffle(members.begin(), members.end(), rng);
            // continue the round-robin across classes so fold sizes stay even
            for (std::size_t r = 0; r < members.size(); ++r)
                fold_of[members[r]] = (offset + r) % spec.folds;
            offset += members.size();
        }
        for (std::size_t f = 0; f < spec.folds; ++f) {
            Split s;
            for (std::size_t i = 0; i < data.size(); ++i) (fold_of[i] == f ? s.test : s.train).push_back(i);
            s.train = positions_by_id(data, std::move(s.train));
            s.test = positions_by_id(data, std::move(s.test));
            splits.push_back(std::move(s));
        }
        return splits;
    }

    std::set<std::string> subject_set;
    for (const auto& s : data) {
        if (!s.subject() || s.subject()->empty())
            fail(ErrorKind::invalid_split, "sequence '" + s.id() + "' has no subject for group splits");
        subject_set.insert(*s.subject());
    }
    const std::vector<std::string> subjects(subject_set.begin(), subject_set.end());
    const std::size_t n = subjects.size();
    const std::size_t r = spec.train_subjects;
    if (r == 0 || r >= n)
        fail(ErrorKind::invalid_argument, "training subject count must lie in [1, " +
                                              std::to_string(n - 1) + "]");
    std::vector<std::size_t> combo(r);
    for (std::size_t i = 0; i < r; ++i) combo[i] = i;
    for (;;) {
        std::set<std::string> train_subjects;
        for (auto c : combo) train_subjects.insert(subjects[c]);
        Split s;
        s.subject_disjoint = true;
        for (std::size_t i = 0; i < data.size(); ++i)
            (train_subjects.count(*data[i].subject()) ? s.train : s.test).push_back(i);
        s.train = positions_by_id(data, std::move(s.train));
        s.test = positions_by_id(data, std::move(s.test));
        splits.push_back(std::move(s));

        std::size_t i = r;
        while (i > 0 && combo[i - 1] == n - r + (i - 1)) --i;
        if (i == 0) break;
        ++combo[i - 1];
        for (std::size_t j = i; j < r; ++j) combo[j] = combo[j - 1] + 1;
    }
    return splits;
}

void validate_split(std::span<const MotionSequence> data, const Split& split) {
    std::set<std::size_t> train(split.train.begin(), split.train.end());
    std::set<std::string> train_subjects;
    for (auto i : split.train) {
        if (i >= data.size()) fail(ErrorKind::invalid_split, "split references a missing sequence");
        if (data[i].subject()) train_subjects.insert(*data[i].subject());
    }
    for (auto i : split.test) {
        if (i >= data.size()) fail(ErrorKind::invalid_split, "split references a missing sequence");
        if (train.count(i))
            fail(ErrorKind::invalid_split, "sequence '" + data[i].id() + "' is in both partitions");
        if (split.subject_disjoint && data[i].subject() && train_subjects.count(*data[i].subject()))
            fail(ErrorKind::invalid_split,
                 "subject '" + *data[i].subject() + "' appears in both partitions");
    }
}

std::vector<MotionSequence> preprocess(std::span<const MotionSequence> data, const DescriptorSpec& descriptor,
                                       DownsampleMode mode, std::size_t length, std::size_t workers) {
    std::vector<std::optional<MotionSequence>> slots(data.size());
    detail::parallel_for(data.size(), workers, [&](std::size_t i) {
        try {
            slots[i] = resample_to_length(extract_descriptor(data[i], descriptor), length, mode);
        } catch (const Error& e) {
            throw Error(e.kind(), "sequence '" + data[i].id() + "': " + e.what());
        }
    });
    std::vector<MotionSequence> out;
    out.reserve(data.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

CrossValidationReport cross_validate(std::span<const MotionSequence> data, const SplitSpec& split_spec,
                                     const ExperimentGrid& grid, std::size_t workers) {
    const auto splits = make_splits(data, split_spec);
    return cross_validate(data, splits, grid, workers);
}

CrossValidationReport cross_validate(std::span<const MotionSequence> data, std::span<const Split> splits,
                                     const ExperimentGrid& grid, std::size_t workers) {
    grid.validate();
    for (const auto& s : splits) validate_split(data, s);
    std::vector<std::string> labels;
    labels.reserve(data.size());
    for (const auto& s : data) labels.push_back(label_of(s));

    CrossValidationReport report;
    for (const auto& desc : grid.descriptors) {
        for (auto mode : grid.modes) {
            for (auto L : grid.lengths) {
                const auto reduced = preprocess(data, desc.spec, mode, L, workers);
                const auto views = views_of(reduced);
                for (const auto& kc : grid.kernels) {
                    const auto logs = log_gram(views, kc.id, kc.params, workers);

                    // cell[split][C] -> (train acc, test acc, converged)
                    struct Cell { double train = 0, test = 0; bool converged = true; };
                    std::vector<std::vector<Cell>> cells(splits.size(), std::vector<Cell>(grid.Cs.size()));
                    detail::parallel_for(splits.size(), workers, [&](std::size_t s) {
                        const auto& sp = splits[s];
                        const auto train_log = block(logs, sp.train, sp.train);
                        const auto cross_log = block(logs, sp.test, sp.train);
                        std::optional<NormBounds> bounds;
                        if (kc.id == KernelId::rdtw_normalized) bounds = capture_bounds(train_log);
                        const auto train_k = exponentiate(train_log, kc.id, bounds);
                        const auto cross_k = exponentiate(cross_log, kc.id, bounds);
                        std::vector<std::string> train_labels, test_labels;
                        for (auto i : sp.train) train_labels.push_back(labels[i]);
                        for (auto i : sp.test) test_labels.push_back(labels[i]);
                        for (std::size_t c = 0; c < grid.Cs.size(); ++c) {
                            SmoOptions opts = grid.smo;
                            opts.C = grid.Cs[c];
                            const auto model = train_one_vs_one(train_k, train_labels, opts);
                            cells[s][c].train = accuracy(predict(model, train_k).labels, train_labels);
                            cells[s][c].test = accuracy(predict(model, cross_k).labels, test_labels);
                            cells[s][c].converged = model.converged();
                        }
                    });
                    for (std::size_t c = 0; c < grid.Cs.size(); ++c) {
                        for (std::size_t s = 0; s < splits.size(); ++s) {
                            report.rows.push_back({desc.name, mode, L, kc, grid.Cs[c], s,
                                                   cells[s][c].train, cells[s][c].test,
                                                   cells[s][c].converged});
                        }
                    }
                }
            }
        }
    }
    return report;
}

double feature_scale(std::span<const MotionSequence> data) {
    if (data.empty()) fail(ErrorKind::invalid_argument, "feature scale of an empty dataset");
    const std::size_t k = data.front().dim();
    std::vector<double> mean(k, 0.0);
    std::size_t frames = 0;
    for (const auto& s : data) {
        if (s.dim() != k) fail(ErrorKind::dimension_mismatch, "sequences differ in pose dimension");
        for (std::size_t t = 0; t < s.length(); ++t) {
            auto p = s.pose(t);
            for (std::size_t d = 0; d < k; ++d) mean[d] += p[d];
        }
        frames += s.length();
    }
    for (auto& m : mean) m /= static_cast<double>(frames);
    double acc = 0.0;
    for (const auto& s : data) {
        for (std::size_t t = 0; t < s.length(); ++t) {
            auto p = s.pose(t);
            for (std::size_t d = 0; d < k; ++d) acc += (p[d] - mean[d]) * (p[d] - mean[d]);
        }
    }
    const double scale = acc / static_cast<double>(frames);
    if (!(scale > 0.0)) fail(ErrorKind::degenerate_training, "dataset has no spread");
    return scale;
}

void TuningSpec::validate() const {
    if (relative_nus.empty() || Cs.empty())
        fail(ErrorKind::invalid_argument, "tuning grids need at least one value");
    for (double nu : relative_nus) {
        KernelParams p = base;
        p.nu = nu;
        p.validate();
    }
    for (double C : Cs) {
        SmoOptions o = smo;
        o.C = C;
        o.validate();
    }
    if (inner_folds < 2) fail(ErrorKind::invalid_argument, "inner selection needs at least 2 folds");
}

std::vector<TunedSplitResult> tuned_cross_validate(std::span<const MotionSequence> data,
                                                   std::span<const Split> splits, const TuningSpec& spec,
                                                   std::size_t workers) {
    spec.validate();
    for (const auto& s : splits) validate_split(data, s);
    std::vector<std::string> labels;
    labels.reserve(data.size());
    for (const auto& s : data) labels.push_back(label_of(s));
    const auto views = views_of(data);

    std::vector<TunedSplitResult> results(splits.size());
    detail::parallel_for(splits.size(), workers, [&](std::size_t si) {
        const auto& sp = splits[si];
        std::vector<MotionSequence> train_data;
        for (auto i : sp.train) train_data.push_back(data[i]);
        const double scale = feature_scale(train_data);

        SplitSpec inner_spec;
        inner_spec.folds = spec.inner_folds;
        inner_spec.seed = spec.seed + 7919 * si;
        const auto inner = make_splits(train_data, inner_spec);

        // log-Gram over [train | test] so every block comes from one table
        std::vector<SeriesView> all;
        for (auto i : sp.train) all.push_back(views[i]);
        for (auto i : sp.test) all.push_back(views[i]);
        std::vector<std::size_t> train_pos(sp.train.size()), test_pos(sp.test.size());
        for (std::size_t i = 0; i < train_pos.size(); ++i) train_pos[i] = i;
        for (std::size_t i = 0; i < test_pos.size(); ++i) test_pos[i] = train_pos.size() + i;
        std::vector<std::string> all_labels;
        for (auto i : sp.train) all_labels.push_back(labels[i]);
        for (auto i : sp.test) all_labels.push_back(labels[i]);

        auto evaluate = [&](const KernelMatrix& logs, std::span<const std::size_t> tr,
                            std::span<const std::size_t> te, double C, double& train_acc, double& test_acc,
                            bool& converged) {
            const auto train_log = block(logs, tr, tr);
            const auto cross_log = block(logs, te, tr);
            std::optional<NormBounds> bounds;
            if (spec.id == KernelId::rdtw_normalized) bounds = capture_bounds(train_log);
            const auto train_k = exponentiate(train_log, spec.id, bounds);
            const auto cross_k = exponentiate(cross_log, spec.id, bounds);
            std::vector<std::string> trl, tel;
            for (auto i : tr) trl.push_back(all_labels[i]);
            for (auto i : te) tel.push_back(all_labels[i]);
            SmoOptions opts = spec.smo;
            opts.C = C;
            const auto model = train_one_vs_one(train_k, trl, opts);
            train_acc = accuracy(predict(model, train_k).labels, trl);
            test_acc = accuracy(predict(model, cross_k).labels, tel);
            converged = model.converged();
        };

        auto& best = results[si];
        best.split = si;
        best.inner_accuracy = -1.0;
        KernelMatrix best_logs;
        for (double rel : spec.relative_nus) {
            KernelParams params = spec.base;
            params.nu = rel / scale;
            const auto logs = log_gram(all, spec.id, params, 1);
            for (double C : spec.Cs) {
                double score = 0.0;
                for (const auto& in : inner) {
                    double tr = 0.0, te = 0.0;
                    bool conv = true;
                    evaluate(logs, in.train, in.test, C, tr, te, conv);
                    score += te;
                }
                score /= static_cast<double>(inner.size());
                if (score > best.inner_accuracy) {
                    best.inner_accuracy = score;
                    best.relative_nu = rel;
                    best.params = params;
                    best.C = C;
                    best_logs = logs;
                }
            }
        }
        evaluate(best_logs, train_pos, test_pos, best.C, best.train_accuracy, best.test_accuracy,
                 best.converged);
    });
    return results;
}

void write_tuned_csv(std::ostream& out, std::span<const TunedSplitResult> results) {
    out << "split,relative_nu,nu,alpha,corridor,C,inner_accuracy,train_accuracy,test_accuracy,converged\n";
    for (const auto& r : results) {
        out << r.split << ',' << fmt(r.relative_nu) << ',' << fmt(r.params.nu) << ',' << fmt(r.params.alpha)
            << ',' << corridor_text(r.params) << ',' << fmt(r.C) << ',' << fmt(r.inner_accuracy) << ','
            << fmt(r.train_accuracy) << ',' << fmt(r.test_accuracy) << ',' << (r.converged ? 1 : 0) << '\n';
    }
}

std::vector<ConfigSummary> CrossValidationReport::summary() const {
    std::vector<ConfigSummary> out;
    std::size_t start = 0;
    while (start < rows.size()) {
        std::size_t end = start;
        while (end < rows.size() && same_config(rows[start], rows[end])) ++end;
        const auto& r0 = rows[start];
        ConfigSummary s{r0.descriptor, r0.mode, r0.length, r0.kernel, r0.C, end - start};
        const double n = static_cast<double>(end - start);
        for (std::size_t i = start; i < end; ++i) {
            s.train_mean += rows[i].train_accuracy;
            s.test_mean += rows[i].test_accuracy;
        }
        s.train_mean /= n;
        s.test_mean /= n;
        for (std::size_t i = start; i < end; ++i) {
            s.train_std += (rows[i].train_accuracy - s.train_mean) * (rows[i].train_accuracy - s.train_mean);
            s.test_std += (rows[i].test_accuracy - s.test_mean) * (rows[i].test_accuracy - s.test_mean);
        }
        s.train_std = std::sqrt(s.train_std / n);
        s.test_std = std::sqrt(s.test_std / n);
        out.push_back(std::move(s));
        start = end;
    }
    return out;
}

void write_results_csv(std::ostream& out, const CrossValidationReport& report) {
    out << "descriptor,mode,L,kernel,nu,alpha,corridor,C,split,train_accuracy,test_accuracy,converged\n";
    for (const auto& r : report.rows) {
        out << r.descriptor << ',' << to_string(r.mode) << ',' << r.length << ','
            << to_string(r.kernel.id) << ',' << fmt(r.kernel.params.nu) << ','
            << fmt(r.kernel.params.alpha) << ',' << corridor_text(r.kernel.params) << ','
            << fmt(r.C) << ',' << r.split << ',' << fmt(r.train_accuracy) << ','
            << fmt(r.test_accuracy) << ',' << (r.converged ? 1 : 0) << '\n';
    }
}

void write_summary_csv(std::ostream& out, const std::vector<ConfigSummary>& summary) {
    out << "descriptor,mode,L,kernel,nu,alpha,corridor,C,splits,train_mean,train_std,test_mean,test_std\n";
    for (const auto& s : summary) {
        out << s.descriptor << ',' << to_string(s.mode) << ',' << s.length << ','
            << to_string(s.kernel.id) << ',' << fmt(s.kernel.params.nu) << ','
            << fmt(s.kernel.params.alpha) << ',' << corridor_text(s.kernel.params) << ','
            << fmt(s.C) << ',' << s.splits << ',' << fmt(s.train_mean) << ','
            << fmt(s.train_std) << ',' << fmt(s.test_mean) << ',' << fmt(s.test_std) << '\n';
    }
}

}  // namespace ekm
