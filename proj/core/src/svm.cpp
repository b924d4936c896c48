#include "ekm/svm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "ekm/error.hpp"

namespace ekm {

namespace {

constexpr double kTau = 1e-12;

// SMO over a precomputed kernel with maximal-violating-pair selection,
// no shrinking. Minimizes 1/2 a'Qa - e'a with Q_ij = y_i y_j K_ij.
class SmoSolver {
public:
    SmoSolver(const GramMatrix& gram, std::span<const std::size_t> rows, std::span<const int> y,
              const SmoOptions& opts)
        : gram_(gram), rows_(rows), y_(y), opts_(opts), n_(rows.size()) {}

    BinaryDual solve() {
        alpha_.assign(n_, 0.0);
        grad_.assign(n_, -1.0);
        best_alpha_ = alpha_;
        best_grad_ = grad_;
        best_obj_ = 0.0;

        BinaryDual out;
        out.C = opts_.C;
        std::uint64_t lookups = 0;
        for (;;) {
            std::size_t i = 0, j = 0;
            if (!select(i, j)) {
                out.converged = true;
                break;
            }
            if (lookups + 2 * n_ > opts_.max_kernel_lookups) break;
            lookups += 2 * n_;
            ++out.iterations;
            step(i, j);

            const double obj = objective();
            if (obj < best_obj_) {
                best_obj_ = obj;
                best_alpha_ = alpha_;
                best_grad_ = grad_;
            }
        }
        if (!out.converged) {
            alpha_ = best_alpha_;
            grad_ = best_grad_;
        }

        out.bias = -rho();
        for (std::size_t t = 0; t < n_; ++t) {
            if (alpha_[t] > 0.0) {
                out.support_indices.push_back(rows_[t]);
                out.alphas.push_back(alpha_[t]);
                out.labels.push_back(y_[t]);
            }
        }
        return out;
    }

private:
    double k(std::size_t a, std::size_t b) const { return gram_(rows_[a], rows_[b]); }
    double q(std::size_t a, std::size_t b) const { return y_[a] * y_[b] * k(a, b); }
    bool at_upper(std::size_t t) const { return alpha_[t] >= opts_.C; }
    bool at_lower(std::size_t t) const { return alpha_[t] <= 0.0; }

    bool select(std::size_t& i, std::size_t& j) const {
        double gmax = -std::numeric_limits<double>::infinity();
        double gmax2 = -std::numeric_limits<double>::infinity();
        bool found_i = false, found_j = false;
        for (std::size_t t = 0; t < n_; ++t) {
            const double v = -y_[t] * grad_[t];
            const bool up = y_[t] == 1 ? !at_upper(t) : !at_lower(t);
            const bool low = y_[t] == 1 ? !at_lower(t) : !at_upper(t);
            if (up && v > gmax) {
                gmax = v;
                i = t;
                found_i = true;
            }
            if (low && -v > gmax2) {
                gmax2 = -v;
                j = t;
                found_j = true;
            }
        }
        return found_i && found_j && gmax + gmax2 >= opts_.tol;
    }

    void step(std::size_t i, std::size_t j) {
        const double C = opts_.C;
        const double old_i = alpha_[i];
        const double old_j = alpha_[j];
        const double kii = k(i, i), kjj = k(j, j), qij = q(i, j);
        if (y_[i] != y_[j]) {
            double quad = kii + kjj + 2.0 * qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad_[i] - grad_[j]) / quad;
            const double diff = alpha_[i] - alpha_[j];
            alpha_[i] += delta;
            alpha_[j] += delta;
            if (diff > 0.0) {
                if (alpha_[j] < 0.0) { alpha_[j] = 0.0; alpha_[i] = diff; }
            } else {
                if (alpha_[i] < 0.0) { alpha_[i] = 0.0; alpha_[j] = -diff; }
            }
            if (diff > 0.0) {
                if (alpha_[i] > C) { alpha_[i] = C; alpha_[j] = C - diff; }
            } else {
                if (alpha_[j] > C) { alpha_[j] = C; alpha_[i] = C + diff; }
            }
        } else {
            double quad = kii + kjj - 2.0 * qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad_[i] - grad_[j]) / quad;
            const double sum = alpha_[i] + alpha_[j];
            alpha_[i] -= delta;
            alpha_[j] += delta;
            if (sum > C) {
                if (alpha_[i] > C) { alpha_[i] = C; alpha_[j] = sum - C; }
            } else {
                if (alpha_[j] < 0.0) { alpha_[j] = 0.0; alpha_[i] = sum; }
            }
            if (sum > C) {
                if (alpha_[j] > C) { alpha_[j] = C; alpha_[i] = sum - C; }
            } else {
                if (alpha_[i] < 0.0) { alpha_[i] = 0.0; alpha_[j] = sum; }
            }
        }
        const double di = alpha_[i] - old_i;
        const double dj = alpha_[j] - old_j;
        for (std::size_t t = 0; t < n_; ++t) grad_[t] += q(t, i) * di + q(t, j) * dj;
    }

    // 1/2 a'Qa - e'a = 1/2 a'(G - e) since G = Qa - e.
    double objective() const {
        double acc = 0.0;
        for (std::size_t t = 0; t < n_; ++t) acc += alpha_[t] * (grad_[t] - 1.0);
        return 0.5 * acc;
    }

    double rho() const {
        double ub = std::numeric_limits<double>::infinity();
        double lb = -std::numeric_limits<double>::infinity();
        double sum_free = 0.0;
        std::size_t n_free = 0;
        for (std::size_t t = 0; t < n_; ++t) {
            const double yg = y_[t] * grad_[t];
            if (at_upper(t)) {
                if (y_[t] == -1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
            } else if (at_lower(t)) {
                if (y_[t] == 1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
            } else {
                ++n_free;
                sum_free += yg;
            }
        }
        if (n_free > 0) return sum_free / static_cast<double>(n_free);
        return (ub + lb) / 2.0;
    }

    const GramMatrix& gram_;
    std::span<const std::size_t> rows_;
    std::span<const int> y_;
    SmoOptions opts_;
    std::size_t n_;
    std::vector<double> alpha_, grad_, best_alpha_, best_grad_;
    double best_obj_ = 0.0;
};

nlohmann::json dual_to_json(const BinaryDual& d) {
    return {{"support_indices", d.support_indices}, {"alphas", d.alphas}, {"labels", d.labels},
            {"bias", d.bias}, {"C", d.C}, {"converged", d.converged}, {"iterations", d.iterations}};
}

BinaryDual dual_from_json(const nlohmann::json& j) {
    BinaryDual d;
    d.support_indices = j.at("support_indices").get<std::vector<std::size_t>>();
    d.alphas = j.at("alphas").get<std::vector<double>>();
    d.labels = j.at("labels").get<std::vector<int>>();
    d.bias = j.at("bias").get<double>();
    d.C = j.at("C").get<double>();
    d.converged = j.at("converged").get<bool>();
    d.iterations = j.at("iterations").get<std::uint64_t>();
    if (d.alphas.size() != d.support_indices.size() || d.labels.size() != d.support_indices.size())
        fail(ErrorKind::schema, "model coefficient arrays have mismatched lengths");
    return d;
}

}  // namespace

void SmoOptions::validate() const {
    if (!(C > 0.0) || !std::isfinite(C)) fail(ErrorKind::invalid_argument, "C must be positive");
    if (!(tol > 0.0)) fail(ErrorKind::invalid_argument, "tolerance must be positive");
    if (max_kernel_lookups == 0) fail(ErrorKind::invalid_argument, "lookup budget must be positive");
}

double BinaryDual::decision(std::span<const double> kernel_row) const {
    double f = bias;
    for (std::size_t s = 0; s < support_indices.size(); ++s)
        f += alphas[s] * labels[s] * kernel_row[support_indices[s]];
    return f;
}

BinaryDual train_binary(const GramMatrix& gram, std::span<const int> labels, const SmoOptions& opts) {
    std::vector<std::size_t> rows(gram.rows);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return train_binary(gram, rows, labels, opts);
}

BinaryDual train_binary(const GramMatrix& gram, std::span<const std::size_t> rows,
                        std::span<const int> labels, const SmoOptions& opts) {
    opts.validate();
    if (!gram.square()) fail(ErrorKind::invalid_argument, "training needs a square Gram matrix");
    if (labels.size() != rows.size())
        fail(ErrorKind::invalid_argument, "label count does not match training rows");
    bool pos = false, neg = false;
    for (std::size_t t = 0; t < labels.size(); ++t) {
        if (labels[t] == 1) pos = true;
        else if (labels[t] == -1) neg = true;
        else fail(ErrorKind::invalid_argument, "binary labels must be +1 or -1");
        if (rows[t] >= gram.rows) fail(ErrorKind::invalid_argument, "training row out of range");
    }
    if (!pos || !neg) fail(ErrorKind::degenerate_training, "binary training needs both classes");
    return SmoSolver(gram, rows, labels, opts).solve();
}

double dual_objective(const GramMatrix& gram, const BinaryDual& dual) {
    double linear = 0.0, quad = 0.0;
    const std::size_t m = dual.support_indices.size();
    for (std::size_t a = 0; a < m; ++a) {
        linear += dual.alphas[a];
        for (std::size_t b = 0; b < m; ++b) {
            quad += dual.alphas[a] * dual.alphas[b] * dual.labels[a] * dual.labels[b] *
                    gram(dual.support_indices[a], dual.support_indices[b]);
        }
    }
    return linear - 0.5 * quad;
}

bool SvmModel::converged() const {
    return std::all_of(pairwise.begin(), pairwise.end(),
                       [](const PairwiseModel& p) { return p.dual.converged; });
}

SvmModel train_one_vs_one(const GramMatrix& gram, std::span<const std::string> labels,
                          const SmoOptions& opts) {
    if (labels.size() != gram.rows)
        fail(ErrorKind::invalid_argument, "label count does not match Gram order");
    SvmModel model;
    model.class_labels.assign(labels.begin(), labels.end());
    std::sort(model.class_labels.begin(), model.class_labels.end());
    model.class_labels.erase(std::unique(model.class_labels.begin(), model.class_labels.end()),
                             model.class_labels.end());
    if (model.class_labels.size() < 2)
        fail(ErrorKind::degenerate_training, "training data holds a single class");
    model.C = opts.C;
    model.provenance = {gram.kernel_id, gram.params, gram.norm_bounds, gram.rows};

    const std::size_t m = model.class_labels.size();
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) {
            std::vector<std::size_t> rows;
            std::vector<int> y;
            for (std::size_t r = 0; r < labels.size(); ++r) {
                if (labels[r] == model.class_labels[a]) { rows.push_back(r); y.push_back(1); }
                else if (labels[r] == model.class_labels[b]) { rows.push_back(r); y.push_back(-1); }
            }
            model.pairwise.push_back({a, b, train_binary(gram, rows, y, opts)});
        }
    }
    return model;
}

Prediction predict(const SvmModel& model, const KernelMatrix& cross) {
    const ModelProvenance seen{cross.kernel_id, cross.params, cross.norm_bounds, cross.cols};
    if (!(seen == model.provenance))
        fail(ErrorKind::provenance_mismatch,
             "kernel matrix provenance (" + std::string(to_string(cross.kernel_id)) + ", " +
                 std::to_string(cross.cols) + " training columns) does not match the model (" +
                 std::string(to_string(model.provenance.kernel_id)) + ", " +
                 std::to_string(model.provenance.train_size) + " training columns)");

    const std::size_t m = model.class_labels.size();
    Prediction out;
    out.labels.reserve(cross.rows);
    for (std::size_t r = 0; r < cross.rows; ++r) {
        std::span<const double> row(cross.values.data() + r * cross.cols, cross.cols);
        std::vector<double> values;
        std::vector<std::size_t> votes(m, 0);
        std::vector<double> strength(m, 0.0);
        for (const auto& pm : model.pairwise) {
            const double f = pm.dual.decision(row);
            values.push_back(f);
            const std::size_t winner = f > 0.0 ? pm.positive : pm.negative;
            ++votes[winner];
            strength[winner] += std::abs(f);
        }
        std::size_t best = 0;
        for (std::size_t c = 1; c < m; ++c) {
            if (votes[c] > votes[best] || (votes[c] == votes[best] && strength[c] > strength[best]))
                best = c;
        }
        out.labels.push_back(model.class_labels[best]);
        out.decision_values.push_back(std::move(values));
        out.votes.push_back(std::move(votes));
    }
    return out;
}

double accuracy(std::span<const std::string> predicted, std::span<const std::string> truth) {
    if (predicted.size() != truth.size())
        fail(ErrorKind::invalid_argument, "prediction and truth lengths differ");
    if (truth.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i];
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

std::string model_to_json(const SvmModel& model) {
    nlohmann::json j;
    j["format"] = "ekm-svm-model";
    j["version"] = 1;
    j["class_labels"] = model.class_labels;
    j["C"] = model.C;
    auto& prov = j["provenance"];
    prov["kernel_id"] = std::string(to_string(model.provenance.kernel_id));
    prov["nu"] = model.provenance.params.nu;
    prov["alpha"] = model.provenance.params.alpha;
    prov["corridor_radius"] = model.provenance.params.corridor_radius
                                  ? nlohmann::json(*model.provenance.params.corridor_radius)
                                  : nlohmann::json(nullptr);
    if (model.provenance.norm_bounds)
        prov["norm_bounds"] = {{"log_min", model.provenance.norm_bounds->log_min},
                               {"log_max", model.provenance.norm_bounds->log_max}};
    else
        prov["norm_bounds"] = nullptr;
    prov["train_size"] = model.provenance.train_size;
    j["pairwise"] = nlohmann::json::array();
    for (const auto& pm : model.pairwise) {
        auto d = dual_to_json(pm.dual);
        d["positive"] = pm.positive;
        d["negative"] = pm.negative;
        j["pairwise"].push_back(std::move(d));
    }
    return j.dump(2);
}

SvmModel model_from_json(const std::string& text) {
    SvmModel model;
    try {
        const auto j = nlohmann::json::parse(text);
        if (j.at("format").get<std::string>() != "ekm-svm-model")
            fail(ErrorKind::schema, "not an SVM model document");
        model.class_labels = j.at("class_labels").get<std::vector<std::string>>();
        model.C = j.at("C").get<double>();
        const auto& prov = j.at("provenance");
        model.provenance.kernel_id = parse_kernel_id(prov.at("kernel_id").get<std::string>());
        model.provenance.params.nu = prov.at("nu").get<double>();
        model.provenance.params.alpha = prov.at("alpha").get<double>();
        if (!prov.at("corridor_radius").is_null())
            model.provenance.params.corridor_radius = prov.at("corridor_radius").get<std::size_t>();
        if (!prov.at("norm_bounds").is_null())
            model.provenance.norm_bounds = NormBounds{prov["norm_bounds"].at("log_min").get<double>(),
                                                      prov["norm_bounds"].at("log_max").get<double>()};
        model.provenance.train_size = prov.at("train_size").get<std::size_t>();
        for (const auto& d : j.at("pairwise")) {
            model.pairwise.push_back(
                {d.at("positive").get<std::size_t>(), d.at("negative").get<std::size_t>(), dual_from_json(d)});
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::schema, std::string("bad model document: ") + e.what());
    }
    const std::size_t m = model.class_labels.size();
    if (model.pairwise.size() != m * (m - 1) / 2)
        fail(ErrorKind::schema, "model must hold one binary machine per class pair");
    return model;
}

void save_model(const std::filesystem::path& path, const SvmModel& model) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::io, "cannot open " + path.string() + " for writing");
    out << model_to_json(model) << '\n';
}

SvmModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::io, "cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return model_from_json(ss.str());
}

}  // namespace ekm
