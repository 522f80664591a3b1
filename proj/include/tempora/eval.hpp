#pragma once

// Stratified k-fold cross-validation, confusion matrices and baselines.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tempora/error.hpp"
#include "tempora/features.hpp"
#include "tempora/models.hpp"
#include "tempora/random.hpp"

namespace tempora {

struct FoldAssignment {
    std::size_t k = 0;
    std::vector<std::size_t> fold; // per example

    std::vector<std::size_t> test_indices(std::size_t f) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < fold.size(); ++i)
            if (fold[i] == f) out.push_back(i);
        return out;
    }

    std::vector<std::size_t> train_indices(std::size_t f) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < fold.size(); ++i)
            if (fold[i] != f) out.push_back(i);
        return out;
    }
};

/// Each class's examples are shuffled with a stream derived from (seed,
/// class) and dealt round-robin. Dealing continues where the previous class
/// stopped, so overall fold sizes also differ by at most one.
inline FoldAssignment stratified_kfold(std::span<const std::size_t> labels, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw ConfigError("k must be >= 2, got " + std::to_string(k));
    FoldAssignment fa;
    fa.k = k;
    fa.fold.assign(labels.size(), 0);
    const std::size_t n_classes = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<std::vector<std::size_t>> by_class(n_classes);
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

    std::size_t next = 0;
    for (std::size_t c = 0; c < n_classes; ++c) {
        auto& members = by_class[c];
        Rng rng(derive_seed(seed, "kfold", c));
        rng.shuffle(std::span<std::size_t>(members));
        for (auto i : members) {
            fa.fold[i] = next;
            next = (next + 1) % k;
        }
    }
    return fa;
}

class ConfusionMatrix {
public:
    ConfusionMatrix() = default;
    explicit ConfusionMatrix(std::size_t n_classes) : n_(n_classes), counts_(n_classes * n_classes, 0) {}

    std::size_t n_classes() const noexcept { return n_; }
    void add(std::size_t truth, std::size_t predicted, std::size_t count = 1) { counts_.at(truth * n_ + predicted) += count; }
    std::size_t at(std::size_t truth, std::size_t predicted) const { return counts_.at(truth * n_ + predicted); }

    ConfusionMatrix& operator+=(const ConfusionMatrix& other) {
        for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_.at(i);
        return *this;
    }

    std::size_t total() const noexcept { return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0}); }

    std::size_t trace() const noexcept {
        std::size_t t = 0;
        for (std::size_t c = 0; c < n_; ++c) t += counts_[c * n_ + c];
        return t;
    }

    std::size_t row_sum(std::size_t truth) const {
        std::size_t s = 0;
        for (std::size_t p = 0; p < n_; ++p) s += at(truth, p);
        return s;
    }

    std::size_t column_sum(std::size_t predicted) const {
        std::size_t s = 0;
        for (std::size_t t = 0; t < n_; ++t) s += at(t, predicted);
        return s;
    }

    double accuracy() const noexcept {
        const auto n = total();
        return n ? static_cast<double>(trace()) / static_cast<double>(n) : 0.0;
    }

    // 0 when the class was never predicted / never occurs.
    double precision(std::size_t c) const {
        const auto col = column_sum(c);
        return col ? static_cast<double>(at(c, c)) / static_cast<double>(col) : 0.0;
    }
    double recall(std::size_t c) const {
        const auto row = row_sum(c);
        return row ? static_cast<double>(at(c, c)) / static_cast<double>(row) : 0.0;
    }

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

private:
    std::size_t n_ = 0;
    std::vector<std::size_t> counts_;
};

/// Accuracy of always predicting the most frequent label.
inline double majority_baseline(std::span<const std::size_t> labels) {
    if (labels.empty()) throw Error("majority baseline of an empty label set");
    const std::size_t n_classes = *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<std::size_t> counts(n_classes, 0);
    for (auto y : labels) ++counts[y];
    return static_cast<double>(*std::max_element(counts.begin(), counts.end())) / static_cast<double>(labels.size());
}

inline double random_baseline(std::size_t n_classes) {
    if (n_classes < 1) throw Error("random baseline needs at least one class");
    return 1.0 / static_cast<double>(n_classes);
}

// ---------------------------------------------------------------------------

struct EvalReport {
    std::vector<std::string> labels;
    double accuracy = 0.0;
    std::vector<double> fold_accuracies;
    ConfusionMatrix confusion;
    std::vector<double> precision;
    std::vector<double> recall;
    double majority_baseline = 0.0;
    double random_baseline = 0.0;
    nlohmann::json config;
    std::vector<std::string> warnings;
};

/// What a fold saw; handed to the optional observer of cross_validate.
struct FoldContext {
    std::size_t fold = 0;
    std::span<const std::size_t> train;
    std::span<const std::size_t> test;
    const Vocabulary& vocabulary;
};

struct CrossValidationSetup {
    FeaturizerConfig features;
    ModelKind model = ModelKind::svm;
    TrainConfig train;
    std::size_t k = 10;
    std::uint64_t seed = 0;
};

/// Per fold: vocabulary from the training documents only, train, predict the
/// held-out fold. Fold f trains with seed derive_seed(seed, "fold", f).
inline EvalReport cross_validate(std::span<const DocumentView> docs, std::span<const std::size_t> labels,
                                 std::span<const std::string> class_labels, const CrossValidationSetup& setup,
                                 const std::function<void(const FoldContext&)>& observer = {}) {
    if (docs.size() != labels.size()) throw ConfigError("document and label counts differ");
    setup.features.validate();
    setup.train.validate();
    const std::size_t n_classes = class_labels.size();
    for (auto y : labels)
        if (y >= n_classes) throw ConfigError("label " + std::to_string(y) + " has no class name");
    {
        std::vector<bool> present(n_classes, false);
        for (auto y : labels) present[y] = true;
        if (std::count(present.begin(), present.end(), true) < 2)
            throw ConfigError("cross-validation needs at least two classes present");
    }

    const auto folds = stratified_kfold(labels, setup.k, setup.seed);

    EvalReport report;
    report.labels.assign(class_labels.begin(), class_labels.end());
    report.confusion = ConfusionMatrix(n_classes);

    for (std::size_t f = 0; f < setup.k; ++f) {
        const auto train_idx = folds.train_indices(f);
        const auto test_idx = folds.test_indices(f);
        if (test_idx.empty()) continue;

        std::vector<DocumentView> train_docs;
        train_docs.reserve(train_idx.size());
        for (auto i : train_idx) train_docs.push_back(docs[i]);
        const auto vocab = build_vocabulary(train_docs, setup.features);
        if (observer) observer(FoldContext{f, train_idx, test_idx, vocab});

        Dataset data;
        data.n_classes = n_classes;
        data.n_features = vocab.size();
        for (auto i : train_idx) {
            data.vectors.push_back(vectorize(docs[i], vocab));
            data.labels.push_back(labels[i]);
        }
        auto cfg = setup.train;
        cfg.seed = derive_seed(setup.seed, "fold", f);
        const auto model = train(setup.model, data, cfg);

        ConfusionMatrix fold_cm(n_classes);
        for (auto i : test_idx) fold_cm.add(labels[i], predict(scores(model, vectorize(docs[i], vocab))));
        report.fold_accuracies.push_back(fold_cm.accuracy());
        report.confusion += fold_cm;
    }

    report.accuracy = report.confusion.accuracy();
    for (std::size_t c = 0; c < n_classes; ++c) {
        report.precision.push_back(report.confusion.precision(c));
        report.recall.push_back(report.confusion.recall(c));
    }
    report.majority_baseline = majority_baseline(labels);
    report.random_baseline = random_baseline(n_classes);
    report.config = {
        {"features", format_feature_specs(setup.features.specs)},
        {"min_doc_freq", setup.features.min_doc_freq},
        {"weighting", setup.features.weighting == Weighting::raw_count ? "raw-count" : "l2-normalized"},
        {"model", to_string(setup.model)},
        {"C", setup.train.C},
        {"tol", setup.train.tol},
        {"max_iter", setup.train.max_iter},
        {"alpha", setup.train.alpha},
        {"k", setup.k},
        {"seed", setup.seed},
    };
    return report;
}

// ---------------------------------------------------------------------------
// Rendering

inline nlohmann::json to_json(const EvalReport& r) {
    nlohmann::json confusion = nlohmann::json::array();
    for (std::size_t t = 0; t < r.confusion.n_classes(); ++t) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t p = 0; p < r.confusion.n_classes(); ++p) row.push_back(r.confusion.at(t, p));
        confusion.push_back(std::move(row));
    }
    nlohmann::json per_class = nlohmann::json::array();
    for (std::size_t c = 0; c < r.labels.size(); ++c)
        per_class.push_back({{"label", r.labels[c]},
                             {"precision", r.precision[c]},
                             {"recall", r.recall[c]},
                             {"support", r.confusion.row_sum(c)}});
    return {
        {"accuracy", r.accuracy},
        {"fold_accuracies", r.fold_accuracies},
        {"labels", r.labels},
        {"confusion", confusion},
        {"per_class", per_class},
        {"baselines", {{"majority", r.majority_baseline}, {"random", r.random_baseline}}},
        {"config", r.config},
        {"warnings", r.warnings},
    };
}

inline std::string percent(double fraction) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(1) << 100.0 * fraction;
    return s.str();
}

inline void render_text(std::ostream& out, const EvalReport& r) {
    std::size_t width = 5;
    for (const auto& l : r.labels) width = std::max(width, l.size());

    out << "Accuracy (%)        " << percent(r.accuracy) << '\n';
    out << "Majority baseline   " << percent(r.majority_baseline) << '\n';
    out << "Random baseline     " << percent(r.random_baseline) << '\n';
    out << "Folds               " << r.fold_accuracies.size() << " (";
    for (std::size_t i = 0; i < r.fold_accuracies.size(); ++i) out << (i ? " " : "") << percent(r.fold_accuracies[i]);
    out << ")\n\n";

    out << std::left << std::setw(static_cast<int>(width)) << "class" << std::right << std::setw(11) << "precision"
        << std::setw(9) << "recall" << std::setw(9) << "support" << '\n';
    for (std::size_t c = 0; c < r.labels.size(); ++c)
        out << std::left << std::setw(static_cast<int>(width)) << r.labels[c] << std::right << std::setw(11)
            << percent(r.precision[c]) << std::setw(9) << percent(r.recall[c]) << std::setw(9) << r.confusion.row_sum(c)
            << '\n';
    for (const auto& w : r.warnings) out << "\nwarning: " << w << '\n';
}

/// Header row of predicted labels; one row per true label.
inline void write_confusion_csv(std::ostream& out, const ConfusionMatrix& cm, std::span<const std::string> labels) {
    out << "true\\predicted";
    for (const auto& l : labels) out << ',' << l;
    out << '\n';
    for (std::size_t t = 0; t < cm.n_classes(); ++t) {
        out << labels[t];
        for (std::size_t p = 0; p < cm.n_classes(); ++p) out << ',' << cm.at(t, p);
        out << '\n';
    }
}

} // namespace tempora
