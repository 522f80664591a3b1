#pragma once

// Multinomial Naive Bayes and one-vs-rest linear SVM over sparse vectors.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tempora/error.hpp"
#include "tempora/features.hpp"
#include "tempora/random.hpp"

namespace tempora {

struct Dataset {
    std::vector<SparseVector> vectors;
    std::vector<std::size_t> labels;
    std::size_t n_classes = 0;
    std::size_t n_features = 0;

    std::size_t size() const noexcept { return vectors.size(); }

    void validate() const {
        if (vectors.size() != labels.size()) throw TrainingError("dataset has mismatched vector and label counts");
        for (std::size_t i = 0; i < vectors.size(); ++i) {
            if (labels[i] >= n_classes)
                throw TrainingError("example " + std::to_string(i) + " has label " + std::to_string(labels[i]) +
                                    " >= n_classes " + std::to_string(n_classes));
            std::int64_t prev = -1;
            for (const auto& e : vectors[i]) {
                if (static_cast<std::int64_t>(e.index) <= prev || e.index >= n_features)
                    throw TrainingError("example " + std::to_string(i) + " has unsorted or out-of-range indices");
                if (!std::isfinite(e.value))
                    throw TrainingError("example " + std::to_string(i) + " has a non-finite feature value");
                prev = e.index;
            }
        }
    }

    std::vector<std::size_t> class_counts() const {
        std::vector<std::size_t> counts(n_classes, 0);
        for (auto y : labels) ++counts[y];
        return counts;
    }
};

struct TrainConfig {
    double C = 1.0;
    double tol = 0.1;
    std::size_t max_iter = 1000;
    double alpha = 1.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(C > 0) || !(tol > 0) || !(alpha > 0) || max_iter == 0)
            throw ConfigError("C, tol, alpha and max_iter must all be positive");
    }
};

/// Argmax; exact ties go to the lowest class index.
inline std::size_t predict(std::span<const double> scores) {
    if (scores.empty()) throw Error("cannot predict from an empty score vector");
    std::size_t best = 0;
    for (std::size_t c = 0; c < scores.size(); ++c) {
        if (std::isnan(scores[c])) throw Error("NaN score for class " + std::to_string(c));
        if (scores[c] > scores[best]) best = c;
    }
    return best;
}

// ---------------------------------------------------------------------------
// Multinomial Naive Bayes

struct MnbModel {
    std::vector<double> log_priors;
    std::vector<std::vector<double>> log_likelihoods; // [class][feature]
    double alpha = 1.0;

    std::size_t n_classes() const noexcept { return log_priors.size(); }
    std::size_t n_features() const noexcept { return log_likelihoods.empty() ? 0 : log_likelihoods.front().size(); }
};

/// log P(c) = log(N_c / N);
/// log P(f|c) = log((count(c,f) + alpha) / (total(c) + alpha * V)).
inline MnbModel train_mnb(const Dataset& data, double alpha) {
    data.validate();
    if (!(alpha > 0)) throw ConfigError("MNB smoothing alpha must be > 0");
    if (data.n_classes < 2) throw TrainingError("training needs at least two classes");
    const auto counts = data.class_counts();
    for (std::size_t c = 0; c < data.n_classes; ++c)
        if (counts[c] == 0) throw TrainingError("class " + std::to_string(c) + " has no training documents");

    const std::size_t V = data.n_features;
    std::vector<std::vector<double>> feature_counts(data.n_classes, std::vector<double>(V, 0.0));
    std::vector<double> totals(data.n_classes, 0.0);
    for (std::size_t i = 0; i < data.size(); ++i) {
        auto& row = feature_counts[data.labels[i]];
        for (const auto& e : data.vectors[i]) {
            row[e.index] += e.value;
            totals[data.labels[i]] += e.value;
        }
    }

    MnbModel m;
    m.alpha = alpha;
    const auto N = static_cast<double>(data.size());
    for (std::size_t c = 0; c < data.n_classes; ++c) {
        m.log_priors.push_back(std::log(static_cast<double>(counts[c]) / N));
        const double denom = std::log(totals[c] + alpha * static_cast<double>(V));
        std::vector<double> ll(V);
        for (std::size_t f = 0; f < V; ++f) ll[f] = std::log(feature_counts[c][f] + alpha) - denom;
        m.log_likelihoods.push_back(std::move(ll));
    }
    return m;
}

/// Unnormalized log posteriors: log P(c) + sum_f x_f log P(f|c).
inline std::vector<double> mnb_scores(const MnbModel& model, const SparseVector& x) {
    std::vector<double> s(model.log_priors);
    for (std::size_t c = 0; c < s.size(); ++c) s[c] += x.dot(model.log_likelihoods[c]);
    return s;
}

// ---------------------------------------------------------------------------
// Binary L2-regularized L2-loss SVM, dual coordinate descent.
//
//   primal:  min_w  0.5 |w|^2 + C sum_i max(0, 1 - y_i w.x_i)^2
//   dual:    min_a  0.5 a'(Q + D)a - e'a,  a_i >= 0,
//            Q_ij = y_i y_j x_i.x_j,  D_ii = 1/(2C)
//
// One coordinate at a time with w = sum_i a_i y_i x_i maintained
// incrementally, coordinate order reshuffled every epoch, and shrinking of
// coordinates stuck at the bound. Stops when the spread of projected
// gradients over the active set is <= tol (checked again on the full set).

struct BinaryProblem {
    std::span<const SparseVector> x;
    std::span<const std::int8_t> y; // +1 / -1
    std::size_t n_features = 0;
    bool bias = true; // augment with a constant feature of value 1 at index n_features
};

struct BinarySolution {
    std::vector<double> w; // n_features (+1 with bias)
    std::vector<double> alpha;
    std::size_t iterations = 0;
    bool converged = false;
};

namespace detail {

inline double augmented_dot(const std::vector<double>& w, const SparseVector& x, std::size_t n_features, bool bias) {
    double s = 0.0;
    for (const auto& e : x) s += w[e.index] * e.value;
    if (bias) s += w[n_features];
    return s;
}

inline void augmented_axpy(std::vector<double>& w, double a, const SparseVector& x, std::size_t n_features, bool bias) {
    for (const auto& e : x) w[e.index] += a * e.value;
    if (bias) w[n_features] += a;
}

} // namespace detail

inline BinarySolution solve_l2loss_svm_dual(const BinaryProblem& prob, double C, double tol, std::size_t max_iter,
                                            std::uint64_t seed) {
    const std::size_t l = prob.x.size();
    if (prob.y.size() != l) throw TrainingError("label count does not match example count");
    const std::size_t dim = prob.n_features + (prob.bias ? 1 : 0);
    constexpr double inf = std::numeric_limits<double>::infinity();
    const double diag = 0.5 / C;

    BinarySolution sol;
    sol.w.assign(dim, 0.0);
    sol.alpha.assign(l, 0.0);
    if (l == 0) {
        sol.converged = true;
        return sol;
    }

    std::vector<double> qd(l);
    std::vector<std::size_t> index(l);
    for (std::size_t i = 0; i < l; ++i) {
        double sq = prob.x[i].squared_norm();
        if (prob.bias) sq += 1.0;
        qd[i] = diag + sq;
        index[i] = i;
    }

    Rng rng(seed);
    std::size_t active = l;
    double pg_max_old = inf;
    auto& w = sol.w;
    auto& alpha = sol.alpha;

    while (sol.iterations < max_iter) {
        double pg_max_new = -inf;
        double pg_min_new = inf;

        rng.shuffle(std::span<std::size_t>(index.data(), active));

        for (std::size_t s = 0; s < active; ++s) {
            const std::size_t i = index[s];
            const double yi = prob.y[i];
            const double G = yi * detail::augmented_dot(w, prob.x[i], prob.n_features, prob.bias) - 1.0 + alpha[i] * diag;

            double pg = 0.0;
            if (alpha[i] == 0.0) {
                if (G > pg_max_old) {
                    --active;
                    std::swap(index[s], index[active]);
                    --s;
                    continue;
                }
                if (G < 0.0) pg = G;
            } else {
                pg = G;
            }
            pg_max_new = std::max(pg_max_new, pg);
            pg_min_new = std::min(pg_min_new, pg);

            if (std::fabs(pg) > 1.0e-12) {
                const double old = alpha[i];
                alpha[i] = std::max(alpha[i] - G / qd[i], 0.0);
                detail::augmented_axpy(w, (alpha[i] - old) * yi, prob.x[i], prob.n_features, prob.bias);
            }
        }

        ++sol.iterations;

        if (pg_max_new - pg_min_new <= tol) {
            if (active == l) {
                sol.converged = true;
                break;
            }
            active = l;
            pg_max_old = inf;
            continue;
        }
        pg_max_old = pg_max_new <= 0 ? inf : pg_max_new;
    }
    return sol;
}

/// 0.5 |w|^2 + C sum_i max(0, 1 - y_i w.x_i)^2
inline double l2loss_primal_objective(const BinaryProblem& prob, std::span<const double> w, double C) {
    const std::vector<double> wv(w.begin(), w.end());
    double obj = 0.0;
    for (double v : w) obj += 0.5 * v * v;
    for (std::size_t i = 0; i < prob.x.size(); ++i) {
        const double margin = 1.0 - prob.y[i] * detail::augmented_dot(wv, prob.x[i], prob.n_features, prob.bias);
        if (margin > 0) obj += C * margin * margin;
    }
    return obj;
}

/// Dual objective in maximization form: sum a - 0.5 |w(a)|^2 - sum a^2 / (4C).
/// Never exceeds the primal objective; equal at the optimum.
inline double l2loss_dual_objective(const BinaryProblem& prob, std::span<const double> alpha, double C) {
    const std::size_t dim = prob.n_features + (prob.bias ? 1 : 0);
    std::vector<double> w(dim, 0.0);
    double obj = 0.0;
    for (std::size_t i = 0; i < prob.x.size(); ++i) {
        detail::augmented_axpy(w, alpha[i] * prob.y[i], prob.x[i], prob.n_features, prob.bias);
        obj += alpha[i] - alpha[i] * alpha[i] / (4.0 * C);
    }
    for (double v : w) obj -= 0.5 * v * v;
    return obj;
}

// ---------------------------------------------------------------------------
// One-vs-rest linear model

struct LinearModel {
    std::vector<std::vector<double>> weights; // [class][n_features + 1], last entry is the bias weight
    std::size_t n_features = 0;
    TrainConfig config;
    std::vector<std::size_t> iterations; // per class
    std::vector<bool> converged;

    std::size_t n_classes() const noexcept { return weights.size(); }
};

inline LinearModel train_svm_ovr(const Dataset& data, const TrainConfig& config) {
    data.validate();
    config.validate();
    if (data.n_classes < 2) throw TrainingError("training needs at least two classes");
    const auto counts = data.class_counts();
    for (std::size_t c = 0; c < data.n_classes; ++c)
        if (counts[c] == 0) throw TrainingError("class " + std::to_string(c) + " has no training documents");
    if (std::count_if(counts.begin(), counts.end(), [](auto n) { return n > 0; }) < 2)
        throw TrainingError("training data contains a single class");

    // Per-class binary problems are independent; each has its own seed.
    std::vector<std::future<BinarySolution>> jobs;
    std::vector<std::vector<std::int8_t>> signs(data.n_classes);
    for (std::size_t c = 0; c < data.n_classes; ++c) {
        signs[c].resize(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) signs[c][i] = data.labels[i] == c ? 1 : -1;
    }
    for (std::size_t c = 0; c < data.n_classes; ++c) {
        jobs.push_back(std::async(std::launch::async, [&, c] {
            BinaryProblem prob{data.vectors, signs[c], data.n_features, true};
            return solve_l2loss_svm_dual(prob, config.C, config.tol, config.max_iter, derive_seed(config.seed, "svm", c));
        }));
    }

    LinearModel model;
    model.n_features = data.n_features;
    model.config = config;
    for (auto& job : jobs) {
        auto sol = job.get();
        model.weights.push_back(std::move(sol.w));
        model.iterations.push_back(sol.iterations);
        model.converged.push_back(sol.converged);
    }
    return model;
}

/// score(c) = w_c . x + bias_c
inline std::vector<double> decision_values(const LinearModel& model, const SparseVector& x) {
    std::vector<double> s(model.n_classes());
    for (std::size_t c = 0; c < s.size(); ++c)
        s[c] = detail::augmented_dot(model.weights[c], x, model.n_features, true);
    return s;
}

// ---------------------------------------------------------------------------

enum class ModelKind : std::uint8_t { mnb, svm };

inline std::string_view to_string(ModelKind k) { return k == ModelKind::mnb ? "mnb" : "svm"; }

inline ModelKind parse_model_kind(std::string_view s) {
    if (s == "mnb") return ModelKind::mnb;
    if (s == "svm") return ModelKind::svm;
    throw ConfigError("unknown model kind '" + std::string(s) + "' (expected mnb or svm)");
}

using TrainedModel = std::variant<MnbModel, LinearModel>;

inline TrainedModel train(ModelKind kind, const Dataset& data, const TrainConfig& config) {
    if (kind == ModelKind::mnb) return train_mnb(data, config.alpha);
    return train_svm_ovr(data, config);
}

inline std::vector<double> scores(const TrainedModel& model, const SparseVector& x) {
    return std::visit(
        [&](const auto& m) {
            if constexpr (std::is_same_v<std::decay_t<decltype(m)>, MnbModel>)
                return mnb_scores(m, x);
            else
                return decision_values(m, x);
        },
        model);
}

} // namespace tempora
