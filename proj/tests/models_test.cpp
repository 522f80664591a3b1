#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "support/oracles.hpp"
#include "tempora/models.hpp"
#include "tempora/random.hpp"

using namespace tempora;

namespace {

SparseVector sparse(const std::vector<double>& dense) {
    SparseVector v;
    for (std::size_t i = 0; i < dense.size(); ++i)
        if (dense[i] != 0.0) v.entries.push_back({static_cast<std::uint32_t>(i), dense[i]});
    return v;
}

struct DenseData {
    std::vector<std::vector<double>> x;
    std::vector<std::size_t> y;
    Dataset data;
};

DenseData random_counts(Rng& rng, std::size_t n, std::size_t v, std::size_t classes) {
    DenseData d;
    d.data.n_classes = classes;
    d.data.n_features = v;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row(v, 0.0);
        for (auto& c : row)
            if (rng.below(3) == 0) c = static_cast<double>(1 + rng.below(5));
        const auto y = i < classes ? i : static_cast<std::size_t>(rng.below(classes));
        d.x.push_back(row);
        d.y.push_back(y);
        d.data.vectors.push_back(sparse(row));
        d.data.labels.push_back(y);
    }
    return d;
}

struct Binary {
    std::vector<SparseVector> x;
    std::vector<std::int8_t> y;
    std::size_t dim = 0;

    BinaryProblem problem(bool bias = true) const { return {x, y, dim, bias}; }
};

Binary random_binary(Rng& rng, std::size_t n, std::size_t dim) {
    Binary b;
    b.dim = dim;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row(dim);
        for (auto& v : row) v = 2.0 * rng.uniform() - 1.0;
        b.x.push_back(sparse(row));
        b.y.push_back(rng.below(2) ? 1 : -1);
    }
    b.y[0] = 1;
    b.y[1] = -1;
    return b;
}

} // namespace

// ---------------------------------------------------------------------------

TEST(Predict, ArgmaxWithLowestIndexTieBreak) {
    EXPECT_EQ(predict(std::vector<double>{0.1, 0.7, 0.2}), 1u);
    EXPECT_EQ(predict(std::vector<double>{0.5, 0.5, 0.1}), 0u);
    EXPECT_EQ(predict(std::vector<double>{-3.0, -1.0, -1.0}), 1u);
    EXPECT_THROW(predict(std::vector<double>{}), Error);
    EXPECT_THROW(predict(std::vector<double>{0.0, std::numeric_limits<double>::quiet_NaN()}), Error);
}

TEST(Predict, InvariantUnderPositiveAffineMaps) {
    Rng rng(4);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> s(5);
        for (auto& v : s) v = rng.uniform() * 10 - 5;
        const double a = 0.01 + rng.uniform() * 100, b = rng.uniform() * 50 - 25;
        auto mapped = s;
        for (auto& v : mapped) v = a * v + b;
        EXPECT_EQ(predict(s), predict(mapped));
    }
}

// ---------------------------------------------------------------------------

TEST(Mnb, HandComputedExample) {
    Dataset d;
    d.n_classes = 2;
    d.n_features = 2;
    d.vectors = {sparse({2, 0}), sparse({0, 1}), sparse({1, 1})};
    d.labels = {0, 1, 1};
    const auto m = train_mnb(d, 1.0);
    EXPECT_NEAR(m.log_priors[0], std::log(1.0 / 3.0), 1e-12);
    EXPECT_NEAR(m.log_priors[1], std::log(2.0 / 3.0), 1e-12);
    EXPECT_NEAR(m.log_likelihoods[0][0], std::log(3.0 / 4.0), 1e-12);
    EXPECT_NEAR(m.log_likelihoods[0][1], std::log(1.0 / 4.0), 1e-12);
    EXPECT_NEAR(m.log_likelihoods[1][0], std::log(2.0 / 5.0), 1e-12);
    EXPECT_NEAR(m.log_likelihoods[1][1], std::log(3.0 / 5.0), 1e-12);

    const auto s = mnb_scores(m, sparse({0, 3}));
    EXPECT_NEAR(s[0], std::log(1.0 / 3.0) + 3 * std::log(0.25), 1e-12);
    EXPECT_EQ(predict(s), 1u);
}

TEST(Mnb, DistributionsNormalize) {
    Rng rng(31);
    const auto d = random_counts(rng, 40, 17, 4);
    const auto m = train_mnb(d.data, 0.5);
    double prior = 0.0;
    for (double lp : m.log_priors) prior += std::exp(lp);
    EXPECT_NEAR(prior, 1.0, 1e-12);
    for (const auto& ll : m.log_likelihoods) {
        double s = 0.0;
        for (double v : ll) s += std::exp(v);
        EXPECT_NEAR(s, 1.0, 1e-12);
    }
}

TEST(Mnb, MatchesDenseOracle) {
    Rng rng(77);
    for (int t = 0; t < 20; ++t) {
        const auto d = random_counts(rng, 10 + rng.below(30), 1 + rng.below(25), 2 + rng.below(4));
        const double alpha = 0.1 + rng.uniform() * 2;
        const auto m = train_mnb(d.data, alpha);
        const fixtures::DenseMnb oracle(d.x, d.y, d.data.n_classes, alpha);
        for (std::size_t i = 0; i < d.x.size(); ++i) {
            const auto got = mnb_scores(m, d.data.vectors[i]);
            const auto want = oracle.scores(d.x[i]);
            for (std::size_t c = 0; c < got.size(); ++c) EXPECT_NEAR(got[c], want[c], 1e-9);
        }
    }
}

TEST(Mnb, RejectsBadInput) {
    Dataset d;
    d.n_classes = 2;
    d.n_features = 1;
    d.vectors = {sparse({1})};
    d.labels = {0};
    EXPECT_THROW(train_mnb(d, 1.0), TrainingError);
    d.vectors.push_back(sparse({1}));
    d.labels.push_back(1);
    EXPECT_THROW(train_mnb(d, 0.0), ConfigError);
    d.vectors[0].entries[0].value = std::numeric_limits<double>::infinity();
    EXPECT_THROW(train_mnb(d, 1.0), TrainingError);
}

// ---------------------------------------------------------------------------

TEST(Svm, OneDimensionalClosedForm) {
    // Points +1 at x=1 and -1 at x=-1, no bias: w = 4C / (1 + 4C).
    Binary b;
    b.dim = 1;
    b.x = {sparse({1.0}), sparse({-1.0})};
    b.y = {1, -1};
    for (double C : {0.1, 1.0, 3.0}) {
        const auto sol = solve_l2loss_svm_dual(b.problem(false), C, 1e-10, 1000, 1);
        EXPECT_TRUE(sol.converged);
        EXPECT_NEAR(sol.w[0], 4 * C / (1 + 4 * C), 1e-6);
    }
}

TEST(Svm, DualityGapClosesOnRandomProblems) {
    Rng rng(123);
    for (int t = 0; t < 25; ++t) {
        const auto b = random_binary(rng, 20, 5);
        const double C = 0.05 + rng.uniform() * 5;
        const auto sol = solve_l2loss_svm_dual(b.problem(), C, 1e-6, 10000, rng.next());
        ASSERT_TRUE(sol.converged);
        const double primal = l2loss_primal_objective(b.problem(), sol.w, C);
        const double dual = l2loss_dual_objective(b.problem(), sol.alpha, C);
        EXPECT_LE(dual, primal + 1e-12);
        EXPECT_LT(primal - dual, 1e-3 * std::max(1.0, primal));
        for (double a : sol.alpha) EXPECT_GE(a, 0.0);
    }
}

TEST(Svm, DuplicatedDataEqualsDoubledC) {
    Rng rng(9);
    const auto b = random_binary(rng, 30, 4);
    Binary twice = b;
    twice.x.insert(twice.x.end(), b.x.begin(), b.x.end());
    twice.y.insert(twice.y.end(), b.y.begin(), b.y.end());
    const double C = 0.7;
    const auto a = solve_l2loss_svm_dual(twice.problem(), C, 1e-9, 100000, 1);
    const auto c = solve_l2loss_svm_dual(b.problem(), 2 * C, 1e-9, 100000, 2);
    ASSERT_TRUE(a.converged && c.converged);
    for (std::size_t i = 0; i < a.w.size(); ++i) EXPECT_NEAR(a.w[i], c.w[i], 1e-5);
}

TEST(Svm, SeedChangesPathNotOptimum) {
    Rng rng(10);
    const auto b = random_binary(rng, 40, 6);
    const auto s1 = solve_l2loss_svm_dual(b.problem(), 1.0, 1e-9, 100000, 1);
    const auto s1b = solve_l2loss_svm_dual(b.problem(), 1.0, 1e-9, 100000, 1);
    const auto s2 = solve_l2loss_svm_dual(b.problem(), 1.0, 1e-9, 100000, 2);
    EXPECT_EQ(s1.w, s1b.w);
    for (std::size_t i = 0; i < s1.w.size(); ++i) EXPECT_NEAR(s1.w[i], s2.w[i], 1e-5);
}

TEST(Svm, IterationCapReportsNonConvergence) {
    Rng rng(12);
    const auto b = random_binary(rng, 50, 3);
    const auto sol = solve_l2loss_svm_dual(b.problem(), 100.0, 1e-12, 2, 1);
    EXPECT_EQ(sol.iterations, 2u);
    EXPECT_FALSE(sol.converged);
}

TEST(Svm, OvrSeparatesToyData) {
    // Three classes, each with its own indicator feature plus shared noise.
    Rng rng(3);
    Dataset d;
    d.n_classes = 3;
    d.n_features = 6;
    for (int i = 0; i < 60; ++i) {
        const auto c = static_cast<std::size_t>(i % 3);
        std::vector<double> row(6, 0.0);
        row[c] = 1.0;
        for (std::size_t f = 3; f < 6; ++f) row[f] = static_cast<double>(rng.below(3));
        d.vectors.push_back(sparse(row));
        d.labels.push_back(c);
    }
    TrainConfig cfg;
    cfg.seed = 5;
    const auto m = train_svm_ovr(d, cfg);
    ASSERT_EQ(m.n_classes(), 3u);
    EXPECT_EQ(m.weights[0].size(), 7u);
    for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(predict(decision_values(m, d.vectors[i])), d.labels[i]);
    for (std::size_t c = 0; c < 3; ++c) EXPECT_GT(m.weights[c][c], 0.0);

    // Same configuration, same model.
    EXPECT_EQ(train_svm_ovr(d, cfg).weights, m.weights);

    const auto generic = train(ModelKind::svm, d, cfg);
    EXPECT_EQ(scores(generic, d.vectors[0]), decision_values(m, d.vectors[0]));
}

TEST(Svm, OvrRejectsDegenerateData) {
    Dataset d;
    d.n_classes = 2;
    d.n_features = 1;
    d.vectors = {sparse({1}), sparse({2})};
    d.labels = {0, 0};
    EXPECT_THROW(train_svm_ovr(d, {}), TrainingError);
    d.labels = {0, 1};
    d.vectors[1].entries = {{0, 1}, {0, 2}};
    EXPECT_THROW(train_svm_ovr(d, {}), TrainingError);
    TrainConfig bad;
    bad.C = 0;
    d.vectors[1] = sparse({2});
    EXPECT_THROW(train_svm_ovr(d, bad), ConfigError);
}

TEST(ModelKind, ParseAndName) {
    EXPECT_EQ(parse_model_kind("mnb"), ModelKind::mnb);
    EXPECT_EQ(to_string(parse_model_kind("svm")), "svm");
    EXPECT_THROW(parse_model_kind("rf"), ConfigError);
}

TEST(Mnb, TwoDocumentExample) {
    // V = {x, y}; A has one doc {x:2}, B one doc {y:2}; alpha = 1.
    Dataset d;
    d.n_classes = 2;
    d.n_features = 2;
    d.vectors = {sparse({2, 0}), sparse({0, 2})};
    d.labels = {0, 1};
    const auto m = train_mnb(d, 1.0);
    EXPECT_NEAR(std::exp(m.log_likelihoods[0][0]), 3.0 / 4.0, 1e-9);
    EXPECT_NEAR(std::exp(m.log_likelihoods[0][1]), 1.0 / 4.0, 1e-9);
    EXPECT_NEAR(std::exp(m.log_priors[0]), 0.5, 1e-9);
    EXPECT_NEAR(std::exp(m.log_priors[1]), 0.5, 1e-9);
    EXPECT_EQ(predict(mnb_scores(m, sparse({1, 0}))), 0u);
    EXPECT_EQ(mnb_scores(m, SparseVector{}), m.log_priors);
}

TEST(Mnb, LikelihoodTermIsLinearInCounts) {
    Rng rng(13);
    const auto d = random_counts(rng, 30, 9, 3);
    const auto m = train_mnb(d.data, 1.0);
    const auto x = d.data.vectors[4];
    auto x2 = x;
    for (auto& e : x2.entries) e.value *= 2;
    const auto s1 = mnb_scores(m, x), s2 = mnb_scores(m, x2);
    for (std::size_t c = 0; c < s1.size(); ++c)
        EXPECT_NEAR(s2[c] - m.log_priors[c], 2 * (s1[c] - m.log_priors[c]), 1e-9);
}

TEST(Mnb, LargeAlphaTendsToUniform) {
    Rng rng(15);
    const auto d = random_counts(rng, 20, 6, 2);
    const auto m = train_mnb(d.data, 1e9);
    for (const auto& ll : m.log_likelihoods)
        for (double v : ll) EXPECT_NEAR(std::exp(v), 1.0 / 6.0, 1e-6);
}

TEST(Svm, SeparableTwoDimensionalToySet) {
    Dataset d;
    d.n_classes = 2;
    d.n_features = 2;
    const double pts[][2] = {{2, 3}, {3, 3}, {2.5, 4}, {4, 2.5}, {-1, 0}, {0, -1}, {-2, -1}, {-0.5, -2}};
    for (int i = 0; i < 8; ++i) {
        d.vectors.push_back(sparse({pts[i][0], pts[i][1]}));
        d.labels.push_back(i < 4 ? 0 : 1);
    }
    const auto m = train_svm_ovr(d, {});
    for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(predict(decision_values(m, d.vectors[i])), d.labels[i]);
}

TEST(DecisionValues, MatchDenseDotAndScaleLinearly) {
    Rng rng(41);
    const auto d = random_counts(rng, 30, 8, 3);
    const auto m = train_svm_ovr(d.data, {});
    const auto zero = decision_values(m, SparseVector{});
    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(zero[c], m.weights[c][8]);

    for (std::size_t i = 0; i < d.x.size(); ++i) {
        auto aug = d.x[i];
        aug.push_back(1.0);
        const auto s = decision_values(m, d.data.vectors[i]);
        auto scaled = d.data.vectors[i];
        for (auto& e : scaled.entries) e.value *= 3.5;
        const auto s3 = decision_values(m, scaled);
        for (std::size_t c = 0; c < 3; ++c) {
            EXPECT_NEAR(s[c], fixtures::dense_dot(m.weights[c], aug), 1e-9);
            EXPECT_NEAR(s3[c] - zero[c], 3.5 * (s[c] - zero[c]), 1e-9);
        }
    }
}
