#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "support/synthetic.hpp"
#include "support/temp_dir.hpp"
#include "tempora/composer.hpp"

using namespace tempora;

namespace {

struct Fixture {
    std::vector<SourceDocument> docs;
    TimeBinning binning = TimeBinning::century(16, 19);
    LabeledPool pool{0};

    explicit Fixture(std::uint64_t seed = 3) {
        docs = fixtures::realistic_length_corpus(24, 40, 22.0, 1501, 1900, seed);
        pool = pool_by_class(docs, binning);
    }

    std::map<std::string, int> years() const {
        std::map<std::string, int> y;
        for (const auto& d : docs) y[d.id] = d.year;
        return y;
    }
};

std::string serialize(const std::vector<CompositeDocument>& composites) {
    std::ostringstream out;
    for (const auto& c : composites) {
        out << c.id << ' ' << c.cls << '\n';
        write_vertical(out, c.sentences);
        for (const auto& p : c.provenance) out << p << ',';
        out << '\n';
    }
    return out.str();
}

} // namespace

TEST(Composer, TenTokenExampleStopsAtFirstSentenceReachingTarget) {
    // Pool of four-token sentences, target 10: three sentences, 12 tokens.
    std::vector<SourceDocument> docs{{"s", 1550, {}}};
    for (int i = 0; i < 8; ++i) docs[0].sentences.push_back(fixtures::numbered_sentence("t" + std::to_string(i), 4));
    const auto pool = pool_by_class(docs, TimeBinning::century(16, 16));
    const auto out = generate_composites(pool, {10, 5, 42});
    ASSERT_EQ(out.size(), 5u);
    for (const auto& c : out) {
        EXPECT_EQ(c.sentences.size(), 3u);
        EXPECT_EQ(c.token_count(), 12u);
    }
}

TEST(Composer, ClassPurityBalanceAndLengthBound) {
    Fixture f;
    const ComposerConfig cfg{330, 60, 7};
    const auto out = generate_composites(f.pool, cfg);
    const auto years = f.years();

    std::vector<std::size_t> per_class(f.binning.size(), 0);
    for (const auto& c : out) {
        ++per_class[c.cls];
        ASSERT_EQ(c.provenance.size(), c.sentences.size());
        for (const auto& src : c.provenance) EXPECT_EQ(assign_class(years.at(src), f.binning), c.cls) << c.id;

        // Reached the target, and dropping the final sentence falls short.
        EXPECT_GE(c.token_count(), cfg.target_tokens);
        EXPECT_LT(c.token_count() - c.sentences.back().size(), cfg.target_tokens);
        EXPECT_LT(c.token_count(), cfg.target_tokens + f.pool.longest_sentence(c.cls));
    }
    for (auto n : per_class) EXPECT_EQ(n, cfg.docs_per_class);
}

TEST(Composer, NoSentenceRepeatsWhilePoolLasts) {
    Fixture f;
    const auto out = generate_composites(f.pool, {330, 30, 11});
    for (const auto& c : out) {
        std::set<std::string> seen;
        for (const auto& s : c.sentences) EXPECT_TRUE(seen.insert(s.tokens.front().form).second) << c.id;
    }
}

TEST(Composer, SmallPoolFallsBackToReplacement) {
    std::vector<SourceDocument> docs{{"s", 1750, {fixtures::numbered_sentence("a", 5), fixtures::numbered_sentence("b", 3)}}};
    const auto pool = pool_by_class(docs, TimeBinning::century(18, 18));
    const auto out = generate_composites(pool, {50, 4, 1});
    for (const auto& c : out) {
        EXPECT_GE(c.token_count(), 50u);
        EXPECT_GT(c.sentences.size(), 2u);
        // First two draws exhaust the pool without repetition.
        EXPECT_NE(c.sentences[0], c.sentences[1]);
    }
}

TEST(Composer, IdsAreStableAndOrdered) {
    Fixture f;
    const auto out = generate_composites(f.pool, {100, 3, 0});
    ASSERT_EQ(out.size(), 12u);
    EXPECT_EQ(out[0].id, "c0_00000");
    EXPECT_EQ(out[2].id, "c0_00002");
    EXPECT_EQ(out[3].id, "c1_00000");
    EXPECT_EQ(out[11].cls, 3u);
}

TEST(Composer, DeterministicForFixedSeed) {
    Fixture f;
    const ComposerConfig cfg{330, 40, 99};
    const auto a = serialize(generate_composites(f.pool, cfg));
    const auto b = serialize(generate_composites(f.pool, cfg));
    EXPECT_EQ(a, b);

    auto other = cfg;
    other.seed = 100;
    EXPECT_NE(a, serialize(generate_composites(f.pool, other)));
}

TEST(Composer, ClassStreamIndependentOfOtherClasses) {
    // Class 2 output must not change when other classes' pools change.
    Fixture f;
    Fixture g(4);
    std::vector<SourceDocument> mixed;
    for (const auto& d : g.docs)
        if (assign_class(d.year, g.binning) != 2) mixed.push_back(d);
    for (const auto& d : f.docs)
        if (assign_class(d.year, f.binning) == 2) mixed.push_back(d);
    const auto pool = pool_by_class(mixed, f.binning);

    const ComposerConfig cfg{200, 10, 5};
    const auto a = generate_composites(f.pool, cfg);
    const auto b = generate_composites(pool, cfg);
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].cls == 2) {
            EXPECT_EQ(a[i].sentences, b[i].sentences);
        }
}

TEST(Composer, Errors) {
    std::vector<SourceDocument> docs{{"s", 1550, {fixtures::numbered_sentence("a", 5)}}};
    const auto gap = pool_by_class(docs, TimeBinning::century(16, 17));
    EXPECT_THROW(generate_composites(gap, {330, 10, 0}), GenerationError);
    const auto pool = pool_by_class(docs, TimeBinning::century(16, 16));
    EXPECT_THROW(generate_composites(pool, {0, 10, 0}), ConfigError);
    EXPECT_THROW(generate_composites(pool, {10, 0, 0}), ConfigError);
}

TEST(Composer, Stats) {
    Fixture f;
    const auto out = generate_composites(f.pool, {330, 20, 2});
    const auto stats = composite_stats(out, 4);
    ASSERT_EQ(stats.per_class.size(), 4u);
    std::size_t tokens = 0;
    for (const auto& c : out) tokens += c.token_count();
    EXPECT_EQ(stats.tokens, tokens);
    EXPECT_EQ(stats.docs, 80u);
    for (const auto& cs : stats.per_class) {
        EXPECT_EQ(cs.docs, 20u);
        EXPECT_DOUBLE_EQ(cs.mean_tokens, static_cast<double>(cs.tokens) / 20.0);
        EXPECT_GE(cs.mean_tokens, 330.0);
    }
}

TEST(Composer, DirectoryRoundTrip) {
    Fixture f;
    fixtures::TempDir dir;
    const auto out = generate_composites(f.pool, {120, 5, 8});
    write_composites(dir.path(), out, f.binning.labels());

    const auto back = read_composites(dir.path());
    EXPECT_EQ(back.labels, f.binning.labels());
    ASSERT_EQ(back.documents.size(), out.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        EXPECT_EQ(back.documents[i].id, out[i].id);
        EXPECT_EQ(back.documents[i].cls, out[i].cls);
        EXPECT_EQ(back.documents[i].sentences, out[i].sentences);
        EXPECT_EQ(back.documents[i].provenance, out[i].provenance);
    }

    std::ifstream manifest(dir.path() / "composites.csv");
    std::string header;
    std::getline(manifest, header);
    EXPECT_EQ(header, "id,class,label,path");
}
