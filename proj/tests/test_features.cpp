#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cep/errors.hpp"
#include "cep/features.hpp"

using namespace cep;

namespace {

// Toy community whose 25 meta values were computed by hand; it exercises
// every counting rule at once (deleted authors, [removed] bodies, empty
// selftexts, url tokens, multi-level replies).
CommunityCorpus toy_corpus() {
    CommunityCorpus c;
    c.community = "toy";
    c.window = {0, 1000};
    c.meta = CommunityMeta{"toy", 100, 1000000 - 100 * 86400 - 43200};

    auto sub = [&](const char* id, const char* author, const char* title, const char* body,
                   long long score, std::int64_t created) {
        SubmissionRecord s;
        s.id = id;
        s.community = "toy";
        s.author = author;
        s.title = title;
        s.body = body;
        s.score = score;
        s.created = created;
        c.submissions.push_back(s);
    };
    auto com = [&](const char* id, const char* author, const char* body, long long score,
                   const char* parent, const char* link) {
        CommentRecord m;
        m.id = id;
        m.community = "toy";
        m.author = author;
        m.body = body;
        m.score = score;
        m.created = 500;
        m.parent_id = parent;
        m.link_id = link;
        c.comments.push_back(m);
    };

    sub("s1", "alice", "Hello World", "", 10, 100);
    sub("s2", "bob", "Go vote now", "[removed]", 20, 200);
    sub("s3", "alice", "abc", "pixel art rocks", 30, 300);
    sub("s4", "[deleted]", "zzzz", "vote vote", 40, 400);

    com("c1", "bob", "nice pixel", 1, "t3_s1", "t3_s1");
    com("c2", "carol", "vote", 2, "t1_c1", "t3_s1");
    com("c3", "carol", "hello again", 3, "t3_s3", "t3_s3");
    com("c4", "[deleted]", "gone", 4, "t3_s3", "t3_s3");
    com("c5", "dave", "www.youtube.com/XYZ", 5, "t3_s2", "t3_s2");
    return c;
}

TokenBag bag_of(std::initializer_list<std::pair<const char*, long long>> counts) {
    TokenBag b;
    for (const auto& [tok, count] : counts) {
        b.counts[tok] = count;
        b.total += count;
    }
    return b;
}

}  // namespace

TEST_CASE("meta features match the hand-computed oracle") {
    const MetaFeatures f = compute_meta_features(toy_corpus(), 1000000);
    const double expected[kMetaFeatureCount] = {
        4.0,                   // submission_amount
        0.04,                  // submission_amount_normalized
        25.0,                  // submission_average_score
        25.0,                  // submission_median_score
        3.0,                   // comments_average_score
        3.0,                   // comments_median_score
        1.25,                  // comments_submission_ratio
        0.25,                  // deleted_removed_submission_ratio
        0.75,                  // distinct_comments_to_submission_ratio
        0.6,                   // distinct_comments_to_comments_ratio
        100.0,                 // users_amount
        2.0,                   // submission_distinct_users
        0.75,                  // average_submission_per_user
        0.5,                   // median_submission_per_user
        1.5,                   // submission_to_comments_users_ratio
        0.5,                   // submission_users_std
        std::sqrt(2.0 / 9.0),  // comments_users_std
        0.5,                   // users_deleted_normalized
        7.25,                  // submission_title_length
        7.5,                   // median_submission_title_length
        8.25,                  // submission_selftext_length
        9.0,                   // median_submission_selftext_length
        0.25,                  // empty_selftext_ratio
        7.0 / 11.0,            // submissions2comments_words_used
        100.0,                 // age_days
    };
    for (int i = 0; i < kMetaFeatureCount; ++i) {
        CAPTURE(kMetaFeatureNames[i]);
        CHECK(f.values[i] == doctest::Approx(expected[i]).epsilon(1e-12));
        CHECK_FALSE(f.degenerate[i]);
    }
}

TEST_CASE("meta feature spot checks") {
    CommunityCorpus c = toy_corpus();
    SUBCASE("comments to submission ratio follows counts") {
        c.submissions.clear();
        for (int i = 0; i < 10; ++i) {
            SubmissionRecord s;
            s.id = "x" + std::to_string(i);
            s.community = "toy";
            s.author = "a";
            s.created = 10;
            c.submissions.push_back(s);
        }
        c.comments.clear();
        for (int i = 0; i < 50; ++i) {
            CommentRecord m;
            m.id = "y" + std::to_string(i);
            m.community = "toy";
            m.author = "b";
            m.created = 10;
            m.parent_id = "t3_x0";
            m.link_id = "t3_x0";
            c.comments.push_back(m);
        }
        const MetaFeatures f = compute_meta_features(c, 1000000);
        CHECK(f.values[6] == doctest::Approx(5.0));
    }
    SUBCASE("age counts whole days before the cutoff") {
        c.meta->created = 1000000 - 100 * 86400;
        const MetaFeatures f = compute_meta_features(c, 1000000);
        CHECK(f.values[24] == doctest::Approx(100.0));
    }
    SUBCASE("no comments sets degenerate flags with zero values") {
        c.comments.clear();
        const MetaFeatures f = compute_meta_features(c, 1000000);
        CHECK(f.values[4] == 0.0);
        CHECK(f.degenerate[4]);  // comment average score
        CHECK(f.degenerate[5]);
        CHECK(f.degenerate[9]);   // commented / comments
        CHECK(f.degenerate[16]);  // comment user std
        CHECK_FALSE(f.degenerate[6]);  // comments/submissions is 0/4
        CHECK(f.values[6] == 0.0);
    }
    SUBCASE("ratio ranges stay valid") {
        const MetaFeatures f = compute_meta_features(c, 1000000);
        CHECK(f.values[7] >= 0.0);
        CHECK(f.values[7] <= 1.0);
        CHECK(f.values[22] >= 0.0);
        CHECK(f.values[22] <= 1.0);
        CHECK(f.values[8] >= 0.0);
        CHECK(f.values[8] <= 1.0);
    }
}

TEST_CASE("meta features require metadata and records") {
    CommunityCorpus c = toy_corpus();
    c.meta.reset();
    CHECK_THROWS_AS(compute_meta_features(c, 1000000), ValidationError);
    CommunityCorpus empty;
    empty.community = "void";
    empty.meta = CommunityMeta{"void", 1, 1};
    CHECK_THROWS_AS(compute_meta_features(empty, 1000000), ValidationError);
}

TEST_CASE("submission token bag caps to the most recent submissions") {
    CommunityCorpus c;
    c.community = "caps";
    c.window = {0, 100};
    for (int i = 0; i < 5; ++i) {
        SubmissionRecord s;
        s.id = "s" + std::to_string(i);
        s.community = "caps";
        s.author = "a";
        s.created = i;  // later i = more recent
        s.title = "tok" + std::to_string(i);
        c.submissions.push_back(s);
    }
    const TokenBag bag = submission_token_bag(c, 2);
    CHECK(bag.total == 2);
    CHECK(bag.counts.count("tok4") == 1);
    CHECK(bag.counts.count("tok3") == 1);
    CHECK(bag.counts.count("tok0") == 0);
}

TEST_CASE("vocabulary ranks by frequency with lexicographic ties") {
    const TokenBag a = bag_of({{"a", 2}, {"b", 1}});
    SUBCASE("small corpora truncate to the distinct token count") {
        const Vocabulary v = build_vocabulary({&a}, 300);
        REQUIRE(v.tokens.size() == 2);
        CHECK(v.tokens[0] == "a");
        CHECK(v.tokens[1] == "b");
    }
    SUBCASE("ties break lexicographically") {
        const TokenBag t = bag_of({{"x", 3}, {"w", 3}});
        const Vocabulary v = build_vocabulary({&t}, 300);
        CHECK(v.tokens[0] == "w");
        CHECK(v.tokens[1] == "x");
    }
    SUBCASE("k truncation keeps the most frequent") {
        const TokenBag t = bag_of({{"low", 1}, {"high", 9}, {"mid", 5}});
        const Vocabulary v = build_vocabulary({&t}, 2);
        REQUIRE(v.tokens.size() == 2);
        CHECK(v.tokens[0] == "high");
        CHECK(v.tokens[1] == "mid");
    }
    SUBCASE("empty training corpus is an error") {
        const TokenBag empty;
        CHECK_THROWS_AS(build_vocabulary({&empty}, 300), ValidationError);
    }
}

TEST_CASE("tfidf follows tf times ln(N/df)") {
    const TokenBag c1 = bag_of({{"shared", 1}, {"alpha", 1}});
    const TokenBag c2 = bag_of({{"shared", 2}});
    const Vocabulary v = build_vocabulary({&c1, &c2}, 300);

    SUBCASE("token present in every community zeroes out") {
        const auto x = tfidf_vector(c2, v);
        const int shared = v.find("shared");
        REQUIRE(shared >= 0);
        CHECK(x[shared] == doctest::Approx(0.0));
    }
    SUBCASE("tf 0.5 with df 1 of 2 gives 0.5 ln 2") {
        const auto x = tfidf_vector(c1, v);
        const int alpha = v.find("alpha");
        REQUIRE(alpha >= 0);
        CHECK(x[alpha] == doctest::Approx(0.5 * std::log(2.0)));
    }
    SUBCASE("no vocabulary tokens yields the zero vector") {
        const TokenBag other = bag_of({{"zeta", 4}});
        const auto x = tfidf_vector(other, v);
        for (double val : x) CHECK(val == 0.0);
    }
    SUBCASE("uniform count scaling leaves the vector unchanged") {
        TokenBag scaled = c1;
        for (auto& [tok, count] : scaled.counts) count *= 7;
        scaled.total *= 7;
        const auto a = tfidf_vector(c1, v);
        const auto b = tfidf_vector(scaled, v);
        for (int i = 0; i < kLinguisticFeatureCount; ++i)
            CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
    }
    SUBCASE("vector is always exactly 300 wide") {
        CHECK(tfidf_vector(c1, v).size() == kLinguisticFeatureCount);
    }
}

TEST_CASE("assemble_matrix concatenates blocks in L,M,N order") {
    std::map<std::string, CommunityFeatures> feats;
    CommunityFeatures f;
    f.community = "one";
    f.text = bag_of({{"alpha", 1}});
    f.meta.values[0] = 42.0;
    f.network[0] = 7.0;
    feats["one"] = f;
    std::map<std::string, int> labels{{"one", 1}};
    const Vocabulary v = build_vocabulary({&feats["one"].text}, 300);

    SUBCASE("M only has 25 columns") {
        const FeatureMatrix m = assemble_matrix(feats, labels, parse_blocks("M"), nullptr);
        CHECK(m.column_names.size() == 25);
        CHECK(m.rows[0][0] == 42.0);
        CHECK(m.column_names[0] == "M_submission_amount");
    }
    SUBCASE("all blocks give 357 columns") {
        const FeatureMatrix m = assemble_matrix(feats, labels, parse_blocks("L+M+N"), &v);
        CHECK(m.column_names.size() == 357);
        CHECK(m.rows[0].size() == 357);
        CHECK(m.column_names[300] == "M_submission_amount");
        CHECK(m.column_names[325] == "N_num_nodes");
        CHECK(m.rows[0][325] == 7.0);
    }
    SUBCASE("empty block selection is an error") {
        CHECK_THROWS_AS(assemble_matrix(feats, labels, BlockSelection{}, nullptr),
                        ValidationError);
    }
    SUBCASE("missing community names the offender") {
        labels["ghost"] = 0;
        CHECK_THROWS_WITH_AS(assemble_matrix(feats, labels, parse_blocks("M"), nullptr),
                             "missing feature blocks for community: ghost", ValidationError);
    }
}

TEST_CASE("feature csv shape") {
    std::map<std::string, CommunityFeatures> feats;
    CommunityFeatures f;
    f.community = "c";
    f.meta.values[24] = 10.0;
    feats["c"] = f;
    const FeatureMatrix m = assemble_matrix(feats, {{"c", 0}}, parse_blocks("M"), nullptr);
    const std::string csv = feature_matrix_csv(m);
    CHECK(csv.rfind("community,label,M_submission_amount", 0) == 0);
    CHECK(csv.find("\nc,0,") != std::string::npos);
}

TEST_CASE("block parsing accepts compact and plus-separated forms") {
    CHECK(parse_blocks("L+M+N").column_count() == 357);
    CHECK(parse_blocks("mn").name() == "M+N");
    CHECK_THROWS_AS(parse_blocks("Q"), ConfigError);
}
