#include "cep/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>

#include "cep/errors.hpp"
#include "cep/io_util.hpp"

namespace cep {

namespace {

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double population_std(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    const double m = mean_of(v);
    double sq = 0.0;
    for (double x : v) sq += (x - m) * (x - m);
    return std::sqrt(sq / static_cast<double>(v.size()));
}

std::string strip_thing_prefix(const std::string& id) {
    if (id.size() > 3 && id[0] == 't' && id[2] == '_' && id[1] >= '1' && id[1] <= '9')
        return id.substr(3);
    return id;
}

bool is_real_author(const std::string& author) {
    return !author.empty() && author != kDeletedAuthor;
}

}  // namespace

const std::array<const char*, kMetaFeatureCount> kMetaFeatureNames = {
    "submission_amount",
    "submission_amount_normalized",
    "submission_average_score",
    "submission_median_score",
    "comments_average_score",
    "comments_median_score",
    "comments_submission_ratio",
    "deleted_removed_submission_ratio",
    "distinct_comments_to_submission_ratio",
    "distinct_comments_to_comments_ratio",
    "users_amount",
    "submission_distinct_users",
    "average_submission_per_user",
    "median_submission_per_user",
    "submission_to_comments_users_ratio",
    "submission_users_std",
    "comments_users_std",
    "users_deleted_normalized",
    "submission_title_length",
    "median_submission_title_length",
    "submission_selftext_length",
    "median_submission_selftext_length",
    "empty_selftext_ratio",
    "submissions2comments_words_used",
    "age_days",
};

MetaFeatures compute_meta_features(const CommunityCorpus& corpus, std::int64_t cutoff) {
    if (corpus.submissions.empty() && corpus.comments.empty())
        throw ValidationError("meta features require a non-empty corpus: " + corpus.community);
    if (!corpus.meta)
        throw ValidationError("meta features require community metadata: " + corpus.community);

    MetaFeatures out;
    auto set = [&](int i, double v) { out.values[i] = v; };
    auto ratio = [&](int i, double num, double den) {
        if (den == 0.0) {
            out.values[i] = 0.0;
            out.degenerate[i] = true;
        } else {
            out.values[i] = num / den;
        }
    };

    const auto& subs = corpus.submissions;
    const auto& coms = corpus.comments;
    const double n_sub = static_cast<double>(subs.size());
    const double n_com = static_cast<double>(coms.size());
    const double subscribers = static_cast<double>(corpus.meta->subscribers);

    std::vector<double> sub_scores, com_scores, title_lens, body_lens;
    sub_scores.reserve(subs.size());
    title_lens.reserve(subs.size());
    body_lens.reserve(subs.size());
    long long deleted_removed = 0, empty_selftext = 0, deleted_author_records = 0;
    std::unordered_map<std::string, long long> sub_counts, com_counts;
    std::set<std::string> submission_ids;
    std::set<std::string> sub_words, com_words;

    for (const auto& s : subs) {
        sub_scores.push_back(static_cast<double>(s.score));
        title_lens.push_back(static_cast<double>(s.title.size()));
        body_lens.push_back(static_cast<double>(s.body.size()));
        if (s.body == "[deleted]" || s.body == "[removed]") ++deleted_removed;
        if (s.body.empty()) ++empty_selftext;
        if (is_real_author(s.author)) ++sub_counts[s.author];
        else if (s.author == kDeletedAuthor) ++deleted_author_records;
        submission_ids.insert(s.id);
        for (auto& t : normalize_text(s.title)) sub_words.insert(std::move(t));
        for (auto& t : normalize_text(s.body)) sub_words.insert(std::move(t));
    }

    std::set<std::string> commented_submissions;
    for (const auto& c : coms) {
        com_scores.push_back(static_cast<double>(c.score));
        if (is_real_author(c.author)) ++com_counts[c.author];
        else if (c.author == kDeletedAuthor) ++deleted_author_records;
        const std::string root = strip_thing_prefix(c.link_id);
        if (submission_ids.count(root)) commented_submissions.insert(root);
        for (auto& t : normalize_text(c.body)) com_words.insert(std::move(t));
    }

    // active users = authors of at least one submission or comment
    std::set<std::string> active_users;
    for (const auto& [u, c] : sub_counts) {
        (void)c;
        active_users.insert(u);
    }
    for (const auto& [u, c] : com_counts) {
        (void)c;
        active_users.insert(u);
    }

    std::vector<double> per_user_submissions;  // over all active users
    per_user_submissions.reserve(active_users.size());
    for (const auto& u : active_users) {
        auto it = sub_counts.find(u);
        per_user_submissions.push_back(it == sub_counts.end() ? 0.0
                                                              : static_cast<double>(it->second));
    }
    std::vector<double> submitter_counts, commenter_counts;
    submitter_counts.reserve(sub_counts.size());
    for (const auto& [u, c] : sub_counts) {
        (void)u;
        submitter_counts.push_back(static_cast<double>(c));
    }
    commenter_counts.reserve(com_counts.size());
    for (const auto& [u, c] : com_counts) {
        (void)u;
        commenter_counts.push_back(static_cast<double>(c));
    }

    set(0, n_sub);
    ratio(1, n_sub, subscribers);
    if (subs.empty()) {
        out.degenerate[2] = out.degenerate[3] = true;
    } else {
        set(2, mean_of(sub_scores));
        set(3, median_of(sub_scores));
    }
    if (coms.empty()) {
        out.degenerate[4] = out.degenerate[5] = true;
    } else {
        set(4, mean_of(com_scores));
        set(5, median_of(com_scores));
    }
    ratio(6, n_com, n_sub);
    ratio(7, static_cast<double>(deleted_removed), n_sub);
    ratio(8, static_cast<double>(commented_submissions.size()), n_sub);
    ratio(9, static_cast<double>(commented_submissions.size()), n_com);
    set(10, subscribers);
    set(11, static_cast<double>(sub_counts.size()));
    if (active_users.empty()) {
        out.degenerate[12] = out.degenerate[13] = true;
    } else {
        set(12, mean_of(per_user_submissions));
        set(13, median_of(per_user_submissions));
    }
    ratio(14, static_cast<double>(com_counts.size()), static_cast<double>(sub_counts.size()));
    if (submitter_counts.empty()) out.degenerate[15] = true;
    else set(15, population_std(submitter_counts));
    if (commenter_counts.empty()) out.degenerate[16] = true;
    else set(16, population_std(commenter_counts));
    ratio(17, static_cast<double>(deleted_author_records),
          static_cast<double>(active_users.size()));
    if (subs.empty()) {
        out.degenerate[18] = out.degenerate[19] = true;
        out.degenerate[20] = out.degenerate[21] = true;
        out.degenerate[22] = true;
    } else {
        set(18, mean_of(title_lens));
        set(19, median_of(title_lens));
        set(20, mean_of(body_lens));
        set(21, median_of(body_lens));
        set(22, static_cast<double>(empty_selftext) / n_sub);
    }
    ratio(23, static_cast<double>(com_words.size()), static_cast<double>(sub_words.size()));
    set(24, std::floor(static_cast<double>(cutoff - corpus.meta->created) / 86400.0));
    return out;
}

TokenBag submission_token_bag(const CommunityCorpus& corpus, std::size_t cap) {
    std::vector<const SubmissionRecord*> subs;
    subs.reserve(corpus.submissions.size());
    for (const auto& s : corpus.submissions) subs.push_back(&s);
    std::sort(subs.begin(), subs.end(), [](const SubmissionRecord* a, const SubmissionRecord* b) {
        if (a->created != b->created) return a->created > b->created;  // most recent first
        return a->id < b->id;
    });
    if (subs.size() > cap) subs.resize(cap);

    TokenBag bag;
    for (const SubmissionRecord* s : subs) {
        for (auto& t : normalize_text(s->title)) {
            ++bag.counts[std::move(t)];
            ++bag.total;
        }
        for (auto& t : normalize_text(s->body)) {
            ++bag.counts[std::move(t)];
            ++bag.total;
        }
    }
    return bag;
}

int Vocabulary::find(const std::string& token) const {
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (tokens[i] == token) return static_cast<int>(i);
    }
    return -1;
}

Vocabulary build_vocabulary(const std::vector<const TokenBag*>& training_bags, int k) {
    if (k < 1 || k > kLinguisticFeatureCount)
        throw ValidationError("vocabulary size must lie in [1, 300]");

    std::map<std::string, long long> totals;
    std::map<std::string, long long> df;
    for (const TokenBag* bag : training_bags) {
        for (const auto& [tok, count] : bag->counts) {
            totals[tok] += count;
            ++df[tok];
        }
    }
    if (totals.empty()) throw ValidationError("no tokens available to build a vocabulary");

    std::vector<std::pair<long long, std::string>> ranked;
    ranked.reserve(totals.size());
    for (const auto& [tok, count] : totals) ranked.emplace_back(count, tok);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    if (ranked.size() > static_cast<std::size_t>(k)) ranked.resize(k);

    Vocabulary v;
    v.num_documents = static_cast<long long>(training_bags.size());
    for (auto& [count, tok] : ranked) {
        (void)count;
        v.doc_frequency.push_back(df[tok]);
        v.tokens.push_back(std::move(tok));
    }
    return v;
}

std::vector<double> tfidf_vector(const TokenBag& bag, const Vocabulary& vocab) {
    std::vector<double> out(kLinguisticFeatureCount, 0.0);
    if (bag.total == 0 || vocab.num_documents == 0) return out;
    const double total = static_cast<double>(bag.total);
    for (std::size_t i = 0; i < vocab.tokens.size(); ++i) {
        auto it = bag.counts.find(vocab.tokens[i]);
        if (it == bag.counts.end()) continue;
        const long long df = vocab.doc_frequency[i];
        if (df <= 0) continue;
        const double tf = static_cast<double>(it->second) / total;
        const double idf =
            std::log(static_cast<double>(vocab.num_documents) / static_cast<double>(df));
        out[i] = tf * idf;
    }
    return out;
}

std::string BlockSelection::name() const {
    std::string s;
    auto add = [&](const char* b) {
        if (!s.empty()) s += "+";
        s += b;
    };
    if (L) add("L");
    if (M) add("M");
    if (N) add("N");
    return s.empty() ? "(none)" : s;
}

BlockSelection parse_blocks(const std::string& spec) {
    BlockSelection b;
    for (char c : spec) {
        switch (c) {
            case 'L': case 'l': b.L = true; break;
            case 'M': case 'm': b.M = true; break;
            case 'N': case 'n': b.N = true; break;
            case '+': case ' ': case ',': break;
            default:
                throw ConfigError("unknown feature block '" + std::string(1, c) + "' in \"" +
                                  spec + "\"");
        }
    }
    return b;
}

FeatureMatrix assemble_matrix(const std::map<std::string, CommunityFeatures>& features,
                              const std::map<std::string, int>& labels, BlockSelection blocks,
                              const Vocabulary* vocab) {
    if (!blocks.L && !blocks.M && !blocks.N)
        throw ValidationError("at least one feature block must be selected");
    if (blocks.L && vocab == nullptr)
        throw ValidationError("linguistic block requested without a vocabulary");

    FeatureMatrix m;
    if (blocks.L) {
        for (int i = 0; i < kLinguisticFeatureCount; ++i) {
            if (vocab && i < static_cast<int>(vocab->tokens.size()))
                m.column_names.push_back("L_" + vocab->tokens[i]);
            else
                m.column_names.push_back("L_pad_" + std::to_string(i));
        }
    }
    if (blocks.M) {
        for (const char* name : kMetaFeatureNames) m.column_names.push_back(std::string("M_") + name);
    }
    if (blocks.N) {
        for (const char* name : kNetworkFeatureNames)
            m.column_names.push_back(std::string("N_") + name);
    }

    for (const auto& [community, label] : labels) {
        auto it = features.find(community);
        if (it == features.end())
            throw ValidationError("missing feature blocks for community: " + community);
        const CommunityFeatures& f = it->second;
        std::vector<double> row;
        row.reserve(m.column_names.size());
        if (blocks.L) {
            auto l = tfidf_vector(f.text, *vocab);
            row.insert(row.end(), l.begin(), l.end());
        }
        if (blocks.M) row.insert(row.end(), f.meta.values.begin(), f.meta.values.end());
        if (blocks.N) row.insert(row.end(), f.network.begin(), f.network.end());
        m.row_names.push_back(community);
        m.labels.push_back(label);
        m.rows.push_back(std::move(row));
    }
    return m;
}

std::string feature_matrix_csv(const FeatureMatrix& m) {
    std::string out = "community,label";
    for (const auto& c : m.column_names) {
        out += ',';
        out += csv_escape(c);
    }
    out += '\n';
    for (std::size_t r = 0; r < m.rows.size(); ++r) {
        out += csv_escape(m.row_names[r]);
        out += ',';
        out += std::to_string(m.labels[r]);
        for (double v : m.rows[r]) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

}  // namespace cep
