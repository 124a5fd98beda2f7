#include "cep/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "cep/errors.hpp"
#include "cep/io_util.hpp"
#include "cep/rng.hpp"

namespace cep {

namespace {

using nlohmann::json;

const char* kBaseWords[] = {
    "the",    "and",     "for",    "you",    "this",   "that",  "with",  "have",   "from",
    "they",   "what",    "about",  "just",   "like",   "time",  "know",  "people", "think",
    "good",   "really",  "when",   "make",   "thread", "post",  "today", "game",   "team",
    "new",    "question", "help",  "best",   "look",   "need",  "week",  "first",  "place",
    "share",  "friend",  "story",  "idea",   "point",  "update", "guide", "news",   "event",
    "start",  "world",   "still",  "thing",  "never",  "great", "work",  "photo",  "video",
};
constexpr int kBaseWordCount = static_cast<int>(sizeof(kBaseWords) / sizeof(kBaseWords[0]));

const char* kKeywords[] = {"vote", "discussion", "pixel", "canvas", "banner", "coordinate"};
constexpr int kKeywordCount = static_cast<int>(sizeof(kKeywords) / sizeof(kKeywords[0]));

std::string sample_text(Rng& rng, int n_tokens, double keyword_rate) {
    std::string out;
    for (int i = 0; i < n_tokens; ++i) {
        if (!out.empty()) out += ' ';
        if (rng.bernoulli(keyword_rate)) {
            out += kKeywords[rng.uniform_u64(kKeywordCount)];
        } else {
            // squared uniform skews toward frequent words
            const double u = rng.uniform();
            out += kBaseWords[static_cast<int>(u * u * kBaseWordCount)];
        }
    }
    return out;
}

struct PendingComment {
    std::string id;
    std::string author;
    std::string body;
    long long score;
    std::int64_t created;
    std::string parent_id;
    std::string link_id;
};

}  // namespace

SynthDataset synth_generate(const SynthConfig& cfg) {
    if (cfg.n_communities < 4) throw ValidationError("synthesis requires at least 4 communities");
    if (cfg.positive_fraction <= 0.0 || cfg.positive_fraction >= 1.0)
        throw ValidationError("positive fraction must lie in (0,1)");
    if (cfg.keyword_rate_delta < 0 || cfg.score_mean_delta < 0 || cfg.edge_density_delta < 0)
        throw ValidationError("signal deltas must be nonnegative");
    if (cfg.window.start >= cfg.window.end) throw ValidationError("window start must precede end");

    Rng rng(cfg.seed);
    SynthDataset out;
    out.metadata_csv = "community,subscribers,created_utc\n";
    out.labels_csv = "community,label,provenance\n";

    const int n_pos =
        static_cast<int>(std::lround(cfg.positive_fraction * cfg.n_communities));
    const std::int64_t span = cfg.window.end - cfg.window.start;

    for (int ci = 0; ci < cfg.n_communities; ++ci) {
        const bool positive = ci < n_pos;
        char name_buf[32];
        std::snprintf(name_buf, sizeof(name_buf), "synth%04d", ci);
        const std::string community = name_buf;

        const int n_users = 18 + static_cast<int>(rng.uniform_u64(23));
        const int n_subs = 30 + static_cast<int>(rng.uniform_u64(31));

        const double keyword_rate = std::max(
            0.0, rng.normal(0.02 + (positive ? cfg.keyword_rate_delta : 0.0), 0.02));
        const double sub_score_mu = rng.normal(5.0 + (positive ? cfg.score_mean_delta : 0.0), 1.5);
        const double com_score_mu = rng.normal(3.0 + (positive ? cfg.score_mean_delta : 0.0), 1.5);
        const double density = std::max(
            0.0, rng.normal(positive ? cfg.edge_density_delta : 0.0,
                            cfg.edge_density_delta / 2.0 + 0.02));
        const int core_size =
            std::min(n_users, 4 + static_cast<int>(std::lround(6.0 * density)));

        std::vector<std::string> users(n_users);
        for (int u = 0; u < n_users; ++u)
            users[u] = community + "_u" + std::to_string(u);

        // submissions; the first core_size go to core users so that triad
        // closure below always has content to reply to
        struct Sub {
            std::string id;
            int author;
        };
        std::vector<Sub> subs(n_subs);
        std::vector<json> sub_json(n_subs);
        std::vector<long long> comment_counts(n_subs, 0);
        for (int si = 0; si < n_subs; ++si) {
            const int author =
                si < core_size ? si : static_cast<int>(rng.uniform_u64(n_users));
            const std::string id = community + "_s" + std::to_string(si);
            json j;
            j["id"] = id;
            j["subreddit"] = community;
            j["author"] = users[author];
            j["title"] = sample_text(rng, 4 + rng.poisson(4.0), keyword_rate);
            j["selftext"] =
                rng.bernoulli(0.3) ? "" : sample_text(rng, 6 + rng.poisson(10.0), keyword_rate);
            j["score"] = static_cast<long long>(std::lround(rng.normal(sub_score_mu, 3.0)));
            j["created_utc"] = cfg.window.start + static_cast<std::int64_t>(rng.uniform_u64(span));
            subs[si] = {id, author};
            sub_json[si] = std::move(j);
        }

        std::vector<PendingComment> comments;
        auto add_comment = [&](int author, const std::string& parent_id,
                               const std::string& link_root, int root_index) {
            PendingComment c;
            c.id = community + "_m" + std::to_string(comments.size());
            c.author = rng.bernoulli(0.02) ? std::string(kDeletedAuthor) : users[author];
            c.body = sample_text(rng, 3 + rng.poisson(8.0), keyword_rate);
            c.score = static_cast<long long>(std::lround(rng.normal(com_score_mu, 3.0)));
            c.created = cfg.window.start + static_cast<std::int64_t>(rng.uniform_u64(span));
            c.parent_id = parent_id;
            c.link_id = "t3_" + link_root;
            comments.push_back(std::move(c));
            if (root_index >= 0) ++comment_counts[root_index];
        };

        struct CommentRef {
            int index;       // position in comments
            int root;        // submission index
        };
        std::vector<CommentRef> refs;

        const int n_coms = n_subs * (2 + static_cast<int>(rng.uniform_u64(3)));
        for (int k = 0; k < n_coms; ++k) {
            const int author = static_cast<int>(rng.uniform_u64(n_users));
            if (!refs.empty() && rng.bernoulli(0.3)) {
                const CommentRef ref = refs[rng.uniform_u64(refs.size())];
                add_comment(author, "t1_" + comments[ref.index].id, subs[ref.root].id, ref.root);
                refs.push_back({static_cast<int>(comments.size()) - 1, ref.root});
            } else {
                const int si = static_cast<int>(rng.uniform_u64(n_subs));
                add_comment(author, "t3_" + subs[si].id, subs[si].id, si);
                refs.push_back({static_cast<int>(comments.size()) - 1, si});
            }
        }

        // density signal: extra replies among core users plus triad closure
        const int extra_replies = static_cast<int>(std::lround(2.0 * density * n_subs));
        for (int k = 0; k < extra_replies && core_size >= 2; ++k) {
            const int a = static_cast<int>(rng.uniform_u64(core_size));
            int b = static_cast<int>(rng.uniform_u64(core_size - 1));
            if (b >= a) ++b;
            add_comment(a, "t3_" + subs[b].id, subs[b].id, b);
        }
        const int n_triads = static_cast<int>(std::lround(density * n_subs));
        for (int k = 0; k < n_triads && core_size >= 3; ++k) {
            const int a = static_cast<int>(rng.uniform_u64(core_size));
            int b = static_cast<int>(rng.uniform_u64(core_size - 1));
            if (b >= a) ++b;
            int c = 0;
            do {
                c = static_cast<int>(rng.uniform_u64(core_size));
            } while (c == a || c == b);
            add_comment(a, "t3_" + subs[b].id, subs[b].id, b);
            add_comment(b, "t3_" + subs[c].id, subs[c].id, c);
            add_comment(c, "t3_" + subs[a].id, subs[a].id, a);
        }

        for (int si = 0; si < n_subs; ++si) {
            sub_json[si]["num_comments"] = comment_counts[si];
            out.submissions_jsonl += sub_json[si].dump();
            out.submissions_jsonl += '\n';
        }
        for (const PendingComment& c : comments) {
            json j;
            j["id"] = c.id;
            j["subreddit"] = community;
            j["author"] = c.author;
            j["body"] = c.body;
            j["score"] = c.score;
            j["created_utc"] = c.created;
            j["parent_id"] = c.parent_id;
            j["link_id"] = c.link_id;
            out.comments_jsonl += j.dump();
            out.comments_jsonl += '\n';
        }

        const long long subscribers = 300 + static_cast<long long>(rng.uniform_u64(3001));
        const std::int64_t created =
            cfg.window.start - static_cast<std::int64_t>(200 + rng.uniform_u64(1801)) * 86400;
        out.metadata_csv += community + "," + std::to_string(subscribers) + "," +
                            std::to_string(created) + "\n";
        out.labels_csv += community;
        out.labels_csv += positive ? ",positive,atlas\n" : ",negative,matched-negative\n";
    }
    return out;
}

void synth_write(const SynthConfig& cfg, const std::string& directory) {
    const SynthDataset data = synth_generate(cfg);
    std::filesystem::create_directories(directory);
    write_text_file(directory + "/submissions.jsonl", data.submissions_jsonl);
    write_text_file(directory + "/comments.jsonl", data.comments_jsonl);
    write_text_file(directory + "/metadata.csv", data.metadata_csv);
    write_text_file(directory + "/labels.csv", data.labels_csv);
}

}  // namespace cep
