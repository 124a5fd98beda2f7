#include "cep/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include <json.hpp>

#include "cep/errors.hpp"
#include "cep/io_util.hpp"

namespace cep {

namespace {

using nlohmann::json;

std::string get_string(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return {};
    if (it->is_string()) return it->get<std::string>();
    return it->dump();
}

long long get_int(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return 0;
    if (it->is_number_integer() || it->is_number_unsigned()) return it->get<long long>();
    if (it->is_number_float()) return static_cast<long long>(it->get<double>());
    if (it->is_string()) {
        try {
            return std::stoll(it->get<std::string>());
        } catch (...) {
            return 0;
        }
    }
    return 0;
}

bool parse_submission(const json& j, SubmissionRecord& out) {
    out.id = get_string(j, "id");
    out.community = get_string(j, "subreddit");
    out.author = get_string(j, "author");
    out.title = get_string(j, "title");
    out.body = get_string(j, "selftext");
    out.score = get_int(j, "score");
    out.created = get_int(j, "created_utc");
    out.comment_count = get_int(j, "num_comments");
    return !out.id.empty() && !out.community.empty() && out.created > 0;
}

bool parse_comment(const json& j, CommentRecord& out) {
    out.id = get_string(j, "id");
    out.community = get_string(j, "subreddit");
    out.author = get_string(j, "author");
    out.body = get_string(j, "body");
    out.score = get_int(j, "score");
    out.created = get_int(j, "created_utc");
    out.parent_id = get_string(j, "parent_id");
    out.link_id = get_string(j, "link_id");
    return !out.id.empty() && !out.community.empty() && out.created > 0 &&
           !out.parent_id.empty() && out.id != out.parent_id;
}

bool is_ascii_punct(unsigned char c) {
    return std::ispunct(c) != 0;
}

bool starts_with(std::string_view s, std::string_view prefix) {
    return s.size() >= prefix.size() && s.substr(0, prefix.size()) == prefix;
}

// Strips scheme, keeps host up to the first '/'. A leading "www." stays.
std::string url_domain(std::string_view tok) {
    if (starts_with(tok, "http://")) tok.remove_prefix(7);
    else if (starts_with(tok, "https://")) tok.remove_prefix(8);
    auto slash = tok.find('/');
    if (slash != std::string_view::npos) tok = tok.substr(0, slash);
    return std::string(tok);
}

bool is_url_token(std::string_view tok) {
    return starts_with(tok, "http://") || starts_with(tok, "https://") || starts_with(tok, "www.");
}

bool is_mention_token(std::string_view tok) {
    return starts_with(tok, "/u/") && tok.size() > 3;
}

// Bare dotted hosts ("youtube.com") stay atomic so that a domain produced
// by URL conversion survives re-normalization unchanged.
bool is_bare_host(std::string_view tok) {
    if (tok.empty() || tok.find('.') == std::string_view::npos) return false;
    std::size_t label_len = 0;
    std::size_t last_label_start = 0;
    for (std::size_t i = 0; i < tok.size(); ++i) {
        const char c = tok[i];
        if (c == '.') {
            if (label_len == 0) return false;
            label_len = 0;
            last_label_start = i + 1;
        } else if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-') {
            ++label_len;
        } else {
            return false;
        }
    }
    if (label_len < 2) return false;  // final label, TLD-shaped
    for (std::size_t i = last_label_start; i < tok.size(); ++i) {
        if (tok[i] < 'a' || tok[i] > 'z') return false;
    }
    return true;
}

}  // namespace

LoadStats load_records(const std::string& path, RecordKind kind,
                       const std::function<void(SubmissionRecord&&)>& on_submission,
                       const std::function<void(CommentRecord&&)>& on_comment) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open dump file: " + path);

    LoadStats stats;
    std::size_t nonempty = 0;
    std::string line;
    while (std::getline(in, line)) {
        std::string_view sv = trim(line);
        if (sv.empty()) continue;
        ++nonempty;
        json j = json::parse(sv, nullptr, false);
        bool ok = false;
        if (!j.is_discarded() && j.is_object()) {
            if (kind == RecordKind::Submission) {
                SubmissionRecord rec;
                if (parse_submission(j, rec)) {
                    ok = true;
                    ++stats.loaded;
                    if (on_submission) on_submission(std::move(rec));
                }
            } else {
                CommentRecord rec;
                if (parse_comment(j, rec)) {
                    ok = true;
                    ++stats.loaded;
                    if (on_comment) on_comment(std::move(rec));
                }
            }
        }
        if (!ok) ++stats.skipped;
    }
    if (nonempty > 0 && stats.skipped * 2 > nonempty) {
        throw FormatError(path + ": " + std::to_string(stats.skipped) + " of " +
                          std::to_string(nonempty) + " lines malformed");
    }
    return stats;
}

std::vector<SubmissionRecord> load_submissions(const std::string& path, LoadStats* stats) {
    std::vector<SubmissionRecord> out;
    LoadStats s = load_records(
        path, RecordKind::Submission, [&](SubmissionRecord&& r) { out.push_back(std::move(r)); },
        nullptr);
    if (stats) *stats = s;
    return out;
}

std::vector<CommentRecord> load_comments(const std::string& path, LoadStats* stats) {
    std::vector<CommentRecord> out;
    LoadStats s = load_records(path, RecordKind::Comment, nullptr,
                               [&](CommentRecord&& r) { out.push_back(std::move(r)); });
    if (stats) *stats = s;
    return out;
}

std::vector<std::string> normalize_text(std::string_view raw) {
    std::vector<std::string> tokens;
    std::string lowered;
    lowered.reserve(raw.size());
    for (unsigned char c : raw) lowered.push_back(static_cast<char>(std::tolower(c)));

    std::size_t i = 0;
    const std::size_t n = lowered.size();
    while (i < n) {
        while (i < n && std::isspace(static_cast<unsigned char>(lowered[i]))) ++i;
        std::size_t j = i;
        while (j < n && !std::isspace(static_cast<unsigned char>(lowered[j]))) ++j;
        if (j > i) {
            std::string_view tok(lowered.data() + i, j - i);
            std::string_view stripped = tok;
            while (!stripped.empty() &&
                   is_ascii_punct(static_cast<unsigned char>(stripped.back())) &&
                   stripped.back() != '/')
                stripped.remove_suffix(1);
            if (is_url_token(tok)) {
                std::string dom = url_domain(tok);
                // strip trailing punctuation such as "example.com,"
                while (!dom.empty() && is_ascii_punct(static_cast<unsigned char>(dom.back())))
                    dom.pop_back();
                if (!dom.empty()) tokens.push_back(std::move(dom));
            } else if (is_mention_token(stripped)) {
                tokens.emplace_back(stripped);
            } else if (is_bare_host(stripped)) {
                tokens.emplace_back(stripped);
            } else {
                // punctuation maps to spaces, which may split one raw token
                std::string cur;
                for (char c : tok) {
                    if (is_ascii_punct(static_cast<unsigned char>(c))) {
                        if (!cur.empty()) {
                            tokens.push_back(cur);
                            cur.clear();
                        }
                    } else {
                        cur.push_back(c);
                    }
                }
                if (!cur.empty()) tokens.push_back(std::move(cur));
            }
        }
        i = j;
    }
    return tokens;
}

std::map<std::string, CommunityMeta> load_metadata_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open metadata file: " + path);
    std::map<std::string, CommunityMeta> out;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        std::string_view sv = trim(line);
        if (sv.empty()) continue;
        auto fields = split_csv_line(sv);
        if (first) {
            first = false;
            if (fields.size() < 3 || trim(fields[0]) != "community")
                throw FormatError(path + ": expected header community,subscribers,created_utc");
            continue;
        }
        if (fields.size() < 3) throw FormatError(path + ": bad metadata row: " + std::string(sv));
        CommunityMeta m;
        m.community = std::string(trim(fields[0]));
        try {
            m.subscribers = std::stoll(std::string(trim(fields[1])));
            m.created = std::stoll(std::string(trim(fields[2])));
        } catch (...) {
            throw FormatError(path + ": non-numeric metadata row: " + std::string(sv));
        }
        out[m.community] = m;
    }
    return out;
}

std::map<std::string, CommunityCorpus> build_corpora(std::vector<SubmissionRecord> submissions,
                                                     std::vector<CommentRecord> comments,
                                                     const std::map<std::string, CommunityMeta>& meta,
                                                     TimeWindow window) {
    if (window.start >= window.end) throw ValidationError("window start must precede end");

    std::map<std::string, CommunityCorpus> out;
    auto corpus_for = [&](const std::string& community) -> CommunityCorpus& {
        auto it = out.find(community);
        if (it == out.end()) {
            CommunityCorpus c;
            c.community = community;
            c.window = window;
            auto mit = meta.find(community);
            if (mit != meta.end()) c.meta = mit->second;
            it = out.emplace(community, std::move(c)).first;
        }
        return it->second;
    };

    for (auto& s : submissions) {
        if (!window.contains(s.created)) continue;
        corpus_for(s.community).submissions.push_back(std::move(s));
    }
    for (auto& c : comments) {
        if (!window.contains(c.created)) continue;
        corpus_for(c.community).comments.push_back(std::move(c));
    }
    return out;
}

}  // namespace cep
