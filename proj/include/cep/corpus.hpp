#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cep {

struct SubmissionRecord {
    std::string id;
    std::string community;
    std::string author;
    std::string title;
    std::string body;  // selftext, may be empty
    long long score = 0;
    std::int64_t created = 0;
    long long comment_count = 0;
};

struct CommentRecord {
    std::string id;
    std::string community;
    std::string author;
    std::string body;
    long long score = 0;
    std::int64_t created = 0;
    std::string parent_id;  // id of the submission or comment replied to
    std::string link_id;    // id of the root submission
};

struct CommunityMeta {
    std::string community;
    long long subscribers = 0;
    std::int64_t created = 0;
};

// Half-open time window [start, end).
struct TimeWindow {
    std::int64_t start = 0;
    std::int64_t end = 0;
    bool contains(std::int64_t t) const { return t >= start && t < end; }
};

struct CommunityCorpus {
    std::string community;
    std::vector<SubmissionRecord> submissions;
    std::vector<CommentRecord> comments;
    std::optional<CommunityMeta> meta;
    TimeWindow window;
};

enum class RecordKind { Submission, Comment };

struct LoadStats {
    std::size_t loaded = 0;
    std::size_t skipped = 0;
};

// Streams one Pushshift-style JSONL dump; one JSON object per line.
// Malformed lines are skipped and counted. Throws IoError when the file
// cannot be opened and FormatError when more than half the non-empty
// lines fail to parse.
LoadStats load_records(const std::string& path, RecordKind kind,
                       const std::function<void(SubmissionRecord&&)>& on_submission,
                       const std::function<void(CommentRecord&&)>& on_comment);

// Convenience wrappers used by tests and small pipelines.
std::vector<SubmissionRecord> load_submissions(const std::string& path, LoadStats* stats = nullptr);
std::vector<CommentRecord> load_comments(const std::string& path, LoadStats* stats = nullptr);

// Lower-cases, maps ASCII punctuation to spaces and splits on whitespace.
// URL tokens (http://, https://, www. prefixes) collapse to their domain;
// /u/ mentions survive as single tokens.
std::vector<std::string> normalize_text(std::string_view raw);

// Metadata CSV: header "community,subscribers,created_utc" required.
std::map<std::string, CommunityMeta> load_metadata_csv(const std::string& path);

// Groups in-window records per community. Communities with no in-window
// records are absent; metadata is attached when available.
std::map<std::string, CommunityCorpus> build_corpora(std::vector<SubmissionRecord> submissions,
                                                     std::vector<CommentRecord> comments,
                                                     const std::map<std::string, CommunityMeta>& meta,
                                                     TimeWindow window);

inline constexpr const char* kDeletedAuthor = "[deleted]";

}  // namespace cep
