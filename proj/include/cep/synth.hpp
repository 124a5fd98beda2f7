#pragma once

#include <cstdint>
#include <string>

#include "cep/corpus.hpp"

namespace cep {

// Controllable synthetic corpus generator. Each block's delta raises one
// signal for positive communities: keyword usage (L), score means (M),
// reply density and triad closure (N). With all deltas at zero the label
// is independent of every feature.
struct SynthConfig {
    int n_communities = 400;
    double positive_fraction = 0.5;
    // moderate defaults: each block alone is informative, together they
    // separate the classes well; set all three to zero for a null dataset
    double keyword_rate_delta = 0.05;
    double score_mean_delta = 1.5;
    double edge_density_delta = 0.3;
    std::uint64_t seed = 42;
    TimeWindow window{1475280000, 1490918400};  // six months, matches the default config
};

struct SynthDataset {
    std::string submissions_jsonl;
    std::string comments_jsonl;
    std::string metadata_csv;
    std::string labels_csv;
};

// Deterministic given the seed; byte-identical across platforms. The
// emitted files follow the same Pushshift-style contracts the ingestion
// stage consumes, including thing-type prefixes on parent ids.
SynthDataset synth_generate(const SynthConfig& cfg);

// Writes the four files (submissions.jsonl, comments.jsonl, metadata.csv,
// labels.csv) into the directory.
void synth_write(const SynthConfig& cfg, const std::string& directory);

}  // namespace cep
