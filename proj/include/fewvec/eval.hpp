#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fewvec/corpus.hpp"
#include "fewvec/embedding_space.hpp"

namespace fewvec {

// Spearman rank correlation: Pearson correlation of averaged ranks (ties
// averaged). Throws on length mismatch, fewer than two points, or a
// constant side.
double spearman(std::span<const double> x, std::span<const double> y);

struct RankingSummary {
  double mrr = 0;
  std::size_t median_rank = 0;  // lower median for even counts
};

RankingSummary ranking_metrics(const std::vector<std::size_t>& ranks);

// Paired two-sided sign-flip permutation test on per-item differences:
// p = (1 + #{permuted |sum of differences| >= observed}) / (1 + iterations).
double permutation_test(std::span<const double> a, std::span<const double> b,
                        int iterations = 10000, std::uint64_t seed = 1);

// A few-shot method: maps an episode to an inferred vector, throwing
// InferenceError to abstain. Must be safe to call concurrently.
using Method = std::function<std::vector<double>(const Episode&)>;

struct DnItem {
  std::string gold;
  Episode episode;  // exactly one definitional sentence
};

struct DnDataset {
  std::vector<DnItem> items;
  std::string split;
};

// TSV: word<TAB>definitional sentence with the target marker.
DnDataset load_dn(const std::string& path, const std::string& split = "");

struct ChimeraTrial {
  std::string id;
  int num_sentences = 0;
  Episode episode;
  std::vector<std::string> probes;
  std::vector<double> ratings;
};

struct ChimeraDataset {
  std::vector<ChimeraTrial> trials;
};

// TSV: id<TAB>L<TAB>sent1@@sent2@@...<TAB>probe1,probe2,...<TAB>r1,r2,...
// Multiple files are concatenated (the full task joins the original splits).
ChimeraDataset load_chimera(const std::vector<std::string>& paths);

struct CrwPair {
  std::string rare;
  std::string partner;
  double human_score = 0;
};

struct CrwDataset {
  std::vector<CrwPair> pairs;
  // rare word -> marker-bearing context sentences
  std::unordered_map<std::string, std::vector<Sentence>> bank;
};

// Pairs TSV: rare<TAB>partner<TAB>score. Context sentences live in
// <contexts_dir>/<rare>.txt, one marker-bearing sentence per line.
CrwDataset load_crw(const std::string& pairs_path,
                    const std::string& contexts_dir);

// Per-item scores plus aggregates for one (method, task) run. Serialized
// as JSON: {method, task, config, per_item[], aggregates{}}.
struct EvalReport {
  std::string method;
  std::string task;
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json per_item = nlohmann::json::array();
  nlohmann::json aggregates = nlohmann::json::object();

  nlohmann::json to_json() const;
  static EvalReport from_json(const nlohmann::json& j);
};

void save_report(const EvalReport& report, const std::string& path);
EvalReport load_report(const std::string& path);

struct EvalOptions {
  std::string method_id;
  std::string task_id;
  nlohmann::json config = nlohmann::json::object();
  int threads = 1;
};

// Rank-the-gold protocol: each item's inferred vector is ranked against
// every background vector; abstentions score the worst rank |V|.
EvalReport eval_dn(const Method& method, const DnDataset& dataset,
                   const EmbeddingSpace& space, const EvalOptions& options);

// Per-trial Spearman between system probe similarities and human ratings,
// averaged per number of context sentences. Undefined-correlation trials
// are dropped and counted.
EvalReport eval_chimera(const Method& method, const ChimeraDataset& dataset,
                        const EmbeddingSpace& space,
                        const EvalOptions& options);

struct CrwEvalOptions {
  std::vector<std::size_t> ns = {1, 2, 4, 8, 16, 32, 64};
  std::uint64_t seed = 1;
  int repeats = 1;
};

// For each context count n: Spearman between system and human similarities
// over all pairs, episodes drawn by seeded shuffle of each word's bank.
EvalReport eval_crw(const Method& method, const CrwDataset& dataset,
                    const EmbeddingSpace& space, const CrwEvalOptions& crw,
                    const EvalOptions& options);

// For k = 1..k_max, the fraction of test words whose k nearest neighbours
// (the word itself excluded) contain at least one word with the same stem.
std::vector<double> stem_neighbor_proportions(
    const EmbeddingSpace& space, const std::vector<std::string>& test_words,
    std::size_t k_max = 20);

// Paired per-item scores of two reports, matched by item id. Items lacking
// a score on either side are skipped.
std::pair<std::vector<double>, std::vector<double>> paired_scores(
    const EvalReport& a, const EvalReport& b);

}  // namespace fewvec
