#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "fewvec/corpus.hpp"
#include "fewvec/embedding_space.hpp"
#include "fewvec/rng.hpp"

namespace fewvec {

enum class TrainMode {
  kStandard,
  kSelective,
  kNonce2Vec,
  kFastText,
  kFastTextSelective,
};

// High-risk-then-cautious schedule for one-shot continued training:
// the learning rate starts high and decays exponentially per processed
// token, so it is strictly positive and non-increasing.
struct NonceSchedule {
  double initial_rate = 1.0;
  double token_decay = 0.99;
  int window = 15;
  int negatives = 3;
  int epochs = 1;
};

struct TrainParams {
  double learning_rate = 0.025;
  int window = 5;
  int negatives = 5;
  int epochs = 5;
  double subsample_t = 1e-5;  // <= 0 disables subsampling
  std::int64_t min_count = 50;
  std::size_t dim = 300;
  std::uint64_t seed = 1;
  TrainMode mode = TrainMode::kStandard;
  // Selective modes update only these rows (the session target row is
  // always trainable in few-shot updates).
  WordSet trainable_words;
  // Never drawn as negative samples.
  WordSet excluded_negatives;
  int threads = 1;  // background training only; >1 trades determinism for speed
  std::size_t ngram_buckets = 100000;
  int ngram_min = 3;
  int ngram_max = 5;
  NonceSchedule nonce;
};

// Input and output vector tables plus, for the subword modes, a hashed
// character n-gram bucket table.
struct SgnsModel {
  std::size_t dim = 0;
  std::vector<std::string> words;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::int64_t> counts;
  std::vector<double> input;   // |V| x dim
  std::vector<double> output;  // |V| x dim
  std::size_t ngram_buckets = 0;
  int ngram_min = 3;
  int ngram_max = 5;
  std::vector<double> ngram;  // ngram_buckets x dim, empty when unused

  bool has_ngrams() const { return ngram_buckets > 0; }
  std::optional<std::size_t> row(const std::string& word) const;

  std::span<double> input_row(std::size_t r) {
    return {input.data() + r * dim, dim};
  }
  std::span<const double> input_row(std::size_t r) const {
    return {input.data() + r * dim, dim};
  }
  std::span<double> output_row(std::size_t r) {
    return {output.data() + r * dim, dim};
  }
  std::span<const double> output_row(std::size_t r) const {
    return {output.data() + r * dim, dim};
  }
  std::span<double> ngram_row(std::size_t b) {
    return {ngram.data() + b * dim, dim};
  }
  std::span<const double> ngram_row(std::size_t b) const {
    return {ngram.data() + b * dim, dim};
  }

  // Appends a word with an input row drawn uniformly from
  // [-0.5/dim, 0.5/dim) and a zero output row.
  std::size_t add_word(const std::string& word, std::int64_t count, Rng& rng);
};

// Character n-grams of lengths [nmin, nmax] over the word wrapped in '<'
// and '>', one entry per occurrence.
std::vector<std::string> char_ngrams(const std::string& word, int nmin = 3,
                                     int nmax = 5);

// FNV-1a bucket of an n-gram.
std::size_t ngram_bucket(std::string_view ngram, std::size_t buckets);

// Sum of the word's n-gram bucket vectors; in-vocabulary words additionally
// add their word vector.
std::vector<double> compose_subword(const SgnsModel& model,
                                    const std::string& word);

// One draw from the 3/4-power unigram distribution, renormalized over
// non-excluded words. Throws when all probability mass is excluded.
std::size_t negative_sample(const NegativeDistribution& dist, Rng& rng,
                            const WordSet& exclude = {});

// Learning-rate schedules used by the trainers. The linear schedule decays
// over the token budget with the conventional floor of 1e-4 of the start
// rate; the nonce schedule decays exponentially per processed token.
double linear_rate(double initial, double processed, double budget);
double nonce_rate(const NonceSchedule& schedule, double processed);

// Loss and analytic gradients of one skip-gram negative-sampling step:
//   L = -log sigmoid(c.p) - sum_i log sigmoid(-c.n_i)
// for center (input) vector c, positive output vector p and negative output
// vectors n_i. Exposed so the applied updates can be verified against
// finite differences.
double sgns_pair_loss(std::span<const double> center,
                      std::span<const double> positive,
                      const std::vector<std::span<const double>>& negatives);

struct SgnsPairGradients {
  std::vector<double> center;
  std::vector<double> positive;
  std::vector<std::vector<double>> negatives;
};

SgnsPairGradients sgns_pair_gradients(
    std::span<const double> center, std::span<const double> positive,
    const std::vector<std::span<const double>>& negatives);

// Skip-gram negative-sampling training from scratch: min-count vocabulary,
// standard subsampling discard, per-target window size drawn uniformly from
// [1, window], negatives from the 3/4-power distribution, learning rate
// decayed linearly over the token budget. Deterministic when threads == 1.
SgnsModel train_background(const SentenceStream& corpus,
                           const TrainParams& params);

// Continues training on one episode and returns the inferred vector for the
// episode target. The target trains under a fresh session row (registered
// for the target marker token), so an existing vector for the same surface
// form is never the starting point and stays available as a gold standard.
std::vector<double> fewshot_update(SgnsModel& model, const Episode& episode,
                                   const TrainParams& params);

// Persistence: input vectors plus counts in the embedding-space text
// format; output vectors and n-gram buckets as labelled-matrix sidecars
// (bucket index in place of the word).
void save_sgns_model(const SgnsModel& model, const std::string& vectors_path,
                     const std::string& counts_path,
                     const std::string& output_path,
                     const std::string& ngram_path = "");
SgnsModel load_sgns_model(const std::string& vectors_path,
                          const std::string& counts_path,
                          const std::string& output_path,
                          const std::string& ngram_path = "");

// Assembles a model from an already-loaded space and sidecar matrices.
// Output rows are matched to the vocabulary by label.
SgnsModel make_sgns_model(const EmbeddingSpace& space,
                          const LabelledMatrix* output_vectors,
                          const LabelledMatrix* ngram_vectors, int ngram_min = 3,
                          int ngram_max = 5);

}  // namespace fewvec
