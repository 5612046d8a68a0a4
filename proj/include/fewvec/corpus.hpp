#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fewvec/embedding_space.hpp"
#include "fewvec/rng.hpp"

namespace fewvec {

using Sentence = std::vector<std::string>;
using SentenceStream = std::vector<Sentence>;

// Literal token marking the target slot inside an episode sentence.
inline constexpr const char* kTargetMarker = "<TRG>";

// Lowercases, splits on whitespace, and drops punctuation characters
// (which first split the surrounding word). Bytes >= 0x80 pass through, so
// UTF-8 letters survive.
std::vector<std::string> tokenize(const std::string& line);

struct FrequencyTable {
  std::unordered_map<std::string, std::int64_t> counts;
  std::int64_t total = 0;

  std::int64_t count(const std::string& word) const {
    auto it = counts.find(word);
    return it == counts.end() ? 0 : it->second;
  }
  // Ascending lexicographic word order, for deterministic iteration.
  std::vector<std::string> sorted_words() const;
};

FrequencyTable count_frequencies(const SentenceStream& corpus);

// One few-shot instance: a target word form plus context sentences, each
// containing the target marker exactly once at the recorded position.
struct Episode {
  std::string target;
  std::vector<Sentence> sentences;
  std::vector<std::size_t> target_positions;
};

void validate_episode(const Episode& episode);

struct RemovalStats {
  std::int64_t tokens_total = 0;
  std::int64_t tokens_removed = 0;

  double removed_fraction() const {
    return tokens_total == 0
               ? 0.0
               : static_cast<double>(tokens_removed) / tokens_total;
  }
};

// Drops every token whose Porter2 stem equals the stem of some test word;
// sentences stay in place (possibly emptied), mirroring how min-count
// filtering drops tokens. Words in `keep` survive verbatim.
std::pair<SentenceStream, RemovalStats> filter_corpus(
    const SentenceStream& corpus, const WordSet& test_words,
    const WordSet& keep = {});

// All (sentence, position) occurrences of `word` in the corpus, with the
// occurrence replaced by the target marker. One bank entry per occurrence,
// in corpus order.
std::vector<Sentence> context_bank(const SentenceStream& corpus,
                                   const std::string& word);

// Seeded draw of n sentences from the word's bank. The bank is shuffled
// with the seed and the first n sentences taken, so a fixed
// (word, n, seed) always yields the same episode.
Episode extract_episode(const SentenceStream& corpus, const std::string& word,
                        std::size_t n, std::uint64_t seed);
Episode episode_from_bank(const std::string& word,
                          const std::vector<Sentence>& bank, std::size_t n,
                          std::uint64_t seed);

// How the subsampling probability for frequency f and threshold t is turned
// into a weight:
//   kDiscardProb: clamp(1 - sqrt(t/f), 0, 1)   (weights frequent words up)
//   kKeepProb:    min(1, sqrt(t/f))            (weights frequent words down)
enum class SubsampleMode { kDiscardProb, kKeepProb };

double subsample_weight(double frequency, double threshold,
                        SubsampleMode mode = SubsampleMode::kDiscardProb);

// Unigram distribution raised to the 3/4 power, normalized. Carries an
// alias table for O(1) sampling.
class NegativeDistribution {
 public:
  NegativeDistribution(std::vector<std::string> words,
                       const std::vector<std::int64_t>& counts);

  const std::vector<std::string>& words() const { return words_; }
  const std::vector<double>& probabilities() const { return probs_; }

  // Index into words() drawn with probability probs()[i].
  std::size_t sample(Rng& rng) const;

 private:
  std::vector<std::string> words_;
  std::vector<double> probs_;
  // Vose alias table over the support.
  std::vector<std::size_t> support_;
  std::vector<double> alias_prob_;
  std::vector<std::size_t> alias_;
};

NegativeDistribution negative_distribution(const FrequencyTable& freqs);

// Corpus file: UTF-8 plain text, one sentence per line. Lines are passed
// through tokenize(); empty results are dropped.
SentenceStream load_corpus(const std::string& path);
void save_corpus(const SentenceStream& corpus, const std::string& path);

// Episode file: TSV "word<TAB>sentence" with the target marker; sentences
// are whitespace-split verbatim (they are already tokenized). Consecutive
// or scattered lines with the same word form one episode.
std::vector<Episode> load_episode_file(const std::string& path);

}  // namespace fewvec
