#include "fewvec/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include "fewvec/stemmer.hpp"

namespace fewvec {

namespace {

bool is_punct_byte(unsigned char c) {
  return c < 0x80 && std::ispunct(c);
}

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

Sentence split_tokens(const std::string& text) {
  Sentence tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) tokens.push_back(text.substr(i, j - i));
    i = j;
  }
  return tokens;
}

}  // namespace

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      tokens.push_back(current);
      current.clear();
    }
  };
  for (unsigned char c : line) {
    if (c < 0x80 && std::isspace(c)) {
      flush();
    } else if (is_punct_byte(c)) {
      flush();  // punctuation splits and is discarded
    } else {
      current.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  flush();
  return tokens;
}

std::vector<std::string> FrequencyTable::sorted_words() const {
  std::vector<std::string> words;
  words.reserve(counts.size());
  for (const auto& [word, count] : counts) words.push_back(word);
  std::sort(words.begin(), words.end());
  return words;
}

FrequencyTable count_frequencies(const SentenceStream& corpus) {
  FrequencyTable table;
  for (const Sentence& sentence : corpus) {
    for (const std::string& token : sentence) {
      ++table.counts[token];
      ++table.total;
    }
  }
  return table;
}

void validate_episode(const Episode& episode) {
  if (episode.sentences.empty()) {
    throw Error("episode for '" + episode.target + "' has no sentences");
  }
  if (episode.sentences.size() != episode.target_positions.size()) {
    throw Error("episode for '" + episode.target +
                "': positions do not match sentences");
  }
  for (std::size_t s = 0; s < episode.sentences.size(); ++s) {
    const Sentence& sentence = episode.sentences[s];
    std::size_t pos = episode.target_positions[s];
    if (pos >= sentence.size() || sentence[pos] != kTargetMarker) {
      throw Error("episode for '" + episode.target + "': sentence " +
                  std::to_string(s) + " lacks the target marker at its slot");
    }
    std::size_t markers = 0;
    for (const std::string& token : sentence) {
      if (token == kTargetMarker) ++markers;
    }
    if (markers != 1) {
      throw Error("episode for '" + episode.target + "': sentence " +
                  std::to_string(s) + " holds " + std::to_string(markers) +
                  " target markers, expected exactly 1");
    }
  }
}

std::pair<SentenceStream, RemovalStats> filter_corpus(
    const SentenceStream& corpus, const WordSet& test_words,
    const WordSet& keep) {
  WordSet banned_stems;
  for (const std::string& word : test_words) {
    banned_stems.insert(snowball_stem(word));
  }

  RemovalStats stats;
  SentenceStream filtered;
  filtered.reserve(corpus.size());
  // stem once per distinct token
  std::unordered_map<std::string, bool> banned_cache;
  for (const Sentence& sentence : corpus) {
    Sentence kept;
    kept.reserve(sentence.size());
    for (const std::string& token : sentence) {
      ++stats.tokens_total;
      bool banned;
      auto it = banned_cache.find(token);
      if (it != banned_cache.end()) {
        banned = it->second;
      } else {
        banned = banned_stems.count(snowball_stem(token)) > 0;
        banned_cache.emplace(token, banned);
      }
      if (banned && !keep.count(token)) {
        ++stats.tokens_removed;
      } else {
        kept.push_back(token);
      }
    }
    filtered.push_back(std::move(kept));
  }
  return {std::move(filtered), stats};
}

std::vector<Sentence> context_bank(const SentenceStream& corpus,
                                   const std::string& word) {
  std::vector<Sentence> bank;
  for (const Sentence& sentence : corpus) {
    for (std::size_t i = 0; i < sentence.size(); ++i) {
      if (sentence[i] == word) {
        Sentence marked = sentence;
        marked[i] = kTargetMarker;
        bank.push_back(std::move(marked));
      }
    }
  }
  return bank;
}

Episode episode_from_bank(const std::string& word,
                          const std::vector<Sentence>& bank, std::size_t n,
                          std::uint64_t seed) {
  if (n < 1) throw Error("episode size must be >= 1");
  if (bank.size() < n) {
    throw Error("only " + std::to_string(bank.size()) + " sentences hold '" +
                word + "', need " + std::to_string(n));
  }
  std::vector<std::size_t> order(bank.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  Episode episode;
  episode.target = word;
  for (std::size_t i = 0; i < n; ++i) {
    const Sentence& sentence = bank[order[i]];
    auto it = std::find(sentence.begin(), sentence.end(), kTargetMarker);
    if (it == sentence.end()) {
      throw Error("bank sentence for '" + word + "' lacks the target marker");
    }
    episode.sentences.push_back(sentence);
    episode.target_positions.push_back(
        static_cast<std::size_t>(it - sentence.begin()));
  }
  validate_episode(episode);
  return episode;
}

Episode extract_episode(const SentenceStream& corpus, const std::string& word,
                        std::size_t n, std::uint64_t seed) {
  return episode_from_bank(word, context_bank(corpus, word), n, seed);
}

double subsample_weight(double frequency, double threshold,
                        SubsampleMode mode) {
  if (!(frequency > 0.0) || frequency > 1.0) {
    throw Error("subsample_weight: frequency must be in (0, 1]");
  }
  if (!(threshold > 0.0)) {
    throw Error("subsample_weight: threshold must be positive");
  }
  double ratio = std::sqrt(threshold / frequency);
  if (mode == SubsampleMode::kDiscardProb) {
    return std::clamp(1.0 - ratio, 0.0, 1.0);
  }
  return std::min(1.0, ratio);
}

NegativeDistribution::NegativeDistribution(
    std::vector<std::string> words, const std::vector<std::int64_t>& counts)
    : words_(std::move(words)) {
  if (words_.size() != counts.size()) {
    throw Error("negative distribution: words/counts size mismatch");
  }
  if (words_.empty()) {
    throw Error("negative distribution over an empty vocabulary");
  }

  probs_.resize(words_.size(), 0.0);
  double normalizer = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] < 0) throw Error("negative count in distribution");
    if (counts[i] > 0) {
      probs_[i] = std::pow(static_cast<double>(counts[i]), 0.75);
      normalizer += probs_[i];
    }
  }
  if (normalizer == 0) {
    throw Error("negative distribution: no word has a positive count");
  }
  for (double& p : probs_) p /= normalizer;

  // Vose alias construction over the support.
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    if (probs_[i] > 0) support_.push_back(i);
  }
  std::size_t n = support_.size();
  alias_prob_.assign(n, 0.0);
  alias_.assign(n, 0);
  std::vector<double> scaled(n);
  std::vector<std::size_t> small, large;
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = probs_[support_[i]] * static_cast<double>(n);
    (scaled[i] < 1.0 ? small : large).push_back(i);
  }
  while (!small.empty() && !large.empty()) {
    std::size_t s = small.back();
    small.pop_back();
    std::size_t l = large.back();
    large.pop_back();
    alias_prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    (scaled[l] < 1.0 ? small : large).push_back(l);
  }
  for (std::size_t i : large) {
    alias_prob_[i] = 1.0;
    alias_[i] = i;
  }
  for (std::size_t i : small) {  // numerical leftovers
    alias_prob_[i] = 1.0;
    alias_[i] = i;
  }
}

std::size_t NegativeDistribution::sample(Rng& rng) const {
  std::size_t slot = static_cast<std::size_t>(rng.below(support_.size()));
  double u = rng.uniform01();
  std::size_t pick = u < alias_prob_[slot] ? slot : alias_[slot];
  return support_[pick];
}

NegativeDistribution negative_distribution(const FrequencyTable& freqs) {
  if (freqs.counts.empty()) {
    throw Error("negative distribution over an empty frequency table");
  }
  std::vector<std::string> words = freqs.sorted_words();
  std::vector<std::int64_t> counts;
  counts.reserve(words.size());
  for (const std::string& word : words) counts.push_back(freqs.count(word));
  return NegativeDistribution(std::move(words), counts);
}

SentenceStream load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open corpus " + path);
  SentenceStream corpus;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    Sentence tokens = tokenize(line);
    if (!tokens.empty()) corpus.push_back(std::move(tokens));
  }
  return corpus;
}

void save_corpus(const SentenceStream& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write corpus " + path);
  for (const Sentence& sentence : corpus) {
    for (std::size_t i = 0; i < sentence.size(); ++i) {
      if (i) out << ' ';
      out << sentence[i];
    }
    out << '\n';
  }
  if (!out) throw Error("write failed for " + path);
}

std::vector<Episode> load_episode_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open episode file " + path);

  std::vector<Episode> episodes;
  std::unordered_map<std::string, std::size_t> by_word;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_fields(line, '\t');
    if (fields.size() != 2) {
      throw Error(path + " line " + std::to_string(lineno) +
                  ": expected 'word<TAB>sentence'");
    }
    Sentence tokens = split_tokens(fields[1]);
    auto marker = std::find(tokens.begin(), tokens.end(), kTargetMarker);
    if (marker == tokens.end()) {
      throw Error(path + " line " + std::to_string(lineno) +
                  ": sentence lacks " + std::string(kTargetMarker));
    }
    auto [it, inserted] = by_word.emplace(fields[0], episodes.size());
    if (inserted) {
      episodes.push_back(Episode{fields[0], {}, {}});
    }
    Episode& episode = episodes[it->second];
    episode.target_positions.push_back(
        static_cast<std::size_t>(marker - tokens.begin()));
    episode.sentences.push_back(std::move(tokens));
  }
  for (const Episode& episode : episodes) validate_episode(episode);
  return episodes;
}

}  // namespace fewvec
