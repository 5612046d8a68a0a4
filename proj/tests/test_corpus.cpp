#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "fewvec/corpus.hpp"
#include "fewvec/rng.hpp"
#include "fewvec/stemmer.hpp"

using namespace fewvec;

TEST_CASE("tokenize lowercases and strips punctuation") {
  CHECK(tokenize("The cat sat.") ==
        std::vector<std::string>{"the", "cat", "sat"});
  CHECK(tokenize("") == std::vector<std::string>{});
  CHECK(tokenize("Hello, World!") == std::vector<std::string>{"hello", "world"});
  CHECK(tokenize("don't") == std::vector<std::string>{"don", "t"});
  CHECK(tokenize("  a\t b ") == std::vector<std::string>{"a", "b"});
}

TEST_CASE("count_frequencies on tiny corpora") {
  FrequencyTable t = count_frequencies({{"a", "b"}, {"a"}});
  CHECK(t.count("a") == 2);
  CHECK(t.count("b") == 1);
  CHECK(t.count("c") == 0);
  CHECK(t.total == 3);

  FrequencyTable empty = count_frequencies({});
  CHECK(empty.counts.empty());
  CHECK(empty.total == 0);
}

TEST_CASE("count_frequencies matches a naive recount") {
  Rng rng(3);
  SentenceStream corpus;
  std::map<std::string, std::int64_t> naive;
  std::int64_t total = 0;
  Sentence sentence;
  for (int i = 0; i < 1000; ++i) {
    std::string token = "t" + std::to_string(rng.below(37));
    sentence.push_back(token);
    ++naive[token];
    ++total;
    if (sentence.size() == 7) {
      corpus.push_back(sentence);
      sentence.clear();
    }
  }
  if (!sentence.empty()) corpus.push_back(sentence);

  FrequencyTable t = count_frequencies(corpus);
  CHECK(t.total == total);
  CHECK(t.counts.size() == naive.size());
  for (const auto& [word, count] : naive) CHECK(t.count(word) == count);
}

TEST_CASE("subsample_weight hand values") {
  const double t = 1e-5;
  CHECK(subsample_weight(t, t) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(subsample_weight(4 * t, t) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(subsample_weight(t / 4, t) == 0.0);  // clamped from -1
  CHECK(subsample_weight(t / 4, t, SubsampleMode::kKeepProb) == 1.0);
  CHECK(subsample_weight(4 * t, t, SubsampleMode::kKeepProb) ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("subsample_weight rejects bad arguments") {
  CHECK_THROWS_AS(subsample_weight(0.0, 1e-5), Error);
  CHECK_THROWS_AS(subsample_weight(-0.1, 1e-5), Error);
  CHECK_THROWS_AS(subsample_weight(0.5, 0.0), Error);
  CHECK_THROWS_AS(subsample_weight(1.5, 1e-5), Error);
}

TEST_CASE("subsample_weight is monotone in f and bounded") {
  for (SubsampleMode mode :
       {SubsampleMode::kDiscardProb, SubsampleMode::kKeepProb}) {
    double previous = subsample_weight(1e-9, 1e-5, mode);
    bool non_decreasing = true;
    for (double f = 1e-8; f <= 1.0; f *= 1.7) {
      double w = subsample_weight(std::min(f, 1.0), 1e-5, mode);
      CHECK(w >= 0.0);
      CHECK(w <= 1.0);
      if (mode == SubsampleMode::kDiscardProb && w < previous) {
        non_decreasing = false;
      }
      previous = w;
    }
    if (mode == SubsampleMode::kDiscardProb) CHECK(non_decreasing);
  }
}

TEST_CASE("negative_distribution on hand counts") {
  FrequencyTable equal;
  equal.counts = {{"a", 1}, {"b", 1}};
  equal.total = 2;
  NegativeDistribution d1 = negative_distribution(equal);
  CHECK(d1.probabilities()[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(d1.probabilities()[1] == doctest::Approx(0.5).epsilon(1e-12));

  FrequencyTable skewed;
  skewed.counts = {{"a", 16}, {"b", 1}};
  skewed.total = 17;
  NegativeDistribution d2 = negative_distribution(skewed);
  // 16^(3/4) = 8
  REQUIRE(d2.words() == std::vector<std::string>{"a", "b"});
  CHECK(d2.probabilities()[0] == doctest::Approx(8.0 / 9.0).epsilon(1e-12));
  CHECK(d2.probabilities()[1] == doctest::Approx(1.0 / 9.0).epsilon(1e-12));

  CHECK_THROWS_AS(negative_distribution(FrequencyTable{}), Error);
}

TEST_CASE("negative_distribution matches direct recomputation") {
  Rng rng(17);
  FrequencyTable table;
  for (int i = 0; i < 100; ++i) {
    table.counts["w" + std::to_string(i)] = 1 + rng.below(5000);
  }
  NegativeDistribution dist = negative_distribution(table);

  double sum = 0;
  double normalizer = 0;
  for (const std::string& w : dist.words()) {
    normalizer += std::pow(static_cast<double>(table.count(w)), 0.75);
  }
  for (std::size_t i = 0; i < dist.words().size(); ++i) {
    double expected =
        std::pow(static_cast<double>(table.count(dist.words()[i])), 0.75) /
        normalizer;
    CHECK(dist.probabilities()[i] == doctest::Approx(expected).epsilon(1e-12));
    sum += dist.probabilities()[i];
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("negative_distribution is invariant under count scaling") {
  FrequencyTable base, doubled;
  Rng rng(19);
  for (int i = 0; i < 40; ++i) {
    std::int64_t c = 1 + rng.below(900);
    base.counts["w" + std::to_string(i)] = c;
    doubled.counts["w" + std::to_string(i)] = 2 * c;
  }
  NegativeDistribution a = negative_distribution(base);
  NegativeDistribution b = negative_distribution(doubled);
  for (std::size_t i = 0; i < a.probabilities().size(); ++i) {
    CHECK(a.probabilities()[i] ==
          doctest::Approx(b.probabilities()[i]).epsilon(1e-12));
  }
}

TEST_CASE("filter_corpus drops stem-matched tokens") {
  auto [filtered, stats] = filter_corpus({{"running", "jumps"}}, {"run"});
  CHECK(filtered == SentenceStream{{"jumps"}});
  CHECK(stats.tokens_total == 2);
  CHECK(stats.tokens_removed == 1);
  CHECK(stats.removed_fraction() == doctest::Approx(0.5));
}

TEST_CASE("filter_corpus with no test words is the identity") {
  SentenceStream corpus = {{"a", "b"}, {"c"}};
  auto [filtered, stats] = filter_corpus(corpus, {});
  CHECK(filtered == corpus);
  CHECK(stats.tokens_removed == 0);
  CHECK(stats.removed_fraction() == 0.0);
}

TEST_CASE("filter_corpus keep-set words survive verbatim") {
  auto [filtered, stats] =
      filter_corpus({{"running", "jumps"}}, {"run"}, {"running"});
  CHECK(filtered == SentenceStream{{"running", "jumps"}});
  CHECK(stats.tokens_removed == 0);
}

TEST_CASE("filter_corpus is idempotent and purges every matching stem") {
  Rng rng(29);
  std::vector<std::string> vocab = {"run",  "running", "runs", "walk",
                                    "walked", "dog",   "dogs", "tree",
                                    "trees", "house"};
  SentenceStream corpus;
  for (int s = 0; s < 500; ++s) {
    Sentence sentence;
    for (int i = 0; i < 8; ++i) {
      sentence.push_back(vocab[rng.below(vocab.size())]);
    }
    corpus.push_back(sentence);
  }
  WordSet tests = {"run", "dog"};
  WordSet banned_stems;
  for (const std::string& w : tests) banned_stems.insert(snowball_stem(w));

  auto [filtered, stats] = filter_corpus(corpus, tests);
  for (const Sentence& sentence : filtered) {
    for (const std::string& token : sentence) {
      CHECK(banned_stems.count(snowball_stem(token)) == 0);
    }
  }
  auto [again, stats2] = filter_corpus(filtered, tests);
  CHECK(stats2.tokens_removed == 0);
  CHECK(again == filtered);
}

TEST_CASE("extract_episode draws a deterministic sample") {
  SentenceStream corpus = {{"x", "a"}, {"b", "x"}, {"x", "c"}};

  Episode all = extract_episode(corpus, "x", 3, 9);
  CHECK(all.sentences.size() == 3);
  std::set<std::string> others;
  for (std::size_t s = 0; s < all.sentences.size(); ++s) {
    CHECK(all.sentences[s][all.target_positions[s]] == kTargetMarker);
    for (const std::string& token : all.sentences[s]) {
      if (token != kTargetMarker) others.insert(token);
    }
  }
  CHECK(others == std::set<std::string>{"a", "b", "c"});

  Episode one_a = extract_episode(corpus, "x", 1, 42);
  Episode one_b = extract_episode(corpus, "x", 1, 42);
  CHECK(one_a.sentences == one_b.sentences);
  CHECK(one_a.target_positions == one_b.target_positions);

  CHECK_THROWS_AS(extract_episode(corpus, "x", 4, 1), Error);
  CHECK_THROWS_AS(extract_episode(corpus, "zz", 1, 1), Error);
}

TEST_CASE("extract_episode seeds give distinct subsets") {
  SentenceStream corpus;
  for (int i = 0; i < 255; ++i) {
    corpus.push_back({"x", "f" + std::to_string(i)});
  }
  int distinct = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Episode a = extract_episode(corpus, "x", 4, seed);
    Episode b = extract_episode(corpus, "x", 4, seed + 1000);
    if (a.sentences != b.sentences) ++distinct;
  }
  CHECK(distinct >= 95);
}

TEST_CASE("a sentence with repeated occurrences banks each occurrence") {
  SentenceStream corpus = {{"x", "y", "x"}};
  Episode episode = extract_episode(corpus, "x", 2, 77);
  CHECK(episode.sentences.size() == 2);
  // both bank entries mark exactly one occurrence each
  std::set<std::size_t> positions(episode.target_positions.begin(),
                                  episode.target_positions.end());
  CHECK(positions == std::set<std::size_t>{0, 2});
}
