#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "fewvec/rng.hpp"
#include "fewvec/sgns.hpp"

using namespace fewvec;

namespace {

// Independent n-gram enumeration: slide every window size over the
// boundary-marked word.
std::set<std::string> oracle_ngrams(const std::string& word) {
  std::string wrapped = "<" + word + ">";
  std::set<std::string> grams;
  for (std::size_t i = 0; i < wrapped.size(); ++i) {
    for (std::size_t n = 3; n <= 5 && i + n <= wrapped.size(); ++n) {
      grams.insert(wrapped.substr(i, n));
    }
  }
  return grams;
}

SgnsModel toy_model(const std::vector<std::pair<std::string, std::int64_t>>&
                        vocab,
                    std::size_t dim, std::uint64_t seed,
                    std::size_t buckets = 0) {
  SgnsModel model;
  model.dim = dim;
  Rng rng(seed);
  for (const auto& [word, count] : vocab) model.add_word(word, count, rng);
  if (buckets > 0) {
    model.ngram_buckets = buckets;
    model.ngram.assign(buckets * dim, 0.0);
  }
  return model;
}

SentenceStream cluster_corpus(std::uint64_t seed, int sentences) {
  // words a0..a4 co-occur only with each other, likewise b0..b4
  Rng rng(seed);
  SentenceStream corpus;
  for (int s = 0; s < sentences; ++s) {
    char side = (s % 2 == 0) ? 'a' : 'b';
    Sentence sentence;
    for (int i = 0; i < 5; ++i) {
      sentence.push_back(std::string(1, side) + std::to_string(rng.below(5)));
    }
    corpus.push_back(sentence);
  }
  return corpus;
}

double mean_pairwise_cosine(const SgnsModel& model,
                            const std::vector<std::string>& group_a,
                            const std::vector<std::string>& group_b) {
  double acc = 0;
  int pairs = 0;
  for (const std::string& wa : group_a) {
    for (const std::string& wb : group_b) {
      if (wa == wb) continue;
      auto a = model.input_row(*model.row(wa));
      auto b = model.input_row(*model.row(wb));
      double dot = 0, na = 0, nb = 0;
      for (std::size_t d = 0; d < model.dim; ++d) {
        dot += a[d] * b[d];
        na += a[d] * a[d];
        nb += b[d] * b[d];
      }
      acc += dot / std::sqrt(na * nb);
      ++pairs;
    }
  }
  return acc / pairs;
}

Episode marker_episode(const std::vector<Sentence>& sentences,
                       const std::string& target) {
  Episode episode;
  episode.target = target;
  for (const Sentence& s : sentences) {
    auto it = std::find(s.begin(), s.end(), kTargetMarker);
    REQUIRE(it != s.end());
    episode.sentences.push_back(s);
    episode.target_positions.push_back(
        static_cast<std::size_t>(it - s.begin()));
  }
  return episode;
}

TrainParams quick_params(std::uint64_t seed) {
  TrainParams params;
  params.dim = 8;
  params.min_count = 1;
  params.subsample_t = 0;  // tiny vocabularies would discard everything
  params.epochs = 3;
  params.seed = seed;
  return params;
}

}  // namespace

TEST_CASE("char_ngrams enumerates boundary-marked slices") {
  std::vector<std::string> grams = char_ngrams("cat");
  std::set<std::string> got(grams.begin(), grams.end());
  std::set<std::string> want = {"<ca", "cat", "at>", "<cat", "cat>", "<cat>"};
  CHECK(got == want);
  CHECK(got == oracle_ngrams("cat"));
  CHECK(grams.size() == 6);  // no repeats for this word

  CHECK(char_ngrams("a") == std::vector<std::string>{"<a>"});
  CHECK_THROWS_AS(char_ngrams(""), Error);

  for (const std::string& word : {"university", "xylophone", "aaaa"}) {
    std::vector<std::string> v = char_ngrams(word);
    CHECK(std::set<std::string>(v.begin(), v.end()) == oracle_ngrams(word));
  }
}

TEST_CASE("compose_subword sums bucket vectors") {
  SgnsModel model = toy_model({{"known", 5}}, 4, 1, 16);

  SUBCASE("all-zero buckets give the zero vector") {
    std::vector<double> v = compose_subword(model, "mystery");
    CHECK(v == std::vector<double>(4, 0.0));
  }

  SUBCASE("a single matching n-gram returns its bucket vector") {
    // "a" has exactly one n-gram, "<a>"
    std::size_t bucket = ngram_bucket("<a>", model.ngram_buckets);
    for (std::size_t d = 0; d < 4; ++d) {
      model.ngram[bucket * 4 + d] = 0.5 + d;
    }
    std::vector<double> v = compose_subword(model, "a");
    for (std::size_t d = 0; d < 4; ++d) CHECK(v[d] == 0.5 + d);
  }

  SUBCASE("in-vocabulary words add their word vector") {
    std::vector<double> v = compose_subword(model, "known");
    auto row = model.input_row(*model.row("known"));
    for (std::size_t d = 0; d < 4; ++d) CHECK(v[d] == row[d]);
  }

  SUBCASE("a model without a table refuses to compose") {
    SgnsModel plain = toy_model({{"x", 1}}, 4, 2);
    CHECK_THROWS_AS(compose_subword(plain, "x"), Error);
  }
}

TEST_CASE("negative_sample honors the distribution and exclusions") {
  Rng rng(5);

  SUBCASE("single word is always drawn") {
    NegativeDistribution dist({"a"}, {7});
    for (int i = 0; i < 100; ++i) CHECK(negative_sample(dist, rng) == 0);
  }

  SUBCASE("exclusion renormalizes") {
    NegativeDistribution dist({"a", "b"}, {5, 5});
    for (int i = 0; i < 200; ++i) {
      CHECK(dist.words()[negative_sample(dist, rng, {"a"})] == "b");
    }
  }

  SUBCASE("empirical frequency converges") {
    NegativeDistribution dist({"a", "b"}, {16, 1});
    long hits = 0;
    const int draws = 1000000;
    for (int i = 0; i < draws; ++i) {
      if (negative_sample(dist, rng) == 0) ++hits;
    }
    double rate = static_cast<double>(hits) / draws;
    CHECK(std::fabs(rate - 8.0 / 9.0) < 0.01);
  }

  SUBCASE("all mass excluded is an error") {
    NegativeDistribution dist({"a", "b"}, {1, 0});
    CHECK_THROWS_AS(negative_sample(dist, rng, {"a"}), Error);
  }
}

TEST_CASE("excluded words are never drawn over many samples") {
  std::vector<std::string> words;
  std::vector<std::int64_t> counts;
  Rng setup(6);
  for (int i = 0; i < 50; ++i) {
    words.push_back("w" + std::to_string(i));
    counts.push_back(1 + setup.below(500));
  }
  NegativeDistribution dist(words, counts);
  WordSet excluded;
  for (int i = 0; i < 10; ++i) excluded.insert("w" + std::to_string(i * 5));

  Rng rng(7);
  for (int i = 0; i < 100000; ++i) {
    CHECK(excluded.count(dist.words()[negative_sample(dist, rng, excluded)]) ==
          0);
  }
}

TEST_CASE("pair gradients match finite differences of the pair loss") {
  Rng rng(11);
  const std::size_t dim = 8;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> center(dim), positive(dim);
    std::vector<std::vector<double>> negatives(3, std::vector<double>(dim));
    for (double& v : center) v = rng.uniform(-1, 1);
    for (double& v : positive) v = rng.uniform(-1, 1);
    for (auto& n : negatives) {
      for (double& v : n) v = rng.uniform(-1, 1);
    }
    auto spans = [&negatives] {
      std::vector<std::span<const double>> s;
      for (const auto& n : negatives) s.emplace_back(n);
      return s;
    };

    SgnsPairGradients g = sgns_pair_gradients(center, positive, spans());
    const double step = 1e-6;
    auto check_grad = [&](std::vector<double>& param, std::size_t i,
                          double analytic) {
      double saved = param[i];
      param[i] = saved + step;
      double up = sgns_pair_loss(center, positive, spans());
      param[i] = saved - step;
      double down = sgns_pair_loss(center, positive, spans());
      param[i] = saved;
      double numeric = (up - down) / (2 * step);
      double denom = std::max({std::fabs(numeric), std::fabs(analytic), 1e-8});
      CHECK(std::fabs(numeric - analytic) / denom < 1e-4);
    };

    for (std::size_t i = 0; i < dim; i += 3) {
      check_grad(center, i, g.center[i]);
      check_grad(positive, i, g.positive[i]);
      check_grad(negatives[1], i, g.negatives[1][i]);
    }
  }
}

TEST_CASE("train_background on the two-cluster corpus separates clusters") {
  SentenceStream corpus = cluster_corpus(1, 2000);
  TrainParams params;
  params.dim = 16;
  params.min_count = 1;
  params.subsample_t = 0;
  params.epochs = 5;
  params.seed = 99;

  SgnsModel model = train_background(corpus, params);
  std::vector<std::string> cluster_a = {"a0", "a1", "a2", "a3", "a4"};
  std::vector<std::string> cluster_b = {"b0", "b1", "b2", "b3", "b4"};
  double within = (mean_pairwise_cosine(model, cluster_a, cluster_a) +
                   mean_pairwise_cosine(model, cluster_b, cluster_b)) /
                  2;
  double across = mean_pairwise_cosine(model, cluster_a, cluster_b);
  CHECK(within - across > 0.2);
}

TEST_CASE("train_background is deterministic and honors epochs=0") {
  SentenceStream corpus = cluster_corpus(2, 300);
  TrainParams params = quick_params(5);
  params.dim = 8;

  SgnsModel a = train_background(corpus, params);
  SgnsModel b = train_background(corpus, params);
  CHECK(a.input == b.input);
  CHECK(a.output == b.output);
  CHECK(a.words == b.words);

  params.epochs = 0;
  SgnsModel init = train_background(corpus, params);
  // output rows start at zero; input rows stay inside the init bounds
  for (double v : init.output) CHECK(v == 0.0);
  double bound = 0.5 / static_cast<double>(init.dim);
  for (double v : init.input) {
    CHECK(v >= -bound);
    CHECK(v < bound);
  }
  CHECK_THROWS_AS(
      train_background(corpus, [&] {
        TrainParams p = params;
        p.min_count = 1000000;
        return p;
      }()),
      Error);
}

TEST_CASE("fewshot_update with learning rate 0 is a no-op") {
  SgnsModel model = toy_model({{"red", 10}, {"dog", 10}, {"cat", 10}}, 8, 3);
  SgnsModel before = model;
  Episode episode =
      marker_episode({{kTargetMarker, "red", "dog"}}, "newword");

  TrainParams params = quick_params(17);
  params.learning_rate = 0.0;
  std::vector<double> v1 = fewshot_update(model, episode, params);

  // pre-existing rows are untouched
  for (std::size_t r = 0; r < before.words.size(); ++r) {
    auto old_in = before.input_row(r);
    auto new_in = model.input_row(*model.row(before.words[r]));
    for (std::size_t d = 0; d < 8; ++d) CHECK(old_in[d] == new_in[d]);
  }

  // a second run returns the same initialization
  SgnsModel model2 = toy_model({{"red", 10}, {"dog", 10}, {"cat", 10}}, 8, 3);
  params.window = 2;  // different windows cannot matter at rate 0
  std::vector<double> v2 = fewshot_update(model2, episode, params);
  CHECK(v1 == v2);
}

TEST_CASE("selective updates touch only the session row") {
  Rng rng(23);
  std::vector<std::pair<std::string, std::int64_t>> vocab;
  for (int i = 0; i < 30; ++i) {
    vocab.emplace_back("w" + std::to_string(i), 5 + rng.below(50));
  }
  SgnsModel base = toy_model(vocab, 8, 29);

  for (int trial = 0; trial < 20; ++trial) {
    SgnsModel model = base;
    Sentence sentence;
    std::size_t len = 4 + rng.below(5);
    for (std::size_t i = 0; i < len; ++i) {
      sentence.push_back("w" + std::to_string(rng.below(30)));
    }
    sentence[rng.below(sentence.size())] = kTargetMarker;
    Episode episode = marker_episode({sentence}, "nonce" + std::to_string(trial));

    TrainParams params = quick_params(trial);
    params.mode = TrainMode::kSelective;
    params.trainable_words = {episode.target};
    fewshot_update(model, episode, params);

    for (std::size_t r = 0; r < base.words.size(); ++r) {
      auto old_in = base.input_row(r);
      auto new_in = model.input_row(r);
      auto old_out = base.output_row(r);
      auto new_out = model.output_row(r);
      for (std::size_t d = 0; d < 8; ++d) {
        CHECK(old_in[d] == new_in[d]);
        CHECK(old_out[d] == new_out[d]);
      }
    }
  }
}

TEST_CASE("standard few-shot training moves the vector toward the context") {
  // context words cluster around g = (1, 1, ..., 1)/sqrt(d)
  const std::size_t dim = 8;
  std::vector<double> gold(dim, 1.0 / std::sqrt(static_cast<double>(dim)));

  int improved = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed * 31 + 7);
    SgnsModel model;
    model.dim = dim;
    Rng init(seed);
    for (int i = 0; i < 10; ++i) {
      model.add_word("ctx" + std::to_string(i), 10, init);
      auto in = model.input_row(static_cast<std::size_t>(i));
      auto out = model.output_row(static_cast<std::size_t>(i));
      for (std::size_t d = 0; d < dim; ++d) {
        double v = gold[d] + 0.05 * rng.uniform(-1.0, 1.0);
        in[d] = v;
        out[d] = v;
      }
    }
    for (int i = 0; i < 10; ++i) {
      model.add_word("far" + std::to_string(i), 10, init);
      auto out = model.output_row(model.words.size() - 1);
      for (std::size_t d = 0; d < dim; ++d) out[d] = rng.uniform(-1.0, 1.0);
    }

    std::vector<Sentence> sentences;
    for (int s = 0; s < 4; ++s) {
      Sentence sent = {kTargetMarker};
      for (int i = 0; i < 4; ++i) {
        sent.push_back("ctx" + std::to_string(rng.below(10)));
      }
      sentences.push_back(sent);
    }
    Episode episode = marker_episode(sentences, "nonce");

    TrainParams params = quick_params(seed);
    params.epochs = 20;
    params.learning_rate = 0.1;

    // cosine of the deterministic init row against gold
    SgnsModel probe = model;
    TrainParams zero = params;
    zero.learning_rate = 0.0;
    std::vector<double> init_vec = fewshot_update(probe, episode, zero);
    auto cos = [&](const std::vector<double>& v) {
      double dot = 0, n = 0;
      for (std::size_t d = 0; d < dim; ++d) {
        dot += v[d] * gold[d];
        n += v[d] * v[d];
      }
      return dot / std::sqrt(n);
    };
    std::vector<double> trained = fewshot_update(model, episode, params);
    if (cos(trained) > cos(init_vec)) ++improved;
  }
  CHECK(improved > 10);
}

TEST_CASE("fewshot_update is deterministic for a fixed seed") {
  SgnsModel base =
      toy_model({{"u", 9}, {"v", 9}, {"w", 9}, {"x", 9}}, 6, 101);
  Episode episode =
      marker_episode({{"u", kTargetMarker, "v"}, {"w", kTargetMarker, "x"}},
                     "fresh");
  TrainParams params = quick_params(404);
  params.epochs = 10;

  SgnsModel m1 = base, m2 = base;
  std::vector<double> v1 = fewshot_update(m1, episode, params);
  std::vector<double> v2 = fewshot_update(m2, episode, params);
  CHECK(v1 == v2);
  CHECK(m1.input == m2.input);
  CHECK(m1.output == m2.output);
}

TEST_CASE("nonce schedule rates are positive and non-increasing") {
  NonceSchedule schedule;
  schedule.initial_rate = 1.0;
  schedule.token_decay = 0.97;
  double previous = nonce_rate(schedule, 0);
  CHECK(previous == 1.0);
  for (double processed = 1; processed <= 400; processed += 1) {
    double rate = nonce_rate(schedule, processed);
    CHECK(rate > 0.0);
    CHECK(rate <= previous);
    previous = rate;
  }

  double lin_prev = linear_rate(0.025, 0, 1000);
  for (double processed = 1; processed <= 3000; processed += 10) {
    double rate = linear_rate(0.025, processed, 1000);
    CHECK(rate > 0.0);
    CHECK(rate <= lin_prev);
    lin_prev = rate;
  }
  CHECK(linear_rate(0.025, 5000, 1000) == doctest::Approx(0.025 * 1e-4));
}

TEST_CASE("nonce2vec mode trains only the session row") {
  SgnsModel base = toy_model({{"a", 5}, {"b", 5}, {"c", 5}}, 6, 51);
  SgnsModel model = base;
  Episode episode = marker_episode({{"a", kTargetMarker, "b", "c"}}, "nonce");
  TrainParams params = quick_params(3);
  params.mode = TrainMode::kNonce2Vec;
  params.nonce.epochs = 2;

  std::vector<double> vec = fewshot_update(model, episode, params);
  CHECK(vec.size() == 6);
  for (std::size_t r = 0; r < base.words.size(); ++r) {
    auto before = base.input_row(r);
    auto after = model.input_row(r);
    auto before_out = base.output_row(r);
    auto after_out = model.output_row(r);
    for (std::size_t d = 0; d < 6; ++d) {
      CHECK(before[d] == after[d]);
      CHECK(before_out[d] == after_out[d]);
    }
  }
}

TEST_CASE("subword selective mode keeps foreign buckets frozen") {
  SgnsModel base = toy_model({{"walk", 20}, {"jump", 20}, {"rest", 20}}, 6, 71,
                             64);
  Rng rng(72);
  for (double& v : base.ngram) v = rng.uniform(-0.2, 0.2);

  SgnsModel model = base;
  Episode episode =
      marker_episode({{"walk", kTargetMarker, "jump"}}, "walking");
  TrainParams params = quick_params(9);
  params.mode = TrainMode::kFastTextSelective;
  params.trainable_words = {episode.target};
  std::vector<double> vec = fewshot_update(model, episode, params);
  CHECK(vec.size() == 6);

  std::set<std::size_t> session_buckets;
  for (const std::string& gram : char_ngrams("walking")) {
    session_buckets.insert(ngram_bucket(gram, base.ngram_buckets));
  }
  for (std::size_t b = 0; b < base.ngram_buckets; ++b) {
    if (session_buckets.count(b)) continue;
    for (std::size_t d = 0; d < 6; ++d) {
      CHECK(base.ngram[b * 6 + d] == model.ngram[b * 6 + d]);
    }
  }
  for (std::size_t r = 0; r < base.words.size(); ++r) {
    auto before = base.input_row(r);
    auto after = model.input_row(r);
    for (std::size_t d = 0; d < 6; ++d) CHECK(before[d] == after[d]);
  }
}

TEST_CASE("sgns model round-trips through its sidecar files") {
  namespace fs = std::filesystem;
  SgnsModel model = toy_model({{"alpha", 60}, {"beta", 70}}, 4, 11, 8);
  Rng rng(12);
  for (double& v : model.output) v = rng.uniform(-1, 1);
  for (double& v : model.ngram) v = rng.uniform(-1, 1);

  auto path = [](const std::string& name) {
    return (fs::temp_directory_path() / ("fewvec_sgns_" + name)).string();
  };
  save_sgns_model(model, path("vec.txt"), path("cnt.tsv"), path("out.txt"),
                  path("ng.txt"));
  SgnsModel loaded = load_sgns_model(path("vec.txt"), path("cnt.tsv"),
                                     path("out.txt"), path("ng.txt"));
  CHECK(loaded.words == model.words);
  CHECK(loaded.counts == model.counts);
  CHECK(loaded.input == model.input);
  CHECK(loaded.output == model.output);
  CHECK(loaded.ngram == model.ngram);
  CHECK(loaded.ngram_buckets == model.ngram_buckets);
}
