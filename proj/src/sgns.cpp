#include "fewvec/sgns.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <thread>

namespace fewvec {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log(1 + exp(x)) without overflow.
double softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

constexpr std::uint64_t kInitStream = 0x696e6974;   // model init
constexpr std::uint64_t kTrainStream = 0x747261696e;  // training draws

}  // namespace

std::optional<std::size_t> SgnsModel::row(const std::string& word) const {
  auto it = index.find(word);
  if (it == index.end()) return std::nullopt;
  return it->second;
}

std::size_t SgnsModel::add_word(const std::string& word, std::int64_t count,
                                Rng& rng) {
  if (index.count(word)) throw Error("word '" + word + "' already registered");
  std::size_t r = words.size();
  index.emplace(word, r);
  words.push_back(word);
  counts.push_back(count);
  double bound = 0.5 / static_cast<double>(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    input.push_back(rng.uniform(-bound, bound));
  }
  output.insert(output.end(), dim, 0.0);
  return r;
}

std::vector<std::string> char_ngrams(const std::string& word, int nmin,
                                     int nmax) {
  if (word.empty()) throw Error("cannot extract n-grams of an empty word");
  if (nmin < 1 || nmax < nmin) throw Error("bad n-gram length range");
  std::string wrapped = "<" + word + ">";
  std::vector<std::string> grams;
  for (int n = nmin; n <= nmax; ++n) {
    if (static_cast<std::size_t>(n) > wrapped.size()) break;
    for (std::size_t i = 0; i + n <= wrapped.size(); ++i) {
      grams.push_back(wrapped.substr(i, n));
    }
  }
  return grams;
}

std::size_t ngram_bucket(std::string_view ngram, std::size_t buckets) {
  if (buckets == 0) throw Error("bucket count must be positive");
  std::uint32_t h = 2166136261u;
  for (unsigned char c : ngram) {
    h ^= c;
    h *= 16777619u;
  }
  return h % buckets;
}

std::vector<double> compose_subword(const SgnsModel& model,
                                    const std::string& word) {
  if (!model.has_ngrams()) {
    throw Error("model has no n-gram table; cannot compose subword vector");
  }
  std::vector<double> v(model.dim, 0.0);
  for (const std::string& gram :
       char_ngrams(word, model.ngram_min, model.ngram_max)) {
    auto row = model.ngram_row(ngram_bucket(gram, model.ngram_buckets));
    for (std::size_t i = 0; i < model.dim; ++i) v[i] += row[i];
  }
  if (auto r = model.row(word)) {
    auto row = model.input_row(*r);
    for (std::size_t i = 0; i < model.dim; ++i) v[i] += row[i];
  }
  return v;
}

std::size_t negative_sample(const NegativeDistribution& dist, Rng& rng,
                            const WordSet& exclude) {
  if (!exclude.empty()) {
    bool any = false;
    const auto& probs = dist.probabilities();
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (probs[i] > 0 && !exclude.count(dist.words()[i])) {
        any = true;
        break;
      }
    }
    if (!any) throw Error("all negative-sample mass is excluded");
  }
  while (true) {
    std::size_t i = dist.sample(rng);
    if (exclude.empty() || !exclude.count(dist.words()[i])) return i;
  }
}

double linear_rate(double initial, double processed, double budget) {
  double lr = initial * (1.0 - processed / (budget + 1.0));
  return std::max(lr, initial * 1e-4);
}

double nonce_rate(const NonceSchedule& schedule, double processed) {
  return schedule.initial_rate * std::pow(schedule.token_decay, processed);
}

double sgns_pair_loss(std::span<const double> center,
                      std::span<const double> positive,
                      const std::vector<std::span<const double>>& negatives) {
  double loss = softplus(-dot(center, positive));
  for (auto n : negatives) loss += softplus(dot(center, n));
  return loss;
}

SgnsPairGradients sgns_pair_gradients(
    std::span<const double> center, std::span<const double> positive,
    const std::vector<std::span<const double>>& negatives) {
  std::size_t dim = center.size();
  SgnsPairGradients g;
  g.center.assign(dim, 0.0);
  g.positive.assign(dim, 0.0);
  g.negatives.resize(negatives.size());

  double s_pos = sigmoid(dot(center, positive)) - 1.0;
  for (std::size_t i = 0; i < dim; ++i) {
    g.center[i] += s_pos * positive[i];
    g.positive[i] = s_pos * center[i];
  }
  for (std::size_t k = 0; k < negatives.size(); ++k) {
    double s = sigmoid(dot(center, negatives[k]));
    g.negatives[k].assign(dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
      g.center[i] += s * negatives[k][i];
      g.negatives[k][i] = s * center[i];
    }
  }
  return g;
}

namespace {

// Shared state for one training session (background or few-shot).
struct Session {
  SgnsModel& model;
  TrainMode mode;
  int window;
  int negatives;
  double subsample_t;

  bool exponential = false;  // nonce schedule; otherwise linear decay
  double lr0 = 0.025;
  double decay = 1.0;
  double budget = 0;  // linear schedule token budget

  bool restrict_rows = false;
  std::vector<char> row_trainable;
  std::vector<char> excluded_negative;
  std::vector<double> keep_prob;  // subsampling keep probability per row

  bool use_ngrams = false;
  std::vector<char> bucket_trainable;  // empty = all buckets trainable
  std::vector<std::vector<std::size_t>> buckets_of_row;

  const NegativeDistribution* dist = nullptr;

  double rate_at(double processed) const {
    if (exponential) return nonce_rate({lr0, decay}, processed);
    return linear_rate(lr0, processed, budget);
  }

  bool row_allowed(std::size_t r) const {
    return !restrict_rows || row_trainable[r];
  }
  bool bucket_allowed(std::size_t b) const {
    return bucket_trainable.empty() || bucket_trainable[b];
  }
};

void fill_keep_probs(Session& s) {
  const auto& counts = s.model.counts;
  std::int64_t total = 0;
  for (std::int64_t c : counts) total += c;
  s.keep_prob.assign(counts.size(), 1.0);
  if (s.subsample_t <= 0 || total == 0) return;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] <= 0) continue;  // fresh rows are never discarded
    double f = static_cast<double>(counts[i]) / static_cast<double>(total);
    s.keep_prob[i] =
        subsample_weight(f, s.subsample_t, SubsampleMode::kKeepProb);
  }
}

void cache_buckets(Session& s) {
  const SgnsModel& m = s.model;
  s.buckets_of_row.resize(m.words.size());
  for (std::size_t r = 0; r < m.words.size(); ++r) {
    for (const std::string& gram :
         char_ngrams(m.words[r], m.ngram_min, m.ngram_max)) {
      s.buckets_of_row[r].push_back(ngram_bucket(gram, m.ngram_buckets));
    }
  }
}

// Rejects excluded rows and the positive row; gives up on a pathological
// draw after a bounded number of attempts (the slot is then skipped, which
// matches the usual trainer behaviour instead of spinning).
std::optional<std::size_t> draw_negative(const Session& s, Rng& rng,
                                         std::size_t positive_row) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    std::size_t r = s.dist->sample(rng);
    if (r == positive_row) continue;
    if (!s.excluded_negative.empty() && s.excluded_negative[r]) continue;
    return r;
  }
  return std::nullopt;
}

void train_pair(Session& s, std::size_t input_row, std::size_t output_row,
                double lr, Rng& rng) {
  SgnsModel& m = s.model;

  std::vector<std::size_t> negative_rows;
  negative_rows.reserve(s.negatives);
  for (int k = 0; k < s.negatives; ++k) {
    if (auto r = draw_negative(s, rng, output_row)) negative_rows.push_back(*r);
  }

  if (lr == 0.0) return;

  std::vector<double> composed;
  std::span<const double> center;
  if (s.use_ngrams) {
    auto word_vec = m.input_row(input_row);
    composed.assign(word_vec.begin(), word_vec.end());
    for (std::size_t b : s.buckets_of_row[input_row]) {
      auto row = m.ngram_row(b);
      for (std::size_t i = 0; i < m.dim; ++i) composed[i] += row[i];
    }
    center = composed;
  } else {
    center = m.input_row(input_row);
  }

  std::vector<std::span<const double>> negative_spans;
  negative_spans.reserve(negative_rows.size());
  for (std::size_t r : negative_rows) negative_spans.push_back(m.output_row(r));

  SgnsPairGradients g =
      sgns_pair_gradients(center, m.output_row(output_row), negative_spans);

  auto apply = [lr](std::span<double> row, const std::vector<double>& grad) {
    for (std::size_t i = 0; i < row.size(); ++i) row[i] -= lr * grad[i];
  };

  if (s.row_allowed(output_row)) apply(m.output_row(output_row), g.positive);
  for (std::size_t k = 0; k < negative_rows.size(); ++k) {
    if (s.row_allowed(negative_rows[k])) {
      apply(m.output_row(negative_rows[k]), g.negatives[k]);
    }
  }
  if (s.row_allowed(input_row)) apply(m.input_row(input_row), g.center);
  if (s.use_ngrams) {
    for (std::size_t b : s.buckets_of_row[input_row]) {
      if (s.bucket_allowed(b)) apply(m.ngram_row(b), g.center);
    }
  }
}

// One pass over a sentence already mapped to model rows. `processed` counts
// scanned tokens (pre-subsampling) and drives the learning-rate schedule.
void train_sentence(Session& s, const std::vector<std::size_t>& rows, Rng& rng,
                    double processed_before) {
  std::vector<std::size_t> kept;
  std::vector<double> kept_processed;
  kept.reserve(rows.size());
  double processed = processed_before;
  for (std::size_t r : rows) {
    processed += 1.0;
    double keep = s.keep_prob[r];
    if (keep >= 1.0 || rng.uniform01() < keep) {
      kept.push_back(r);
      kept_processed.push_back(processed);
    }
  }
  for (std::size_t pos = 0; pos < kept.size(); ++pos) {
    double lr = s.rate_at(kept_processed[pos]);
    std::size_t reach = 1 + static_cast<std::size_t>(
                                rng.below(static_cast<std::uint64_t>(s.window)));
    std::size_t lo = pos >= reach ? pos - reach : 0;
    std::size_t hi = std::min(kept.size() - 1, pos + reach);
    for (std::size_t j = lo; j <= hi; ++j) {
      if (j == pos) continue;
      train_pair(s, kept[j], kept[pos], lr, rng);
    }
  }
}

void resolve_mode(Session& s, const TrainParams& params) {
  s.mode = params.mode;
  if (params.mode == TrainMode::kNonce2Vec) {
    const NonceSchedule& n = params.nonce;
    if (!(n.token_decay > 0.0) || n.token_decay > 1.0) {
      throw Error("nonce decay factor must be in (0, 1]");
    }
    if (!(n.initial_rate > 0.0)) throw Error("nonce rate must be positive");
    s.window = n.window;
    s.negatives = n.negatives;
    s.exponential = true;
    s.lr0 = n.initial_rate;
    s.decay = n.token_decay;
  } else {
    s.window = params.window;
    s.negatives = params.negatives;
    s.exponential = false;
    s.lr0 = params.learning_rate;
  }
  if (s.window < 1) throw Error("window size must be >= 1");
  if (s.negatives < 0) throw Error("negative count must be >= 0");
  if (s.lr0 < 0) throw Error("learning rate must be >= 0");
  s.subsample_t = params.subsample_t;
  s.use_ngrams = params.mode == TrainMode::kFastText ||
                 params.mode == TrainMode::kFastTextSelective;
}

int session_epochs(const TrainParams& params) {
  return params.mode == TrainMode::kNonce2Vec ? params.nonce.epochs
                                              : params.epochs;
}

}  // namespace

SgnsModel train_background(const SentenceStream& corpus,
                           const TrainParams& params) {
  if (params.dim < 1) throw Error("dimension must be >= 1");

  FrequencyTable freqs = count_frequencies(corpus);
  std::vector<std::pair<std::string, std::int64_t>> vocab;
  for (const std::string& word : freqs.sorted_words()) {
    std::int64_t c = freqs.count(word);
    if (c >= params.min_count) vocab.emplace_back(word, c);
  }
  if (vocab.empty()) {
    throw Error("no word reaches min_count " + std::to_string(params.min_count));
  }
  std::stable_sort(vocab.begin(), vocab.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  SgnsModel model;
  model.dim = params.dim;
  Rng init_rng(derive_seed(params.seed, kInitStream));
  for (const auto& [word, count] : vocab) {
    model.add_word(word, count, init_rng);
  }
  bool use_ngrams = params.mode == TrainMode::kFastText ||
                    params.mode == TrainMode::kFastTextSelective;
  if (use_ngrams) {
    if (params.ngram_buckets == 0) throw Error("ngram_buckets must be positive");
    model.ngram_buckets = params.ngram_buckets;
    model.ngram_min = params.ngram_min;
    model.ngram_max = params.ngram_max;
    model.ngram.resize(model.ngram_buckets * model.dim);
    double bound = 0.5 / static_cast<double>(model.dim);
    for (double& x : model.ngram) x = init_rng.uniform(-bound, bound);
  }
  if (params.epochs <= 0) return model;

  Session s{model};
  resolve_mode(s, params);
  if (s.mode == TrainMode::kNonce2Vec) {
    throw Error("nonce schedule applies to few-shot updates, not background training");
  }
  if (s.restrict_rows = (s.mode == TrainMode::kSelective ||
                         s.mode == TrainMode::kFastTextSelective);
      s.restrict_rows) {
    if (params.trainable_words.empty()) {
      throw Error("selective training requires trainable_words");
    }
    s.row_trainable.assign(model.words.size(), 0);
    for (const std::string& w : params.trainable_words) {
      if (auto r = model.row(w)) s.row_trainable[*r] = 1;
    }
  }
  if (!params.excluded_negatives.empty()) {
    s.excluded_negative.assign(model.words.size(), 0);
    for (const std::string& w : params.excluded_negatives) {
      if (auto r = model.row(w)) s.excluded_negative[*r] = 1;
    }
  }
  fill_keep_probs(s);
  if (s.use_ngrams) {
    cache_buckets(s);
    if (s.restrict_rows) {
      s.bucket_trainable.assign(model.ngram_buckets, 0);
      for (std::size_t r = 0; r < model.words.size(); ++r) {
        if (!s.row_trainable[r]) continue;
        for (std::size_t b : s.buckets_of_row[r]) s.bucket_trainable[b] = 1;
      }
    }
  }

  NegativeDistribution dist(model.words, model.counts);
  s.dist = &dist;

  // Sentences mapped to vocabulary rows, unknown tokens dropped.
  std::vector<std::vector<std::size_t>> mapped;
  mapped.reserve(corpus.size());
  double total_tokens = 0;
  for (const Sentence& sentence : corpus) {
    std::vector<std::size_t> rows;
    rows.reserve(sentence.size());
    for (const std::string& token : sentence) {
      if (auto r = model.row(token)) rows.push_back(*r);
    }
    total_tokens += static_cast<double>(rows.size());
    if (!rows.empty()) mapped.push_back(std::move(rows));
  }
  s.budget = total_tokens * params.epochs;

  if (params.threads <= 1) {
    Rng rng(derive_seed(params.seed, kTrainStream));
    double processed = 0;
    for (int epoch = 0; epoch < params.epochs; ++epoch) {
      for (const auto& rows : mapped) {
        train_sentence(s, rows, rng, processed);
        processed += static_cast<double>(rows.size());
      }
    }
  } else {
    // Lock-free parallel mode: workers update rows without synchronisation.
    std::atomic<long long> shared_processed{0};
    auto worker = [&](int tid) {
      Rng rng(derive_seed(params.seed, kTrainStream + 1 + tid));
      for (int epoch = 0; epoch < params.epochs; ++epoch) {
        for (std::size_t i = tid; i < mapped.size();
             i += static_cast<std::size_t>(params.threads)) {
          long long before = shared_processed.fetch_add(
              static_cast<long long>(mapped[i].size()),
              std::memory_order_relaxed);
          train_sentence(s, mapped[i], rng, static_cast<double>(before));
        }
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < params.threads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }
  return model;
}

std::vector<double> fewshot_update(SgnsModel& model, const Episode& episode,
                                   const TrainParams& params) {
  validate_episode(episode);
  if (model.dim == 0) throw Error("model is empty");

  bool use_ngrams = params.mode == TrainMode::kFastText ||
                    params.mode == TrainMode::kFastTextSelective;
  if (use_ngrams && !model.has_ngrams()) {
    throw Error("subword modes require a model with an n-gram table");
  }

  // The target trains under the marker token's fresh row; any existing
  // vector for the surface form stays untouched for ranking.
  Rng init_rng(derive_seed(params.seed, kInitStream));
  std::size_t target_row;
  if (auto r = model.row(kTargetMarker)) {
    target_row = *r;
    double bound = 0.5 / static_cast<double>(model.dim);
    auto row = model.input_row(target_row);
    for (double& x : row) x = init_rng.uniform(-bound, bound);
    std::fill(model.output_row(target_row).begin(),
              model.output_row(target_row).end(), 0.0);
    model.counts[target_row] = 0;
  } else {
    target_row = model.add_word(kTargetMarker, 0, init_rng);
  }

  Session s{model};
  resolve_mode(s, params);
  s.restrict_rows = params.mode == TrainMode::kSelective ||
                    params.mode == TrainMode::kFastTextSelective ||
                    params.mode == TrainMode::kNonce2Vec;
  if (s.restrict_rows) {
    s.row_trainable.assign(model.words.size(), 0);
    s.row_trainable[target_row] = 1;
    for (const std::string& w : params.trainable_words) {
      if (auto r = model.row(w)) s.row_trainable[*r] = 1;
    }
  }
  if (!params.excluded_negatives.empty()) {
    s.excluded_negative.assign(model.words.size(), 0);
    for (const std::string& w : params.excluded_negatives) {
      if (auto r = model.row(w)) s.excluded_negative[*r] = 1;
    }
  }
  fill_keep_probs(s);
  if (s.use_ngrams) {
    cache_buckets(s);
    // The marker row composes with the target form's n-grams.
    s.buckets_of_row[target_row].clear();
    for (const std::string& gram :
         char_ngrams(episode.target, model.ngram_min, model.ngram_max)) {
      s.buckets_of_row[target_row].push_back(
          ngram_bucket(gram, model.ngram_buckets));
    }
    if (s.restrict_rows) {
      s.bucket_trainable.assign(model.ngram_buckets, 0);
      for (std::size_t r = 0; r < model.words.size(); ++r) {
        if (!s.row_trainable[r]) continue;
        for (std::size_t b : s.buckets_of_row[r]) s.bucket_trainable[b] = 1;
      }
    }
  }

  NegativeDistribution dist(model.words, model.counts);
  s.dist = &dist;

  std::vector<std::vector<std::size_t>> mapped;
  double total_tokens = 0;
  for (const Sentence& sentence : episode.sentences) {
    std::vector<std::size_t> rows;
    for (const std::string& token : sentence) {
      if (auto r = model.row(token)) rows.push_back(*r);
    }
    total_tokens += static_cast<double>(rows.size());
    if (!rows.empty()) mapped.push_back(std::move(rows));
  }
  int epochs = session_epochs(params);
  s.budget = total_tokens * std::max(epochs, 1);

  Rng rng(derive_seed(params.seed, kTrainStream));
  double processed = 0;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    for (const auto& rows : mapped) {
      train_sentence(s, rows, rng, processed);
      processed += static_cast<double>(rows.size());
    }
  }

  if (use_ngrams) {
    std::vector<double> v(model.input_row(target_row).begin(),
                          model.input_row(target_row).end());
    for (const std::string& gram :
         char_ngrams(episode.target, model.ngram_min, model.ngram_max)) {
      auto row = model.ngram_row(ngram_bucket(gram, model.ngram_buckets));
      for (std::size_t i = 0; i < model.dim; ++i) v[i] += row[i];
    }
    return v;
  }
  return {model.input_row(target_row).begin(),
          model.input_row(target_row).end()};
}

void save_sgns_model(const SgnsModel& model, const std::string& vectors_path,
                     const std::string& counts_path,
                     const std::string& output_path,
                     const std::string& ngram_path) {
  LabelledMatrix in;
  in.cols = model.dim;
  in.labels = model.words;
  in.values = model.input;
  save_labelled_matrix(in, vectors_path);

  std::ofstream counts(counts_path, std::ios::binary);
  if (!counts) throw Error("cannot write " + counts_path);
  for (std::size_t r = 0; r < model.words.size(); ++r) {
    counts << model.words[r] << '\t' << model.counts[r] << '\n';
  }

  LabelledMatrix out;
  out.cols = model.dim;
  out.labels = model.words;
  out.values = model.output;
  save_labelled_matrix(out, output_path);

  if (!ngram_path.empty()) {
    if (!model.has_ngrams()) throw Error("model has no n-gram table to save");
    LabelledMatrix ng;
    ng.cols = model.dim;
    for (std::size_t b = 0; b < model.ngram_buckets; ++b) {
      ng.labels.push_back(std::to_string(b));
    }
    ng.values = model.ngram;
    save_labelled_matrix(ng, ngram_path);
  }
}

SgnsModel make_sgns_model(const EmbeddingSpace& space,
                          const LabelledMatrix* output_vectors,
                          const LabelledMatrix* ngram_vectors, int ngram_min,
                          int ngram_max) {
  SgnsModel model;
  model.dim = space.dim();
  model.words = space.words();
  model.counts.reserve(space.size());
  model.input.reserve(space.size() * space.dim());
  for (std::size_t r = 0; r < space.size(); ++r) {
    model.index.emplace(model.words[r], r);
    model.counts.push_back(space.count(r));
    auto v = space.vector(r);
    model.input.insert(model.input.end(), v.begin(), v.end());
  }
  model.output.assign(space.size() * space.dim(), 0.0);
  if (output_vectors) {
    if (output_vectors->cols != model.dim) {
      throw Error("output vectors have dimension " +
                  std::to_string(output_vectors->cols) + ", expected " +
                  std::to_string(model.dim));
    }
    std::unordered_map<std::string, std::size_t> by_label;
    for (std::size_t r = 0; r < output_vectors->rows(); ++r) {
      by_label.emplace(output_vectors->labels[r], r);
    }
    for (std::size_t r = 0; r < model.words.size(); ++r) {
      auto it = by_label.find(model.words[r]);
      if (it == by_label.end()) {
        throw Error("output vectors missing row for '" + model.words[r] + "'");
      }
      auto src = output_vectors->row(it->second);
      std::copy(src.begin(), src.end(), model.output.begin() + r * model.dim);
    }
  }
  if (ngram_vectors) {
    if (ngram_vectors->cols != model.dim) {
      throw Error("n-gram vectors have dimension " +
                  std::to_string(ngram_vectors->cols) + ", expected " +
                  std::to_string(model.dim));
    }
    model.ngram_buckets = ngram_vectors->rows();
    model.ngram_min = ngram_min;
    model.ngram_max = ngram_max;
    model.ngram.assign(model.ngram_buckets * model.dim, 0.0);
    for (std::size_t r = 0; r < ngram_vectors->rows(); ++r) {
      std::size_t bucket = 0;
      const std::string& label = ngram_vectors->labels[r];
      auto [ptr, ec] =
          std::from_chars(label.data(), label.data() + label.size(), bucket);
      if (ec != std::errc() || ptr != label.data() + label.size() ||
          bucket >= model.ngram_buckets) {
        throw Error("bad bucket label '" + label + "' in n-gram vectors");
      }
      auto src = ngram_vectors->row(r);
      std::copy(src.begin(), src.end(),
                model.ngram.begin() + bucket * model.dim);
    }
  }
  return model;
}

SgnsModel load_sgns_model(const std::string& vectors_path,
                          const std::string& counts_path,
                          const std::string& output_path,
                          const std::string& ngram_path) {
  EmbeddingSpace space = load_space(vectors_path, counts_path);
  LabelledMatrix output = load_labelled_matrix(output_path);
  if (ngram_path.empty()) {
    return make_sgns_model(space, &output, nullptr);
  }
  LabelledMatrix ngrams = load_labelled_matrix(ngram_path);
  return make_sgns_model(space, &output, &ngrams);
}

}  // namespace fewvec
