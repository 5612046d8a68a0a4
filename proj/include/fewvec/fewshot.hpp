#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fewvec/corpus.hpp"
#include "fewvec/embedding_space.hpp"
#include "fewvec/nn.hpp"
#include "fewvec/stemmer.hpp"
#include "fewvec/stopwords.hpp"

namespace fewvec {

// Options for the additive model family. Disabled options contribute a
// factor of 1 to every context weight.
struct AdditiveOptions {
  bool drop_stopwords = true;
  std::optional<int> window;            // 10 is the tuned value when enabled
  std::optional<double> subsample_t;    // 1e-5 when enabled
  std::optional<double> negative_rate;  // k; 2 when enabled
  SubsampleMode subsample_mode = SubsampleMode::kDiscardProb;
};

// max((n - m + 1) / n, 0): the probability that a word m tokens away falls
// inside a window size drawn uniformly from [1, n], used as a weight.
double window_weight(int window, int distance);

// Probability-weighted sum of all vocabulary vectors under the negative
// distribution: the vector a negative sample contributes in expectation.
std::vector<double> expected_negative_vector(const EmbeddingSpace& space,
                                             const NegativeDistribution& dist);

// Weighted sum of context vectors over all episode sentences:
//   sum over tokens of weight(token) * (v_token - k * negative_vector)
// with weight = window * subsample factors, distances measured in original
// token positions. Stopwords and out-of-vocabulary tokens contribute
// nothing but keep their positions. Throws InferenceError when no token
// contributes.
std::vector<double> additive_infer(
    const Episode& episode, const EmbeddingSpace& space,
    const AdditiveOptions& options, const StopwordSet& stopwords,
    const std::vector<double>* negative_vector = nullptr);

struct LinearMap {
  std::size_t dim = 0;
  std::vector<double> matrix;  // row-major dim x dim

  std::vector<double> apply(std::span<const double> x) const;
};

// Either transformation backing the regression-based context path.
using ContextTransform = std::variant<LinearMap, Mlp>;

std::vector<double> apply_transform(const ContextTransform& transform,
                                    std::span<const double> x);
std::size_t transform_dim(const ContextTransform& transform);

struct TrainingPair {
  std::string word;
  std::vector<double> context_sum;
  std::vector<double> gold;
};
using TrainingPairSet = std::vector<TrainingPair>;

// One pair per vocabulary word with count >= min_count: the weighted
// context sum over all of the word's corpus occurrences against its gold
// vector. Words whose occurrences yield no contribution are skipped.
TrainingPairSet build_training_pairs(
    const SentenceStream& corpus, const EmbeddingSpace& space,
    const AdditiveOptions& options, const StopwordSet& stopwords,
    std::int64_t min_count = 50,
    const std::vector<double>* negative_vector = nullptr);

// Ridge regression A = argmin sum |A x_w - v_w|^2 + ridge |A|_F^2 via the
// normal equations; deterministic. With ridge == 0 a singular system is
// reported as an error telling the caller to raise the ridge.
LinearMap fit_alc_linear(const TrainingPairSet& pairs, double ridge);

// Context inference: the additive sum pushed through a fitted transform.
std::vector<double> alc_infer(const Episode& episode,
                              const EmbeddingSpace& space,
                              const AdditiveOptions& options,
                              const StopwordSet& stopwords,
                              const ContextTransform& transform,
                              const std::vector<double>* negative_vector = nullptr);

// Exact character n-gram table fitted so the mean of a word's n-gram
// vectors approximates its embedding.
struct FormModel {
  std::size_t dim = 0;
  int ngram_min = 3;
  int ngram_max = 5;
  std::vector<std::string> ngrams;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<double> vectors;  // |ngrams| x dim

  std::span<const double> vector(std::size_t r) const {
    return {vectors.data() + r * dim, dim};
  }
};

struct FormTrainOptions {
  int epochs = 200;
  std::size_t batch_size = 64;
  std::uint64_t seed = 1;
  AdamParams adam{0.05, 0.9, 0.999, 1e-8};
  std::int64_t min_count = 50;
  int ngram_min = 3;
  int ngram_max = 5;
};

FormModel fit_form_model(const EmbeddingSpace& space,
                         const FormTrainOptions& options);

// Mean of the vectors of the word's known n-grams; unknown n-grams are
// skipped. Throws InferenceError when no n-gram is known.
std::vector<double> form_infer(const FormModel& form, const std::string& word);

enum class GateMode { kFixed, kGated };

// Combination v = alpha * context + (1 - alpha) * form, with alpha either a
// learned constant or a logistic gate over the concatenated [form; context]
// vectors.
struct FcmModel {
  FormModel form;
  ContextTransform context;
  GateMode gate_mode = GateMode::kFixed;
  double fixed_alpha = 0.5;
  std::vector<double> gate_weights;  // 2 * dim, [form; context] order
  double gate_bias = 0.0;

  double alpha_for(std::span<const double> form_vec,
                   std::span<const double> context_vec) const;
};

struct GateTrainOptions {
  int epochs = 2000;
  std::uint64_t seed = 1;
  AdamParams adam{0.05, 0.9, 0.999, 1e-8};
};

// Two-stage fit: the form table and context transform stay frozen; only
// the gate parameters are optimised against the gold vectors.
FcmModel fit_fcm(const TrainingPairSet& pairs, FormModel form,
                 ContextTransform context, GateMode gate_mode,
                 const GateTrainOptions& options);

// Degenerate form path forces alpha = 1 (context only); degenerate context
// path forces alpha = 0 (form only); both degenerate is an InferenceError.
std::vector<double> fcm_infer(const FcmModel& model, const Episode& episode,
                              const EmbeddingSpace& space,
                              const AdditiveOptions& options,
                              const StopwordSet& stopwords,
                              const std::vector<double>* negative_vector = nullptr);

// Mean of the vectors of all non-excluded vocabulary words sharing the
// word's Porter2 stem. Throws InferenceError when no such word exists.
std::vector<double> stem_infer(const std::string& word,
                               const EmbeddingSpace& space,
                               const StemIndex& stem_index,
                               const WordSet& excluded = {});

// Persistence for fitted transforms (see README for the section layout).
void save_linear_map(const LinearMap& map, const std::string& path);
LinearMap load_linear_map(const std::string& path);
void save_mlp(const Mlp& mlp, const std::string& path);
Mlp load_mlp(const std::string& path);
void save_form_model(const FormModel& form, const std::string& path);
FormModel load_form_model(const std::string& path);
void save_fcm(const FcmModel& model, const std::string& path);
FcmModel load_fcm(const std::string& path);

// Context transform stored at `path`, whichever kind it is.
ContextTransform load_context_transform(const std::string& path);

}  // namespace fewvec
