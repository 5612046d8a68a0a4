#include "fewvec/fewshot.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "fewvec/rng.hpp"
#include "fewvec/sgns.hpp"

namespace fewvec {

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Adds the weighted context of one target occurrence into `acc`; returns
// the number of contributing tokens.
int accumulate_context(const Sentence& sentence, std::size_t target_pos,
                       const EmbeddingSpace& space,
                       const AdditiveOptions& options,
                       const StopwordSet& stopwords, double k,
                       const std::vector<double>* negative_vector,
                       std::vector<double>& acc) {
  const std::size_t dim = space.dim();
  const double total = static_cast<double>(space.total_count());
  int contributions = 0;
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    if (i == target_pos) continue;
    const std::string& token = sentence[i];
    if (options.drop_stopwords && stopwords.contains(token)) continue;
    auto row = space.row(token);
    if (!row) continue;

    double weight = 1.0;
    if (options.window) {
      std::size_t m = i > target_pos ? i - target_pos : target_pos - i;
      weight *= window_weight(*options.window, static_cast<int>(m));
    }
    if (options.subsample_t) {
      std::int64_t c = space.count(*row);
      double sub;
      if (c <= 0) {
        // continuous extension at f -> 0
        sub = options.subsample_mode == SubsampleMode::kDiscardProb ? 0.0 : 1.0;
      } else {
        sub = subsample_weight(static_cast<double>(c) / total,
                               *options.subsample_t, options.subsample_mode);
      }
      weight *= sub;
    }
    if (weight == 0.0) continue;

    ++contributions;
    auto v = space.vector(*row);
    if (k != 0.0) {
      const double* neg = negative_vector->data();
      for (std::size_t d = 0; d < dim; ++d) {
        acc[d] += weight * (v[d] - k * neg[d]);
      }
    } else {
      for (std::size_t d = 0; d < dim; ++d) acc[d] += weight * v[d];
    }
  }
  return contributions;
}

void check_negative_setup(const AdditiveOptions& options,
                          const std::vector<double>* negative_vector,
                          std::size_t dim, double k) {
  if (k < 0) throw Error("negative rate must be >= 0");
  if (k != 0.0) {
    if (!negative_vector) {
      throw Error("negative correction needs the expected negative vector");
    }
    if (negative_vector->size() != dim) {
      throw Error("expected negative vector has wrong dimension");
    }
  }
  (void)options;
}

}  // namespace

double window_weight(int window, int distance) {
  if (window < 1) throw Error("window size must be >= 1");
  if (distance < 1) throw Error("token distance must be >= 1");
  double w = static_cast<double>(window - distance + 1) /
             static_cast<double>(window);
  return std::max(w, 0.0);
}

std::vector<double> expected_negative_vector(const EmbeddingSpace& space,
                                             const NegativeDistribution& dist) {
  std::vector<double> v(space.dim(), 0.0);
  const auto& probs = dist.probabilities();
  for (std::size_t i = 0; i < dist.words().size(); ++i) {
    if (probs[i] == 0.0) continue;
    auto row = space.vector(dist.words()[i]);  // throws if absent
    for (std::size_t d = 0; d < space.dim(); ++d) v[d] += probs[i] * row[d];
  }
  return v;
}

std::vector<double> additive_infer(const Episode& episode,
                                   const EmbeddingSpace& space,
                                   const AdditiveOptions& options,
                                   const StopwordSet& stopwords,
                                   const std::vector<double>* negative_vector) {
  validate_episode(episode);
  double k = options.negative_rate.value_or(0.0);
  check_negative_setup(options, negative_vector, space.dim(), k);

  std::vector<double> acc(space.dim(), 0.0);
  int contributions = 0;
  for (std::size_t s = 0; s < episode.sentences.size(); ++s) {
    contributions += accumulate_context(episode.sentences[s],
                                        episode.target_positions[s], space,
                                        options, stopwords, k, negative_vector,
                                        acc);
  }
  if (contributions == 0) {
    throw InferenceError("no context token contributes for '" +
                         episode.target + "'");
  }
  return acc;
}

std::vector<double> LinearMap::apply(std::span<const double> x) const {
  if (x.size() != dim) throw Error("linear map input dimension mismatch");
  std::vector<double> y(dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) {
    const double* row = matrix.data() + i * dim;
    double acc = 0;
    for (std::size_t j = 0; j < dim; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
  return y;
}

std::vector<double> apply_transform(const ContextTransform& transform,
                                    std::span<const double> x) {
  if (const auto* linear = std::get_if<LinearMap>(&transform)) {
    return linear->apply(x);
  }
  return forward(std::get<Mlp>(transform), x);
}

std::size_t transform_dim(const ContextTransform& transform) {
  if (const auto* linear = std::get_if<LinearMap>(&transform)) {
    return linear->dim;
  }
  return std::get<Mlp>(transform).in_dim;
}

TrainingPairSet build_training_pairs(const SentenceStream& corpus,
                                     const EmbeddingSpace& space,
                                     const AdditiveOptions& options,
                                     const StopwordSet& stopwords,
                                     std::int64_t min_count,
                                     const std::vector<double>* negative_vector) {
  double k = options.negative_rate.value_or(0.0);
  check_negative_setup(options, negative_vector, space.dim(), k);

  std::vector<std::vector<double>> acc(space.size());
  std::vector<int> contributions(space.size(), 0);
  std::vector<char> qualifies(space.size(), 0);
  for (std::size_t r = 0; r < space.size(); ++r) {
    qualifies[r] = space.count(r) >= min_count;
  }

  for (const Sentence& sentence : corpus) {
    for (std::size_t pos = 0; pos < sentence.size(); ++pos) {
      auto row = space.row(sentence[pos]);
      if (!row || !qualifies[*row]) continue;
      if (acc[*row].empty()) acc[*row].assign(space.dim(), 0.0);
      contributions[*row] +=
          accumulate_context(sentence, pos, space, options, stopwords, k,
                             negative_vector, acc[*row]);
    }
  }

  TrainingPairSet pairs;
  for (std::size_t r = 0; r < space.size(); ++r) {
    if (contributions[r] == 0) continue;
    TrainingPair pair;
    pair.word = space.word(r);
    pair.context_sum = std::move(acc[r]);
    pair.gold.assign(space.vector(r).begin(), space.vector(r).end());
    pairs.push_back(std::move(pair));
  }
  if (pairs.empty()) {
    throw Error("no vocabulary word qualifies for training pairs");
  }
  return pairs;
}

LinearMap fit_alc_linear(const TrainingPairSet& pairs, double ridge) {
  if (pairs.empty()) throw Error("cannot fit a linear map on zero pairs");
  if (ridge < 0) throw Error("ridge must be >= 0");
  const std::size_t dim = pairs[0].context_sum.size();
  for (const TrainingPair& p : pairs) {
    if (p.context_sum.size() != dim || p.gold.size() != dim) {
      throw Error("training pair dimensions are inconsistent");
    }
  }

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(dim, dim);
  for (const TrainingPair& p : pairs) {
    Eigen::Map<const Eigen::VectorXd> x(p.context_sum.data(), dim);
    Eigen::Map<const Eigen::VectorXd> v(p.gold.data(), dim);
    gram.noalias() += x * x.transpose();
    cross.noalias() += x * v.transpose();
  }
  for (std::size_t i = 0; i < dim; ++i) gram(i, i) += ridge;

  Eigen::MatrixXd a_transposed;
  if (ridge > 0) {
    a_transposed = gram.ldlt().solve(cross);
  } else {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    if (!lu.isInvertible()) {
      throw Error("normal equations are singular; raise the ridge parameter");
    }
    a_transposed = lu.solve(cross);
  }

  LinearMap map;
  map.dim = dim;
  map.matrix.resize(dim * dim);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      map.matrix[i * dim + j] = a_transposed(j, i);
    }
  }
  return map;
}

std::vector<double> alc_infer(const Episode& episode,
                              const EmbeddingSpace& space,
                              const AdditiveOptions& options,
                              const StopwordSet& stopwords,
                              const ContextTransform& transform,
                              const std::vector<double>* negative_vector) {
  std::vector<double> sum =
      additive_infer(episode, space, options, stopwords, negative_vector);
  return apply_transform(transform, sum);
}

FormModel fit_form_model(const EmbeddingSpace& space,
                         const FormTrainOptions& options) {
  FormModel form;
  form.dim = space.dim();
  form.ngram_min = options.ngram_min;
  form.ngram_max = options.ngram_max;

  std::vector<std::size_t> train_rows;
  for (std::size_t r = 0; r < space.size(); ++r) {
    if (space.count(r) >= options.min_count) train_rows.push_back(r);
  }
  if (train_rows.empty()) {
    throw Error("no vocabulary word reaches the form-model min count");
  }

  std::vector<std::vector<std::size_t>> grams_of(train_rows.size());
  for (std::size_t i = 0; i < train_rows.size(); ++i) {
    for (const std::string& gram : char_ngrams(space.word(train_rows[i]),
                                               form.ngram_min, form.ngram_max)) {
      auto [it, inserted] = form.index.emplace(gram, form.ngrams.size());
      if (inserted) form.ngrams.push_back(gram);
      grams_of[i].push_back(it->second);
    }
  }

  const std::size_t dim = form.dim;
  form.vectors.resize(form.ngrams.size() * dim);
  Rng init_rng(derive_seed(options.seed, 0xf02d));
  double bound = 0.5 / static_cast<double>(dim);
  for (double& x : form.vectors) x = init_rng.uniform(-bound, bound);
  if (options.epochs <= 0) return form;

  AdamState adam(form.vectors.size(), options.adam);
  std::vector<double> grad(form.vectors.size(), 0.0);
  std::vector<double> pred(dim);
  std::vector<std::size_t> order(train_rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(derive_seed(options.seed, 0x5f02));
  std::size_t batch = std::max<std::size_t>(1, options.batch_size);

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      std::size_t end = std::min(order.size(), start + batch);
      std::fill(grad.begin(), grad.end(), 0.0);
      double inv_batch = 1.0 / static_cast<double>(end - start);
      for (std::size_t b = start; b < end; ++b) {
        std::size_t i = order[b];
        const auto& grams = grams_of[i];
        double inv_grams = 1.0 / static_cast<double>(grams.size());
        std::fill(pred.begin(), pred.end(), 0.0);
        for (std::size_t g : grams) {
          auto v = form.vector(g);
          for (std::size_t d = 0; d < dim; ++d) pred[d] += v[d];
        }
        for (double& p : pred) p *= inv_grams;
        auto gold = space.vector(train_rows[i]);
        for (std::size_t d = 0; d < dim; ++d) {
          pred[d] = 2.0 * (pred[d] - gold[d]) / static_cast<double>(dim) *
                    inv_batch * inv_grams;
        }
        for (std::size_t g : grams) {
          double* grow = grad.data() + g * dim;
          for (std::size_t d = 0; d < dim; ++d) grow[d] += pred[d];
        }
      }
      adam.step(form.vectors, grad);
    }
  }
  return form;
}

std::vector<double> form_infer(const FormModel& form, const std::string& word) {
  std::vector<double> sum(form.dim, 0.0);
  std::size_t known = 0;
  for (const std::string& gram :
       char_ngrams(word, form.ngram_min, form.ngram_max)) {
    auto it = form.index.find(gram);
    if (it == form.index.end()) continue;
    auto v = form.vector(it->second);
    for (std::size_t d = 0; d < form.dim; ++d) sum[d] += v[d];
    ++known;
  }
  if (known == 0) {
    throw InferenceError("'" + word + "' shares no n-grams with the form model");
  }
  double inv = 1.0 / static_cast<double>(known);
  for (double& x : sum) x *= inv;
  return sum;
}

double FcmModel::alpha_for(std::span<const double> form_vec,
                           std::span<const double> context_vec) const {
  if (gate_mode == GateMode::kFixed) return fixed_alpha;
  const std::size_t dim = form_vec.size();
  double s = gate_bias;
  for (std::size_t d = 0; d < dim; ++d) s += gate_weights[d] * form_vec[d];
  for (std::size_t d = 0; d < dim; ++d) {
    s += gate_weights[dim + d] * context_vec[d];
  }
  // keep the gate strictly inside (0, 1) even at saturation
  return std::clamp(logistic(s), 1e-12, 1.0 - 1e-12);
}

FcmModel fit_fcm(const TrainingPairSet& pairs, FormModel form,
                 ContextTransform context, GateMode gate_mode,
                 const GateTrainOptions& options) {
  if (pairs.empty()) throw Error("cannot fit a gate on zero pairs");
  const std::size_t dim = form.dim;

  struct Item {
    std::vector<double> form_vec, context_vec, gold;
  };
  std::vector<Item> items;
  for (const TrainingPair& pair : pairs) {
    Item item;
    try {
      item.form_vec = form_infer(form, pair.word);
    } catch (const InferenceError&) {
      continue;  // nothing to gate against without a form vector
    }
    item.context_vec = apply_transform(context, pair.context_sum);
    item.gold = pair.gold;
    items.push_back(std::move(item));
  }
  if (items.empty()) {
    throw Error("no training pair has a usable form vector");
  }

  FcmModel model;
  model.form = std::move(form);
  model.context = std::move(context);
  model.gate_mode = gate_mode;

  const double inv_items = 1.0 / static_cast<double>(items.size());
  const double inv_dim = 1.0 / static_cast<double>(dim);

  if (gate_mode == GateMode::kFixed) {
    std::vector<double> logit(1, 0.0);
    AdamState adam(1, options.adam);
    std::vector<double> grad(1);
    for (int epoch = 0; epoch < options.epochs; ++epoch) {
      double alpha = logistic(logit[0]);
      double dalpha = 0;
      for (const Item& item : items) {
        for (std::size_t d = 0; d < dim; ++d) {
          double pred = alpha * item.context_vec[d] +
                        (1.0 - alpha) * item.form_vec[d];
          dalpha += 2.0 * (pred - item.gold[d]) *
                    (item.context_vec[d] - item.form_vec[d]);
        }
      }
      grad[0] = dalpha * inv_dim * inv_items * alpha * (1.0 - alpha);
      adam.step(logit, grad);
    }
    model.fixed_alpha = logistic(logit[0]);
    return model;
  }

  std::vector<double> params(2 * dim + 1, 0.0);  // w then bias
  AdamState adam(params.size(), options.adam);
  std::vector<double> grad(params.size());
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (const Item& item : items) {
      double s = params[2 * dim];
      for (std::size_t d = 0; d < dim; ++d) {
        s += params[d] * item.form_vec[d] +
             params[dim + d] * item.context_vec[d];
      }
      double alpha = logistic(s);
      double dalpha = 0;
      for (std::size_t d = 0; d < dim; ++d) {
        double pred =
            alpha * item.context_vec[d] + (1.0 - alpha) * item.form_vec[d];
        dalpha += 2.0 * (pred - item.gold[d]) *
                  (item.context_vec[d] - item.form_vec[d]);
      }
      double ds = dalpha * inv_dim * inv_items * alpha * (1.0 - alpha);
      for (std::size_t d = 0; d < dim; ++d) {
        grad[d] += ds * item.form_vec[d];
        grad[dim + d] += ds * item.context_vec[d];
      }
      grad[2 * dim] += ds;
    }
    adam.step(params, grad);
  }
  model.gate_weights.assign(params.begin(), params.begin() + 2 * dim);
  model.gate_bias = params[2 * dim];
  return model;
}

std::vector<double> fcm_infer(const FcmModel& model, const Episode& episode,
                              const EmbeddingSpace& space,
                              const AdditiveOptions& options,
                              const StopwordSet& stopwords,
                              const std::vector<double>* negative_vector) {
  std::optional<std::vector<double>> form_vec;
  try {
    form_vec = form_infer(model.form, episode.target);
  } catch (const InferenceError&) {
  }
  std::optional<std::vector<double>> context_vec;
  try {
    context_vec = alc_infer(episode, space, options, stopwords, model.context,
                            negative_vector);
  } catch (const InferenceError&) {
  }

  if (!form_vec && !context_vec) {
    throw InferenceError("both form and context paths are degenerate for '" +
                         episode.target + "'");
  }
  if (!form_vec) return *context_vec;   // alpha forced to 1
  if (!context_vec) return *form_vec;   // alpha forced to 0

  double alpha = model.alpha_for(*form_vec, *context_vec);
  if (alpha == 1.0) return *context_vec;
  if (alpha == 0.0) return *form_vec;
  std::vector<double> out(form_vec->size());
  for (std::size_t d = 0; d < out.size(); ++d) {
    out[d] = alpha * (*context_vec)[d] + (1.0 - alpha) * (*form_vec)[d];
  }
  return out;
}

std::vector<double> stem_infer(const std::string& word,
                               const EmbeddingSpace& space,
                               const StemIndex& stem_index,
                               const WordSet& excluded) {
  const std::vector<std::string>* group =
      stem_index.group(snowball_stem(word));
  std::vector<double> sum(space.dim(), 0.0);
  std::size_t used = 0;
  if (group) {
    for (const std::string& candidate : *group) {
      if (excluded.count(candidate)) continue;
      auto row = space.row(candidate);
      if (!row) continue;
      auto v = space.vector(*row);
      for (std::size_t d = 0; d < space.dim(); ++d) sum[d] += v[d];
      ++used;
    }
  }
  if (used == 0) {
    throw InferenceError("no same-stem word available for '" + word + "'");
  }
  double inv = 1.0 / static_cast<double>(used);
  for (double& x : sum) x *= inv;
  return sum;
}

}  // namespace fewvec
