#include "fewvec/methods.hpp"

#include <algorithm>

#include "fewvec/rng.hpp"

namespace fewvec {

namespace {

std::uint64_t fnv64(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Per-episode training seed: stable across runs and thread counts.
std::uint64_t episode_seed(std::uint64_t base, const Episode& episode) {
  return derive_seed(base, fnv64(episode.target) + episode.sentences.size());
}

TrainMode mode_for(const std::string& id) {
  if (id == "w2v") return TrainMode::kStandard;
  if (id == "w2v-selective") return TrainMode::kSelective;
  if (id == "nonce2vec") return TrainMode::kNonce2Vec;
  if (id == "fasttext") return TrainMode::kFastText;
  return TrainMode::kFastTextSelective;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(what);
}

}  // namespace

const std::vector<std::string>& method_ids() {
  static const std::vector<std::string> ids = {
      "additive",  "alc",       "alc-neural", "form",
      "fcm",       "fcm-neural", "stem",      "w2v",
      "w2v-selective", "nonce2vec", "fasttext", "fasttext-selective",
      "oracle",
  };
  return ids;
}

bool is_known_method(const std::string& id) {
  const auto& ids = method_ids();
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

bool method_is_form_only(const std::string& id) {
  return id == "form" || id == "stem";
}

bool method_needs_sgns(const std::string& id) {
  return id == "w2v" || id == "w2v-selective" || id == "nonce2vec" ||
         id == "fasttext" || id == "fasttext-selective";
}

bool method_needs_subwords(const std::string& id) {
  return id == "fasttext" || id == "fasttext-selective";
}

Method make_method(const std::string& id, const MethodContext& context) {
  require(is_known_method(id), "unknown method '" + id + "'");
  require(context.space != nullptr, "method context lacks the embedding space");
  auto space = context.space;

  double k = context.additive.negative_rate.value_or(0.0);
  if ((id == "additive" || id == "alc" || id == "alc-neural" || id == "fcm" ||
       id == "fcm-neural") &&
      k != 0.0) {
    require(context.negative_vector != nullptr,
            "negative correction is enabled but no expected negative vector "
            "was provided");
  }

  if (id == "oracle") {
    return [space](const Episode& episode) {
      auto row = space->row(episode.target);
      if (!row) {
        throw InferenceError("oracle: '" + episode.target +
                             "' has no gold vector");
      }
      auto v = space->vector(*row);
      return std::vector<double>(v.begin(), v.end());
    };
  }

  if (id == "additive") {
    require(context.stopwords != nullptr, "additive method needs stopwords");
    auto stops = context.stopwords;
    auto neg = context.negative_vector;
    AdditiveOptions opts = context.additive;
    return [space, stops, neg, opts](const Episode& episode) {
      return additive_infer(episode, *space, opts, *stops, neg.get());
    };
  }

  if (id == "alc" || id == "alc-neural") {
    require(context.stopwords != nullptr, "alc method needs stopwords");
    require(context.transform != nullptr,
            "method '" + id + "' needs a fitted context transform");
    bool wants_linear = id == "alc";
    bool is_linear = std::holds_alternative<LinearMap>(*context.transform);
    require(wants_linear == is_linear,
            "method '" + id + "' does not match the loaded transform kind");
    require(transform_dim(*context.transform) == space->dim(),
            "context transform dimension does not match the space");
    auto stops = context.stopwords;
    auto neg = context.negative_vector;
    auto transform = context.transform;
    AdditiveOptions opts = context.additive;
    return [space, stops, neg, transform, opts](const Episode& episode) {
      return alc_infer(episode, *space, opts, *stops, *transform, neg.get());
    };
  }

  if (id == "form") {
    require(context.form != nullptr, "form method needs a fitted form model");
    require(context.form->dim == space->dim(),
            "form model dimension does not match the space");
    auto form = context.form;
    return [form](const Episode& episode) {
      return form_infer(*form, episode.target);
    };
  }

  if (id == "fcm" || id == "fcm-neural") {
    require(context.stopwords != nullptr, "fcm method needs stopwords");
    require(context.fcm != nullptr, "method '" + id + "' needs a fitted model");
    bool wants_linear = id == "fcm";
    bool is_linear = std::holds_alternative<LinearMap>(context.fcm->context);
    require(wants_linear == is_linear,
            "method '" + id + "' does not match the loaded context kind");
    require(context.fcm->form.dim == space->dim(),
            "fcm model dimension does not match the space");
    auto stops = context.stopwords;
    auto neg = context.negative_vector;
    auto fcm = context.fcm;
    AdditiveOptions opts = context.additive;
    return [space, stops, neg, fcm, opts](const Episode& episode) {
      return fcm_infer(*fcm, episode, *space, opts, *stops, neg.get());
    };
  }

  if (id == "stem") {
    require(context.stems != nullptr, "stem method needs a stem index");
    auto stems = context.stems;
    auto excluded = context.stem_excluded;
    return [space, stems, excluded](const Episode& episode) {
      static const WordSet kNone;
      return stem_infer(episode.target, *space, *stems,
                        excluded ? *excluded : kNone);
    };
  }

  // Continued-training methods: each episode trains on a private copy of
  // the base model, so items stay independent and calls are thread-safe.
  require(context.sgns != nullptr,
          "method '" + id + "' needs a background training model");
  if (method_needs_subwords(id)) {
    require(context.sgns->has_ngrams(),
            "method '" + id + "' needs a model with an n-gram table");
  }
  require(context.sgns->dim == space->dim(),
          "training model dimension does not match the space");
  auto base = context.sgns;
  TrainParams params = context.train;
  params.mode = mode_for(id);
  std::uint64_t seed = context.seed;
  return [base, params, seed](const Episode& episode) {
    SgnsModel session = *base;
    TrainParams p = params;
    p.seed = episode_seed(seed, episode);
    return fewshot_update(session, episode, p);
  };
}

}  // namespace fewvec
