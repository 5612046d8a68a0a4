#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fewvec/eval.hpp"
#include "fewvec/fewshot.hpp"
#include "fewvec/sgns.hpp"

namespace fewvec {

// Immutable bundle of everything a method may need at inference time.
// Shared pointers keep the returned Method self-contained and safe to call
// from several evaluation workers.
struct MethodContext {
  std::shared_ptr<const EmbeddingSpace> space;
  std::shared_ptr<const StopwordSet> stopwords;
  AdditiveOptions additive;
  std::shared_ptr<const std::vector<double>> negative_vector;
  std::shared_ptr<const ContextTransform> transform;  // alc, alc-neural
  std::shared_ptr<const FormModel> form;              // form
  std::shared_ptr<const FcmModel> fcm;                // fcm, fcm-neural
  std::shared_ptr<const StemIndex> stems;             // stem
  std::shared_ptr<const WordSet> stem_excluded;
  std::shared_ptr<const SgnsModel> sgns;              // training methods
  TrainParams train;
  std::uint64_t seed = 1;
};

const std::vector<std::string>& method_ids();

bool is_known_method(const std::string& id);
// Methods that ignore the context sentences entirely.
bool method_is_form_only(const std::string& id);
bool method_needs_sgns(const std::string& id);
bool method_needs_subwords(const std::string& id);

// Builds the inference callable for a method id, validating that the
// context carries what the method needs.
Method make_method(const std::string& id, const MethodContext& context);

}  // namespace fewvec
