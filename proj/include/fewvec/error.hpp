#pragma once

#include <stdexcept>
#include <string>

namespace fewvec {

// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A method could not produce a usable vector for an episode: zero-norm
// query, no known n-grams, no same-stem word, every context token dropped.
// Evaluation protocols catch this and score the item as an abstention.
class InferenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace fewvec
