#pragma once

#include <string>

#include "fewvec/embedding_space.hpp"

namespace fewvec {

// English stopword list used by the additive model family. The built-in
// list is the common 179-word list; a file (one word per line) can replace
// it.
class StopwordSet {
 public:
  static StopwordSet builtin_english();
  static StopwordSet from_file(const std::string& path);
  static StopwordSet empty() { return StopwordSet({}); }

  bool contains(const std::string& word) const { return words_.count(word) > 0; }
  std::size_t size() const { return words_.size(); }

 private:
  explicit StopwordSet(WordSet words) : words_(std::move(words)) {}
  WordSet words_;
};

}  // namespace fewvec
