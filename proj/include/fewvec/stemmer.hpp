#pragma once

#include <map>
#include <string>
#include <vector>

namespace fewvec {

// Snowball English (Porter2) stem of a lowercase token.
std::string snowball_stem(const std::string& word);

// Stem -> words sharing that stem. Within a group words are unique and
// sorted, so iteration is deterministic.
struct StemIndex {
  std::map<std::string, std::vector<std::string>> groups;

  const std::vector<std::string>* group(const std::string& stem) const {
    auto it = groups.find(stem);
    return it == groups.end() ? nullptr : &it->second;
  }
};

StemIndex build_stem_index(const std::vector<std::string>& vocab);

}  // namespace fewvec
