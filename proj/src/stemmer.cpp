// Snowball English stemmer (Porter2), ported from the reference Snowball
// definition: prelude (apostrophe strip, y/Y marking), R1/R2 regions with
// the gener-/commun-/arsen- prefix exception, steps 0 through 5, both
// exception lists, postlude. Regions are kept as start indices into the
// word; suffix edits never move them.

#include "fewvec/stemmer.hpp"

#include <algorithm>
#include <array>
#include <string_view>
#include <unordered_map>

namespace fewvec {

namespace {

bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

bool ends_with(std::string_view w, std::string_view suffix) {
  return w.size() >= suffix.size() &&
         w.compare(w.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool is_double(std::string_view w) {
  if (w.size() < 2) return false;
  char a = w[w.size() - 2], b = w[w.size() - 1];
  if (a != b) return false;
  switch (a) {
    case 'b': case 'd': case 'f': case 'g': case 'm':
    case 'n': case 'p': case 'r': case 't':
      return true;
    default:
      return false;
  }
}

bool valid_li_ending(char c) {
  switch (c) {
    case 'c': case 'd': case 'e': case 'g': case 'h':
    case 'k': case 'm': case 'n': case 'r': case 't':
      return true;
    default:
      return false;
  }
}

// True when `w` ends in a short syllable: vowel + non-vowel other than
// w/x/Y preceded by a non-vowel, or, for a two-letter word, vowel followed
// by a non-vowel.
bool ends_short_syllable(std::string_view w) {
  std::size_t n = w.size();
  if (n == 2) return is_vowel(w[0]) && !is_vowel(w[1]);
  if (n >= 3) {
    char last = w[n - 1];
    return !is_vowel(w[n - 3]) && is_vowel(w[n - 2]) && !is_vowel(last) &&
           last != 'w' && last != 'x' && last != 'Y';
  }
  return false;
}

bool contains_vowel(std::string_view w) {
  return std::any_of(w.begin(), w.end(), is_vowel);
}

struct Regions {
  std::size_t r1;
  std::size_t r2;
};

Regions mark_regions(std::string_view w) {
  std::size_t n = w.size();
  std::size_t r1 = n;
  if (w.starts_with("gener") || w.starts_with("arsen")) {
    r1 = 5;
  } else if (w.starts_with("commun")) {
    r1 = 6;
  } else {
    for (std::size_t i = 1; i < n; ++i) {
      if (!is_vowel(w[i]) && is_vowel(w[i - 1])) {
        r1 = i + 1;
        break;
      }
    }
  }
  std::size_t r2 = n;
  for (std::size_t i = r1 + 1; i < n; ++i) {
    if (!is_vowel(w[i]) && is_vowel(w[i - 1])) {
      r2 = i + 1;
      break;
    }
  }
  return {r1, r2};
}

// Whole-word exceptions checked before any step runs.
const std::unordered_map<std::string_view, std::string_view> kException1 = {
    {"skis", "ski"},    {"skies", "sky"},   {"dying", "die"},
    {"lying", "lie"},   {"tying", "tie"},   {"idly", "idl"},
    {"gently", "gentl"},{"ugly", "ugli"},   {"early", "earli"},
    {"only", "onli"},   {"singly", "singl"},{"sky", "sky"},
    {"news", "news"},   {"howe", "howe"},   {"atlas", "atlas"},
    {"cosmos", "cosmos"},{"bias", "bias"},  {"andes", "andes"},
};

// Words invariant from step 1b onward.
constexpr std::array<std::string_view, 8> kException2 = {
    "inning", "outing",  "canning", "herring",
    "earring", "proceed", "exceed",  "succeed",
};

// suffix is inside the region starting at `region` iff the suffix start
// position is at or after it.
bool in_region(const std::string& w, std::size_t region, std::size_t suffix_len) {
  return w.size() - suffix_len >= region;
}

void replace_suffix(std::string& w, std::size_t suffix_len,
                    std::string_view replacement) {
  w.resize(w.size() - suffix_len);
  w.append(replacement);
}

}  // namespace

std::string snowball_stem(const std::string& input) {
  std::string w = input;
  for (char& c : w) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }

  if (auto it = kException1.find(w); it != kException1.end()) {
    return std::string(it->second);
  }
  if (w.size() <= 2) return w;

  // Prelude: drop one initial apostrophe, mark consonant y as Y.
  if (w[0] == '\'') w.erase(0, 1);
  if (!w.empty() && w[0] == 'y') w[0] = 'Y';
  for (std::size_t i = 1; i < w.size(); ++i) {
    if (w[i] == 'y' && is_vowel(w[i - 1])) w[i] = 'Y';
  }

  const auto [r1, r2] = mark_regions(w);

  // Step 0: longest of 's' / 's / '
  if (ends_with(w, "'s'")) {
    w.resize(w.size() - 3);
  } else if (ends_with(w, "'s")) {
    w.resize(w.size() - 2);
  } else if (ends_with(w, "'")) {
    w.resize(w.size() - 1);
  }

  // Step 1a
  if (ends_with(w, "sses")) {
    w.resize(w.size() - 2);
  } else if (ends_with(w, "ied") || ends_with(w, "ies")) {
    w.resize(w.size() - (w.size() - 3 > 1 ? 2 : 1));
  } else if (ends_with(w, "us") || ends_with(w, "ss")) {
    // no-op
  } else if (ends_with(w, "s")) {
    if (w.size() >= 2 && contains_vowel(std::string_view(w).substr(0, w.size() - 2))) {
      w.resize(w.size() - 1);
    }
  }

  for (std::string_view fixed : kException2) {
    if (w == fixed) return w;
  }

  // Step 1b
  {
    std::string_view v(w);
    if (ends_with(v, "eedly")) {
      if (in_region(w, r1, 5)) replace_suffix(w, 5, "ee");
    } else if (ends_with(v, "ingly") || ends_with(v, "edly")) {
      std::size_t len = ends_with(v, "ingly") ? 5 : 4;
      if (contains_vowel(v.substr(0, v.size() - len))) {
        w.resize(w.size() - len);
        if (ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz")) {
          w.push_back('e');
        } else if (is_double(w)) {
          w.resize(w.size() - 1);
        } else if (r1 >= w.size() && ends_short_syllable(w)) {
          w.push_back('e');
        }
      }
    } else if (ends_with(v, "eed")) {
      if (in_region(w, r1, 3)) replace_suffix(w, 3, "ee");
    } else if (ends_with(v, "ing") || ends_with(v, "ed")) {
      std::size_t len = ends_with(v, "ing") ? 3 : 2;
      if (contains_vowel(v.substr(0, v.size() - len))) {
        w.resize(w.size() - len);
        if (ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz")) {
          w.push_back('e');
        } else if (is_double(w)) {
          w.resize(w.size() - 1);
        } else if (r1 >= w.size() && ends_short_syllable(w)) {
          w.push_back('e');
        }
      }
    }
  }

  // Step 1c: y/Y -> i after a non-vowel that is not the first letter.
  if (w.size() >= 3) {
    char last = w[w.size() - 1];
    if ((last == 'y' || last == 'Y') && !is_vowel(w[w.size() - 2])) {
      w[w.size() - 1] = 'i';
    }
  }

  // Step 2 (longest match, applied only when the suffix lies in R1).
  {
    struct Rule {
      std::string_view suffix;
      std::string_view replacement;
    };
    static constexpr std::array<Rule, 21> rules = {{
        {"ization", "ize"}, {"ational", "ate"}, {"fulness", "ful"},
        {"ousness", "ous"}, {"iveness", "ive"}, {"tional", "tion"},
        {"biliti", "ble"},  {"lessli", "less"}, {"entli", "ent"},
        {"ation", "ate"},   {"alism", "al"},    {"aliti", "al"},
        {"ousli", "ous"},   {"iviti", "ive"},   {"fulli", "ful"},
        {"enci", "ence"},   {"anci", "ance"},   {"abli", "able"},
        {"izer", "ize"},    {"ator", "ate"},    {"alli", "al"},
    }};
    bool done = false;
    for (const Rule& rule : rules) {
      if (ends_with(w, rule.suffix)) {
        if (in_region(w, r1, rule.suffix.size())) {
          replace_suffix(w, rule.suffix.size(), rule.replacement);
        }
        done = true;
        break;
      }
    }
    if (!done) {
      if (ends_with(w, "bli")) {
        if (in_region(w, r1, 3)) replace_suffix(w, 3, "ble");
      } else if (ends_with(w, "ogi")) {
        if (in_region(w, r1, 3) && w.size() >= 4 && w[w.size() - 4] == 'l') {
          w.resize(w.size() - 1);
        }
      } else if (ends_with(w, "li")) {
        if (in_region(w, r1, 2) && w.size() >= 3 &&
            valid_li_ending(w[w.size() - 3])) {
          w.resize(w.size() - 2);
        }
      }
    }
  }

  // Step 3 (in R1; "ative" additionally requires R2).
  {
    std::string_view v(w);
    if (ends_with(v, "ational")) {
      if (in_region(w, r1, 7)) replace_suffix(w, 7, "ate");
    } else if (ends_with(v, "tional")) {
      if (in_region(w, r1, 6)) replace_suffix(w, 6, "tion");
    } else if (ends_with(v, "alize")) {
      if (in_region(w, r1, 5)) replace_suffix(w, 5, "al");
    } else if (ends_with(v, "icate") || ends_with(v, "iciti")) {
      if (in_region(w, r1, 5)) replace_suffix(w, 5, "ic");
    } else if (ends_with(v, "ative")) {
      if (in_region(w, r1, 5) && in_region(w, r2, 5)) w.resize(w.size() - 5);
    } else if (ends_with(v, "ical")) {
      if (in_region(w, r1, 4)) replace_suffix(w, 4, "ic");
    } else if (ends_with(v, "ness")) {
      if (in_region(w, r1, 4)) w.resize(w.size() - 4);
    } else if (ends_with(v, "ful")) {
      if (in_region(w, r1, 3)) w.resize(w.size() - 3);
    }
  }

  // Step 4 (in R2).
  {
    static constexpr std::array<std::string_view, 17> plain = {
        "ement", "ance", "ence", "able", "ible", "ment", "ant", "ent", "ism",
        "ate",   "iti",  "ous",  "ive",  "ize",  "al",   "er",  "ic",
    };
    bool matched = false;
    for (std::string_view suffix : plain) {
      if (ends_with(w, suffix)) {
        // "ion" is longer than some entries here; make sure the longest
        // match wins by checking it wherever it overlaps ("sion"/"tion"
        // never collide with this list, so plain order is safe).
        if (in_region(w, r2, suffix.size())) w.resize(w.size() - suffix.size());
        matched = true;
        break;
      }
    }
    if (!matched && ends_with(w, "ion")) {
      if (in_region(w, r2, 3) && w.size() >= 4 &&
          (w[w.size() - 4] == 's' || w[w.size() - 4] == 't')) {
        w.resize(w.size() - 3);
      }
    }
  }

  // Step 5
  if (ends_with(w, "e")) {
    if (in_region(w, r2, 1)) {
      w.resize(w.size() - 1);
    } else if (in_region(w, r1, 1) &&
               !ends_short_syllable(std::string_view(w).substr(0, w.size() - 1))) {
      w.resize(w.size() - 1);
    }
  } else if (ends_with(w, "l")) {
    if (in_region(w, r2, 1) && w.size() >= 2 && w[w.size() - 2] == 'l') {
      w.resize(w.size() - 1);
    }
  }

  for (char& c : w) {
    if (c == 'Y') c = 'y';
  }
  return w;
}

StemIndex build_stem_index(const std::vector<std::string>& vocab) {
  StemIndex index;
  for (const std::string& word : vocab) {
    index.groups[snowball_stem(word)].push_back(word);
  }
  for (auto& [stem, words] : index.groups) {
    std::sort(words.begin(), words.end());
    words.erase(std::unique(words.begin(), words.end()), words.end());
  }
  return index;
}

}  // namespace fewvec
