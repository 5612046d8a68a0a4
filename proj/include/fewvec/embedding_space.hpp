#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "fewvec/error.hpp"

namespace fewvec {

using WordSet = std::unordered_set<std::string>;

// A dense embedding space: vocabulary, |V| x d coordinate matrix, and
// per-word corpus frequencies. Treated as immutable once built; shared
// read-only by all inference and evaluation code.
class EmbeddingSpace {
 public:
  explicit EmbeddingSpace(std::size_t dim);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return words_.size(); }

  // Appends a word. Throws on duplicates, dimension mismatch, non-finite
  // coordinates, or a negative count.
  void add(const std::string& word, std::span<const double> vector,
           std::int64_t count);

  const std::string& word(std::size_t row) const { return words_[row]; }
  const std::vector<std::string>& words() const { return words_; }
  std::optional<std::size_t> row(const std::string& word) const;
  bool contains(const std::string& word) const {
    return index_.count(word) > 0;
  }

  std::span<const double> vector(std::size_t row) const;
  std::span<const double> vector(const std::string& word) const;

  std::int64_t count(std::size_t row) const { return counts_[row]; }
  std::int64_t count(const std::string& word) const;
  // Sum of all counts; zero for an empty space.
  std::int64_t total_count() const { return total_count_; }

 private:
  std::size_t dim_;
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> matrix_;  // row-major |V| x d
  std::vector<std::int64_t> counts_;
  std::int64_t total_count_ = 0;
};

struct Neighbor {
  std::string word;
  double similarity;
};

using NeighborList = std::vector<Neighbor>;

// u.v / (|u||v|), clamped into [-1, 1] against rounding. Throws
// InferenceError on a zero-norm input: a zero vector always signals a
// degenerate inferred result, never a meaningful direction.
double cosine(std::span<const double> u, std::span<const double> v);

// Top-k vocabulary words by cosine to `query`, descending; ties broken by
// ascending word order. Words in `exclude` never appear. Zero-norm
// vocabulary rows are ranked below every true cosine so reranking a
// degenerate space stays deterministic.
NeighborList neighbors(const EmbeddingSpace& space,
                       std::span<const double> query, std::size_t k,
                       const WordSet& exclude = {});

// 1-based position of `target` among all non-excluded vocabulary words
// ordered by descending cosine to `query`, ties lexicographic. The target
// must be present and not excluded.
std::size_t rank_of(const EmbeddingSpace& space, std::span<const double> query,
                    const std::string& target, const WordSet& exclude = {});

// Text formats. Vectors: first line "<vocab_size> <dim>\n", then one line
// per word: the word and d decimal coordinates, single-space separated.
// Counts sidecar: "<word>\t<count>\n" per line. Serialization uses 17
// significant digits, so save/load round-trips doubles exactly.
EmbeddingSpace load_space(const std::string& vectors_path,
                          const std::string& counts_path);
void save_space(const EmbeddingSpace& space, const std::string& vectors_path,
                const std::string& counts_path);

// Row-labelled matrix I/O in the same line format (label + coordinates);
// shared by the vector files above and model sidecars.
struct LabelledMatrix {
  std::size_t cols = 0;
  std::vector<std::string> labels;
  std::vector<double> values;  // row-major labels.size() x cols

  std::size_t rows() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * cols, cols};
  }
};

LabelledMatrix load_labelled_matrix(const std::string& path);
void save_labelled_matrix(const LabelledMatrix& m, const std::string& path);

// Formats one double with 17 significant digits, locale-independent.
std::string format_double(double v);

}  // namespace fewvec
