#include "fewvec/embedding_space.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fewvec {

namespace {

double parse_double(std::string_view text, const std::string& context) {
  double value = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw Error("bad number '" + std::string(text) + "' in " + context);
  }
  return value;
}

std::int64_t parse_int(std::string_view text, const std::string& context) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error("bad integer '" + std::string(text) + "' in " + context);
  }
  return value;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

// Similarity used for ranking vocabulary rows: plain cosine, with zero-norm
// rows pushed below the cosine range so they sort last deterministically.
double ranking_similarity(std::span<const double> query, double query_norm,
                          std::span<const double> row) {
  double dot = 0, norm2 = 0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    dot += query[i] * row[i];
    norm2 += row[i] * row[i];
  }
  if (norm2 == 0.0) return -2.0;
  double sim = dot / (query_norm * std::sqrt(norm2));
  return std::clamp(sim, -1.0, 1.0);
}

double checked_norm(std::span<const double> v, const char* what) {
  double norm2 = 0;
  for (double x : v) norm2 += x * x;
  if (norm2 == 0.0) {
    throw InferenceError(std::string("zero-norm ") + what + " vector");
  }
  return std::sqrt(norm2);
}

}  // namespace

EmbeddingSpace::EmbeddingSpace(std::size_t dim) : dim_(dim) {
  if (dim < 1) throw Error("embedding dimension must be >= 1");
}

void EmbeddingSpace::add(const std::string& word,
                         std::span<const double> vector, std::int64_t count) {
  if (vector.size() != dim_) {
    throw Error("vector for '" + word + "' has dimension " +
                std::to_string(vector.size()) + ", expected " +
                std::to_string(dim_));
  }
  if (index_.count(word)) throw Error("duplicate word '" + word + "'");
  for (double x : vector) {
    if (!std::isfinite(x)) {
      throw Error("non-finite coordinate for '" + word + "'");
    }
  }
  if (count < 0) throw Error("negative count for '" + word + "'");
  index_.emplace(word, words_.size());
  words_.push_back(word);
  matrix_.insert(matrix_.end(), vector.begin(), vector.end());
  counts_.push_back(count);
  total_count_ += count;
}

std::optional<std::size_t> EmbeddingSpace::row(const std::string& word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const double> EmbeddingSpace::vector(std::size_t row) const {
  return {matrix_.data() + row * dim_, dim_};
}

std::span<const double> EmbeddingSpace::vector(const std::string& word) const {
  auto r = row(word);
  if (!r) throw Error("word '" + word + "' not in embedding space");
  return vector(*r);
}

std::int64_t EmbeddingSpace::count(const std::string& word) const {
  auto r = row(word);
  if (!r) throw Error("word '" + word + "' not in embedding space");
  return counts_[*r];
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw Error("cosine: dimension mismatch (" + std::to_string(u.size()) +
                " vs " + std::to_string(v.size()) + ")");
  }
  double nu = checked_norm(u, "left");
  double nv = checked_norm(v, "right");
  double dot = 0;
  for (std::size_t i = 0; i < u.size(); ++i) dot += u[i] * v[i];
  return std::clamp(dot / (nu * nv), -1.0, 1.0);
}

NeighborList neighbors(const EmbeddingSpace& space,
                       std::span<const double> query, std::size_t k,
                       const WordSet& exclude) {
  if (query.size() != space.dim()) {
    throw Error("neighbors: query dimension mismatch");
  }
  if (k < 1) throw Error("neighbors: k must be >= 1");
  double query_norm = checked_norm(query, "query");

  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(space.size());
  for (std::size_t r = 0; r < space.size(); ++r) {
    if (exclude.count(space.word(r))) continue;
    scored.emplace_back(ranking_similarity(query, query_norm, space.vector(r)),
                        r);
  }
  auto better = [&space](const std::pair<double, std::size_t>& a,
                         const std::pair<double, std::size_t>& b) {
    if (a.first != b.first) return a.first > b.first;
    return space.word(a.second) < space.word(b.second);
  };
  if (k < scored.size()) {
    std::partial_sort(scored.begin(), scored.begin() + k, scored.end(), better);
    scored.resize(k);
  } else {
    std::sort(scored.begin(), scored.end(), better);
  }

  NeighborList out;
  out.reserve(scored.size());
  for (auto& [sim, r] : scored) out.push_back({space.word(r), sim});
  return out;
}

std::size_t rank_of(const EmbeddingSpace& space, std::span<const double> query,
                    const std::string& target, const WordSet& exclude) {
  if (query.size() != space.dim()) {
    throw Error("rank_of: query dimension mismatch");
  }
  if (exclude.count(target)) throw Error("rank_of: target is excluded");
  auto target_row = space.row(target);
  if (!target_row) throw Error("rank_of: target '" + target + "' missing");

  double query_norm = checked_norm(query, "query");
  double target_sim =
      ranking_similarity(query, query_norm, space.vector(*target_row));

  std::size_t rank = 1;
  for (std::size_t r = 0; r < space.size(); ++r) {
    if (r == *target_row || exclude.count(space.word(r))) continue;
    double sim = ranking_similarity(query, query_norm, space.vector(r));
    if (sim > target_sim || (sim == target_sim && space.word(r) < target)) {
      ++rank;
    }
  }
  return rank;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

LabelledMatrix load_labelled_matrix(const std::string& path) {
  std::ifstream in(path ,std::ios::binary);
  if (!in) throw Error("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw Error(path + ": missing header line");
  auto header = split_ws(line);
  if (header.size() != 2) {
    throw Error(path + ": header must be '<rows> <dim>'");
  }
  std::int64_t rows = parse_int(header[0], path + " header");
  std::int64_t cols = parse_int(header[1], path + " header");
  if (rows < 0 || cols < 1) throw Error(path + ": bad header values");

  LabelledMatrix m;
  m.cols = static_cast<std::size_t>(cols);
  m.labels.reserve(rows);
  m.values.reserve(static_cast<std::size_t>(rows) * m.cols);

  std::int64_t seen = 0;
  while (std::getline(in, line)) {
    if (line.empty() && seen == rows) break;
    auto fields = split_ws(line);
    if (fields.empty()) continue;
    std::string where = path + " line " + std::to_string(seen + 2);
    if (fields.size() != m.cols + 1) {
      throw Error(where + ": expected " + std::to_string(m.cols) +
                  " coordinates, found " + std::to_string(fields.size() - 1));
    }
    m.labels.emplace_back(fields[0]);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      double x = parse_double(fields[i], where);
      if (!std::isfinite(x)) throw Error(where + ": non-finite value");
      m.values.push_back(x);
    }
    ++seen;
  }
  if (seen != rows) {
    throw Error(path + ": header declares " + std::to_string(rows) +
                " rows, file has " + std::to_string(seen));
  }
  return m;
}

void save_labelled_matrix(const LabelledMatrix& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << m.rows() << ' ' << m.cols << '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    out << m.labels[r];
    auto row = m.row(r);
    for (double x : row) out << ' ' << format_double(x);
    out << '\n';
  }
  if (!out) throw Error("write failed for " + path);
}

EmbeddingSpace load_space(const std::string& vectors_path,
                          const std::string& counts_path) {
  LabelledMatrix m = load_labelled_matrix(vectors_path);

  std::unordered_map<std::string, std::int64_t> counts;
  std::ifstream in(counts_path, std::ios::binary);
  if (!in) throw Error("cannot open " + counts_path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(counts_path + " line " + std::to_string(lineno) +
                  ": expected '<word>\\t<count>'");
    }
    std::string word = line.substr(0, tab);
    std::int64_t c = parse_int(std::string_view(line).substr(tab + 1),
                               counts_path + " line " + std::to_string(lineno));
    if (c < 0) {
      throw Error(counts_path + " line " + std::to_string(lineno) +
                  ": negative count");
    }
    counts[word] = c;
  }

  EmbeddingSpace space(m.cols);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto it = counts.find(m.labels[r]);
    if (it == counts.end()) {
      throw Error("missing count for '" + m.labels[r] + "' in " + counts_path);
    }
    space.add(m.labels[r], m.row(r), it->second);
  }
  return space;
}

void save_space(const EmbeddingSpace& space, const std::string& vectors_path,
                const std::string& counts_path) {
  std::ofstream out(vectors_path, std::ios::binary);
  if (!out) throw Error("cannot write " + vectors_path);
  out << space.size() << ' ' << space.dim() << '\n';
  for (std::size_t r = 0; r < space.size(); ++r) {
    out << space.word(r);
    for (double x : space.vector(r)) out << ' ' << format_double(x);
    out << '\n';
  }
  if (!out) throw Error("write failed for " + vectors_path);

  std::ofstream counts(counts_path, std::ios::binary);
  if (!counts) throw Error("cannot write " + counts_path);
  for (std::size_t r = 0; r < space.size(); ++r) {
    counts << space.word(r) << '\t' << space.count(r) << '\n';
  }
  if (!counts) throw Error("write failed for " + counts_path);
}

}  // namespace fewvec
