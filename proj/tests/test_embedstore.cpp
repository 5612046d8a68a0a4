#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "fewvec/embedding_space.hpp"
#include "fewvec/rng.hpp"

using namespace fewvec;
namespace fs = std::filesystem;

namespace {

EmbeddingSpace make_space(
    const std::vector<std::pair<std::string, std::vector<double>>>& rows,
    std::int64_t count = 1) {
  EmbeddingSpace space(rows[0].second.size());
  for (const auto& [word, vec] : rows) space.add(word, vec, count);
  return space;
}

EmbeddingSpace random_space(std::size_t words, std::size_t dim,
                            std::uint64_t seed) {
  EmbeddingSpace space(dim);
  Rng rng(seed);
  for (std::size_t i = 0; i < words; ++i) {
    std::vector<double> v(dim);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    space.add("w" + std::to_string(i), v, 1 + rng.below(100));
  }
  return space;
}

// Independent cosine for the full-sort oracles.
double oracle_cosine(std::span<const double> a, std::span<const double> b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

// Brute force: sort the whole vocabulary by (similarity desc, word asc).
std::vector<std::string> oracle_order(const EmbeddingSpace& space,
                                      std::span<const double> query,
                                      const WordSet& exclude = {}) {
  std::vector<std::pair<double, std::string>> scored;
  for (std::size_t r = 0; r < space.size(); ++r) {
    if (exclude.count(space.word(r))) continue;
    scored.emplace_back(oracle_cosine(query, space.vector(r)), space.word(r));
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<std::string> order;
  for (auto& [sim, word] : scored) order.push_back(word);
  return order;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string temp_path(const std::string& name) {
  return (fs::temp_directory_path() / ("fewvec_test_" + name)).string();
}

}  // namespace

TEST_CASE("cosine on hand values") {
  std::vector<double> e1 = {1, 0}, e2 = {0, 1}, diag = {1, 1};
  CHECK(cosine(e1, e1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cosine(e1, e2) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(cosine(diag, e1) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
}

TEST_CASE("cosine errors") {
  std::vector<double> zero = {0, 0}, ok = {1, 0}, shorter = {1};
  CHECK_THROWS_AS(cosine(zero, ok), InferenceError);
  CHECK_THROWS_AS(cosine(ok, zero), InferenceError);
  CHECK_THROWS_AS(cosine(ok, shorter), Error);
}

TEST_CASE("cosine properties on random vectors") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> u(8), v(8);
    for (double& x : u) x = rng.uniform(-2.0, 2.0);
    for (double& x : v) x = rng.uniform(-2.0, 2.0);
    CHECK(cosine(u, u) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cosine(u, v) == doctest::Approx(cosine(v, u)).epsilon(1e-15));
    CHECK(std::fabs(cosine(u, v)) <= 1.0);

    double scale = rng.uniform(0.01, 50.0);
    std::vector<double> su(u);
    for (double& x : su) x *= scale;
    CHECK(cosine(su, v) == doctest::Approx(cosine(u, v)).epsilon(1e-12));
  }
}

TEST_CASE("neighbors on a two-word space") {
  EmbeddingSpace space = make_space({{"a", {1, 0}}, {"b", {0, 1}}});
  std::vector<double> q = {1, 0};

  NeighborList top = neighbors(space, q, 1);
  REQUIRE(top.size() == 1);
  CHECK(top[0].word == "a");
  CHECK(top[0].similarity == doctest::Approx(1.0));

  NeighborList excluded = neighbors(space, q, 1, {"a"});
  REQUIRE(excluded.size() == 1);
  CHECK(excluded[0].word == "b");
  CHECK(excluded[0].similarity == doctest::Approx(0.0));
}

TEST_CASE("neighbors match the full-sort oracle") {
  EmbeddingSpace space = random_space(50, 6, 77);
  Rng rng(78);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> q(6);
    for (double& x : q) x = rng.uniform(-1.0, 1.0);
    WordSet exclude;
    if (trial % 2) exclude = {"w0", "w7", "w31"};
    std::vector<std::string> expected = oracle_order(space, q, exclude);

    for (std::size_t k : {std::size_t(1), std::size_t(7), std::size_t(50)}) {
      NeighborList got = neighbors(space, q, k, exclude);
      REQUIRE(got.size() == std::min(k, expected.size()));
      for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].word == expected[i]);
      }
      for (std::size_t i = 1; i < got.size(); ++i) {
        CHECK(got[i - 1].similarity >= got[i].similarity);
      }
    }
  }
}

TEST_CASE("neighbors over the whole vocabulary is a permutation") {
  EmbeddingSpace space = random_space(40, 4, 5);
  std::vector<double> q(4, 0.3);
  NeighborList all = neighbors(space, q, space.size());
  REQUIRE(all.size() == space.size());
  WordSet seen;
  for (const Neighbor& n : all) seen.insert(n.word);
  CHECK(seen.size() == space.size());
}

TEST_CASE("rank_of on hand-built spaces") {
  EmbeddingSpace space =
      make_space({{"a", {1, 0}}, {"b", {0, 1}}, {"c", {-1, 0.1}}});
  CHECK(rank_of(space, space.vector("a"), "a") == 1);

  // query parallel to b, orthogonal to the target a
  EmbeddingSpace two = make_space({{"a", {1, 0}}, {"b", {0, 1}}});
  std::vector<double> q = {0, 1};
  CHECK(rank_of(two, q, "a") == 2);

  CHECK_THROWS_AS(rank_of(two, q, "zzz"), Error);
  CHECK_THROWS_AS(rank_of(two, q, "a", {"a"}), Error);
}

TEST_CASE("rank_of matches the full-sort oracle on a 100-word space") {
  EmbeddingSpace space = random_space(100, 8, 123);
  Rng rng(124);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> q(8);
    for (double& x : q) x = rng.uniform(-1.0, 1.0);
    std::string target = "w" + std::to_string(rng.below(100));
    WordSet exclude;
    if (trial % 3 == 0) {
      std::string other = "w" + std::to_string(rng.below(100));
      if (other != target) exclude.insert(other);
    }
    std::vector<std::string> order = oracle_order(space, q, exclude);
    auto it = std::find(order.begin(), order.end(), target);
    std::size_t expected = static_cast<std::size_t>(it - order.begin()) + 1;
    CHECK(rank_of(space, q, target, exclude) == expected);
  }
}

TEST_CASE("rank and neighbors are invariant under positive query scaling") {
  EmbeddingSpace space = random_space(30, 5, 9);
  Rng rng(10);
  std::vector<double> q(5);
  for (double& x : q) x = rng.uniform(-1.0, 1.0);
  std::vector<double> scaled(q);
  for (double& x : scaled) x *= 37.5;
  CHECK(rank_of(space, q, "w3") == rank_of(space, scaled, "w3"));
  NeighborList a = neighbors(space, q, 10);
  NeighborList b = neighbors(space, scaled, 10);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].word == b[i].word);
}

TEST_CASE("load_space parses a minimal file") {
  std::string vec_path = temp_path("min_vec.txt");
  std::string cnt_path = temp_path("min_cnt.tsv");
  std::ofstream(vec_path) << "2 2\na 1 0\nb 0 1\n";
  std::ofstream(cnt_path) << "a\t5\nb\t5\n";
  EmbeddingSpace space = load_space(vec_path, cnt_path);
  CHECK(space.dim() == 2);
  CHECK(space.size() == 2);
  CHECK(space.count("a") == 5);
  CHECK(space.vector("b")[1] == 1.0);
}

TEST_CASE("load_space rejects malformed input") {
  std::string vec_path = temp_path("bad_vec.txt");
  std::string cnt_path = temp_path("bad_cnt.tsv");
  std::ofstream(cnt_path) << "a\t5\nb\t5\n";

  SUBCASE("dimension mismatch") {
    std::ofstream(vec_path) << "1 2\na 1 0 0\n";
    CHECK_THROWS_AS(load_space(vec_path, cnt_path), Error);
  }
  SUBCASE("duplicate word") {
    std::ofstream(vec_path) << "2 2\na 1 0\na 0 1\n";
    CHECK_THROWS_AS(load_space(vec_path, cnt_path), Error);
  }
  SUBCASE("missing count") {
    std::ofstream(vec_path) << "1 2\nzz 1 0\n";
    CHECK_THROWS_AS(load_space(vec_path, cnt_path), Error);
  }
  SUBCASE("non-finite value") {
    std::ofstream(vec_path) << "1 2\na inf 0\n";
    CHECK_THROWS_AS(load_space(vec_path, cnt_path), Error);
  }
  SUBCASE("row count mismatch") {
    std::ofstream(vec_path) << "2 2\na 1 0\n";
    CHECK_THROWS_AS(load_space(vec_path, cnt_path), Error);
  }
}

TEST_CASE("save_space writes the empty-space header") {
  std::string vec_path = temp_path("empty_vec.txt");
  std::string cnt_path = temp_path("empty_cnt.tsv");
  save_space(EmbeddingSpace(300), vec_path, cnt_path);
  CHECK(read_file(vec_path) == "0 300\n");
  CHECK(read_file(cnt_path).empty());
}

TEST_CASE("save_space writes simple vectors in the plain format") {
  std::string vec_path = temp_path("one_vec.txt");
  std::string cnt_path = temp_path("one_cnt.tsv");
  EmbeddingSpace space = make_space({{"a", {1, 0}}}, 3);
  save_space(space, vec_path, cnt_path);
  CHECK(read_file(vec_path) == "1 2\na 1 0\n");
  CHECK(read_file(cnt_path) == "a\t3\n");
}

TEST_CASE("save/load round-trips bit-exactly") {
  EmbeddingSpace space = random_space(10, 5, 2024);
  std::string vec1 = temp_path("rt_vec1.txt"), cnt1 = temp_path("rt_cnt1.tsv");
  std::string vec2 = temp_path("rt_vec2.txt"), cnt2 = temp_path("rt_cnt2.tsv");
  save_space(space, vec1, cnt1);
  EmbeddingSpace loaded = load_space(vec1, cnt1);
  save_space(loaded, vec2, cnt2);
  CHECK(read_file(vec1) == read_file(vec2));
  CHECK(read_file(cnt1) == read_file(cnt2));

  REQUIRE(loaded.size() == space.size());
  for (std::size_t r = 0; r < space.size(); ++r) {
    CHECK(loaded.word(r) == space.word(r));
    CHECK(loaded.count(r) == space.count(r));
    auto a = space.vector(r), b = loaded.vector(r);
    for (std::size_t d = 0; d < space.dim(); ++d) CHECK(a[d] == b[d]);
  }
}
