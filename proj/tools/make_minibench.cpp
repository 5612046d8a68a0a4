// Regenerates the bundled synthetic benchmark under data/minibench: a
// 200-word embedding space with clustered geometry, a generated corpus,
// and miniature rank/correlation task files whose human scores are derived
// from the gold geometry, so a gold-vector oracle scores perfectly.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "fewvec/embedding_space.hpp"
#include "fewvec/eval.hpp"
#include "fewvec/rng.hpp"

namespace fs = std::filesystem;
using namespace fewvec;

namespace {

constexpr std::size_t kDim = 16;
constexpr std::size_t kClusters = 25;
constexpr std::uint64_t kSeed = 20240901;

struct Bench {
  std::vector<std::string> words;
  std::vector<int> cluster_of;
  std::vector<std::vector<std::string>> cluster_words;
  EmbeddingSpace space{kDim};
};

std::string variant(const std::string& base, int which) {
  bool ends_e = base.back() == 'e';
  switch (which) {
    case 0: return base;
    case 1: return base + "s";
    case 2: return ends_e ? base + "d" : base + "ed";
    default:
      return ends_e ? base.substr(0, base.size() - 1) + "ing" : base + "ing";
  }
}

std::string random_word(Rng& rng) {
  static const std::string consonants = "bcdfghjklmnprstvz";
  static const std::string vowels = "aeiou";
  std::string w;
  std::size_t syllables = 2 + rng.below(2);
  for (std::size_t s = 0; s < syllables; ++s) {
    w += consonants[rng.below(consonants.size())];
    w += vowels[rng.below(vowels.size())];
  }
  if (rng.below(2)) w += consonants[rng.below(consonants.size())];
  return w;
}

void write_lines(const std::string& path,
                 const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  for (const std::string& line : lines) out << line << '\n';
}

std::string join(const Sentence& tokens) {
  std::string line;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) line += ' ';
    line += tokens[i];
  }
  return line;
}

Bench build_vocabulary(Rng& rng) {
  static const std::vector<std::string> bases = {
      "walk",  "jump",  "trade", "farm",  "paint", "hunt",
      "climb", "drift", "spark", "bloom", "carve", "shout",
      "glide", "crawl", "whirl", "brew",  "forge", "mold",
      "weave", "stitch", "prune", "graft", "chant", "drum"};
  static const std::vector<std::string> stops = {"the", "of", "and", "is"};

  Bench bench;
  bench.cluster_words.resize(kClusters);
  std::set<std::string> taken(stops.begin(), stops.end());

  for (std::size_t f = 0; f < bases.size(); ++f) {
    for (int v = 0; v < 4; ++v) {
      std::string w = variant(bases[f], v);
      taken.insert(w);
      bench.words.push_back(w);
      bench.cluster_of.push_back(static_cast<int>(f % kClusters));
    }
  }
  while (bench.words.size() < 196) {
    std::string w = random_word(rng);
    if (!taken.insert(w).second) continue;
    bench.words.push_back(w);
    bench.cluster_of.push_back(static_cast<int>(rng.below(kClusters)));
  }
  for (const std::string& s : stops) {
    bench.words.push_back(s);
    bench.cluster_of.push_back(-1);
  }

  std::vector<std::vector<double>> centers(kClusters);
  for (auto& c : centers) {
    c.resize(kDim);
    for (double& x : c) x = rng.uniform(-1.0, 1.0);
  }
  for (std::size_t i = 0; i < bench.words.size(); ++i) {
    std::vector<double> v(kDim);
    int cluster = bench.cluster_of[i];
    for (std::size_t d = 0; d < kDim; ++d) {
      v[d] = cluster < 0 ? rng.uniform(-1.0, 1.0)
                         : centers[cluster][d] + 0.35 * rng.uniform(-1.0, 1.0);
    }
    std::int64_t count = cluster < 0 ? 50000 : 60 + rng.below(4000);
    bench.space.add(bench.words[i], v, count);
    if (cluster >= 0) bench.cluster_words[cluster].push_back(bench.words[i]);
  }
  return bench;
}

Sentence cluster_sentence(const Bench& bench, int cluster, std::size_t len,
                          Rng& rng) {
  static const std::vector<std::string> stops = {"the", "of", "and", "is"};
  Sentence tokens;
  const auto& pool = bench.cluster_words[cluster];
  for (std::size_t i = 0; i < len; ++i) {
    if (rng.below(100) < 15) {
      tokens.push_back(stops[rng.below(stops.size())]);
    } else {
      tokens.push_back(pool[rng.below(pool.size())]);
    }
  }
  return tokens;
}

}  // namespace

int main(int argc, char** argv) {
  std::string dir = argc > 1 ? argv[1] : "data/minibench";
  fs::create_directories(dir + "/crw_contexts");
  Rng rng(kSeed);

  Bench bench = build_vocabulary(rng);
  save_space(bench.space, dir + "/vectors.txt", dir + "/counts.tsv");

  // corpus
  {
    std::vector<std::string> lines;
    for (int i = 0; i < 4000; ++i) {
      int cluster = static_cast<int>(rng.below(kClusters));
      lines.push_back(
          join(cluster_sentence(bench, cluster, 8 + rng.below(5), rng)));
    }
    write_lines(dir + "/corpus.txt", lines);
  }

  // sidecars for the continued-training methods
  {
    LabelledMatrix output;
    output.cols = kDim;
    output.labels = bench.words;
    output.values.resize(bench.words.size() * kDim);
    for (double& x : output.values) x = rng.uniform(-0.03, 0.03);
    save_labelled_matrix(output, dir + "/output_vectors.txt");

    LabelledMatrix ngrams;
    ngrams.cols = kDim;
    for (std::size_t b = 0; b < 500; ++b) {
      ngrams.labels.push_back(std::to_string(b));
    }
    ngrams.values.resize(500 * kDim);
    for (double& x : ngrams.values) x = rng.uniform(-0.03, 0.03);
    save_labelled_matrix(ngrams, dir + "/ngram_vectors.txt");
  }

  // rank task: 20 items, gold = the "-ed" variant of the first 20 families
  std::vector<std::string> dn_golds;
  {
    std::vector<std::string> lines;
    for (int f = 0; f < 20; ++f) {
      const std::string& gold = bench.words[static_cast<std::size_t>(f) * 4 + 2];
      dn_golds.push_back(gold);
      int cluster = bench.cluster_of[static_cast<std::size_t>(f) * 4 + 2];
      Sentence sentence = cluster_sentence(bench, cluster, 7, rng);
      Sentence full = {kTargetMarker, "is", "a"};
      full.insert(full.end(), sentence.begin(), sentence.end());
      lines.push_back(gold + "\t" + join(full));
    }
    write_lines(dir + "/dn.tsv", lines);
    write_lines(dir + "/test_words.txt", dn_golds);
  }

  // chimera-style trials: ids are vocabulary words so gold geometry defines
  // the ratings
  {
    std::vector<std::string> lines;
    for (int t = 0; t < 12; ++t) {
      const std::string& id = bench.words[100 + static_cast<std::size_t>(t) * 3];
      int cluster = bench.cluster_of[100 + static_cast<std::size_t>(t) * 3];
      if (cluster < 0) cluster = 0;
      int num_sentences = 2 * (t % 3 + 1);  // 2, 4, 6
      std::vector<std::string> sentences;
      for (int s = 0; s < num_sentences; ++s) {
        Sentence tokens = cluster_sentence(bench, cluster, 8, rng);
        tokens[rng.below(tokens.size())] = kTargetMarker;
        sentences.push_back(join(tokens));
      }
      std::string joined = sentences[0];
      for (std::size_t s = 1; s < sentences.size(); ++s) {
        joined += "@@" + sentences[s];
      }
      std::string probes, ratings;
      for (int p = 0; p < 6; ++p) {
        const std::string& probe =
            bench.words[10 + static_cast<std::size_t>(t * 7 + p * 13) % 180];
        if (p) {
          probes += ',';
          ratings += ',';
        }
        probes += probe;
        ratings += format_double(
            cosine(bench.space.vector(id), bench.space.vector(probe)));
      }
      lines.push_back(id + "\t" + std::to_string(num_sentences) + "\t" +
                      joined + "\t" + probes + "\t" + ratings);
    }
    write_lines(dir + "/chimera.tsv", lines);
  }

  // rare-word pairs with 128 context sentences each
  {
    std::vector<std::string> lines;
    for (int i = 0; i < 30; ++i) {
      const std::string& rare = bench.words[static_cast<std::size_t>(i) * 6 + 1];
      const std::string& partner =
          bench.words[(static_cast<std::size_t>(i) * 6 + 97) % 196];
      double score =
          cosine(bench.space.vector(rare), bench.space.vector(partner));
      lines.push_back(rare + "\t" + partner + "\t" + format_double(score));

      int cluster = bench.cluster_of[static_cast<std::size_t>(i) * 6 + 1];
      if (cluster < 0) cluster = 0;
      std::vector<std::string> context_lines;
      for (int s = 0; s < 128; ++s) {
        Sentence tokens = cluster_sentence(bench, cluster, 8 + rng.below(4), rng);
        tokens[rng.below(tokens.size())] = kTargetMarker;
        context_lines.push_back(join(tokens));
      }
      write_lines(dir + "/crw_contexts/" + rare + ".txt", context_lines);
    }
    write_lines(dir + "/crw_pairs.tsv", lines);
  }

  std::cout << "wrote benchmark files under " << dir << '\n';
  return 0;
}
