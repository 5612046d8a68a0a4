#include "fewvec/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <thread>

#include "fewvec/rng.hpp"
#include "fewvec/stemmer.hpp"

namespace fewvec {

namespace {

using nlohmann::json;

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0) {
    throw Error("correlation undefined for constant input");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<std::string> split_on(const std::string& text,
                                  const std::string& sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = text.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(text.substr(start));
      return out;
    }
    out.push_back(text.substr(start, pos - start));
    start = pos + sep.size();
  }
}

Sentence whitespace_tokens(const std::string& text) {
  Sentence tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ' && text[j] != '\t') ++j;
    if (j > i) tokens.push_back(text.substr(i, j - i));
    i = j;
  }
  return tokens;
}

void append_marked_sentence(Episode& episode, const Sentence& tokens,
                            const std::string& where) {
  auto it = std::find(tokens.begin(), tokens.end(), kTargetMarker);
  if (it == tokens.end()) {
    throw Error(where + ": sentence lacks " + std::string(kTargetMarker));
  }
  episode.target_positions.push_back(
      static_cast<std::size_t>(it - tokens.begin()));
  episode.sentences.push_back(tokens);
}

double parse_score(const std::string& text, const std::string& where) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() ||
      !std::isfinite(v)) {
    throw Error(where + ": bad score '" + text + "'");
  }
  return v;
}

// Runs fn(i) for i in [0, n) across `threads` workers; exceptions are
// rethrown in the caller. Results must be written to pre-sized slots so
// output order never depends on scheduling.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(
      static_cast<std::size_t>(threads));
  auto worker = [&](int tid) {
    try {
      while (true) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) break;
        fn(i);
      }
    } catch (...) {
      errors[static_cast<std::size_t>(tid)] = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t);
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error("spearman: length mismatch (" + std::to_string(x.size()) +
                " vs " + std::to_string(y.size()) + ")");
  }
  if (x.size() < 2) throw Error("spearman needs at least two points");
  std::vector<double> rx = average_ranks(x);
  std::vector<double> ry = average_ranks(y);
  return pearson(rx, ry);
}

RankingSummary ranking_metrics(const std::vector<std::size_t>& ranks) {
  if (ranks.empty()) throw Error("ranking_metrics on an empty list");
  RankingSummary summary;
  for (std::size_t r : ranks) {
    if (r < 1) throw Error("ranks must be >= 1");
    summary.mrr += 1.0 / static_cast<double>(r);
  }
  summary.mrr /= static_cast<double>(ranks.size());
  std::vector<std::size_t> sorted(ranks);
  std::sort(sorted.begin(), sorted.end());
  summary.median_rank = sorted[(sorted.size() - 1) / 2];
  return summary;
}

double permutation_test(std::span<const double> a, std::span<const double> b,
                        int iterations, std::uint64_t seed) {
  if (a.size() != b.size()) {
    throw Error("permutation test: score lists differ in length");
  }
  if (a.empty()) throw Error("permutation test: empty score lists");
  if (iterations < 1) throw Error("permutation test: iterations must be >= 1");

  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  double observed = 0;
  for (double d : diff) observed += d;
  observed = std::fabs(observed);

  Rng rng(seed);
  long long hits = 0;
  for (int it = 0; it < iterations; ++it) {
    double sum = 0;
    for (double d : diff) {
      sum += (rng.raw() & 1) ? d : -d;
    }
    if (std::fabs(sum) >= observed) ++hits;
  }
  return static_cast<double>(1 + hits) / static_cast<double>(1 + iterations);
}

DnDataset load_dn(const std::string& path, const std::string& split) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  DnDataset dataset;
  dataset.split = split;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::string where = path + " line " + std::to_string(lineno);
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(where + ": expected 'word<TAB>sentence'");
    }
    DnItem item;
    item.gold = line.substr(0, tab);
    item.episode.target = item.gold;
    append_marked_sentence(item.episode, whitespace_tokens(line.substr(tab + 1)),
                           where);
    validate_episode(item.episode);
    dataset.items.push_back(std::move(item));
  }
  if (dataset.items.empty()) throw Error(path + ": no items");
  return dataset;
}

ChimeraDataset load_chimera(const std::vector<std::string>& paths) {
  if (paths.empty()) throw Error("no chimera files given");
  ChimeraDataset dataset;
  for (const std::string& path : paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      std::string where = path + " line " + std::to_string(lineno);
      auto fields = split_on(line, "\t");
      if (fields.size() != 5) {
        throw Error(where + ": expected 5 tab-separated fields");
      }
      ChimeraTrial trial;
      trial.id = fields[0];
      trial.num_sentences = static_cast<int>(parse_score(fields[1], where));
      trial.episode.target = trial.id;
      for (const std::string& sent : split_on(fields[2], "@@")) {
        append_marked_sentence(trial.episode, whitespace_tokens(sent), where);
      }
      if (static_cast<int>(trial.episode.sentences.size()) !=
          trial.num_sentences) {
        throw Error(where + ": sentence count does not match L");
      }
      for (const std::string& probe : split_on(fields[3], ",")) {
        if (probe.empty()) throw Error(where + ": empty probe");
        trial.probes.push_back(probe);
      }
      for (const std::string& rating : split_on(fields[4], ",")) {
        trial.ratings.push_back(parse_score(rating, where));
      }
      if (trial.probes.size() != trial.ratings.size()) {
        throw Error(where + ": probes and ratings differ in count");
      }
      validate_episode(trial.episode);
      dataset.trials.push_back(std::move(trial));
    }
  }
  if (dataset.trials.empty()) throw Error("chimera dataset is empty");
  return dataset;
}

CrwDataset load_crw(const std::string& pairs_path,
                    const std::string& contexts_dir) {
  std::ifstream in(pairs_path, std::ios::binary);
  if (!in) throw Error("cannot open " + pairs_path);
  CrwDataset dataset;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::string where = pairs_path + " line " + std::to_string(lineno);
    auto fields = split_on(line, "\t");
    if (fields.size() != 3) {
      throw Error(where + ": expected 'rare<TAB>partner<TAB>score'");
    }
    dataset.pairs.push_back(
        {fields[0], fields[1], parse_score(fields[2], where)});
  }
  if (dataset.pairs.empty()) throw Error(pairs_path + ": no pairs");

  for (const CrwPair& pair : dataset.pairs) {
    if (dataset.bank.count(pair.rare)) continue;
    std::string path = contexts_dir + "/" + pair.rare + ".txt";
    std::ifstream ctx(path, std::ios::binary);
    if (!ctx) throw Error("cannot open context file " + path);
    std::vector<Sentence> sentences;
    std::string ctx_line;
    std::size_t ctx_lineno = 0;
    while (std::getline(ctx, ctx_line)) {
      ++ctx_lineno;
      if (!ctx_line.empty() && ctx_line.back() == '\r') ctx_line.pop_back();
      if (ctx_line.empty()) continue;
      Sentence tokens = whitespace_tokens(ctx_line);
      if (std::find(tokens.begin(), tokens.end(), kTargetMarker) ==
          tokens.end()) {
        throw Error(path + " line " + std::to_string(ctx_lineno) +
                    ": sentence lacks " + std::string(kTargetMarker));
      }
      sentences.push_back(std::move(tokens));
    }
    if (sentences.empty()) throw Error(path + ": no context sentences");
    dataset.bank.emplace(pair.rare, std::move(sentences));
  }
  return dataset;
}

nlohmann::json EvalReport::to_json() const {
  json j;
  j["method"] = method;
  j["task"] = task;
  j["config"] = config;
  j["per_item"] = per_item;
  j["aggregates"] = aggregates;
  return j;
}

EvalReport EvalReport::from_json(const nlohmann::json& j) {
  EvalReport report;
  report.method = j.at("method").get<std::string>();
  report.task = j.at("task").get<std::string>();
  report.config = j.at("config");
  report.per_item = j.at("per_item");
  report.aggregates = j.at("aggregates");
  if (!report.per_item.is_array() || !report.aggregates.is_object()) {
    throw Error("malformed report");
  }
  return report;
}

void save_report(const EvalReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << report.to_json().dump(2) << '\n';
  if (!out) throw Error("write failed for " + path);
}

EvalReport load_report(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(path + ": " + e.what());
  }
  return EvalReport::from_json(j);
}

EvalReport eval_dn(const Method& method, const DnDataset& dataset,
                   const EmbeddingSpace& space, const EvalOptions& options) {
  for (const DnItem& item : dataset.items) {
    if (!space.contains(item.gold)) {
      throw Error("gold word '" + item.gold + "' missing from the space");
    }
    if (item.episode.sentences.size() != 1) {
      throw Error("item '" + item.gold + "' must have exactly one sentence");
    }
  }

  struct Outcome {
    std::size_t rank = 0;
    bool abstained = false;
  };
  std::vector<Outcome> outcomes(dataset.items.size());
  parallel_for(dataset.items.size(), options.threads, [&](std::size_t i) {
    const DnItem& item = dataset.items[i];
    try {
      std::vector<double> inferred = method(item.episode);
      outcomes[i].rank = rank_of(space, inferred, item.gold);
    } catch (const InferenceError&) {
      outcomes[i].rank = space.size();
      outcomes[i].abstained = true;
    }
  });

  EvalReport report;
  report.method = options.method_id;
  report.task = options.task_id;
  report.config = options.config;
  std::vector<std::size_t> ranks;
  std::size_t abstentions = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    ranks.push_back(outcomes[i].rank);
    if (outcomes[i].abstained) ++abstentions;
    report.per_item.push_back(
        {{"id", dataset.items[i].gold},
         {"rank", outcomes[i].rank},
         {"score", 1.0 / static_cast<double>(outcomes[i].rank)},
         {"abstained", outcomes[i].abstained}});
  }
  RankingSummary summary = ranking_metrics(ranks);
  report.aggregates = {{"mrr", summary.mrr},
                       {"median_rank", summary.median_rank},
                       {"items", dataset.items.size()},
                       {"abstentions", abstentions}};
  return report;
}

EvalReport eval_chimera(const Method& method, const ChimeraDataset& dataset,
                        const EmbeddingSpace& space,
                        const EvalOptions& options) {
  for (const ChimeraTrial& trial : dataset.trials) {
    for (const std::string& probe : trial.probes) {
      if (!space.contains(probe)) {
        throw Error("probe '" + probe + "' missing from the space");
      }
    }
  }

  struct Outcome {
    std::optional<double> rho;
  };
  std::vector<Outcome> outcomes(dataset.trials.size());
  parallel_for(dataset.trials.size(), options.threads, [&](std::size_t i) {
    const ChimeraTrial& trial = dataset.trials[i];
    try {
      std::vector<double> inferred = method(trial.episode);
      std::vector<double> sims;
      sims.reserve(trial.probes.size());
      for (const std::string& probe : trial.probes) {
        sims.push_back(cosine(inferred, space.vector(probe)));
      }
      outcomes[i].rho = spearman(sims, trial.ratings);
    } catch (const Error&) {
      outcomes[i].rho.reset();  // abstention or undefined correlation
    }
  });

  EvalReport report;
  report.method = options.method_id;
  report.task = options.task_id;
  report.config = options.config;
  std::map<int, std::pair<double, std::size_t>> by_l;  // sum, count
  std::size_t dropped = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const ChimeraTrial& trial = dataset.trials[i];
    json entry = {{"id", trial.id}, {"L", trial.num_sentences}};
    if (outcomes[i].rho) {
      entry["score"] = *outcomes[i].rho;
      auto& [sum, count] = by_l[trial.num_sentences];
      sum += *outcomes[i].rho;
      ++count;
    } else {
      entry["score"] = nullptr;
      ++dropped;
    }
    report.per_item.push_back(std::move(entry));
  }
  if (dropped == outcomes.size()) {
    throw Error("every chimera trial was dropped");
  }
  json mean_rho = json::object();
  for (const auto& [l, acc] : by_l) {
    mean_rho[std::to_string(l)] = acc.first / static_cast<double>(acc.second);
  }
  report.aggregates = {{"mean_rho_per_l", mean_rho},
                       {"trials", dataset.trials.size()},
                       {"dropped", dropped}};
  return report;
}

EvalReport eval_crw(const Method& method, const CrwDataset& dataset,
                    const EmbeddingSpace& space, const CrwEvalOptions& crw,
                    const EvalOptions& options) {
  if (crw.ns.empty()) throw Error("eval_crw: no context counts given");
  if (crw.repeats < 1) throw Error("eval_crw: repeats must be >= 1");
  std::size_t max_n = *std::max_element(crw.ns.begin(), crw.ns.end());
  for (const CrwPair& pair : dataset.pairs) {
    if (!space.contains(pair.partner)) {
      throw Error("partner '" + pair.partner + "' missing from the space");
    }
    const auto& bank = dataset.bank.at(pair.rare);
    if (bank.size() < max_n) {
      throw Error("bank for '" + pair.rare + "' holds " +
                  std::to_string(bank.size()) + " sentences, need " +
                  std::to_string(max_n));
    }
  }

  struct Task {
    std::size_t n_index, pair_index;
    int repeat;
  };
  std::vector<Task> tasks;
  for (std::size_t ni = 0; ni < crw.ns.size(); ++ni) {
    for (std::size_t pi = 0; pi < dataset.pairs.size(); ++pi) {
      for (int r = 0; r < crw.repeats; ++r) tasks.push_back({ni, pi, r});
    }
  }
  std::vector<std::optional<double>> systems(tasks.size());
  parallel_for(tasks.size(), options.threads, [&](std::size_t t) {
    const Task& task = tasks[t];
    const CrwPair& pair = dataset.pairs[task.pair_index];
    std::uint64_t episode_seed =
        derive_seed(crw.seed, splitmix64(task.pair_index * 2654435761ULL +
                                         crw.ns[task.n_index]) +
                                  static_cast<std::uint64_t>(task.repeat));
    Episode episode = episode_from_bank(pair.rare, dataset.bank.at(pair.rare),
                                        crw.ns[task.n_index], episode_seed);
    try {
      std::vector<double> inferred = method(episode);
      systems[t] = cosine(inferred, space.vector(pair.partner));
    } catch (const InferenceError&) {
      systems[t].reset();
    }
  });

  EvalReport report;
  report.method = options.method_id;
  report.task = options.task_id;
  report.config = options.config;

  json rho_per_n = json::object();
  json dropped_per_n = json::object();
  for (std::size_t ni = 0; ni < crw.ns.size(); ++ni) {
    std::size_t n = crw.ns[ni];
    double rho_sum = 0;
    std::size_t rho_count = 0;
    std::string rho_error;
    std::size_t dropped = 0;
    for (int r = 0; r < crw.repeats; ++r) {
      std::vector<double> sys, human;
      for (std::size_t t = 0; t < tasks.size(); ++t) {
        if (tasks[t].n_index != ni || tasks[t].repeat != r) continue;
        const CrwPair& pair = dataset.pairs[tasks[t].pair_index];
        json entry = {{"id", pair.rare + "/" + pair.partner},
                      {"n", n},
                      {"repeat", r},
                      {"human", pair.human_score}};
        if (systems[t]) {
          entry["score"] = *systems[t];
          sys.push_back(*systems[t]);
          human.push_back(pair.human_score);
        } else {
          entry["score"] = nullptr;
          ++dropped;
        }
        report.per_item.push_back(std::move(entry));
      }
      try {
        rho_sum += spearman(sys, human);
        ++rho_count;
      } catch (const Error& e) {
        rho_error = e.what();
      }
    }
    std::string key = std::to_string(n);
    rho_per_n[key] = rho_count == 0
                         ? json(nullptr)
                         : json(rho_sum / static_cast<double>(rho_count));
    if (rho_count == 0) rho_per_n[key + "_error"] = rho_error;
    dropped_per_n[key] = dropped;
  }
  report.aggregates = {{"rho_per_n", rho_per_n},
                       {"dropped_per_n", dropped_per_n},
                       {"pairs", dataset.pairs.size()},
                       {"repeats", crw.repeats}};
  return report;
}

std::vector<double> stem_neighbor_proportions(
    const EmbeddingSpace& space, const std::vector<std::string>& test_words,
    std::size_t k_max) {
  if (test_words.empty()) throw Error("no test words given");
  if (k_max < 1) throw Error("k_max must be >= 1");

  std::vector<std::size_t> first_hit(test_words.size(), k_max + 1);
  for (std::size_t i = 0; i < test_words.size(); ++i) {
    const std::string& word = test_words[i];
    auto row = space.row(word);
    if (!row) throw Error("test word '" + word + "' missing from the space");
    std::string stem = snowball_stem(word);
    NeighborList nb = neighbors(space, space.vector(*row), k_max, {word});
    for (std::size_t k = 0; k < nb.size(); ++k) {
      if (snowball_stem(nb[k].word) == stem) {
        first_hit[i] = k + 1;
        break;
      }
    }
  }

  std::vector<double> proportions(k_max, 0.0);
  for (std::size_t k = 1; k <= k_max; ++k) {
    std::size_t hits = 0;
    for (std::size_t h : first_hit) {
      if (h <= k) ++hits;
    }
    proportions[k - 1] =
        static_cast<double>(hits) / static_cast<double>(test_words.size());
  }
  return proportions;
}

std::pair<std::vector<double>, std::vector<double>> paired_scores(
    const EvalReport& a, const EvalReport& b) {
  std::map<std::string, double> scores_b;
  for (const auto& entry : b.per_item) {
    if (entry.contains("score") && entry["score"].is_number()) {
      std::string id = entry["id"].get<std::string>();
      if (entry.contains("n")) {
        id += "#n" + entry["n"].dump() + "r" + entry["repeat"].dump();
      }
      scores_b[id] = entry["score"].get<double>();
    }
  }
  std::vector<double> xs, ys;
  for (const auto& entry : a.per_item) {
    if (!entry.contains("score") || !entry["score"].is_number()) continue;
    std::string id = entry["id"].get<std::string>();
    if (entry.contains("n")) {
      id += "#n" + entry["n"].dump() + "r" + entry["repeat"].dump();
    }
    auto it = scores_b.find(id);
    if (it == scores_b.end()) continue;
    xs.push_back(entry["score"].get<double>());
    ys.push_back(it->second);
  }
  if (xs.empty()) {
    throw Error("reports share no scored items; cannot pair them");
  }
  return {std::move(xs), std::move(ys)};
}

}  // namespace fewvec
