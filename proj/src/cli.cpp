#include "fewvec/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include "fewvec/eval.hpp"
#include "fewvec/methods.hpp"
#include "fewvec/rng.hpp"

namespace fewvec {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

WordSet read_word_list(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open word list " + path);
  WordSet words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) words.insert(line);
  }
  return words;
}

// Shared context-weighting flags for the additive model family.
struct WeightFlags {
  int window = 0;            // 0 disables; 10 is the tuned value
  double subsample_t = 0;    // 0 disables; 1e-5 is the tuned value
  double negative_rate = 0;  // 0 disables; 2 is the tuned value
  std::string subsample_mode = "discard-prob";
  bool keep_stopwords = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--window", window,
                    "window weighting size (0 disables; tuned value 10)");
    cmd->add_option("--subsample-t", subsample_t,
                    "subsample weighting threshold (0 disables; tuned 1e-5)");
    cmd->add_option("--neg-rate", negative_rate,
                    "negative-sample correction rate k (0 disables; tuned 2)");
    cmd->add_option("--subsample-mode", subsample_mode,
                    "subsample weight form: discard-prob or keep-prob")
        ->check(CLI::IsMember({"discard-prob", "keep-prob"}));
    cmd->add_flag("--keep-stopwords", keep_stopwords,
                  "keep stopwords in the additive sum");
  }

  AdditiveOptions to_options() const {
    AdditiveOptions opts;
    opts.drop_stopwords = !keep_stopwords;
    if (window > 0) opts.window = window;
    if (subsample_t > 0) opts.subsample_t = subsample_t;
    if (negative_rate > 0) opts.negative_rate = negative_rate;
    opts.subsample_mode = subsample_mode == "keep-prob"
                              ? SubsampleMode::kKeepProb
                              : SubsampleMode::kDiscardProb;
    return opts;
  }

  json to_json() const {
    return {{"window", window},
            {"subsample_t", subsample_t},
            {"neg_rate", negative_rate},
            {"subsample_mode", subsample_mode},
            {"keep_stopwords", keep_stopwords}};
  }
};

// Skip-gram trainer flags shared by train-background and the
// continued-training eval methods.
struct TrainerFlags {
  double lr = 0.025;
  int window = 5;
  int negatives = 5;
  int epochs = 5;
  double subsample_t = 1e-5;
  std::int64_t min_count = 50;
  std::size_t dim = 300;
  std::size_t buckets = 100000;
  double nonce_rate = 1.0;
  double nonce_decay = 0.99;
  int nonce_window = 15;
  int nonce_negatives = 3;
  int nonce_epochs = 1;

  void attach(CLI::App* cmd, bool background) {
    cmd->add_option("--lr", lr, "initial learning rate");
    cmd->add_option("--train-window", window, "skip-gram window size");
    cmd->add_option("--negatives", negatives, "negative samples per pair");
    cmd->add_option("--train-epochs", epochs, "training epochs");
    cmd->add_option("--train-subsample-t", subsample_t,
                    "trainer subsampling threshold (<= 0 disables)");
    if (background) {
      cmd->add_option("--min-count", min_count, "vocabulary frequency cutoff");
      cmd->add_option("--dim", dim, "embedding dimension");
      cmd->add_option("--buckets", buckets, "n-gram hash buckets");
    } else {
      cmd->add_option("--nonce-rate", nonce_rate, "nonce schedule start rate");
      cmd->add_option("--nonce-decay", nonce_decay,
                      "nonce per-token decay factor in (0, 1]");
      cmd->add_option("--nonce-window", nonce_window, "nonce window size");
      cmd->add_option("--nonce-negatives", nonce_negatives,
                      "nonce negative samples");
      cmd->add_option("--nonce-epochs", nonce_epochs, "nonce epochs");
    }
  }

  TrainParams to_params() const {
    TrainParams params;
    params.learning_rate = lr;
    params.window = window;
    params.negatives = negatives;
    params.epochs = epochs;
    params.subsample_t = subsample_t;
    params.min_count = min_count;
    params.dim = dim;
    params.ngram_buckets = buckets;
    params.nonce = {nonce_rate, nonce_decay, nonce_window, nonce_negatives,
                    nonce_epochs};
    return params;
  }

  json to_json(bool background) const {
    json j = {{"lr", lr},
              {"train_window", window},
              {"negatives", negatives},
              {"train_epochs", epochs},
              {"train_subsample_t", subsample_t}};
    if (background) {
      j["min_count"] = min_count;
      j["dim"] = dim;
      j["buckets"] = buckets;
    } else {
      j["nonce_rate"] = nonce_rate;
      j["nonce_decay"] = nonce_decay;
      j["nonce_window"] = nonce_window;
      j["nonce_negatives"] = nonce_negatives;
      j["nonce_epochs"] = nonce_epochs;
    }
    return j;
  }
};

struct EvalArgs {
  std::string task;
  std::string method;
  std::string embeddings;
  std::string counts;
  std::vector<std::string> data;
  std::string contexts_dir;
  std::string model_path;
  std::string output_vectors;
  std::string ngram_vectors;
  std::string stopword_file;
  std::string exclude_negatives_file;
  std::string ns_spec = "1,2,4,8,16,32,64";
  int repeats = 1;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out;
  WeightFlags weights;
  TrainerFlags trainer;
};

bool is_chimera_task(const std::string& task) {
  return task == "chimera" || task == "full-chimera";
}
bool is_crw_task(const std::string& task) {
  return task == "crw" || task == "filtered-crw";
}
bool is_dn_task(const std::string& task) {
  return task == "dn" || task == "filtered-dn";
}
bool is_filtered_task(const std::string& task) {
  return task == "filtered-dn" || task == "filtered-crw";
}

std::vector<std::size_t> parse_ns(const std::string& spec) {
  std::vector<std::size_t> ns;
  std::size_t start = 0;
  while (start <= spec.size()) {
    std::size_t pos = spec.find(',', start);
    std::string piece = spec.substr(
        start, pos == std::string::npos ? std::string::npos : pos - start);
    if (!piece.empty()) {
      std::size_t value = std::stoull(piece);
      if (value < 1) throw Error("context counts must be >= 1");
      ns.push_back(value);
    }
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  if (ns.empty()) throw Error("empty --ns list");
  return ns;
}

std::vector<std::string> validate_eval_args(const EvalArgs& a) {
  std::vector<std::string> errors;
  auto need_file = [&errors](const std::string& path, const std::string& what) {
    if (path.empty()) {
      errors.push_back("missing " + what);
    } else if (!fs::exists(path)) {
      errors.push_back(what + " '" + path + "' does not exist");
    }
  };

  if (!is_known_method(a.method)) {
    errors.push_back("unknown method '" + a.method + "'");
  }
  const auto& tasks = task_ids();
  if (std::find(tasks.begin(), tasks.end(), a.task) == tasks.end()) {
    errors.push_back("unknown task '" + a.task + "'");
  }
  for (const std::string& rule : validate_method_task(a.method, a.task)) {
    errors.push_back(rule);
  }

  need_file(a.embeddings, "embeddings file");
  need_file(a.counts, "counts file");
  if (a.data.empty()) {
    errors.push_back("missing --data");
  } else {
    for (const std::string& d : a.data) need_file(d, "dataset file");
  }
  if (!is_chimera_task(a.task) && a.data.size() > 1) {
    errors.push_back("task '" + a.task + "' takes a single --data file");
  }
  if (is_crw_task(a.task)) {
    if (a.contexts_dir.empty()) {
      errors.push_back("crw tasks need --contexts");
    } else if (!fs::is_directory(a.contexts_dir)) {
      errors.push_back("contexts directory '" + a.contexts_dir +
                       "' does not exist");
    }
  }

  bool needs_model = a.method == "alc" || a.method == "alc-neural" ||
                     a.method == "form" || a.method == "fcm" ||
                     a.method == "fcm-neural";
  if (needs_model) need_file(a.model_path, "--model file for " + a.method);
  if (method_needs_sgns(a.method)) {
    need_file(a.output_vectors, "--output-vectors file for " + a.method);
  }
  if (method_needs_subwords(a.method)) {
    need_file(a.ngram_vectors, "--ngram-vectors file for " + a.method);
  }
  if (!a.stopword_file.empty()) need_file(a.stopword_file, "stopword file");
  if (!a.exclude_negatives_file.empty()) {
    need_file(a.exclude_negatives_file, "exclude-negatives file");
  }
  if (a.out.empty()) errors.push_back("missing --out");
  if (a.threads < 1) errors.push_back("--threads must be >= 1");
  if (a.repeats < 1) errors.push_back("--repeats must be >= 1");
  if (is_crw_task(a.task)) {
    try {
      parse_ns(a.ns_spec);
    } catch (const std::exception& e) {
      errors.push_back(std::string("bad --ns: ") + e.what());
    }
  }
  return errors;
}

json eval_config_json(const EvalArgs& a) {
  json j = {{"task", a.task},
            {"method", a.method},
            {"embeddings", a.embeddings},
            {"counts", a.counts},
            {"data", a.data},
            {"seed", a.seed},
            {"threads", a.threads},
            {"weights", a.weights.to_json()},
            {"stopwords", a.stopword_file.empty() ? "builtin" : a.stopword_file}};
  if (!a.model_path.empty()) j["model"] = a.model_path;
  if (!a.output_vectors.empty()) j["output_vectors"] = a.output_vectors;
  if (!a.ngram_vectors.empty()) j["ngram_vectors"] = a.ngram_vectors;
  if (!a.contexts_dir.empty()) j["contexts"] = a.contexts_dir;
  if (is_crw_task(a.task)) {
    j["ns"] = a.ns_spec;
    j["repeats"] = a.repeats;
  }
  if (method_needs_sgns(a.method)) {
    j["trainer"] = a.trainer.to_json(false);
    if (!a.exclude_negatives_file.empty()) {
      j["exclude_negatives"] = a.exclude_negatives_file;
    }
  }
  return j;
}

// Target words of the loaded dataset; they drive the stem method's
// exclusion set and the selective trainers' negative exclusions.
WordSet dataset_targets(const EvalArgs& a) {
  WordSet targets;
  if (is_dn_task(a.task)) {
    DnDataset ds = load_dn(a.data[0]);
    for (const DnItem& item : ds.items) targets.insert(item.gold);
  } else if (is_chimera_task(a.task)) {
    ChimeraDataset ds = load_chimera(a.data);
    for (const ChimeraTrial& t : ds.trials) targets.insert(t.id);
  } else {
    CrwDataset ds = load_crw(a.data[0], a.contexts_dir);
    for (const CrwPair& p : ds.pairs) targets.insert(p.rare);
  }
  return targets;
}

int run_eval(const EvalArgs& a) {
  auto errors = validate_eval_args(a);
  if (!errors.empty()) {
    for (const std::string& e : errors) std::cerr << "error: " << e << '\n';
    return 1;
  }

  MethodContext context;
  context.seed = a.seed;
  context.additive = a.weights.to_options();

  // Load phase: failures here are configuration problems.
  try {
    context.space = std::make_shared<EmbeddingSpace>(
        load_space(a.embeddings, a.counts));
    context.stopwords = std::make_shared<StopwordSet>(
        a.stopword_file.empty() ? StopwordSet::builtin_english()
                                : StopwordSet::from_file(a.stopword_file));
    if (context.additive.negative_rate.value_or(0.0) != 0.0) {
      std::vector<std::string> words = context.space->words();
      std::vector<std::int64_t> counts;
      counts.reserve(words.size());
      for (std::size_t r = 0; r < context.space->size(); ++r) {
        counts.push_back(context.space->count(r));
      }
      NegativeDistribution dist(std::move(words), counts);
      context.negative_vector = std::make_shared<const std::vector<double>>(
          expected_negative_vector(*context.space, dist));
    }
    if (a.method == "alc" || a.method == "alc-neural") {
      context.transform = std::make_shared<const ContextTransform>(
          load_context_transform(a.model_path));
    } else if (a.method == "form") {
      context.form =
          std::make_shared<const FormModel>(load_form_model(a.model_path));
    } else if (a.method == "fcm" || a.method == "fcm-neural") {
      context.fcm = std::make_shared<const FcmModel>(load_fcm(a.model_path));
    } else if (a.method == "stem") {
      context.stems = std::make_shared<const StemIndex>(
          build_stem_index(context.space->words()));
      context.stem_excluded =
          std::make_shared<const WordSet>(dataset_targets(a));
    }
    if (method_needs_sgns(a.method)) {
      LabelledMatrix output = load_labelled_matrix(a.output_vectors);
      std::optional<LabelledMatrix> ngrams;
      if (!a.ngram_vectors.empty()) {
        ngrams = load_labelled_matrix(a.ngram_vectors);
      }
      context.sgns = std::make_shared<const SgnsModel>(make_sgns_model(
          *context.space, &output, ngrams ? &*ngrams : nullptr));
      context.train = a.trainer.to_params();
      context.train.seed = a.seed;
      bool selective = a.method == "w2v-selective" ||
                       a.method == "fasttext-selective" ||
                       a.method == "nonce2vec";
      if (selective) {
        WordSet excluded = dataset_targets(a);
        if (!a.exclude_negatives_file.empty()) {
          for (const std::string& w :
               read_word_list(a.exclude_negatives_file)) {
            excluded.insert(w);
          }
        }
        context.train.excluded_negatives = std::move(excluded);
      } else if (!a.exclude_negatives_file.empty()) {
        context.train.excluded_negatives =
            read_word_list(a.exclude_negatives_file);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    Method method = make_method(a.method, context);
    EvalOptions options;
    options.method_id = a.method;
    options.task_id = a.task;
    options.config = eval_config_json(a);
    options.threads = a.threads;

    EvalReport report;
    if (is_dn_task(a.task)) {
      report = eval_dn(method, load_dn(a.data[0]), *context.space, options);
    } else if (is_chimera_task(a.task)) {
      report =
          eval_chimera(method, load_chimera(a.data), *context.space, options);
    } else {
      CrwEvalOptions crw;
      crw.ns = parse_ns(a.ns_spec);
      crw.seed = a.seed;
      crw.repeats = a.repeats;
      report = eval_crw(method, load_crw(a.data[0], a.contexts_dir),
                        *context.space, crw, options);
    }
    save_report(report, a.out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

int wrap_run(const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace

const std::vector<std::string>& task_ids() {
  static const std::vector<std::string> ids = {
      "dn", "filtered-dn", "chimera", "full-chimera", "crw", "filtered-crw",
  };
  return ids;
}

std::vector<std::string> validate_method_task(const std::string& method,
                                              const std::string& task) {
  std::vector<std::string> errors;
  if (method_is_form_only(method) && is_chimera_task(task)) {
    errors.push_back("form-based method '" + method +
                     "' is not evaluated on the chimera tasks");
  }
  if (method == "stem" && is_filtered_task(task)) {
    errors.push_back(
        "the stem method is not compatible with the filtered tasks");
  }
  return errors;
}

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"few-shot word vector toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "config file (INI sections per subcommand)");

  // ---- train-background ----------------------------------------------
  auto* train_cmd =
      app.add_subcommand("train-background", "train a skip-gram model");
  struct {
    std::string corpus, out_vectors, out_counts, out_output, out_ngrams;
    std::string mode = "standard";
    std::uint64_t seed = 1;
    int threads = 1;
  } train_args;
  TrainerFlags train_flags;
  train_cmd->add_option("--corpus", train_args.corpus, "corpus file")
      ->required();
  train_cmd->add_option("--out-vectors", train_args.out_vectors, "output path")
      ->required();
  train_cmd->add_option("--out-counts", train_args.out_counts, "output path")
      ->required();
  train_cmd
      ->add_option("--out-output-vectors", train_args.out_output,
                   "sidecar path for output vectors")
      ->required();
  train_cmd->add_option("--out-ngram-vectors", train_args.out_ngrams,
                        "sidecar path for the n-gram bucket table");
  train_cmd->add_option("--mode", train_args.mode, "standard or fasttext")
      ->check(CLI::IsMember({"standard", "fasttext"}));
  train_cmd->add_option("--seed", train_args.seed, "random seed");
  train_cmd->add_option("--threads", train_args.threads,
                        "worker threads (1 = deterministic)");
  train_flags.attach(train_cmd, true);

  // ---- filter-corpus --------------------------------------------------
  auto* filter_cmd = app.add_subcommand(
      "filter-corpus", "drop tokens stem-matching a test-word list");
  struct {
    std::string corpus, test_words, keep_words, out, stats_out;
    bool quiet = false;
  } filter_args;
  filter_cmd->add_option("--corpus", filter_args.corpus, "corpus file")
      ->required();
  filter_cmd
      ->add_option("--test-words", filter_args.test_words,
                   "file with one test word per line")
      ->required();
  filter_cmd->add_option("--keep-words", filter_args.keep_words,
                         "words kept verbatim even when stem-matched");
  filter_cmd->add_option("--out", filter_args.out, "filtered corpus path")
      ->required();
  filter_cmd->add_option("--stats-out", filter_args.stats_out,
                         "optional JSON stats path");
  filter_cmd->add_flag("--quiet", filter_args.quiet, "suppress the stats line");

  // ---- stem-analysis --------------------------------------------------
  auto* stem_cmd = app.add_subcommand(
      "stem-analysis", "same-stem nearest-neighbour proportions");
  struct {
    std::string embeddings, counts, test_words, out;
    std::size_t k_max = 20;
  } stem_args;
  stem_cmd->add_option("--embeddings", stem_args.embeddings, "vectors file")
      ->required();
  stem_cmd->add_option("--counts", stem_args.counts, "counts file")->required();
  stem_cmd->add_option("--test-words", stem_args.test_words, "word list file")
      ->required();
  stem_cmd->add_option("--k-max", stem_args.k_max, "largest k");
  stem_cmd->add_option("--out", stem_args.out, "JSON output path")->required();

  // ---- fit-alc ---------------------------------------------------------
  auto* alc_cmd = app.add_subcommand(
      "fit-alc", "fit the context transform (linear or neural)");
  struct {
    std::string corpus, embeddings, counts, stopword_file, out;
    std::int64_t min_count = 50;
    double ridge = 1e-8;
    bool neural = false;
    std::size_t hidden = 1000;
    int epochs = 100;
    std::size_t batch_size = 64;
    double adam_rate = 0.001;
    std::uint64_t seed = 1;
  } alc_args;
  WeightFlags alc_weights;
  alc_cmd->add_option("--corpus", alc_args.corpus, "corpus file")->required();
  alc_cmd->add_option("--embeddings", alc_args.embeddings, "vectors file")
      ->required();
  alc_cmd->add_option("--counts", alc_args.counts, "counts file")->required();
  alc_cmd->add_option("--stopwords", alc_args.stopword_file, "stopword file");
  alc_cmd->add_option("--min-count", alc_args.min_count, "pair cutoff");
  alc_cmd->add_option("--ridge", alc_args.ridge, "ridge strength");
  alc_cmd->add_flag("--neural", alc_args.neural, "fit an mlp instead");
  alc_cmd->add_option("--hidden", alc_args.hidden, "mlp hidden units");
  alc_cmd->add_option("--epochs", alc_args.epochs, "mlp training epochs");
  alc_cmd->add_option("--batch-size", alc_args.batch_size, "mlp batch size");
  alc_cmd->add_option("--adam-rate", alc_args.adam_rate, "mlp adam rate");
  alc_cmd->add_option("--seed", alc_args.seed, "random seed");
  alc_cmd->add_option("--out", alc_args.out, "model output path")->required();
  alc_weights.attach(alc_cmd);

  // ---- fit-form --------------------------------------------------------
  auto* form_cmd =
      app.add_subcommand("fit-form", "fit the character n-gram form model");
  struct {
    std::string embeddings, counts, out;
    std::int64_t min_count = 50;
    int epochs = 200;
    std::size_t batch_size = 64;
    double adam_rate = 0.05;
    int ngram_min = 3, ngram_max = 5;
    std::uint64_t seed = 1;
  } form_args;
  form_cmd->add_option("--embeddings", form_args.embeddings, "vectors file")
      ->required();
  form_cmd->add_option("--counts", form_args.counts, "counts file")->required();
  form_cmd->add_option("--min-count", form_args.min_count, "training cutoff");
  form_cmd->add_option("--epochs", form_args.epochs, "training epochs");
  form_cmd->add_option("--batch-size", form_args.batch_size, "batch size");
  form_cmd->add_option("--adam-rate", form_args.adam_rate, "adam rate");
  form_cmd->add_option("--ngram-min", form_args.ngram_min, "shortest n-gram");
  form_cmd->add_option("--ngram-max", form_args.ngram_max, "longest n-gram");
  form_cmd->add_option("--seed", form_args.seed, "random seed");
  form_cmd->add_option("--out", form_args.out, "model output path")->required();

  // ---- fit-fcm ---------------------------------------------------------
  auto* fcm_cmd = app.add_subcommand(
      "fit-fcm", "fit the form/context combination gate");
  struct {
    std::string corpus, embeddings, counts, stopword_file;
    std::string form_path, context_path, out;
    std::string gate = "gated";
    std::int64_t min_count = 50;
    int epochs = 2000;
    double adam_rate = 0.05;
    std::uint64_t seed = 1;
  } fcm_args;
  WeightFlags fcm_weights;
  fcm_cmd->add_option("--corpus", fcm_args.corpus, "corpus file")->required();
  fcm_cmd->add_option("--embeddings", fcm_args.embeddings, "vectors file")
      ->required();
  fcm_cmd->add_option("--counts", fcm_args.counts, "counts file")->required();
  fcm_cmd->add_option("--stopwords", fcm_args.stopword_file, "stopword file");
  fcm_cmd->add_option("--form", fcm_args.form_path, "fitted form model")
      ->required();
  fcm_cmd
      ->add_option("--context", fcm_args.context_path,
                   "fitted context transform (linear or mlp)")
      ->required();
  fcm_cmd->add_option("--gate", fcm_args.gate, "fixed or gated")
      ->check(CLI::IsMember({"fixed", "gated"}));
  fcm_cmd->add_option("--min-count", fcm_args.min_count, "pair cutoff");
  fcm_cmd->add_option("--epochs", fcm_args.epochs, "gate training epochs");
  fcm_cmd->add_option("--adam-rate", fcm_args.adam_rate, "gate adam rate");
  fcm_cmd->add_option("--seed", fcm_args.seed, "random seed");
  fcm_cmd->add_option("--out", fcm_args.out, "model output path")->required();
  fcm_weights.attach(fcm_cmd);

  // ---- infer -----------------------------------------------------------
  auto* infer_cmd =
      app.add_subcommand("infer", "infer vectors for an episode file");
  EvalArgs infer_args;
  std::string episodes_path;
  infer_cmd->add_option("--method", infer_args.method, "method id")->required();
  infer_cmd->add_option("--embeddings", infer_args.embeddings, "vectors file")
      ->required();
  infer_cmd->add_option("--counts", infer_args.counts, "counts file")
      ->required();
  infer_cmd->add_option("--episodes", episodes_path, "episode TSV")->required();
  infer_cmd->add_option("--model", infer_args.model_path, "fitted model file");
  infer_cmd->add_option("--output-vectors", infer_args.output_vectors,
                        "sidecar for continued-training methods");
  infer_cmd->add_option("--ngram-vectors", infer_args.ngram_vectors,
                        "n-gram sidecar for the subword methods");
  infer_cmd->add_option("--stopwords", infer_args.stopword_file,
                        "stopword file");
  infer_cmd->add_option("--exclude-negatives",
                        infer_args.exclude_negatives_file,
                        "words never drawn as negative samples");
  infer_cmd->add_option("--seed", infer_args.seed, "random seed");
  infer_cmd->add_option("--out", infer_args.out, "inferred vectors path")
      ->required();
  infer_args.weights.attach(infer_cmd);
  infer_args.trainer.attach(infer_cmd, false);

  // ---- eval ------------------------------------------------------------
  auto* eval_cmd = app.add_subcommand("eval", "run one (method, task) pair");
  EvalArgs eval_args;
  eval_cmd->add_option("--task", eval_args.task, "task id")->required();
  eval_cmd->add_option("--method", eval_args.method, "method id")->required();
  eval_cmd->add_option("--embeddings", eval_args.embeddings, "vectors file")
      ->required();
  eval_cmd->add_option("--counts", eval_args.counts, "counts file")->required();
  eval_cmd
      ->add_option("--data", eval_args.data,
                   "dataset file (repeatable for the chimera tasks)")
      ->required();
  eval_cmd->add_option("--contexts", eval_args.contexts_dir,
                       "context sentence directory (crw tasks)");
  eval_cmd->add_option("--model", eval_args.model_path, "fitted model file");
  eval_cmd->add_option("--output-vectors", eval_args.output_vectors,
                       "sidecar for continued-training methods");
  eval_cmd->add_option("--ngram-vectors", eval_args.ngram_vectors,
                       "n-gram sidecar for the subword methods");
  eval_cmd->add_option("--stopwords", eval_args.stopword_file, "stopword file");
  eval_cmd->add_option("--exclude-negatives",
                       eval_args.exclude_negatives_file,
                       "extra words never drawn as negative samples");
  eval_cmd->add_option("--ns", eval_args.ns_spec,
                       "comma-separated context counts (crw tasks)");
  eval_cmd->add_option("--repeats", eval_args.repeats,
                       "episode redraws per (word, n)");
  eval_cmd->add_option("--seed", eval_args.seed, "random seed");
  eval_cmd->add_option("--threads", eval_args.threads, "evaluation workers");
  eval_cmd->add_option("--out", eval_args.out, "report path")->required();
  eval_args.weights.attach(eval_cmd);
  eval_args.trainer.attach(eval_cmd, false);

  // ---- perm-test -------------------------------------------------------
  auto* perm_cmd = app.add_subcommand(
      "perm-test", "paired sign-flip permutation test over two reports");
  struct {
    std::string a, b;
    int iterations = 10000;
    std::uint64_t seed = 1;
  } perm_args;
  perm_cmd->add_option("--a", perm_args.a, "first report")->required();
  perm_cmd->add_option("--b", perm_args.b, "second report")->required();
  perm_cmd->add_option("--iters", perm_args.iterations, "permutations");
  perm_cmd->add_option("--seed", perm_args.seed, "random seed");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    std::cerr << app.help() << '\n';
    return 1;
  }

  if (train_cmd->parsed()) {
    return wrap_run([&] {
      TrainParams params = train_flags.to_params();
      params.seed = train_args.seed;
      params.threads = train_args.threads;
      params.mode = train_args.mode == "fasttext" ? TrainMode::kFastText
                                                  : TrainMode::kStandard;
      if (params.mode == TrainMode::kFastText && train_args.out_ngrams.empty()) {
        throw Error("fasttext mode needs --out-ngram-vectors");
      }
      SgnsModel model = train_background(load_corpus(train_args.corpus), params);
      save_sgns_model(model, train_args.out_vectors, train_args.out_counts,
                      train_args.out_output, train_args.out_ngrams);
    });
  }

  if (filter_cmd->parsed()) {
    return wrap_run([&] {
      SentenceStream corpus = load_corpus(filter_args.corpus);
      WordSet tests = read_word_list(filter_args.test_words);
      WordSet keep;
      if (!filter_args.keep_words.empty()) {
        keep = read_word_list(filter_args.keep_words);
      }
      auto [filtered, stats] = filter_corpus(corpus, tests, keep);
      save_corpus(filtered, filter_args.out);
      if (!filter_args.quiet) {
        std::cerr << "removed " << stats.tokens_removed << " of "
                  << stats.tokens_total << " tokens ("
                  << format_double(100.0 * stats.removed_fraction())
                  << "%)\n";
      }
      if (!filter_args.stats_out.empty()) {
        json j = {{"tokens_total", stats.tokens_total},
                  {"tokens_removed", stats.tokens_removed},
                  {"removed_fraction", stats.removed_fraction()}};
        std::ofstream out(filter_args.stats_out, std::ios::binary);
        if (!out) throw Error("cannot write " + filter_args.stats_out);
        out << j.dump(2) << '\n';
      }
    });
  }

  if (stem_cmd->parsed()) {
    return wrap_run([&] {
      EmbeddingSpace space = load_space(stem_args.embeddings, stem_args.counts);
      WordSet tests = read_word_list(stem_args.test_words);
      std::vector<std::string> ordered(tests.begin(), tests.end());
      std::sort(ordered.begin(), ordered.end());
      std::vector<double> proportions =
          stem_neighbor_proportions(space, ordered, stem_args.k_max);
      json per_k = json::object();
      for (std::size_t k = 1; k <= proportions.size(); ++k) {
        per_k[std::to_string(k)] = proportions[k - 1];
      }
      json j = {{"proportions", per_k},
                {"k_max", stem_args.k_max},
                {"test_words", ordered.size()}};
      std::ofstream out(stem_args.out, std::ios::binary);
      if (!out) throw Error("cannot write " + stem_args.out);
      out << j.dump(2) << '\n';
    });
  }

  if (alc_cmd->parsed()) {
    return wrap_run([&] {
      EmbeddingSpace space = load_space(alc_args.embeddings, alc_args.counts);
      StopwordSet stops = alc_args.stopword_file.empty()
                              ? StopwordSet::builtin_english()
                              : StopwordSet::from_file(alc_args.stopword_file);
      AdditiveOptions opts = alc_weights.to_options();
      std::vector<double> neg_vector;
      const std::vector<double>* neg = nullptr;
      if (opts.negative_rate.value_or(0.0) != 0.0) {
        std::vector<std::int64_t> counts;
        for (std::size_t r = 0; r < space.size(); ++r) {
          counts.push_back(space.count(r));
        }
        NegativeDistribution dist(space.words(), counts);
        neg_vector = expected_negative_vector(space, dist);
        neg = &neg_vector;
      }
      TrainingPairSet pairs =
          build_training_pairs(load_corpus(alc_args.corpus), space, opts,
                               stops, alc_args.min_count, neg);
      if (alc_args.neural) {
        Mlp mlp = Mlp::init(space.dim(), alc_args.hidden, space.dim(),
                            derive_seed(alc_args.seed, 0xa1c));
        std::vector<TrainSample> samples;
        samples.reserve(pairs.size());
        for (const TrainingPair& p : pairs) {
          samples.push_back({p.context_sum, p.gold});
        }
        MlpTrainOptions train_options;
        train_options.epochs = alc_args.epochs;
        train_options.batch_size = alc_args.batch_size;
        train_options.seed = alc_args.seed;
        train_options.adam.rate = alc_args.adam_rate;
        save_mlp(train_mlp(std::move(mlp), samples, train_options),
                 alc_args.out);
      } else {
        save_linear_map(fit_alc_linear(pairs, alc_args.ridge), alc_args.out);
      }
    });
  }

  if (form_cmd->parsed()) {
    return wrap_run([&] {
      EmbeddingSpace space = load_space(form_args.embeddings, form_args.counts);
      FormTrainOptions options;
      options.min_count = form_args.min_count;
      options.epochs = form_args.epochs;
      options.batch_size = form_args.batch_size;
      options.adam.rate = form_args.adam_rate;
      options.ngram_min = form_args.ngram_min;
      options.ngram_max = form_args.ngram_max;
      options.seed = form_args.seed;
      save_form_model(fit_form_model(space, options), form_args.out);
    });
  }

  if (fcm_cmd->parsed()) {
    return wrap_run([&] {
      EmbeddingSpace space = load_space(fcm_args.embeddings, fcm_args.counts);
      StopwordSet stops = fcm_args.stopword_file.empty()
                              ? StopwordSet::builtin_english()
                              : StopwordSet::from_file(fcm_args.stopword_file);
      AdditiveOptions opts = fcm_weights.to_options();
      std::vector<double> neg_vector;
      const std::vector<double>* neg = nullptr;
      if (opts.negative_rate.value_or(0.0) != 0.0) {
        std::vector<std::int64_t> counts;
        for (std::size_t r = 0; r < space.size(); ++r) {
          counts.push_back(space.count(r));
        }
        NegativeDistribution dist(space.words(), counts);
        neg_vector = expected_negative_vector(space, dist);
        neg = &neg_vector;
      }
      FormModel form = load_form_model(fcm_args.form_path);
      ContextTransform context = load_context_transform(fcm_args.context_path);
      if (form.dim != space.dim() || transform_dim(context) != space.dim()) {
        throw Error("model dimensions do not match the embedding space");
      }
      TrainingPairSet pairs =
          build_training_pairs(load_corpus(fcm_args.corpus), space, opts,
                               stops, fcm_args.min_count, neg);
      GateTrainOptions gate_options;
      gate_options.epochs = fcm_args.epochs;
      gate_options.adam.rate = fcm_args.adam_rate;
      gate_options.seed = fcm_args.seed;
      FcmModel model = fit_fcm(
          pairs, std::move(form), std::move(context),
          fcm_args.gate == "fixed" ? GateMode::kFixed : GateMode::kGated,
          gate_options);
      save_fcm(model, fcm_args.out);
    });
  }

  if (infer_cmd->parsed()) {
    infer_args.task = "dn";  // inference has no task; skip task validation
    auto errors = validate_eval_args(infer_args);
    // --data/--out checks do not apply to infer; filter them out.
    std::vector<std::string> relevant;
    for (const std::string& e : errors) {
      if (e.find("--data") == std::string::npos &&
          e.find("dataset") == std::string::npos) {
        relevant.push_back(e);
      }
    }
    if (!relevant.empty()) {
      for (const std::string& e : relevant) std::cerr << "error: " << e << '\n';
      return 1;
    }
    return wrap_run([&] {
      MethodContext context;
      context.seed = infer_args.seed;
      context.additive = infer_args.weights.to_options();
      context.space = std::make_shared<EmbeddingSpace>(
          load_space(infer_args.embeddings, infer_args.counts));
      context.stopwords = std::make_shared<StopwordSet>(
          infer_args.stopword_file.empty()
              ? StopwordSet::builtin_english()
              : StopwordSet::from_file(infer_args.stopword_file));
      if (context.additive.negative_rate.value_or(0.0) != 0.0) {
        std::vector<std::int64_t> counts;
        for (std::size_t r = 0; r < context.space->size(); ++r) {
          counts.push_back(context.space->count(r));
        }
        NegativeDistribution dist(context.space->words(), counts);
        context.negative_vector = std::make_shared<const std::vector<double>>(
            expected_negative_vector(*context.space, dist));
      }
      if (infer_args.method == "alc" || infer_args.method == "alc-neural") {
        context.transform = std::make_shared<const ContextTransform>(
            load_context_transform(infer_args.model_path));
      } else if (infer_args.method == "form") {
        context.form = std::make_shared<const FormModel>(
            load_form_model(infer_args.model_path));
      } else if (infer_args.method == "fcm" ||
                 infer_args.method == "fcm-neural") {
        context.fcm =
            std::make_shared<const FcmModel>(load_fcm(infer_args.model_path));
      } else if (infer_args.method == "stem") {
        context.stems = std::make_shared<const StemIndex>(
            build_stem_index(context.space->words()));
      }
      if (method_needs_sgns(infer_args.method)) {
        LabelledMatrix output = load_labelled_matrix(infer_args.output_vectors);
        std::optional<LabelledMatrix> ngrams;
        if (!infer_args.ngram_vectors.empty()) {
          ngrams = load_labelled_matrix(infer_args.ngram_vectors);
        }
        context.sgns = std::make_shared<const SgnsModel>(make_sgns_model(
            *context.space, &output, ngrams ? &*ngrams : nullptr));
        context.train = infer_args.trainer.to_params();
        context.train.seed = infer_args.seed;
        if (!infer_args.exclude_negatives_file.empty()) {
          context.train.excluded_negatives =
              read_word_list(infer_args.exclude_negatives_file);
        }
      }
      Method method = make_method(infer_args.method, context);

      LabelledMatrix result;
      result.cols = context.space->dim();
      for (const Episode& episode : load_episode_file(episodes_path)) {
        try {
          std::vector<double> v = method(episode);
          result.labels.push_back(episode.target);
          result.values.insert(result.values.end(), v.begin(), v.end());
        } catch (const InferenceError& e) {
          std::cerr << "abstained on '" << episode.target << "': " << e.what()
                    << '\n';
        }
      }
      save_labelled_matrix(result, infer_args.out);
    });
  }

  if (eval_cmd->parsed()) {
    return run_eval(eval_args);
  }

  if (perm_cmd->parsed()) {
    return wrap_run([&] {
      EvalReport a = load_report(perm_args.a);
      EvalReport b = load_report(perm_args.b);
      auto [xs, ys] = paired_scores(a, b);
      double p = permutation_test(xs, ys, perm_args.iterations, perm_args.seed);
      std::cerr << "paired items: " << xs.size() << '\n';
      std::cout << "p=" << format_double(p) << '\n';
    });
  }

  std::cerr << "error: no subcommand given\n" << app.help() << '\n';
  return 1;
}

}  // namespace fewvec
