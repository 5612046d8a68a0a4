// Text persistence for fitted models. A model file is a "#model <kind>"
// line, optional "#meta <key> <value>" lines, then named sections:
//   #section <name> <rows> <cols>
// followed by one labelled row per line in the embedding text format.

#include <charconv>
#include <fstream>
#include <map>

#include "fewvec/fewshot.hpp"

namespace fewvec {

namespace {

struct Section {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::string> labels;
  std::vector<double> values;

  std::span<const double> row(std::size_t r) const {
    return {values.data() + r * cols, cols};
  }
};

struct ModelFile {
  std::string kind;
  std::map<std::string, std::string> meta;
  std::vector<Section> sections;

  const Section& get(const std::string& name) const {
    for (const Section& s : sections) {
      if (s.name == name) return s;
    }
    throw Error("model file lacks section '" + name + "'");
  }
  bool has(const std::string& name) const {
    for (const Section& s : sections) {
      if (s.name == name) return true;
    }
    return false;
  }
  std::int64_t meta_int(const std::string& key) const {
    auto it = meta.find(key);
    if (it == meta.end()) throw Error("model file lacks meta key " + key);
    return std::stoll(it->second);
  }
};

std::vector<std::string> fields_of(const std::string& line) {
  std::vector<std::string> out;
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

ModelFile read_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file " + path);
  ModelFile file;
  std::string line;
  Section* current = nullptr;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = fields_of(line);
    std::string where = path + " line " + std::to_string(lineno);
    if (fields[0] == "#model") {
      if (fields.size() != 2) throw Error(where + ": bad #model line");
      file.kind = fields[1];
    } else if (fields[0] == "#meta") {
      if (fields.size() != 3) throw Error(where + ": bad #meta line");
      file.meta[fields[1]] = fields[2];
    } else if (fields[0] == "#section") {
      if (fields.size() != 4) throw Error(where + ": bad #section line");
      Section s;
      s.name = fields[1];
      s.rows = std::stoull(fields[2]);
      s.cols = std::stoull(fields[3]);
      s.labels.reserve(s.rows);
      s.values.reserve(s.rows * s.cols);
      file.sections.push_back(std::move(s));
      current = &file.sections.back();
    } else {
      if (!current) throw Error(where + ": row outside any section");
      if (fields.size() != current->cols + 1) {
        throw Error(where + ": expected " + std::to_string(current->cols) +
                    " values");
      }
      current->labels.push_back(fields[0]);
      for (std::size_t i = 1; i < fields.size(); ++i) {
        double v = 0;
        auto [ptr, ec] = std::from_chars(
            fields[i].data(), fields[i].data() + fields[i].size(), v);
        if (ec != std::errc() || ptr != fields[i].data() + fields[i].size()) {
          throw Error(where + ": bad number '" + fields[i] + "'");
        }
        current->values.push_back(v);
      }
    }
  }
  if (file.kind.empty()) throw Error(path + ": missing #model line");
  for (const Section& s : file.sections) {
    if (s.labels.size() != s.rows) {
      throw Error(path + ": section " + s.name + " declares " +
                  std::to_string(s.rows) + " rows, has " +
                  std::to_string(s.labels.size()));
    }
  }
  return file;
}

class ModelWriter {
 public:
  explicit ModelWriter(const std::string& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw Error("cannot write model file " + path);
  }
  void kind(const std::string& k) { out_ << "#model " << k << '\n'; }
  void meta(const std::string& key, const std::string& value) {
    out_ << "#meta " << key << ' ' << value << '\n';
  }
  void section(const std::string& name, std::size_t rows, std::size_t cols,
               const double* values,
               const std::vector<std::string>* labels = nullptr) {
    out_ << "#section " << name << ' ' << rows << ' ' << cols << '\n';
    for (std::size_t r = 0; r < rows; ++r) {
      out_ << (labels ? (*labels)[r] : std::to_string(r));
      for (std::size_t c = 0; c < cols; ++c) {
        out_ << ' ' << format_double(values[r * cols + c]);
      }
      out_ << '\n';
    }
  }
  void finish() {
    if (!out_) throw Error("write failed for " + path_);
  }

 private:
  std::string path_;
  std::ofstream out_;
};

void write_linear_sections(ModelWriter& w, const LinearMap& map) {
  w.section("linear", map.dim, map.dim, map.matrix.data());
}

LinearMap linear_from(const ModelFile& file) {
  const Section& s = file.get("linear");
  if (s.rows != s.cols) throw Error("linear section is not square");
  LinearMap map;
  map.dim = s.rows;
  map.matrix = s.values;
  return map;
}

void write_mlp_sections(ModelWriter& w, const Mlp& mlp) {
  w.section("mlp.w1", mlp.hidden, mlp.in_dim, mlp.w1.data());
  w.section("mlp.b1", 1, mlp.hidden, mlp.b1.data());
  w.section("mlp.w2", mlp.out_dim, mlp.hidden, mlp.w2.data());
  w.section("mlp.b2", 1, mlp.out_dim, mlp.b2.data());
}

Mlp mlp_from(const ModelFile& file) {
  const Section& w1 = file.get("mlp.w1");
  const Section& b1 = file.get("mlp.b1");
  const Section& w2 = file.get("mlp.w2");
  const Section& b2 = file.get("mlp.b2");
  Mlp mlp;
  mlp.hidden = w1.rows;
  mlp.in_dim = w1.cols;
  mlp.out_dim = w2.rows;
  if (b1.cols != mlp.hidden || w2.cols != mlp.hidden ||
      b2.cols != mlp.out_dim) {
    throw Error("mlp sections have inconsistent shapes");
  }
  mlp.w1 = w1.values;
  mlp.b1 = b1.values;
  mlp.w2 = w2.values;
  mlp.b2 = b2.values;
  return mlp;
}

void write_form_sections(ModelWriter& w, const FormModel& form) {
  w.meta("ngram_min", std::to_string(form.ngram_min));
  w.meta("ngram_max", std::to_string(form.ngram_max));
  w.section("form", form.ngrams.size(), form.dim, form.vectors.data(),
            &form.ngrams);
}

FormModel form_from(const ModelFile& file) {
  const Section& s = file.get("form");
  FormModel form;
  form.dim = s.cols;
  form.ngram_min = static_cast<int>(file.meta_int("ngram_min"));
  form.ngram_max = static_cast<int>(file.meta_int("ngram_max"));
  form.ngrams = s.labels;
  form.vectors = s.values;
  for (std::size_t i = 0; i < form.ngrams.size(); ++i) {
    if (!form.index.emplace(form.ngrams[i], i).second) {
      throw Error("duplicate n-gram '" + form.ngrams[i] + "' in form model");
    }
  }
  return form;
}

}  // namespace

void save_linear_map(const LinearMap& map, const std::string& path) {
  ModelWriter w(path);
  w.kind("linear");
  write_linear_sections(w, map);
  w.finish();
}

LinearMap load_linear_map(const std::string& path) {
  ModelFile file = read_model_file(path);
  if (file.kind != "linear") {
    throw Error(path + " holds a '" + file.kind + "' model, expected linear");
  }
  return linear_from(file);
}

void save_mlp(const Mlp& mlp, const std::string& path) {
  ModelWriter w(path);
  w.kind("mlp");
  write_mlp_sections(w, mlp);
  w.finish();
}

Mlp load_mlp(const std::string& path) {
  ModelFile file = read_model_file(path);
  if (file.kind != "mlp") {
    throw Error(path + " holds a '" + file.kind + "' model, expected mlp");
  }
  return mlp_from(file);
}

void save_form_model(const FormModel& form, const std::string& path) {
  ModelWriter w(path);
  w.kind("form");
  write_form_sections(w, form);
  w.finish();
}

FormModel load_form_model(const std::string& path) {
  ModelFile file = read_model_file(path);
  if (file.kind != "form") {
    throw Error(path + " holds a '" + file.kind + "' model, expected form");
  }
  return form_from(file);
}

ContextTransform load_context_transform(const std::string& path) {
  ModelFile file = read_model_file(path);
  if (file.kind == "linear") return linear_from(file);
  if (file.kind == "mlp") return mlp_from(file);
  throw Error(path + " holds a '" + file.kind +
              "' model, expected linear or mlp");
}

void save_fcm(const FcmModel& model, const std::string& path) {
  ModelWriter w(path);
  w.kind(model.gate_mode == GateMode::kFixed ? "fcm-fixed" : "fcm-gated");
  write_form_sections(w, model.form);
  if (const auto* linear = std::get_if<LinearMap>(&model.context)) {
    write_linear_sections(w, *linear);
  } else {
    write_mlp_sections(w, std::get<Mlp>(model.context));
  }
  if (model.gate_mode == GateMode::kFixed) {
    w.section("gate.alpha", 1, 1, &model.fixed_alpha);
  } else {
    w.section("gate.w", 1, model.gate_weights.size(),
              model.gate_weights.data());
    w.section("gate.b", 1, 1, &model.gate_bias);
  }
  w.finish();
}

FcmModel load_fcm(const std::string& path) {
  ModelFile file = read_model_file(path);
  if (file.kind != "fcm-fixed" && file.kind != "fcm-gated") {
    throw Error(path + " holds a '" + file.kind + "' model, expected fcm");
  }
  FcmModel model;
  model.form = form_from(file);
  if (file.has("linear")) {
    model.context = linear_from(file);
  } else {
    model.context = mlp_from(file);
  }
  if (file.kind == "fcm-fixed") {
    model.gate_mode = GateMode::kFixed;
    const Section& gate = file.get("gate.alpha");
    if (gate.values.size() != 1) throw Error("bad gate.alpha section");
    model.fixed_alpha = gate.values[0];
    if (model.fixed_alpha < 0.0 || model.fixed_alpha > 1.0) {
      throw Error("fixed alpha outside [0, 1]");
    }
  } else {
    model.gate_mode = GateMode::kGated;
    const Section& gw = file.get("gate.w");
    const Section& gb = file.get("gate.b");
    model.gate_weights = gw.values;
    if (gb.values.size() != 1) throw Error("bad gate.b section");
    model.gate_bias = gb.values[0];
    if (model.gate_weights.size() != 2 * model.form.dim) {
      throw Error("gate weight length does not match the model dimension");
    }
  }
  return model;
}

}  // namespace fewvec
