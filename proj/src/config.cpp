#include "ontoalign/config.hpp"

#include <cmath>
#include <set>

#include <json.hpp>
#include <toml.hpp>

#include "ontoalign/error.hpp"
#include "ontoalign/manifest.hpp"

namespace ontoalign {
namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::config, "config: " + field + ": " + what);
}

// Typed accessors over one JSON object that reject keys nobody asked for.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) config_error(path_.empty() ? "$" : path_, "expected an object");
  }

  /// Rejects keys that were never queried.
  void finish() const {
    for (const auto& [key, _] : node_.items()) {
      if (!known_.count(key)) config_error(field(key), "unknown key '" + key + "'");
    }
  }

  bool has(const std::string& key) {
    known_.insert(key);
    return node_.contains(key) && !node_[key].is_null();
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  const json& raw(const std::string& key) const { return node_.at(key); }

  void get(const std::string& key, bool& out) {
    if (!has(key)) return;
    if (!node_[key].is_boolean()) config_error(field(key), "expected a boolean");
    out = node_[key].get<bool>();
  }
  void get(const std::string& key, std::string& out) {
    if (!has(key)) return;
    if (!node_[key].is_string()) config_error(field(key), "expected a string");
    out = node_[key].get<std::string>();
  }
  void get(const std::string& key, double& out) {
    if (!has(key)) return;
    if (!node_[key].is_number()) config_error(field(key), "expected a number");
    out = node_[key].get<double>();
  }
  template <typename Int>
    requires std::is_integral_v<Int>
  void get(const std::string& key, Int& out) {
    if (!has(key)) return;
    const auto& v = node_[key];
    if (!v.is_number_integer() || (std::is_unsigned_v<Int> && v.get<std::int64_t>() < 0)) {
      config_error(field(key), std::is_unsigned_v<Int> ? "expected a non-negative integer" : "expected an integer");
    }
    out = v.get<Int>();
  }
  void get(const std::string& key, std::filesystem::path& out, const std::filesystem::path& base) {
    std::string s;
    if (!has(key)) return;
    get(key, s);
    out = resolve(s, base);
  }
  void get(const std::string& key, std::vector<std::string>& out) {
    if (!has(key)) return;
    const auto& v = node_[key];
    if (!v.is_array()) config_error(field(key), "expected an array of strings");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_string()) config_error(field(key) + "[" + std::to_string(i) + "]", "expected a string");
      out.push_back(v[i].get<std::string>());
    }
  }
  void get(const std::string& key, std::vector<double>& out) {
    if (!has(key)) return;
    const auto& v = node_[key];
    if (!v.is_array()) config_error(field(key), "expected an array of numbers");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) config_error(field(key) + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
    }
  }

  static std::filesystem::path resolve(const std::string& s, const std::filesystem::path& base) {
    std::filesystem::path p(s);
    if (p.empty() || p.is_absolute() || base.empty()) return p;
    return (base / p).lexically_normal();
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> known_;
};

}  // namespace

bool operator==(const ScorerConfig& a, const ScorerConfig& b) {
  return a.kind == b.kind && a.endpoint == b.endpoint && a.batch_size == b.batch_size && a.timeout_ms == b.timeout_ms &&
         a.max_in_flight == b.max_in_flight;
}

bool operator==(const SplitSpec& a, const SplitSpec& b) {
  return a.mode == b.mode && a.train == b.train && a.val == b.val && a.test == b.test && a.seed == b.seed;
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return a.source == b.source && a.target == b.target && a.vocab == b.vocab && a.auxiliary == b.auxiliary &&
         a.label_properties == b.label_properties && a.refs_equivalent == b.refs_equivalent &&
         a.refs_ignored == b.refs_ignored && a.corpus == b.corpus && a.scorer == b.scorer && a.k == b.k &&
         a.refinement == b.refinement && a.lambda_grid == b.lambda_grid && a.split == b.split &&
         a.output == b.output && a.workers == b.workers;
}

void ExperimentConfig::validate() const {
  if (source.empty()) config_error("source", "required");
  if (target.empty()) config_error("target", "required");
  if (k < 1) config_error("prediction.k", "must be at least 1");
  try {
    split.validate();
  } catch (const Error& e) {
    config_error("split", e.what());
  }
  if (corpus.co && split.mode != SplitMode::semi_supervised) {
    config_error("corpus.co", "the cross-ontology corpus needs training mappings (split.mode = semi-supervised)");
  }
  if (corpus.cp && auxiliary.empty()) config_error("corpus.cp", "requires at least one auxiliary ontology");
  if (corpus.soft_negatives + corpus.hard_negatives != corpus.negatives_per_synonym) {
    config_error("corpus", "soft_negatives + hard_negatives must equal negatives_per_synonym");
  }
  if (corpus.negatives_per_synonym < 0 || corpus.soft_negatives < 0 || corpus.hard_negatives < 0) {
    config_error("corpus", "negative counts must be non-negative");
  }
  if (!(corpus.val_fraction > 0.0 && corpus.val_fraction < 1.0)) {
    config_error("corpus.val_fraction", "must lie strictly between 0 and 1");
  }
  if (!(refinement.kappa >= 0.0 && refinement.kappa <= 1.0)) config_error("refinement.kappa", "must lie in [0,1]");
  if (refinement.max_iterations == 0) config_error("refinement.max_iterations", "must be positive");
  if (lambda_grid.empty()) config_error("evaluation.lambda_grid", "must not be empty");
  for (double l : lambda_grid) {
    if (!(l >= 0.0 && l <= 1.0)) config_error("evaluation.lambda_grid", "values must lie in [0,1]");
  }
  try {
    scorer.validate();
  } catch (const Error& e) {
    config_error("scorer", e.what());
  }
}

std::vector<std::filesystem::path> ExperimentConfig::input_files() const {
  std::vector<std::filesystem::path> out{source, target};
  if (!vocab.empty()) out.push_back(vocab);
  if (!refs_equivalent.empty()) out.push_back(refs_equivalent);
  if (!refs_ignored.empty()) out.push_back(refs_ignored);
  for (const auto& a : auxiliary) out.push_back(a);
  return out;
}

namespace {

json toml_to_json(const toml::node& node) {
  if (const auto* t = node.as_table()) {
    json out = json::object();
    for (const auto& [key, value] : *t) out[std::string(key.str())] = toml_to_json(value);
    return out;
  }
  if (const auto* a = node.as_array()) {
    json out = json::array();
    for (const auto& value : *a) out.push_back(toml_to_json(value));
    return out;
  }
  if (const auto* v = node.as_string()) return v->get();
  if (const auto* v = node.as_integer()) return v->get();
  if (const auto* v = node.as_floating_point()) return v->get();
  if (const auto* v = node.as_boolean()) return v->get();
  config_error("$", "dates and times are not valid config values");
}

ExperimentConfig config_from_json(const json& doc, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  {
    Section root(doc, "");
    root.get("source", cfg.source, base_dir);
    root.get("target", cfg.target, base_dir);
    root.get("vocab", cfg.vocab, base_dir);
    if (root.has("auxiliary")) {
      std::vector<std::string> aux;
      root.get("auxiliary", aux);
      for (const auto& a : aux) cfg.auxiliary.push_back(Section::resolve(a, base_dir));
    }
    root.get("label_properties", cfg.label_properties);
    root.get("output", cfg.output, base_dir);
    root.get("workers", cfg.workers);

    if (root.has("references")) {
      Section refs(root.raw("references"), "references");
      refs.get("equivalent", cfg.refs_equivalent, base_dir);
      refs.get("ignored", cfg.refs_ignored, base_dir);
      refs.finish();
    }
    if (root.has("corpus")) {
      Section c(root.raw("corpus"), "corpus");
      c.get("build", cfg.corpus.build);
      c.get("io", cfg.corpus.io);
      c.get("ids", cfg.corpus.ids);
      c.get("co", cfg.corpus.co);
      c.get("cp", cfg.corpus.cp);
      c.get("negatives_per_synonym", cfg.corpus.negatives_per_synonym);
      c.get("soft_negatives", cfg.corpus.soft_negatives);
      c.get("hard_negatives", cfg.corpus.hard_negatives);
      c.get("val_fraction", cfg.corpus.val_fraction);
      c.get("seed", cfg.corpus.seed);
      c.get("finetune_command", cfg.corpus.finetune_command);
      c.finish();
    }
    if (root.has("scorer")) {
      Section s(root.raw("scorer"), "scorer");
      std::string kind = to_string(cfg.scorer.kind);
      s.get("kind", kind);
      try {
        cfg.scorer.kind = parse_scorer_kind(kind);
      } catch (const Error& e) {
        config_error("scorer.kind", e.what());
      }
      if (s.has("endpoint")) {
        std::string endpoint;
        s.get("endpoint", endpoint);
        if (!endpoint.empty()) cfg.scorer.endpoint = endpoint;
      }
      s.get("batch_size", cfg.scorer.batch_size);
      s.get("timeout_ms", cfg.scorer.timeout_ms);
      s.get("max_in_flight", cfg.scorer.max_in_flight);
      s.finish();
    }
    if (root.has("prediction")) {
      Section p(root.raw("prediction"), "prediction");
      p.get("k", cfg.k);
      p.finish();
    }
    if (root.has("refinement")) {
      Section r(root.raw("refinement"), "refinement");
      r.get("extend", cfg.refinement.extend);
      r.get("repair", cfg.refinement.repair);
      r.get("kappa", cfg.refinement.kappa);
      r.get("max_iterations", cfg.refinement.max_iterations);
      r.get("sibling_disjointness", cfg.refinement.sibling_disjointness);
      r.get("restore_pass", cfg.refinement.restore_pass);
      r.finish();
    }
    if (root.has("evaluation")) {
      Section e(root.raw("evaluation"), "evaluation");
      e.get("lambda_grid", cfg.lambda_grid);
      e.finish();
    }
    if (root.has("split")) {
      Section s(root.raw("split"), "split");
      std::string mode = to_string(cfg.split.mode);
      s.get("mode", mode);
      try {
        cfg.split = SplitSpec::defaults(parse_split_mode(mode), cfg.split.seed);
      } catch (const Error& e) {
        config_error("split.mode", e.what());
      }
      s.get("train", cfg.split.train);
      s.get("val", cfg.split.val);
      s.get("test", cfg.split.test);
      s.get("seed", cfg.split.seed);
      s.finish();
    }
    root.finish();
  }
  cfg.validate();
  return cfg;
}

}  // namespace

ExperimentConfig parse_config_text(std::string_view json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::config, std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(doc, base_dir);
}

ExperimentConfig parse_config_toml_text(std::string_view toml_text, const std::filesystem::path& base_dir) {
  toml::table table;
  try {
    table = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    const auto& where = e.source().begin;
    throw Error(ErrorCode::config, "config is not valid TOML at line " + std::to_string(where.line) + ", column " +
                                       std::to_string(where.column) + ": " + std::string(e.description()));
  }
  return config_from_json(toml_to_json(table), base_dir);
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) throw Error(ErrorCode::io, "config file not found: " + path.string());
  if (path.extension() == ".toml") return parse_config_toml_text(read_file(path), path.parent_path());
  return parse_config_text(read_file(path), path.parent_path());
}

namespace {

json to_json(const ExperimentConfig& c, bool for_hash) {
  json doc;
  doc["source"] = c.source.string();
  doc["target"] = c.target.string();
  doc["vocab"] = c.vocab.string();
  doc["auxiliary"] = json::array();
  for (const auto& a : c.auxiliary) doc["auxiliary"].push_back(a.string());
  doc["label_properties"] = c.label_properties;
  doc["references"] = {{"equivalent", c.refs_equivalent.string()}, {"ignored", c.refs_ignored.string()}};
  doc["corpus"] = {{"build", c.corpus.build},
                   {"io", c.corpus.io},
                   {"ids", c.corpus.ids},
                   {"co", c.corpus.co},
                   {"cp", c.corpus.cp},
                   {"negatives_per_synonym", c.corpus.negatives_per_synonym},
                   {"soft_negatives", c.corpus.soft_negatives},
                   {"hard_negatives", c.corpus.hard_negatives},
                   {"val_fraction", c.corpus.val_fraction},
                   {"seed", c.corpus.seed},
                   {"finetune_command", c.corpus.finetune_command}};
  doc["scorer"] = {{"kind", to_string(c.scorer.kind)},
                   {"endpoint", c.scorer.endpoint.value_or("")},
                   {"batch_size", c.scorer.batch_size},
                   {"timeout_ms", c.scorer.timeout_ms},
                   {"max_in_flight", c.scorer.max_in_flight}};
  doc["prediction"] = {{"k", c.k}};
  doc["refinement"] = {{"extend", c.refinement.extend},
                       {"repair", c.refinement.repair},
                       {"kappa", c.refinement.kappa},
                       {"max_iterations", c.refinement.max_iterations},
                       {"sibling_disjointness", c.refinement.sibling_disjointness},
                       {"restore_pass", c.refinement.restore_pass}};
  doc["evaluation"] = {{"lambda_grid", c.lambda_grid}};
  doc["split"] = {{"mode", to_string(c.split.mode)},
                  {"train", c.split.train},
                  {"val", c.split.val},
                  {"test", c.split.test},
                  {"seed", c.split.seed}};
  // Where results go and how many threads produce them do not change them.
  if (!for_hash) {
    doc["output"] = c.output.string();
    doc["workers"] = c.workers;
  }
  return doc;
}

}  // namespace

std::string to_json_text(const ExperimentConfig& config) { return to_json(config, false).dump(2) + "\n"; }

std::string config_hash(const ExperimentConfig& config) { return sha256_hex(to_json(config, true).dump()); }

}  // namespace ontoalign
