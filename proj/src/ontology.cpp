#include "ontoalign/ontology.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "ontoalign/error.hpp"
#include "ontoalign/text.hpp"

namespace ontoalign {
namespace {

void sort_unique(std::vector<ClassId>& ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
}

// Returns one cycle (as IRIs, first repeated at the end) or empty when acyclic.
std::vector<std::string> find_cycle(const std::vector<OntologyClass>& classes) {
  enum : std::uint8_t { white, grey, black };
  std::vector<std::uint8_t> color(classes.size(), white);
  std::vector<ClassId> path;
  std::vector<std::size_t> cursor;
  for (ClassId root = 0; root < classes.size(); ++root) {
    if (color[root] != white) continue;
    path.assign(1, root);
    cursor.assign(1, 0);
    color[root] = grey;
    while (!path.empty()) {
      ClassId node = path.back();
      std::size_t& next = cursor.back();
      if (next == classes[node].parents.size()) {
        color[node] = black;
        path.pop_back();
        cursor.pop_back();
        continue;
      }
      ClassId parent = classes[node].parents[next++];
      if (color[parent] == grey) {
        auto start = std::find(path.begin(), path.end(), parent);
        std::vector<std::string> cycle;
        for (auto it = start; it != path.end(); ++it) cycle.push_back(classes[*it].iri);
        cycle.push_back(classes[parent].iri);
        return cycle;
      }
      if (color[parent] == white) {
        color[parent] = grey;
        path.push_back(parent);
        cursor.push_back(0);
      }
    }
  }
  return {};
}

std::pair<std::size_t, std::size_t> line_and_column(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

}  // namespace

Ontology Ontology::from_records(std::string name, std::span<const ClassRecord> records) {
  Ontology o;
  o.name_ = std::move(name);

  auto intern = [&o](const std::string& iri, bool declared) -> ClassId {
    auto [it, inserted] = o.iri_index_.try_emplace(iri, static_cast<ClassId>(o.classes_.size()));
    if (inserted) {
      OntologyClass cls;
      cls.id = it->second;
      cls.iri = iri;
      cls.declared = declared;
      o.classes_.push_back(std::move(cls));
    } else if (declared) {
      o.classes_[it->second].declared = true;
    }
    return it->second;
  };

  for (const auto& rec : records) {
    if (rec.iri.empty()) throw Error(ErrorCode::parse, "class with empty IRI");
    intern(rec.iri, true);
  }
  for (const auto& rec : records) {
    ClassId id = o.iri_index_.at(rec.iri);
    for (const auto& raw : rec.labels) {
      std::string label = preprocess_label(raw);
      if (label.empty()) continue;
      auto& labels = o.classes_[id].labels;
      if (std::find(labels.begin(), labels.end(), label) == labels.end()) labels.push_back(std::move(label));
    }
    for (const auto& parent_iri : rec.parents) {
      ClassId parent = intern(parent_iri, false);
      o.classes_[id].parents.push_back(parent);
    }
    for (const auto& other_iri : rec.disjoint) {
      ClassId other = intern(other_iri, false);
      if (other == id) continue;
      o.classes_[id].disjoint.push_back(other);
      o.classes_[other].disjoint.push_back(id);
      o.has_disjointness_ = true;
    }
  }
  for (auto& cls : o.classes_) {
    sort_unique(cls.parents);
    sort_unique(cls.disjoint);
  }
  for (const auto& cls : o.classes_) {
    for (ClassId parent : cls.parents) o.classes_[parent].children.push_back(cls.id);
  }
  for (auto& cls : o.classes_) sort_unique(cls.children);

  if (auto cycle = find_cycle(o.classes_); !cycle.empty()) {
    std::string msg = "subclass cycle detected: ";
    for (std::size_t i = 0; i < cycle.size(); ++i) {
      if (i) msg += " -> ";
      msg += cycle[i];
    }
    throw Error(ErrorCode::cycle, msg);
  }
  o.labeled_count_ = static_cast<std::size_t>(
      std::count_if(o.classes_.begin(), o.classes_.end(), [](const auto& c) { return c.labeled(); }));
  return o;
}

const OntologyClass& Ontology::at(ClassId id) const {
  if (id >= classes_.size()) {
    throw Error(ErrorCode::invalid_argument, "unknown class id " + std::to_string(id) + " in ontology '" + name_ + "'");
  }
  return classes_[id];
}

std::optional<ClassId> Ontology::find(std::string_view iri) const {
  auto it = iri_index_.find(std::string(iri));
  if (it == iri_index_.end()) return std::nullopt;
  return it->second;
}

std::vector<ClassId> Ontology::siblings(ClassId c) const {
  std::vector<ClassId> out;
  for (ClassId parent : at(c).parents) {
    for (ClassId child : classes_[parent].children) {
      if (child != c) out.push_back(child);
    }
  }
  sort_unique(out);
  return out;
}

std::size_t Ontology::undeclared_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(classes_.begin(), classes_.end(), [](const auto& c) { return !c.declared; }));
}

OntologyFormat detect_format(const std::filesystem::path& path, std::string_view content) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (ext == ".json") return OntologyFormat::json;
  if (ext == ".owl" || ext == ".rdf" || ext == ".xml") return OntologyFormat::rdfxml;
  auto first = content.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos) {
    if (content[first] == '{') return OntologyFormat::json;
    if (content[first] == '<') return OntologyFormat::rdfxml;
  }
  throw Error(ErrorCode::unknown_format, "cannot determine ontology format of " + path.string());
}

Ontology load_ontology(const std::filesystem::path& path, const LoadOptions& options) {
  std::string content = read_file(path);
  std::string stem = path.stem().string();
  switch (detect_format(path, content)) {
    case OntologyFormat::json:
      return parse_ontology_json(content, stem);
    case OntologyFormat::rdfxml:
      return parse_rdfxml(content, options, stem);
  }
  throw Error(ErrorCode::unknown_format, path.string());
}

Ontology parse_ontology_json(std::string_view text, std::string fallback_name) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    auto [line, column] = line_and_column(text, e.byte == 0 ? 0 : e.byte - 1);
    throw Error(ErrorCode::parse, "ontology JSON parse error at line " + std::to_string(line) + ", column " +
                                      std::to_string(column) + ": " + e.what());
  }
  auto fail = [](const std::string& where, const std::string& what) {
    throw Error(ErrorCode::parse, "ontology JSON: " + where + ": " + what);
  };
  if (!doc.is_object()) fail("$", "top level must be an object");
  if (!doc.contains("classes") || !doc["classes"].is_array()) fail("$.classes", "missing or not an array");

  auto string_list = [&fail](const nlohmann::json& node, const std::string& where) {
    std::vector<std::string> out;
    if (node.is_null()) return out;
    if (!node.is_array()) fail(where, "expected an array of strings");
    for (std::size_t i = 0; i < node.size(); ++i) {
      if (!node[i].is_string()) fail(where + "[" + std::to_string(i) + "]", "expected a string");
      out.push_back(node[i].get<std::string>());
    }
    return out;
  };

  std::vector<ClassRecord> records;
  const auto& classes = doc["classes"];
  records.reserve(classes.size());
  for (std::size_t i = 0; i < classes.size(); ++i) {
    std::string where = "$.classes[" + std::to_string(i) + "]";
    const auto& node = classes[i];
    if (!node.is_object()) fail(where, "expected an object");
    if (!node.contains("iri") || !node["iri"].is_string()) fail(where + ".iri", "missing or not a string");
    ClassRecord rec;
    rec.iri = node["iri"].get<std::string>();
    rec.labels = string_list(node.value("labels", nlohmann::json()), where + ".labels");
    rec.parents = string_list(node.value("parents", nlohmann::json()), where + ".parents");
    rec.disjoint = string_list(node.value("disjoint", nlohmann::json()), where + ".disjoint");
    records.push_back(std::move(rec));
  }
  std::string name = doc.contains("name") && doc["name"].is_string() ? doc["name"].get<std::string>() : fallback_name;
  return Ontology::from_records(std::move(name), records);
}

std::string to_json_text(const Ontology& ontology) {
  nlohmann::ordered_json doc;
  doc["name"] = ontology.name();
  auto& classes = doc["classes"] = nlohmann::ordered_json::array();
  for (const auto& cls : ontology.classes()) {
    nlohmann::ordered_json node;
    node["iri"] = cls.iri;
    node["labels"] = cls.labels;
    auto& parents = node["parents"] = nlohmann::ordered_json::array();
    for (ClassId p : cls.parents) parents.push_back(ontology.at(p).iri);
    if (!cls.disjoint.empty()) {
      auto& disjoint = node["disjoint"] = nlohmann::ordered_json::array();
      for (ClassId d : cls.disjoint) disjoint.push_back(ontology.at(d).iri);
    }
    classes.push_back(std::move(node));
  }
  return doc.dump(1) + "\n";
}

void save_ontology_json(const Ontology& ontology, const std::filesystem::path& path) {
  write_file(path, to_json_text(ontology));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

}  // namespace ontoalign
