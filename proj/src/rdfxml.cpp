// Minimal RDF/XML reader: named classes, label-style annotations,
// rdfs:subClassOf between named classes and owl:disjointWith. Anything else
// (restrictions, individuals, properties) is parsed and ignored.

#include <algorithm>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ontoalign/error.hpp"
#include "ontoalign/ontology.hpp"

namespace ontoalign {
namespace {

constexpr std::string_view kRdfNs = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
constexpr std::string_view kRdfsNs = "http://www.w3.org/2000/01/rdf-schema#";
constexpr std::string_view kOwlNs = "http://www.w3.org/2002/07/owl#";
constexpr std::string_view kXmlNs = "http://www.w3.org/XML/1998/namespace";

struct Element {
  std::string name;  // expanded IRI
  std::vector<std::pair<std::string, std::string>> attributes;  // expanded name -> value
  std::vector<std::unique_ptr<Element>> children;
  std::string text;
  std::string base;

  const std::string* attribute(std::string_view expanded) const {
    for (const auto& [k, v] : attributes) {
      if (k == expanded) return &v;
    }
    return nullptr;
  }
};

class XmlReader {
 public:
  explicit XmlReader(std::string_view text) : text_(text) {}

  std::unique_ptr<Element> parse_document() {
    std::unique_ptr<Element> root;
    while (true) {
      skip_space();
      if (at_end()) break;
      if (starts_with("<?")) {
        skip_past("?>");
      } else if (starts_with("<!--")) {
        skip_past("-->");
      } else if (starts_with("<!DOCTYPE")) {
        parse_doctype();
      } else if (peek() == '<') {
        if (root) fail("multiple root elements");
        std::vector<std::map<std::string, std::string>> scopes{{{"xml", std::string(kXmlNs)}}};
        root = parse_element(scopes, "");
      } else {
        fail("unexpected content outside the root element");
      }
    }
    if (!root) fail("no root element");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i < std::min(pos_, text_.size()); ++i) {
      if (text_[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw Error(ErrorCode::parse, "RDF/XML parse error at line " + std::to_string(line) + ", column " +
                                      std::to_string(column) + ": " + what);
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }
  bool starts_with(std::string_view s) const { return text_.substr(pos_, s.size()) == s; }

  void skip_space() {
    while (!at_end() && (peek() == ' ' || peek() == '\t' || peek() == '\n' || peek() == '\r')) ++pos_;
  }

  void skip_past(std::string_view terminator) {
    auto end = text_.find(terminator, pos_);
    if (end == std::string_view::npos) fail("unterminated construct, expected '" + std::string(terminator) + "'");
    pos_ = end + terminator.size();
  }

  void expect(char ch) {
    if (peek() != ch) fail(std::string("expected '") + ch + "'");
    ++pos_;
  }

  std::string parse_name() {
    std::size_t start = pos_;
    while (!at_end()) {
      char ch = peek();
      if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' || ch == '=' || ch == '>' || ch == '/' || ch == '<' ||
          ch == '"' || ch == '\'' || ch == '[' || ch == ']')
        break;
      ++pos_;
    }
    if (pos_ == start) fail("expected a name");
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string parse_quoted_raw() {
    char quote = peek();
    if (quote != '"' && quote != '\'') fail("expected a quoted value");
    ++pos_;
    auto end = text_.find(quote, pos_);
    if (end == std::string_view::npos) fail("unterminated quoted value");
    std::string value(text_.substr(pos_, end - pos_));
    pos_ = end + 1;
    return value;
  }

  // Internal subset: only <!ENTITY name "value"> declarations matter.
  void parse_doctype() {
    pos_ += 9;
    while (!at_end() && peek() != '[' && peek() != '>') ++pos_;
    if (peek() == '[') {
      ++pos_;
      while (true) {
        skip_space();
        if (at_end()) fail("unterminated DOCTYPE");
        if (peek() == ']') {
          ++pos_;
          break;
        }
        if (starts_with("<!ENTITY")) {
          pos_ += 8;
          skip_space();
          std::string name = parse_name();
          skip_space();
          std::string value = decode(parse_quoted_raw());
          entities_[name] = value;
          skip_space();
          expect('>');
        } else if (starts_with("<!--")) {
          skip_past("-->");
        } else {
          skip_past(">");
        }
      }
    }
    skip_space();
    expect('>');
  }

  std::string decode(std::string_view raw) const {
    std::string out;
    out.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] != '&') {
        out.push_back(raw[i]);
        continue;
      }
      auto semi = raw.find(';', i);
      if (semi == std::string_view::npos) {
        out.push_back('&');
        continue;
      }
      std::string_view ref = raw.substr(i + 1, semi - i - 1);
      if (ref == "amp") out += '&';
      else if (ref == "lt") out += '<';
      else if (ref == "gt") out += '>';
      else if (ref == "quot") out += '"';
      else if (ref == "apos") out += '\'';
      else if (!ref.empty() && ref[0] == '#') {
        unsigned long cp = 0;
        try {
          cp = ref.size() > 1 && (ref[1] == 'x' || ref[1] == 'X') ? std::stoul(std::string(ref.substr(2)), nullptr, 16)
                                                                   : std::stoul(std::string(ref.substr(1)));
        } catch (const std::exception&) {
          fail("bad character reference &" + std::string(ref) + ";");
        }
        append_utf8(out, static_cast<char32_t>(cp));
      } else if (auto it = entities_.find(std::string(ref)); it != entities_.end()) {
        out += it->second;
      } else {
        fail("undefined entity &" + std::string(ref) + ";");
      }
      i = semi;
    }
    return out;
  }

  static void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }

  std::string expand(const std::vector<std::map<std::string, std::string>>& scopes, const std::string& qname,
                     bool is_attribute) const {
    auto colon = qname.find(':');
    std::string prefix = colon == std::string::npos ? "" : qname.substr(0, colon);
    std::string local = colon == std::string::npos ? qname : qname.substr(colon + 1);
    if (prefix.empty() && is_attribute) return local;
    for (auto it = scopes.rbegin(); it != scopes.rend(); ++it) {
      if (auto found = it->find(prefix); found != it->end()) return found->second + local;
    }
    if (prefix.empty()) return local;
    fail("undeclared namespace prefix '" + prefix + "'");
  }

  std::unique_ptr<Element> parse_element(std::vector<std::map<std::string, std::string>>& scopes,
                                         const std::string& parent_base) {
    expect('<');
    std::string qname = parse_name();
    std::vector<std::pair<std::string, std::string>> raw_attrs;
    std::map<std::string, std::string> scope;
    bool self_closing = false;
    while (true) {
      skip_space();
      if (starts_with("/>")) {
        pos_ += 2;
        self_closing = true;
        break;
      }
      if (peek() == '>') {
        ++pos_;
        break;
      }
      if (at_end()) fail("unterminated start tag <" + qname + ">");
      std::string attr = parse_name();
      skip_space();
      expect('=');
      skip_space();
      std::string value = decode(parse_quoted_raw());
      if (attr == "xmlns") {
        scope[""] = value;
      } else if (attr.rfind("xmlns:", 0) == 0) {
        scope[attr.substr(6)] = value;
      } else {
        raw_attrs.emplace_back(std::move(attr), std::move(value));
      }
    }
    scopes.push_back(std::move(scope));
    auto element = std::make_unique<Element>();
    element->name = expand(scopes, qname, false);
    for (auto& [k, v] : raw_attrs) element->attributes.emplace_back(expand(scopes, k, true), std::move(v));
    element->base = parent_base;
    if (const auto* base = element->attribute(std::string(kXmlNs) + "base")) element->base = *base;

    if (!self_closing) {
      while (true) {
        if (at_end()) fail("unterminated element <" + qname + ">");
        if (starts_with("</")) {
          pos_ += 2;
          std::string closing = parse_name();
          if (closing != qname) fail("mismatched end tag </" + closing + ">, expected </" + qname + ">");
          skip_space();
          expect('>');
          break;
        }
        if (starts_with("<!--")) {
          skip_past("-->");
        } else if (starts_with("<![CDATA[")) {
          pos_ += 9;
          auto end = text_.find("]]>", pos_);
          if (end == std::string_view::npos) fail("unterminated CDATA section");
          element->text.append(text_.substr(pos_, end - pos_));
          pos_ = end + 3;
        } else if (starts_with("<?")) {
          skip_past("?>");
        } else if (peek() == '<') {
          element->children.push_back(parse_element(scopes, element->base));
        } else {
          auto end = text_.find('<', pos_);
          if (end == std::string_view::npos) end = text_.size();
          element->text += decode(text_.substr(pos_, end - pos_));
          pos_ = end;
        }
      }
    }
    scopes.pop_back();
    return element;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::unordered_map<std::string, std::string> entities_;
};

struct Subject {
  bool is_class = false;
  std::vector<std::string> labels;
  std::vector<std::string> parents;
  std::vector<std::string> disjoint;
};

class RdfCollector {
 public:
  explicit RdfCollector(const LoadOptions& options)
      : label_properties_(options.label_properties.begin(), options.label_properties.end()) {}

  void collect(const Element& root) {
    if (root.name == std::string(kRdfNs) + "RDF") {
      for (const auto& child : root.children) node(*child);
    } else {
      node(root);
    }
  }

  std::vector<ClassRecord> records() const {
    std::vector<ClassRecord> out;
    for (const auto& iri : order_) {
      const auto& s = subjects_.at(iri);
      if (!s.is_class) continue;
      out.push_back(ClassRecord{iri, s.labels, s.parents, s.disjoint});
    }
    return out;
  }

 private:
  static std::string resolve(const std::string& value, const std::string& base) {
    if (value.find(':') != std::string::npos || base.empty()) return value;
    std::string stem = base.substr(0, base.find('#'));
    if (!value.empty() && value[0] == '#') return stem + value;
    auto slash = stem.rfind('/');
    return (slash == std::string::npos ? stem : stem.substr(0, slash + 1)) + value;
  }

  Subject& subject(const std::string& iri) {
    auto [it, inserted] = subjects_.try_emplace(iri);
    if (inserted) order_.push_back(iri);
    return it->second;
  }

  // Returns the subject IRI, or empty for blank nodes.
  std::string node(const Element& el) {
    std::string iri;
    if (const auto* about = el.attribute(std::string(kRdfNs) + "about")) {
      iri = resolve(*about, el.base);
    } else if (const auto* id = el.attribute(std::string(kRdfNs) + "ID")) {
      iri = resolve("#" + *id, el.base);
    }
    const bool class_element = el.name == std::string(kOwlNs) + "Class" || el.name == std::string(kRdfsNs) + "Class";
    Subject* s = iri.empty() ? nullptr : &subject(iri);
    if (s && class_element) s->is_class = true;

    if (s) {
      for (const auto& [attr, value] : el.attributes) {
        if (label_properties_.count(attr)) s->labels.push_back(value);
      }
    }
    for (const auto& child : el.children) {
      const auto& prop = child->name;
      std::string object;
      if (const auto* res = child->attribute(std::string(kRdfNs) + "resource")) {
        object = resolve(*res, child->base);
      } else {
        for (const auto& nested : child->children) {
          std::string nested_iri = node(*nested);
          if (object.empty()) object = nested_iri;
        }
      }
      if (!s) continue;
      if (prop == std::string(kRdfsNs) + "subClassOf") {
        s->is_class = true;
        if (!object.empty()) s->parents.push_back(object);
      } else if (prop == std::string(kOwlNs) + "disjointWith") {
        if (!object.empty()) s->disjoint.push_back(object);
      } else if (prop == std::string(kRdfNs) + "type") {
        if (object == std::string(kOwlNs) + "Class" || object == std::string(kRdfsNs) + "Class") s->is_class = true;
      } else if (label_properties_.count(prop) && child->children.empty() && !child->attribute(std::string(kRdfNs) + "resource")) {
        s->labels.push_back(child->text);
      }
    }
    return iri;
  }

  std::set<std::string> label_properties_;
  std::unordered_map<std::string, Subject> subjects_;
  std::vector<std::string> order_;
};

}  // namespace

Ontology parse_rdfxml(std::string_view text, const LoadOptions& options, std::string fallback_name) {
  XmlReader reader(text);
  auto root = reader.parse_document();
  RdfCollector collector(options);
  collector.collect(*root);
  auto records = collector.records();
  // owl:Thing is a virtual root; dropping it keeps top-level classes parentless.
  const std::string thing = std::string(kOwlNs) + "Thing";
  records.erase(std::remove_if(records.begin(), records.end(), [&](const auto& r) { return r.iri == thing; }),
                records.end());
  for (auto& r : records) {
    r.parents.erase(std::remove(r.parents.begin(), r.parents.end(), thing), r.parents.end());
  }
  return Ontology::from_records(std::move(fallback_name), records);
}

}  // namespace ontoalign
