#include <doctest.h>

#include <algorithm>
#include <set>

#include "ontoalign/mapping.hpp"
#include "ontoalign/ontology.hpp"
#include "ontoalign/text.hpp"
#include "support.hpp"

using namespace ontoalign;
using testing::id_of;
using testing::rec;

TEST_CASE("preprocess_label normalizes case, underscores and spacing") {
  CHECK(preprocess_label("Third_cervical_spinal_ganglion") == "third cervical spinal ganglion");
  CHECK(preprocess_label("muscle layer") == "muscle layer");
  CHECK(preprocess_label("  Agranular__endoplasmic ") == "agranular endoplasmic");
  CHECK(preprocess_label("") == "");
  CHECK(preprocess_label(" \t_\n ") == "");
  CHECK(preprocess_label("C\xC3\x89LL") == "c\xC3\x89ll");
}

TEST_CASE("preprocess_label is idempotent on random strings") {
  Rng rng(11);
  const std::string alphabet = "aB_ \t\nzZ9-\xC3\xA9";
  for (int trial = 0; trial < 2000; ++trial) {
    std::string s;
    const std::size_t n = rng.index(24);
    for (std::size_t i = 0; i < n; ++i) s += alphabet[rng.index(alphabet.size())];
    auto once = preprocess_label(s);
    REQUIRE(preprocess_label(once) == once);
    CHECK(once.find("  ") == std::string::npos);
    CHECK(once.find('_') == std::string::npos);
  }
}

TEST_CASE("format_double round-trips") {
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.95) == "0.95");
  for (double v : {0.1, 1.0 / 3.0, 0.999, 1e-300}) CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("utf8 helpers tolerate malformed input") {
  CHECK(utf8_decode("h\xC3\xA9") == std::u32string{U'h', U'é'});
  CHECK(utf8_decode("\xFF") == std::u32string{U'�'});
  CHECK(utf8_boundaries("a\xC3\xA9z") == std::vector<std::size_t>{0, 1, 3, 4});
}

TEST_CASE("three-class fixture links parents and children") {
  auto o = testing::make_ontology("t", {rec("A", {"a"}, {"B"}), rec("B", {"b"}), rec("C", {"c"}, {"B"})});
  REQUIRE(o.size() == 3);
  const auto& b = o.at(id_of(o, "B"));
  CHECK(b.children == std::vector<ClassId>{id_of(o, "A"), id_of(o, "C")});
  CHECK(o.at(id_of(o, "A")).parents == std::vector<ClassId>{id_of(o, "B")});
  CHECK(o.siblings(id_of(o, "A")) == std::vector<ClassId>{id_of(o, "C")});
  CHECK(o.siblings(id_of(o, "B")).empty());
}

TEST_CASE("labels are preprocessed and deduplicated") {
  auto o = testing::make_ontology("t", {rec("A", {"heart", "Heart", "heart ", "", "cor"})});
  CHECK(o.at(0).labels == std::vector<std::string>{"heart", "cor"});
}

TEST_CASE("cycles are rejected with the cycle named") {
  try {
    testing::make_ontology("t", {rec("A", {"a"}, {"B"}), rec("B", {"b"}, {"A"})});
    FAIL("expected a cycle error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::cycle);
    CHECK(std::string(e.what()).find("A") != std::string::npos);
    CHECK(std::string(e.what()).find("->") != std::string::npos);
  }
  CHECK_THROWS_AS(testing::make_ontology("t", {rec("A", {"a"}, {"A"})}), Error);
}

TEST_CASE("diamond siblings") {
  auto o = testing::make_ontology("t", {rec("A", {"a"}, {"B1", "B2"}), rec("B1", {"b1"}), rec("B2", {"b2"}),
                                        rec("C", {"c"}, {"B2"}), rec("D", {"d"}, {"B1"})});
  CHECK(o.siblings(id_of(o, "A")) == std::vector<ClassId>{id_of(o, "C"), id_of(o, "D")});
  CHECK_THROWS_AS(o.siblings(99), Error);
}

TEST_CASE("undeclared parents become unlabeled placeholders") {
  auto o = testing::make_ontology("t", {rec("A", {"a"}, {"X"})});
  REQUIRE(o.size() == 2);
  const auto& x = o.at(id_of(o, "X"));
  CHECK_FALSE(x.declared);
  CHECK_FALSE(x.labeled());
  CHECK(o.undeclared_count() == 1);
  CHECK(o.labeled_count() == 1);
}

TEST_CASE("random ontologies keep parent and child links consistent and siblings symmetric") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto o = testing::random_ontology(rng, "r", {.classes = 1 + rng.index(40)});
    for (const auto& c : o.classes()) {
      for (ClassId p : c.parents) {
        const auto& kids = o.at(p).children;
        CHECK(std::binary_search(kids.begin(), kids.end(), c.id));
      }
      for (ClassId k : c.children) {
        const auto& parents = o.at(k).parents;
        CHECK(std::binary_search(parents.begin(), parents.end(), c.id));
      }
      for (ClassId s : o.siblings(c.id)) {
        auto back = o.siblings(s);
        CHECK(std::binary_search(back.begin(), back.end(), c.id));
      }
      CHECK(o.find(c.iri) == c.id);
    }
  }
}

TEST_CASE("JSON ontology parsing and errors") {
  auto o = parse_ontology_json(R"({"name":"n","classes":[{"iri":"A","labels":["X_Y"],"parents":["B"]},{"iri":"B"}]})");
  CHECK(o.name() == "n");
  CHECK(o.at(0).labels == std::vector<std::string>{"x y"});

  try {
    parse_ontology_json("{\n  \"classes\": [\n    {\"iri\": }\n  ]\n}");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::parse);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  try {
    parse_ontology_json(R"({"classes":[{"iri":"A"},{"labels":["x"]}]})");
    FAIL("expected a schema error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("$.classes[1].iri") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_ontology_json(R"({"classes":{}})"), Error);
  CHECK_THROWS_AS(parse_ontology_json(R"({"classes":[{"iri":"A","labels":"x"}]})"), Error);
}

TEST_CASE("JSON round trip preserves classes and disjointness") {
  auto o = testing::make_ontology("rt", {rec("A", {"alpha", "first"}, {"B"}, {"C"}), rec("B", {"beta"}),
                                         rec("C", {"gamma"}, {"B"})});
  CHECK(o.has_explicit_disjointness());
  auto back = parse_ontology_json(to_json_text(o));
  REQUIRE(back.size() == o.size());
  for (const auto& c : o.classes()) {
    const auto& d = back.at(id_of(back, c.iri));
    CHECK(d.labels == c.labels);
    CHECK(d.parents.size() == c.parents.size());
    CHECK(d.disjoint.size() == c.disjoint.size());
  }
  CHECK(to_json_text(back) == to_json_text(o));
}

TEST_CASE("format detection") {
  CHECK(detect_format("x.json", "") == OntologyFormat::json);
  CHECK(detect_format("x.OWL", "") == OntologyFormat::rdfxml);
  CHECK(detect_format("x", "  {}") == OntologyFormat::json);
  CHECK(detect_format("x", "<rdf/>") == OntologyFormat::rdfxml);
  CHECK_THROWS_AS(detect_format("x.txt", "hello"), Error);
  try {
    detect_format("x.ttl", "@prefix");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::unknown_format);
  }
}

TEST_CASE("missing ontology file is an io error") {
  try {
    load_ontology("/nonexistent/ontology.json");
    FAIL("expected io error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::io);
  }
}

namespace {

const char* kRdf = R"(<?xml version="1.0"?>
<!DOCTYPE rdf:RDF [ <!ENTITY ex "http://example.org/onto#"> ]>
<rdf:RDF xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#"
         xmlns:rdfs="http://www.w3.org/2000/01/rdf-schema#"
         xmlns:owl="http://www.w3.org/2002/07/owl#"
         xmlns:oboInOwl="http://www.geneontology.org/formats/oboInOwl#"
         xml:base="http://example.org/onto">
  <!-- a comment -->
  <owl:Class rdf:about="&ex;Heart">
    <rdfs:label xml:lang="en">Heart</rdfs:label>
    <oboInOwl:hasExactSynonym>cor &amp; core</oboInOwl:hasExactSynonym>
    <rdfs:subClassOf rdf:resource="&ex;Organ"/>
    <owl:disjointWith rdf:resource="&ex;Lung"/>
  </owl:Class>
  <owl:Class rdf:ID="Lung">
    <rdfs:label><![CDATA[Lung_Structure]]></rdfs:label>
    <rdfs:subClassOf>
      <owl:Class rdf:about="&ex;Organ"/>
    </rdfs:subClassOf>
    <rdfs:subClassOf rdf:resource="http://www.w3.org/2002/07/owl#Thing"/>
  </owl:Class>
  <rdf:Description rdf:about="&ex;Valve">
    <rdf:type rdf:resource="http://www.w3.org/2002/07/owl#Class"/>
    <rdfs:label>Valve</rdfs:label>
    <rdfs:subClassOf rdf:resource="&ex;Missing"/>
  </rdf:Description>
</rdf:RDF>
)";

}  // namespace

TEST_CASE("RDF/XML reader extracts labels, hierarchy and disjointness") {
  LoadOptions opts;
  auto o = parse_rdfxml(kRdf, opts, "fixture");
  const std::string ex = "http://example.org/onto#";
  const auto& heart = o.at(id_of(o, ex + "Heart"));
  CHECK(heart.labels == std::vector<std::string>{"heart"});
  CHECK(heart.parents == std::vector<ClassId>{id_of(o, ex + "Organ")});
  CHECK(heart.disjoint == std::vector<ClassId>{id_of(o, ex + "Lung")});
  CHECK(o.at(id_of(o, ex + "Lung")).labels == std::vector<std::string>{"lung structure"});
  CHECK(o.at(id_of(o, ex + "Lung")).parents.size() == 1);
  CHECK_FALSE(o.find("http://www.w3.org/2002/07/owl#Thing").has_value());
  CHECK(o.at(id_of(o, ex + "Valve")).declared);
  CHECK_FALSE(o.at(id_of(o, ex + "Missing")).declared);

  opts.label_properties.push_back("http://www.geneontology.org/formats/oboInOwl#hasExactSynonym");
  auto with_syn = parse_rdfxml(kRdf, opts, "fixture");
  CHECK(with_syn.at(id_of(with_syn, ex + "Heart")).labels == std::vector<std::string>{"heart", "cor & core"});
}

TEST_CASE("RDF/XML errors carry a position") {
  try {
    parse_rdfxml("<rdf:RDF xmlns:rdf=\"http://www.w3.org/1999/02/22-rdf-syntax-ns#\">\n  <a>\n</rdf:RDF>", {}, "x");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::parse);
    CHECK(std::string(e.what()).find("line") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_rdfxml("<x:y/>", {}, "x"), Error);
}

TEST_CASE("mapping TSV parsing") {
  auto src = testing::make_ontology("s", {rec("A", {"a"}), rec("B", {"b"})});
  auto tgt = testing::make_ontology("t", {rec("X", {"x"}), rec("Y", {"y"})});

  auto dup = parse_mappings("A\tX\nA\tX\n", src, tgt);
  CHECK(dup.rows == 2);
  CHECK(dup.mappings.size() == 1);
  CHECK(dup.duplicates == 1);

  auto unknown = parse_mappings("# header\nA\tX\nQ\tY\n", src, tgt);
  CHECK(unknown.mappings.size() == 1);
  CHECK(unknown.skipped_unresolved == 1);

  auto scored = parse_mappings("A\tY\t0.95\r\n", src, tgt);
  REQUIRE(scored.mappings.size() == 1);
  const auto& m = scored.mappings.entries()[0];
  CHECK(m.source == id_of(src, "A"));
  CHECK(m.target == id_of(tgt, "Y"));
  CHECK(m.score == 0.95);
  CHECK(m.provenance == Provenance::given);

  CHECK(parse_mappings("A\tX\n", src, tgt).mappings.entries()[0].score == 1.0);
  CHECK(parse_mappings("", src, tgt).mappings.empty());

  for (const char* bad : {"A\n", "A\tX\t1\textra\n", "A\tX\tnope\n", "A\tX\t1.5\n"}) {
    try {
      parse_mappings(bad, src, tgt);
      FAIL("expected a parse error for " << bad);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::parse);
      CHECK(std::string(e.what()).find("line 1") != std::string::npos);
    }
  }
}

TEST_CASE("mapping save and load round-trip on random sets") {
  Rng rng(3);
  auto src = testing::random_ontology(rng, "s", {.classes = 30});
  auto tgt = testing::random_ontology(rng, "t", {.classes = 30});
  testing::TempDir dir;
  for (int trial = 0; trial < 30; ++trial) {
    MappingSet set;
    const std::size_t n = rng.index(60);
    for (std::size_t i = 0; i < n; ++i) {
      double score = static_cast<double>(rng.index(1'000'001)) / 1e6;
      set.add({static_cast<ClassId>(rng.index(src.size())), static_cast<ClassId>(rng.index(tgt.size())), score,
               Provenance::given});
    }
    auto path = dir / "m.tsv";
    save_mappings(set, src, tgt, path);
    auto back = load_mappings(path, src, tgt).mappings;
    REQUIRE(back.size() == set.size());
    for (std::size_t i = 0; i < set.size(); ++i) CHECK(back.entries()[i] == set.entries()[i]);
  }
}

TEST_CASE("MappingSet semantics") {
  MappingSet set;
  CHECK(set.add({1, 2, 0.5, Provenance::predicted}));
  CHECK_FALSE(set.add({1, 2, 0.7, Provenance::predicted}));
  set.add_keep_max({1, 2, 0.8, Provenance::extended});
  CHECK(set.find(1, 2)->score == 0.8);
  CHECK(set.find(1, 2)->provenance == Provenance::extended);
  set.add_keep_max({1, 2, 0.1, Provenance::given});
  CHECK(set.find(1, 2)->score == 0.8);
  auto t = set.transposed();
  CHECK(t.contains(2, 1));
  CHECK_FALSE(t.contains(1, 2));
  CHECK(set.find(5, 5) == nullptr);
}
