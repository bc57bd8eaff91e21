#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "ontoalign/subword_index.hpp"
#include "support.hpp"

using namespace ontoalign;
using testing::id_of;
using testing::brute_force_select;
using testing::pool_vocab;
using testing::rec;
using testing::strip_continuation;

TEST_CASE("WordPiece greedy longest match") {
  WordPieceVocab v({"[UNK]", "play", "##ing", "##i", "p", "sacro", "##coccygeal", "##cocc"});
  CHECK(v.tokenize("playing") == std::vector<std::string>{"play", "##ing"});
  CHECK(v.tokenize("xyz") == std::vector<std::string>{"[UNK]"});
  CHECK(v.tokenize("sacrococcygeal") == std::vector<std::string>{"sacro", "##coccygeal"});
  CHECK(v.tokenize("play xyz playing") == std::vector<std::string>{"play", "[UNK]", "play", "##ing"});
  CHECK(v.tokenize("") .empty());
  CHECK(WordPieceVocab({"[UNK]", "a"}, "[UNK]", 3).tokenize("aaaa") == std::vector<std::string>{"[UNK]"});
}

TEST_CASE("vocabulary files") {
  auto v = WordPieceVocab::parse("[UNK]\r\nheart\n##s\n\n");
  CHECK(v.size() == 3);
  CHECK(v.contains("##s"));
  CHECK(v.tokenize("hearts") == std::vector<std::string>{"heart", "##s"});
  CHECK_THROWS_AS(WordPieceVocab::parse("a\nb\na\n"), Error);
  CHECK_THROWS_AS(WordPieceVocab::parse(""), Error);
  auto mini = WordPieceVocab::load(ONTOALIGN_TEST_DATA "/mini/vocab.txt");
  CHECK(mini.tokenize("kidney") == std::vector<std::string>{"kid", "##ney"});
}

TEST_CASE("tokenizing known words reconstructs them") {
  auto vocab = pool_vocab();
  Rng rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    const auto label = testing::random_label(rng);
    auto pieces = vocab->tokenize(label);
    std::string rebuilt;
    for (const auto& p : pieces) {
      CHECK(p != vocab->unk_token());
      if (p.rfind("##", 0) != 0 && !rebuilt.empty()) rebuilt += ' ';
      rebuilt += strip_continuation(p);
    }
    CHECK(rebuilt == label);
  }
}

TEST_CASE("postings and class tokens of a small index") {
  auto o = testing::make_ontology("o", {rec("A", {"heart valve"}), rec("B", {"left heart"}), rec("C", {"qq"}),
                                        rec("D", {})});
  auto idx = SubwordIndex::build(o, pool_vocab());
  REQUIRE(idx.class_count() == 4);
  auto heart = idx.find_token("heart");
  REQUIRE(heart.has_value());
  CHECK(std::vector<ClassId>(idx.postings(*heart).begin(), idx.postings(*heart).end()) ==
        std::vector<ClassId>{id_of(o, "A"), id_of(o, "B")});
  CHECK(idx.idf(*heart) == doctest::Approx(std::log10(2.0)));
  CHECK(idx.class_tokens(id_of(o, "D")).empty());
  // Token ids follow string order.
  for (TokenId t = 1; t < idx.token_count(); ++t) CHECK(idx.token(t - 1) < idx.token(t));
  CHECK(idx.tokens_of(std::vector<std::string>{"heart heart", "valve"}) == std::vector<std::string>{"heart", "valve"});
}

TEST_CASE("selection score sums idf over shared tokens") {
  std::vector<ClassRecord> records;
  for (int i = 0; i < 110; ++i) records.push_back(rec("c" + std::to_string(1000 + i), {"x"}));
  auto o = Ontology::from_records("big", records);
  std::vector<ClassId> ten, hundred;
  for (ClassId c = 0; c < 10; ++c) ten.push_back(c);
  for (ClassId c = 0; c < 100; ++c) hundred.push_back(c);
  auto idx = SubwordIndex::from_postings(o, {{"rare", ten}, {"common", hundred}}, 1000);
  auto top = idx.select_candidates(std::vector<std::string>{"rare", "common", "rare", "absent"}, 1);
  REQUIRE(top.size() == 1);
  CHECK(std::abs(top[0].score - 3.0) <= 1e-12);
  CHECK(o.at(top[0].id).iri == "c1000");

  auto all = idx.select_candidates(std::vector<std::string>{"rare", "common"}, 500);
  CHECK(all.size() == 100);
  CHECK(std::abs(all.back().score - 1.0) <= 1e-12);
  CHECK(idx.select_candidates(std::vector<std::string>{"absent"}, 5).empty());
  CHECK_THROWS_AS(idx.select_candidates(std::vector<std::string>{"rare"}, 0), Error);
}

TEST_CASE("a token present in every class contributes nothing") {
  auto o = testing::make_ontology("o", {rec("A", {"heart"}), rec("B", {"heart"})});
  auto idx = SubwordIndex::build(o, pool_vocab());
  CHECK(idx.select_candidates(std::vector<std::string>{"heart"}, 5).empty());
}

TEST_CASE("postings and class tokens agree on random ontologies") {
  Rng rng(31);
  auto vocab = pool_vocab();
  for (int trial = 0; trial < 40; ++trial) {
    auto o = testing::random_ontology(rng, "p", {.classes = 1 + rng.index(50)});
    auto idx = SubwordIndex::build(o, vocab, 1 + rng.index(4));
    std::size_t from_postings = 0, from_classes = 0;
    for (TokenId t = 0; t < idx.token_count(); ++t) {
      for (ClassId c : idx.postings(t)) {
        auto ct = idx.class_tokens(c);
        CHECK(std::binary_search(ct.begin(), ct.end(), t));
        ++from_postings;
      }
    }
    for (const auto& c : o.classes()) {
      for (TokenId t : idx.class_tokens(c.id)) {
        auto p = idx.postings(t);
        CHECK(std::binary_search(p.begin(), p.end(), c.id));
        ++from_classes;
      }
      if (!c.labeled()) CHECK(idx.class_tokens(c.id).empty());
    }
    CHECK(from_postings == from_classes);
  }
}

TEST_CASE("candidate selection matches a brute-force reference") {
  Rng rng(41);
  auto vocab = pool_vocab();
  for (int trial = 0; trial < 60; ++trial) {
    auto src = testing::random_ontology(rng, "s", {.classes = 1 + rng.index(40)});
    auto tgt = testing::random_ontology(rng, "t", {.classes = 1 + rng.index(40)});
    auto idx = SubwordIndex::build(tgt, vocab, 2);
    const std::size_t k = 1 + rng.index(tgt.size() + 2);
    for (const auto& c : src.classes()) {
      auto q = idx.tokens_of(c.labels);
      auto got = idx.select_candidates(q, k);
      auto want = brute_force_select(tgt, *vocab, q, k);
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].id == want[i].id);
        CHECK(std::abs(got[i].score - want[i].score) <= 1e-12);
      }
    }
  }
}

TEST_CASE("index build is independent of worker count") {
  Rng rng(4);
  auto o = testing::random_ontology(rng, "w", {.classes = 60});
  auto vocab = pool_vocab();
  CHECK(SubwordIndex::build(o, vocab, 1).to_json_text() == SubwordIndex::build(o, vocab, 8).to_json_text());
  CHECK_THROWS_AS(SubwordIndex::build(o, nullptr), Error);
}
