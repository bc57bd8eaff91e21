#include <doctest.h>

#include "ontoalign/prediction.hpp"
#include "support.hpp"

using namespace ontoalign;
using testing::id_of;
using testing::rec;

namespace {

struct Fixture {
  Ontology src = testing::make_ontology(
      "s", {rec("s:heart", {"heart"}), rec("s:valve", {"mitral valve"}), rec("s:lung", {"left lung"}),
            rec("s:none", {"qq"}), rec("s:unlabeled", {})});
  Ontology tgt = testing::make_ontology(
      "t", {rec("t:heart", {"heart", "cor"}), rec("t:valve", {"bicuspid valve"}), rec("t:lung", {"lung"}),
            rec("t:vein", {"vein"})});
  std::shared_ptr<const WordPieceVocab> vocab = testing::pool_vocab();
  SubwordIndex src_index = SubwordIndex::build(src, vocab);
  SubwordIndex tgt_index = SubwordIndex::build(tgt, vocab);
};

bool same_entries(const MappingSet& a, const MappingSet& b) { return a.entries() == b.entries(); }

}  // namespace

TEST_CASE("per-class argmax over candidates") {
  Fixture f;
  MockScorer mock;
  auto run = predict_direction(f.src, f.tgt, f.tgt_index, mock, {.k = 10});
  const auto& m = run.mappings;
  CHECK(m.size() == 3);
  CHECK(m.find(id_of(f.src, "s:heart"), id_of(f.tgt, "t:heart"))->score == 1.0);
  CHECK(m.find(id_of(f.src, "s:valve"), id_of(f.tgt, "t:valve"))->score == doctest::Approx(1.0 / 3.0));
  CHECK(m.find(id_of(f.src, "s:lung"), id_of(f.tgt, "t:lung"))->score == doctest::Approx(0.5));
  CHECK(run.stats.classes_processed == 4);
  CHECK(run.stats.classes_with_candidates == 3);
  CHECK(run.stats.short_circuit_hits >= 1);
  for (const auto& e : m) CHECK(e.provenance == Provenance::predicted);
}

TEST_CASE("k limits the candidates and ties keep the better-selected class") {
  auto src = testing::make_ontology("s", {rec("a", {"left heart"})});
  auto tgt = testing::make_ontology("t", {rec("t1", {"heart"}), rec("t2", {"left heart"}), rec("t3", {"lung"})});
  auto vocab = testing::pool_vocab();
  auto idx = SubwordIndex::build(tgt, vocab);
  testing::TableScorer flat({}, 0.4);
  auto run = predict_direction(src, tgt, idx, flat, {.k = 1});
  REQUIRE(run.mappings.size() == 1);
  CHECK(run.mappings.entries()[0].target == id_of(tgt, "t2"));
  CHECK(run.stats.candidates_scored == 1);

  // Equal scores: the higher selection score wins, then the smaller IRI.
  auto wall = testing::make_ontology("s", {rec("a", {"left heart wall"})});
  auto by_selection = predict_direction(wall, tgt, idx, flat, {.k = 5});
  REQUIRE(by_selection.mappings.size() == 1);
  CHECK(by_selection.mappings.entries()[0].target == id_of(tgt, "t2"));

  auto tgt2 = testing::make_ontology("t", {rec("z1", {"heart"}), rec("a1", {"heart"}), rec("x", {"lung"})});
  auto idx2 = SubwordIndex::build(tgt2, vocab);
  auto by_iri = predict_direction(wall, tgt2, idx2, flat, {.k = 5});
  REQUIRE(by_iri.mappings.size() == 1);
  CHECK(by_iri.mappings.entries()[0].target == id_of(tgt2, "a1"));
  CHECK(by_iri.mappings.entries()[0].score == doctest::Approx(0.4));
}

TEST_CASE("scoring failures exclude candidates without aborting") {
  Fixture f;
  testing::FailingScorer failing;
  auto run = predict_direction(f.src, f.tgt, f.tgt_index, failing, {.k = 10});
  // Only the short-circuited pair survives.
  CHECK(run.mappings.size() == 1);
  CHECK(run.stats.score_unavailable >= 2);
  CHECK(run.stats.classes_skipped == 2);

  testing::FailingScorer bad_arg(ErrorCode::invalid_argument);
  CHECK_THROWS_AS(predict_direction(f.src, f.tgt, f.tgt_index, bad_arg, {.k = 10}), Error);
  CHECK_THROWS_AS(predict_direction(f.src, f.tgt, f.src_index, bad_arg, {.k = 10}), Error);
  CHECK_THROWS_AS(predict_direction(f.src, f.tgt, f.tgt_index, bad_arg, {.k = 0}), Error);
}

TEST_CASE("combine keeps the higher score and threshold keeps scores at or above lambda") {
  MappingSet a, b;
  a.add({0, 0, 0.6, Provenance::predicted});
  a.add({1, 1, 0.9, Provenance::predicted});
  b.add({0, 0, 0.8, Provenance::predicted});
  b.add({2, 2, 0.3, Provenance::predicted});
  auto c = combine(a, b);
  CHECK(c.size() == 3);
  CHECK(c.find(0, 0)->score == 0.8);
  CHECK(c.find(1, 1)->score == 0.9);

  auto t = threshold(c, 0.8);
  CHECK(t.size() == 2);
  CHECK(t.contains(0, 0));
  CHECK_FALSE(t.contains(2, 2));
  CHECK(threshold(c, 0.0).size() == 3);
  CHECK(threshold(c, 1.0).empty());
}

TEST_CASE("threshold is monotone in lambda") {
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    MappingSet m;
    const std::size_t n = rng.index(50);
    for (std::size_t i = 0; i < n; ++i) {
      m.add({static_cast<ClassId>(i), static_cast<ClassId>(rng.index(40)),
             static_cast<double>(rng.index(1001)) / 1000.0, Provenance::predicted});
    }
    const double lo = static_cast<double>(rng.index(1001)) / 1000.0;
    const double hi = lo + static_cast<double>(rng.index(1001)) / 1000.0 * (1.0 - lo);
    auto big = threshold(m, lo), small = threshold(m, hi);
    CHECK(small.size() <= big.size());
    for (const auto& e : small) CHECK(big.contains(e.source, e.target));
  }
}

TEST_CASE("prediction with k = |C'| matches a brute-force argmax") {
  Rng rng(77);
  auto vocab = testing::pool_vocab();
  MockScorer mock;
  for (int trial = 0; trial < 25; ++trial) {
    auto src = testing::random_ontology(rng, "s", {.classes = 1 + rng.index(30)});
    auto tgt = testing::random_ontology(rng, "t", {.classes = 1 + rng.index(30)});
    auto idx = SubwordIndex::build(tgt, vocab);
    auto run = predict_direction(src, tgt, idx, mock, {.k = tgt.size(), .batch_size = 3});
    auto want = testing::brute_force_predict(src, tgt, *vocab, mock);
    CHECK(same_entries(run.mappings, want));
  }
}

TEST_CASE("predict_all orients every mapping source to target and is worker-independent") {
  Rng rng(12);
  auto vocab = testing::pool_vocab();
  MockScorer mock;
  auto src = testing::random_ontology(rng, "s", {.classes = 40});
  auto tgt = testing::random_ontology(rng, "t", {.classes = 40});
  auto si = SubwordIndex::build(src, vocab), ti = SubwordIndex::build(tgt, vocab);
  auto one = predict_all(src, tgt, si, ti, mock, {.k = 10, .workers = 1});
  auto many = predict_all(src, tgt, si, ti, mock, {.k = 10, .workers = 6});
  for (auto d : {Direction::src2tgt, Direction::tgt2src, Direction::combined}) {
    CHECK(same_entries(one.get(d), many.get(d)));
  }
  for (const auto& e : one.get(Direction::tgt2src)) {
    CHECK(e.source < src.size());
    CHECK(e.target < tgt.size());
  }
  CHECK(one.combined.size() >= one.src2tgt.mappings.size());
  for (const auto& e : one.src2tgt.mappings) CHECK(one.combined.find(e.source, e.target)->score >= e.score);
  CHECK(parse_direction("tgt2src") == Direction::tgt2src);
  CHECK_THROWS_AS(parse_direction("both"), Error);
}
