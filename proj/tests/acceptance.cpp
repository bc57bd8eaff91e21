// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.
#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include <json.hpp>

#include "ontoalign/config.hpp"
#include "ontoalign/evaluation.hpp"
#include "ontoalign/experiment.hpp"
#include "ontoalign/prediction.hpp"
#include "ontoalign/refinement.hpp"
#include "ontoalign/text.hpp"
#include "support.hpp"

using namespace ontoalign;
using testing::id_of;
using testing::rec;
namespace fs = std::filesystem;

namespace {

const fs::path kMini = fs::path(ONTOALIGN_TEST_DATA) / "mini";

// A criterion returns an empty string on success, else what went wrong.
using Check = std::function<std::string()>;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string candidate_selection_oracle() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(2024);
  auto vocab = testing::pool_vocab();
  std::size_t classes_checked = 0;
  for (int pair = 0; pair < 20; ++pair) {
    auto src = testing::random_ontology(rng, "s", {.classes = 1 + rng.index(50)});
    auto tgt = testing::random_ontology(rng, "t", {.classes = 1 + rng.index(50)});
    auto idx = SubwordIndex::build(tgt, vocab);
    for (const auto& c : src.classes()) {
      if (!c.labeled()) continue;
      auto query = idx.tokens_of(c.labels);
      auto got = idx.select_candidates(query, tgt.size());
      auto want = testing::brute_force_select(tgt, *vocab, query, tgt.size());
      if (got != want) return "pair " + std::to_string(pair) + ", class " + c.iri + ": candidate lists differ";
      ++classes_checked;
    }
  }
  const auto ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
  if (ms >= 5000) return "took " + std::to_string(ms) + " ms";
  std::cout << "  " << classes_checked << " classes in " << ms << " ms\n";
  return {};
}

std::string selection_score_numeric() {
  std::vector<ClassRecord> records;
  for (int i = 0; i < 110; ++i) records.push_back(rec("c" + std::to_string(1000 + i), {"x"}));
  auto o = Ontology::from_records("big", records);
  std::vector<ClassId> ten, hundred;
  for (ClassId c = 0; c < 10; ++c) ten.push_back(c);
  for (ClassId c = 0; c < 100; ++c) hundred.push_back(c);
  auto idx = SubwordIndex::from_postings(o, {{"rare", ten}, {"common", hundred}}, 1000);
  auto top = idx.select_candidates(std::vector<std::string>{"rare", "common"}, 1);
  if (top.size() != 1) return "no candidate returned";
  const double err = std::abs(top[0].score - 3.0);
  if (err > 1e-12) return "score " + format_double(top[0].score);
  return {};
}

// Twenty classes per side in matching binary trees. Each true match shares
// exactly one label; every other label is unique across both ontologies.
std::string pipeline_exactness() {
  const auto& pool = testing::word_pool();
  std::vector<ClassRecord> s, t;
  for (std::size_t i = 0; i < 20; ++i) {
    const std::string shared = pool[i] + " " + pool[(i + 7) % 30];
    std::vector<std::string> sp, tp;
    if (i) {
      sp.push_back("s" + std::to_string((i - 1) / 2));
      tp.push_back("t" + std::to_string((i - 1) / 2));
    }
    s.push_back(rec("s" + std::to_string(i), {shared, pool[(i + 3) % 30] + " of " + pool[i]}, sp));
    t.push_back(rec("t" + std::to_string(i), {shared, pool[i] + " region " + pool[(i + 11) % 30]}, tp));
  }
  auto src = Ontology::from_records("s", s), tgt = Ontology::from_records("t", t);
  for (const auto& c : src.classes()) {
    for (const auto& d : tgt.classes()) {
      bool share = false;
      for (const auto& l : c.labels) share = share || std::count(d.labels.begin(), d.labels.end(), l);
      if (share != (c.iri.substr(1) == d.iri.substr(1))) return "fixture is not clean at " + c.iri + "/" + d.iri;
    }
  }
  MappingSet refs(MappingKind::reference_eq);
  for (std::size_t i = 0; i < 20; ++i) {
    refs.add({id_of(src, "s" + std::to_string(i)), id_of(tgt, "t" + std::to_string(i)), 1.0, Provenance::given});
  }

  testing::TempDir dir;
  write_file(dir / "source.json", to_json_text(src));
  write_file(dir / "target.json", to_json_text(tgt));
  save_mappings(refs, src, tgt, dir / "refs.tsv");
  std::string vocab = "[PAD]\n[UNK]\n";
  for (const auto& w : pool) vocab += w + "\n";
  for (char ch = 'a'; ch <= 'z'; ++ch) vocab += std::string(1, ch) + "\n##" + ch + "\n";
  write_file(dir / "vocab.txt", vocab);
  auto cfg = parse_config_text(R"({"source":"source.json","target":"target.json","vocab":"vocab.txt",
    "references":{"equivalent":"refs.tsv"},"scorer":{"kind":"string"},"split":{"seed":5},"output":"out"})",
                               dir.path());
  auto outcome = run_experiment(cfg);
  auto summary = nlohmann::json::parse(outcome.summary_json);
  if (summary.at("split").at("test").get<int>() == 0) return "empty test split";
  const auto& fin = summary.at("final");
  for (const char* m : {"precision", "recall", "f1"}) {
    if (fin.at(m).get<double>() != 1.0) return std::string(m) + " = " + fin.at(m).dump();
  }
  return {};
}

std::string special_case_dominance() {
  Rng rng(55);
  auto vocab = testing::pool_vocab();
  StringMatchScorer string_scorer;
  EditSimilarityScorer edit_scorer;
  std::size_t compared = 0;
  for (int trial = 0; trial < 30; ++trial) {
    auto src = testing::random_ontology(rng, "s", {.classes = 2 + rng.index(40)});
    auto tgt = testing::random_ontology(rng, "t", {.classes = 2 + rng.index(40)});
    auto si = SubwordIndex::build(src, vocab), ti = SubwordIndex::build(tgt, vocab);
    const PredictOptions opts{.k = 1 + rng.index(20)};
    auto by_string = predict_all(src, tgt, si, ti, string_scorer, opts);
    auto by_edit = predict_all(src, tgt, si, ti, edit_scorer, opts);
    for (auto d : {Direction::src2tgt, Direction::tgt2src, Direction::combined}) {
      auto a = threshold(by_string.get(d), 1.0), b = threshold(by_edit.get(d), 1.0);
      for (const auto& m : a) {
        if (!b.contains(m.source, m.target)) {
          return "trial " + std::to_string(trial) + ": " + src.at(m.source).iri + "~" + tgt.at(m.target).iri +
                 " missing from the edit-similarity set";
        }
        ++compared;
      }
    }
  }
  std::cout << "  " << compared << " string-match mappings checked\n";
  return {};
}

std::string extension_trace() {
  auto src = testing::make_ontology("s", {rec("c0", {"c zero"}, {"c1"}), rec("c1", {"c one"}, {"c2"}),
                                          rec("c2", {"c two"}, {"c3"}), rec("c3", {"c three"})});
  auto tgt = testing::make_ontology("t", {rec("d0", {"d zero"}, {"d1"}), rec("d1", {"d one"}, {"d2"}),
                                          rec("d2", {"d two"}, {"d3"}), rec("d3", {"d three"})});
  testing::TableScorer scorer({{{"c zero", "d zero"}, 0.95}, {{"c two", "d two"}, 0.92}, {{"c three", "d three"}, 0.5}},
                              0.1);
  MappingSet seeds;
  seeds.add({id_of(src, "c1"), id_of(tgt, "d1"), 0.99, Provenance::predicted});
  auto r = extend(seeds, src, tgt, scorer, {.kappa = 0.9});
  const PairSet want{{id_of(src, "c0"), id_of(tgt, "d0")}, {id_of(src, "c2"), id_of(tgt, "d2")}};
  if (r.extended.pairs() != want) return "extended set has " + std::to_string(r.extended.size()) + " pairs";
  if (r.generations != 2) return std::to_string(r.generations) + " generations";
  return {};
}

std::string repair_coherence() {
  auto src = testing::make_ontology("s", {rec("P", {"p"}), rec("A", {"a"}, {"P"}), rec("B", {"b"}, {"P"})});
  auto tgt = testing::make_ontology("t", {rec("X", {"x"})});
  MappingSet m;
  m.add({id_of(src, "A"), id_of(tgt, "X"), 0.9, Provenance::predicted});
  m.add({id_of(src, "B"), id_of(tgt, "X"), 0.6, Provenance::predicted});
  auto problem = build_repair_problem(src, tgt, m);
  auto r = repair(problem);
  if (r.removed.size() != 1 || !r.removed.contains(id_of(src, "B"), id_of(tgt, "X"))) {
    return "removed " + std::to_string(r.removed.size()) + " mappings, not just B~X";
  }
  std::vector<bool> active(problem.mappings.size());
  for (std::size_t i = 0; i < active.size(); ++i) {
    active[i] = r.kept.contains(problem.mappings[i].source, problem.mappings[i].target);
  }
  const auto baseline = testing::brute_unsat(problem, std::vector<bool>(active.size(), false));
  const auto after = testing::brute_unsat(problem, active);
  if (after != baseline) return std::to_string(after.size() - baseline.size()) + " mapping-induced unsatisfiable";
  return {};
}

PairSet random_pairs(Rng& rng, std::size_t max, std::size_t universe) {
  PairSet out;
  for (std::size_t i = 0, n = rng.index(max + 1); i < n; ++i) {
    out.insert({static_cast<ClassId>(rng.index(universe)), static_cast<ClassId>(rng.index(universe))});
  }
  return out;
}

std::string metric_formulas() {
  Rng rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t universe = 2 + rng.index(14);
    auto out = random_pairs(rng, 100, universe), refs = random_pairs(rng, 100, universe),
         ignored = random_pairs(rng, 100, universe);
    PairSet out_kept, refs_kept, tp;
    for (const auto& x : out) {
      if (!ignored.count(x)) out_kept.insert(x);
    }
    for (const auto& x : refs) {
      if (!ignored.count(x)) refs_kept.insert(x);
    }
    for (const auto& x : out_kept) {
      if (refs_kept.count(x)) tp.insert(x);
    }
    const double p = out_kept.empty() ? 0.0 : double(tp.size()) / double(out_kept.size());
    const double r = refs_kept.empty() ? 0.0 : double(tp.size()) / double(refs_kept.size());
    const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
    auto got = evaluate(out, refs, ignored);
    if (std::abs(got.precision - p) > 1e-12 || std::abs(got.recall - r) > 1e-12 || std::abs(got.f1 - f) > 1e-12) {
      return "trial " + std::to_string(trial) + " disagrees with the oracle";
    }
    auto padded_out = out, padded_refs = refs;
    padded_out.insert(ignored.begin(), ignored.end());
    padded_refs.insert(ignored.begin(), ignored.end());
    auto padded = evaluate(padded_out, padded_refs, ignored);
    if (padded.precision != got.precision || padded.recall != got.recall || padded.f1 != got.f1) {
      return "trial " + std::to_string(trial) + ": ignored pairs changed the scores";
    }
  }
  return {};
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = "'" + std::string(ONTOALIGN_CLI) + "' " + args + " >'" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string determinism() {
  testing::TempDir dir;
  const std::vector<std::pair<std::string, int>> runs{{"a", 1}, {"b", 1}, {"c", 4}, {"d", 8}};
  for (const auto& [name, workers] : runs) {
    const int code = run_cli("--config '" + (kMini / "config.json").string() + "' --workers " +
                                 std::to_string(workers) + " --out '" + (dir / name).string() + "' run",
                             dir / (name + ".log"));
    if (code != 0) return "run with " + std::to_string(workers) + " workers exited " + std::to_string(code);
  }
  std::vector<fs::path> files{"summary.json"};
  for (const auto& e : fs::recursive_directory_iterator(dir / "a")) {
    if (e.path().extension() == ".tsv") files.push_back(fs::relative(e.path(), dir / "a"));
  }
  if (files.size() < 5) return "expected mapping TSVs in the run directory";
  for (const auto& f : files) {
    const auto ref = slurp(dir / "a" / f);
    for (const auto& [name, workers] : runs) {
      if (slurp(dir / name / f) != ref) {
        return f.string() + " differs with " + std::to_string(workers) + " workers";
      }
    }
  }
  std::cout << "  " << files.size() << " files identical across " << runs.size() << " runs\n";
  return {};
}

std::string threshold_monotonicity() {
  Rng rng(91);
  auto vocab = testing::pool_vocab();
  MockScorer mock;
  const auto grid = default_lambda_grid();
  std::vector<double> sorted = grid;
  std::sort(sorted.begin(), sorted.end());
  for (int trial = 0; trial < 30; ++trial) {
    auto src = testing::random_ontology(rng, "s", {.classes = 2 + rng.index(40)});
    auto tgt = testing::random_ontology(rng, "t", {.classes = 2 + rng.index(40)});
    auto si = SubwordIndex::build(src, vocab), ti = SubwordIndex::build(tgt, vocab);
    auto all = predict_all(src, tgt, si, ti, mock, {.k = 1 + rng.index(20)});
    for (auto d : {Direction::src2tgt, Direction::tgt2src, Direction::combined}) {
      std::size_t prev = all.get(d).size();
      for (double lambda : sorted) {
        const std::size_t n = threshold(all.get(d), lambda).size();
        if (n > prev) return "size grew at lambda " + format_double(lambda);
        prev = n;
      }
    }
  }
  return {};
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::err);
  const std::vector<std::pair<std::string, Check>> criteria{
      {"candidate-selection oracle", candidate_selection_oracle},
      {"selection score numeric check", selection_score_numeric},
      {"pipeline exactness", pipeline_exactness},
      {"special-case dominance", special_case_dominance},
      {"extension trace", extension_trace},
      {"repair coherence", repair_coherence},
      {"metric formulas", metric_formulas},
      {"determinism", determinism},
      {"threshold monotonicity", threshold_monotonicity},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    std::string problem;
    try {
      problem = check();
    } catch (const std::exception& e) {
      problem = std::string("exception: ") + e.what();
    }
    if (problem.empty()) {
      std::cout << "PASS " << name << "\n";
    } else {
      std::cout << "FAIL " << name << ": " << problem << "\n";
      ++failed;
    }
    std::cout.flush();
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
  return failed ? 1 : 0;
}
