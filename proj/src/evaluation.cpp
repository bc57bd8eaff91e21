#include "ontoalign/evaluation.hpp"

#include <cmath>
#include <numeric>

#include "ontoalign/error.hpp"
#include "ontoalign/random.hpp"
#include "ontoalign/text.hpp"

namespace ontoalign {

const char* to_string(SplitMode mode) noexcept {
  return mode == SplitMode::unsupervised ? "unsupervised" : "semi-supervised";
}

SplitMode parse_split_mode(std::string_view text) {
  if (text == "unsupervised") return SplitMode::unsupervised;
  if (text == "semi-supervised" || text == "semi_supervised") return SplitMode::semi_supervised;
  throw Error(ErrorCode::config, "unknown split mode '" + std::string(text) + "'");
}

SplitSpec SplitSpec::defaults(SplitMode mode, std::uint64_t seed) {
  if (mode == SplitMode::unsupervised) return {mode, 0.0, 0.1, 0.9, seed};
  return {mode, 0.2, 0.1, 0.7, seed};
}

void SplitSpec::validate() const {
  for (double f : {train, val, test}) {
    if (!(f >= 0.0 && f <= 1.0)) throw Error(ErrorCode::config, "split fractions must lie in [0,1]");
  }
  if (std::abs(train + val + test - 1.0) > 1e-9) throw Error(ErrorCode::config, "split fractions must sum to 1");
  if (mode == SplitMode::unsupervised && train != 0.0) {
    throw Error(ErrorCode::config, "unsupervised split must have a zero train fraction");
  }
  if (mode == SplitMode::semi_supervised && train <= 0.0) {
    throw Error(ErrorCode::config, "semi-supervised split needs a positive train fraction");
  }
}

ReferenceSplit split_references(const MappingSet& refs, const SplitSpec& spec) {
  spec.validate();
  std::vector<std::size_t> order(refs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(spec.seed);
  rng.shuffle(std::span<std::size_t>(order));
  const auto n = static_cast<double>(refs.size());
  const auto n_train = static_cast<std::size_t>(std::llround(spec.train * n));
  const auto n_val = std::min(refs.size() - n_train, static_cast<std::size_t>(std::llround(spec.val * n)));
  ReferenceSplit out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& m = refs.entries()[order[i]];
    (i < n_train ? out.train : i < n_train + n_val ? out.val : out.test).add(m);
  }
  return out;
}

EvalReport evaluate(const PairSet& out, const PairSet& refs, const PairSet& ignored) {
  EvalReport r;
  r.ignored_size = ignored.size();
  for (const auto& p : out) {
    if (ignored.count(p)) continue;
    ++r.output_considered;
    if (refs.count(p)) ++r.true_positives;
  }
  for (const auto& p : refs) {
    if (!ignored.count(p)) ++r.reference_considered;
  }
  r.precision_undefined = r.output_considered == 0;
  r.recall_undefined = r.reference_considered == 0;
  r.precision = r.precision_undefined ? 0.0 : static_cast<double>(r.true_positives) / static_cast<double>(r.output_considered);
  r.recall = r.recall_undefined ? 0.0 : static_cast<double>(r.true_positives) / static_cast<double>(r.reference_considered);
  r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

EvalReport evaluate(const MappingSet& out, const MappingSet& refs, const MappingSet& ignored) {
  return evaluate(out.pairs(), refs.pairs(), ignored.pairs());
}

PairSet pair_union(std::initializer_list<const MappingSet*> sets) {
  PairSet out;
  for (const auto* s : sets) {
    if (!s) continue;
    for (const auto& m : *s) out.insert(m.key());
  }
  return out;
}

std::vector<double> default_lambda_grid() { return {0.90, 0.95, 0.97, 0.99, 0.995, 0.997, 0.999}; }

ValidationResult validate_hyperparams(const std::map<Direction, const MappingSet*>& runs, const MappingSet& val,
                                      const PairSet& ignored, std::span<const double> lambda_grid) {
  if (val.empty()) throw Error(ErrorCode::invalid_argument, "validation set is empty");
  if (lambda_grid.empty()) throw Error(ErrorCode::invalid_argument, "lambda grid is empty");
  const PairSet refs = val.pairs();
  ValidationResult result;
  bool have_best = false;
  // std::map iterates src2tgt, tgt2src, combined in enum order.
  for (const auto& [tau, mappings] : runs) {
    if (!mappings) continue;
    for (double lambda : lambda_grid) {
      auto report = evaluate(threshold(*mappings, lambda).pairs(), refs, ignored);
      report.tau = tau;
      report.lambda = lambda;
      result.grid.push_back({tau, lambda, report});
      bool better = !have_best || report.f1 > result.best.f1 ||
                    (report.f1 == result.best.f1 && lambda > result.lambda);
      if (better) {
        have_best = true;
        result.best = report;
        result.tau = tau;
        result.lambda = lambda;
      }
    }
  }
  if (!have_best) throw Error(ErrorCode::invalid_argument, "no scored mapping sets to validate");
  return result;
}

std::string grid_csv(const std::vector<GridCell>& grid) {
  std::string out = "direction,lambda,precision,recall,f1\n";
  for (const auto& cell : grid) {
    out += to_string(cell.tau);
    out += ',' + format_double(cell.lambda) + ',' + format_double(cell.report.precision) + ',' +
           format_double(cell.report.recall) + ',' + format_double(cell.report.f1) + '\n';
  }
  return out;
}

}  // namespace ontoalign
