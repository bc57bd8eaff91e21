#include <algorithm>
#include <deque>
#include <numeric>
#include <set>

#include <json.hpp>

#include "ontoalign/error.hpp"
#include "ontoalign/refinement.hpp"

namespace ontoalign {
namespace {

// True when a is a (reflexive, transitive) subclass of b.
bool subsumed_by(const Ontology& o, ClassId a, ClassId b) {
  std::vector<ClassId> stack{a};
  std::vector<bool> seen(o.size(), false);
  while (!stack.empty()) {
    ClassId x = stack.back();
    stack.pop_back();
    if (x == b) return true;
    if (seen[x]) continue;
    seen[x] = true;
    for (ClassId p : o.at(x).parents) stack.push_back(p);
  }
  return false;
}

void add_disjointness(const Ontology& o, Atom offset, const RepairOptions& options,
                      std::set<std::pair<Atom, Atom>>& out) {
  auto add = [&](ClassId a, ClassId b) {
    if (a == b) return;
    Atom x = offset + a, y = offset + b;
    out.insert({std::min(x, y), std::max(x, y)});
  };
  if (options.sibling_disjointness) {
    for (const auto& parent : o.classes()) {
      const auto& kids = parent.children;
      for (std::size_t i = 0; i < kids.size(); ++i) {
        for (std::size_t j = i + 1; j < kids.size(); ++j) {
          if (subsumed_by(o, kids[i], kids[j]) || subsumed_by(o, kids[j], kids[i])) continue;
          add(kids[i], kids[j]);
        }
      }
    }
  }
  if (options.explicit_disjointness) {
    for (const auto& cls : o.classes()) {
      for (ClassId d : cls.disjoint) add(cls.id, d);
    }
  }
}

constexpr std::size_t kOntologyEdge = static_cast<std::size_t>(-1);

// Implication graph with per-edge mapping tags; mapping edges can be toggled.
class Reasoner {
 public:
  explicit Reasoner(const RepairProblem& p) : p_(p), out_(p.atom_count()), in_(p.atom_count()), disjoint_(p.atom_count()) {
    for (const auto& c : p.horn_clauses) link(c.from, c.to, kOntologyEdge);
    for (const auto& c : p.mapping_clauses) link(c.from, c.to, c.mapping);
    for (const auto& [a, b] : p.disjointness) {
      disjoint_[a].push_back(b);
      disjoint_[b].push_back(a);
    }
    mark_.assign(p.atom_count(), 0);
    back_mark_.assign(p.atom_count(), 0);
  }

  std::vector<bool> active;

  bool usable(std::size_t tag) const { return tag == kOntologyEdge || active[tag]; }

  // Forward closure of {x}; returns the conflict atoms (empty when satisfiable).
  std::vector<Atom> conflicts(Atom x) {
    ++epoch_;
    closure_.clear();
    closure_.push_back(x);
    mark_[x] = epoch_;
    for (std::size_t i = 0; i < closure_.size(); ++i) {
      for (const auto& [to, tag] : out_[closure_[i]]) {
        if (usable(tag) && mark_[to] != epoch_) {
          mark_[to] = epoch_;
          closure_.push_back(to);
        }
      }
    }
    std::vector<Atom> conflict;
    for (Atom a : closure_) {
      for (Atom b : disjoint_[a]) {
        if (mark_[b] == epoch_) {
          conflict.push_back(a);
          break;
        }
      }
    }
    return conflict;
  }

  // Mappings with an edge on some path from x to a conflict atom. Must follow
  // conflicts(x) for the same x.
  void implicated(const std::vector<Atom>& conflict, std::set<std::size_t>& out) {
    ++back_epoch_;
    std::vector<Atom> queue;
    for (Atom k : conflict) {
      back_mark_[k] = back_epoch_;
      queue.push_back(k);
    }
    for (std::size_t i = 0; i < queue.size(); ++i) {
      for (const auto& [from, tag] : in_[queue[i]]) {
        if (!usable(tag) || mark_[from] != epoch_) continue;
        if (tag != kOntologyEdge) out.insert(tag);
        if (back_mark_[from] != back_epoch_) {
          back_mark_[from] = back_epoch_;
          queue.push_back(from);
        }
      }
    }
  }

  // Atoms that can reach an endpoint of an active mapping edge; only these
  // can have a mapping in their derivations.
  std::vector<Atom> mapping_relevant_atoms() {
    std::vector<char> seen(p_.atom_count(), 0);
    std::vector<Atom> queue;
    for (const auto& c : p_.mapping_clauses) {
      if (active[c.mapping] && !seen[c.from]) {
        seen[c.from] = 1;
        queue.push_back(c.from);
      }
    }
    for (std::size_t i = 0; i < queue.size(); ++i) {
      for (const auto& [from, tag] : in_[queue[i]]) {
        if (usable(tag) && !seen[from]) {
          seen[from] = 1;
          queue.push_back(from);
        }
      }
    }
    std::sort(queue.begin(), queue.end());
    return queue;
  }

  std::set<std::size_t> all_implicated(std::size_t* unsat_count = nullptr) {
    std::set<std::size_t> out;
    std::size_t unsat = 0;
    for (Atom x : mapping_relevant_atoms()) {
      auto conflict = conflicts(x);
      if (conflict.empty()) continue;
      std::set<std::size_t> mine;
      implicated(conflict, mine);
      if (!mine.empty()) ++unsat;
      out.insert(mine.begin(), mine.end());
    }
    if (unsat_count) *unsat_count = unsat;
    return out;
  }

 private:
  void link(Atom from, Atom to, std::size_t tag) {
    out_[from].emplace_back(to, tag);
    in_[to].emplace_back(from, tag);
  }

  const RepairProblem& p_;
  std::vector<std::vector<std::pair<Atom, std::size_t>>> out_;
  std::vector<std::vector<std::pair<Atom, std::size_t>>> in_;
  std::vector<std::vector<Atom>> disjoint_;
  std::vector<std::uint32_t> mark_, back_mark_;
  std::uint32_t epoch_ = 0, back_epoch_ = 0;
  std::vector<Atom> closure_;
};

}  // namespace

RepairProblem build_repair_problem(const Ontology& source, const Ontology& target, const MappingSet& mappings,
                                   const RepairOptions& options) {
  RepairProblem p;
  p.source_atoms = source.size();
  p.target_atoms = target.size();
  p.restore_pass = options.restore_pass;
  for (const auto& cls : source.classes()) {
    for (ClassId parent : cls.parents) p.horn_clauses.push_back({p.source_atom(cls.id), p.source_atom(parent)});
  }
  for (const auto& cls : target.classes()) {
    for (ClassId parent : cls.parents) p.horn_clauses.push_back({p.target_atom(cls.id), p.target_atom(parent)});
  }
  std::set<std::pair<Atom, Atom>> disjoint;
  add_disjointness(source, 0, options, disjoint);
  add_disjointness(target, static_cast<Atom>(source.size()), options, disjoint);
  p.disjointness.assign(disjoint.begin(), disjoint.end());
  for (const auto& m : mappings) {
    std::size_t idx = p.mappings.size();
    p.mappings.push_back(m);
    p.mapping_iris.emplace_back(source.at(m.source).iri, target.at(m.target).iri);
    p.mapping_clauses.push_back({idx, p.source_atom(m.source), p.target_atom(m.target)});
    p.mapping_clauses.push_back({idx, p.target_atom(m.target), p.source_atom(m.source)});
  }
  return p;
}

std::vector<Atom> unsatisfiable_atoms(const RepairProblem& problem, const std::vector<bool>& active) {
  Reasoner r(problem);
  r.active = active;
  std::vector<Atom> out;
  for (Atom x = 0; x < problem.atom_count(); ++x) {
    if (!r.conflicts(x).empty()) out.push_back(x);
  }
  return out;
}

RepairResult repair(const RepairProblem& problem) {
  const std::size_t n = problem.mappings.size();
  Reasoner reasoner(problem);
  reasoner.active.assign(n, true);

  RepairResult result;
  result.kept.set_kind(MappingKind::output);
  result.removed.set_kind(MappingKind::output);
  result.unsat_before = unsatisfiable_atoms(problem, reasoner.active).size();

  // Removal priority: lowest score first; on ties the pair sorting last by IRI.
  auto removes_before = [&](std::size_t a, std::size_t b) {
    const double sa = problem.mappings[a].score, sb = problem.mappings[b].score;
    if (sa != sb) return sa < sb;
    return problem.mapping_iris[a] > problem.mapping_iris[b];
  };

  std::vector<std::size_t> removed_order;
  while (true) {
    std::size_t unsat = 0;
    auto implicated = reasoner.all_implicated(&unsat);
    if (implicated.empty()) break;
    std::size_t victim = *std::min_element(implicated.begin(), implicated.end(), removes_before);
    reasoner.active[victim] = false;
    removed_order.push_back(victim);
    result.removals.push_back({problem.mappings[victim], unsat});
  }

  if (problem.restore_pass && !removed_order.empty()) {
    std::vector<std::size_t> candidates = removed_order;
    std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) { return removes_before(b, a); });
    for (std::size_t m : candidates) {
      reasoner.active[m] = true;
      if (!reasoner.all_implicated().empty()) {
        reasoner.active[m] = false;
      } else {
        ++result.restored;
      }
    }
    std::erase_if(result.removals, [&](const Removal& r) {
      auto it = std::find(problem.mappings.begin(), problem.mappings.end(), r.mapping);
      return reasoner.active[static_cast<std::size_t>(it - problem.mappings.begin())];
    });
  }

  for (std::size_t i = 0; i < n; ++i) {
    (reasoner.active[i] ? result.kept : result.removed).add(problem.mappings[i]);
  }
  result.unsat_remaining = unsatisfiable_atoms(problem, reasoner.active);
  return result;
}

std::string repair_report_json(const RepairResult& result, const Ontology& source, const Ontology& target,
                               std::size_t input_size) {
  nlohmann::ordered_json removals = nlohmann::ordered_json::array();
  for (const auto& r : result.removals) {
    removals.push_back({{"source", source.at(r.mapping.source).iri},
                        {"target", target.at(r.mapping.target).iri},
                        {"score", r.mapping.score},
                        {"unsat_at_removal", r.unsat_at_removal}});
  }
  nlohmann::ordered_json report{{"input", input_size},
                                {"kept", result.kept.size()},
                                {"removed", result.removed.size()},
                                {"restored", result.restored},
                                {"unsat_before", result.unsat_before},
                                {"unsat_after", result.unsat_remaining.size()},
                                {"removals", removals}};
  return report.dump(2) + "\n";
}

}  // namespace ontoalign
