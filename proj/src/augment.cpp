#include "flowdial/augment.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "flowdial/error.hpp"
#include "flowdial/graph.hpp"
#include "flowdial/rng.hpp"
#include "flowdial/text.hpp"

namespace flowdial::augment {

using plantuml::Action;
using plantuml::ActivityAst;
using plantuml::Block;
using plantuml::Decision;
using plantuml::LabelRole;
using plantuml::Node;
using plantuml::Repeat;

nlohmann::json to_json(const LoopSite& site) {
  nlohmann::json path = nlohmann::json::array();
  for (const auto& s : site.block_path) path.push_back({s.node_index, s.branch_index});
  return {{"block_path", path},       {"target_index", site.target_index},
          {"span", site.span},         {"condition", site.condition},
          {"loop_guard", site.loop_guard}, {"exit_guard", site.exit_guard}};
}

std::string loop_condition_for(const std::string& last_label) {
  std::string_view base = text::trim(last_label);
  while (!base.empty() && (base.back() == '?' || base.back() == '.')) base.remove_suffix(1);
  return std::string(base) + " unsuccessful?";
}

namespace {

std::set<std::string> all_labels(const ActivityAst& ast) {
  std::set<std::string> labels;
  plantuml::for_each_label(ast, [&](const std::string& l, LabelRole) { labels.insert(l); });
  return labels;
}

void collect_sites(const Block& block, std::vector<BlockStep>& path, std::size_t max_span,
                   const std::set<std::string>& labels, std::vector<LoopSite>& out) {
  std::size_t i = 0;
  while (i < block.size()) {
    if (!std::holds_alternative<Action>(block[i].value)) {
      if (const auto* d = std::get_if<Decision>(&block[i].value)) {
        for (std::size_t b = 0; b < d->branches.size(); ++b) {
          path.push_back({i, b});
          collect_sites(d->branches[b].body, path, max_span, labels, out);
          path.pop_back();
        }
      }
      ++i;
      continue;
    }
    std::size_t run_end = i;
    while (run_end < block.size() && std::holds_alternative<Action>(block[run_end].value)) ++run_end;
    for (std::size_t start = i; start < run_end; ++start) {
      for (std::size_t span = 1; span <= run_end - start && span <= max_span; ++span) {
        const auto& last = std::get<Action>(block[start + span - 1].value).label;
        std::string condition = loop_condition_for(last);
        if (labels.count(condition)) continue;
        out.push_back({path, start, span, std::move(condition), "yes", "no"});
      }
    }
    i = run_end;
  }
}

Block* locate_block(Block& root, const std::vector<BlockStep>& path) {
  Block* block = &root;
  for (const auto& step : path) {
    if (step.node_index >= block->size()) return nullptr;
    auto* d = std::get_if<Decision>(&(*block)[step.node_index].value);
    if (!d || step.branch_index >= d->branches.size()) return nullptr;
    block = &d->branches[step.branch_index].body;
  }
  return block;
}

std::multiset<std::string> action_labels(const ActivityAst& ast) {
  std::multiset<std::string> labels;
  plantuml::for_each_label(ast, [&](const std::string& l, LabelRole role) {
    if (role == LabelRole::Action) labels.insert(l);
  });
  return labels;
}

std::vector<std::string> condition_labels(const ActivityAst& ast) {
  std::vector<std::string> labels;
  plantuml::for_each_label(ast, [&](const std::string& l, LabelRole role) {
    if (role == LabelRole::Condition) labels.push_back(l);
  });
  return labels;
}

}  // namespace

std::vector<LoopSite> propose_loop_sites(const ActivityAst& ast, std::uint64_t seed, std::size_t max_span) {
  std::vector<LoopSite> sites;
  std::vector<BlockStep> path;
  collect_sites(ast.body, path, max_span, all_labels(ast), sites);
  SeededRng(seed).shuffle(sites);
  return sites;
}

ActivityAst insert_backward_loop(const ActivityAst& ast, const LoopSite& site) {
  if (site.span == 0) throw Error(ErrorCode::SiteOutOfRange, "loop span must be at least 1");
  if (site.loop_guard == site.exit_guard)
    throw Error(ErrorCode::SiteOutOfRange, "loop and exit guards must differ");
  if (text::trim(site.condition).empty()) throw Error(ErrorCode::SiteOutOfRange, "loop condition is empty");
  if (all_labels(ast).count(site.condition))
    throw Error(ErrorCode::ConditionCollision, "condition '" + site.condition + "' already exists");

  ActivityAst out = ast;
  Block* block = locate_block(out.body, site.block_path);
  if (!block) throw Error(ErrorCode::SiteOutOfRange, "block path does not address a decision branch");
  if (site.target_index + site.span > block->size())
    throw Error(ErrorCode::SiteOutOfRange, "loop span runs past the end of its block");
  for (std::size_t i = site.target_index; i < site.target_index + site.span; ++i) {
    if (!std::holds_alternative<Action>((*block)[i].value))
      throw Error(ErrorCode::SiteOutOfRange, "loop span covers a non-action node");
  }

  Repeat rep;
  rep.condition = site.condition;
  rep.loop_guard = site.loop_guard;
  rep.exit_guard = site.exit_guard;
  const auto first = block->begin() + static_cast<std::ptrdiff_t>(site.target_index);
  const auto last = first + static_cast<std::ptrdiff_t>(site.span);
  rep.body.assign(first, last);
  const auto pos = block->erase(first, last);
  block->insert(pos, Node{std::move(rep)});
  return out;
}

std::vector<std::string> check_loop_revision(const ActivityAst& original, const ActivityAst& revised) {
  std::vector<std::string> problems;
  const auto before = plantuml::count_nodes(original);
  const auto after = plantuml::count_nodes(revised);
  if (after.repeats != before.repeats + 1)
    problems.push_back("expected exactly one added loop, found " +
                       std::to_string(static_cast<long>(after.repeats) - static_cast<long>(before.repeats)));

  const auto conditions = condition_labels(revised);
  const auto original_conditions = condition_labels(original);
  std::map<std::string, long> surplus;
  for (const auto& c : conditions) ++surplus[c];
  for (const auto& c : original_conditions) --surplus[c];
  for (const auto& [c, n] : surplus) {
    const bool existed = std::find(original_conditions.begin(), original_conditions.end(), c) != original_conditions.end();
    if (n > 1 || (n > 0 && existed)) problems.push_back("condition '" + c + "' is repeated");
  }
  const auto labels_before = action_labels(original);
  const auto labels_after = action_labels(revised);
  for (const auto& l : labels_before) {
    if (labels_after.count(l) < labels_before.count(l)) {
      problems.push_back("state '" + l + "' was removed");
      break;
    }
  }
  for (const auto& c : original_conditions) {
    if (std::find(conditions.begin(), conditions.end(), c) == conditions.end())
      problems.push_back("condition '" + c + "' was removed");
  }
  const auto checks = plantuml::check_ast(revised);
  for (const auto& d : checks) problems.push_back(d.message);
  return problems;
}

nlohmann::ordered_json to_json(const HardReport& r) {
  nlohmann::ordered_json j;
  j["flowcharts"] = r.flowchart_count;
  j["skipped"] = r.skipped_count;
  j["backward_distance_below_threshold"] = r.backward_below_threshold;
  j["backward_distance_at_or_above_threshold"] = r.backward_at_or_above_threshold;
  j["dialogue_samples"] = r.dialogue_sample_count;
  j["avg_length"] = r.avg_length;
  j["distance_threshold"] = r.distance_threshold;
  return j;
}

std::string render_report(const HardReport& r) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << "Backward Distance < " << r.distance_threshold << '\t' << r.backward_below_threshold << '\n'
      << "Backward Distance >= " << r.distance_threshold << '\t' << r.backward_at_or_above_threshold << '\n'
      << "Dialogue Samples\t" << r.dialogue_sample_count << '\n'
      << "Avg. Length\t" << r.avg_length << '\n';
  return out.str();
}

HardReport summarize_hard(const std::vector<synth::FlowchartSource>& flowcharts,
                          const std::vector<synth::DialogueSample>& samples, std::size_t distance_threshold) {
  std::map<std::string, graph::StateGraph> graphs;
  for (const auto& f : flowcharts) graphs.emplace(f.id, graph::build_graph(f.ast));
  const auto stats = synth::corpus_stats(samples, graphs, distance_threshold);
  HardReport r;
  r.flowchart_count = flowcharts.size();
  r.backward_below_threshold = stats.backward_below_threshold;
  r.backward_at_or_above_threshold = stats.backward_at_or_above_threshold;
  r.dialogue_sample_count = stats.dialogue_sample_count;
  r.avg_length = stats.avg_length;
  r.distance_threshold = distance_threshold;
  return r;
}

AugmentedCorpus augment_corpus_h(const std::vector<synth::FlowchartSource>& flowcharts,
                                 const AugmentPolicy& policy, synth::AugmentationProvider& provider,
                                 formats::FormatScheme format, unsigned retries) {
  if (policy.min_span == 0 || policy.min_span > policy.max_span)
    throw Error(ErrorCode::Usage, "span bounds must satisfy 1 <= min_span <= max_span");

  AugmentedCorpus result;
  for (const auto& f : flowcharts) {
    auto sites = propose_loop_sites(f.ast, policy.seed ^ text::fnv1a(f.id), policy.max_span);
    auto it = std::find_if(sites.begin(), sites.end(),
                           [&](const LoopSite& s) { return s.span >= policy.min_span; });
    if (it == sites.end()) {
      result.warnings.push_back(f.id + ": no run of " + std::to_string(policy.min_span) +
                                " or more sibling actions; skipped");
      ++result.report.skipped_count;
      continue;
    }
    result.flowcharts.push_back({f.id, insert_backward_loop(f.ast, *it)});
    result.sites.push_back(*it);
  }

  result.samples = synth::synthesize_corpus(result.flowcharts, provider, format, 1, retries);

  const std::size_t skipped = result.report.skipped_count;
  result.report = summarize_hard(result.flowcharts, result.samples, policy.distance_threshold);
  result.report.skipped_count = skipped;
  return result;
}

}  // namespace flowdial::augment
