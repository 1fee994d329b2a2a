#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "flowdial/formats.hpp"
#include "flowdial/plantuml.hpp"
#include "flowdial/synth.hpp"

// Backward-transition augmentation: wraps runs of sibling actions in a
// repeat/repeat-while loop.
namespace flowdial::augment {

// One step from a block into a nested block: the node at `node_index`
// (a Decision) and the branch taken.
struct BlockStep {
  std::size_t node_index = 0;
  std::size_t branch_index = 0;

  bool operator==(const BlockStep&) const = default;
};

struct LoopSite {
  std::vector<BlockStep> block_path;  // empty: the top-level body
  std::size_t target_index = 0;
  std::size_t span = 1;
  std::string condition;
  std::string loop_guard = "yes";
  std::string exit_guard = "no";

  bool operator==(const LoopSite&) const = default;
};

nlohmann::json to_json(const LoopSite& site);

std::string loop_condition_for(const std::string& last_label);

// Every run of 1..max_span consecutive Action siblings outside existing loops
// whose generated condition is fresh, shuffled by seed.
std::vector<LoopSite> propose_loop_sites(const plantuml::ActivityAst& ast, std::uint64_t seed,
                                         std::size_t max_span = SIZE_MAX);

// Throws Error(SiteOutOfRange) when the site does not address a run of
// actions, Error(ConditionCollision) when its condition is already a label.
plantuml::ActivityAst insert_backward_loop(const plantuml::ActivityAst& ast, const LoopSite& site);

// Problems that make `revised` unacceptable as a one-loop augmentation of
// `original`: extra repeat count != 1, an added condition that is not fresh
// or occurs twice, missing original labels.
std::vector<std::string> check_loop_revision(const plantuml::ActivityAst& original,
                                             const plantuml::ActivityAst& revised);

struct AugmentPolicy {
  std::size_t min_span = 1;
  std::size_t max_span = 4;
  std::uint64_t seed = 0;
  std::size_t distance_threshold = 5;
};

struct HardReport {
  std::size_t flowchart_count = 0;
  std::size_t skipped_count = 0;
  std::size_t backward_below_threshold = 0;
  std::size_t backward_at_or_above_threshold = 0;
  std::size_t dialogue_sample_count = 0;
  double avg_length = 0.0;
  std::size_t distance_threshold = 5;
};

HardReport summarize_hard(const std::vector<synth::FlowchartSource>& flowcharts,
                          const std::vector<synth::DialogueSample>& samples,
                          std::size_t distance_threshold = 5);

nlohmann::ordered_json to_json(const HardReport& report);
std::string render_report(const HardReport& report);

struct AugmentedCorpus {
  std::vector<synth::FlowchartSource> flowcharts;  // the loop-augmented ASTs
  std::vector<LoopSite> sites;                     // parallel to flowcharts
  std::vector<synth::DialogueSample> samples;
  std::vector<std::string> warnings;
  HardReport report;
};

// One loop per flowchart at the first proposed site within the span bounds
// (per-flowchart seed: policy.seed ^ fnv1a(id)). Flowcharts without a viable
// site are skipped with a warning.
AugmentedCorpus augment_corpus_h(const std::vector<synth::FlowchartSource>& flowcharts,
                                 const AugmentPolicy& policy, synth::AugmentationProvider& provider,
                                 formats::FormatScheme format = formats::FormatScheme::NL,
                                 unsigned retries = 3);

}  // namespace flowdial::augment
