#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "flowdial/engine.hpp"
#include "flowdial/formats.hpp"
#include "flowdial/graph.hpp"
#include "flowdial/plantuml.hpp"
#include "flowdial/templates.hpp"

// Five-tuple dialogue samples: synthesis, validation, statistics, subsets and
// mixing with external corpora.
namespace flowdial::synth {

enum class SampleType { Sequential, Decision };

std::string_view sample_type_name(SampleType t);

struct DialogueSample {
  std::string id;
  std::string flowchart_id;
  formats::FormatScheme format = formats::FormatScheme::NL;
  std::string flowchart_text;
  std::optional<formats::StateCodeDict> state_dict;
  std::string current_state;
  std::string user_input;
  std::string next_state;
  std::string robot_output;
  SampleType sample_type = SampleType::Sequential;
  bool backward = false;
  std::optional<std::size_t> backward_distance;
  // Edge metadata: the guard taken and the node ids in the NL graph of the
  // flowchart. Node ids disambiguate labels that occur more than once.
  std::optional<std::string> guard;
  std::optional<graph::NodeId> current_node_id;
  std::optional<graph::NodeId> next_node_id;

  bool operator==(const DialogueSample&) const = default;
};

nlohmann::ordered_json to_json(const DialogueSample& s);
DialogueSample sample_from_json(const nlohmann::ordered_json& j);

void write_corpus(std::ostream& out, const std::vector<DialogueSample>& samples);
std::vector<DialogueSample> read_corpus(std::istream& in);
void write_corpus_file(const std::string& path, const std::vector<DialogueSample>& samples);
std::vector<DialogueSample> read_corpus_file(const std::string& path);

// Arbitrary JSON-lines records (external corpora used for mixing).
std::vector<nlohmann::json> read_jsonl_file(const std::string& path);
void write_jsonl(std::ostream& out, const std::vector<nlohmann::json>& records);

struct TransitionContext {
  std::string_view flowchart_text;
  const graph::Transition& transition;
};

// Produces the user input and robot output of one transition. Implementations
// may throw or return empty text to signal failure; the caller retries.
class AugmentationProvider {
 public:
  virtual ~AugmentationProvider() = default;
  virtual std::string user_input(const TransitionContext& ctx) = 0;
  virtual std::string robot_output(const TransitionContext& ctx, std::string_view user_input) = 0;
};

class TemplateProvider final : public AugmentationProvider {
 public:
  explicit TemplateProvider(TemplateSet templates = {}) : templates_(std::move(templates)) {}

  std::string user_input(const TransitionContext& ctx) override {
    return template_user_input(ctx.transition, templates_);
  }
  std::string robot_output(const TransitionContext& ctx, std::string_view) override {
    return template_robot_output(ctx.transition, templates_);
  }

 private:
  TemplateSet templates_;
};

struct SynthOptions {
  std::string flowchart_id = "flowchart";
  unsigned retries = 3;
  std::optional<formats::StateCodeDict> state_dict;
};

// One sample per extracted transition, in edge order. Throws
// Error(Synthesis) naming every transition the provider failed on.
std::vector<DialogueSample> synthesize_samples(const graph::StateGraph& graph,
                                               std::string_view flowchart_text,
                                               AugmentationProvider& provider,
                                               formats::FormatScheme format,
                                               const SynthOptions& options = {});

struct FlowchartSource {
  std::string id;
  plantuml::ActivityAst ast;
};

// Renders each flowchart in `format`, synthesizes its samples and orders the
// result by flowchart id then edge order. Flowcharts are processed on up to
// `jobs` threads; the provider must be thread-safe when jobs > 1.
std::vector<DialogueSample> synthesize_corpus(const std::vector<FlowchartSource>& flowcharts,
                                              AugmentationProvider& provider,
                                              formats::FormatScheme format, unsigned jobs = 1,
                                              unsigned retries = 3);

// Checks, in order: (1) the sample's states and edge exist in the graph,
// (2) flowchart_text parses, (3) for decision samples the user input selects
// the branch leading to next_state.
std::vector<plantuml::Diagnostic> validate_sample(const DialogueSample& sample,
                                                  const graph::StateGraph& graph,
                                                  const engine::GuardMatcher& matcher = engine::GuardMatcher{});

// Rebuilds the NL graph of a sample from its own flowchart text, resolving
// state codes when present.
graph::StateGraph graph_for_sample(const DialogueSample& sample);

struct CorpusStats {
  std::size_t flowchart_count = 0;
  std::size_t state_node_count = 0;
  std::size_t decision_node_count = 0;
  std::size_t sequential_sample_count = 0;
  std::size_t decision_sample_count = 0;
  std::size_t dialogue_sample_count = 0;
  double avg_length = 0.0;
  std::size_t backward_sample_count = 0;
  std::size_t backward_below_threshold = 0;
  std::size_t backward_at_or_above_threshold = 0;
  std::size_t distance_threshold = 5;

  bool operator==(const CorpusStats&) const = default;
};

// Mean code-point length of flowchart_text + current_state + user_input.
double prompt_length(const DialogueSample& s);

CorpusStats corpus_stats(const std::vector<DialogueSample>& samples,
                         const std::map<std::string, graph::StateGraph>& graphs,
                         std::size_t distance_threshold = 5);

nlohmann::ordered_json to_json(const CorpusStats& stats);
std::string render_stats(const CorpusStats& stats);

// Adds whole flowcharts (corpus order, or shuffled by seed) until the next
// one would exceed the budget.
std::vector<DialogueSample> sample_subset(const std::vector<DialogueSample>& corpus,
                                          std::size_t budget,
                                          std::optional<std::uint64_t> seed = std::nullopt);

enum class MixStrategy { Fixed, Proportional };

struct MixOptions {
  std::size_t ratio_a = 1;
  std::size_t ratio_b = 1;
  MixStrategy strategy = MixStrategy::Proportional;
  // Fixed strategy: number of external records to keep (default: all).
  std::optional<std::size_t> fixed_b;
  std::uint64_t seed = 0;
};

// Proportional: keeps ratio_a:ratio_b within one record, shrinking `a` when
// `b` is too small. Fixed: all of `a` plus a fixed-size draw from `b`.
// External records are drawn by seed and the two streams are interleaved
// evenly.
std::vector<nlohmann::json> mix_corpora(const std::vector<nlohmann::json>& a,
                                        const std::vector<nlohmann::json>& b,
                                        const MixOptions& options);

}  // namespace flowdial::synth
