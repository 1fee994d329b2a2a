#include "flowdial/synth.hpp"

#include <algorithm>
#include <fstream>
#include <atomic>
#include <future>
#include <mutex>
#include <iomanip>
#include <set>
#include <sstream>

#include "flowdial/error.hpp"
#include "flowdial/rng.hpp"
#include "flowdial/text.hpp"

namespace flowdial::synth {

using formats::FormatScheme;
using graph::NodeKind;
using graph::StateGraph;
using graph::Transition;
using graph::TransitionKind;
using plantuml::Diagnostic;
using plantuml::Severity;

std::string_view sample_type_name(SampleType t) {
  return t == SampleType::Decision ? "decision" : "sequential";
}

nlohmann::ordered_json to_json(const DialogueSample& s) {
  nlohmann::ordered_json j;
  j["id"] = s.id;
  j["flowchart_id"] = s.flowchart_id;
  j["format"] = formats::format_name(s.format);
  j["flowchart_text"] = s.flowchart_text;
  j["state_dict"] = s.state_dict ? s.state_dict->to_json() : nlohmann::ordered_json(nullptr);
  j["current_state"] = s.current_state;
  j["user_input"] = s.user_input;
  j["next_state"] = s.next_state;
  j["robot_output"] = s.robot_output;
  j["sample_type"] = sample_type_name(s.sample_type);
  j["backward"] = s.backward;
  j["backward_distance"] =
      s.backward_distance ? nlohmann::ordered_json(*s.backward_distance) : nlohmann::ordered_json(nullptr);
  j["guard"] = s.guard ? nlohmann::ordered_json(*s.guard) : nlohmann::ordered_json(nullptr);
  j["current_node_id"] =
      s.current_node_id ? nlohmann::ordered_json(*s.current_node_id) : nlohmann::ordered_json(nullptr);
  j["next_node_id"] =
      s.next_node_id ? nlohmann::ordered_json(*s.next_node_id) : nlohmann::ordered_json(nullptr);
  return j;
}

namespace {

template <typename T>
std::optional<T> optional_field(const nlohmann::ordered_json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

}  // namespace

DialogueSample sample_from_json(const nlohmann::ordered_json& j) {
  DialogueSample s;
  s.id = j.at("id").get<std::string>();
  s.flowchart_id = j.at("flowchart_id").get<std::string>();
  s.format = formats::parse_format(j.value("format", std::string("nl")));
  s.flowchart_text = j.at("flowchart_text").get<std::string>();
  if (auto it = j.find("state_dict"); it != j.end() && !it->is_null())
    s.state_dict = formats::StateCodeDict::from_json(*it);
  s.current_state = j.at("current_state").get<std::string>();
  s.user_input = j.at("user_input").get<std::string>();
  s.next_state = j.at("next_state").get<std::string>();
  s.robot_output = j.value("robot_output", std::string());
  const std::string type = j.at("sample_type").get<std::string>();
  if (type != "sequential" && type != "decision")
    throw Error(ErrorCode::Io, "sample " + s.id + ": unknown sample_type '" + type + "'");
  s.sample_type = type == "decision" ? SampleType::Decision : SampleType::Sequential;
  s.backward = j.value("backward", false);
  s.backward_distance = optional_field<std::size_t>(j, "backward_distance");
  s.guard = optional_field<std::string>(j, "guard");
  s.current_node_id = optional_field<graph::NodeId>(j, "current_node_id");
  s.next_node_id = optional_field<graph::NodeId>(j, "next_node_id");
  return s;
}

void write_corpus(std::ostream& out, const std::vector<DialogueSample>& samples) {
  for (const auto& s : samples) out << to_json(s).dump() << '\n';
}

std::vector<DialogueSample> read_corpus(std::istream& in) {
  std::vector<DialogueSample> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      samples.push_back(sample_from_json(nlohmann::ordered_json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Io, "corpus line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return samples;
}

void write_corpus_file(const std::string& path, const std::vector<DialogueSample>& samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  write_corpus(out, samples);
}

std::vector<DialogueSample> read_corpus_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  return read_corpus(in);
}

std::vector<nlohmann::json> read_jsonl_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  std::vector<nlohmann::json> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      records.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Io, path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

void write_jsonl(std::ostream& out, const std::vector<nlohmann::json>& records) {
  for (const auto& r : records) out << r.dump() << '\n';
}

namespace {

template <typename F>
std::optional<std::string> with_retries(unsigned retries, F&& produce, std::string& last_error) {
  for (unsigned attempt = 0; attempt <= retries; ++attempt) {
    try {
      std::string out = produce();
      if (!text::trim(out).empty()) return out;
      last_error = "empty output";
    } catch (const std::exception& e) {
      last_error = e.what();
    }
  }
  return std::nullopt;
}

}  // namespace

std::vector<DialogueSample> synthesize_samples(const StateGraph& graph, std::string_view flowchart_text,
                                               AugmentationProvider& provider, FormatScheme format,
                                               const SynthOptions& options) {
  std::vector<DialogueSample> samples;
  std::vector<std::string> failures;
  const auto transitions = graph::extract_transitions(graph);
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    const Transition& t = transitions[i];
    const TransitionContext ctx{flowchart_text, t};
    std::string error;
    auto user = with_retries(options.retries, [&] { return provider.user_input(ctx); }, error);
    std::optional<std::string> robot;
    if (user) robot = with_retries(options.retries, [&] { return provider.robot_output(ctx, *user); }, error);
    if (!user || !robot) {
      failures.push_back(options.flowchart_id + ": " + t.current + " -> " + t.next + " (" + error + ")");
      continue;
    }
    DialogueSample s;
    s.id = options.flowchart_id + "#" + std::to_string(i);
    s.flowchart_id = options.flowchart_id;
    s.format = format;
    s.flowchart_text = std::string(flowchart_text);
    s.state_dict = options.state_dict;
    s.current_state = t.current;
    s.user_input = std::move(*user);
    s.next_state = t.next;
    s.robot_output = std::move(*robot);
    s.sample_type = t.kind == TransitionKind::Decision ? SampleType::Decision : SampleType::Sequential;
    s.backward = t.backward;
    s.backward_distance = t.backward_distance;
    s.guard = t.guard;
    s.current_node_id = t.current_id;
    s.next_node_id = t.next_id;
    samples.push_back(std::move(s));
  }
  if (!failures.empty()) {
    std::string msg = "augmentation failed for " + std::to_string(failures.size()) + " transition(s):";
    for (const auto& f : failures) msg += "\n  " + f;
    throw Error(ErrorCode::Synthesis, msg);
  }
  return samples;
}

std::vector<DialogueSample> synthesize_corpus(const std::vector<FlowchartSource>& flowcharts,
                                              AugmentationProvider& provider, FormatScheme format,
                                              unsigned jobs, unsigned retries) {
  std::set<std::string> ids;
  for (const auto& f : flowcharts) {
    if (!ids.insert(f.id).second) throw Error(ErrorCode::Synthesis, "duplicate flowchart id '" + f.id + "'");
  }

  const auto one = [&](const FlowchartSource& f) {
    const StateGraph g = graph::build_graph(f.ast);
    auto formatted = formats::to_format(f.ast, format);
    SynthOptions options;
    options.flowchart_id = f.id;
    options.retries = retries;
    options.state_dict = std::move(formatted.dict);
    return synthesize_samples(g, formatted.flowchart_text, provider, format, options);
  };

  std::vector<std::vector<DialogueSample>> parts(flowcharts.size());
  std::vector<std::string> errors;
  if (jobs <= 1) {
    for (std::size_t i = 0; i < flowcharts.size(); ++i) {
      try {
        parts[i] = one(flowcharts[i]);
      } catch (const Error& e) {
        errors.push_back(e.what());
      }
    }
  } else {
    std::vector<std::future<void>> workers;
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    for (unsigned w = 0; w < jobs; ++w) {
      workers.push_back(std::async(std::launch::async, [&] {
        for (std::size_t i = next++; i < flowcharts.size(); i = next++) {
          try {
            parts[i] = one(flowcharts[i]);
          } catch (const Error& e) {
            std::lock_guard lock(error_mutex);
            errors.push_back(e.what());
          }
        }
      }));
    }
    for (auto& w : workers) w.get();
  }
  if (!errors.empty()) {
    std::sort(errors.begin(), errors.end());
    std::string msg;
    for (const auto& e : errors) msg += (msg.empty() ? "" : "\n") + e;
    throw Error(ErrorCode::Synthesis, msg);
  }

  std::vector<std::size_t> order(flowcharts.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return flowcharts[a].id < flowcharts[b].id; });
  std::vector<DialogueSample> out;
  for (std::size_t i : order) {
    for (auto& s : parts[i]) out.push_back(std::move(s));
  }
  return out;
}

graph::StateGraph graph_for_sample(const DialogueSample& sample) {
  auto parsed = plantuml::parse(sample.flowchart_text);
  if (!parsed.ok())
    throw Error(ErrorCode::Structural,
                "sample " + sample.id + ": " + plantuml::format_diagnostic(parsed.diagnostics.front()));
  if (sample.format == FormatScheme::NL) return graph::build_graph(*parsed.ast);
  const formats::StateCodeDict* dict = sample.state_dict ? &*sample.state_dict : nullptr;
  return graph::build_graph(formats::resolve_ast(*parsed.ast, dict));
}

std::vector<Diagnostic> validate_sample(const DialogueSample& sample, const StateGraph& g,
                                        const engine::GuardMatcher& matcher) {
  std::vector<Diagnostic> diags;
  const auto fail = [&](std::string msg) { diags.push_back({Severity::Error, std::move(msg), 0}); };

  // (1) states correspond to the flowchart
  std::vector<graph::EdgeId> edges;
  const auto current = g.find(sample.current_state);
  const auto next = g.find(sample.next_state);
  if (current.empty()) fail("[states] current state '" + sample.current_state + "' is not in the flowchart");
  if (next.empty()) fail("[states] next state '" + sample.next_state + "' is not in the flowchart");
  for (graph::NodeId c : current) {
    if (sample.current_node_id && *sample.current_node_id != c) continue;
    for (graph::EdgeId e : g.out_edges(c)) {
      const auto& edge = g.edge(e);
      if (g.node(edge.to).label != sample.next_state) continue;
      if (sample.next_node_id && *sample.next_node_id != edge.to) continue;
      edges.push_back(e);
    }
  }
  if (!current.empty() && !next.empty() && edges.empty())
    fail("[states] no transition '" + sample.current_state + "' -> '" + sample.next_state + "'");
  if (!edges.empty()) {
    const auto from = g.edge(edges.front()).from;
    const bool is_decision = g.out_degree(from) >= 2;
    if (is_decision != (sample.sample_type == SampleType::Decision))
      fail("[states] sample_type '" + std::string(sample_type_name(sample.sample_type)) +
           "' does not match the transition");
    const bool any_backward =
        std::any_of(edges.begin(), edges.end(), [&](auto e) { return g.edge(e).backward; });
    if (sample.backward && !any_backward) fail("[states] sample marked backward on a forward transition");
    if (sample.backward != sample.backward_distance.has_value())
      fail("[states] backward_distance must be present iff backward");
  }

  // (2) syntax of the flowchart text
  for (const auto& d : plantuml::validate_syntax(sample.flowchart_text))
    diags.push_back({d.severity, "[syntax] " + d.message, d.line_no});

  // (3) the user input selects the branch taken
  if (sample.sample_type == SampleType::Decision && !edges.empty()) {
    const auto from = g.edge(edges.front()).from;
    if (g.out_degree(from) >= 2) {
      const auto chosen = matcher.try_match(engine::guard_options(g, from), sample.user_input);
      const bool consistent = chosen && std::any_of(edges.begin(), edges.end(), [&](auto e) {
                                return g.edge(e).guard == *chosen;
                              });
      if (!consistent)
        fail("[consistency] user input does not select the branch to '" + sample.next_state + "'");
    }
  }
  return diags;
}

double prompt_length(const DialogueSample& s) {
  return static_cast<double>(text::codepoint_count(s.flowchart_text) +
                             text::codepoint_count(s.current_state) +
                             text::codepoint_count(s.user_input));
}

CorpusStats corpus_stats(const std::vector<DialogueSample>& samples,
                         const std::map<std::string, StateGraph>& graphs, std::size_t threshold) {
  CorpusStats stats;
  stats.distance_threshold = threshold;
  std::set<std::string> flowcharts;
  double total_length = 0.0;
  for (const auto& s : samples) {
    auto it = graphs.find(s.flowchart_id);
    if (it == graphs.end()) throw Error(ErrorCode::UnknownFlowchart, "unknown flowchart_id '" + s.flowchart_id + "'");
    if (flowcharts.insert(s.flowchart_id).second) {
      for (const auto& n : it->second.nodes()) {
        if (n.kind == NodeKind::State) ++stats.state_node_count;
        if (n.kind == NodeKind::Decision) ++stats.decision_node_count;
      }
    }
    if (s.sample_type == SampleType::Decision) {
      ++stats.decision_sample_count;
    } else {
      ++stats.sequential_sample_count;
    }
    if (s.backward) {
      ++stats.backward_sample_count;
      if (s.backward_distance.value_or(0) < threshold) {
        ++stats.backward_below_threshold;
      } else {
        ++stats.backward_at_or_above_threshold;
      }
    }
    total_length += prompt_length(s);
  }
  stats.flowchart_count = flowcharts.size();
  stats.dialogue_sample_count = stats.sequential_sample_count + stats.decision_sample_count;
  stats.avg_length = samples.empty() ? 0.0 : total_length / static_cast<double>(samples.size());
  return stats;
}

nlohmann::ordered_json to_json(const CorpusStats& s) {
  nlohmann::ordered_json j;
  j["flowcharts"] = s.flowchart_count;
  j["state_nodes"] = s.state_node_count;
  j["decision_nodes"] = s.decision_node_count;
  j["sequential_samples"] = s.sequential_sample_count;
  j["decision_samples"] = s.decision_sample_count;
  j["dialogue_samples"] = s.dialogue_sample_count;
  j["avg_length"] = s.avg_length;
  j["backward_samples"] = s.backward_sample_count;
  j["backward_distance_below_threshold"] = s.backward_below_threshold;
  j["backward_distance_at_or_above_threshold"] = s.backward_at_or_above_threshold;
  j["distance_threshold"] = s.distance_threshold;
  return j;
}

std::string render_stats(const CorpusStats& s) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << "Flowcharts\t" << s.flowchart_count << '\n'
      << "State Nodes\t" << s.state_node_count << '\n'
      << "Decision Nodes\t" << s.decision_node_count << '\n'
      << "Sequential Samples\t" << s.sequential_sample_count << '\n'
      << "Decision Samples\t" << s.decision_sample_count << '\n'
      << "Dialogue Samples\t" << s.dialogue_sample_count << '\n'
      << "Avg. Length\t" << s.avg_length << '\n';
  if (s.backward_sample_count > 0) {
    out << "Backward Distance < " << s.distance_threshold << '\t' << s.backward_below_threshold << '\n'
        << "Backward Distance >= " << s.distance_threshold << '\t' << s.backward_at_or_above_threshold
        << '\n';
  }
  return out.str();
}

std::vector<DialogueSample> sample_subset(const std::vector<DialogueSample>& corpus, std::size_t budget,
                                          std::optional<std::uint64_t> seed) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    auto& m = members[corpus[i].flowchart_id];
    if (m.empty()) order.push_back(corpus[i].flowchart_id);
    m.push_back(i);
  }
  if (seed) SeededRng(*seed).shuffle(order);

  std::vector<DialogueSample> out;
  for (const auto& id : order) {
    const auto& idx = members[id];
    if (out.size() + idx.size() > budget) break;
    for (std::size_t i : idx) out.push_back(corpus[i]);
  }
  return out;
}

std::vector<nlohmann::json> mix_corpora(const std::vector<nlohmann::json>& a,
                                        const std::vector<nlohmann::json>& b, const MixOptions& options) {
  std::size_t n_a = a.size();
  std::size_t n_b = 0;
  if (options.strategy == MixStrategy::Fixed) {
    n_b = options.fixed_b.value_or(b.size());
    if (n_b > b.size())
      throw Error(ErrorCode::Usage, "fixed external size " + std::to_string(n_b) + " exceeds the " +
                                        std::to_string(b.size()) + " available records");
  } else {
    if (options.ratio_a == 0 || options.ratio_b == 0) throw Error(ErrorCode::Usage, "mix ratio must be positive");
    const auto target = [&](std::size_t na) {
      return (na * options.ratio_b * 2 + options.ratio_a) / (2 * options.ratio_a);
    };
    n_b = target(n_a);
    if (n_b > b.size()) {
      n_a = b.size() * options.ratio_a / options.ratio_b;
      n_b = target(n_a);
    }
  }

  std::vector<std::size_t> picked(b.size());
  for (std::size_t i = 0; i < picked.size(); ++i) picked[i] = i;
  SeededRng(options.seed).shuffle(picked);
  picked.resize(n_b);
  std::sort(picked.begin(), picked.end());

  std::vector<nlohmann::json> out;
  out.reserve(n_a + n_b);
  std::size_t ia = 0;
  std::size_t ib = 0;
  while (ia < n_a || ib < n_b) {
    const bool take_a = ib >= n_b || (ia < n_a && (ia + 1) * n_b <= (ib + 1) * n_a);
    if (take_a) {
      out.push_back(a[ia++]);
    } else {
      out.push_back(b[picked[ib++]]);
    }
  }
  return out;
}

}  // namespace flowdial::synth
