#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "flowdial/plantuml.hpp"

// State-transition graph built from an activity AST, plus path enumeration
// and transition extraction.
namespace flowdial::graph {

using NodeId = std::size_t;
using EdgeId = std::size_t;

enum class NodeKind { Start, Stop, State, Decision };

std::string_view node_kind_name(NodeKind kind);

inline constexpr std::string_view kStartLabel = "<start>";
inline constexpr std::string_view kStopLabel = "<stop>";

struct GraphNode {
  NodeId id = 0;
  NodeKind kind = NodeKind::State;
  std::string label;

  bool operator==(const GraphNode&) const = default;
};

struct GraphEdge {
  NodeId from = 0;
  NodeId to = 0;
  std::optional<std::string> guard;
  bool backward = false;

  bool operator==(const GraphEdge&) const = default;
};

// Immutable after construction. Node ids are dense, Start is 0 and Stop is
// the last id; the remaining nodes follow the textual order of the source.
// Edges are grouped by source node, in branch order.
class StateGraph {
 public:
  StateGraph(std::vector<GraphNode> nodes, std::vector<GraphEdge> edges);

  const std::vector<GraphNode>& nodes() const { return nodes_; }
  const std::vector<GraphEdge>& edges() const { return edges_; }
  const GraphNode& node(NodeId id) const { return nodes_.at(id); }
  const GraphEdge& edge(EdgeId id) const { return edges_.at(id); }

  NodeId start() const { return start_; }
  NodeId stop() const { return stop_; }

  const std::vector<EdgeId>& out_edges(NodeId id) const { return out_.at(id); }
  std::size_t out_degree(NodeId id) const { return out_.at(id).size(); }

  // All State/Decision nodes carrying `label` (duplicates that could not be
  // merged produce more than one).
  std::vector<NodeId> find(std::string_view label) const;

  bool operator==(const StateGraph& other) const {
    return nodes_ == other.nodes_ && edges_ == other.edges_;
  }

 private:
  std::vector<GraphNode> nodes_;
  std::vector<GraphEdge> edges_;
  std::vector<std::vector<EdgeId>> out_;
  NodeId start_ = 0;
  NodeId stop_ = 0;
};

// Action -> State node, decision condition -> Decision node with one guarded
// edge per branch, repeat -> body plus a Decision whose loop guard edge is
// backward. Repeated labels collapse into one node when the occurrences have
// identical successors; otherwise each occurrence keeps its own node.
StateGraph build_graph(const plantuml::ActivityAst& ast);

// Invariant violations of a graph (empty for every graph from build_graph).
std::vector<std::string> check_graph(const StateGraph& graph);

struct LoopPolicy {
  unsigned max_backward_traversals = 1;
  std::size_t max_paths = 10'000;
};

struct Path {
  std::vector<NodeId> nodes;
  std::vector<EdgeId> edges;

  bool operator==(const Path&) const = default;
};

// All Start->Stop walks in which each backward edge is used at most
// `max_backward_traversals` times. Forward edges are explored in branch order
// before backward edges. Throws Error(PathOverflow) past `max_paths`.
std::vector<Path> enumerate_paths(const StateGraph& graph, const LoopPolicy& policy = {});

std::vector<std::string> path_labels(const StateGraph& graph, const Path& path);

enum class TransitionKind { Sequential, Decision };

std::string_view transition_kind_name(TransitionKind kind);

struct Transition {
  std::string current;
  std::optional<std::string> guard;
  std::string next;
  TransitionKind kind = TransitionKind::Sequential;
  bool backward = false;
  std::optional<std::size_t> backward_distance;
  bool next_is_decision = false;
  NodeId current_id = 0;
  NodeId next_id = 0;
  EdgeId edge = 0;

  bool operator==(const Transition&) const = default;
};

// One transition per edge between State/Decision nodes, in edge order,
// deduplicated on (current, guard, next) labels.
std::vector<Transition> extract_transitions(const StateGraph& graph);

// Edge count of the shortest forward-only path from the backward edge's
// target back to its source. Throws Error(Structural) if there is none or the
// edge is not backward.
std::size_t backward_distance(const StateGraph& graph, EdgeId edge);

struct GraphStats {
  std::size_t state_node_count = 0;
  std::size_t decision_node_count = 0;
  std::size_t sequential_transition_count = 0;
  std::size_t decision_transition_count = 0;
  std::size_t backward_transition_count = 0;
  std::size_t path_count = 0;

  bool operator==(const GraphStats&) const = default;
};

GraphStats graph_stats(const StateGraph& graph, const LoopPolicy& policy = {});

nlohmann::json to_json(const StateGraph& graph);
StateGraph graph_from_json(const nlohmann::json& j);

}  // namespace flowdial::graph
