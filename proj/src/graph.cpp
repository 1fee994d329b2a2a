#include "flowdial/graph.hpp"

#include <algorithm>
#include <climits>
#include <deque>
#include <map>
#include <numeric>
#include <set>
#include <tuple>
#include <unordered_map>

#include "flowdial/error.hpp"

namespace flowdial::graph {

using plantuml::Action;
using plantuml::ActivityAst;
using plantuml::Block;
using plantuml::Decision;
using plantuml::Node;
using plantuml::Repeat;

std::string_view node_kind_name(NodeKind kind) {
  switch (kind) {
    case NodeKind::Start: return "start";
    case NodeKind::Stop: return "stop";
    case NodeKind::State: return "state";
    case NodeKind::Decision: return "decision";
  }
  return "state";
}

std::string_view transition_kind_name(TransitionKind kind) {
  return kind == TransitionKind::Decision ? "decision" : "sequential";
}

StateGraph::StateGraph(std::vector<GraphNode> nodes, std::vector<GraphEdge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)), out_(nodes_.size()) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].id != i) throw Error(ErrorCode::Structural, "node ids must be dense");
    if (nodes_[i].kind == NodeKind::Start) start_ = i;
    if (nodes_[i].kind == NodeKind::Stop) stop_ = i;
  }
  for (EdgeId e = 0; e < edges_.size(); ++e) {
    if (edges_[e].from >= nodes_.size() || edges_[e].to >= nodes_.size())
      throw Error(ErrorCode::Structural, "edge endpoint out of range");
    out_[edges_[e].from].push_back(e);
  }
}

std::vector<NodeId> StateGraph::find(std::string_view label) const {
  std::vector<NodeId> ids;
  for (const GraphNode& n : nodes_) {
    if ((n.kind == NodeKind::State || n.kind == NodeKind::Decision) && n.label == label)
      ids.push_back(n.id);
  }
  return ids;
}

namespace {

struct ProtoEdge {
  std::optional<std::string> guard;
  std::size_t to;
  bool backward;

  bool operator==(const ProtoEdge&) const = default;
};

struct ProtoNode {
  NodeKind kind;
  std::string label;
  int order;
  std::vector<ProtoEdge> out;
};

class Builder {
 public:
  explicit Builder(const ActivityAst& ast) : ast_(ast) {}

  StateGraph build() {
    int counter = 0;
    assign_order(ast_.body, counter);

    const std::size_t stop = add(NodeKind::Stop, std::string(kStopLabel), INT_MAX);
    const std::size_t start = add(NodeKind::Start, std::string(kStartLabel), INT_MIN);
    const std::size_t entry = build_block(ast_.body, stop);
    protos_[start].out.push_back({std::nullopt, entry, false});
    return finish();
  }

 private:
  void assign_order(const Block& block, int& counter) {
    for (const Node& node : block) {
      if (std::holds_alternative<Action>(node.value)) {
        order_[&node] = counter++;
      } else if (const auto* d = std::get_if<Decision>(&node.value)) {
        order_[&node] = counter++;
        for (const auto& b : d->branches) assign_order(b.body, counter);
      } else if (const auto* r = std::get_if<Repeat>(&node.value)) {
        assign_order(r->body, counter);
        // The repeat condition sits on the closing `repeat while` line.
        order_[&node] = counter++;
      }
    }
  }

  std::size_t add(NodeKind kind, std::string label, int order) {
    protos_.push_back(ProtoNode{kind, std::move(label), order, {}});
    return protos_.size() - 1;
  }

  std::size_t build_block(const Block& block, std::size_t succ) {
    std::size_t entry = succ;
    for (auto it = block.rbegin(); it != block.rend(); ++it) entry = build_node(*it, entry);
    return entry;
  }

  std::size_t build_node(const Node& node, std::size_t succ) {
    const int order = order_.at(&node);
    if (const auto* a = std::get_if<Action>(&node.value)) {
      const auto key = std::make_pair(a->label, succ);
      if (auto it = states_.find(key); it != states_.end()) {
        protos_[it->second].order = std::min(protos_[it->second].order, order);
        return it->second;
      }
      const std::size_t id = add(NodeKind::State, a->label, order);
      protos_[id].out.push_back({std::nullopt, succ, false});
      states_.emplace(key, id);
      return id;
    }
    if (const auto* d = std::get_if<Decision>(&node.value)) {
      std::vector<ProtoEdge> out;
      for (const auto& b : d->branches) out.push_back({b.guard, build_block(b.body, succ), false});
      for (std::size_t cand : decisions_[d->condition]) {
        if (protos_[cand].out == out) {
          protos_[cand].order = std::min(protos_[cand].order, order);
          return cand;
        }
      }
      const std::size_t id = add(NodeKind::Decision, d->condition, order);
      protos_[id].out = std::move(out);
      decisions_[d->condition].push_back(id);
      return id;
    }
    const auto& r = std::get<Repeat>(node.value);
    const std::size_t cond = add(NodeKind::Decision, r.condition, order);
    const std::size_t body_entry = build_block(r.body, cond);
    protos_[cond].out.push_back({r.loop_guard, body_entry, true});
    protos_[cond].out.push_back({r.exit_guard, succ, false});
    return body_entry;
  }

  StateGraph finish() {
    std::vector<std::size_t> perm(protos_.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::stable_sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
      return protos_[a].order < protos_[b].order;
    });
    std::vector<NodeId> new_id(protos_.size());
    for (std::size_t i = 0; i < perm.size(); ++i) new_id[perm[i]] = i;

    std::vector<GraphNode> nodes;
    std::vector<GraphEdge> edges;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      const ProtoNode& p = protos_[perm[i]];
      nodes.push_back(GraphNode{i, p.kind, p.label});
      for (const ProtoEdge& e : p.out) edges.push_back(GraphEdge{i, new_id[e.to], e.guard, e.backward});
    }
    return StateGraph(std::move(nodes), std::move(edges));
  }

  const ActivityAst& ast_;
  std::unordered_map<const Node*, int> order_;
  std::vector<ProtoNode> protos_;
  std::map<std::pair<std::string, std::size_t>, std::size_t> states_;
  std::map<std::string, std::vector<std::size_t>> decisions_;
};

}  // namespace

StateGraph build_graph(const ActivityAst& ast) {
  if (auto diags = plantuml::check_ast(ast); !diags.empty())
    throw Error(ErrorCode::Structural, "invalid AST: " + diags.front().message);
  return Builder(ast).build();
}

std::vector<std::string> check_graph(const StateGraph& g) {
  std::vector<std::string> problems;
  const auto& nodes = g.nodes();
  std::vector<std::size_t> in_degree(nodes.size(), 0);
  for (const GraphEdge& e : g.edges()) ++in_degree[e.to];

  std::size_t starts = 0;
  std::size_t stops = 0;
  for (const GraphNode& n : nodes) {
    switch (n.kind) {
      case NodeKind::Start:
        ++starts;
        if (in_degree[n.id] != 0) problems.push_back("start node has incoming edges");
        break;
      case NodeKind::Stop:
        ++stops;
        if (g.out_degree(n.id) != 0) problems.push_back("stop node has outgoing edges");
        break;
      case NodeKind::State:
        if (g.out_degree(n.id) != 1) {
          problems.push_back("state '" + n.label + "' has out-degree " +
                             std::to_string(g.out_degree(n.id)));
        } else if (g.edge(g.out_edges(n.id).front()).guard) {
          problems.push_back("state '" + n.label + "' has a guarded edge");
        }
        break;
      case NodeKind::Decision: {
        if (g.out_degree(n.id) < 2) problems.push_back("decision '" + n.label + "' has < 2 branches");
        std::set<std::string> guards;
        for (EdgeId e : g.out_edges(n.id)) {
          const auto& guard = g.edge(e).guard;
          if (!guard || guard->empty()) {
            problems.push_back("decision '" + n.label + "' has an unguarded edge");
          } else if (!guards.insert(*guard).second) {
            problems.push_back("decision '" + n.label + "' repeats guard '" + *guard + "'");
          }
        }
        break;
      }
    }
  }
  if (starts != 1) problems.push_back("expected exactly one start node");
  if (stops != 1) problems.push_back("expected exactly one stop node");
  if (starts != 1 || stops != 1) return problems;

  std::vector<bool> seen(nodes.size(), false);
  std::deque<NodeId> queue{g.start()};
  seen[g.start()] = true;
  while (!queue.empty()) {
    const NodeId n = queue.front();
    queue.pop_front();
    for (EdgeId e : g.out_edges(n)) {
      if (!seen[g.edge(e).to]) {
        seen[g.edge(e).to] = true;
        queue.push_back(g.edge(e).to);
      }
    }
  }
  std::vector<std::vector<NodeId>> preds(nodes.size());
  for (const GraphEdge& e : g.edges()) preds[e.to].push_back(e.from);
  std::vector<bool> reaches(nodes.size(), false);
  queue = {g.stop()};
  reaches[g.stop()] = true;
  while (!queue.empty()) {
    const NodeId n = queue.front();
    queue.pop_front();
    for (NodeId p : preds[n]) {
      if (!reaches[p]) {
        reaches[p] = true;
        queue.push_back(p);
      }
    }
  }
  for (const GraphNode& n : nodes) {
    if (!seen[n.id]) problems.push_back("node '" + n.label + "' unreachable from start");
    if (!reaches[n.id]) problems.push_back("stop unreachable from node '" + n.label + "'");
  }
  return problems;
}

namespace {

class PathWalker {
 public:
  PathWalker(const StateGraph& g, const LoopPolicy& policy)
      : g_(g), policy_(policy), uses_(g.edges().size(), 0) {
    for (const GraphNode& n : g.nodes()) {
      std::vector<EdgeId> ordered;
      for (EdgeId e : g.out_edges(n.id))
        if (!g.edge(e).backward) ordered.push_back(e);
      for (EdgeId e : g.out_edges(n.id))
        if (g.edge(e).backward) ordered.push_back(e);
      order_.push_back(std::move(ordered));
    }
  }

  std::vector<Path> run() {
    current_.nodes.push_back(g_.start());
    visit(g_.start());
    return std::move(paths_);
  }

 private:
  void visit(NodeId n) {
    if (n == g_.stop()) {
      if (paths_.size() >= policy_.max_paths)
        throw Error(ErrorCode::PathOverflow,
                    "path count exceeds cap of " + std::to_string(policy_.max_paths));
      paths_.push_back(current_);
      return;
    }
    for (EdgeId e : order_[n]) {
      const GraphEdge& edge = g_.edge(e);
      if (edge.backward && uses_[e] >= policy_.max_backward_traversals) continue;
      if (edge.backward) ++uses_[e];
      current_.nodes.push_back(edge.to);
      current_.edges.push_back(e);
      visit(edge.to);
      current_.nodes.pop_back();
      current_.edges.pop_back();
      if (edge.backward) --uses_[e];
    }
  }

  const StateGraph& g_;
  const LoopPolicy& policy_;
  std::vector<unsigned> uses_;
  std::vector<std::vector<EdgeId>> order_;
  Path current_;
  std::vector<Path> paths_;
};

}  // namespace

std::vector<Path> enumerate_paths(const StateGraph& graph, const LoopPolicy& policy) {
  return PathWalker(graph, policy).run();
}

std::vector<std::string> path_labels(const StateGraph& graph, const Path& path) {
  std::vector<std::string> labels;
  labels.reserve(path.nodes.size());
  for (NodeId n : path.nodes) labels.push_back(graph.node(n).label);
  return labels;
}

std::vector<Transition> extract_transitions(const StateGraph& graph) {
  std::vector<Transition> out;
  std::set<std::tuple<std::string, bool, std::string, std::string>> seen;
  for (EdgeId e = 0; e < graph.edges().size(); ++e) {
    const GraphEdge& edge = graph.edge(e);
    const GraphNode& from = graph.node(edge.from);
    const GraphNode& to = graph.node(edge.to);
    if (from.kind == NodeKind::Start || to.kind == NodeKind::Stop) continue;
    auto key = std::make_tuple(from.label, edge.guard.has_value(), edge.guard.value_or(""), to.label);
    if (!seen.insert(std::move(key)).second) continue;

    Transition t;
    t.current = from.label;
    t.guard = edge.guard;
    t.next = to.label;
    t.kind = graph.out_degree(edge.from) >= 2 ? TransitionKind::Decision : TransitionKind::Sequential;
    t.backward = edge.backward;
    if (edge.backward) t.backward_distance = backward_distance(graph, e);
    t.next_is_decision = to.kind == NodeKind::Decision;
    t.current_id = edge.from;
    t.next_id = edge.to;
    t.edge = e;
    out.push_back(std::move(t));
  }
  return out;
}

std::size_t backward_distance(const StateGraph& graph, EdgeId edge_id) {
  const GraphEdge& edge = graph.edge(edge_id);
  if (!edge.backward) throw Error(ErrorCode::Structural, "edge is not a backward edge");
  std::vector<std::size_t> dist(graph.nodes().size(), SIZE_MAX);
  std::deque<NodeId> queue{edge.to};
  dist[edge.to] = 0;
  while (!queue.empty()) {
    const NodeId n = queue.front();
    queue.pop_front();
    if (n == edge.from) return dist[n];
    for (EdgeId e : graph.out_edges(n)) {
      const GraphEdge& next = graph.edge(e);
      if (next.backward || dist[next.to] != SIZE_MAX) continue;
      dist[next.to] = dist[n] + 1;
      queue.push_back(next.to);
    }
  }
  throw Error(ErrorCode::Structural, "malformed loop: no forward path from '" +
                                         graph.node(edge.to).label + "' to '" +
                                         graph.node(edge.from).label + "'");
}

GraphStats graph_stats(const StateGraph& graph, const LoopPolicy& policy) {
  GraphStats stats;
  for (const GraphNode& n : graph.nodes()) {
    if (n.kind == NodeKind::State) ++stats.state_node_count;
    if (n.kind == NodeKind::Decision) ++stats.decision_node_count;
  }
  for (const Transition& t : extract_transitions(graph)) {
    if (t.kind == TransitionKind::Decision) {
      ++stats.decision_transition_count;
    } else {
      ++stats.sequential_transition_count;
    }
    if (t.backward) ++stats.backward_transition_count;
  }
  stats.path_count = enumerate_paths(graph, policy).size();
  return stats;
}

nlohmann::json to_json(const StateGraph& graph) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const GraphNode& n : graph.nodes()) {
    nodes.push_back({{"id", n.id}, {"kind", node_kind_name(n.kind)}, {"label", n.label}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const GraphEdge& e : graph.edges()) {
    nlohmann::json guard = nullptr;
    if (e.guard) guard = *e.guard;
    edges.push_back({{"from", e.from}, {"to", e.to}, {"guard", guard}, {"backward", e.backward}});
  }
  return {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

StateGraph graph_from_json(const nlohmann::json& j) {
  static const std::map<std::string, NodeKind> kinds = {{"start", NodeKind::Start},
                                                         {"stop", NodeKind::Stop},
                                                         {"state", NodeKind::State},
                                                         {"decision", NodeKind::Decision}};
  std::vector<GraphNode> nodes;
  for (const auto& n : j.at("nodes")) {
    const auto kind = kinds.find(n.at("kind").get<std::string>());
    if (kind == kinds.end()) throw Error(ErrorCode::Structural, "unknown node kind");
    nodes.push_back(GraphNode{n.at("id").get<NodeId>(), kind->second, n.at("label").get<std::string>()});
  }
  std::vector<GraphEdge> edges;
  for (const auto& e : j.at("edges")) {
    GraphEdge edge{e.at("from").get<NodeId>(), e.at("to").get<NodeId>(), std::nullopt,
                   e.at("backward").get<bool>()};
    if (!e.at("guard").is_null()) edge.guard = e.at("guard").get<std::string>();
    edges.push_back(std::move(edge));
  }
  return StateGraph(std::move(nodes), std::move(edges));
}

}  // namespace flowdial::graph
