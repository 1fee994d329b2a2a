#include "flowdial/service.hpp"

#include <httplib.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "flowdial/error.hpp"
#include "flowdial/plantuml.hpp"

namespace flowdial::service {

namespace fs = std::filesystem;
using graph::NodeKind;

void ServiceConfig::validate() const {
  if (port < 0 || port > 65535) throw Error(ErrorCode::Usage, "port must be in [0, 65535]; 0 picks a free port");
  if (!fs::is_directory(corpus_dir)) throw Error(ErrorCode::Usage, "corpus directory '" + corpus_dir + "' does not exist");
  if (!static_dir.empty() && !fs::is_directory(static_dir))
    throw Error(ErrorCode::Usage, "static directory '" + static_dir + "' does not exist");
}

namespace {

ApiResponse error_response(int status, std::string_view code, std::string message) {
  return {status, {{"error", code}, {"message", std::move(message)}}};
}

std::string title_from_id(const std::string& id) {
  std::string title = id;
  for (char& c : title) {
    if (c == '_' || c == '-') c = ' ';
  }
  if (!title.empty() && title[0] >= 'a' && title[0] <= 'z') title[0] = static_cast<char>(title[0] - 'a' + 'A');
  return title;
}

std::string_view kind_name(const graph::StateGraph& g, graph::NodeId id, bool done) {
  if (done) return "stop";
  return g.out_degree(id) >= 2 ? "decision" : "sequential";
}

}  // namespace

Service::Service(ServiceConfig config, engine::GuardMatcher matcher, synth::TemplateSet templates)
    : config_(std::move(config)),
      matcher_(std::move(matcher)),
      templates_(std::move(templates)),
      sessions_(config_.idle_timeout) {}

Service::~Service() { stop(); }

void Service::add_flowchart(const std::string& id, const std::string& plantuml) {
  auto parsed = plantuml::parse(plantuml);
  if (!parsed.ok()) {
    throw Error(ErrorCode::Structural, id + ": " + plantuml::format_diagnostic(parsed.diagnostics.front()));
  }
  Flowchart f;
  f.id = id;
  f.title = title_from_id(id);
  f.plantuml = plantuml;
  f.graph = std::make_shared<const graph::StateGraph>(graph::build_graph(*parsed.ast));
  f.engine = std::make_shared<const engine::DialogueEngine>(f.graph, matcher_, templates_);
  flowcharts_[id] = std::move(f);
}

void Service::load_corpus() {
  std::error_code ec;
  fs::directory_iterator it(config_.corpus_dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot read corpus directory " + config_.corpus_dir + ": " + ec.message());
  std::vector<fs::path> files;
  for (const auto& entry : it) {
    if (entry.is_regular_file() && entry.path().extension() == ".puml") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    try {
      add_flowchart(path.stem().string(), buf.str());
    } catch (const Error& e) {
      warnings_.push_back(e.what());
    }
  }
}

nlohmann::json Service::session_view(const engine::SessionStore::Entry& entry) const {
  const auto& s = entry.session;
  const auto& g = entry.engine->graph();
  nlohmann::json history = nlohmann::json::array();
  for (const auto& h : s.history) {
    history.push_back({{"state", h.state}, {"input", h.user_input}, {"next", h.next}, {"backward", h.backward}});
  }
  nlohmann::json options = nlohmann::json::array();
  if (!s.done && g.out_degree(s.current) >= 2) options = engine::guard_options(g, s.current);
  return {{"session_id", s.session_id},
          {"flowchart_id", s.flowchart_id},
          {"state", g.node(s.current).label},
          {"kind", kind_name(g, s.current, s.done)},
          {"robot_output", entry.robot_output},
          {"options", options},
          {"done", s.done},
          {"history", history},
          {"resets", s.resets}};
}

ApiResponse Service::list_flowcharts() const {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& [id, f] : flowcharts_) {
    std::size_t nodes = 0;
    for (const auto& n : f.graph->nodes()) {
      if (n.kind == NodeKind::State || n.kind == NodeKind::Decision) ++nodes;
    }
    list.push_back({{"id", id}, {"title", f.title}, {"node_count", nodes}});
  }
  return {200, list};
}

ApiResponse Service::get_flowchart(const std::string& id) const {
  auto it = flowcharts_.find(id);
  if (it == flowcharts_.end()) return error_response(404, "unknown_flowchart", "no flowchart '" + id + "'");
  const auto& f = it->second;
  return {200, {{"id", f.id}, {"title", f.title}, {"plantuml", f.plantuml}, {"graph", graph::to_json(*f.graph)}}};
}

ApiResponse Service::create_session(std::string_view body) {
  const auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("flowchart_id") || !j["flowchart_id"].is_string())
    return error_response(400, "bad_request", "expected {\"flowchart_id\": string}");
  const std::string id = j["flowchart_id"];
  auto it = flowcharts_.find(id);
  if (it == flowcharts_.end()) return error_response(404, "unknown_flowchart", "no flowchart '" + id + "'");

  auto entry = sessions_.create(it->second.engine, id);
  std::lock_guard lock(entry->mutex);
  const auto& g = entry->engine->graph();
  if (!entry->session.done) {
    graph::Transition t;
    t.next = g.node(entry->session.current).label;
    t.next_is_decision = g.node(entry->session.current).kind == NodeKind::Decision;
    entry->robot_output = synth::template_robot_output(t, templates_);
  } else {
    entry->robot_output = templates_.robot_finish;
  }
  return {201, session_view(*entry)};
}

ApiResponse Service::get_session(const std::string& id) {
  auto entry = sessions_.find(id);
  if (!entry) return error_response(404, "unknown_session", "no session '" + id + "'");
  std::lock_guard lock(entry->mutex);
  entry->last_access = engine::SessionStore::Clock::now();
  return {200, session_view(*entry)};
}

ApiResponse Service::step_session(const std::string& id, std::string_view body) {
  const auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("input") || !j["input"].is_string())
    return error_response(400, "bad_request", "expected {\"input\": string}");
  auto entry = sessions_.find(id);
  if (!entry) return error_response(404, "unknown_session", "no session '" + id + "'");

  std::lock_guard lock(entry->mutex);
  entry->last_access = engine::SessionStore::Clock::now();
  try {
    const auto r = entry->engine->step(entry->session, j["input"].get<std::string>());
    entry->robot_output = r.robot_output;
    auto view = session_view(*entry);
    view["step"] = {{"next_state", r.next_state},
                    {"guard", r.guard ? nlohmann::json(*r.guard) : nlohmann::json(nullptr)},
                    {"backward", r.backward},
                    {"kind", graph::transition_kind_name(r.kind)}};
    return {200, view};
  } catch (const UnmatchedGuardError& e) {
    auto resp = error_response(422, "unmatched_guard", e.what());
    resp.body["options"] = e.options();
    return resp;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SessionDone) return error_response(409, "session_done", e.what());
    if (e.code() == ErrorCode::LoopLimit) return error_response(409, "loop_limit", e.what());
    throw;
  }
}

ApiResponse Service::reset_session(const std::string& id) {
  auto entry = sessions_.find(id);
  if (!entry) return error_response(404, "unknown_session", "no session '" + id + "'");
  std::lock_guard lock(entry->mutex);
  entry->last_access = engine::SessionStore::Clock::now();
  entry->engine->reset(entry->session);
  const auto& g = entry->engine->graph();
  graph::Transition t;
  t.next = g.node(entry->session.current).label;
  t.next_is_decision = g.node(entry->session.current).kind == NodeKind::Decision;
  entry->robot_output = entry->session.done ? templates_.robot_finish : synth::template_robot_output(t, templates_);
  return {200, session_view(*entry)};
}

ApiResponse Service::delete_session(const std::string& id) {
  if (!sessions_.erase(id)) return error_response(404, "unknown_session", "no session '" + id + "'");
  return {200, {{"deleted", id}}};
}

ApiResponse Service::handle(std::string_view method, std::string_view path, std::string_view body) {
  static const std::regex flowchart_re("^/api/flowcharts/([^/]+)$");
  static const std::regex session_re("^/api/sessions/([^/]+)$");
  static const std::regex action_re("^/api/sessions/([^/]+)/(step|reset)$");

  sessions_.purge_idle();
  const std::string p(path);
  std::smatch m;
  try {
    if (p == "/api/flowcharts") {
      if (method == "GET") return list_flowcharts();
    } else if (std::regex_match(p, m, flowchart_re)) {
      if (method == "GET") return get_flowchart(m[1]);
    } else if (p == "/api/sessions") {
      if (method == "POST") return create_session(body);
    } else if (std::regex_match(p, m, action_re)) {
      if (method == "POST") return m[2] == "step" ? step_session(m[1], body) : reset_session(m[1]);
    } else if (std::regex_match(p, m, session_re)) {
      if (method == "GET") return get_session(m[1]);
      if (method == "DELETE") return delete_session(m[1]);
    } else {
      return error_response(404, "not_found", "no route " + p);
    }
    return error_response(405, "method_not_allowed", std::string(method) + " " + p);
  } catch (const std::exception& e) {
    return error_response(500, "internal", e.what());
  }
}

int Service::bind() {
  server_ = std::make_unique<httplib::Server>();
  // SO_REUSEADDR only: httplib's default SO_REUSEPORT lets two servers share a port.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  const auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
    const auto r = handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server_->Get(R"(/api/.*)", dispatch);
  server_->Post(R"(/api/.*)", dispatch);
  server_->Delete(R"(/api/.*)", dispatch);
  if (!config_.static_dir.empty()) server_->set_mount_point("/", config_.static_dir);

  int port = config_.port;
  if (port == 0) {
    port = server_->bind_to_any_port(config_.bind);
  } else if (!server_->bind_to_port(config_.bind, port)) {
    port = -1;
  }
  if (port < 0)
    throw Error(ErrorCode::Io, "cannot bind " + config_.bind + ":" + std::to_string(config_.port));
  return port;
}

void Service::listen() {
  if (!server_) throw Error(ErrorCode::Usage, "listen() before bind()");
  server_->listen_after_bind();
}

void Service::stop() {
  if (server_) server_->stop();
}

}  // namespace flowdial::service
