#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "flowdial/engine.hpp"
#include "flowdial/graph.hpp"
#include "flowdial/templates.hpp"

namespace httplib {
class Server;
}

// Local HTTP API over a directory of flowcharts and live walk sessions.
namespace flowdial::service {

struct ServiceConfig {
  std::string bind = "127.0.0.1";
  int port = 8642;
  std::string corpus_dir = ".";
  std::chrono::seconds idle_timeout{1800};
  std::string static_dir;

  // Throws Error(Usage) for a bad port or a missing corpus directory.
  void validate() const;
};

struct Flowchart {
  std::string id;
  std::string title;
  std::string plantuml;
  std::shared_ptr<const graph::StateGraph> graph;
  std::shared_ptr<const engine::DialogueEngine> engine;
};

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

class Service {
 public:
  Service(ServiceConfig config, engine::GuardMatcher matcher = engine::GuardMatcher{},
          synth::TemplateSet templates = {});
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Loads every *.puml file of the corpus directory; files that fail to
  // parse are skipped and listed in warnings(). Throws Error(Io) if the
  // directory cannot be read.
  void load_corpus();
  void add_flowchart(const std::string& id, const std::string& plantuml);

  const std::vector<std::string>& warnings() const { return warnings_; }
  std::size_t session_count() { return sessions_.size(); }

  // Routes one API request. Paths are the full request path ("/api/...").
  ApiResponse handle(std::string_view method, std::string_view path, std::string_view body);

  // Binds the configured address (port 0 picks a free port) and returns the
  // bound port; throws Error(Io) when the port is in use.
  int bind();
  // Serves until stop(); call after bind().
  void listen();
  void stop();

 private:
  ApiResponse list_flowcharts() const;
  ApiResponse get_flowchart(const std::string& id) const;
  ApiResponse create_session(std::string_view body);
  ApiResponse get_session(const std::string& id);
  ApiResponse step_session(const std::string& id, std::string_view body);
  ApiResponse reset_session(const std::string& id);
  ApiResponse delete_session(const std::string& id);

  nlohmann::json session_view(const engine::SessionStore::Entry& entry) const;

  ServiceConfig config_;
  engine::GuardMatcher matcher_;
  synth::TemplateSet templates_;
  std::map<std::string, Flowchart> flowcharts_;
  std::vector<std::string> warnings_;
  engine::SessionStore sessions_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace flowdial::service
