#include "test_support.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace flowdial::testing {

using plantuml::Action;
using plantuml::ActivityAst;
using plantuml::Block;
using plantuml::Branch;
using plantuml::Decision;
using plantuml::Node;
using plantuml::Repeat;

std::string fixture_path(const std::string& name) { return std::string(FLOWDIAL_FIXTURE_DIR) + "/" + name; }

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ActivityAst load_fixture(const std::string& name) {
  auto parsed = plantuml::parse(read_text(fixture_path(name)));
  if (!parsed.ok()) throw std::runtime_error(name + ": " + plantuml::format_diagnostic(parsed.diagnostics.front()));
  return *parsed.ast;
}

std::vector<std::string> fixture_names() {
  return {"photo_shop.puml", "lighting_install.puml", "college_application.puml", "power_supply.puml",
          "mini_decision.puml"};
}

namespace {

class Generator {
 public:
  Generator(SeededRng& rng, const GenOptions& o) : rng_(rng), o_(o), budget_(o.max_nodes) {}

  ActivityAst run() {
    ActivityAst ast;
    ast.body = block(0, false);
    return ast;
  }

 private:
  std::string word() {
    static const char* kAscii[] = {"check", "order", "photo", "fee", "form", "device", "plan", "report"};
    static const char* kHan[] = {"检查", "订单", "照片", "付款", "表格", "设备"};
    if (o_.unicode && rng_.below(3) == 0) return kHan[rng_.below(6)];
    return kAscii[rng_.below(8)];
  }

  std::string action_label() {
    if (o_.duplicate_labels && rng_.below(2) == 0) return "Repeat step " + std::to_string(rng_.below(3));
    return "Do " + word() + " " + std::to_string(counter_++);
  }

  std::string condition_label() {
    if (o_.duplicate_labels && rng_.below(3) == 0) return "Shared check " + std::to_string(rng_.below(2)) + "?";
    return "Is " + word() + " " + std::to_string(counter_++) + " ok?";
  }

  std::vector<std::string> guards(std::size_t n) {
    if (n == 2 && rng_.below(2) == 0) return {"yes", "no"};
    std::vector<std::string> g;
    for (std::size_t i = 0; i < n; ++i) g.push_back("option " + std::to_string(i + 1));
    return g;
  }

  Block block(int depth, bool non_empty) {
    Block b;
    std::size_t len = rng_.below(static_cast<std::uint64_t>(o_.max_width) + 1);
    if (non_empty && len == 0) len = 1;
    for (std::size_t i = 0; i < len && budget_ > 0; ++i) {
      --budget_;
      const auto r = rng_.below(10);
      if (depth < o_.max_depth && r < 2) {
        b.push_back(Node{decision(depth)});
      } else if (depth < o_.max_depth && r == 2 && o_.allow_repeat && budget_ > 0) {
        Repeat rep;
        rep.body = block(depth + 1, true);
        rep.condition = "Retry " + std::to_string(counter_++) + "?";
        if (rng_.below(2) == 0) {
          rep.loop_guard = "again";
          rep.exit_guard = "done";
        }
        b.push_back(Node{std::move(rep)});
      } else {
        b.push_back(Node{Action{action_label()}});
      }
    }
    if (non_empty && b.empty()) b.push_back(Node{Action{action_label()}});
    return b;
  }

  Decision decision(int depth) {
    Decision d;
    d.condition = condition_label();
    const std::size_t n = o_.allow_elseif ? 2 + rng_.below(3) : 2;
    const auto g = guards(n);
    for (std::size_t i = 0; i < n; ++i) {
      Branch br;
      br.guard = g[i];
      if (i > 0 && i + 1 < n) br.condition = condition_label() + " (alt)";
      br.body = block(depth + 1, false);
      d.branches.push_back(std::move(br));
    }
    return d;
  }

  SeededRng& rng_;
  const GenOptions& o_;
  std::size_t budget_;
  std::size_t counter_ = 0;
};

struct Walker {
  unsigned max_backward;
  std::vector<std::string> labels;
  std::map<const Repeat*, unsigned> used;
  std::vector<std::vector<std::string>> out;

  using Cont = std::function<void()>;

  void block(const Block& b, std::size_t i, const Cont& k) {
    if (i == b.size()) {
      k();
      return;
    }
    const Cont rest = [&, i] { block(b, i + 1, k); };
    const Node& n = b[i];
    if (const auto* a = std::get_if<Action>(&n.value)) {
      labels.push_back(a->label);
      rest();
      labels.pop_back();
    } else if (const auto* d = std::get_if<Decision>(&n.value)) {
      labels.push_back(d->condition);
      for (const auto& br : d->branches) block(br.body, 0, rest);
      labels.pop_back();
    } else {
      repeat(std::get<Repeat>(n.value), rest);
    }
  }

  void repeat(const Repeat& r, const Cont& k) {
    block(r.body, 0, [&] {
      labels.push_back(r.condition);
      k();
      if (used[&r] < max_backward) {
        ++used[&r];
        repeat(r, k);
        --used[&r];
      }
      labels.pop_back();
    });
  }
};

}  // namespace

ActivityAst random_ast(SeededRng& rng, const GenOptions& options) { return Generator(rng, options).run(); }

std::vector<std::vector<std::string>> oracle_paths(const ActivityAst& ast, unsigned max_backward) {
  Walker w{max_backward, {}, {}, {}};
  w.labels.push_back("<start>");
  w.block(ast.body, 0, [&] {
    auto p = w.labels;
    p.push_back("<stop>");
    w.out.push_back(std::move(p));
  });
  return w.out;
}

namespace {

std::string simple_norm(std::string s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '.')) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && s[i] == ' ') ++i;
  return s.substr(i);
}

}  // namespace

BruteScore brute_score(const std::vector<synth::DialogueSample>& gold,
                       const std::vector<std::pair<std::string, std::string>>& predictions) {
  BruteScore score;
  for (const auto& g : gold) {
    ++score.total;
    for (const auto& [id, pred] : predictions) {
      if (id == g.id) {
        if (simple_norm(pred) == simple_norm(g.next_state)) ++score.correct;
        break;
      }
    }
  }
  return score;
}

}  // namespace flowdial::testing
