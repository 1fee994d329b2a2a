// Acceptance checks: one [PASS]/[FAIL] line per criterion, exit status 1 if
// any criterion fails.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "flowdial/augment.hpp"
#include "flowdial/engine.hpp"
#include "flowdial/error.hpp"
#include "flowdial/eval.hpp"
#include "flowdial/formats.hpp"
#include "flowdial/graph.hpp"
#include "flowdial/llm.hpp"
#include "flowdial/plantuml.hpp"
#include "flowdial/rng.hpp"
#include "flowdial/synth.hpp"
#include "flowdial/text.hpp"
#include "test_support.hpp"

using namespace flowdial;
using flowdial::testing::fixture_names;
using flowdial::testing::fixture_path;
using flowdial::testing::load_fixture;
using flowdial::testing::read_text;

namespace {

// Pinned tolerances.
constexpr double kParserBudgetSeconds = 1.0;
constexpr double kPathBudgetSeconds = 1.0;
constexpr double kThroughputBudgetSeconds = 5.0;
constexpr double kAccuracyEpsilon = 1e-9;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Collects failed sub-checks for one criterion.
class Criterion {
 public:
  explicit Criterion(std::string name) : name_(std::move(name)) {}

  void check(bool ok, const std::string& what) {
    ++checks_;
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    if (!ok) ++failed_;
  }

  void note(const std::string& detail) { details_.push_back(detail); }

  bool finish() const {
    std::string detail;
    for (const auto& d : details_) detail += (detail.empty() ? "" : "; ") + d;
    std::cout << (failed_ == 0 ? "[PASS] " : "[FAIL] ") << name_ << " (" << checks_ - failed_ << "/" << checks_
              << " checks" << (detail.empty() ? "" : "; " + detail) << ")\n";
    for (const auto& f : failures_) std::cout << "       failed: " << f << '\n';
    return failed_ == 0;
  }

 private:
  std::string name_;
  std::size_t checks_ = 0;
  std::size_t failed_ = 0;
  std::vector<std::string> failures_;
  std::vector<std::string> details_;
};

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string stem(const std::string& name) { return name.substr(0, name.find('.')); }

std::vector<synth::DialogueSample> template_corpus(const std::vector<synth::FlowchartSource>& sources,
                                                   formats::FormatScheme format = formats::FormatScheme::NL) {
  synth::TemplateProvider provider;
  return synth::synthesize_corpus(sources, provider, format);
}

std::vector<std::vector<std::string>> graph_label_paths(const graph::StateGraph& g, unsigned k) {
  graph::LoopPolicy policy;
  policy.max_backward_traversals = k;
  std::vector<std::vector<std::string>> out;
  for (const auto& p : graph::enumerate_paths(g, policy)) out.push_back(graph::path_labels(g, p));
  return out;
}

bool parser_golden() {
  Criterion c("parser golden suite and round-trip, budget " + fixed2(kParserBudgetSeconds) + " s");
  const auto t0 = Clock::now();
  for (const auto& name : fixture_names()) {
    const auto parsed = plantuml::parse(read_text(fixture_path(name)));
    c.check(parsed.ok() && parsed.diagnostics.empty(), name + " parses without diagnostics");
    if (!parsed.ok()) continue;
    const auto again = plantuml::parse(plantuml::render(*parsed.ast));
    c.check(again.ok() && *again.ast == *parsed.ast, name + " round-trips");
  }
  const auto college = plantuml::count_nodes(load_fixture("college_application.puml"));
  c.check(college.actions == 18 && college.decisions == 3 && college.repeats == 0, "college counts 18/3/0");
  SeededRng rng(1);
  for (int i = 0; i < 200; ++i) {
    const auto ast = flowdial::testing::random_ast(rng);
    const auto again = plantuml::parse(plantuml::render(ast));
    c.check(again.ok() && *again.ast == ast, "random AST " + std::to_string(i) + " round-trips");
  }
  const double elapsed = seconds_since(t0);
  c.check(elapsed < kParserBudgetSeconds, "runtime within budget");
  c.note("runtime " + fixed3(elapsed) + " s");
  return c.finish();
}

bool path_oracle() {
  Criterion c("path oracle equals brute-force DFS, budget " + fixed2(kPathBudgetSeconds) + " s");
  const auto t0 = Clock::now();
  for (const auto& name : fixture_names()) {
    const auto ast = load_fixture(name);
    const auto g = graph::build_graph(ast);
    for (unsigned k = 0; k <= 2; ++k)
      c.check(graph_label_paths(g, k) == flowdial::testing::oracle_paths(ast, k),
              name + " paths equal the oracle at k=" + std::to_string(k));
  }
  const auto count = [](const std::string& name) {
    return graph::enumerate_paths(graph::build_graph(load_fixture(name))).size();
  };
  const auto shop = count("photo_shop.puml");
  const auto college = count("college_application.puml");
  const auto mini = count("mini_decision.puml");
  c.check(shop == 4, "photo shop has 4 paths");
  c.check(college == 8, "college has 8 paths");
  c.check(mini == 2, "mini decision has 2 paths");
  const double elapsed = seconds_since(t0);
  c.check(elapsed < kPathBudgetSeconds, "runtime within budget");
  c.note("counts " + std::to_string(shop) + "/" + std::to_string(college) + "/" + std::to_string(mini));
  c.note("runtime " + fixed3(elapsed) + " s");
  return c.finish();
}

bool case_study_oracle() {
  Criterion c("case-study oracle and rejection of the two incorrect predictions");
  const auto shop_ast = load_fixture("photo_shop.puml");
  const auto shop = graph::build_graph(shop_ast);
  const auto seq = engine::oracle_next_state(shop, "Repeatedly check if printing is complete", "Printing is completed.");
  c.check(seq.next_state == "Customer leaves the photo shop", "sequential case gives 'Customer leaves the photo shop'");

  engine::Lexicon lex;
  lex.affirmative_keywords.push_back("needs to be adjusted");
  const auto lighting_ast = load_fixture("lighting_install.puml");
  const auto lighting = graph::build_graph(lighting_ast);
  const auto dec = engine::oracle_next_state(lighting, "Need to adjust fixture position?",
                                             "The position of the lighting fixture needs to be adjusted.",
                                             engine::GuardMatcher(lex));
  c.check(dec.next_state == "Negotiate adjustment plan", "decision case gives 'Negotiate adjustment plan'");

  // Incorrect predictions fail validation as samples and score as wrong.
  const auto shop_corpus = template_corpus({{"photo_shop", shop_ast}});
  const auto lighting_corpus = template_corpus({{"lighting_install", lighting_ast}});
  const auto reject = [&](const std::vector<synth::DialogueSample>& gold, const graph::StateGraph& g,
                          const std::string& current, const std::string& wrong) {
    const auto it = std::find_if(gold.begin(), gold.end(), [&](const auto& s) {
      return s.current_state == current && (s.sample_type == synth::SampleType::Sequential || s.guard == "yes");
    });
    if (it == gold.end()) {
      c.check(false, "gold sample for '" + current + "' exists");
      return;
    }
    auto bad = *it;
    bad.next_state = wrong;
    bad.next_node_id.reset();
    c.check(!synth::validate_sample(bad, g, engine::GuardMatcher(lex)).empty(), "'" + wrong + "' fails validation");
    std::vector<eval::Prediction> preds;
    for (const auto& s : gold) preds.push_back({s.id, s.id == it->id ? wrong : s.next_state});
    const auto r = eval::evaluate(gold, preds);
    c.check(r.overall.correct + 1 == r.overall.total, "'" + wrong + "' scores incorrect");
  };
  reject(shop_corpus, shop, "Repeatedly check if printing is complete", "Display printed photos");
  reject(lighting_corpus, lighting, "Need to adjust fixture position?", "Reinstall or adjust fixture position");
  return c.finish();
}

bool format_fidelity() {
  Criterion c("state-code format fidelity, hybrid line forms and graph isomorphism");
  const auto ast = load_fixture("college_application.puml");
  const auto dict = formats::assign_codes(ast);
  const auto golden = nlohmann::ordered_json::parse(read_text(fixture_path("golden/college_application.dict.json")));
  std::vector<std::pair<std::string, std::string>> expected;
  for (const auto& [k, v] : golden.items()) expected.emplace_back(k, v.get<std::string>());
  c.check(dict.entries() == expected, "dictionary equals the golden file");
  std::size_t s = 0, cc = 0;
  for (const auto& [label, code] : dict.entries()) (code[0] == 'S' ? s : cc)++;
  c.check(s == 18 && cc == 3, "18 S entries and 3 C entries");
  c.check(dict.code_of("Application deadline?") == std::optional<std::string>("C2"), "'Application deadline?' is C2");
  c.check(dict.code_of("Enroll in the school") == std::optional<std::string>("S18"), "'Enroll in the school' is S18");

  const auto norm = [](const std::string& text) {
    std::vector<std::string> out;
    for (auto l : text::split_lines(text))
      if (!text::trim(l).empty()) out.emplace_back(text::trim(l));
    return out;
  };
  const auto sc = formats::to_format(ast, formats::FormatScheme::SC);
  const auto hy = formats::to_format(ast, formats::FormatScheme::Hybrid);
  c.check(norm(sc.flowchart_text) == norm(read_text(fixture_path("golden/college_application.sc.puml"))),
          "SC diagram equals the golden file");
  c.check(norm(hy.flowchart_text) == norm(read_text(fixture_path("golden/college_application.hybrid.puml"))),
          "Hybrid diagram equals the golden file");
  c.check(hy.flowchart_text.find(":S11: System closes the application entry;") != std::string::npos,
          "Hybrid line form ':S11: System closes the application entry;'");

  const auto isomorphic = [&](const plantuml::ActivityAst& a) {
    const auto nl = graph::build_graph(a);
    const auto sc_f = formats::to_format(a, formats::FormatScheme::SC);
    const auto hy_f = formats::to_format(a, formats::FormatScheme::Hybrid);
    const auto sc_ast = plantuml::parse(sc_f.flowchart_text);
    const auto hy_ast = plantuml::parse(hy_f.flowchart_text);
    return sc_ast.ok() && hy_ast.ok() && graph::build_graph(formats::resolve_ast(*sc_ast.ast, &*sc_f.dict)) == nl &&
           graph::build_graph(formats::resolve_ast(*hy_ast.ast, nullptr)) == nl;
  };
  c.check(isomorphic(ast), "college NL/SC/Hybrid graphs are isomorphic");
  SeededRng rng(3);
  for (int i = 0; i < 100; ++i) {
    flowdial::testing::GenOptions opts;
    opts.max_nodes = 25;
    c.check(isomorphic(flowdial::testing::random_ast(rng, opts)),
            "random flowchart " + std::to_string(i) + " NL/SC/Hybrid graphs are isomorphic");
  }
  return c.finish();
}

bool synthesis_bijection() {
  Criterion c("synthesis bijection, validation and oracle score");
  for (const auto& name : fixture_names()) {
    const auto ast = load_fixture(name);
    const auto g = graph::build_graph(ast);
    const auto transitions = graph::extract_transitions(g);
    const auto samples = template_corpus({{stem(name), ast}});
    c.check(samples.size() == transitions.size(), name + " has one sample per transition");
    std::size_t errors = 0;
    for (const auto& s : samples)
      for (const auto& d : synth::validate_sample(s, g))
        if (d.severity == plantuml::Severity::Error) ++errors;
    c.check(errors == 0, name + " samples validate with zero errors");
    const auto r = eval::evaluate(samples, eval::oracle_predictions(samples));
    c.check(r.overall.correct == r.overall.total && r.missing == 0, name + " oracle scores 100.00");
    const bool all_full = r.overall.accuracy() == 100.0 && r.decision.accuracy().value_or(100.0) == 100.0 &&
                          r.sequential.accuracy().value_or(100.0) == 100.0 &&
                          r.backward_below.accuracy().value_or(100.0) == 100.0 &&
                          r.backward_at_least.accuracy().value_or(100.0) == 100.0;
    c.check(all_full, name + " every bucket is 100.00");
  }
  const auto college = template_corpus({{"college_application", load_fixture("college_application.puml")}});
  const auto seq = std::count_if(college.begin(), college.end(),
                                 [](const auto& s) { return s.sample_type == synth::SampleType::Sequential; });
  const auto dec = static_cast<long>(college.size()) - seq;
  c.check(seq == 17 && dec == 6, "college corpus is 17 sequential + 6 decision");
  c.note("college " + std::to_string(seq) + "+" + std::to_string(dec));
  return c.finish();
}

bool loop_augmentation() {
  Criterion c("loop augmentation properties and distance buckets");
  std::size_t inserted = 0;
  const auto check_site = [&](const plantuml::ActivityAst& ast, const augment::LoopSite& site, const std::string& tag) {
    const auto out = augment::insert_backward_loop(ast, site);
    const auto reparsed = plantuml::parse(plantuml::render(out));
    c.check(reparsed.ok() && *reparsed.ast == out, tag + " re-parses");
    const auto count_back = [](const graph::StateGraph& g) {
      return std::count_if(g.edges().begin(), g.edges().end(), [](const auto& e) { return e.backward; });
    };
    const auto g0 = graph::build_graph(ast);
    const auto g1 = graph::build_graph(out);
    c.check(count_back(g1) == count_back(g0) + 1, tag + " adds exactly one backward edge");
    const auto cond = g1.find(site.condition);
    bool distance_ok = cond.size() == 1;
    for (graph::EdgeId e = 0; distance_ok && e < g1.edges().size(); ++e)
      if (g1.edge(e).backward && g1.edge(e).from == cond[0])
        distance_ok = graph::backward_distance(g1, e) == site.span;
    c.check(distance_ok, tag + " backward distance equals the span");
    c.check(augment::check_loop_revision(ast, out).empty(), tag + " passes revision checks");
    ++inserted;
  };
  for (const auto& name : fixture_names()) {
    const auto ast = load_fixture(name);
    for (const auto& site : augment::propose_loop_sites(ast, 0)) check_site(ast, site, name);
  }
  SeededRng rng(17);
  for (int i = 0; i < 60; ++i) {
    flowdial::testing::GenOptions opts;
    opts.max_nodes = 25;
    const auto ast = flowdial::testing::random_ast(rng, opts);
    auto sites = augment::propose_loop_sites(ast, static_cast<std::uint64_t>(i));
    if (sites.size() > 4) sites.resize(4);
    for (const auto& site : sites) check_site(ast, site, "random " + std::to_string(i));
  }

  // Distance buckets split at 5 on loop-free fixtures.
  std::vector<synth::FlowchartSource> sources;
  for (const auto& name : fixture_names())
    if (name != "lighting_install.puml") sources.push_back({stem(name), load_fixture(name)});
  synth::TemplateProvider provider;
  augment::AugmentPolicy shorter;
  shorter.max_span = 4;
  augment::AugmentPolicy longer;
  longer.min_span = 5;
  longer.max_span = 8;
  const auto a = augment::augment_corpus_h(sources, shorter, provider);
  const auto b = augment::augment_corpus_h(sources, longer, provider);
  c.check(a.report.backward_at_or_above_threshold == 0 && a.report.backward_below_threshold > 0,
          "spans up to 4 land in the < 5 bucket");
  c.check(b.report.backward_below_threshold == 0 && b.report.backward_at_or_above_threshold > 0,
          "spans 5 to 8 land in the >= 5 bucket");
  const auto gold_eval = eval::evaluate(b.samples, eval::oracle_predictions(b.samples));
  c.check(gold_eval.backward_at_least.total == b.report.backward_at_or_above_threshold,
          "eval buckets agree with the augmentation report");
  const auto text = eval::render_report(gold_eval);
  c.check(text.find("Backward Acc(Dist <5)") != std::string::npos, "eval header 'Backward Acc(Dist <5)'");
  const auto j = augment::to_json(a.report);
  for (const char* key : {"backward_distance_below_threshold", "backward_distance_at_or_above_threshold",
                          "dialogue_samples", "avg_length"})
    c.check(j.contains(key), std::string("report field ") + key);
  c.note(std::to_string(inserted) + " insertions");
  return c.finish();
}

bool eval_correctness() {
  Criterion c("eval harness identity and seeded corruption on 50 random corpora");
  const auto college = template_corpus({{"college_application", load_fixture("college_application.puml")}});
  std::vector<eval::Prediction> identity;
  for (const auto& s : college) identity.push_back({s.id, s.next_state});
  c.check(eval::render_report(eval::evaluate(college, identity)).find("100.00 100.00 100.00") != std::string::npos,
          "identity predictions give 100.00 100.00 100.00");

  SeededRng rng(50);
  std::size_t corpora = 0;
  while (corpora < 50) {
    std::vector<synth::FlowchartSource> sources;
    const auto charts = 1 + rng.below(5);
    for (std::size_t i = 0; i < charts; ++i) {
      flowdial::testing::GenOptions opts;
      opts.max_nodes = 30;
      sources.push_back({"c" + std::to_string(i), flowdial::testing::random_ast(rng, opts)});
    }
    const auto gold = template_corpus(sources);
    if (gold.empty()) continue;
    ++corpora;
    const auto n = gold.size();
    const auto k = rng.below(n + 1);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    std::set<std::size_t> wrong(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    std::vector<eval::Prediction> preds;
    std::vector<std::pair<std::string, std::string>> raw;
    for (std::size_t i = 0; i < n; ++i) {
      const std::string p = wrong.count(i) ? "corrupted prediction " + std::to_string(i) : gold[i].next_state;
      preds.push_back({gold[i].id, p});
      raw.emplace_back(gold[i].id, p);
    }
    const auto r = eval::evaluate(gold, preds);
    const auto brute = flowdial::testing::brute_score(gold, raw);
    const double expected = 100.0 * static_cast<double>(n - k) / static_cast<double>(n);
    c.check(r.overall.correct == n - k && r.overall.total == n, "corpus " + std::to_string(corpora) + " count");
    c.check(std::abs(*r.overall.accuracy() - expected) < kAccuracyEpsilon,
            "corpus " + std::to_string(corpora) + " acc = (N-k)/N");
    c.check(brute.correct == r.overall.correct && brute.total == r.overall.total,
            "corpus " + std::to_string(corpora) + " agrees with the brute-force scorer");
  }
  return c.finish();
}

bool throughput() {
  Criterion c("pipeline throughput: 500 flowcharts of at most 60 nodes, budget " +
              fixed2(kThroughputBudgetSeconds) + " s");
  SeededRng rng(500);
  std::vector<std::string> texts;
  std::size_t largest = 0;
  for (int i = 0; i < 500; ++i) {
    flowdial::testing::GenOptions opts;
    opts.max_nodes = 60;
    const auto ast = flowdial::testing::random_ast(rng, opts);
    const auto counts = plantuml::count_nodes(ast);
    largest = std::max(largest, counts.actions + counts.decisions + counts.repeats);
    texts.push_back(plantuml::render(ast));
  }
  c.check(largest <= 60, "generated flowcharts have at most 60 nodes");

  const auto t0 = Clock::now();
  std::size_t samples = 0;
  synth::TemplateProvider provider;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    auto parsed = plantuml::parse(texts[i]);
    if (!parsed.ok()) {
      c.check(false, "flowchart " + std::to_string(i) + " parses");
      continue;
    }
    const auto g = graph::build_graph(*parsed.ast);
    samples += synth::synthesize_corpus({{"f" + std::to_string(i), std::move(*parsed.ast)}}, provider,
                                        formats::FormatScheme::NL)
                   .size();
    (void)g;
  }
  const double elapsed = seconds_since(t0);
  c.check(elapsed < kThroughputBudgetSeconds, "runtime within budget");
  c.note("runtime " + fixed3(elapsed) + " s, " + std::to_string(samples) + " samples, largest " +
         std::to_string(largest) + " nodes");
  return c.finish();
}

class ScriptedTransport final : public llm::Transport {
 public:
  explicit ScriptedTransport(std::vector<llm::HttpResponse> script, std::chrono::milliseconds delay = {})
      : script_(std::move(script)), delay_(delay) {}

  llm::HttpResponse post(const std::string&, const std::string&, const std::map<std::string, std::string>&,
                         std::chrono::milliseconds) override {
    const int now = ++in_flight_;
    int seen = peak_.load();
    while (now > seen && !peak_.compare_exchange_weak(seen, now)) {
    }
    if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
    llm::HttpResponse r;
    {
      std::lock_guard lock(mutex_);
      r = script_[std::min(calls_++, script_.size() - 1)];
    }
    --in_flight_;
    return r;
  }

  std::size_t calls() {
    std::lock_guard lock(mutex_);
    return calls_;
  }
  int peak() const { return peak_.load(); }

 private:
  std::mutex mutex_;
  std::vector<llm::HttpResponse> script_;
  std::chrono::milliseconds delay_;
  std::size_t calls_ = 0;
  std::atomic<int> in_flight_{0};
  std::atomic<int> peak_{0};
};

llm::HttpResponse chat_ok(const std::string& content) {
  return {200, nlohmann::json{{"choices", {{{"message", {{"content", content}}}}}}}.dump(),
          llm::HttpResponse::Failure::None};
}

bool llm_contract() {
  Criterion c("LLM client contract with a fake transport");
  const auto contains_all = [&](const std::string& prompt, const std::string& fixture) {
    const auto body = read_text(fixture_path("prompts/" + fixture));
    for (auto line : text::split_lines(body)) {
      if (text::trim(line).empty()) continue;
      c.check(prompt.find(std::string(line)) != std::string::npos, fixture + " sentence present");
    }
  };
  const std::string chart = plantuml::render(load_fixture("college_application.puml"));
  contains_all(llm::build_user_input_prompt(chart, "A", "B").user, "user_input.txt");
  contains_all(llm::build_robot_output_prompt(chart, "A", "B", "A is done.").user, "robot_output.txt");
  contains_all(llm::build_backward_prompt(chart, {"@startuml\nstart\n:A;\nstop\n@enduml", "@startuml\nstart\nrepeat\n:A;\nrepeat while (A unsuccessful?)\nstop\n@enduml"}).user,
               "backward.txt");

  llm::ProviderConfig config;
  config.backoff_ms = 0;
  config.retry_limit = 3;
  config.token_env = "FLOWDIAL_ACCEPTANCE_TOKEN_UNSET";
  const llm::PromptBundle bundle{"", "hello", {}};

  const llm::HttpResponse down{503, "", llm::HttpResponse::Failure::None};
  auto retrying = std::make_shared<ScriptedTransport>(std::vector<llm::HttpResponse>{down, down, chat_ok("ok")});
  llm::LlmClient retry_client(config, retrying);
  c.check(retry_client.complete(bundle) == "ok" && retrying->calls() == 3, "two failures then success in 3 requests");
  c.check(retry_client.complete(bundle) == "ok" && retrying->calls() == 3, "cache hit issues no request");

  auto failing = std::make_shared<ScriptedTransport>(std::vector<llm::HttpResponse>{down});
  bool exhausted = false;
  try {
    llm::LlmClient(config, failing).complete(bundle);
  } catch (const Error& e) {
    exhausted = e.code() == ErrorCode::RetriesExhausted;
  }
  c.check(exhausted && failing->calls() == 4, "persistent failure raises RetriesExhausted after 4 requests");

  auto denied = std::make_shared<ScriptedTransport>(std::vector<llm::HttpResponse>{{401, "", {}}});
  bool auth = false;
  try {
    llm::LlmClient(config, denied).complete(bundle);
  } catch (const Error& e) {
    auth = e.code() == ErrorCode::AuthFailure;
  }
  c.check(auth && denied->calls() == 1, "401 raises AuthFailure without retry");

  auto slow = std::make_shared<ScriptedTransport>(std::vector<llm::HttpResponse>{chat_ok("x")},
                                                  std::chrono::milliseconds(10));
  auto bounded = config;
  bounded.max_in_flight = 3;
  llm::LlmClient pool(bounded, slow);
  std::vector<std::thread> threads;
  for (int i = 0; i < 12; ++i)
    threads.emplace_back([&, i] { pool.complete({"", "prompt " + std::to_string(i), {}}); });
  for (auto& t : threads) t.join();
  c.check(slow->calls() == 12 && slow->peak() <= 3, "in-flight requests never exceed 3");
  c.note("peak in flight " + std::to_string(slow->peak()));

  std::set<std::string> keys;
  for (int i = 0; i < 10000; ++i) keys.insert(llm::cache_key({"", "prompt " + std::to_string(i), {}}, "m"));
  c.check(keys.size() == 10000, "10^4 distinct prompts give distinct cache keys");
  return c.finish();
}

}  // namespace

int main() {
  const std::vector<std::function<bool()>> criteria{parser_golden,       path_oracle,       case_study_oracle,
                                                    format_fidelity,     synthesis_bijection, loop_augmentation,
                                                    eval_correctness,    throughput,        llm_contract};
  std::size_t passed = 0;
  for (const auto& criterion : criteria) {
    bool ok = false;
    try {
      ok = criterion();
    } catch (const std::exception& e) {
      std::cout << "[FAIL] criterion raised: " << e.what() << '\n';
    }
    passed += ok ? 1 : 0;
  }
  std::cout << passed << "/" << criteria.size() << " criteria passed\n";
  return passed == criteria.size() ? 0 : 1;
}
