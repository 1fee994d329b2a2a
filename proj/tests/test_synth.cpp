#include <doctest.h>

#include <atomic>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "flowdial/error.hpp"
#include "flowdial/graph.hpp"
#include "flowdial/plantuml.hpp"
#include "flowdial/rng.hpp"
#include "flowdial/synth.hpp"
#include "flowdial/templates.hpp"
#include "flowdial/text.hpp"
#include "test_support.hpp"

using namespace flowdial;
using namespace flowdial::synth;
using flowdial::testing::load_fixture;

namespace {

std::vector<DialogueSample> template_samples(const std::string& fixture,
                                             formats::FormatScheme format = formats::FormatScheme::NL) {
  TemplateProvider provider;
  return synthesize_corpus({{fixture.substr(0, fixture.find('.')), load_fixture(fixture)}}, provider, format);
}

const DialogueSample* find_sample(const std::vector<DialogueSample>& samples, const std::string& cur,
                                  const std::string& next) {
  for (const auto& s : samples)
    if (s.current_state == cur && s.next_state == next) return &s;
  return nullptr;
}

// Fails the first `failures` calls of each kind, then answers with templates.
class FlakyProvider final : public AugmentationProvider {
 public:
  explicit FlakyProvider(int failures) : failures_(failures) {}

  std::string user_input(const TransitionContext& ctx) override {
    if (user_calls_++ < failures_) throw std::runtime_error("transient");
    return template_user_input(ctx.transition);
  }
  std::string robot_output(const TransitionContext& ctx, std::string_view) override {
    if (robot_calls_++ < failures_) return "";
    return template_robot_output(ctx.transition);
  }

  int user_calls_ = 0;
  int robot_calls_ = 0;

 private:
  int failures_;
};

class BrokenProvider final : public AugmentationProvider {
 public:
  std::string user_input(const TransitionContext&) override { return "   "; }
  std::string robot_output(const TransitionContext&, std::string_view) override { return "x"; }
};

std::vector<FlowchartSource> random_flowcharts(std::uint64_t seed, std::size_t n) {
  SeededRng rng(seed);
  std::vector<FlowchartSource> out;
  for (std::size_t i = 0; i < n; ++i) {
    flowdial::testing::GenOptions opts;
    opts.max_nodes = 20;
    out.push_back({"fc" + std::to_string(100 + i), flowdial::testing::random_ast(rng, opts)});
  }
  return out;
}

std::vector<nlohmann::json> numbered(const std::string& tag, std::size_t n) {
  std::vector<nlohmann::json> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({{"src", tag}, {"i", i}});
  return out;
}

}  // namespace

TEST_SUITE_BEGIN("synth");

TEST_CASE("templates") {
  graph::Transition seq;
  seq.current = "Pay fee";
  seq.next = "Photo printing in progress";
  CHECK(template_user_input(seq) == "Pay fee has been completed.");
  CHECK(template_robot_output(seq) == "Now process Photo printing in progress.");

  graph::Transition dec;
  dec.current = "Application deadline?";
  dec.guard = "Yes";
  dec.next = "System closes the application entry";
  dec.kind = graph::TransitionKind::Decision;
  CHECK(template_user_input(dec) == "Answer to 'Application deadline?': Yes.");

  graph::Transition loop;
  loop.current = "Installation and debugging unsuccessful";
  loop.guard = "yes";
  loop.kind = graph::TransitionKind::Decision;
  loop.backward = true;
  CHECK(template_user_input(loop) == "Answer to 'Installation and debugging unsuccessful': yes.");

  graph::Transition to_decision;
  to_decision.current = "Display printed photos";
  to_decision.next = "Customer satisfied?";
  to_decision.next_is_decision = true;
  CHECK(template_robot_output(to_decision) == "Please make a choice: Customer satisfied?");

  graph::Transition wait;
  wait.next = "Wait for the admission results to be announced";
  CHECK(template_robot_output(wait) == "Now process Wait for the admission results to be announced.");

  graph::Transition empty;
  CHECK_FALSE(template_robot_output(empty).empty());
  CHECK_FALSE(template_user_input(empty).empty());
}

TEST_CASE("Chinese template file loads") {
  const auto t = TemplateSet::load(std::string(FLOWDIAL_DATA_DIR) + "/templates_zh.json");
  graph::Transition seq;
  seq.current = "付款";
  seq.next = "打印照片";
  CHECK(template_user_input(seq, t).find("付款") != std::string::npos);
  CHECK(template_robot_output(seq, t).find("打印照片") != std::string::npos);
}

TEST_CASE("college corpus has 17 sequential and 6 decision samples") {
  const auto samples = template_samples("college_application.puml");
  std::size_t seq = 0, dec = 0;
  for (const auto& s : samples) (s.sample_type == SampleType::Decision ? dec : seq)++;
  CHECK(samples.size() == 23);
  CHECK(seq == 17);
  CHECK(dec == 6);
  CHECK(samples.front().id == "college_application#0");
}

TEST_CASE("minimal document yields no samples") {
  auto r = plantuml::parse("@startuml\nstart\nstop\n@enduml");
  TemplateProvider p;
  CHECK(synthesize_samples(graph::build_graph(*r.ast), "", p, formats::FormatScheme::NL).empty());
}

TEST_CASE("lighting corpus contains the case study decision sample") {
  const auto samples = template_samples("lighting_install.puml");
  const auto* s = find_sample(samples, "Need to adjust fixture position?", "Negotiate adjustment plan");
  REQUIRE(s != nullptr);
  CHECK(s->sample_type == SampleType::Decision);
  CHECK(s->guard == std::optional<std::string>("yes"));
  const auto* back =
      find_sample(samples, "Installation and debugging unsuccessful", "Confirm fixture layout and installation position");
  REQUIRE(back != nullptr);
  CHECK(back->backward);
  CHECK(back->backward_distance == std::optional<std::size_t>(2));
}

TEST_CASE("sample and transition bijection with zero validation errors on fixtures") {
  for (const auto& name : flowdial::testing::fixture_names()) {
    CAPTURE(name);
    const auto ast = load_fixture(name);
    const auto g = graph::build_graph(ast);
    const auto samples = template_samples(name);
    CHECK(samples.size() == graph::extract_transitions(g).size());
    const auto stats = graph::graph_stats(g);
    std::size_t dec = 0;
    for (const auto& s : samples) {
      if (s.sample_type == SampleType::Decision) ++dec;
      CHECK(validate_sample(s, g).empty());
    }
    CHECK(dec == stats.decision_transition_count);
  }
}

TEST_CASE("SC and Hybrid samples validate against their own flowchart text") {
  for (auto f : {formats::FormatScheme::SC, formats::FormatScheme::Hybrid}) {
    const auto samples = template_samples("college_application.puml", f);
    REQUIRE(samples.size() == 23);
    for (const auto& s : samples) {
      CHECK(s.format == f);
      CHECK(s.state_dict.has_value() == (f == formats::FormatScheme::SC));
      CHECK(validate_sample(s, graph_for_sample(s)).empty());
    }
  }
}

TEST_CASE("validation catches wrong edges and inconsistent input") {
  const auto samples = template_samples("photo_shop.puml");
  const auto g = graph::build_graph(load_fixture("photo_shop.puml"));
  const auto* base = find_sample(samples, "Repeatedly check if printing is complete", "Customer leaves the photo shop");
  REQUIRE(base != nullptr);
  auto wrong = *base;
  wrong.next_state = "Display printed photos";
  wrong.next_node_id.reset();
  const auto diags = validate_sample(wrong, g);
  REQUIRE_FALSE(diags.empty());
  CHECK(diags[0].message.rfind("[states]", 0) == 0);

  const auto* dec = find_sample(samples, "Photo quality check passed?", "Pay fee");
  REQUIRE(dec != nullptr);
  auto vague = *dec;
  vague.user_input = "Let me think about it.";
  const auto d2 = validate_sample(vague, g);
  REQUIRE(d2.size() == 1);
  CHECK(d2[0].message.rfind("[consistency]", 0) == 0);

  auto opposite = *dec;
  opposite.user_input = "Answer: no.";
  CHECK_FALSE(validate_sample(opposite, g).empty());

  auto broken = *base;
  broken.flowchart_text = "@startuml\nstart\n";
  const auto d3 = validate_sample(broken, g);
  REQUIRE_FALSE(d3.empty());
  CHECK(d3[0].message.rfind("[syntax]", 0) == 0);
}

TEST_CASE("provider retries and failure reporting") {
  const auto ast = load_fixture("mini_decision.puml");
  const auto g = graph::build_graph(ast);
  FlakyProvider flaky(2);
  SynthOptions opts;
  opts.retries = 3;
  const auto samples = synthesize_samples(g, plantuml::render(ast), flaky, formats::FormatScheme::NL, opts);
  CHECK(samples.size() == 2);

  FlakyProvider hopeless(100);
  opts.retries = 2;
  try {
    synthesize_samples(g, plantuml::render(ast), hopeless, formats::FormatScheme::NL, opts);
    FAIL("expected synthesis error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Synthesis);
    CHECK(std::string(e.what()).find("2 transition(s)") != std::string::npos);
  }
  CHECK(hopeless.user_calls_ == 6);

  BrokenProvider broken;
  CHECK_THROWS_AS(synthesize_corpus({{"x", ast}}, broken, formats::FormatScheme::NL), Error);
}

TEST_CASE("parallel synthesis equals sequential synthesis") {
  const auto flowcharts = random_flowcharts(17, 40);
  TemplateProvider p;
  const auto one = synthesize_corpus(flowcharts, p, formats::FormatScheme::NL, 1);
  const auto four = synthesize_corpus(flowcharts, p, formats::FormatScheme::NL, 4);
  CHECK(one == four);
  CHECK_THROWS_AS(synthesize_corpus({flowcharts[0], flowcharts[0]}, p, formats::FormatScheme::NL), Error);
}

TEST_CASE("corpus serialization round-trips") {
  auto samples = template_samples("college_application.puml", formats::FormatScheme::SC);
  const auto more = template_samples("lighting_install.puml");
  samples.insert(samples.end(), more.begin(), more.end());
  std::stringstream buf;
  write_corpus(buf, samples);
  CHECK(read_corpus(buf) == samples);

  std::stringstream bad("{\"id\":1}\n");
  CHECK_THROWS_AS(read_corpus(bad), Error);
}

TEST_CASE("corpus statistics") {
  const auto samples = template_samples("college_application.puml");
  std::map<std::string, graph::StateGraph> graphs{
      {"college_application", graph::build_graph(load_fixture("college_application.puml"))}};
  const auto stats = corpus_stats(samples, graphs);
  CHECK(stats.flowchart_count == 1);
  CHECK(stats.state_node_count == 18);
  CHECK(stats.decision_sample_count == 6);
  CHECK(stats.sequential_sample_count == 17);
  CHECK(stats.dialogue_sample_count == 23);
  double total = 0;
  for (const auto& s : samples)
    total += static_cast<double>(text::codepoint_count(s.flowchart_text + s.current_state + s.user_input));
  CHECK(stats.avg_length == doctest::Approx(total / 23));

  const auto empty = corpus_stats({}, {});
  CHECK(empty.dialogue_sample_count == 0);
  CHECK(empty.avg_length == 0.0);

  const auto text = render_stats(stats);
  for (const char* row : {"Flowcharts", "State Nodes", "Sequential Samples", "Decision Samples", "Dialogue Samples",
                          "Avg. Length"})
    CHECK(text.find(row) != std::string::npos);
  CHECK_THROWS_AS(corpus_stats(samples, {}), Error);
}

TEST_CASE("sample_subset") {
  TemplateProvider p;
  const auto corpus = synthesize_corpus(random_flowcharts(3, 10), p, formats::FormatScheme::NL);
  CHECK(sample_subset(corpus, corpus.size() + 5) == corpus);
  CHECK(sample_subset(corpus, 0).empty());

  std::map<std::string, std::size_t> sizes;
  for (const auto& s : corpus) ++sizes[s.flowchart_id];
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::vector<DialogueSample> previous;
    for (std::size_t budget = 0; budget <= corpus.size(); budget += 3) {
      const auto sub = sample_subset(corpus, budget, seed);
      CHECK(sub.size() <= budget);
      std::map<std::string, std::size_t> got;
      for (const auto& s : sub) ++got[s.flowchart_id];
      for (const auto& [id, n] : got) CHECK(n == sizes[id]);
      // Monotone: the smaller subset is a prefix of the larger one.
      REQUIRE(previous.size() <= sub.size());
      CHECK(std::equal(previous.begin(), previous.end(), sub.begin()));
      previous = sub;
    }
  }
}

TEST_CASE("mix_corpora") {
  MixOptions even;
  const auto a = numbered("a", 100);
  const auto mixed = mix_corpora(a, numbered("b", 100), even);
  REQUIRE(mixed.size() == 200);
  for (std::size_t i = 0; i < mixed.size(); ++i) CHECK(mixed[i]["src"] == (i % 2 == 0 ? "a" : "b"));

  MixOptions fixed;
  fixed.strategy = MixStrategy::Fixed;
  fixed.fixed_b = 12000;
  CHECK(mix_corpora(a, numbered("b", 15000), fixed).size() == 12100);

  fixed.fixed_b = 20000;
  CHECK_THROWS_AS(mix_corpora(a, numbered("b", 15000), fixed), Error);

  MixOptions bad;
  bad.ratio_b = 0;
  CHECK_THROWS_AS(mix_corpora(a, a, bad), Error);

  SeededRng rng(8);
  for (int round = 0; round < 50; ++round) {
    MixOptions o;
    o.ratio_a = 1 + rng.below(4);
    o.ratio_b = 1 + rng.below(4);
    o.seed = rng.next();
    const auto na = rng.below(80);
    const auto nb = rng.below(120);
    const auto out = mix_corpora(numbered("a", na), numbered("b", nb), o);
    std::size_t ca = 0, cb = 0;
    std::set<std::uint64_t> seen_b;
    for (const auto& r : out) {
      if (r["src"] == "a") {
        CHECK(r["i"] == ca);
        ++ca;
      } else {
        ++cb;
        CHECK(seen_b.insert(r["i"].get<std::uint64_t>()).second);
      }
      // Every prefix keeps the ratio within one record.
      const double ideal_b = static_cast<double>(ca) * o.ratio_b / o.ratio_a;
      CHECK(std::abs(static_cast<double>(cb) - ideal_b) <= 1.0 + static_cast<double>(o.ratio_b) / o.ratio_a);
    }
    const double ideal = static_cast<double>(ca) * o.ratio_b / o.ratio_a;
    CHECK(std::abs(static_cast<double>(cb) - ideal) <= 1.0);
    CHECK(out == mix_corpora(numbered("a", na), numbered("b", nb), o));
  }
}

TEST_SUITE_END();
