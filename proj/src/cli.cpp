#include "flowdial/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "flowdial/augment.hpp"
#include "flowdial/engine.hpp"
#include "flowdial/error.hpp"
#include "flowdial/eval.hpp"
#include "flowdial/formats.hpp"
#include "flowdial/graph.hpp"
#include "flowdial/llm.hpp"
#include "flowdial/plantuml.hpp"
#include "flowdial/service.hpp"
#include "flowdial/synth.hpp"
#include "flowdial/text.hpp"

namespace flowdial::cli {

namespace fs = std::filesystem;

namespace {

// Parse failures are reported as diagnostics, not exceptions.
struct ParseFailure {};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

plantuml::ActivityAst load_ast(const std::string& path, std::ostream& err) {
  const auto parsed = plantuml::parse(read_file(path));
  if (!parsed.ok()) {
    for (const auto& d : parsed.diagnostics) err << plantuml::format_diagnostic(d, path) << '\n';
    throw ParseFailure{};
  }
  return *parsed.ast;
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

void emit(const std::string& out_path, std::ostream& out, const std::function<void(std::ostream&)>& write) {
  if (out_path.empty() || out_path == "-") {
    write(out);
    return;
  }
  std::ofstream file(out_path, std::ios::binary);
  if (!file) throw Error(ErrorCode::Io, "cannot write " + out_path);
  write(file);
}

engine::GuardMatcher matcher_from(const std::string& lexicon_path) {
  return engine::GuardMatcher(lexicon_path.empty() ? engine::Lexicon{} : engine::Lexicon::load(lexicon_path));
}

synth::TemplateSet templates_from(const std::string& path) {
  return path.empty() ? synth::TemplateSet{} : synth::TemplateSet::load(path);
}

std::vector<llm::TupleFields> load_examples(const std::string& path) {
  std::vector<llm::TupleFields> examples;
  if (path.empty()) return examples;
  for (const auto& j : synth::read_jsonl_file(path)) {
    llm::TupleFields t;
    t.flowchart_text = j.at("flowchart_text").get<std::string>();
    t.current_state = j.at("current_state").get<std::string>();
    t.next_state = j.at("next_state").get<std::string>();
    if (j.contains("user_input")) t.user_input = j["user_input"].get<std::string>();
    if (j.contains("robot_output")) t.robot_output = j["robot_output"].get<std::string>();
    examples.push_back(std::move(t));
  }
  return examples;
}

std::map<std::string, graph::StateGraph> graphs_of(const std::vector<synth::DialogueSample>& samples) {
  std::map<std::string, graph::StateGraph> graphs;
  for (const auto& s : samples) {
    if (!graphs.count(s.flowchart_id)) graphs.emplace(s.flowchart_id, synth::graph_for_sample(s));
  }
  return graphs;
}

std::pair<std::size_t, std::size_t> parse_ratio(const std::string& ratio) {
  const auto colon = ratio.find(':');
  if (colon == std::string::npos) throw Error(ErrorCode::Usage, "ratio must look like A:B");
  try {
    const auto a = std::stoul(ratio.substr(0, colon));
    const auto b = std::stoul(ratio.substr(colon + 1));
    return {a, b};
  } catch (const std::exception&) {
    throw Error(ErrorCode::Usage, "ratio must look like A:B");
  }
}

struct LlmOptions {
  std::string config_path;
  std::string user_examples;
  std::string robot_examples;
};

std::unique_ptr<llm::LlmClient> make_client(const LlmOptions& o) {
  auto config = o.config_path.empty() ? llm::ProviderConfig{} : llm::ProviderConfig::load(o.config_path);
  return std::make_unique<llm::LlmClient>(config, std::make_shared<llm::HttpTransport>());
}

void add_llm_options(CLI::App* cmd, LlmOptions& o) {
  cmd->add_option("--provider-config", o.config_path, "JSON provider configuration");
  cmd->add_option("--user-examples", o.user_examples, "JSONL few-shot tuples for user inputs");
  cmd->add_option("--robot-examples", o.robot_examples, "JSONL few-shot tuples for robot outputs");
}

int walk(const std::string& path, const std::string& transcript_path, const std::string& lexicon,
         const std::string& templates, std::istream& in, std::ostream& out, std::ostream& err) {
  const auto ast = load_ast(path, err);
  auto g = std::make_shared<const graph::StateGraph>(graph::build_graph(ast));
  engine::DialogueEngine eng(g, matcher_from(lexicon), templates_from(templates));
  auto session = eng.start_session(stem_of(path), "walk");

  const auto show = [&] {
    const auto& node = g->node(session.current);
    out << "[" << node.label << "]";
    if (g->out_degree(session.current) >= 2) {
      out << " options:";
      for (const auto& o : engine::guard_options(*g, session.current)) out << " (" << o << ")";
    }
    out << "\n> " << std::flush;
  };

  if (!session.done) {
    graph::Transition t;
    t.next = g->node(session.current).label;
    t.next_is_decision = g->node(session.current).kind == graph::NodeKind::Decision;
    out << "robot: " << synth::template_robot_output(t, eng.templates()) << '\n';
  }
  std::string line;
  while (!session.done) {
    show();
    if (!std::getline(in, line)) break;
    const auto cmd = text::ascii_lower(text::trim(line));
    if (cmd == "quit" || cmd == "exit") break;
    try {
      const auto r = eng.step(session, line);
      out << "robot: " << r.robot_output << '\n';
    } catch (const UnmatchedGuardError& e) {
      err << e.what() << "; options:";
      for (const auto& o : e.options()) err << " (" << o << ")";
      err << '\n';
    } catch (const Error& e) {
      if (e.code() != ErrorCode::LoopLimit) throw;
      err << e.what() << '\n';
      break;
    }
  }
  if (session.done) out << "[" << graph::kStopLabel << "]\n";

  if (!transcript_path.empty()) {
    emit(transcript_path, out, [&](std::ostream& o) {
      for (const auto& h : session.history) {
        o << nlohmann::json{{"state", h.state}, {"input", h.user_input}, {"next", h.next}, {"backward", h.backward}}
                 .dump()
          << '\n';
      }
    });
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Flowchart-driven dialogue corpus toolkit", "flowdial"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  std::function<int()> action;

  // parse
  std::string parse_file;
  bool parse_summary = false;
  auto* parse_cmd = app.add_subcommand("parse", "Parse a .puml file and print its canonical form");
  parse_cmd->add_option("file", parse_file)->required();
  parse_cmd->add_flag("--summary", parse_summary, "Print node counts instead of the canonical text");
  parse_cmd->callback([&] {
    action = [&] {
      const auto ast = load_ast(parse_file, err);
      if (parse_summary) {
        const auto c = plantuml::count_nodes(ast);
        out << "actions " << c.actions << "\ndecisions " << c.decisions << "\nrepeats " << c.repeats << '\n';
      } else {
        out << plantuml::render(ast) << '\n';
      }
      return kExitOk;
    };
  });

  // graph
  std::string graph_file;
  auto* graph_cmd = app.add_subcommand("graph", "Print the state graph as JSON");
  graph_cmd->add_option("file", graph_file)->required();
  graph_cmd->callback([&] {
    action = [&] {
      out << graph::to_json(graph::build_graph(load_ast(graph_file, err))).dump(2) << '\n';
      return kExitOk;
    };
  });

  // paths
  std::string paths_file;
  graph::LoopPolicy policy;
  auto* paths_cmd = app.add_subcommand("paths", "Enumerate start-to-stop paths");
  paths_cmd->add_option("file", paths_file)->required();
  paths_cmd->add_option("--max-backward", policy.max_backward_traversals, "Traversals allowed per loop edge");
  paths_cmd->add_option("--max-paths", policy.max_paths, "Overflow cap");
  paths_cmd->callback([&] {
    action = [&] {
      const auto g = graph::build_graph(load_ast(paths_file, err));
      const auto paths = graph::enumerate_paths(g, policy);
      out << paths.size() << '\n';
      for (const auto& p : paths) {
        const auto labels = graph::path_labels(g, p);
        for (std::size_t i = 0; i < labels.size(); ++i) out << (i ? " -> " : "") << labels[i];
        out << '\n';
      }
      return kExitOk;
    };
  });

  // transitions
  std::string transitions_file;
  bool transitions_json = false;
  auto* transitions_cmd = app.add_subcommand("transitions", "List classified transitions");
  transitions_cmd->add_option("file", transitions_file)->required();
  transitions_cmd->add_flag("--json", transitions_json, "One JSON object per line");
  transitions_cmd->callback([&] {
    action = [&] {
      const auto g = graph::build_graph(load_ast(transitions_file, err));
      for (const auto& t : graph::extract_transitions(g)) {
        if (transitions_json) {
          out << nlohmann::json{{"current", t.current},
                                {"guard", t.guard ? nlohmann::json(*t.guard) : nlohmann::json(nullptr)},
                                {"next", t.next},
                                {"kind", graph::transition_kind_name(t.kind)},
                                {"backward", t.backward},
                                {"backward_distance", t.backward_distance ? nlohmann::json(*t.backward_distance)
                                                                          : nlohmann::json(nullptr)}}
                     .dump()
              << '\n';
        } else {
          out << graph::transition_kind_name(t.kind) << '\t' << t.current << " -";
          if (t.guard) out << "[" << *t.guard << "]";
          out << "-> " << t.next;
          if (t.backward) out << "\t(backward, distance " << *t.backward_distance << ")";
          out << '\n';
        }
      }
      return kExitOk;
    };
  });

  // reformat
  std::string reformat_file, reformat_format = "nl", reformat_out;
  auto* reformat_cmd = app.add_subcommand("reformat", "Render a flowchart as NL, SC or Hybrid");
  reformat_cmd->add_option("file", reformat_file)->required();
  reformat_cmd->add_option("--format", reformat_format, "nl|sc|hybrid");
  reformat_cmd->add_option("--out", reformat_out, "Output .puml (SC also writes <out>.dict.json)");
  reformat_cmd->callback([&] {
    action = [&] {
      const auto formatted = formats::to_format(load_ast(reformat_file, err), formats::parse_format(reformat_format));
      emit(reformat_out, out, [&](std::ostream& o) { o << formatted.flowchart_text << '\n'; });
      if (formatted.dict) {
        if (reformat_out.empty() || reformat_out == "-") {
          out << formatted.dict->to_json().dump(2) << '\n';
        } else {
          const auto dict_path = fs::path(reformat_out).replace_extension(".dict.json").string();
          emit(dict_path, out, [&](std::ostream& o) { o << formatted.dict->to_json().dump(2) << '\n'; });
        }
      }
      return kExitOk;
    };
  });

  // gen
  std::vector<std::string> gen_files;
  std::string gen_provider = "template", gen_format = "nl", gen_out, gen_templates;
  unsigned gen_jobs = 1, gen_retries = 3;
  LlmOptions gen_llm;
  auto* gen_cmd = app.add_subcommand("gen", "Synthesize a dialogue corpus from flowcharts");
  gen_cmd->add_option("files", gen_files, "Flowchart .puml files (id = file stem)")->required();
  gen_cmd->add_option("--provider", gen_provider, "template|llm")->check(CLI::IsMember({"template", "llm"}));
  gen_cmd->add_option("--format", gen_format, "nl|sc|hybrid");
  gen_cmd->add_option("--out", gen_out, "Corpus JSONL (default stdout)");
  gen_cmd->add_option("--templates", gen_templates, "Template pattern JSON");
  gen_cmd->add_option("--jobs", gen_jobs, "Worker threads");
  gen_cmd->add_option("--retries", gen_retries, "Provider retries per transition");
  add_llm_options(gen_cmd, gen_llm);
  gen_cmd->callback([&] {
    action = [&] {
      std::vector<synth::FlowchartSource> sources;
      for (const auto& f : gen_files) sources.push_back({stem_of(f), load_ast(f, err)});
      const auto format = formats::parse_format(gen_format);
      std::vector<synth::DialogueSample> samples;
      if (gen_provider == "llm") {
        auto client = make_client(gen_llm);
        llm::LlmProvider provider(*client, load_examples(gen_llm.user_examples), load_examples(gen_llm.robot_examples));
        samples = synth::synthesize_corpus(sources, provider, format, gen_jobs, gen_retries);
      } else {
        synth::TemplateProvider provider(templates_from(gen_templates));
        samples = synth::synthesize_corpus(sources, provider, format, gen_jobs, gen_retries);
      }
      emit(gen_out, out, [&](std::ostream& o) { synth::write_corpus(o, samples); });
      err << samples.size() << " samples from " << sources.size() << " flowcharts\n";
      return kExitOk;
    };
  });

  // augment-loop
  std::vector<std::string> aug_files;
  augment::AugmentPolicy aug_policy;
  std::string aug_provider = "template", aug_format = "nl", aug_out, aug_out_dir, aug_report = "text",
              aug_templates, aug_before, aug_after;
  LlmOptions aug_llm;
  auto* aug_cmd = app.add_subcommand("augment-loop", "Insert one backward loop per flowchart and synthesize");
  aug_cmd->add_option("files", aug_files)->required();
  aug_cmd->add_option("--min-span", aug_policy.min_span);
  aug_cmd->add_option("--max-span", aug_policy.max_span);
  aug_cmd->add_option("--seed", aug_policy.seed);
  aug_cmd->add_option("--dist-threshold", aug_policy.distance_threshold);
  aug_cmd->add_option("--provider", aug_provider, "template|llm")->check(CLI::IsMember({"template", "llm"}));
  aug_cmd->add_option("--format", aug_format, "nl|sc|hybrid");
  aug_cmd->add_option("--out", aug_out, "Corpus JSONL (default stdout)");
  aug_cmd->add_option("--out-dir", aug_out_dir, "Directory for the augmented .puml files");
  aug_cmd->add_option("--report", aug_report, "text|json")->check(CLI::IsMember({"text", "json"}));
  aug_cmd->add_option("--templates", aug_templates);
  aug_cmd->add_option("--exemplar-before", aug_before, "Loop exemplar: original .puml (llm provider)");
  aug_cmd->add_option("--exemplar-after", aug_after, "Loop exemplar: revised .puml (llm provider)");
  add_llm_options(aug_cmd, aug_llm);
  aug_cmd->callback([&] {
    action = [&] {
      std::vector<synth::FlowchartSource> sources;
      for (const auto& f : aug_files) sources.push_back({stem_of(f), load_ast(f, err)});
      const auto format = formats::parse_format(aug_format);
      augment::AugmentedCorpus result;
      if (aug_provider == "llm") {
        if (aug_before.empty() || aug_after.empty())
          throw Error(ErrorCode::Usage, "--exemplar-before and --exemplar-after are required with --provider llm");
        const llm::LoopExemplar exemplar{read_file(aug_before), read_file(aug_after)};
        auto client = make_client(aug_llm);
        for (const auto& s : sources) {
          try {
            result.flowcharts.push_back({s.id, llm::llm_insert_loop(s.ast, *client, exemplar)});
          } catch (const Error& e) {
            if (e.code() != ErrorCode::Synthesis) throw;
            result.warnings.push_back(s.id + ": " + e.what());
          }
        }
        llm::LlmProvider provider(*client, load_examples(aug_llm.user_examples), load_examples(aug_llm.robot_examples));
        result.samples = synth::synthesize_corpus(result.flowcharts, provider, format);
        result.report = augment::summarize_hard(result.flowcharts, result.samples, aug_policy.distance_threshold);
        result.report.skipped_count = result.warnings.size();
      } else {
        synth::TemplateProvider provider(templates_from(aug_templates));
        result = augment::augment_corpus_h(sources, aug_policy, provider, format);
      }
      for (const auto& w : result.warnings) err << "warning: " << w << '\n';
      if (!aug_out_dir.empty()) {
        fs::create_directories(aug_out_dir);
        for (const auto& f : result.flowcharts) {
          emit((fs::path(aug_out_dir) / (f.id + ".puml")).string(), out,
               [&](std::ostream& o) { o << plantuml::render(f.ast) << '\n'; });
        }
      }
      emit(aug_out, out, [&](std::ostream& o) { synth::write_corpus(o, result.samples); });
      // The report shares standard output only when the corpus goes to a file.
      std::ostream& report_out = aug_out.empty() || aug_out == "-" ? err : out;
      if (aug_report == "json") {
        report_out << augment::to_json(result.report).dump(2) << '\n';
      } else {
        report_out << augment::render_report(result.report);
      }
      return kExitOk;
    };
  });

  // validate
  std::string validate_corpus, validate_lexicon;
  auto* validate_cmd = app.add_subcommand("validate", "Run the three-level sample validation");
  validate_cmd->add_option("corpus", validate_corpus)->required();
  validate_cmd->add_option("--lexicon", validate_lexicon, "Guard lexicon JSON");
  validate_cmd->callback([&] {
    action = [&] {
      const auto samples = synth::read_corpus_file(validate_corpus);
      const auto matcher = matcher_from(validate_lexicon);
      std::map<std::string, graph::StateGraph> graphs;
      std::size_t errors = 0;
      for (const auto& s : samples) {
        std::vector<plantuml::Diagnostic> diags;
        try {
          auto it = graphs.find(s.flowchart_id + '\n' + s.flowchart_text);
          if (it == graphs.end())
            it = graphs.emplace(s.flowchart_id + '\n' + s.flowchart_text, synth::graph_for_sample(s)).first;
          diags = synth::validate_sample(s, it->second, matcher);
        } catch (const Error& e) {
          diags.push_back({plantuml::Severity::Error, std::string("[syntax] ") + e.what(), 0});
        }
        for (const auto& d : diags) {
          if (d.severity == plantuml::Severity::Error) ++errors;
          err << s.id << ": " << d.message << '\n';
        }
      }
      out << samples.size() << " samples, " << errors << " errors\n";
      return errors == 0 ? kExitOk : kExitData;
    };
  });

  // stats
  std::string stats_corpus;
  bool stats_json = false;
  std::size_t stats_threshold = 5;
  auto* stats_cmd = app.add_subcommand("stats", "Corpus statistics");
  stats_cmd->add_option("corpus", stats_corpus)->required();
  stats_cmd->add_flag("--json", stats_json);
  stats_cmd->add_option("--dist-threshold", stats_threshold);
  stats_cmd->callback([&] {
    action = [&] {
      const auto samples = synth::read_corpus_file(stats_corpus);
      const auto stats = synth::corpus_stats(samples, graphs_of(samples), stats_threshold);
      out << (stats_json ? synth::to_json(stats).dump(2) + "\n" : synth::render_stats(stats));
      return kExitOk;
    };
  });

  // sample
  std::string sample_corpus, sample_out;
  std::size_t sample_budget = 0;
  std::optional<std::uint64_t> sample_seed;
  auto* sample_cmd = app.add_subcommand("sample", "Flowchart-atomic subset within a sample budget");
  sample_cmd->add_option("corpus", sample_corpus)->required();
  sample_cmd->add_option("--budget", sample_budget)->required();
  sample_cmd->add_option("--seed", sample_seed);
  sample_cmd->add_option("--out", sample_out);
  sample_cmd->callback([&] {
    action = [&] {
      const auto subset = synth::sample_subset(synth::read_corpus_file(sample_corpus), sample_budget, sample_seed);
      emit(sample_out, out, [&](std::ostream& o) { synth::write_corpus(o, subset); });
      return kExitOk;
    };
  });

  // mix
  std::string mix_a, mix_b, mix_ratio = "1:1", mix_strategy = "proportional", mix_out;
  std::optional<std::size_t> mix_fixed;
  std::uint64_t mix_seed = 0;
  auto* mix_cmd = app.add_subcommand("mix", "Interleave a corpus with an external JSONL corpus");
  mix_cmd->add_option("corpus", mix_a)->required();
  mix_cmd->add_option("external", mix_b)->required();
  mix_cmd->add_option("--ratio", mix_ratio, "A:B");
  mix_cmd->add_option("--strategy", mix_strategy)->check(CLI::IsMember({"fixed", "proportional"}));
  mix_cmd->add_option("--fixed-b", mix_fixed, "External records kept by the fixed strategy");
  mix_cmd->add_option("--seed", mix_seed);
  mix_cmd->add_option("--out", mix_out);
  mix_cmd->callback([&] {
    action = [&] {
      synth::MixOptions o;
      std::tie(o.ratio_a, o.ratio_b) = parse_ratio(mix_ratio);
      o.strategy = mix_strategy == "fixed" ? synth::MixStrategy::Fixed : synth::MixStrategy::Proportional;
      o.fixed_b = mix_fixed;
      o.seed = mix_seed;
      const auto mixed = synth::mix_corpora(synth::read_jsonl_file(mix_a), synth::read_jsonl_file(mix_b), o);
      emit(mix_out, out, [&](std::ostream& s) { synth::write_jsonl(s, mixed); });
      return kExitOk;
    };
  });

  // eval
  std::string eval_gold, eval_pred, eval_report = "text";
  eval::EvalOptions eval_options;
  auto* eval_cmd = app.add_subcommand("eval", "Exact-match scoring of next-state predictions");
  eval_cmd->add_option("--gold", eval_gold)->required();
  eval_cmd->add_option("--pred", eval_pred)->required();
  eval_cmd->add_option("--report", eval_report, "text|json")->check(CLI::IsMember({"text", "json"}));
  eval_cmd->add_option("--dist-threshold", eval_options.distance_threshold);
  eval_cmd->add_flag("--strict", eval_options.strict, "Only NFC and trim before comparing");
  eval_cmd->callback([&] {
    action = [&] {
      const auto report = eval::evaluate(synth::read_corpus_file(eval_gold),
                                         eval::read_predictions_file(eval_pred), eval_options);
      out << eval::render_report(report, eval_report == "json" ? eval::ReportLayout::Json : eval::ReportLayout::Text);
      if (eval_report == "json") out << '\n';
      return kExitOk;
    };
  });

  // walk
  std::string walk_file, walk_transcript, walk_lexicon, walk_templates;
  auto* walk_cmd = app.add_subcommand("walk", "Step through a flowchart interactively");
  walk_cmd->add_option("file", walk_file)->required();
  walk_cmd->add_option("--transcript", walk_transcript, "Write the walk history as JSONL");
  walk_cmd->add_option("--lexicon", walk_lexicon);
  walk_cmd->add_option("--templates", walk_templates);
  walk_cmd->callback([&] {
    action = [&] { return walk(walk_file, walk_transcript, walk_lexicon, walk_templates, in, out, err); };
  });

  // serve
  service::ServiceConfig serve_config;
  std::string serve_lexicon, serve_templates;
  long serve_idle = 1800;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API for the walker UI");
  serve_cmd->add_option("--bind", serve_config.bind);
  serve_cmd->add_option("--port", serve_config.port);
  serve_cmd->add_option("--corpus-dir", serve_config.corpus_dir);
  serve_cmd->add_option("--static-dir", serve_config.static_dir);
  serve_cmd->add_option("--idle-timeout", serve_idle, "Seconds before an idle session is dropped");
  serve_cmd->add_option("--lexicon", serve_lexicon);
  serve_cmd->add_option("--templates", serve_templates);
  serve_cmd->callback([&] {
    action = [&] {
      serve_config.idle_timeout = std::chrono::seconds(serve_idle);
      serve_config.validate();
      service::Service svc(serve_config, matcher_from(serve_lexicon), templates_from(serve_templates));
      svc.load_corpus();
      for (const auto& w : svc.warnings()) err << "warning: " << w << '\n';
      const int port = svc.bind();
      err << "listening on " << serve_config.bind << ':' << port << '\n';
      svc.listen();
      return kExitOk;
    };
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    return action ? action() : kExitUsage;
  } catch (const ParseFailure&) {
    return kExitData;
  } catch (const UnmatchedGuardError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::Usage ? kExitUsage : kExitData;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace flowdial::cli
