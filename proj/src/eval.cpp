#include "flowdial/eval.hpp"

#include <fstream>
#include <iomanip>
#include <memory>
#include <set>
#include <sstream>
#include <unordered_map>

#include "flowdial/engine.hpp"
#include "flowdial/error.hpp"
#include "flowdial/text.hpp"

namespace flowdial::eval {

namespace {

bool strip_terminator(std::string& s) {
  for (std::string_view t : {".", "。", ";", "；"}) {
    if (s.size() >= t.size() && s.compare(s.size() - t.size(), t.size(), t) == 0) {
      s.resize(s.size() - t.size());
      return true;
    }
  }
  return false;
}

std::string clean(std::string_view raw, bool strict) {
  std::string s(text::trim(text::nfc(raw)));
  if (strict) return s;
  s = text::collapse_whitespace(s);
  while (strip_terminator(s)) s = std::string(text::trim(s));
  return s;
}

}  // namespace

std::string normalize_state(std::string_view raw, const formats::StateCodeDict* dict, bool strict) {
  std::string s = clean(raw, strict);
  if (dict) s = clean(formats::resolve_label(s, dict), strict);
  return s;
}

std::vector<Prediction> read_predictions(std::istream& in) {
  std::vector<Prediction> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      // A gold corpus record doubles as a prediction of its own next state.
      if (j.contains("sample_id")) {
        out.push_back({j.at("sample_id").get<std::string>(), j.at("predicted_next_state").get<std::string>()});
      } else {
        out.push_back({j.at("id").get<std::string>(), j.at("next_state").get<std::string>()});
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Io, "predictions line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<Prediction> read_predictions_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  return read_predictions(in);
}

void write_predictions(std::ostream& out, const std::vector<Prediction>& predictions) {
  for (const auto& p : predictions)
    out << nlohmann::json{{"sample_id", p.sample_id}, {"predicted_next_state", p.predicted_next_state}}.dump()
        << '\n';
}

std::optional<double> Bucket::accuracy() const {
  if (total == 0) return std::nullopt;
  return 100.0 * static_cast<double>(correct) / static_cast<double>(total);
}

EvalReport evaluate(const std::vector<synth::DialogueSample>& gold, const std::vector<Prediction>& predictions,
                    const EvalOptions& options) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < gold.size(); ++i) index.emplace(gold[i].id, i);

  std::vector<const Prediction*> by_sample(gold.size(), nullptr);
  for (const auto& p : predictions) {
    auto it = index.find(p.sample_id);
    if (it == index.end()) throw Error(ErrorCode::UnknownSample, "prediction for unknown sample '" + p.sample_id + "'");
    if (by_sample[it->second])
      throw Error(ErrorCode::DuplicatePrediction, "more than one prediction for sample '" + p.sample_id + "'");
    by_sample[it->second] = &p;
  }

  EvalReport report;
  report.distance_threshold = options.distance_threshold;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto& g = gold[i];
    bool correct = false;
    if (!by_sample[i]) {
      ++report.missing;
    } else {
      const formats::StateCodeDict* dict = g.state_dict ? &*g.state_dict : nullptr;
      try {
        const std::string& raw = by_sample[i]->predicted_next_state;
        const std::string predicted =
            g.format == formats::FormatScheme::NL
                ? normalize_state(raw, nullptr, options.strict)
                : clean(formats::resolve_label(clean(raw, options.strict), dict), options.strict);
        correct = predicted == normalize_state(g.next_state, nullptr, options.strict);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::Resolution) throw;
      }
    }
    const auto tally = [&](Bucket& b) {
      ++b.total;
      if (correct) ++b.correct;
    };
    tally(report.overall);
    tally(g.sample_type == synth::SampleType::Decision ? report.decision : report.sequential);
    if (g.backward) {
      tally(g.backward_distance.value_or(0) < options.distance_threshold ? report.backward_below
                                                                          : report.backward_at_least);
    }
    tally(report.per_flowchart[g.flowchart_id]);
  }
  return report;
}

namespace {

nlohmann::ordered_json accuracy_json(const Bucket& b) {
  const auto acc = b.accuracy();
  return acc ? nlohmann::ordered_json(*acc) : nlohmann::ordered_json(nullptr);
}

nlohmann::ordered_json bucket_json(const Bucket& b) {
  nlohmann::ordered_json j;
  j["correct"] = b.correct;
  j["total"] = b.total;
  j["acc"] = accuracy_json(b);
  return j;
}

Bucket bucket_from_json(const nlohmann::json& j) {
  return {j.at("correct").get<std::size_t>(), j.at("total").get<std::size_t>()};
}

std::string percent(const Bucket& b) {
  const auto acc = b.accuracy();
  if (!acc) return "-";
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << *acc;
  return out.str();
}

}  // namespace

nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["acc"] = accuracy_json(r.overall);
  j["decision_acc"] = accuracy_json(r.decision);
  j["sequential_acc"] = accuracy_json(r.sequential);
  j["backward_acc_lt"] = accuracy_json(r.backward_below);
  j["backward_acc_ge"] = accuracy_json(r.backward_at_least);
  j["distance_threshold"] = r.distance_threshold;
  j["missing"] = r.missing;
  nlohmann::ordered_json counts;
  counts["overall"] = bucket_json(r.overall);
  counts["decision"] = bucket_json(r.decision);
  counts["sequential"] = bucket_json(r.sequential);
  counts["backward_lt"] = bucket_json(r.backward_below);
  counts["backward_ge"] = bucket_json(r.backward_at_least);
  j["counts"] = counts;
  nlohmann::ordered_json per = nlohmann::ordered_json::object();
  for (const auto& [id, b] : r.per_flowchart) per[id] = bucket_json(b);
  j["per_flowchart"] = per;
  return j;
}

EvalReport report_from_json(const nlohmann::json& j) {
  EvalReport r;
  const auto& counts = j.at("counts");
  r.overall = bucket_from_json(counts.at("overall"));
  r.decision = bucket_from_json(counts.at("decision"));
  r.sequential = bucket_from_json(counts.at("sequential"));
  r.backward_below = bucket_from_json(counts.at("backward_lt"));
  r.backward_at_least = bucket_from_json(counts.at("backward_ge"));
  r.distance_threshold = j.at("distance_threshold").get<std::size_t>();
  r.missing = j.at("missing").get<std::size_t>();
  for (const auto& [id, b] : j.at("per_flowchart").items()) r.per_flowchart[id] = bucket_from_json(b);
  return r;
}

std::string render_report(const EvalReport& r, ReportLayout layout) {
  if (layout == ReportLayout::Json) return to_json(r).dump(2);

  std::vector<std::string> headers{"Acc", "Decision Acc", "Sequential Acc"};
  std::vector<std::string> values{percent(r.overall), percent(r.decision), percent(r.sequential)};
  if (r.has_backward()) {
    const std::string t = std::to_string(r.distance_threshold);
    headers.push_back("Backward Acc(Dist <" + t + ")");
    headers.push_back("Backward Acc(Dist ≥" + t + ")");
    values.push_back(percent(r.backward_below));
    values.push_back(percent(r.backward_at_least));
  }
  std::string out;
  for (std::size_t i = 0; i < headers.size(); ++i) out += (i ? " | " : "") + headers[i];
  out += '\n';
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? " " : "") + values[i];
  out += '\n';
  out += "samples " + std::to_string(r.overall.total) + ", correct " + std::to_string(r.overall.correct) +
         ", missing " + std::to_string(r.missing) + '\n';
  return out;
}

std::vector<Prediction> oracle_predictions(const std::vector<synth::DialogueSample>& gold) {
  std::unordered_map<std::string, std::shared_ptr<const engine::DialogueEngine>> engines;
  std::vector<Prediction> out;
  out.reserve(gold.size());
  for (const auto& s : gold) {
    const std::string key = s.flowchart_id + '\n' + s.flowchart_text;
    auto& eng = engines[key];
    if (!eng) {
      eng = std::make_shared<engine::DialogueEngine>(
          std::make_shared<const graph::StateGraph>(synth::graph_for_sample(s)));
    }
    const auto step = s.current_node_id ? eng->next_from(*s.current_node_id, s.user_input)
                                        : eng->next_state(s.current_state, s.user_input);
    out.push_back({s.id, step.next_state});
  }
  return out;
}

}  // namespace flowdial::eval
