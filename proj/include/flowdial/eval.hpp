#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "flowdial/formats.hpp"
#include "flowdial/synth.hpp"

// Exact-match scoring of next-state predictions.
namespace flowdial::eval {

// NFC, trim, collapse whitespace runs and strip trailing sentence terminators
// (. 。 ; ；). With `strict` only NFC and trim apply. Codes are resolved
// through `dict` when one is given.
std::string normalize_state(std::string_view text, const formats::StateCodeDict* dict = nullptr,
                            bool strict = false);

struct Prediction {
  std::string sample_id;
  std::string predicted_next_state;

  bool operator==(const Prediction&) const = default;
};

std::vector<Prediction> read_predictions(std::istream& in);
std::vector<Prediction> read_predictions_file(const std::string& path);
void write_predictions(std::ostream& out, const std::vector<Prediction>& predictions);

struct Bucket {
  std::size_t correct = 0;
  std::size_t total = 0;

  // Percentage, or nullopt for an empty bucket.
  std::optional<double> accuracy() const;
  bool operator==(const Bucket&) const = default;
};

struct EvalReport {
  Bucket overall;
  Bucket decision;
  Bucket sequential;
  Bucket backward_below;     // backward samples with distance < threshold
  Bucket backward_at_least;  // backward samples with distance >= threshold
  std::size_t missing = 0;
  std::size_t distance_threshold = 5;
  std::map<std::string, Bucket> per_flowchart;

  bool has_backward() const { return backward_below.total + backward_at_least.total > 0; }
  bool operator==(const EvalReport&) const = default;
};

struct EvalOptions {
  std::size_t distance_threshold = 5;
  bool strict = false;
};

// Missing predictions score as wrong and are counted in `missing`. Throws
// Error(DuplicatePrediction) and Error(UnknownSample).
EvalReport evaluate(const std::vector<synth::DialogueSample>& gold,
                    const std::vector<Prediction>& predictions, const EvalOptions& options = {});

nlohmann::ordered_json to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);

enum class ReportLayout { Text, Json };

// Text: a " | "-separated header row and a value row with two decimals per
// column ("-" for an empty bucket).
std::string render_report(const EvalReport& report, ReportLayout layout = ReportLayout::Text);

// Ground-truth predictions from the dialogue engine, one per sample.
std::vector<Prediction> oracle_predictions(const std::vector<synth::DialogueSample>& gold);

}  // namespace flowdial::eval
