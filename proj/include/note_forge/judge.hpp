#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "note_forge/error.hpp"
#include "note_forge/gateway.hpp"

namespace note_forge {

enum class Criterion { accuracy, retention, objectivity, structure, coherence, grammar, readability };

inline constexpr std::size_t kCriterionCount = 7;
inline constexpr std::array<Criterion, kCriterionCount> kAllCriteria = {
    Criterion::accuracy,  Criterion::retention, Criterion::objectivity, Criterion::structure,
    Criterion::coherence, Criterion::grammar,   Criterion::readability,
};
inline constexpr int kMaxCriterionScore = 10;
inline constexpr int kMaxTotalScore = 70;
inline constexpr std::string_view kScoreSummaryLabel = "Summary of Scores";

std::string_view to_string(Criterion c);
std::string_view criterion_definition(Criterion c);

struct JudgeScorecard {
  std::array<int, kCriterionCount> scores{};
  int total = 0;
  std::optional<int> stated_total;
  // Set when stated_total disagrees with the sum; total always holds the sum.
  bool total_mismatch = false;
  std::array<std::string, kCriterionCount> justifications;

  int score(Criterion c) const { return scores[static_cast<std::size_t>(c)]; }
  bool operator==(const JudgeScorecard&) const = default;
};

class ScorecardParseError : public ValidationError {
 public:
  ScorecardParseError(std::string message, std::vector<Criterion> missing)
      : ValidationError(std::move(message)), missing_(std::move(missing)) {}
  const std::vector<Criterion>& missing() const { return missing_; }

 private:
  std::vector<Criterion> missing_;
};

// Rubric, input record and candidate summary, ending with the summary text.
std::string build_rubric_prompt(std::string_view input_text, std::string_view summary);

JudgeScorecard parse_scorecard(std::string_view response);

// Renders a transcript in the directive format; parse_scorecard inverts it.
std::string format_scorecard(const JudgeScorecard& card);

struct NamedSummary {
  std::string name;
  std::string text;
};

struct JudgeTrial {
  std::string summary_name;
  int trial = 0;
  std::string transcript;
  std::optional<JudgeScorecard> scorecard;
  std::optional<std::string> error;
};

struct JudgeRun {
  // One entry per (summary, trial) in input order.
  std::vector<JudgeTrial> trials;

  std::vector<JudgeScorecard> scorecards(std::string_view summary_name) const;
  std::size_t failures() const;
};

struct JudgeOptions {
  int trials = 1;
  int max_parallel = 4;
  GenerationParams generation{1024, 0.0, std::nullopt};
};

// Failed trials (gateway or parse errors) are recorded and do not stop the others.
JudgeRun judge(std::string_view input_text, std::span<const NamedSummary> summaries, ModelGateway& gateway,
               const JudgeOptions& options = {});

struct ScoreStats {
  double mean = 0;
  double std = 0;  // population standard deviation
};

struct JudgeAggregate {
  std::array<ScoreStats, kCriterionCount> criteria{};
  ScoreStats total;
  std::size_t n = 0;
};

JudgeAggregate aggregate(std::span<const JudgeScorecard> cards);

// Criteria as columns, one row per system, "mean (±std)" cells.
std::string render_markdown_report(std::span<const std::pair<std::string, JudgeAggregate>> rows);

}  // namespace note_forge
