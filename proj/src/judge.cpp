#include "note_forge/judge.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <regex>
#include <thread>

#include "note_forge/strings.hpp"

namespace note_forge {

std::string_view to_string(Criterion c) {
  switch (c) {
    case Criterion::accuracy: return "Accuracy";
    case Criterion::retention: return "Retention";
    case Criterion::objectivity: return "Objectivity";
    case Criterion::structure: return "Structure";
    case Criterion::coherence: return "Coherence";
    case Criterion::grammar: return "Grammar";
    case Criterion::readability: return "Readability";
  }
  return "";
}

std::string_view criterion_definition(Criterion c) {
  switch (c) {
    case Criterion::accuracy:
      return "Measures how accurately the summary reflects the main content and contextual meaning of the input data.";
    case Criterion::retention:
      return "Assesses the ability of the summary to retain key information and details from the input data.";
    case Criterion::objectivity:
      return "Evaluates whether the summary maintains the objectivity of the input data, checking for the addition of "
             "information not present in the original that could distort the input data.";
    case Criterion::structure:
      return "Examines the systematic organization and orderly arrangement of the summary.";
    case Criterion::coherence:
      return "Focuses on the logical and consistent semantic structure of the summary, especially the connections "
             "between sentences.";
    case Criterion::grammar:
      return "Checks the grammatical accuracy of the summary, including correct grammar, expressions, and punctuation.";
    case Criterion::readability:
      return "Considers the clarity and readability of the summary, ensuring that it effectively conveys the content "
             "without unnecessary repetition or verbosity.";
  }
  return "";
}

std::string build_rubric_prompt(std::string_view input_text, std::string_view summary) {
  if (trim(input_text).empty()) throw ValidationError("rubric prompt needs a non-empty input record");
  if (trim(summary).empty()) throw ValidationError("rubric prompt needs a non-empty summary");
  std::string out;
  out += "You are reviewing a hospital discharge summary written from a patient's sequential record.\n";
  out += "The sequential record is given first, then the summary. Score the summary from 0 to 10 on each criterion.\n\n";
  out += "Criteria:\n";
  for (Criterion c : kAllCriteria) {
    out += std::string(to_string(c)) + ": " + std::string(criterion_definition(c)) + "\n";
  }
  out += "\nFormat: for each criterion in the order above write a line `CriterionName: *N/10*` where N is an integer "
         "from 0 to 10, followed by a short justification. End with the line `" +
         std::string(kScoreSummaryLabel) + ": *T/70*` where T is the sum of the seven scores.\n\n";
  out += "Sequential record:\n";
  out += input_text;
  out += "\n\nSummary:\n";
  out += summary;
  return out;
}

namespace {

struct Hit {
  std::size_t begin = 0;
  std::size_t end = 0;
  int value = 0;
};

std::optional<Hit> find_score(const std::string& text, const std::string& label, int denominator) {
  const std::regex pattern("\\b" + label + "\\b[\\s*:=-]*\\(?\\s*(\\d+)\\s*/\\s*" + std::to_string(denominator) + "\\b",
                           std::regex::icase);
  std::smatch m;
  if (!std::regex_search(text, m, pattern)) return std::nullopt;
  Hit hit;
  hit.begin = static_cast<std::size_t>(m.position(0));
  hit.end = hit.begin + static_cast<std::size_t>(m.length(0));
  const std::string digits = m[1].str();
  hit.value = digits.size() > 3 ? 1000 : std::stoi(digits);
  return hit;
}

std::string clean_justification(std::string_view raw) {
  std::size_t start = 0;
  while (start < raw.size() && (raw[start] == '*' || raw[start] == '.' || raw[start] == ':' || is_space(raw[start]))) {
    ++start;
  }
  std::string text(trim(raw.substr(start)));
  static const std::regex numbering("\\s*\\d+\\)\\s*$");
  text = std::regex_replace(text, numbering, "");
  return std::string(trim(text));
}

}  // namespace

JudgeScorecard parse_scorecard(std::string_view response) {
  const std::string text(response);
  JudgeScorecard card;
  std::array<std::optional<Hit>, kCriterionCount> hits;
  std::vector<Criterion> missing;
  for (Criterion c : kAllCriteria) {
    hits[static_cast<std::size_t>(c)] = find_score(text, std::string(to_string(c)), kMaxCriterionScore);
    if (!hits[static_cast<std::size_t>(c)]) missing.push_back(c);
  }
  if (!missing.empty()) {
    std::vector<std::string> names;
    for (Criterion c : missing) names.emplace_back(to_string(c));
    throw ScorecardParseError("scorecard is missing criteria: " + join(names, ", "), missing);
  }

  std::optional<Hit> total_hit = find_score(text, "summary of scores", kMaxTotalScore);
  if (!total_hit) {
    static const std::regex bare("(\\d+)\\s*/\\s*70\\b");
    std::smatch m;
    if (std::regex_search(text, m, bare)) {
      total_hit = Hit{static_cast<std::size_t>(m.position(0)),
                      static_cast<std::size_t>(m.position(0) + m.length(0)), std::stoi(m[1].str().substr(0, 4))};
    }
  }

  std::vector<std::size_t> boundaries;
  for (const auto& h : hits) boundaries.push_back(h->begin);
  if (total_hit) {
    // Start of the label, not of the number, so the label is not part of the justification.
    const std::size_t label = text.rfind('\n', total_hit->begin);
    boundaries.push_back(label == std::string::npos ? total_hit->begin : label);
  }
  std::sort(boundaries.begin(), boundaries.end());

  int sum = 0;
  for (Criterion c : kAllCriteria) {
    const std::size_t i = static_cast<std::size_t>(c);
    const Hit& h = *hits[i];
    if (h.value > kMaxCriterionScore) {
      throw ScorecardParseError(std::string(to_string(c)) + " score " + std::to_string(h.value) + " is outside 0..10", {});
    }
    card.scores[i] = h.value;
    sum += h.value;
    auto next = std::upper_bound(boundaries.begin(), boundaries.end(), h.begin);
    const std::size_t stop = next == boundaries.end() ? text.size() : std::max(*next, h.end);
    card.justifications[i] = clean_justification(std::string_view(text).substr(h.end, stop - h.end));
  }
  card.total = sum;
  if (total_hit) {
    card.stated_total = total_hit->value;
    card.total_mismatch = total_hit->value != sum;
  }
  return card;
}

std::string format_scorecard(const JudgeScorecard& card) {
  std::string out;
  for (Criterion c : kAllCriteria) {
    const std::size_t i = static_cast<std::size_t>(c);
    out += std::to_string(i + 1) + ") " + std::string(to_string(c)) + ": *" + std::to_string(card.scores[i]) + "/10*.\n";
    if (!card.justifications[i].empty()) out += card.justifications[i] + "\n";
    out += "\n";
  }
  out += std::string(kScoreSummaryLabel) + ": *" + std::to_string(card.stated_total.value_or(card.total)) + "/70*\n";
  return out;
}

std::vector<JudgeScorecard> JudgeRun::scorecards(std::string_view summary_name) const {
  std::vector<JudgeScorecard> out;
  for (const JudgeTrial& t : trials) {
    if (t.summary_name == summary_name && t.scorecard) out.push_back(*t.scorecard);
  }
  return out;
}

std::size_t JudgeRun::failures() const {
  return static_cast<std::size_t>(std::count_if(trials.begin(), trials.end(), [](const JudgeTrial& t) { return t.error.has_value(); }));
}

JudgeRun judge(std::string_view input_text, std::span<const NamedSummary> summaries, ModelGateway& gateway,
               const JudgeOptions& options) {
  if (options.trials < 1) throw ValidationError("judge needs at least one trial");
  if (options.max_parallel < 1) throw ValidationError("judge max_parallel must be >= 1");
  options.generation.validate();

  JudgeRun run;
  std::vector<std::string> prompts;
  for (const NamedSummary& s : summaries) {
    prompts.push_back(build_rubric_prompt(input_text, s.text));
    for (int t = 0; t < options.trials; ++t) run.trials.push_back({s.name, t, "", std::nullopt, std::nullopt});
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= run.trials.size()) return;
      JudgeTrial& trial = run.trials[k];
      GenerationParams params = options.generation;
      if (!params.seed) params.seed = static_cast<std::uint64_t>(trial.trial);
      try {
        trial.transcript = gateway.generate(prompts[k / static_cast<std::size_t>(options.trials)], params);
        trial.scorecard = parse_scorecard(trial.transcript);
      } catch (const std::exception& e) {
        trial.error = e.what();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(options.max_parallel), run.trials.size());
  std::vector<std::jthread> pool;
  for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  pool.clear();
  return run;
}

namespace {

ScoreStats stats_of(const std::vector<double>& values) {
  ScoreStats s;
  double sum = 0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double sq = 0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(sq / static_cast<double>(values.size()));
  return s;
}

std::string cell(const ScoreStats& s) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f (±%.2f)", s.mean, s.std);
  return buf;
}

}  // namespace

JudgeAggregate aggregate(std::span<const JudgeScorecard> cards) {
  if (cards.empty()) throw ValidationError("cannot aggregate zero scorecards");
  JudgeAggregate out;
  out.n = cards.size();
  for (std::size_t i = 0; i < kCriterionCount; ++i) {
    std::vector<double> values;
    for (const JudgeScorecard& c : cards) values.push_back(c.scores[i]);
    out.criteria[i] = stats_of(values);
  }
  std::vector<double> totals;
  for (const JudgeScorecard& c : cards) totals.push_back(c.total);
  out.total = stats_of(totals);
  return out;
}

std::string render_markdown_report(std::span<const std::pair<std::string, JudgeAggregate>> rows) {
  std::string out = "| Model | n |";
  for (Criterion c : kAllCriteria) out += " " + std::string(to_string(c)) + " |";
  out += " Total |\n|---|---|";
  for (std::size_t i = 0; i <= kCriterionCount; ++i) out += "---|";
  out += "\n";
  for (const auto& [name, agg] : rows) {
    out += "| " + name + " | " + std::to_string(agg.n) + " |";
    for (const ScoreStats& s : agg.criteria) out += " " + cell(s) + " |";
    out += " " + cell(agg.total) + " |\n";
  }
  return out;
}

}  // namespace note_forge
