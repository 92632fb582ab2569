#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "note_forge/gateway.hpp"
#include "note_forge/metrics.hpp"

namespace note_forge {

struct EvaluationOptions {
  bool mmlu = true;
  bool perplexity = true;
  bool embed = true;
  int max_parallel = 4;

  static EvaluationOptions lexical_only() { return {false, false, false, 4}; }
  bool needs_gateway() const { return mmlu || perplexity || embed; }
};

struct MetricReport {
  std::string pair_id;
  PrecisionRecall rouge1;
  PrecisionRecall rouge2;
  PrecisionRecall rougeL;
  double bleu = 0;
  double meteor = 0;
  // Absent when skipped by options or undefined for the input.
  std::optional<double> mmlu;
  std::optional<double> perplexity;
  std::optional<PrecisionRecall> embed;
};

struct PairText {
  std::string pair_id;
  std::string reference;
  std::string hypothesis;
};

// Model-based metrics go through the gateway, which may be null when none are
// requested. Gateway failures are rethrown as GatewayError naming the metric.
MetricReport evaluate_pair(std::string_view reference, std::string_view hypothesis, ModelGateway* gateway,
                           const EvaluationOptions& options = {}, std::string pair_id = "");

// Pairs are evaluated concurrently (options.max_parallel workers); results keep input order.
std::vector<MetricReport> evaluate_batch(std::span<const PairText> pairs, ModelGateway* gateway,
                                         const EvaluationOptions& options = {});

// Per-metric means over the reports that carry the metric.
struct MetricMeans {
  std::size_t n = 0;
  std::optional<double> mmlu;
  double rouge1 = 0, rouge2 = 0, rougeL = 0;
  double bleu = 0;
  std::optional<double> embed;
  std::optional<double> perplexity;
  double meteor = 0;
};

MetricMeans summarize(std::span<const MetricReport> reports);

// label,n,mmlu,rouge1,rouge2,rougeL,bleu,embed,perplexity,meteor
std::string metric_means_csv_header();
std::string metric_means_csv_row(std::string_view label, const MetricMeans& means);

}  // namespace note_forge
