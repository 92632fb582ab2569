#include "note_forge/evaluate.hpp"

#include <atomic>
#include <cstdio>
#include <thread>

#include "note_forge/csv.hpp"

namespace note_forge {

namespace {

template <typename F>
auto with_metric(std::string_view metric, F&& f) {
  try {
    return f();
  } catch (const GatewayError& e) {
    throw GatewayError(e.kind(), std::string(metric) + ": " + e.what(), e.status());
  }
}

}  // namespace

MetricReport evaluate_pair(std::string_view reference, std::string_view hypothesis, ModelGateway* gateway,
                           const EvaluationOptions& options, std::string pair_id) {
  if (options.needs_gateway() && gateway == nullptr) {
    throw ValidationError("model-based metrics requested without a gateway");
  }
  const TokenSequence ref = tokenize(reference);
  const TokenSequence hyp = tokenize(hypothesis);

  MetricReport report;
  report.pair_id = std::move(pair_id);
  report.rouge1 = rouge_n(ref, hyp, 1);
  report.rouge2 = rouge_n(ref, hyp, 2);
  report.rougeL = rouge_l(ref, hyp);
  report.bleu = bleu(ref, hyp);
  report.meteor = meteor(ref, hyp);

  if (options.mmlu && !ref.empty() && !hyp.empty()) {
    report.mmlu = with_metric("mmlu", [&] {
      return mmlu_score(gateway->logits(reference), gateway->logits(hypothesis));
    });
  }
  if (options.perplexity && hyp.size() >= 2) {
    report.perplexity = with_metric("perplexity", [&] {
      const std::vector<double> lp = gateway->logprobs(hypothesis);
      return perplexity(std::span<const double>(lp));
    });
  }
  if (options.embed) {
    if (ref.empty() || hyp.empty()) {
      report.embed = PrecisionRecall{};
    } else {
      report.embed = with_metric("embed", [&] {
        const auto s = embed_score(gateway->embed(ref.tokens()), gateway->embed(hyp.tokens()));
        return PrecisionRecall::from(s.precision, s.recall);
      });
    }
  }
  return report;
}

std::vector<MetricReport> evaluate_batch(std::span<const PairText> pairs, ModelGateway* gateway,
                                         const EvaluationOptions& options) {
  if (options.max_parallel < 1) throw ValidationError("max_parallel must be >= 1");
  std::vector<MetricReport> out(pairs.size());
  std::vector<std::exception_ptr> errors(pairs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= pairs.size()) return;
      try {
        out[k] = evaluate_pair(pairs[k].reference, pairs[k].hypothesis, gateway, options, pairs[k].pair_id);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const auto threads = std::min<std::size_t>(static_cast<std::size_t>(options.max_parallel), pairs.size());
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

MetricMeans summarize(std::span<const MetricReport> reports) {
  MetricMeans m;
  m.n = reports.size();
  if (reports.empty()) return m;
  double mmlu = 0, ppl = 0, emb = 0;
  std::size_t n_mmlu = 0, n_ppl = 0, n_emb = 0;
  for (const MetricReport& r : reports) {
    m.rouge1 += r.rouge1.f1;
    m.rouge2 += r.rouge2.f1;
    m.rougeL += r.rougeL.f1;
    m.bleu += r.bleu;
    m.meteor += r.meteor;
    if (r.mmlu) mmlu += *r.mmlu, ++n_mmlu;
    if (r.perplexity) ppl += *r.perplexity, ++n_ppl;
    if (r.embed) emb += r.embed->f1, ++n_emb;
  }
  const auto n = static_cast<double>(reports.size());
  m.rouge1 /= n;
  m.rouge2 /= n;
  m.rougeL /= n;
  m.bleu /= n;
  m.meteor /= n;
  if (n_mmlu) m.mmlu = mmlu / static_cast<double>(n_mmlu);
  if (n_ppl) m.perplexity = ppl / static_cast<double>(n_ppl);
  if (n_emb) m.embed = emb / static_cast<double>(n_emb);
  return m;
}

namespace {

std::string number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string number(const std::optional<double>& v) { return v ? number(*v) : ""; }

}  // namespace

std::string metric_means_csv_header() { return "label,n,mmlu,rouge1,rouge2,rougeL,bleu,embed,perplexity,meteor"; }

std::string metric_means_csv_row(std::string_view label, const MetricMeans& m) {
  return csv::escape_field(label) + "," + std::to_string(m.n) + "," + number(m.mmlu) + "," + number(m.rouge1) + "," +
         number(m.rouge2) + "," + number(m.rougeL) + "," + number(m.bleu) + "," + number(m.embed) + "," +
         number(m.perplexity) + "," + number(m.meteor);
}

}  // namespace note_forge
