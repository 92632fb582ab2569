#include "note_forge/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <set>
#include <thread>
#include <unordered_map>

#include "note_forge/judge.hpp"
#include "note_forge/log.hpp"
#include "note_forge/notes.hpp"
#include "note_forge/serialize.hpp"
#include "note_forge/toml.hpp"

namespace note_forge {

void PipelineConfig::validate() const {
  if (data_dir.empty()) throw ValidationError("data_dir is empty");
  if (output_dir.empty()) throw ValidationError("output_dir is empty");
  cohort.validate();
  for (double t : {vocabulary.drugs, vocabulary.chart_items}) {
    if (!(t > 0 && t < 1)) throw ValidationError("vocabulary thresholds must lie in (0, 1)");
  }
  split_sizes(3, test_fraction, val_fraction);
  gateway.validate();
  weak_gateway.validate();
  judge.validate();
  generation.validate();
  weak_generation.validate();
  if (evaluation.max_parallel < 1) throw ValidationError("evaluation.max_parallel must be >= 1");
  if (judge_sample < 0) throw ValidationError("judge.sample must be >= 0");
  if (mock.vocab_size < 1 || mock.embedding_dim < 1) throw ValidationError("mock sizes must be >= 1");
}

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = [] {
    std::set<std::string> k{"data_dir", "output_dir", "seed", "test_fraction", "val_fraction", "sft_variant",
                            "cohort.min_age", "cohort.max_los_days", "cohort.max_ds_words",
                            "vocabulary.drugs", "vocabulary.chart_items",
                            "evaluation.mmlu", "evaluation.perplexity", "evaluation.embed",
                            "evaluation.max_parallel", "judge.sample",
                            "mock.seed", "mock.vocab_size", "mock.embedding_dim", "mock.logprob_mode"};
    for (const char* section : {"gateway", "weak_gateway", "judge"}) {
      for (const char* leaf : {"url", "model", "timeout_seconds", "max_parallel", "log_payloads"}) {
        k.insert(std::string(section) + "." + leaf);
      }
    }
    for (const char* section : {"generation", "weak_generation"}) {
      for (const char* leaf : {"max_new_tokens", "temperature", "seed"}) k.insert(std::string(section) + "." + leaf);
    }
    return k;
  }();
  return keys;
}

void read_endpoint(const toml::Document& doc, const std::string& section, EndpointConfig& e) {
  if (auto v = doc.get_string(section + ".url")) e.base_url = *v;
  if (auto v = doc.get_string(section + ".model")) e.model_name = *v;
  if (auto v = doc.get_number(section + ".timeout_seconds")) e.timeout_seconds = *v;
  if (auto v = doc.get_integer(section + ".max_parallel")) e.max_parallel = static_cast<int>(*v);
  if (auto v = doc.get_bool(section + ".log_payloads")) e.log_payloads = *v;
}

void read_generation(const toml::Document& doc, const std::string& section, GenerationParams& g) {
  if (auto v = doc.get_integer(section + ".max_new_tokens")) g.max_new_tokens = static_cast<int>(*v);
  if (auto v = doc.get_number(section + ".temperature")) g.temperature = *v;
  if (auto v = doc.get_integer(section + ".seed")) g.seed = static_cast<std::uint64_t>(*v);
}

std::string endpoint_toml(const std::string& section, const EndpointConfig& e) {
  return "[" + section + "]\nurl = " + toml::quote(e.base_url) + "\nmodel = " + toml::quote(e.model_name) +
         "\ntimeout_seconds = " + toml::format_value({e.timeout_seconds}) +
         "\nmax_parallel = " + std::to_string(e.max_parallel) +
         "\nlog_payloads = " + (e.log_payloads ? "true" : "false") + "\n";
}

std::string generation_toml(const std::string& section, const GenerationParams& g) {
  std::string out = "[" + section + "]\nmax_new_tokens = " + std::to_string(g.max_new_tokens) +
                    "\ntemperature = " + toml::format_value({g.temperature}) + "\n";
  if (g.seed) out += "seed = " + std::to_string(*g.seed) + "\n";
  return out;
}

}  // namespace

PipelineConfig pipeline_config_from_toml(std::string_view text, const std::filesystem::path& base_dir) {
  const toml::Document doc = toml::parse(text);
  for (const auto& [key, value] : doc.values()) {
    if (!known_keys().contains(key)) throw ValidationError("unknown pipeline config key '" + key + "'");
  }
  PipelineConfig c;
  c.gateway = EndpointConfig::from_env();
  auto path = [&](const std::string& key, std::filesystem::path& out) {
    if (auto v = doc.get_string(key)) {
      std::filesystem::path p(*v);
      out = p.is_absolute() || base_dir.empty() ? p : base_dir / p;
    }
  };
  path("data_dir", c.data_dir);
  path("output_dir", c.output_dir);
  if (auto v = doc.get_integer("seed")) c.seed = static_cast<std::uint64_t>(*v);
  if (auto v = doc.get_number("test_fraction")) c.test_fraction = *v;
  if (auto v = doc.get_number("val_fraction")) c.val_fraction = *v;
  if (auto v = doc.get_string("sft_variant")) {
    auto variant = parse_input_variant(*v);
    if (!variant) throw ValidationError("unknown sft_variant '" + *v + "'");
    c.sft_variant = *variant;
  }
  if (auto v = doc.get_integer("cohort.min_age")) c.cohort.min_age_years = static_cast<int>(*v);
  if (auto v = doc.get_number("cohort.max_los_days")) c.cohort.max_los_days = *v;
  if (auto v = doc.get_integer("cohort.max_ds_words")) c.cohort.max_ds_words = static_cast<int>(*v);
  if (auto v = doc.get_number("vocabulary.drugs")) c.vocabulary.drugs = *v;
  if (auto v = doc.get_number("vocabulary.chart_items")) c.vocabulary.chart_items = *v;
  read_endpoint(doc, "gateway", c.gateway);
  c.weak_gateway = c.gateway;
  read_endpoint(doc, "weak_gateway", c.weak_gateway);
  c.judge = c.gateway;
  read_endpoint(doc, "judge", c.judge);
  read_generation(doc, "generation", c.generation);
  read_generation(doc, "weak_generation", c.weak_generation);
  if (auto v = doc.get_bool("evaluation.mmlu")) c.evaluation.mmlu = *v;
  if (auto v = doc.get_bool("evaluation.perplexity")) c.evaluation.perplexity = *v;
  if (auto v = doc.get_bool("evaluation.embed")) c.evaluation.embed = *v;
  if (auto v = doc.get_integer("evaluation.max_parallel")) c.evaluation.max_parallel = static_cast<int>(*v);
  if (auto v = doc.get_integer("judge.sample")) c.judge_sample = static_cast<int>(*v);
  if (auto v = doc.get_integer("mock.seed")) c.mock.seed = static_cast<std::uint64_t>(*v);
  if (auto v = doc.get_integer("mock.vocab_size")) c.mock.vocab_size = static_cast<int>(*v);
  if (auto v = doc.get_integer("mock.embedding_dim")) c.mock.embedding_dim = static_cast<int>(*v);
  if (auto v = doc.get_string("mock.logprob_mode")) {
    if (*v == "uniform") c.mock.logprob_mode = LogprobMode::uniform;
    else if (*v == "hashed") c.mock.logprob_mode = LogprobMode::hashed;
    else throw ValidationError("mock.logprob_mode must be uniform or hashed");
  }
  c.validate();
  return c;
}

std::string to_toml(const PipelineConfig& c) {
  std::string out;
  out += "data_dir = " + toml::quote(c.data_dir.string()) + "\n";
  out += "output_dir = " + toml::quote(c.output_dir.string()) + "\n";
  out += "seed = " + std::to_string(c.seed) + "\n";
  out += "test_fraction = " + toml::format_value({c.test_fraction}) + "\n";
  out += "val_fraction = " + toml::format_value({c.val_fraction}) + "\n";
  out += "sft_variant = " + toml::quote(to_string(c.sft_variant)) + "\n\n";
  out += "[cohort]\nmin_age = " + std::to_string(c.cohort.min_age_years) +
         "\nmax_los_days = " + toml::format_value({c.cohort.max_los_days}) +
         "\nmax_ds_words = " + std::to_string(c.cohort.max_ds_words) + "\n\n";
  out += "[vocabulary]\ndrugs = " + toml::format_value({c.vocabulary.drugs}) +
         "\nchart_items = " + toml::format_value({c.vocabulary.chart_items}) + "\n\n";
  out += endpoint_toml("gateway", c.gateway) + "\n";
  out += endpoint_toml("weak_gateway", c.weak_gateway) + "\n";
  out += endpoint_toml("judge", c.judge) + "sample = " + std::to_string(c.judge_sample) + "\n\n";
  out += generation_toml("generation", c.generation) + "\n";
  out += generation_toml("weak_generation", c.weak_generation) + "\n";
  out += std::string("[evaluation]\nmmlu = ") + (c.evaluation.mmlu ? "true" : "false") +
         "\nperplexity = " + (c.evaluation.perplexity ? "true" : "false") +
         "\nembed = " + (c.evaluation.embed ? "true" : "false") +
         "\nmax_parallel = " + std::to_string(c.evaluation.max_parallel) + "\n\n";
  out += "[mock]\nseed = " + std::to_string(c.mock.seed) + "\nvocab_size = " + std::to_string(c.mock.vocab_size) +
         "\nembedding_dim = " + std::to_string(c.mock.embedding_dim) + "\nlogprob_mode = " +
         toml::quote(c.mock.logprob_mode == LogprobMode::uniform ? "uniform" : "hashed") + "\n";
  return out;
}

std::unique_ptr<ModelGateway> make_gateway(const EndpointConfig& config, const MockRules& mock) {
  if (config.base_url == kInProcessMockUrl) return std::make_unique<MockGateway>(mock);
  return std::make_unique<HttpGateway>(config);
}

CohortArtifacts select_cohort_stage(const EmrTables& tables, const CohortCriteria& criteria,
                                    const VocabularyThresholds& thresholds) {
  CohortArtifacts out;
  out.index = build_admission_index(tables.patients, tables.admissions);
  out.membership = select_cohort(out.index, tables.notes, criteria);
  if (out.membership.members.empty()) throw ValidationError("no admission satisfies the cohort criteria");
  out.drugs = build_drug_vocabulary(tables.prescriptions, out.membership, out.index, thresholds.drugs);
  // LABEVENTS is validated at ingest only; timelines use CHARTEVENTS.
  out.chart_items = build_chart_vocabulary(tables.chartevents, out.membership, out.index, thresholds.chart_items);
  return out;
}

std::vector<TimelineInputs> group_by_admission(const EmrTables& tables, const CohortArtifacts& cohort) {
  std::unordered_map<HadmId, std::size_t> slot;
  std::vector<TimelineInputs> out;
  out.reserve(cohort.membership.members.size());
  for (HadmId id : cohort.membership.members) {
    const AdmissionEntry* entry = cohort.index.find(id);
    if (entry == nullptr) throw ValidationError("cohort member " + std::to_string(id) + " is not indexed");
    slot.emplace(id, out.size());
    TimelineInputs in;
    in.patient = entry->patient;
    in.admission = entry->admission;
    out.push_back(std::move(in));
  }
  auto target = [&](HadmId id) -> TimelineInputs* {
    auto it = slot.find(id);
    return it == slot.end() ? nullptr : &out[it->second];
  };
  for (const CodedEvent& e : tables.diagnoses) {
    if (auto* t = target(e.hadm_id)) t->diagnoses.push_back(e);
  }
  for (const CodedEvent& e : tables.procedures) {
    if (auto* t = target(e.hadm_id)) t->procedures.push_back(e);
  }
  for (const Prescription& p : tables.prescriptions) {
    if (auto* t = target(p.hadm_id)) t->prescriptions.push_back(p);
  }
  for (const ChartObservation& c : tables.chartevents) {
    if (auto* t = target(c.hadm_id)) t->chart.push_back(c);
  }
  std::unordered_map<std::int64_t, const NoteRow*> by_row_id;
  for (const NoteRow& n : tables.notes) {
    by_row_id.emplace(n.row_id, &n);
    if (!n.hadm_id) continue;
    if (auto* t = target(*n.hadm_id)) t->notes.push_back(process_note(n));
  }
  for (const auto& [id, row_id] : cohort.membership.reference_note) {
    TimelineInputs* t = target(id);
    auto it = by_row_id.find(row_id);
    if (t != nullptr && it != by_row_id.end()) t->reference = clean_text(it->second->raw_text);
  }
  return out;
}

std::vector<SequentialRecord> build_sequential_dataset(const EmrTables& tables, const CohortArtifacts& cohort) {
  const std::vector<TimelineInputs> inputs = group_by_admission(tables, cohort);
  std::vector<SequentialRecord> out(inputs.size());
  std::vector<std::exception_ptr> errors(inputs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= inputs.size()) return;
      try {
        out[k] = build_timeline(inputs[k], cohort.drugs, cohort.chart_items);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  {
    const std::size_t threads =
        std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), std::max<std::size_t>(1, inputs.size()));
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::map<HadmId, std::string> generate_summaries(std::span<const SequentialRecord> records,
                                                 std::span<const HadmId> ids, ModelGateway& gateway,
                                                 const GenerationParams& params, int max_parallel) {
  if (max_parallel < 1) throw ValidationError("max_parallel must be >= 1");
  std::unordered_map<HadmId, const SequentialRecord*> by_id;
  for (const SequentialRecord& r : records) by_id.emplace(r.hadm_id, &r);
  std::vector<const SequentialRecord*> selected;
  for (HadmId id : ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw ValidationError("no sequential record for hadm_id " + std::to_string(id));
    selected.push_back(it->second);
  }
  std::vector<std::string> texts(selected.size());
  std::vector<std::exception_ptr> errors(selected.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= selected.size()) return;
      try {
        texts[k] = gateway.generate(render_instruction(*selected[k]), params);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const auto threads = std::min<std::size_t>(static_cast<std::size_t>(max_parallel), selected.size());
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::map<HadmId, std::string> out;
  for (std::size_t k = 0; k < selected.size(); ++k) out.emplace(selected[k]->hadm_id, std::move(texts[k]));
  return out;
}

std::string ingest_summary_json(const EmrTables& t) {
  std::map<std::string, std::size_t> rejected;
  for (const RejectEntry& r : t.rejects) ++rejected[r.file];
  Json tables = Json::object();
  auto add = [&](TableKind kind, std::size_t accepted) {
    const std::string file = std::string(table_name(kind)) + ".csv";
    tables[std::string(table_name(kind))] = {{"accepted", accepted}, {"rejected", rejected[file]}};
  };
  add(TableKind::patients, t.patients.size());
  add(TableKind::admissions, t.admissions.size());
  add(TableKind::diagnoses_icd, t.diagnoses.size());
  add(TableKind::procedures_icd, t.procedures.size());
  add(TableKind::prescriptions, t.prescriptions.size());
  add(TableKind::chartevents, t.chartevents.size());
  add(TableKind::labevents, t.labevents.size());
  add(TableKind::noteevents, t.notes.size());
  add(TableKind::d_icd_diagnoses, t.icd_diagnoses.size());
  add(TableKind::d_icd_procedures, t.icd_procedures.size());
  add(TableKind::d_items, t.items.size());
  add(TableKind::d_labitems, t.labitems.size());
  Json census = Json::object();
  const NoteCensus c = note_census(t.notes);
  for (NoteCategory cat : kAllNoteCategories) census[std::string(to_string(cat))] = c[cat];
  return Json{{"tables", std::move(tables)},
              {"rejects", t.rejects.size()},
              {"note_census", std::move(census)},
              {"warnings", t.warnings}}
             .dump(2) + "\n";
}

namespace {

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string fixed(const std::optional<double>& v) { return v ? fixed(*v) : "n/a"; }

std::string render_report(const PipelineConfig& config, const PipelineResult& r) {
  std::string out = "# note-forge pipeline report\n\n";
  out += "seed: " + std::to_string(config.seed) + "\n\n";
  out += "| Stage | Count |\n|---|---|\n";
  out += "| Admissions indexed | " + std::to_string(r.admissions) + " |\n";
  out += "| Cohort members | " + std::to_string(r.cohort_members) + " |\n";
  out += "| Sequential records | " + std::to_string(r.records) + " |\n";
  out += "| Train / validation / test | " + std::to_string(r.split.train) + " / " +
         std::to_string(r.split.validation) + " / " + std::to_string(r.split.test) + " |\n";
  out += "| Preference pairs | " + std::to_string(r.preference_pairs) + " |\n";
  out += "| Evaluated summaries | " + std::to_string(r.evaluated) + " |\n\n";
  out += "## Test set metrics (means)\n\n";
  out += "| MMLU | ROUGE-1 | ROUGE-2 | ROUGE-L | BLEU | Embedding F1 | Perplexity | METEOR |\n";
  out += "|---|---|---|---|---|---|---|---|\n";
  const MetricMeans& m = r.means;
  out += "| " + fixed(m.mmlu) + " | " + fixed(m.rouge1) + " | " + fixed(m.rouge2) + " | " + fixed(m.rougeL) + " | " +
         fixed(m.bleu) + " | " + fixed(m.embed) + " | " + fixed(m.perplexity) + " | " + fixed(m.meteor) + " |\n";
  return out;
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config) {
  config.validate();
  PipelineResult result;
  const std::filesystem::path& out = config.output_dir;
  auto write = [&](const std::filesystem::path& rel, std::string_view content) {
    write_text_file(out / rel, content);
    result.files.push_back(out / rel);
  };

  log::info("ingest " + config.data_dir.string());
  const EmrTables tables = load_emr_directory(config.data_dir);
  {
    std::string rejects;
    for (const RejectEntry& r : tables.rejects) rejects += reject_to_json_line(r) + "\n";
    write("ingest/rejects.jsonl", rejects);
    write("ingest/summary.json", ingest_summary_json(tables));
  }

  const CohortArtifacts cohort = select_cohort_stage(tables, config.cohort, config.vocabulary);
  result.admissions = cohort.index.size();
  result.cohort_members = cohort.membership.members.size();
  write("cohort/cohort.json", to_json(cohort.membership).dump(2) + "\n");
  write("cohort/vocab_drugs.json", to_json(cohort.drugs).dump(2) + "\n");
  write("cohort/vocab_chart.json", to_json(cohort.chart_items).dump(2) + "\n");

  const std::vector<SequentialRecord> records = build_sequential_dataset(tables, cohort);
  result.records = records.size();
  {
    std::vector<Json> lines;
    for (const SequentialRecord& r : records) lines.push_back(to_json(r));
    write("dataset/sequential.jsonl", to_jsonl(lines));
  }

  std::vector<HadmId> ids;
  for (const SequentialRecord& r : records) ids.push_back(r.hadm_id);
  const DatasetSplit split = note_forge::split(ids, config.seed, config.test_fraction, config.val_fraction);
  result.split = {split.train.size(), split.validation.size(), split.test.size()};
  write("split/split.json", to_json(split).dump(2) + "\n");
  {
    const SftDataset sft = build_sft_dataset(records, split, config.sft_variant);
    auto lines = [](const std::vector<SftExample>& xs) {
      std::vector<Json> j;
      for (const SftExample& x : xs) j.push_back(to_json(x));
      return to_jsonl(j);
    };
    write("split/sft_train.jsonl", lines(sft.train));
    write("split/sft_validation.jsonl", lines(sft.validation));
    write("split/sft_test.jsonl", lines(sft.test));
  }

  std::vector<SequentialRecord> train_records;
  {
    std::set<HadmId> train(split.train.begin(), split.train.end());
    for (const SequentialRecord& r : records) {
      if (train.contains(r.hadm_id)) train_records.push_back(r);
    }
  }
  {
    auto weak = make_gateway(config.weak_gateway, config.mock);
    const auto rejected = generate_summaries(train_records, split.train, *weak, config.weak_generation,
                                             config.weak_gateway.max_parallel);
    std::vector<Json> lines;
    for (const auto& [id, text] : rejected) lines.push_back(summary_line(id, text));
    write("pairs/rejected.jsonl", to_jsonl(lines));
    const PreferencePairs pairs = build_preference_pairs(train_records, rejected);
    for (const std::string& w : pairs.warnings) log::warn(w);
    std::vector<Json> pair_lines;
    for (const PreferencePair& p : pairs.pairs) pair_lines.push_back(to_json(p));
    write("pairs/dpo_train.jsonl", to_jsonl(pair_lines));
    result.preference_pairs = pairs.pairs.size();
  }

  auto gateway = make_gateway(config.gateway, config.mock);
  const auto generated =
      generate_summaries(records, split.test, *gateway, config.generation, config.gateway.max_parallel);
  {
    std::vector<Json> lines;
    for (const auto& [id, text] : generated) lines.push_back(summary_line(id, text));
    write("generate/summaries.jsonl", to_jsonl(lines));
  }

  std::map<HadmId, const SequentialRecord*> by_id;
  for (const SequentialRecord& r : records) by_id.emplace(r.hadm_id, &r);
  std::vector<PairText> pairs;
  for (const auto& [id, text] : generated) pairs.push_back({std::to_string(id), by_id.at(id)->reference_summary, text});
  const std::vector<MetricReport> reports = evaluate_batch(pairs, gateway.get(), config.evaluation);
  result.evaluated = reports.size();
  result.means = summarize(reports);
  {
    std::vector<Json> lines;
    for (const MetricReport& r : reports) lines.push_back(to_json(r));
    write("eval/reports.jsonl", to_jsonl(lines));
    write("eval/summary.csv", metric_means_csv_header() + "\n" + metric_means_csv_row("test", result.means) + "\n");
  }

  if (config.judge_sample > 0) {
    auto judge_gateway = make_gateway(config.judge, config.mock);
    std::vector<Json> trial_lines;
    std::vector<JudgeScorecard> generated_cards, reference_cards;
    int judged = 0;
    for (const auto& [id, text] : generated) {
      if (judged++ >= config.judge_sample) break;
      const SequentialRecord& r = *by_id.at(id);
      const std::vector<NamedSummary> summaries{{"generated", text}, {"reference", r.reference_summary}};
      const JudgeRun run = judge(render_input(r, InputVariant::table_and_text), summaries, *judge_gateway);
      for (const JudgeTrial& t : run.trials) {
        Json line = to_json(t);
        line["hadm_id"] = id;
        trial_lines.push_back(std::move(line));
        if (!t.scorecard) continue;
        (t.summary_name == "generated" ? generated_cards : reference_cards).push_back(*t.scorecard);
      }
    }
    write("judge/trials.jsonl", to_jsonl(trial_lines));
    std::vector<std::pair<std::string, JudgeAggregate>> rows;
    if (!generated_cards.empty()) rows.emplace_back("generated", aggregate(generated_cards));
    if (!reference_cards.empty()) rows.emplace_back("reference", aggregate(reference_cards));
    write("judge/report.md", render_markdown_report(rows));
  }

  write("report.md", render_report(config, result));
  return result;
}

}  // namespace note_forge
