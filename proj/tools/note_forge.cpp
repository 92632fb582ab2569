#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "note_forge/cohort.hpp"
#include "note_forge/dataset.hpp"
#include "note_forge/demo_service.hpp"
#include "note_forge/emr.hpp"
#include "note_forge/evaluate.hpp"
#include "note_forge/gateway.hpp"
#include "note_forge/judge.hpp"
#include "note_forge/log.hpp"
#include "note_forge/notes.hpp"
#include "note_forge/pipeline.hpp"
#include "note_forge/serialize.hpp"
#include "note_forge/strings.hpp"

namespace nf = note_forge;
namespace fs = std::filesystem;

namespace {

struct CohortFlags {
  nf::CohortCriteria criteria;
  nf::VocabularyThresholds thresholds;

  void add(CLI::App* cmd) {
    cmd->add_option("--min-age", criteria.min_age_years, "Minimum age in years (inclusive)")->capture_default_str();
    cmd->add_option("--max-los-days", criteria.max_los_days, "Length of stay limit in days (exclusive)")
        ->capture_default_str();
    cmd->add_option("--max-ds-words", criteria.max_ds_words, "Discharge summary word limit (inclusive)")
        ->capture_default_str();
    cmd->add_option("--drug-threshold", thresholds.drugs, "Drug patient-coverage threshold")->capture_default_str();
    cmd->add_option("--chart-threshold", thresholds.chart_items, "Chart/lab item patient-coverage threshold")
        ->capture_default_str();
  }
};

struct GatewayFlags {
  std::string url;
  std::string model = "mistral-7b-instruct";
  double timeout = 60;
  int max_parallel = 4;
  bool log_payloads = false;
  std::uint64_t mock_seed = 0;

  void add(CLI::App* cmd) {
    cmd->add_option("--gateway", url, "Gateway base URL, or 'mock' for the in-process mock (default $NOTE_GATEWAY_URL)");
    cmd->add_option("--model", model, "Model name sent to the gateway")->capture_default_str();
    cmd->add_option("--timeout", timeout, "Request timeout in seconds")->capture_default_str();
    cmd->add_option("--max-parallel", max_parallel, "Maximum in-flight gateway requests")->capture_default_str();
    cmd->add_flag("--log-payloads", log_payloads, "Log full request and response bodies (contains patient text)");
    cmd->add_option("--mock-seed", mock_seed, "Rule seed when --gateway mock")->capture_default_str();
  }

  nf::EndpointConfig endpoint() const {
    nf::EndpointConfig c = nf::EndpointConfig::from_env();
    if (!url.empty()) c.base_url = url;
    c.model_name = model;
    c.timeout_seconds = timeout;
    c.max_parallel = max_parallel;
    c.log_payloads = log_payloads;
    return c;
  }

  std::unique_ptr<nf::ModelGateway> make() const {
    nf::MockRules rules;
    rules.seed = mock_seed;
    return nf::make_gateway(endpoint(), rules);
  }
};

std::vector<nf::SequentialRecord> read_records(const fs::path& path) {
  std::vector<nf::SequentialRecord> out;
  for (const nf::Json& j : nf::read_jsonl(path)) out.push_back(nf::sequential_record_from_json(j));
  return out;
}

std::vector<nf::HadmId> read_id_manifest(const fs::path& path) {
  std::vector<nf::HadmId> ids;
  std::istringstream in(nf::read_text_file(path));
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const std::string t(nf::trim(line));
    if (t.empty() || t.front() == '#') continue;
    try {
      std::size_t used = 0;
      ids.push_back(std::stoll(t, &used));
      if (used != t.size()) throw std::invalid_argument(t);
    } catch (const std::exception&) {
      throw nf::ValidationError(path.string() + ":" + std::to_string(n) + ": not an integer id");
    }
  }
  return ids;
}

void write_or_print(const std::string& out, const std::string& content) {
  if (out.empty() || out == "-") {
    std::cout << content;
  } else {
    nf::write_text_file(out, content);
  }
}

std::vector<nf::HadmId> ids_from_split(const fs::path& split_path, const std::string& part) {
  const nf::DatasetSplit split = nf::dataset_split_from_json(nf::Json::parse(nf::read_text_file(split_path)));
  if (part == "train") return split.train;
  if (part == "validation") return split.validation;
  if (part == "test") return split.test;
  throw nf::ValidationError("--part must be train, validation or test");
}


}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"note-forge: discharge-summary dataset builder, evaluator and demo service"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log progress to stderr");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Validate the twelve MIMIC-III CSV tables and report rejects");
  std::string data_dir, out_dir;
  ingest->add_option("--data", data_dir, "Directory holding <TABLE>.csv files")->required();
  ingest->add_option("--out", out_dir, "Output directory")->required();

  // cohort
  auto* cohort = app.add_subcommand("cohort", "Select the study cohort and build item vocabularies");
  cohort->add_option("--data", data_dir, "Directory holding <TABLE>.csv files")->required();
  cohort->add_option("--out", out_dir, "Output directory")->required();
  CohortFlags cohort_flags;
  cohort_flags.add(cohort);

  // build
  auto* build = app.add_subcommand("build", "Build the sequential dataset (sequential.jsonl)");
  build->add_option("--data", data_dir, "Directory holding <TABLE>.csv files")->required();
  build->add_option("--out", out_dir, "Output directory")->required();
  CohortFlags build_flags;
  build_flags.add(build);

  // split
  auto* split_cmd = app.add_subcommand("split", "Seeded train/validation/test split and SFT export");
  std::string split_in, ids_file;
  std::size_t split_n = 0;
  std::uint64_t seed = 1;
  double test_fraction = 0.2, val_fraction = 0.2;
  std::string variant_name = "table_and_text";
  auto* split_in_opt = split_cmd->add_option("--in", split_in, "sequential.jsonl to split");
  auto* ids_opt = split_cmd->add_option("--ids", ids_file, "Manifest of hadm ids, one per line");
  auto* n_opt = split_cmd->add_option("--n", split_n, "Split the ids 1..N (manifest arithmetic only)");
  split_in_opt->excludes(ids_opt)->excludes(n_opt);
  ids_opt->excludes(n_opt);
  split_cmd->add_option("--seed", seed, "Shuffle seed")->capture_default_str();
  split_cmd->add_option("--test-fraction", test_fraction, "Test fraction")->capture_default_str();
  split_cmd->add_option("--val-fraction", val_fraction, "Validation fraction of the remainder")->capture_default_str();
  split_cmd->add_option("--variant", variant_name, "SFT input variant: table, text or both")->capture_default_str();
  split_cmd->add_option("--out", out_dir, "Output directory");

  // pairs
  auto* pairs_cmd = app.add_subcommand("pairs", "Build DPO preference pairs (chosen = reference DS)");
  std::string pairs_in, rejected_path, pairs_out, split_path, part = "train";
  pairs_cmd->add_option("--in", pairs_in, "sequential.jsonl")->required();
  pairs_cmd->add_option("--rejected", rejected_path, "JSONL of {hadm_id, summary} weak-model outputs")->required();
  pairs_cmd->add_option("--split", split_path, "split.json; restricts pairs to --part");
  pairs_cmd->add_option("--part", part, "Split part used with --split")->capture_default_str();
  pairs_cmd->add_option("--out", pairs_out, "Output JSONL")->required();

  // generate
  auto* generate = app.add_subcommand("generate", "Generate summaries through the model gateway");
  std::string gen_in, gen_out, gen_split;
  std::string gen_part = "test";
  nf::GenerationParams gen_params;
  std::optional<std::uint64_t> gen_seed;
  GatewayFlags gen_gateway;
  generate->add_option("--in", gen_in, "sequential.jsonl")->required();
  generate->add_option("--split", gen_split, "split.json; restricts generation to --part");
  generate->add_option("--part", gen_part, "Split part used with --split")->capture_default_str();
  generate->add_option("--out", gen_out, "Output JSONL of {hadm_id, summary}")->required();
  generate->add_option("--max-new-tokens", gen_params.max_new_tokens, "Generation length limit")->capture_default_str();
  generate->add_option("--temperature", gen_params.temperature, "Sampling temperature")->capture_default_str();
  generate->add_option("--seed", gen_seed, "Sampling seed");
  gen_gateway.add(generate);

  // eval
  auto* eval = app.add_subcommand("eval", "Score summaries against references");
  std::string ref_file, hyp_file, eval_in, eval_summaries, eval_out, eval_csv;
  bool lexical_only = false;
  GatewayFlags eval_gateway;
  auto* ref_opt = eval->add_option("--ref", ref_file, "Reference text file");
  auto* hyp_opt = eval->add_option("--hyp", hyp_file, "Hypothesis text file");
  ref_opt->needs(hyp_opt);
  hyp_opt->needs(ref_opt);
  auto* eval_in_opt = eval->add_option("--in", eval_in, "sequential.jsonl providing references");
  auto* eval_sum_opt = eval->add_option("--summaries", eval_summaries, "JSONL of {hadm_id, summary}");
  eval_in_opt->needs(eval_sum_opt);
  eval_sum_opt->needs(eval_in_opt);
  ref_opt->excludes(eval_in_opt);
  eval->add_option("--out", eval_out, "Report output (JSON lines); stdout when omitted");
  eval->add_option("--csv", eval_csv, "Per-metric means CSV");
  eval->add_flag("--lexical-only", lexical_only, "Skip MMLU, perplexity and embedding metrics");
  eval_gateway.add(eval);

  // judge
  auto* judge_cmd = app.add_subcommand("judge", "Score summaries with the seven-criterion rubric");
  std::string judge_input, judge_out, judge_report;
  std::vector<std::string> judge_summaries;
  nf::JudgeOptions judge_options;
  GatewayFlags judge_gateway;
  judge_cmd->add_option("--input", judge_input, "Sequential record text given to the judge")->required();
  judge_cmd->add_option("--summary", judge_summaries, "name=path of a candidate summary (repeatable)")->required();
  judge_cmd->add_option("--trials", judge_options.trials, "Trials per summary")->capture_default_str();
  judge_cmd->add_option("--out", judge_out, "Trial JSON lines; stdout when omitted");
  judge_cmd->add_option("--report", judge_report, "Markdown aggregate report");
  judge_gateway.add(judge_cmd);

  // serve
  auto* serve = app.add_subcommand("serve", "Run the demo HTTP service");
  std::string demo_dir = "fixtures/demo", host = "127.0.0.1";
  int port = 8080;
  GatewayFlags serve_gateway;
  serve->add_option("--demo", demo_dir, "Demo fixture directory")->capture_default_str();
  serve->add_option("--host", host, "Bind address")->capture_default_str();
  serve->add_option("--port", port, "Port (0 picks one)")->capture_default_str();
  serve_gateway.add(serve);

  // mock-serve
  auto* mock_serve = app.add_subcommand("mock-serve", "Run the deterministic mock model server");
  nf::MockRules rules;
  std::string logprob_mode = "uniform";
  int mock_port = 8088;
  std::string mock_host = "127.0.0.1";
  std::vector<std::string> disabled;
  mock_serve->add_option("--host", mock_host, "Bind address")->capture_default_str();
  mock_serve->add_option("--port", mock_port, "Port (0 picks one)")->capture_default_str();
  mock_serve->add_option("--rule-seed", rules.seed, "Seed mixed into every hashed rule")->capture_default_str();
  mock_serve->add_option("--vocab-size", rules.vocab_size, "Logit vocabulary size")->capture_default_str();
  mock_serve->add_option("--embedding-dim", rules.embedding_dim, "Embedding dimension")->capture_default_str();
  mock_serve->add_option("--logprob-mode", logprob_mode, "uniform or hashed")->capture_default_str();
  mock_serve->add_option("--latency-ms", rules.latency_ms, "Artificial delay per request")->capture_default_str();
  mock_serve->add_option("--disable", disabled, "Capability to switch off (repeatable)");

  // notes
  auto* notes = app.add_subcommand("notes", "Note utilities");
  auto* clean = notes->add_subcommand("clean", "Clean one note file");
  notes->require_subcommand(1);
  std::string clean_in, clean_out, clean_category;
  clean->add_option("--in", clean_in, "NOTEEVENTS CSV (JSON lines of NoteDocument out) or a raw note text file")
      ->required();
  clean->add_option("--out", clean_out, "Output file; stdout when omitted");
  clean->add_option("--category", clean_category, "For a text file, extract this category's section (e.g. Radiology)");

  // config
  auto* config_cmd = app.add_subcommand("config", "Export the QLoRA SFT/DPO training config as TOML");
  std::string config_out;
  std::vector<std::string> overrides;
  config_cmd->add_option("--out", config_out, "Output file; stdout when omitted");
  config_cmd->add_option("--set", overrides, "key=value override (repeatable), e.g. dpo.beta=0.05");

  // run
  auto* run_cmd = app.add_subcommand("run", "Run the whole pipeline from a TOML config");
  std::string run_config;
  std::string run_out;
  run_cmd->add_option("--config", run_config, "Pipeline TOML file")->required();
  run_cmd->add_option("--out", run_out, "Override output_dir");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  if (verbose && nf::log::level() < nf::log::Level::info) nf::log::set_level(nf::log::Level::info);

  try {
    if (*ingest) {
      const nf::EmrTables tables = nf::load_emr_directory(data_dir);
      std::string rejects;
      for (const nf::RejectEntry& r : tables.rejects) rejects += nf::reject_to_json_line(r) + "\n";
      nf::write_text_file(fs::path(out_dir) / "rejects.jsonl", rejects);
      nf::write_text_file(fs::path(out_dir) / "ingest_summary.json", nf::ingest_summary_json(tables));
      for (const std::string& w : tables.warnings) nf::log::warn(w);
      std::cout << "ingested " << tables.admissions.size() << " admissions, " << tables.notes.size() << " notes, "
                << tables.rejects.size() << " rejected rows\n";
    } else if (*cohort || *build) {
      const CohortFlags& flags = *cohort ? cohort_flags : build_flags;
      const nf::EmrTables tables = nf::load_emr_directory(data_dir);
      const nf::CohortArtifacts artifacts = nf::select_cohort_stage(tables, flags.criteria, flags.thresholds);
      const fs::path out(out_dir);
      nf::write_text_file(out / "cohort.json", nf::to_json(artifacts.membership).dump(2) + "\n");
      nf::write_text_file(out / "vocab_drugs.json", nf::to_json(artifacts.drugs).dump(2) + "\n");
      nf::write_text_file(out / "vocab_chart.json", nf::to_json(artifacts.chart_items).dump(2) + "\n");
      std::cout << "cohort " << artifacts.membership.members.size() << " of " << artifacts.index.size()
                << " admissions; " << artifacts.drugs.retained.size() << " drugs, "
                << artifacts.chart_items.retained.size() << " chart items retained\n";
      if (*build) {
        const auto records = nf::build_sequential_dataset(tables, artifacts);
        std::vector<nf::Json> lines;
        for (const auto& r : records) lines.push_back(nf::to_json(r));
        nf::write_text_file(out / "sequential.jsonl", nf::to_jsonl(lines));
        std::cout << "wrote " << records.size() << " sequential records to " << (out / "sequential.jsonl").string()
                  << "\n";
      }
    } else if (*split_cmd) {
      std::vector<nf::HadmId> ids;
      std::vector<nf::SequentialRecord> records;
      if (!split_in.empty()) {
        records = read_records(split_in);
        for (const auto& r : records) ids.push_back(r.hadm_id);
      } else if (!ids_file.empty()) {
        ids = read_id_manifest(ids_file);
      } else if (split_n > 0) {
        for (std::size_t i = 1; i <= split_n; ++i) ids.push_back(static_cast<nf::HadmId>(i));
      } else {
        throw nf::ValidationError("split needs one of --in, --ids or --n");
      }
      const nf::DatasetSplit s = nf::split(ids, seed, test_fraction, val_fraction);
      std::cout << "train " << s.train.size() << " validation " << s.validation.size() << " test " << s.test.size()
                << "\n";
      if (!out_dir.empty()) {
        const fs::path out(out_dir);
        nf::write_text_file(out / "split.json", nf::to_json(s).dump(2) + "\n");
        if (!records.empty()) {
          const auto variant = nf::parse_input_variant(variant_name);
          if (!variant) throw nf::ValidationError("unknown --variant '" + variant_name + "'");
          const nf::SftDataset sft = nf::build_sft_dataset(records, s, *variant);
          auto dump = [](const std::vector<nf::SftExample>& xs) {
            std::vector<nf::Json> j;
            for (const auto& x : xs) j.push_back(nf::to_json(x));
            return nf::to_jsonl(j);
          };
          nf::write_text_file(out / "sft_train.jsonl", dump(sft.train));
          nf::write_text_file(out / "sft_validation.jsonl", dump(sft.validation));
          nf::write_text_file(out / "sft_test.jsonl", dump(sft.test));
        }
      }
    } else if (*pairs_cmd) {
      std::vector<nf::SequentialRecord> records = read_records(pairs_in);
      if (!split_path.empty()) {
        const auto keep_ids = ids_from_split(split_path, part);
        const std::set<nf::HadmId> keep(keep_ids.begin(), keep_ids.end());
        std::erase_if(records, [&](const nf::SequentialRecord& r) { return !keep.contains(r.hadm_id); });
      }
      const auto rejected = nf::summaries_from_jsonl(nf::read_jsonl(rejected_path));
      const nf::PreferencePairs pairs = nf::build_preference_pairs(records, rejected);
      for (const std::string& w : pairs.warnings) nf::log::warn(w);
      std::vector<nf::Json> lines;
      for (const auto& p : pairs.pairs) lines.push_back(nf::to_json(p));
      nf::write_text_file(pairs_out, nf::to_jsonl(lines));
      std::cout << "wrote " << pairs.pairs.size() << " preference pairs (" << pairs.warnings.size() << " dropped)\n";
    } else if (*generate) {
      const auto records = read_records(gen_in);
      std::vector<nf::HadmId> ids;
      if (!gen_split.empty()) {
        ids = ids_from_split(gen_split, gen_part);
      } else {
        for (const auto& r : records) ids.push_back(r.hadm_id);
      }
      gen_params.seed = gen_seed;
      auto gateway = gen_gateway.make();
      const auto summaries = nf::generate_summaries(records, ids, *gateway, gen_params, gen_gateway.max_parallel);
      std::vector<nf::Json> lines;
      for (const auto& [id, text] : summaries) lines.push_back(nf::summary_line(id, text));
      nf::write_text_file(gen_out, nf::to_jsonl(lines));
      std::cout << "generated " << summaries.size() << " summaries\n";
    } else if (*eval) {
      nf::EvaluationOptions options = lexical_only ? nf::EvaluationOptions::lexical_only() : nf::EvaluationOptions{};
      options.max_parallel = eval_gateway.max_parallel;
      std::vector<nf::PairText> pairs;
      if (!ref_file.empty()) {
        pairs.push_back({"pair", nf::read_text_file(ref_file), nf::read_text_file(hyp_file)});
      } else if (!eval_in.empty()) {
        const auto records = read_records(eval_in);
        std::map<nf::HadmId, std::string> refs;
        for (const auto& r : records) refs.emplace(r.hadm_id, r.reference_summary);
        for (const auto& [id, text] : nf::summaries_from_jsonl(nf::read_jsonl(eval_summaries))) {
          auto it = refs.find(id);
          if (it == refs.end()) throw nf::ValidationError("summary for unknown hadm_id " + std::to_string(id));
          pairs.push_back({std::to_string(id), it->second, text});
        }
      } else {
        throw nf::ValidationError("eval needs --ref/--hyp or --in/--summaries");
      }
      std::unique_ptr<nf::ModelGateway> gateway;
      if (options.needs_gateway()) gateway = eval_gateway.make();
      const auto reports = nf::evaluate_batch(pairs, gateway.get(), options);
      std::vector<nf::Json> lines;
      for (const auto& r : reports) lines.push_back(nf::to_json(r));
      write_or_print(eval_out, nf::to_jsonl(lines));
      if (!eval_csv.empty()) {
        nf::write_text_file(eval_csv, nf::metric_means_csv_header() + "\n" +
                                          nf::metric_means_csv_row("all", nf::summarize(reports)) + "\n");
      }
    } else if (*judge_cmd) {
      std::vector<nf::NamedSummary> summaries;
      for (const std::string& spec : judge_summaries) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos || eq == 0) throw nf::ValidationError("--summary expects name=path, got " + spec);
        summaries.push_back({spec.substr(0, eq), nf::read_text_file(spec.substr(eq + 1))});
      }
      judge_options.max_parallel = judge_gateway.max_parallel;
      auto gateway = judge_gateway.make();
      const nf::JudgeRun run = nf::judge(nf::read_text_file(judge_input), summaries, *gateway, judge_options);
      std::vector<nf::Json> lines;
      for (const auto& t : run.trials) lines.push_back(nf::to_json(t));
      write_or_print(judge_out, nf::to_jsonl(lines));
      if (!judge_report.empty()) {
        std::vector<std::pair<std::string, nf::JudgeAggregate>> rows;
        for (const auto& s : summaries) {
          const auto cards = run.scorecards(s.name);
          if (!cards.empty()) rows.emplace_back(s.name, nf::aggregate(cards));
        }
        nf::write_text_file(judge_report, nf::render_markdown_report(rows));
      }
      if (run.failures() > 0) nf::log::warn(std::to_string(run.failures()) + " judge trial(s) failed");
    } else if (*serve) {
      nf::DemoServiceConfig config;
      config.demo_dir = demo_dir;
      config.gateway = serve_gateway.endpoint();
      config.mock.seed = serve_gateway.mock_seed;
      nf::DemoService service(config);
      std::cout << "demo service with " << service.patients().size() << " patients on http://" << host << ":"
                << port << std::endl;
      service.run(port, host);
    } else if (*mock_serve) {
      if (logprob_mode == "uniform") rules.logprob_mode = nf::LogprobMode::uniform;
      else if (logprob_mode == "hashed") rules.logprob_mode = nf::LogprobMode::hashed;
      else throw nf::ValidationError("--logprob-mode must be uniform or hashed");
      for (const std::string& name : disabled) {
        const auto c = nf::parse_capability(name);
        if (!c) throw nf::ValidationError("unknown capability '" + name + "'");
        rules.capabilities.erase(*c);
      }
      nf::MockServer server(rules);
      std::cout << "mock gateway on http://" << mock_host << ":" << mock_port << std::endl;
      server.run(mock_port, mock_host);
    } else if (*clean && fs::path(clean_in).extension() == ".csv") {
      const auto parsed = nf::read_table<nf::TableKind::noteevents>(clean_in);
      std::vector<nf::Json> lines;
      for (const nf::NoteRow& row : parsed.records) lines.push_back(nf::to_json(nf::process_note(row)));
      for (const nf::RejectEntry& r : parsed.rejects) nf::log::warn(nf::reject_to_json_line(r));
      write_or_print(clean_out, nf::to_jsonl(lines));
    } else if (*clean) {
      const std::string cleaned = nf::clean_text(nf::read_text_file(clean_in));
      std::string out = cleaned;
      if (!clean_category.empty()) {
        const auto category = nf::parse_note_category(clean_category);
        if (!category) throw nf::ValidationError("unknown note category '" + clean_category + "'");
        out = nf::extract_section(*category, cleaned).text;
      }
      write_or_print(clean_out, out + "\n");
    } else if (*config_cmd) {
      std::map<std::string, std::string> parsed;
      for (const std::string& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw nf::ValidationError("--set expects key=value, got " + kv);
        parsed[kv.substr(0, eq)] = kv.substr(eq + 1);
      }
      write_or_print(config_out, nf::export_training_config(parsed));
    } else if (*run_cmd) {
      const fs::path path(run_config);
      nf::PipelineConfig config = nf::pipeline_config_from_toml(nf::read_text_file(path), path.parent_path());
      if (!run_out.empty()) config.output_dir = run_out;
      const nf::PipelineResult result = nf::run_pipeline(config);
      std::cout << "cohort " << result.cohort_members << ", records " << result.records << ", split "
                << result.split.train << "/" << result.split.validation << "/" << result.split.test << ", pairs "
                << result.preference_pairs << ", evaluated " << result.evaluated << "\n"
                << "report: " << (config.output_dir / "report.md").string() << "\n";
    }
  } catch (const nf::IoError& e) {
    std::cerr << "note-forge: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "note-forge: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
