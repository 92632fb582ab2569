#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "note_forge/cohort.hpp"
#include "note_forge/dataset.hpp"
#include "note_forge/emr.hpp"
#include "note_forge/evaluate.hpp"
#include "note_forge/gateway.hpp"
#include "note_forge/timeline.hpp"

namespace note_forge {

struct VocabularyThresholds {
  double drugs = 0.10;
  double chart_items = 0.50;
};

// An endpoint whose base_url is "mock" is served in-process by MockGateway.
inline constexpr std::string_view kInProcessMockUrl = "mock";

struct PipelineConfig {
  std::filesystem::path data_dir = "fixtures";
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 1;
  double test_fraction = 0.2;
  double val_fraction = 0.2;
  CohortCriteria cohort;
  VocabularyThresholds vocabulary;
  InputVariant sft_variant = InputVariant::table_and_text;
  // Summarizer under evaluation.
  EndpointConfig gateway;
  // Weak model whose summaries become the rejected side of preference pairs.
  EndpointConfig weak_gateway;
  EndpointConfig judge;
  GenerationParams generation;
  GenerationParams weak_generation{128, 0.0, std::nullopt};
  EvaluationOptions evaluation;
  // Test summaries sent to the judge; 0 skips judging.
  int judge_sample = 0;
  MockRules mock;

  void validate() const;
};

// Relative paths are resolved against base_dir.
PipelineConfig pipeline_config_from_toml(std::string_view text, const std::filesystem::path& base_dir = {});
std::string to_toml(const PipelineConfig& config);

std::unique_ptr<ModelGateway> make_gateway(const EndpointConfig& config, const MockRules& mock = {});

struct CohortArtifacts {
  AdmissionIndex index;
  CohortMembership membership;
  ItemVocabulary drugs;
  ItemVocabulary chart_items;
};

CohortArtifacts select_cohort_stage(const EmrTables& tables, const CohortCriteria& criteria,
                                    const VocabularyThresholds& thresholds);

// One TimelineInputs per cohort member, ascending hadm_id.
std::vector<TimelineInputs> group_by_admission(const EmrTables& tables, const CohortArtifacts& cohort);

std::vector<SequentialRecord> build_sequential_dataset(const EmrTables& tables, const CohortArtifacts& cohort);

// Prompts each selected record's instruction through the gateway, `max_parallel` at a time.
std::map<HadmId, std::string> generate_summaries(std::span<const SequentialRecord> records,
                                                 std::span<const HadmId> ids, ModelGateway& gateway,
                                                 const GenerationParams& params, int max_parallel);

std::string ingest_summary_json(const EmrTables& tables);

struct PipelineResult {
  std::size_t admissions = 0;
  std::size_t cohort_members = 0;
  std::size_t records = 0;
  SplitSizes split;
  std::size_t preference_pairs = 0;
  std::size_t evaluated = 0;
  MetricMeans means;
  std::vector<std::filesystem::path> files;  // every artifact written, in write order
};

// ingest -> cohort -> build -> split -> pairs -> generate -> eval (-> judge) -> report.
PipelineResult run_pipeline(const PipelineConfig& config);

}  // namespace note_forge
