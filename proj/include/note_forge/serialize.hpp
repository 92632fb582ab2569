#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "note_forge/cohort.hpp"
#include "note_forge/dataset.hpp"
#include "note_forge/evaluate.hpp"
#include "note_forge/judge.hpp"
#include "note_forge/timeline.hpp"

namespace note_forge {

using Json = nlohmann::ordered_json;

// Sequential dataset line. Rendered inputs and the instruction are included for
// consumers; reading back uses only the structured fields.
Json to_json(const SequentialRecord& record);
SequentialRecord sequential_record_from_json(const Json& j);

Json to_json(const NoteDocument& note);
Json to_json(const SftExample& example);
Json to_json(const PreferencePair& pair);
PreferencePair preference_pair_from_json(const Json& j);
Json to_json(const DatasetSplit& split);
DatasetSplit dataset_split_from_json(const Json& j);
Json to_json(const CohortMembership& cohort);
Json to_json(const ItemVocabulary& vocabulary);
Json to_json(const PrecisionRecall& prf);
Json to_json(const MetricReport& report);
Json to_json(const JudgeScorecard& card);
Json to_json(const JudgeTrial& trial);
Json to_json(const JudgeAggregate& aggregate);

// {hadm_id, summary} lines, as written by `generate` and read as rejected summaries.
Json summary_line(HadmId hadm_id, std::string_view summary);
std::map<HadmId, std::string> summaries_from_jsonl(const std::vector<Json>& lines);

std::string read_text_file(const std::filesystem::path& path);
// Creates parent directories. Throws IoError on failure.
void write_text_file(const std::filesystem::path& path, std::string_view content);

std::vector<Json> read_jsonl(const std::filesystem::path& path);
std::string to_jsonl(const std::vector<Json>& lines);

}  // namespace note_forge
