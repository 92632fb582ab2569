#include "note_forge/serialize.hpp"

#include <fstream>
#include <sstream>

#include "note_forge/error.hpp"

namespace note_forge {

namespace {

template <typename T>
T get(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ValidationError(std::string("JSON object lacks '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ValidationError(std::string("JSON field '") + key + "' has the wrong type");
  }
}

Timestamp get_timestamp(const Json& j, const char* key) {
  const auto text = get<std::string>(j, key);
  auto t = parse_timestamp(text);
  if (!t) throw ValidationError(std::string("JSON field '") + key + "' is not a timestamp: " + text);
  return *t;
}

Json codes_json(const std::vector<CodeLine>& codes) {
  Json out = Json::array();
  for (const CodeLine& c : codes) out.push_back({{"code", c.code}, {"description", c.description}});
  return out;
}

std::vector<CodeLine> codes_from(const Json& j, const char* key) {
  std::vector<CodeLine> out;
  if (!j.contains(key)) return out;
  for (const Json& c : j.at(key)) out.push_back({get<std::string>(c, "code"), get<std::string>(c, "description")});
  return out;
}

}  // namespace

Json to_json(const SequentialRecord& r) {
  const PatientHeader& h = r.header;
  Json header{{"gender", h.gender == Gender::male ? "M" : "F"},
              {"age", h.age},
              {"age_clamped", h.age_clamped},
              {"admittime", format_timestamp(h.admittime)},
              {"dischtime", format_timestamp(h.dischtime)},
              {"admission_type", h.admission_type},
              {"admit_diagnosis", h.admit_diagnosis},
              {"attention", codes_json(h.attention)},
              {"diagnoses", codes_json(h.diagnoses)},
              {"procedures", codes_json(h.procedures)},
              {"lines", header_lines(r)}};
  Json events = Json::array();
  for (const TimelineEvent& e : r.events) {
    events.push_back({{"ts", format_timestamp(e.timestamp)},
                      {"kind", to_string(e.kind)},
                      {"text", e.text},
                      {"source_row", e.source_row}});
  }
  return Json{{"subject_id", r.subject_id},
              {"hadm_id", r.hadm_id},
              {"header", std::move(header)},
              {"events", std::move(events)},
              {"dropped_events", r.dropped_events},
              {"input_table", render_input(r, InputVariant::table_only)},
              {"input_text", render_input(r, InputVariant::text_only)},
              {"input_both", render_input(r, InputVariant::table_and_text)},
              {"instruction", render_instruction(r)},
              {"reference", r.reference_summary}};
}

SequentialRecord sequential_record_from_json(const Json& j) {
  SequentialRecord r;
  r.subject_id = get<SubjectId>(j, "subject_id");
  r.hadm_id = get<HadmId>(j, "hadm_id");
  const Json& h = j.at("header");
  const auto gender = get<std::string>(h, "gender");
  if (gender != "M" && gender != "F") throw ValidationError("header gender must be M or F");
  r.header.gender = gender == "M" ? Gender::male : Gender::female;
  r.header.age = get<int>(h, "age");
  r.header.age_clamped = get<bool>(h, "age_clamped");
  r.header.admittime = get_timestamp(h, "admittime");
  r.header.dischtime = get_timestamp(h, "dischtime");
  r.header.admission_type = get<std::string>(h, "admission_type");
  r.header.admit_diagnosis = get<std::string>(h, "admit_diagnosis");
  r.header.attention = codes_from(h, "attention");
  r.header.diagnoses = codes_from(h, "diagnoses");
  r.header.procedures = codes_from(h, "procedures");
  for (const Json& e : j.at("events")) {
    TimelineEvent ev;
    ev.timestamp = get_timestamp(e, "ts");
    const auto kind = parse_event_kind(get<std::string>(e, "kind"));
    if (!kind) throw ValidationError("unknown event kind " + get<std::string>(e, "kind"));
    ev.kind = *kind;
    ev.text = get<std::string>(e, "text");
    ev.source_row = get<std::size_t>(e, "source_row");
    r.events.push_back(std::move(ev));
  }
  if (j.contains("dropped_events")) r.dropped_events = get<std::size_t>(j, "dropped_events");
  r.reference_summary = get<std::string>(j, "reference");
  return r;
}

Json to_json(const NoteDocument& n) {
  return Json{{"note_id", n.note_id},
              {"hadm_id", n.hadm_id ? Json(*n.hadm_id) : Json(nullptr)},
              {"category", to_string(n.category)},
              {"event_time", format_timestamp(n.event_time)},
              {"cleaned_text", n.cleaned_text},
              {"extracted_section", n.extracted_section},
              {"section_marker_found", n.section_marker_found},
              {"source_row", n.source_row}};
}

Json to_json(const SftExample& e) { return Json{{"input", e.input}, {"reference", e.reference}}; }

Json to_json(const PreferencePair& p) {
  return Json{{"prompt", p.prompt}, {"chosen", p.chosen}, {"rejected", p.rejected}};
}

PreferencePair preference_pair_from_json(const Json& j) {
  return {get<std::string>(j, "prompt"), get<std::string>(j, "chosen"), get<std::string>(j, "rejected")};
}

Json to_json(const DatasetSplit& s) {
  return Json{{"seed", s.seed}, {"train", s.train}, {"validation", s.validation}, {"test", s.test}};
}

DatasetSplit dataset_split_from_json(const Json& j) {
  DatasetSplit s;
  s.seed = get<std::uint64_t>(j, "seed");
  s.train = get<std::vector<HadmId>>(j, "train");
  s.validation = get<std::vector<HadmId>>(j, "validation");
  s.test = get<std::vector<HadmId>>(j, "test");
  return s;
}

Json to_json(const CohortMembership& c) {
  Json excluded = Json::object();
  for (const auto& [id, reason] : c.excluded) excluded[std::to_string(id)] = to_string(reason);
  Json histogram = Json::object();
  for (const auto& [reason, count] : c.exclusion_histogram()) histogram[std::string(to_string(reason))] = count;
  Json reference = Json::object();
  for (const auto& [id, row] : c.reference_note) reference[std::to_string(id)] = row;
  return Json{{"members", c.members},
              {"excluded", std::move(excluded)},
              {"exclusion_counts", std::move(histogram)},
              {"reference_note", std::move(reference)}};
}

Json to_json(const ItemVocabulary& v) {
  Json coverage = Json::object();
  for (const auto& [key, value] : v.coverage) coverage[key] = value;
  return Json{{"kind", v.kind == ItemKind::drug ? "drug" : "chart_item"},
              {"threshold", v.threshold},
              {"cohort_patients", v.cohort_patients},
              {"retained", v.retained},
              {"coverage", std::move(coverage)}};
}

Json to_json(const PrecisionRecall& prf) { return Json{{"p", prf.precision}, {"r", prf.recall}, {"f", prf.f1}}; }

Json to_json(const MetricReport& m) {
  auto optional = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
  return Json{{"pair_id", m.pair_id},
              {"rouge1", to_json(m.rouge1)},
              {"rouge2", to_json(m.rouge2)},
              {"rougeL", to_json(m.rougeL)},
              {"bleu", m.bleu},
              {"meteor", m.meteor},
              {"mmlu", optional(m.mmlu)},
              {"perplexity", optional(m.perplexity)},
              {"embed", m.embed ? to_json(*m.embed) : Json(nullptr)}};
}

Json to_json(const JudgeScorecard& card) {
  Json scores = Json::object();
  Json notes = Json::object();
  for (Criterion c : kAllCriteria) {
    scores[std::string(to_string(c))] = card.score(c);
    notes[std::string(to_string(c))] = card.justifications[static_cast<std::size_t>(c)];
  }
  return Json{{"scores", std::move(scores)},
              {"total", card.total},
              {"stated_total", card.stated_total ? Json(*card.stated_total) : Json(nullptr)},
              {"total_mismatch", card.total_mismatch},
              {"justifications", std::move(notes)}};
}

Json to_json(const JudgeTrial& t) {
  return Json{{"summary", t.summary_name},
              {"trial", t.trial},
              {"scorecard", t.scorecard ? to_json(*t.scorecard) : Json(nullptr)},
              {"error", t.error ? Json(*t.error) : Json(nullptr)},
              {"transcript", t.transcript}};
}

Json to_json(const JudgeAggregate& a) {
  Json criteria = Json::object();
  for (Criterion c : kAllCriteria) {
    const ScoreStats& s = a.criteria[static_cast<std::size_t>(c)];
    criteria[std::string(to_string(c))] = {{"mean", s.mean}, {"std", s.std}};
  }
  return Json{{"n", a.n}, {"criteria", std::move(criteria)}, {"total", {{"mean", a.total.mean}, {"std", a.total.std}}}};
}

Json summary_line(HadmId hadm_id, std::string_view summary) {
  return Json{{"hadm_id", hadm_id}, {"summary", summary}};
}

std::map<HadmId, std::string> summaries_from_jsonl(const std::vector<Json>& lines) {
  std::map<HadmId, std::string> out;
  for (const Json& j : lines) {
    const auto id = get<HadmId>(j, "hadm_id");
    if (!out.emplace(id, get<std::string>(j, "summary")).second) {
      throw ValidationError("duplicate summary for hadm_id " + std::to_string(id));
    }
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<Json> read_jsonl(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  std::vector<Json> out;
  std::size_t line_no = 0, start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    const std::string_view line = std::string_view(text).substr(start, end - start);
    start = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const Json::parse_error& e) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": invalid JSON (" + e.what() + ")");
    }
  }
  return out;
}

std::string to_jsonl(const std::vector<Json>& lines) {
  std::string out;
  for (const Json& j : lines) {
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace note_forge
