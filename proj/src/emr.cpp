#include "note_forge/emr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <future>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "note_forge/csv.hpp"
#include "note_forge/strings.hpp"

namespace note_forge {

namespace {

struct NoteCategoryName {
  NoteCategory category;
  std::string_view name;
};

constexpr std::array<NoteCategoryName, kNoteCategoryCount> kCategoryNames{{
    {NoteCategory::nursing_other, "Nursing/other"},
    {NoteCategory::radiology, "Radiology"},
    {NoteCategory::nursing, "Nursing"},
    {NoteCategory::ecg, "ECG"},
    {NoteCategory::physician, "Physician"},
    {NoteCategory::discharge_summary, "DS"},
    {NoteCategory::echo, "Echo"},
    {NoteCategory::respiratory, "Respiratory"},
    {NoteCategory::nutrition, "Nutrition"},
    {NoteCategory::general, "General"},
    {NoteCategory::rehab_services, "Rehab Services"},
    {NoteCategory::social_work, "Social Work"},
    {NoteCategory::case_management, "Case Management"},
    {NoteCategory::pharmacy, "Pharmacy"},
    {NoteCategory::consult, "Consult"},
}};

using Columns = std::vector<std::string_view>;

const Columns& columns_for(TableKind kind) {
  static const Columns patients{"SUBJECT_ID", "GENDER", "DOB", "DOD"};
  static const Columns admissions{"SUBJECT_ID",    "HADM_ID",        "ADMITTIME",
                                  "DISCHTIME",     "ADMISSION_TYPE", "DIAGNOSIS"};
  static const Columns coded{"SUBJECT_ID", "HADM_ID", "SEQ_NUM", "ICD9_CODE"};
  static const Columns prescriptions{"SUBJECT_ID", "HADM_ID", "STARTDATE",   "ENDDATE",
                                     "DRUG",       "ROUTE",   "DOSE_VAL_RX", "DOSE_UNIT_RX"};
  static const Columns chart{"SUBJECT_ID", "HADM_ID", "ITEMID",  "CHARTTIME",
                             "VALUE",      "VALUENUM", "VALUEUOM"};
  static const Columns notes{"ROW_ID",   "SUBJECT_ID",  "HADM_ID", "CHARTDATE",
                             "CHARTTIME", "CATEGORY",   "DESCRIPTION", "TEXT"};
  static const Columns icd_dict{"ICD9_CODE", "LONG_TITLE"};
  static const Columns item_dict{"ITEMID", "LABEL"};
  switch (kind) {
    case TableKind::patients: return patients;
    case TableKind::admissions: return admissions;
    case TableKind::diagnoses_icd:
    case TableKind::procedures_icd: return coded;
    case TableKind::prescriptions: return prescriptions;
    case TableKind::chartevents:
    case TableKind::labevents: return chart;
    case TableKind::noteevents: return notes;
    case TableKind::d_icd_diagnoses:
    case TableKind::d_icd_procedures: return icd_dict;
    case TableKind::d_items:
    case TableKind::d_labitems: return item_dict;
  }
  return patients;
}

struct RowError {
  std::string message;
};

// Field access by column name for one CSV record.
class Row {
 public:
  Row(const std::vector<std::string>& header_index_names, const std::vector<std::size_t>& index,
      const csv::Record& record)
      : names_(header_index_names), index_(index), record_(record) {}

  std::string_view raw(std::size_t column) const { return record_.fields[index_[column]]; }

  std::string text(std::size_t column) const { return std::string(raw(column)); }

  std::string trimmed(std::size_t column) const { return std::string(trim(raw(column))); }

  std::string required_text(std::size_t column) const {
    std::string v = trimmed(column);
    if (v.empty()) fail(column, "missing value");
    return v;
  }

  std::int64_t integer(std::size_t column) const {
    auto v = optional_integer(column);
    if (!v) fail(column, "missing value");
    return *v;
  }

  std::optional<std::int64_t> optional_integer(std::size_t column) const {
    std::string_view s = trim(raw(column));
    if (s.empty()) return std::nullopt;
    // pandas exports integer keys with missing values as floats ("149258.0").
    if (s.size() > 2 && s.substr(s.size() - 2) == ".0") s.remove_suffix(2);
    std::int64_t out = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc{} || ptr != s.data() + s.size()) fail(column, "not an integer: '" + std::string(s) + "'");
    return out;
  }

  std::optional<double> optional_decimal(std::size_t column) const {
    std::string_view s = trim(raw(column));
    if (s.empty()) return std::nullopt;
    double out = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc{} || ptr != s.data() + s.size()) fail(column, "not a number: '" + std::string(s) + "'");
    if (!std::isfinite(out)) fail(column, "non-finite number");
    return out;
  }

  Timestamp timestamp(std::size_t column) const {
    auto v = optional_timestamp(column);
    if (!v) fail(column, "missing value");
    return *v;
  }

  std::optional<Timestamp> optional_timestamp(std::size_t column) const {
    std::string_view s = trim(raw(column));
    if (s.empty()) return std::nullopt;
    auto t = parse_timestamp(s);
    if (!t) fail(column, "bad timestamp '" + std::string(s) + "'");
    return t;
  }

  Date date(std::size_t column) const {
    std::string_view s = trim(raw(column));
    if (s.empty()) fail(column, "missing value");
    auto d = parse_date(s);
    if (!d) fail(column, "bad date '" + std::string(s) + "'");
    return *d;
  }

  [[noreturn]] void fail(std::size_t column, const std::string& what) const {
    throw RowError{"column " + names_[column] + ": " + what};
  }

 private:
  const std::vector<std::string>& names_;
  const std::vector<std::size_t>& index_;
  const csv::Record& record_;
};

template <TableKind K>
table_record_t<K> convert(const Row& row);

template <>
Patient convert<TableKind::patients>(const Row& row) {
  Patient p;
  p.subject_id = row.integer(0);
  const std::string gender = to_upper(row.trimmed(1));
  if (gender == "M") {
    p.gender = Gender::male;
  } else if (gender == "F") {
    p.gender = Gender::female;
  } else {
    row.fail(1, "expected M or F");
  }
  p.dob = row.timestamp(2);
  p.dod = row.optional_timestamp(3);
  if (p.dod && !(p.dob < *p.dod)) row.fail(3, "DOD does not follow DOB");
  return p;
}

template <>
Admission convert<TableKind::admissions>(const Row& row) {
  Admission a;
  a.subject_id = row.integer(0);
  a.hadm_id = row.integer(1);
  a.admittime = row.timestamp(2);
  a.dischtime = row.timestamp(3);
  if (!(a.admittime < a.dischtime)) row.fail(3, "DISCHTIME does not follow ADMITTIME");
  a.admission_type = row.trimmed(4);
  a.admit_diagnosis = row.trimmed(5);
  return a;
}

CodedEvent convert_coded(const Row& row, CodeKind kind) {
  CodedEvent e;
  e.kind = kind;
  e.subject_id = row.integer(0);
  e.hadm_id = row.integer(1);
  const std::int64_t seq = row.integer(2);
  if (seq < 1) row.fail(2, "SEQ_NUM must be >= 1");
  e.seq_num = static_cast<int>(seq);
  e.code = row.required_text(3);
  return e;
}

template <>
CodedEvent convert<TableKind::diagnoses_icd>(const Row& row) {
  return convert_coded(row, CodeKind::diagnosis);
}

template <>
CodedEvent convert<TableKind::procedures_icd>(const Row& row) {
  return convert_coded(row, CodeKind::procedure);
}

template <>
Prescription convert<TableKind::prescriptions>(const Row& row) {
  Prescription p;
  p.subject_id = row.integer(0);
  p.hadm_id = row.integer(1);
  p.startdate = row.date(2);
  p.enddate = row.date(3);
  if (p.enddate < p.startdate) row.fail(3, "ENDDATE precedes STARTDATE");
  p.drug = collapse_whitespace(row.required_text(4));
  p.route = row.trimmed(5);
  const std::string value = row.trimmed(6);
  const std::string unit = row.trimmed(7);
  p.dose = unit.empty() ? value : value.empty() ? unit : value + " " + unit;
  return p;
}

ChartObservation convert_chart(const Row& row) {
  ChartObservation c;
  c.subject_id = row.integer(0);
  c.hadm_id = row.integer(1);
  c.item_id = row.integer(2);
  c.charttime = row.timestamp(3);
  c.value_text = row.trimmed(4);
  c.value_num = row.optional_decimal(5);
  std::string unit = row.trimmed(6);
  if (!unit.empty()) c.unit = std::move(unit);
  return c;
}

template <>
ChartObservation convert<TableKind::chartevents>(const Row& row) {
  return convert_chart(row);
}

template <>
ChartObservation convert<TableKind::labevents>(const Row& row) {
  return convert_chart(row);
}

template <>
NoteRow convert<TableKind::noteevents>(const Row& row) {
  NoteRow n;
  n.row_id = row.integer(0);
  n.subject_id = row.integer(1);
  n.hadm_id = row.optional_integer(2);
  n.chartdate = row.date(3);
  n.charttime = row.optional_timestamp(4);
  auto category = parse_note_category(row.raw(5));
  if (!category) row.fail(5, "unknown note category '" + row.trimmed(5) + "'");
  n.category = *category;
  n.description = row.trimmed(6);
  n.raw_text = row.text(7);
  return n;
}

DictionaryEntry convert_dictionary(const Row& row) {
  DictionaryEntry e;
  e.code = row.required_text(0);
  e.description = row.trimmed(1);
  return e;
}

template <>
DictionaryEntry convert<TableKind::d_icd_diagnoses>(const Row& row) {
  return convert_dictionary(row);
}
template <>
DictionaryEntry convert<TableKind::d_icd_procedures>(const Row& row) {
  return convert_dictionary(row);
}
template <>
DictionaryEntry convert<TableKind::d_items>(const Row& row) {
  return convert_dictionary(row);
}
template <>
DictionaryEntry convert<TableKind::d_labitems>(const Row& row) {
  return convert_dictionary(row);
}

std::string opt_ts(const std::optional<Timestamp>& t) { return t ? format_timestamp(*t) : std::string(); }

std::string format_decimal(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::vector<std::string> fields_of(const Patient& p) {
  return {std::to_string(p.subject_id), p.gender == Gender::male ? "M" : "F", format_timestamp(p.dob),
          opt_ts(p.dod)};
}

std::vector<std::string> fields_of(const Admission& a) {
  return {std::to_string(a.subject_id), std::to_string(a.hadm_id), format_timestamp(a.admittime),
          format_timestamp(a.dischtime), a.admission_type, a.admit_diagnosis};
}

std::vector<std::string> fields_of(const CodedEvent& e) {
  return {std::to_string(e.subject_id), std::to_string(e.hadm_id), std::to_string(e.seq_num), e.code};
}

std::vector<std::string> fields_of(const Prescription& p) {
  return {std::to_string(p.subject_id), std::to_string(p.hadm_id), format_date(p.startdate),
          format_date(p.enddate), p.drug, p.route, p.dose, ""};
}

std::vector<std::string> fields_of(const ChartObservation& c) {
  return {std::to_string(c.subject_id), std::to_string(c.hadm_id), std::to_string(c.item_id),
          format_timestamp(c.charttime), c.value_text,
          c.value_num ? format_decimal(*c.value_num) : std::string(), c.unit.value_or("")};
}

std::vector<std::string> fields_of(const NoteRow& n) {
  return {std::to_string(n.row_id), std::to_string(n.subject_id),
          n.hadm_id ? std::to_string(*n.hadm_id) : std::string(), format_date(n.chartdate),
          opt_ts(n.charttime), std::string(to_string(n.category)), n.description, n.raw_text};
}

std::vector<std::string> fields_of(const DictionaryEntry& e) { return {e.code, e.description}; }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Key uniqueness per table; duplicates become row rejects.
template <TableKind K>
std::optional<std::int64_t> unique_key(const table_record_t<K>& record) {
  if constexpr (K == TableKind::patients) {
    return record.subject_id;
  } else if constexpr (K == TableKind::admissions) {
    return record.hadm_id;
  } else if constexpr (K == TableKind::noteevents) {
    return record.row_id;
  } else {
    return std::nullopt;
  }
}

}  // namespace

std::optional<NoteCategory> parse_note_category(std::string_view text) {
  const std::string_view t = trim(text);
  for (const auto& entry : kCategoryNames) {
    if (iequals(t, entry.name)) return entry.category;
  }
  if (iequals(t, "Discharge summary")) return NoteCategory::discharge_summary;
  return std::nullopt;
}

std::string_view to_string(NoteCategory category) {
  for (const auto& entry : kCategoryNames) {
    if (entry.category == category) return entry.name;
  }
  return "?";
}

std::string_view table_name(TableKind kind) {
  switch (kind) {
    case TableKind::patients: return "PATIENTS";
    case TableKind::admissions: return "ADMISSIONS";
    case TableKind::diagnoses_icd: return "DIAGNOSES_ICD";
    case TableKind::procedures_icd: return "PROCEDURES_ICD";
    case TableKind::prescriptions: return "PRESCRIPTIONS";
    case TableKind::chartevents: return "CHARTEVENTS";
    case TableKind::labevents: return "LABEVENTS";
    case TableKind::noteevents: return "NOTEEVENTS";
    case TableKind::d_icd_diagnoses: return "D_ICD_DIAGNOSES";
    case TableKind::d_icd_procedures: return "D_ICD_PROCEDURES";
    case TableKind::d_items: return "D_ITEMS";
    case TableKind::d_labitems: return "D_LABITEMS";
  }
  return "";
}

std::optional<TableKind> parse_table_kind(std::string_view name) {
  for (TableKind kind : kAllTables) {
    if (iequals(trim(name), table_name(kind))) return kind;
  }
  return std::nullopt;
}

std::span<const std::string_view> required_columns(TableKind kind) {
  const Columns& cols = columns_for(kind);
  return {cols.data(), cols.size()};
}

template <TableKind K>
ParseResult<table_record_t<K>> parse_table_text(std::string_view text, const std::string& file) {
  ParseResult<table_record_t<K>> result;
  csv::Document doc = csv::parse(text);
  const Columns& cols = columns_for(K);

  std::vector<std::string> names;
  std::vector<std::size_t> index;
  for (std::string_view col : cols) {
    auto it = std::find_if(doc.header.begin(), doc.header.end(),
                           [&](const std::string& h) { return iequals(trim(h), col); });
    if (it == doc.header.end()) throw HeaderError(file, std::string(col));
    names.emplace_back(col);
    index.push_back(static_cast<std::size_t>(it - doc.header.begin()));
  }

  std::unordered_set<std::int64_t> seen;
  result.data_rows = doc.records.size();
  for (const csv::Record& rec : doc.records) {
    if (rec.error) {
      result.rejects.push_back({file, rec.row, *rec.error});
      continue;
    }
    if (rec.fields.size() != doc.header.size()) {
      result.rejects.push_back({file, rec.row,
                                "expected " + std::to_string(doc.header.size()) + " fields, found " +
                                    std::to_string(rec.fields.size())});
      continue;
    }
    try {
      auto record = convert<K>(Row(names, index, rec));
      record.source_row = rec.row;
      if (auto key = unique_key<K>(record); key && !seen.insert(*key).second) {
        result.rejects.push_back({file, rec.row, "duplicate key " + std::to_string(*key)});
        continue;
      }
      result.records.push_back(std::move(record));
    } catch (const RowError& e) {
      result.rejects.push_back({file, rec.row, e.message});
    }
  }
  return result;
}

template <TableKind K>
ParseResult<table_record_t<K>> read_table(const std::filesystem::path& path) {
  return parse_table_text<K>(read_file(path), path.filename().string());
}

template <TableKind K>
std::string write_table(std::span<const table_record_t<K>> records) {
  const Columns& cols = columns_for(K);
  std::string out = csv::format_row(std::vector<std::string>(cols.begin(), cols.end()));
  for (const auto& r : records) out += csv::format_row(fields_of(r));
  return out;
}

#define NOTE_FORGE_INSTANTIATE_TABLE(K)                                                             \
  template ParseResult<table_record_t<K>> parse_table_text<K>(std::string_view, const std::string&); \
  template ParseResult<table_record_t<K>> read_table<K>(const std::filesystem::path&);              \
  template std::string write_table<K>(std::span<const table_record_t<K>>);

NOTE_FORGE_INSTANTIATE_TABLE(TableKind::patients)
NOTE_FORGE_INSTANTIATE_TABLE(TableKind::admissions)
NOTE_FORGE_INSTANTIATE_TABLE(TableKind::diagnoses_icd)
NOTE_FORGE_INSTANTIATE_TABLE(TableKind::procedures_icd)
NOTE_FORGE_INSTANTIATE_TABLE(TableKind::prescriptions)
NOTE_FORGE_INSTANTIATE_TABLE(TableKind::chartevents)
NOTE_FORGE_INSTANTIATE_TABLE(TableKind::labevents)
NOTE_FORGE_INSTANTIATE_TABLE(TableKind::noteevents)
NOTE_FORGE_INSTANTIATE_TABLE(TableKind::d_icd_diagnoses)
NOTE_FORGE_INSTANTIATE_TABLE(TableKind::d_icd_procedures)
NOTE_FORGE_INSTANTIATE_TABLE(TableKind::d_items)
NOTE_FORGE_INSTANTIATE_TABLE(TableKind::d_labitems)

#undef NOTE_FORGE_INSTANTIATE_TABLE

AnyParseResult parse_table(const std::filesystem::path& path, TableKind kind) {
  switch (kind) {
    case TableKind::patients: return read_table<TableKind::patients>(path);
    case TableKind::admissions: return read_table<TableKind::admissions>(path);
    case TableKind::diagnoses_icd: return read_table<TableKind::diagnoses_icd>(path);
    case TableKind::procedures_icd: return read_table<TableKind::procedures_icd>(path);
    case TableKind::prescriptions: return read_table<TableKind::prescriptions>(path);
    case TableKind::chartevents: return read_table<TableKind::chartevents>(path);
    case TableKind::labevents: return read_table<TableKind::labevents>(path);
    case TableKind::noteevents: return read_table<TableKind::noteevents>(path);
    case TableKind::d_icd_diagnoses: return read_table<TableKind::d_icd_diagnoses>(path);
    case TableKind::d_icd_procedures: return read_table<TableKind::d_icd_procedures>(path);
    case TableKind::d_items: return read_table<TableKind::d_items>(path);
    case TableKind::d_labitems: return read_table<TableKind::d_labitems>(path);
  }
  throw ValidationError("unknown table kind");
}

std::vector<HadmId> AdmissionIndex::sorted_ids() const {
  std::vector<HadmId> ids;
  ids.reserve(entries.size());
  for (const auto& [id, entry] : entries) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

AdmissionIndex build_admission_index(std::span<const Patient> patients,
                                     std::span<const Admission> admissions) {
  std::unordered_map<SubjectId, const Patient*> by_subject;
  by_subject.reserve(patients.size());
  for (const Patient& p : patients) by_subject.emplace(p.subject_id, &p);

  AdmissionIndex index;
  index.entries.reserve(admissions.size());
  for (const Admission& a : admissions) {
    auto it = by_subject.find(a.subject_id);
    if (it == by_subject.end()) {
      index.integrity.push_back({"ADMISSIONS", a.source_row,
                                 "hadm_id " + std::to_string(a.hadm_id) + " references absent subject_id " +
                                     std::to_string(a.subject_id)});
      continue;
    }
    if (!index.entries.emplace(a.hadm_id, AdmissionEntry{*it->second, a}).second) {
      index.integrity.push_back(
          {"ADMISSIONS", a.source_row, "duplicate hadm_id " + std::to_string(a.hadm_id)});
    }
  }
  return index;
}

Dictionary build_dictionary(std::span<const DictionaryEntry> rows, const std::string& file) {
  Dictionary dict;
  for (const DictionaryEntry& row : rows) {
    if (!dict.entries.emplace(row.code, row.description).second) {
      dict.warnings.push_back(file + " row " + std::to_string(row.source_row) + ": duplicate code " +
                              row.code + " ignored");
    }
  }
  return dict;
}

Dictionary load_dictionary(const std::filesystem::path& path, DictionaryKind kind) {
  ParseResult<DictionaryEntry> parsed;
  switch (kind) {
    case DictionaryKind::icd_diagnoses: parsed = read_table<TableKind::d_icd_diagnoses>(path); break;
    case DictionaryKind::icd_procedures: parsed = read_table<TableKind::d_icd_procedures>(path); break;
    case DictionaryKind::items: parsed = read_table<TableKind::d_items>(path); break;
    case DictionaryKind::labitems: parsed = read_table<TableKind::d_labitems>(path); break;
  }
  Dictionary dict = build_dictionary(parsed.records, path.filename().string());
  for (const RejectEntry& r : parsed.rejects) {
    dict.warnings.push_back(r.file + " row " + std::to_string(r.row) + ": " + r.reason);
  }
  return dict;
}

EmrTables load_emr_directory(const std::filesystem::path& dir) {
  auto path_of = [&](TableKind kind) { return dir / (std::string(table_name(kind)) + ".csv"); };
  for (TableKind kind : kAllTables) {
    if (!std::filesystem::exists(path_of(kind))) throw IoError("missing table file " + path_of(kind).string());
  }

  auto launch = [&](auto kind_constant) {
    constexpr TableKind K = decltype(kind_constant)::value;
    return std::async(std::launch::async, [p = path_of(K)] { return read_table<K>(p); });
  };
  using std::integral_constant;
  auto f_patients = launch(integral_constant<TableKind, TableKind::patients>{});
  auto f_admissions = launch(integral_constant<TableKind, TableKind::admissions>{});
  auto f_diag = launch(integral_constant<TableKind, TableKind::diagnoses_icd>{});
  auto f_proc = launch(integral_constant<TableKind, TableKind::procedures_icd>{});
  auto f_rx = launch(integral_constant<TableKind, TableKind::prescriptions>{});
  auto f_chart = launch(integral_constant<TableKind, TableKind::chartevents>{});
  auto f_lab = launch(integral_constant<TableKind, TableKind::labevents>{});
  auto f_notes = launch(integral_constant<TableKind, TableKind::noteevents>{});
  auto f_dd = launch(integral_constant<TableKind, TableKind::d_icd_diagnoses>{});
  auto f_dp = launch(integral_constant<TableKind, TableKind::d_icd_procedures>{});
  auto f_di = launch(integral_constant<TableKind, TableKind::d_items>{});
  auto f_dl = launch(integral_constant<TableKind, TableKind::d_labitems>{});

  EmrTables t;
  auto take = [&t](auto&& result) {
    t.rejects.insert(t.rejects.end(), result.rejects.begin(), result.rejects.end());
    return std::move(result.records);
  };
  t.patients = take(f_patients.get());
  t.admissions = take(f_admissions.get());
  t.diagnoses = take(f_diag.get());
  t.procedures = take(f_proc.get());
  t.prescriptions = take(f_rx.get());
  t.chartevents = take(f_chart.get());
  t.labevents = take(f_lab.get());
  t.notes = take(f_notes.get());
  auto dict = [&](auto&& result, const char* file) {
    auto rows = take(std::move(result));
    Dictionary d = build_dictionary(rows, file);
    t.warnings.insert(t.warnings.end(), d.warnings.begin(), d.warnings.end());
    return d;
  };
  t.icd_diagnoses = dict(f_dd.get(), "D_ICD_DIAGNOSES.csv");
  t.icd_procedures = dict(f_dp.get(), "D_ICD_PROCEDURES.csv");
  t.items = dict(f_di.get(), "D_ITEMS.csv");
  t.labitems = dict(f_dl.get(), "D_LABITEMS.csv");

  for (CodedEvent& e : t.diagnoses) e.description = t.icd_diagnoses.lookup(e.code);
  for (CodedEvent& e : t.procedures) e.description = t.icd_procedures.lookup(e.code);
  for (ChartObservation& c : t.chartevents) {
    c.label = t.items.lookup(std::to_string(c.item_id)).value_or("item " + std::to_string(c.item_id));
  }
  for (ChartObservation& c : t.labevents) {
    c.label = t.labitems.lookup(std::to_string(c.item_id)).value_or("item " + std::to_string(c.item_id));
  }
  return t;
}

std::string reject_to_json_line(const RejectEntry& entry) {
  nlohmann::ordered_json j;
  j["file"] = entry.file;
  j["row"] = entry.row;
  j["reason"] = entry.reason;
  return j.dump();
}

}  // namespace note_forge
