#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "note_forge/error.hpp"
#include "note_forge/time.hpp"

namespace note_forge {

using SubjectId = std::int64_t;
using HadmId = std::int64_t;

enum class Gender { male, female };

struct Patient {
  SubjectId subject_id = 0;
  Gender gender = Gender::male;
  Timestamp dob;
  std::optional<Timestamp> dod;
  std::size_t source_row = 0;

  bool operator==(const Patient&) const = default;
};

struct Admission {
  HadmId hadm_id = 0;
  SubjectId subject_id = 0;
  Timestamp admittime;
  Timestamp dischtime;
  std::string admission_type;
  std::string admit_diagnosis;
  std::size_t source_row = 0;

  bool operator==(const Admission&) const = default;
};

enum class CodeKind { diagnosis, procedure };

struct CodedEvent {
  HadmId hadm_id = 0;
  SubjectId subject_id = 0;
  int seq_num = 1;
  std::string code;
  CodeKind kind = CodeKind::diagnosis;
  std::optional<std::string> description;
  std::size_t source_row = 0;

  bool operator==(const CodedEvent&) const = default;
};

struct Prescription {
  HadmId hadm_id = 0;
  SubjectId subject_id = 0;
  std::string drug;
  Date startdate;
  Date enddate;
  std::string route;
  std::string dose;
  std::size_t source_row = 0;

  bool operator==(const Prescription&) const = default;
};

struct ChartObservation {
  HadmId hadm_id = 0;
  SubjectId subject_id = 0;
  std::int64_t item_id = 0;
  std::string label;
  Timestamp charttime;
  std::string value_text;
  std::optional<double> value_num;
  std::optional<std::string> unit;
  std::size_t source_row = 0;

  bool operator==(const ChartObservation&) const = default;
};

enum class NoteCategory {
  nursing_other,
  radiology,
  nursing,
  ecg,
  physician,
  discharge_summary,
  echo,
  respiratory,
  nutrition,
  general,
  rehab_services,
  social_work,
  case_management,
  pharmacy,
  consult,
};

inline constexpr std::size_t kNoteCategoryCount = 15;

inline constexpr std::array<NoteCategory, kNoteCategoryCount> kAllNoteCategories{
    NoteCategory::nursing_other, NoteCategory::radiology,       NoteCategory::nursing,
    NoteCategory::ecg,           NoteCategory::physician,       NoteCategory::discharge_summary,
    NoteCategory::echo,          NoteCategory::respiratory,     NoteCategory::nutrition,
    NoteCategory::general,       NoteCategory::rehab_services,  NoteCategory::social_work,
    NoteCategory::case_management, NoteCategory::pharmacy,      NoteCategory::consult,
};

// Case-insensitive, whitespace-trimmed. Accepts the 15 census names ("DS" for
// discharge summaries) plus MIMIC's literal "Discharge summary".
std::optional<NoteCategory> parse_note_category(std::string_view text);
std::string_view to_string(NoteCategory category);

struct NoteRow {
  std::int64_t row_id = 0;
  SubjectId subject_id = 0;
  std::optional<HadmId> hadm_id;
  Date chartdate;
  std::optional<Timestamp> charttime;
  NoteCategory category = NoteCategory::nursing_other;
  std::string description;
  std::string raw_text;
  std::size_t source_row = 0;

  bool operator==(const NoteRow&) const = default;
};

struct DictionaryEntry {
  std::string code;
  std::string description;
  std::size_t source_row = 0;

  bool operator==(const DictionaryEntry&) const = default;
};

enum class TableKind {
  patients,
  admissions,
  diagnoses_icd,
  procedures_icd,
  prescriptions,
  chartevents,
  labevents,
  noteevents,
  d_icd_diagnoses,
  d_icd_procedures,
  d_items,
  d_labitems,
};

inline constexpr std::array<TableKind, 12> kAllTables{
    TableKind::patients,        TableKind::admissions,       TableKind::diagnoses_icd,
    TableKind::procedures_icd,  TableKind::prescriptions,    TableKind::chartevents,
    TableKind::labevents,       TableKind::noteevents,       TableKind::d_icd_diagnoses,
    TableKind::d_icd_procedures, TableKind::d_items,         TableKind::d_labitems,
};

// Upper-case MIMIC-III table name, e.g. "NOTEEVENTS".
std::string_view table_name(TableKind kind);
std::optional<TableKind> parse_table_kind(std::string_view name);
// Columns that must be present in the header (MIMIC-III v1.4 names).
std::span<const std::string_view> required_columns(TableKind kind);

// One problem row in a rejects or integrity report.
struct RejectEntry {
  std::string file;
  std::size_t row = 0;
  std::string reason;

  bool operator==(const RejectEntry&) const = default;
};

template <typename Record>
struct ParseResult {
  std::vector<Record> records;
  std::vector<RejectEntry> rejects;
  std::size_t data_rows = 0;
};

// Thrown when the header lacks a required column.
class HeaderError : public ValidationError {
 public:
  HeaderError(const std::string& file, std::string column)
      : ValidationError(file + ": header is missing column " + column), column_(std::move(column)) {}
  const std::string& column() const { return column_; }

 private:
  std::string column_;
};

template <TableKind K> struct TableRecord;
template <> struct TableRecord<TableKind::patients> { using type = Patient; };
template <> struct TableRecord<TableKind::admissions> { using type = Admission; };
template <> struct TableRecord<TableKind::diagnoses_icd> { using type = CodedEvent; };
template <> struct TableRecord<TableKind::procedures_icd> { using type = CodedEvent; };
template <> struct TableRecord<TableKind::prescriptions> { using type = Prescription; };
template <> struct TableRecord<TableKind::chartevents> { using type = ChartObservation; };
template <> struct TableRecord<TableKind::labevents> { using type = ChartObservation; };
template <> struct TableRecord<TableKind::noteevents> { using type = NoteRow; };
template <> struct TableRecord<TableKind::d_icd_diagnoses> { using type = DictionaryEntry; };
template <> struct TableRecord<TableKind::d_icd_procedures> { using type = DictionaryEntry; };
template <> struct TableRecord<TableKind::d_items> { using type = DictionaryEntry; };
template <> struct TableRecord<TableKind::d_labitems> { using type = DictionaryEntry; };

template <TableKind K>
using table_record_t = typename TableRecord<K>::type;

// Parses CSV text for table K. `file` only labels reject entries.
template <TableKind K>
ParseResult<table_record_t<K>> parse_table_text(std::string_view text, const std::string& file);

// Reads and parses a table file. Throws IoError when the file is missing and
// HeaderError when a required column is absent.
template <TableKind K>
ParseResult<table_record_t<K>> read_table(const std::filesystem::path& path);

// Writes records back out as CSV with the required columns, in schema order.
template <TableKind K>
std::string write_table(std::span<const table_record_t<K>> records);

using AnyParseResult =
    std::variant<ParseResult<Patient>, ParseResult<Admission>, ParseResult<CodedEvent>,
                 ParseResult<Prescription>, ParseResult<ChartObservation>, ParseResult<NoteRow>,
                 ParseResult<DictionaryEntry>>;

AnyParseResult parse_table(const std::filesystem::path& path, TableKind kind);

struct AdmissionEntry {
  Patient patient;
  Admission admission;
};

struct AdmissionIndex {
  std::unordered_map<HadmId, AdmissionEntry> entries;
  std::vector<RejectEntry> integrity;

  const AdmissionEntry* find(HadmId hadm_id) const {
    auto it = entries.find(hadm_id);
    return it == entries.end() ? nullptr : &it->second;
  }
  std::size_t size() const { return entries.size(); }
  // hadm ids in ascending order
  std::vector<HadmId> sorted_ids() const;
};

// Admissions whose subject is unknown are left out of the index and listed in
// `integrity` with the hadm_id and the dangling subject_id.
AdmissionIndex build_admission_index(std::span<const Patient> patients,
                                     std::span<const Admission> admissions);

enum class DictionaryKind { icd_diagnoses, icd_procedures, items, labitems };

struct Dictionary {
  std::unordered_map<std::string, std::string> entries;
  std::vector<std::string> warnings;

  std::optional<std::string> lookup(const std::string& code) const {
    auto it = entries.find(code);
    if (it == entries.end()) return std::nullopt;
    return it->second;
  }
  std::size_t size() const { return entries.size(); }
};

// Duplicate codes keep their first description; each duplicate adds a warning.
Dictionary build_dictionary(std::span<const DictionaryEntry> rows, const std::string& file = {});
Dictionary load_dictionary(const std::filesystem::path& path, DictionaryKind kind);

// All twelve tables of a MIMIC-III-shaped export directory. File names are
// "<TABLE>.csv" (e.g. NOTEEVENTS.csv).
struct EmrTables {
  std::vector<Patient> patients;
  std::vector<Admission> admissions;
  std::vector<CodedEvent> diagnoses;
  std::vector<CodedEvent> procedures;
  std::vector<Prescription> prescriptions;
  std::vector<ChartObservation> chartevents;
  std::vector<ChartObservation> labevents;
  std::vector<NoteRow> notes;
  Dictionary icd_diagnoses;
  Dictionary icd_procedures;
  Dictionary items;
  Dictionary labitems;
  std::vector<RejectEntry> rejects;
  std::vector<std::string> warnings;
};

// Loads every table, attaches dictionary descriptions to codes and chart
// labels. Tables are parsed concurrently.
EmrTables load_emr_directory(const std::filesystem::path& dir);

std::string reject_to_json_line(const RejectEntry& entry);

}  // namespace note_forge
