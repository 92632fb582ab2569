#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "note_forge/cohort.hpp"
#include "note_forge/emr.hpp"
#include "note_forge/notes.hpp"

namespace note_forge {

// Declaration order is the tie-break rank for events sharing a timestamp.
enum class EventKind { admission = 0, chart = 1, medication = 2, note = 3, discharge = 4 };

std::string_view to_string(EventKind kind);  // ADMISSION, CHART, ...
std::optional<EventKind> parse_event_kind(std::string_view text);

struct TimelineEvent {
  Timestamp timestamp;
  EventKind kind = EventKind::admission;
  std::string text;  // one line
  std::size_t source_row = 0;

  bool operator==(const TimelineEvent&) const = default;
};

struct CodeLine {
  std::string code;
  std::string description;

  bool operator==(const CodeLine&) const = default;
};

// Demographic block. Diagnoses and procedures live here rather than in the timeline.
struct PatientHeader {
  Gender gender = Gender::male;
  int age = 0;
  bool age_clamped = false;
  Timestamp admittime;
  Timestamp dischtime;
  std::string admission_type;
  std::string admit_diagnosis;
  std::vector<CodeLine> attention;  // V/E supplementary codes among the retained diagnoses
  std::vector<CodeLine> diagnoses;
  std::vector<CodeLine> procedures;

  bool operator==(const PatientHeader&) const = default;
};

inline constexpr std::size_t kMaxCodesPerKind = 5;
inline constexpr std::size_t kHeaderLineCount = 10;

struct SequentialRecord {
  SubjectId subject_id = 0;
  HadmId hadm_id = 0;
  PatientHeader header;
  std::vector<TimelineEvent> events;
  std::string reference_summary;
  std::size_t dropped_events = 0;  // outside [admittime, dischtime]

  bool operator==(const SequentialRecord&) const = default;
};

enum class InputVariant { table_only, text_only, table_and_text };

std::string_view to_string(InputVariant variant);
std::optional<InputVariant> parse_input_variant(std::string_view text);

// Everything known about one admission before ordering.
struct TimelineInputs {
  Patient patient;
  Admission admission;
  std::vector<CodedEvent> diagnoses;
  std::vector<CodedEvent> procedures;
  std::vector<Prescription> prescriptions;
  std::vector<ChartObservation> chart;
  std::vector<NoteDocument> notes;  // discharge summaries are skipped
  std::optional<std::string> reference;  // cleaned DS text
};

// Keeps the first kMaxCodesPerKind codes by seq_num.
std::vector<CodedEvent> retain_codes(std::vector<CodedEvent> codes);

// Admission marker, in-window chart/medication/note events filtered to the
// vocabularies, discharge marker; stably ordered by (timestamp, kind, source_row).
// Medications aggregate per (drug, route, start date) and are placed at
// max(start date 00:00, admittime). Throws ValidationError without a reference.
SequentialRecord build_timeline(const TimelineInputs& inputs, const ItemVocabulary& drugs,
                                const ItemVocabulary& chart_items);

std::vector<std::string> header_lines(const SequentialRecord& record);
std::string render_event_line(const TimelineEvent& event);
bool variant_includes(InputVariant variant, EventKind kind);
std::string render_input(const SequentialRecord& record, InputVariant variant);

inline constexpr std::array<std::string_view, 8> kSummarySectionTitles{
    "1. Patient information:",
    "2. Diagnostic information and past history:",
    "3. Surgery or procedure information:",
    "4. Significant medication administration during hospitalization and discharge medication history:",
    "5. Meaningful lab tests during hospitalization:",
    "6. Summary of significant text records/notes:",
    "7. Discharge outcomes and treatment plan:",
    "8. Overall summary:",
};

// Fixed preamble asking for the eight sections, followed by the table_and_text input.
std::string render_instruction(const SequentialRecord& record);

}  // namespace note_forge
