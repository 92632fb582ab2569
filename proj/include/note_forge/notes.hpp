#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>

#include "note_forge/emr.hpp"

namespace note_forge {

// Characters whose repeated runs collapse to a single character.
inline constexpr std::string_view kCollapsibleCharacters = "-_=*#~.";

// Total, idempotent, never lengthens its input:
//  - `[** ... **]` de-identification spans become NAME (name-like content), the
//    literal date text (date-like content) or DEID;
//  - runs of one character from kCollapsibleCharacters collapse to one;
//  - three or more consecutive blank lines collapse to one blank line;
//  - leading/trailing whitespace is trimmed.
std::string clean_text(std::string_view raw);

struct SectionResult {
  std::string text;
  bool marker_found = false;
};

// Radiology: text after the last "FINAL REPORT"; Echo: text after the first
// "Conclusions:"; other categories: the whole text. Falls back to the whole text
// when the marker is absent or nothing follows it. `text` is already cleaned.
SectionResult extract_section(NoteCategory category, std::string_view cleaned_text);
SectionResult extract_section(const NoteRow& note);

struct NoteDocument {
  std::int64_t note_id = 0;
  std::optional<HadmId> hadm_id;
  NoteCategory category = NoteCategory::nursing_other;
  Timestamp event_time;  // CHARTTIME, or CHARTDATE 00:00 when absent
  std::string cleaned_text;
  std::string extracted_section;
  bool section_marker_found = false;
  std::size_t source_row = 0;
};

NoteDocument process_note(const NoteRow& note);

struct NoteCensus {
  std::array<std::size_t, kNoteCategoryCount> counts{};

  std::size_t operator[](NoteCategory c) const { return counts[static_cast<std::size_t>(c)]; }
  std::size_t total() const;
};

NoteCensus note_census(std::span<const NoteRow> notes);

}  // namespace note_forge
