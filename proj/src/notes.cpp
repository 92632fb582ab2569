#include "note_forge/notes.hpp"

#include <numeric>
#include <vector>

#include "note_forge/strings.hpp"

namespace note_forge {

namespace {

bool is_date_like(std::string_view s) {
  bool digit = false;
  bool separator = false;
  for (char c : s) {
    if (c >= '0' && c <= '9') {
      digit = true;
    } else if (c == '-' || c == '/') {
      separator = true;
    } else {
      return false;
    }
  }
  if (!digit) return false;
  if (separator) return s.front() != '-' && s.front() != '/' && s.back() != '-' && s.back() != '/';
  return s.size() == 4;  // bare year
}

std::string placeholder_for(std::string_view content) {
  const std::string_view c = trim(content);
  if (is_date_like(c)) return std::string(c);
  if (to_lower(c).find("name") != std::string::npos) return "NAME";
  return "DEID";
}

std::string replace_deid_spans(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t open = text.find("[**", pos);
    if (open == std::string_view::npos) break;
    const std::size_t close = text.find("**]", open + 3);
    if (close == std::string_view::npos) break;
    out.append(text.substr(pos, open - pos));
    out += placeholder_for(text.substr(open + 3, close - open - 3));
    pos = close + 3;
  }
  out.append(text.substr(pos));
  return out;
}

std::string collapse_runs(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    if (!out.empty() && out.back() == c && kCollapsibleCharacters.find(c) != std::string_view::npos) continue;
    out.push_back(c);
  }
  return out;
}

std::string collapse_blank_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (true) {
    const std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }

  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  bool first = true;
  auto emit = [&](std::string_view line) {
    if (!first) out.push_back('\n');
    first = false;
    out.append(line);
  };
  while (i < lines.size()) {
    if (!trim(lines[i]).empty()) {
      emit(lines[i++]);
      continue;
    }
    std::size_t j = i;
    while (j < lines.size() && trim(lines[j]).empty()) ++j;
    if (j - i >= 3) {
      emit("");
    } else {
      for (std::size_t k = i; k < j; ++k) emit(lines[k]);
    }
    i = j;
  }
  return out;
}

}  // namespace

std::string clean_text(std::string_view raw) {
  std::string s = replace_deid_spans(raw);
  s = collapse_runs(s);
  s = collapse_blank_lines(s);
  return std::string(trim(s));
}

SectionResult extract_section(NoteCategory category, std::string_view cleaned_text) {
  std::size_t cut = std::string_view::npos;
  if (category == NoteCategory::radiology) {
    constexpr std::string_view kMarker = "FINAL REPORT";
    if (auto at = cleaned_text.rfind(kMarker); at != std::string_view::npos) cut = at + kMarker.size();
  } else if (category == NoteCategory::echo) {
    constexpr std::string_view kMarker = "Conclusions:";
    if (auto at = cleaned_text.find(kMarker); at != std::string_view::npos) cut = at + kMarker.size();
  } else {
    return {std::string(cleaned_text), false};
  }
  if (cut != std::string_view::npos) {
    std::string_view rest = trim(cleaned_text.substr(cut));
    if (!rest.empty()) return {std::string(rest), true};
  }
  return {std::string(cleaned_text), false};
}

SectionResult extract_section(const NoteRow& note) {
  return extract_section(note.category, clean_text(note.raw_text));
}

NoteDocument process_note(const NoteRow& note) {
  NoteDocument doc;
  doc.note_id = note.row_id;
  doc.hadm_id = note.hadm_id;
  doc.category = note.category;
  doc.event_time = note.charttime.value_or(start_of(note.chartdate));
  doc.cleaned_text = clean_text(note.raw_text);
  SectionResult section = extract_section(note.category, doc.cleaned_text);
  doc.extracted_section = std::move(section.text);
  doc.section_marker_found = section.marker_found;
  doc.source_row = note.source_row;
  return doc;
}

std::size_t NoteCensus::total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }

NoteCensus note_census(std::span<const NoteRow> notes) {
  NoteCensus census;
  for (const NoteRow& n : notes) ++census.counts[static_cast<std::size_t>(n.category)];
  return census;
}

}  // namespace note_forge
