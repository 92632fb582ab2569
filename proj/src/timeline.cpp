#include "note_forge/timeline.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <tuple>

#include "note_forge/strings.hpp"

namespace note_forge {

namespace {

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string chart_text(const ChartObservation& c) {
  std::string value = c.value_text;
  if (value.empty() && c.value_num) value = format_number(*c.value_num);
  if (value.empty()) value = "(no value)";
  std::string out = collapse_whitespace(c.label) + ": " + collapse_whitespace(value);
  if (c.unit && !c.unit->empty()) out += " " + *c.unit;
  return out;
}

bool is_supplementary(const std::string& code) {
  return !code.empty() && (code.front() == 'V' || code.front() == 'v' || code.front() == 'E' || code.front() == 'e');
}

CodeLine to_line(const CodedEvent& e) { return {e.code, e.description.value_or("")}; }

std::string join_codes(const std::vector<CodeLine>& codes) {
  if (codes.empty()) return "none";
  std::vector<std::string> parts;
  for (const CodeLine& c : codes) parts.push_back(c.description.empty() ? c.code : c.code + " " + c.description);
  return join(parts, "; ");
}

}  // namespace

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::admission: return "ADMISSION";
    case EventKind::chart: return "CHART";
    case EventKind::medication: return "MEDICATION";
    case EventKind::note: return "NOTE";
    case EventKind::discharge: return "DISCHARGE";
  }
  return "?";
}

std::optional<EventKind> parse_event_kind(std::string_view text) {
  for (EventKind k : {EventKind::admission, EventKind::chart, EventKind::medication, EventKind::note,
                      EventKind::discharge}) {
    if (iequals(text, to_string(k))) return k;
  }
  return std::nullopt;
}

std::string_view to_string(InputVariant variant) {
  switch (variant) {
    case InputVariant::table_only: return "table_only";
    case InputVariant::text_only: return "text_only";
    case InputVariant::table_and_text: return "table_and_text";
  }
  return "?";
}

std::optional<InputVariant> parse_input_variant(std::string_view text) {
  for (InputVariant v : {InputVariant::table_only, InputVariant::text_only, InputVariant::table_and_text}) {
    if (text == to_string(v)) return v;
  }
  if (text == "table") return InputVariant::table_only;
  if (text == "text") return InputVariant::text_only;
  if (text == "both") return InputVariant::table_and_text;
  return std::nullopt;
}

std::vector<CodedEvent> retain_codes(std::vector<CodedEvent> codes) {
  std::stable_sort(codes.begin(), codes.end(),
                   [](const CodedEvent& a, const CodedEvent& b) { return a.seq_num < b.seq_num; });
  if (codes.size() > kMaxCodesPerKind) codes.resize(kMaxCodesPerKind);
  return codes;
}

SequentialRecord build_timeline(const TimelineInputs& in, const ItemVocabulary& drugs,
                                const ItemVocabulary& chart_items) {
  const Admission& adm = in.admission;
  if (!in.reference || trim(*in.reference).empty()) {
    throw ValidationError("admission " + std::to_string(adm.hadm_id) + " has no discharge summary reference");
  }

  SequentialRecord rec;
  rec.subject_id = in.patient.subject_id;
  rec.hadm_id = adm.hadm_id;
  rec.reference_summary = *in.reference;

  PatientHeader& h = rec.header;
  h.gender = in.patient.gender;
  const AgeResult age = compute_age(in.patient.dob, adm.admittime);
  h.age = age.years;
  h.age_clamped = age.clamped;
  h.admittime = adm.admittime;
  h.dischtime = adm.dischtime;
  h.admission_type = adm.admission_type;
  h.admit_diagnosis = adm.admit_diagnosis;
  for (const CodedEvent& e : retain_codes(in.diagnoses)) {
    (is_supplementary(e.code) ? h.attention : h.diagnoses).push_back(to_line(e));
  }
  for (const CodedEvent& e : retain_codes(in.procedures)) h.procedures.push_back(to_line(e));

  auto in_window = [&](Timestamp t) { return !(t < adm.admittime) && !(adm.dischtime < t); };

  std::vector<TimelineEvent> body;
  for (const ChartObservation& c : in.chart) {
    if (!chart_items.contains(std::to_string(c.item_id))) continue;
    if (!in_window(c.charttime)) {
      ++rec.dropped_events;
      continue;
    }
    body.push_back({c.charttime, EventKind::chart, chart_text(c), c.source_row});
  }

  struct MedGroup {
    std::size_t count = 0;
    std::size_t first_row = 0;
    std::int64_t max_days = 0;
    std::string dose;
  };
  std::map<std::tuple<std::string, std::string, Date>, MedGroup> meds;
  const Date first_day = date_of(adm.admittime);
  const Date last_day = date_of(adm.dischtime);
  for (const Prescription& p : in.prescriptions) {
    if (!drugs.contains(p.drug)) continue;
    if (p.startdate < first_day || last_day < p.startdate) {
      ++rec.dropped_events;
      continue;
    }
    MedGroup& g = meds[{p.drug, p.route, p.startdate}];
    if (g.count == 0 || p.source_row < g.first_row) {
      g.first_row = p.source_row;
      g.dose = p.dose;
    }
    ++g.count;
    g.max_days = std::max(g.max_days, p.enddate.days - p.startdate.days);
  }
  for (const auto& [key, g] : meds) {
    const auto& [drug, route, start] = key;
    std::string text = drug;
    if (!route.empty()) text += " (" + route + ")";
    text += " started " + format_date(start) + ", " + std::to_string(g.count) +
            (g.count == 1 ? " order" : " orders");
    if (!g.dose.empty()) text += ", dose " + collapse_whitespace(g.dose);
    text += ", duration " + std::to_string(g.max_days) + (g.max_days == 1 ? " day" : " days");
    const Timestamp placed = std::max(start_of(start), adm.admittime);
    body.push_back({placed, EventKind::medication, std::move(text), g.first_row});
  }

  for (const NoteDocument& n : in.notes) {
    if (n.category == NoteCategory::discharge_summary) continue;
    if (!in_window(n.event_time)) {
      ++rec.dropped_events;
      continue;
    }
    std::string body_text = collapse_whitespace(n.extracted_section);
    if (body_text.empty()) continue;
    body.push_back({n.event_time, EventKind::note, std::string(to_string(n.category)) + ": " + body_text,
                    n.source_row});
  }

  std::stable_sort(body.begin(), body.end(), [](const TimelineEvent& a, const TimelineEvent& b) {
    return std::tie(a.timestamp, a.kind, a.source_row) < std::tie(b.timestamp, b.kind, b.source_row);
  });

  std::string admit_text = "Admitted";
  if (!adm.admission_type.empty()) admit_text += " (" + adm.admission_type + ")";
  if (!adm.admit_diagnosis.empty()) admit_text += ": " + collapse_whitespace(adm.admit_diagnosis);
  rec.events.push_back({adm.admittime, EventKind::admission, std::move(admit_text), adm.source_row});
  for (TimelineEvent& e : body) rec.events.push_back(std::move(e));
  rec.events.push_back({adm.dischtime, EventKind::discharge, "Discharged", adm.source_row});
  return rec;
}

std::vector<std::string> header_lines(const SequentialRecord& r) {
  const PatientHeader& h = r.header;
  const std::int64_t los_days = date_of(h.dischtime).days - date_of(h.admittime).days;
  return {
      "SUBJECT_ID: " + std::to_string(r.subject_id),
      "HADM_ID: " + std::to_string(r.hadm_id),
      std::string("Gender: ") + (h.gender == Gender::male ? "Male" : "Female"),
      "Age: " + std::to_string(h.age) + (h.age_clamped ? " (de-identified, over 89)" : ""),
      "Length of stay: " + std::to_string(los_days) + (los_days == 1 ? " day" : " days"),
      "Admission type: " + (h.admission_type.empty() ? std::string("unknown") : h.admission_type),
      "Admitting diagnosis: " +
          (h.admit_diagnosis.empty() ? std::string("unknown") : collapse_whitespace(h.admit_diagnosis)),
      "Allergy/attention: " + join_codes(h.attention),
      "Diagnoses: " + join_codes(h.diagnoses),
      "Procedures: " + join_codes(h.procedures),
  };
}

std::string render_event_line(const TimelineEvent& e) {
  return "[" + format_timestamp_minutes(e.timestamp) + "] " + std::string(to_string(e.kind)) + ": " + e.text;
}

bool variant_includes(InputVariant variant, EventKind kind) {
  switch (kind) {
    case EventKind::admission:
    case EventKind::discharge: return true;
    case EventKind::chart:
    case EventKind::medication: return variant != InputVariant::text_only;
    case EventKind::note: return variant != InputVariant::table_only;
  }
  return false;
}

std::string render_input(const SequentialRecord& record, InputVariant variant) {
  std::vector<std::string> lines = header_lines(record);
  for (const TimelineEvent& e : record.events) {
    if (variant_includes(variant, e.kind)) lines.push_back(render_event_line(e));
  }
  return join(lines, "\n");
}

std::string render_instruction(const SequentialRecord& record) {
  std::string prompt =
      "You are a clinician writing the discharge summary for one hospitalization. "
      "Read the sequential patient record below (demographics, diagnoses, procedures, "
      "chart measurements, medications and clinical notes in time order) and write a "
      "discharge summary with exactly these eight sections, in this order:\n";
  for (std::string_view title : kSummarySectionTitles) {
    prompt += title;
    prompt += '\n';
  }
  prompt +=
      "Only state facts that appear in the record. Distinguish medications given during "
      "the stay from discharge medications.\n\nSequential patient record:\n";
  prompt += render_input(record, InputVariant::table_and_text);
  return prompt;
}

}  // namespace note_forge
