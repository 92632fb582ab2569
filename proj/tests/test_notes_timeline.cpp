#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "note_forge/notes.hpp"
#include "note_forge/strings.hpp"
#include "note_forge/timeline.hpp"
#include "support.hpp"
#include "timeline_fuzz.hpp"

namespace nf = note_forge;
using nf_test::ts;

TEST(CleanText, Examples) {
  EXPECT_EQ(nf::clean_text(""), "");
  EXPECT_EQ(nf::clean_text("plan ----- done"), "plan - done");
  EXPECT_EQ(nf::clean_text("seen by [**Last Name (NamePattern1) 1234**] today"), "seen by NAME today");
  EXPECT_EQ(nf::clean_text("on [**2150-3-4**] at [**Hospital1 18**]"), "on 2150-3-4 at DEID");
  EXPECT_EQ(nf::clean_text("a\n\n\n\n\nb"), "a\n\nb");
  EXPECT_EQ(nf::clean_text("  x ==== y ___ z ... \n"), "x = y _ z .");
}

TEST(CleanText, UnterminatedSpanIsKept) {
  // Not replaced; only the "**" run collapses like any other repeated punctuation.
  EXPECT_EQ(nf::clean_text("see [** unfinished"), "see [* unfinished");
}

TEST(CleanText, IdempotentAndNeverLonger) {
  std::mt19937_64 rng(5);
  const std::string alphabet = "ab -_=*#~.\n\n[*]*Name 2150-01-01";
  for (int i = 0; i < 2000; ++i) {
    std::string s;
    const std::size_t n = rng() % 60;
    for (std::size_t k = 0; k < n; ++k) {
      if (rng() % 15 == 0) {
        s += rng() % 2 ? "[**Last Name 12**]" : "[**2150-01-01**]";
      } else {
        s += alphabet[rng() % alphabet.size()];
      }
    }
    const std::string once = nf::clean_text(s);
    EXPECT_EQ(nf::clean_text(once), once) << s;
    EXPECT_LE(once.size(), s.size()) << s;
  }
}

namespace {

nf::NoteRow note(nf::NoteCategory c, std::string text) {
  nf::NoteRow n;
  n.row_id = 1;
  n.category = c;
  n.chartdate = nf_test::date("2150-01-01");
  n.raw_text = std::move(text);
  return n;
}

}  // namespace

TEST(ExtractSection, RadiologyUsesLastFinalReport) {
  const auto r = nf::extract_section(
      note(nf::NoteCategory::radiology, "CHEST\nFINAL REPORT\nold text\nADDENDUM\nFINAL REPORT\nIMPRESSION: no acute process"));
  EXPECT_TRUE(r.marker_found);
  EXPECT_EQ(r.text, "IMPRESSION: no acute process");
}

TEST(ExtractSection, EchoUsesFirstConclusions) {
  const auto r = nf::extract_section(note(nf::NoteCategory::echo, "Findings: LA dilated. Conclusions: mild LVH."));
  EXPECT_TRUE(r.marker_found);
  EXPECT_EQ(r.text, "mild LVH.");
}

TEST(ExtractSection, OtherCategoriesPassThrough) {
  const std::string raw = "Sinus rhythm. FINAL REPORT Conclusions: none";
  const auto r = nf::extract_section(note(nf::NoteCategory::ecg, raw));
  EXPECT_EQ(r.text, nf::clean_text(raw));
}

TEST(ExtractSection, FallbackWhenMarkerMissingOrEmpty) {
  const auto missing = nf::extract_section(note(nf::NoteCategory::radiology, "CHEST PA and LAT: clear"));
  EXPECT_FALSE(missing.marker_found);
  EXPECT_EQ(missing.text, "CHEST PA and LAT: clear");
  const auto trailing = nf::extract_section(note(nf::NoteCategory::echo, "Findings: normal. Conclusions:   "));
  EXPECT_FALSE(trailing.text.empty());
}

TEST(ExtractSection, NeverEmptyForNonEmptyNotes) {
  std::mt19937_64 rng(9);
  const std::vector<std::string> pieces{"FINAL REPORT", "Conclusions:", " ", "\n", "x", "[**Name**]", "--"};
  for (int i = 0; i < 2000; ++i) {
    std::string s;
    for (std::size_t k = rng() % 6; k > 0; --k) s += pieces[rng() % pieces.size()];
    for (auto c : {nf::NoteCategory::radiology, nf::NoteCategory::echo, nf::NoteCategory::nursing}) {
      const auto r = nf::extract_section(note(c, s));
      if (!nf::trim(nf::clean_text(s)).empty()) {
        EXPECT_FALSE(r.text.empty()) << s;
      }
    }
  }
}

TEST(ProcessNote, UsesChartdateWhenNoCharttime) {
  auto n = note(nf::NoteCategory::echo, "Conclusions: normal");
  n.chartdate = nf_test::date("2150-02-03");
  const auto doc = nf::process_note(n);
  EXPECT_EQ(nf::format_timestamp(doc.event_time), "2150-02-03 00:00:00");
  n.charttime = ts("2150-02-03 11:12:00");
  EXPECT_EQ(nf::format_timestamp(nf::process_note(n).event_time), "2150-02-03 11:12:00");
}

TEST(NoteCensus, Counts) {
  EXPECT_EQ(nf::note_census({}).total(), 0u);
  std::vector<nf::NoteRow> notes;
  for (int i = 0; i < 3; ++i) notes.push_back(note(nf::NoteCategory::radiology, "r"));
  for (int i = 0; i < 2; ++i) notes.push_back(note(nf::NoteCategory::discharge_summary, "d"));
  const auto census = nf::note_census(notes);
  for (nf::NoteCategory c : nf::kAllNoteCategories) {
    const std::size_t expected = c == nf::NoteCategory::radiology ? 3 : c == nf::NoteCategory::discharge_summary ? 2 : 0;
    EXPECT_EQ(census[c], expected) << nf::to_string(c);
  }
  std::reverse(notes.begin(), notes.end());
  EXPECT_EQ(nf::note_census(notes).counts, census.counts);
}

// ---- timeline ----

namespace {

nf::ItemVocabulary vocab(nf::ItemKind kind, std::vector<std::string> keys) {
  nf::ItemVocabulary v;
  v.kind = kind;
  std::sort(keys.begin(), keys.end());
  v.retained = keys;
  for (const auto& k : keys) v.coverage[k] = 1.0;
  return v;
}

nf::TimelineInputs base_inputs() {
  nf::TimelineInputs in;
  in.patient = {946, nf::Gender::male, ts("2040-03-16 00:00:00"), {}, 1};
  in.admission.subject_id = 946;
  in.admission.hadm_id = 149258;
  in.admission.admittime = ts("2121-05-29 14:20:00");
  in.admission.dischtime = ts("2121-05-31 16:00:00");
  in.admission.admission_type = "EMERGENCY";
  in.admission.admit_diagnosis = "GI BLEED";
  in.reference = "Discharge summary text.";
  return in;
}

nf::ChartObservation chart(std::int64_t item, const char* when, const char* value, std::size_t row) {
  nf::ChartObservation c;
  c.subject_id = 946;
  c.hadm_id = 149258;
  c.item_id = item;
  c.label = item == 1 ? "Platelet Count" : "Creatinine";
  c.charttime = ts(when);
  c.value_text = value;
  c.value_num = std::stod(value);
  c.source_row = row;
  return c;
}

}  // namespace

TEST(Timeline, NoRetainedEventsGivesTwoMarkers) {
  const auto rec = nf::build_timeline(base_inputs(), vocab(nf::ItemKind::drug, {}), vocab(nf::ItemKind::chart_item, {}));
  ASSERT_EQ(rec.events.size(), 2u);
  EXPECT_EQ(rec.events.front().kind, nf::EventKind::admission);
  EXPECT_EQ(rec.events.back().kind, nf::EventKind::discharge);
}

TEST(Timeline, MissingReferenceIsAnError) {
  auto in = base_inputs();
  in.reference.reset();
  EXPECT_THROW(nf::build_timeline(in, vocab(nf::ItemKind::drug, {}), vocab(nf::ItemKind::chart_item, {})),
               nf::ValidationError);
}

TEST(Timeline, EqualTimestampsKeepFileOrder) {
  auto in = base_inputs();
  in.chart = {chart(2, "2121-05-30 08:00:00", "0.7", 20), chart(1, "2121-05-30 08:00:00", "187.0", 10)};
  const auto rec = nf::build_timeline(in, vocab(nf::ItemKind::drug, {}), vocab(nf::ItemKind::chart_item, {"1", "2"}));
  ASSERT_EQ(rec.events.size(), 4u);
  EXPECT_EQ(rec.events[1].source_row, 10u);
  EXPECT_EQ(rec.events[2].source_row, 20u);
}

TEST(Timeline, HandSortedSixEvents) {
  auto in = base_inputs();
  // Medication start date 05-30 is placed at 05-30 00:00; the note and a chart
  // row share 05-30 09:00, where chart (rank 1) precedes note (rank 3).
  nf::Prescription p;
  p.drug = "Heparin Sodium";
  p.route = "IV";
  p.startdate = nf_test::date("2121-05-30");
  p.enddate = nf_test::date("2121-05-31");
  p.dose = "5000 UNIT";
  p.source_row = 3;
  in.prescriptions = {p};
  nf::NoteRow n;
  n.row_id = 77;
  n.hadm_id = 149258;
  n.chartdate = nf_test::date("2121-05-30");
  n.charttime = ts("2121-05-30 09:00:00");
  n.category = nf::NoteCategory::nursing;
  n.raw_text = "PEG site clean.";
  n.source_row = 4;
  in.notes = {nf::process_note(n)};
  in.chart = {chart(1, "2121-05-30 09:00:00", "187.0", 9), chart(2, "2121-05-29 20:00:00", "0.6", 8)};

  const auto rec = nf::build_timeline(in, vocab(nf::ItemKind::drug, {"Heparin Sodium"}),
                                      vocab(nf::ItemKind::chart_item, {"1", "2"}));
  std::vector<std::pair<std::string, nf::EventKind>> got;
  for (const auto& e : rec.events) got.emplace_back(nf::format_timestamp_minutes(e.timestamp), e.kind);
  const std::vector<std::pair<std::string, nf::EventKind>> oracle{
      {"2121-05-29 14:20", nf::EventKind::admission}, {"2121-05-29 20:00", nf::EventKind::chart},
      {"2121-05-30 00:00", nf::EventKind::medication}, {"2121-05-30 09:00", nf::EventKind::chart},
      {"2121-05-30 09:00", nf::EventKind::note},      {"2121-05-31 16:00", nf::EventKind::discharge}};
  EXPECT_EQ(got, oracle);
  EXPECT_EQ(rec.events[2].text, "Heparin Sodium (IV) started 2121-05-30, 1 order, dose 5000 UNIT, duration 1 day");
  EXPECT_EQ(nf::render_event_line(rec.events[4]), "[2121-05-30 09:00] NOTE: Nursing: PEG site clean.");
}

TEST(Timeline, MedicationsAggregatePerDrugRouteDay) {
  auto in = base_inputs();
  for (std::size_t row : {5u, 6u, 7u}) {
    nf::Prescription p;
    p.drug = "Metoprolol";
    p.route = row == 7 ? "PO" : "IV";
    p.startdate = nf_test::date("2121-05-29");
    p.enddate = nf_test::date("2121-05-29");
    p.source_row = row;
    in.prescriptions.push_back(p);
  }
  const auto rec = nf::build_timeline(in, vocab(nf::ItemKind::drug, {"Metoprolol"}), vocab(nf::ItemKind::chart_item, {}));
  ASSERT_EQ(rec.events.size(), 4u);
  // Start day equals the admission day, so the group sits at admittime.
  EXPECT_EQ(rec.events[1].timestamp, in.admission.admittime);
  EXPECT_NE(rec.events[1].text.find("2 orders"), std::string::npos);
  EXPECT_NE(rec.events[2].text.find("(PO)"), std::string::npos);
}

TEST(Timeline, OutOfWindowEventsAreDroppedAndCounted) {
  auto in = base_inputs();
  in.chart = {chart(1, "2121-05-29 10:00:00", "200", 1), chart(1, "2121-06-02 10:00:00", "200", 2),
              chart(1, "2121-05-30 10:00:00", "200", 3)};
  const auto rec = nf::build_timeline(in, vocab(nf::ItemKind::drug, {}), vocab(nf::ItemKind::chart_item, {"1"}));
  EXPECT_EQ(rec.events.size(), 3u);
  EXPECT_EQ(rec.dropped_events, 2u);
}

TEST(Timeline, HeaderKeepsFiveCodesAndSeparatesAttentionCodes) {
  auto in = base_inputs();
  const std::vector<std::string> codes{"42731", "5307", "45340", "V551", "4280", "5849", "4019"};
  for (std::size_t i = 0; i < codes.size(); ++i) {
    nf::CodedEvent e;
    e.code = codes[i];
    e.seq_num = static_cast<int>(codes.size() - i);  // reverse order by seq_num
    e.description = "d" + codes[i];
    in.diagnoses.push_back(e);
  }
  const auto rec = nf::build_timeline(in, vocab(nf::ItemKind::drug, {}), vocab(nf::ItemKind::chart_item, {}));
  const auto& h = rec.header;
  EXPECT_EQ(h.diagnoses.size() + h.attention.size(), nf::kMaxCodesPerKind);
  ASSERT_EQ(h.attention.size(), 1u);
  EXPECT_EQ(h.attention[0].code, "V551");
  EXPECT_EQ(h.diagnoses.front().code, "4019");  // seq_num 1
  EXPECT_EQ(nf::header_lines(rec).size(), nf::kHeaderLineCount);
}

TEST(RenderInput, EmptyRecordHasHeaderAndMarkersOnly) {
  const auto rec = nf::build_timeline(base_inputs(), vocab(nf::ItemKind::drug, {}), vocab(nf::ItemKind::chart_item, {}));
  for (auto v : {nf::InputVariant::table_only, nf::InputVariant::text_only, nf::InputVariant::table_and_text}) {
    const std::string text = nf::render_input(rec, v);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n') + 1, static_cast<long>(nf::kHeaderLineCount + 2));
  }
}

TEST(RenderInput, TableOnlyHidesNotes) {
  auto in = base_inputs();
  nf::NoteRow n;
  n.category = nf::NoteCategory::physician;
  n.chartdate = nf_test::date("2121-05-30");
  n.raw_text = "Assessment: stable";
  in.notes = {nf::process_note(n)};
  const auto rec = nf::build_timeline(in, vocab(nf::ItemKind::drug, {}), vocab(nf::ItemKind::chart_item, {}));
  ASSERT_EQ(rec.events.size(), 3u);
  const std::string table = nf::render_input(rec, nf::InputVariant::table_only);
  EXPECT_EQ(table.find("NOTE:"), std::string::npos);
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n') + 1, static_cast<long>(nf::kHeaderLineCount + 2));
}

TEST(RenderInput, VariantLineCountsAndMultisetUnion) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 50; ++i) {
    const auto fuzz = nf_test::fuzz_timeline_inputs(rng);
    const auto rec = nf::build_timeline(fuzz.inputs, fuzz.drugs, fuzz.chart_items);
    auto event_lines = [&](nf::InputVariant v) {
      std::vector<std::string> lines;
      const std::string text = nf::render_input(rec, v);
      std::size_t start = 0;
      for (std::size_t k = 0; k < nf::kHeaderLineCount; ++k) start = text.find('\n', start) + 1;
      std::string_view rest(text);
      rest.remove_prefix(start);
      std::size_t pos = 0;
      while (pos <= rest.size()) {
        const std::size_t nl = rest.find('\n', pos);
        lines.emplace_back(rest.substr(pos, nl == std::string_view::npos ? rest.size() - pos : nl - pos));
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
      }
      return lines;
    };
    const auto both = event_lines(nf::InputVariant::table_and_text);
    EXPECT_EQ(both.size(), rec.events.size());
    auto table = event_lines(nf::InputVariant::table_only);
    const auto text = event_lines(nf::InputVariant::text_only);
    // The admission/discharge markers appear in both partial variants.
    std::multiset<std::string> merged(table.begin(), table.end());
    merged.insert(text.begin(), text.end());
    merged.erase(merged.find(both.front()));
    merged.erase(merged.find(both.back()));
    EXPECT_EQ(merged, std::multiset<std::string>(both.begin(), both.end()));
    EXPECT_EQ(nf::render_input(rec, nf::InputVariant::table_and_text),
              nf::render_input(nf::build_timeline(fuzz.inputs, fuzz.drugs, fuzz.chart_items),
                               nf::InputVariant::table_and_text));
  }
}

TEST(RenderInstruction, ContainsTitlesAndEndsWithInput) {
  std::mt19937_64 rng(4);
  const auto fuzz = nf_test::fuzz_timeline_inputs(rng);
  const auto rec = nf::build_timeline(fuzz.inputs, fuzz.drugs, fuzz.chart_items);
  const auto empty = nf::build_timeline(base_inputs(), vocab(nf::ItemKind::drug, {}), vocab(nf::ItemKind::chart_item, {}));
  for (const auto* r : {&rec, &empty}) {
    const std::string prompt = nf::render_instruction(*r);
    for (auto title : nf::kSummarySectionTitles) EXPECT_NE(prompt.find(title), std::string::npos) << title;
    const std::string input = nf::render_input(*r, nf::InputVariant::table_and_text);
    ASSERT_GE(prompt.size(), input.size());
    EXPECT_EQ(prompt.substr(prompt.size() - input.size()), input);
  }
}

TEST(TimelineInvariants, FuzzedAdmissions) {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 300; ++i) {
    const auto fuzz = nf_test::fuzz_timeline_inputs(rng);
    const auto rec = nf::build_timeline(fuzz.inputs, fuzz.drugs, fuzz.chart_items);
    EXPECT_EQ(nf_test::timeline_violations(fuzz, rec), "") << "case " << i;
  }
}
