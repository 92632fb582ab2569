#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "note_forge/cohort.hpp"
#include "note_forge/emr.hpp"
#include "note_forge/notes.hpp"
#include "note_forge/strings.hpp"
#include "support.hpp"

namespace nf = note_forge;
using nf_test::ts;

namespace {

std::string words(std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += (i ? " w" : "w") + std::to_string(i % 7);
  return out;
}

struct Builder {
  std::vector<nf::Patient> patients;
  std::vector<nf::Admission> admissions;
  std::vector<nf::NoteRow> notes;
  std::int64_t next_row = 1;

  // Adds a patient with one admission and (optionally) a DS note of `ds_words` words.
  nf::HadmId add(nf::Timestamp dob, nf::Timestamp admit, nf::Timestamp disch, std::optional<std::size_t> ds_words) {
    const nf::SubjectId subject = static_cast<nf::SubjectId>(patients.size() + 1);
    const nf::HadmId hadm = 1000 + subject;
    patients.push_back({subject, nf::Gender::female, dob, {}, patients.size() + 1});
    nf::Admission a;
    a.subject_id = subject;
    a.hadm_id = hadm;
    a.admittime = admit;
    a.dischtime = disch;
    admissions.push_back(a);
    if (ds_words) add_note(subject, hadm, nf::NoteCategory::discharge_summary, disch, words(*ds_words));
    return hadm;
  }

  void add_note(nf::SubjectId subject, nf::HadmId hadm, nf::NoteCategory c, nf::Timestamp when, std::string text) {
    nf::NoteRow n;
    n.row_id = next_row++;
    n.subject_id = subject;
    n.hadm_id = hadm;
    n.chartdate = nf::date_of(when);
    n.category = c;
    n.raw_text = std::move(text);
    n.source_row = static_cast<std::size_t>(n.row_id);
    notes.push_back(n);
  }

  nf::CohortMembership select(const nf::CohortCriteria& c = {}) const {
    return nf::select_cohort(nf::build_admission_index(patients, admissions), notes, c);
  }
};

const nf::Timestamp kDob = ts("2100-01-01 00:00:00");

}  // namespace

TEST(Age, DobEqualsAdmission) {
  const auto a = nf::compute_age(kDob, kDob);
  EXPECT_EQ(a.years, 0);
  EXPECT_FALSE(a.clamped);
}

TEST(Age, ShiftedDatesPatient) {
  const auto a = nf::compute_age(ts("2040-03-16 00:00:00"), ts("2121-05-29 14:20:00"));
  EXPECT_GE(a.years, 80);
  EXPECT_EQ(a.years, 81);  // 81.2 years
  EXPECT_FALSE(a.clamped);
}

TEST(Age, DeidentifiedAgeClamped) {
  const auto a = nf::compute_age(ts("1850-01-01 00:00:00"), ts("2150-01-01 00:00:00"));
  EXPECT_EQ(a.years, 90);
  EXPECT_TRUE(a.clamped);
}

TEST(Age, UsesJulianYears) {
  // 19 * 365.25 days is exactly 19 years; one second less is 18.
  const nf::Timestamp at19{kDob.seconds + static_cast<std::int64_t>(19 * 365.25 * 86400)};
  EXPECT_EQ(nf::compute_age(kDob, at19).years, 19);
  EXPECT_EQ(nf::compute_age(kDob, {at19.seconds - 1}).years, 18);
}

TEST(Age, AdmissionBeforeBirthIsAnError) {
  EXPECT_THROW(nf::compute_age(kDob, {kDob.seconds - 1}), nf::ValidationError);
}

TEST(Cohort, AgeBoundary) {
  Builder b;
  const nf::Timestamp at19{kDob.seconds + static_cast<std::int64_t>(19 * 365.25 * 86400)};
  const auto young = b.add(kDob, {at19.seconds - 3600}, {at19.seconds + 86400}, 100);
  const auto ok = b.add(kDob, at19, {at19.seconds + 86400}, 100);
  const auto m = b.select();
  EXPECT_FALSE(m.contains(young));
  EXPECT_EQ(m.excluded.at(young), nf::ExclusionReason::age);
  EXPECT_TRUE(m.contains(ok));
}

TEST(Cohort, LengthOfStayBoundary) {
  Builder b;
  const auto admit = ts("2150-03-01 10:00:00");
  const auto seven = b.add(kDob, admit, ts("2150-03-08 10:00:00"), 100);
  const auto almost = b.add(kDob, admit, ts("2150-03-08 09:00:00"), 100);
  const auto m = b.select();
  EXPECT_EQ(m.excluded.at(seven), nf::ExclusionReason::los);
  EXPECT_TRUE(m.contains(almost));
}

TEST(Cohort, DischargeSummaryLengthBoundary) {
  Builder b;
  const auto admit = ts("2150-03-01 10:00:00");
  const auto disch = ts("2150-03-03 10:00:00");
  const auto at500 = b.add(kDob, admit, disch, 500);
  const auto at501 = b.add(kDob, admit, disch, 501);
  const auto none = b.add(kDob, admit, disch, std::nullopt);
  const auto m = b.select();
  EXPECT_TRUE(m.contains(at500));
  EXPECT_EQ(m.excluded.at(at501), nf::ExclusionReason::ds_length);
  EXPECT_EQ(m.excluded.at(none), nf::ExclusionReason::ds_missing);
}

TEST(Cohort, WordsAreCountedAfterCleaning) {
  Builder b;
  const auto admit = ts("2150-03-01 10:00:00");
  const auto disch = ts("2150-03-03 10:00:00");
  // 499 words plus a multi-word de-identification span that cleans to one token.
  const auto hadm = b.add(kDob, admit, disch, std::nullopt);
  b.add_note(1, hadm, nf::NoteCategory::discharge_summary, disch,
             words(499) + " [**Last Name (NamePattern1) 1234**]");
  EXPECT_EQ(nf::word_count(nf::clean_text(b.notes.back().raw_text)), 500u);
  EXPECT_TRUE(b.select().contains(hadm));
}

TEST(Cohort, FirstFailingRuleIsReported) {
  Builder b;
  // Fails age, LOS and DS-exists: age is reported.
  const auto h = b.add(ts("2140-01-01 00:00:00"), ts("2150-03-01 10:00:00"), ts("2150-03-20 10:00:00"), std::nullopt);
  EXPECT_EQ(b.select().excluded.at(h), nf::ExclusionReason::age);
}

TEST(Cohort, EarliestDischargeSummaryIsTheReference) {
  Builder b;
  const auto disch = ts("2150-03-03 10:00:00");
  const auto h = b.add(kDob, ts("2150-03-01 10:00:00"), disch, 10);
  b.add_note(1, h, nf::NoteCategory::discharge_summary, {disch.seconds + 3 * 86400}, words(900));  // addendum
  const auto m = b.select();
  EXPECT_TRUE(m.contains(h));
  EXPECT_EQ(m.reference_note.at(h), 1);
}

TEST(Cohort, HistogramPartitionsExclusions) {
  Builder b;
  const auto admit = ts("2150-03-01 10:00:00");
  b.add(kDob, admit, ts("2150-03-02 10:00:00"), 10);
  b.add(kDob, admit, ts("2150-03-12 10:00:00"), 10);
  b.add(kDob, admit, ts("2150-03-02 10:00:00"), std::nullopt);
  const auto m = b.select();
  const auto hist = m.exclusion_histogram();
  std::size_t total = 0;
  for (const auto& [reason, count] : hist) total += count;
  EXPECT_EQ(total, m.excluded.size());
  EXPECT_EQ(m.members.size() + m.excluded.size(), 3u);
}

TEST(Cohort, TighterCriteriaNeverAddMembers) {
  std::mt19937_64 rng(11);
  Builder b;
  for (int i = 0; i < 200; ++i) {
    const nf::Timestamp dob{kDob.seconds + static_cast<std::int64_t>(rng() % (40ull * 365 * 86400))};
    const nf::Timestamp admit{ts("2150-01-01 00:00:00").seconds + static_cast<std::int64_t>(rng() % (3650ull * 86400))};
    const nf::Timestamp disch{admit.seconds + 3600 + static_cast<std::int64_t>(rng() % (10ull * 86400))};
    std::optional<std::size_t> ds;
    if (rng() % 10) ds = rng() % 700;
    b.add(dob, admit, disch, ds);
  }
  nf::CohortCriteria loose{19, 7.0, 500};
  const auto base = b.select(loose);
  for (nf::CohortCriteria tight : {nf::CohortCriteria{30, 7.0, 500}, nf::CohortCriteria{19, 3.0, 500},
                                   nf::CohortCriteria{19, 7.0, 200}, nf::CohortCriteria{40, 2.0, 100}}) {
    const auto m = b.select(tight);
    for (auto id : m.members) EXPECT_TRUE(base.contains(id));
    EXPECT_LE(m.members.size(), base.members.size());
  }
}

TEST(Cohort, IndependentOfNoteOrder) {
  Builder b;
  const auto admit = ts("2150-03-01 10:00:00");
  for (int i = 0; i < 30; ++i) b.add(kDob, admit, ts("2150-03-03 10:00:00"), 100 + 20 * i);
  const auto first = b.select();
  std::mt19937 rng(3);
  std::shuffle(b.notes.begin(), b.notes.end(), rng);
  std::shuffle(b.admissions.begin(), b.admissions.end(), rng);
  const auto second = b.select();
  EXPECT_EQ(first.members, second.members);
  EXPECT_EQ(first.excluded, second.excluded);
  EXPECT_EQ(first.reference_note, second.reference_note);
}

TEST(Cohort, CriteriaValidation) {
  EXPECT_THROW((nf::CohortCriteria{0, 7.0, 500}.validate()), nf::ValidationError);
  EXPECT_THROW((nf::CohortCriteria{19, 0.0, 500}.validate()), nf::ValidationError);
  EXPECT_THROW((nf::CohortCriteria{19, 7.0, 0}.validate()), nf::ValidationError);
}

namespace {

struct TenPatients {
  nf::AdmissionIndex index;
  nf::CohortMembership cohort;

  TenPatients() {
    std::vector<nf::Patient> patients;
    std::vector<nf::Admission> admissions;
    for (int i = 1; i <= 10; ++i) {
      patients.push_back({i, nf::Gender::male, kDob, {}, static_cast<std::size_t>(i)});
      nf::Admission a;
      a.subject_id = i;
      a.hadm_id = 100 + i;
      a.admittime = ts("2150-01-01 00:00:00");
      a.dischtime = ts("2150-01-02 00:00:00");
      admissions.push_back(a);
      cohort.members.push_back(a.hadm_id);
    }
    index = nf::build_admission_index(patients, admissions);
  }

  std::vector<nf::ItemOccurrence> occurrences(const std::string& key, int patients) const {
    std::vector<nf::ItemOccurrence> out;
    for (int i = 1; i <= patients; ++i) {
      out.push_back({i, 100 + i, key});
      out.push_back({i, 100 + i, key});  // repeated records count once
    }
    return out;
  }
};

}  // namespace

TEST(Vocabulary, UniversalItemRetained) {
  TenPatients t;
  const auto v = nf::build_item_vocabulary(t.occurrences("hr", 10), t.cohort, t.index, nf::ItemKind::chart_item, 0.5);
  EXPECT_DOUBLE_EQ(v.coverage.at("hr"), 1.0);
  EXPECT_TRUE(v.contains("hr"));
}

TEST(Vocabulary, StrictThresholdDropsBoundaryItem) {
  TenPatients t;
  const auto v = nf::build_item_vocabulary(t.occurrences("Levofloxacin", 1), t.cohort, t.index, nf::ItemKind::drug, 0.10);
  EXPECT_DOUBLE_EQ(v.coverage.at("Levofloxacin"), 1.0 / 10.0);
  EXPECT_FALSE(v.contains("Levofloxacin"));
}

TEST(Vocabulary, SixOfTenChartItemRetained) {
  TenPatients t;
  const auto v = nf::build_item_vocabulary(t.occurrences("platelets", 6), t.cohort, t.index, nf::ItemKind::chart_item, 0.5);
  EXPECT_DOUBLE_EQ(v.coverage.at("platelets"), 0.6);
  EXPECT_TRUE(v.contains("platelets"));
  const auto five = nf::build_item_vocabulary(t.occurrences("inr", 5), t.cohort, t.index, nf::ItemKind::chart_item, 0.5);
  EXPECT_FALSE(five.contains("inr"));
}

TEST(Vocabulary, DenominatorIsDistinctPatients) {
  TenPatients t;
  // Patient 1 gets a second cohort admission: still ten patients.
  auto occ = t.occurrences("x", 1);
  t.cohort.members.push_back(999);
  std::vector<nf::Patient> patients;
  std::vector<nf::Admission> admissions;
  for (const auto& [id, e] : t.index.entries) {
    admissions.push_back(e.admission);
    if (std::none_of(patients.begin(), patients.end(), [&](const auto& p) { return p.subject_id == e.patient.subject_id; }))
      patients.push_back(e.patient);
  }
  nf::Admission extra = t.index.find(101)->admission;
  extra.hadm_id = 999;
  admissions.push_back(extra);
  t.index = nf::build_admission_index(patients, admissions);
  std::sort(t.cohort.members.begin(), t.cohort.members.end());
  occ.push_back({1, 999, "x"});
  const auto v = nf::build_item_vocabulary(occ, t.cohort, t.index, nf::ItemKind::drug, 0.05);
  EXPECT_EQ(v.cohort_patients, 10u);
  EXPECT_DOUBLE_EQ(v.coverage.at("x"), 0.1);
}

TEST(Vocabulary, OccurrencesOutsideTheCohortAreIgnored) {
  TenPatients t;
  auto occ = t.occurrences("a", 2);
  occ.push_back({77, 7777, "b"});
  const auto v = nf::build_item_vocabulary(occ, t.cohort, t.index, nf::ItemKind::drug, 0.1);
  EXPECT_FALSE(v.coverage.contains("b"));
}

TEST(Vocabulary, RaisingThresholdNeverAddsItems) {
  TenPatients t;
  std::vector<nf::ItemOccurrence> occ;
  for (int k = 1; k <= 10; ++k) {
    auto o = t.occurrences("item" + std::to_string(k), k);
    occ.insert(occ.end(), o.begin(), o.end());
  }
  std::size_t previous = SIZE_MAX;
  for (double th = 0.05; th < 1.0; th += 0.05) {
    const auto v = nf::build_item_vocabulary(occ, t.cohort, t.index, nf::ItemKind::drug, th);
    EXPECT_LE(v.retained.size(), previous);
    previous = v.retained.size();
  }
}

TEST(Vocabulary, Errors) {
  TenPatients t;
  EXPECT_THROW(nf::build_item_vocabulary({}, {}, t.index, nf::ItemKind::drug, 0.1), nf::ValidationError);
  EXPECT_THROW(nf::build_item_vocabulary({}, t.cohort, t.index, nf::ItemKind::drug, 1.0), nf::ValidationError);
  EXPECT_THROW(nf::build_item_vocabulary({}, t.cohort, t.index, nf::ItemKind::drug, 0.0), nf::ValidationError);
}

TEST(Vocabulary, FixtureDropsSinglePatientItems) {
  const auto tables = nf::load_emr_directory(nf_test::fixtures_dir());
  const auto index = nf::build_admission_index(tables.patients, tables.admissions);
  const auto cohort = nf::select_cohort(index, tables.notes, {});
  const auto chart = nf::build_chart_vocabulary(tables.chartevents, cohort, index, 0.5);
  EXPECT_FALSE(chart.contains("223762"));
  EXPECT_TRUE(chart.contains("220045"));
  const auto drugs = nf::build_drug_vocabulary(tables.prescriptions, cohort, index, 0.1);
  EXPECT_TRUE(drugs.contains("Heparin Sodium"));
  for (const auto& [key, cov] : drugs.coverage) EXPECT_EQ(drugs.contains(key), cov > 0.1) << key;
}
