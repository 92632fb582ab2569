#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "note_forge/emr.hpp"

namespace note_forge {

struct CohortCriteria {
  int min_age_years = 19;
  double max_los_days = 7.0;  // exclusive
  int max_ds_words = 500;     // inclusive

  void validate() const;
};

struct AgeResult {
  int years = 0;
  bool clamped = false;  // de-identified >89 ages shifted past 120 years
};

// floor((admittime - dob) / 365.25 days); ages above 120 become 90 and are flagged.
AgeResult compute_age(Timestamp dob, Timestamp admittime);

// Fixed evaluation order; an excluded admission reports the first rule it fails.
enum class ExclusionReason { age, los, ds_missing, ds_length };

std::string_view to_string(ExclusionReason reason);

struct CohortMembership {
  std::vector<HadmId> members;  // ascending
  std::map<HadmId, ExclusionReason> excluded;
  // Reference discharge summary note (row_id) of each member.
  std::map<HadmId, std::int64_t> reference_note;

  bool contains(HadmId id) const;
  std::map<ExclusionReason, std::size_t> exclusion_histogram() const;
};

// The earliest DS note by (chartdate, row_id) among `notes` for the admission, or
// nullptr. Later DS notes are addenda.
const NoteRow* reference_discharge_note(std::span<const NoteRow* const> notes);

CohortMembership select_cohort(const AdmissionIndex& index, std::span<const NoteRow> notes,
                               const CohortCriteria& criteria);

enum class ItemKind { drug, chart_item };

struct ItemVocabulary {
  ItemKind kind = ItemKind::drug;
  double threshold = 0;
  std::size_t cohort_patients = 0;
  // Coverage (fraction of cohort patients with the item) of every item seen.
  std::map<std::string, double> coverage;
  std::vector<std::string> retained;  // ascending

  bool contains(const std::string& key) const;
};

// One (patient, admission, item) occurrence.
struct ItemOccurrence {
  SubjectId subject_id = 0;
  HadmId hadm_id = 0;
  std::string key;
};

// Item retained iff distinct cohort patients with it / distinct cohort patients > threshold.
// Occurrences outside the cohort are ignored. Throws ValidationError for an empty
// cohort or a threshold outside (0, 1).
ItemVocabulary build_item_vocabulary(std::span<const ItemOccurrence> occurrences,
                                     const CohortMembership& cohort, const AdmissionIndex& index,
                                     ItemKind kind, double threshold);

ItemVocabulary build_drug_vocabulary(std::span<const Prescription> prescriptions,
                                     const CohortMembership& cohort, const AdmissionIndex& index,
                                     double threshold);

ItemVocabulary build_chart_vocabulary(std::span<const ChartObservation> observations,
                                      const CohortMembership& cohort, const AdmissionIndex& index,
                                      double threshold);

}  // namespace note_forge
