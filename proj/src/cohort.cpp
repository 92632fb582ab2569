#include "note_forge/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "note_forge/notes.hpp"
#include "note_forge/strings.hpp"

namespace note_forge {

void CohortCriteria::validate() const {
  if (min_age_years <= 0) throw ValidationError("min_age_years must be positive");
  if (!(max_los_days > 0) || !std::isfinite(max_los_days)) throw ValidationError("max_los_days must be positive");
  if (max_ds_words <= 0) throw ValidationError("max_ds_words must be positive");
}

AgeResult compute_age(Timestamp dob, Timestamp admittime) {
  if (admittime < dob) throw ValidationError("admission precedes date of birth");
  // 365.25 days = 31557600 s, so integer division is exact floor.
  const std::int64_t years = (admittime.seconds - dob.seconds) / 31557600;
  if (years > 120) return {90, true};
  return {static_cast<int>(years), false};
}

std::string_view to_string(ExclusionReason reason) {
  switch (reason) {
    case ExclusionReason::age: return "age";
    case ExclusionReason::los: return "los";
    case ExclusionReason::ds_missing: return "ds_missing";
    case ExclusionReason::ds_length: return "ds_length";
  }
  return "?";
}

bool CohortMembership::contains(HadmId id) const {
  return std::binary_search(members.begin(), members.end(), id);
}

std::map<ExclusionReason, std::size_t> CohortMembership::exclusion_histogram() const {
  std::map<ExclusionReason, std::size_t> h;
  for (const auto& [id, reason] : excluded) ++h[reason];
  return h;
}

const NoteRow* reference_discharge_note(std::span<const NoteRow* const> notes) {
  const NoteRow* best = nullptr;
  for (const NoteRow* n : notes) {
    if (n->category != NoteCategory::discharge_summary) continue;
    if (!best || std::tie(n->chartdate, n->row_id) < std::tie(best->chartdate, best->row_id)) best = n;
  }
  return best;
}

CohortMembership select_cohort(const AdmissionIndex& index, std::span<const NoteRow> notes,
                               const CohortCriteria& criteria) {
  criteria.validate();
  std::unordered_map<HadmId, std::vector<const NoteRow*>> ds_by_hadm;
  for (const NoteRow& n : notes) {
    if (n.hadm_id && n.category == NoteCategory::discharge_summary) ds_by_hadm[*n.hadm_id].push_back(&n);
  }

  const auto max_los_seconds = criteria.max_los_days * static_cast<double>(kSecondsPerDay);
  CohortMembership out;
  for (HadmId id : index.sorted_ids()) {
    const AdmissionEntry& entry = *index.find(id);
    const Admission& adm = entry.admission;
    if (adm.admittime < entry.patient.dob ||
        compute_age(entry.patient.dob, adm.admittime).years < criteria.min_age_years) {
      out.excluded.emplace(id, ExclusionReason::age);
      continue;
    }
    if (static_cast<double>(adm.dischtime.seconds - adm.admittime.seconds) >= max_los_seconds) {
      out.excluded.emplace(id, ExclusionReason::los);
      continue;
    }
    auto it = ds_by_hadm.find(id);
    const NoteRow* ds = it == ds_by_hadm.end() ? nullptr : reference_discharge_note(it->second);
    if (!ds) {
      out.excluded.emplace(id, ExclusionReason::ds_missing);
      continue;
    }
    if (word_count(clean_text(ds->raw_text)) > static_cast<std::size_t>(criteria.max_ds_words)) {
      out.excluded.emplace(id, ExclusionReason::ds_length);
      continue;
    }
    out.members.push_back(id);
    out.reference_note.emplace(id, ds->row_id);
  }
  return out;
}

bool ItemVocabulary::contains(const std::string& key) const {
  return std::binary_search(retained.begin(), retained.end(), key);
}

ItemVocabulary build_item_vocabulary(std::span<const ItemOccurrence> occurrences,
                                     const CohortMembership& cohort, const AdmissionIndex& index,
                                     ItemKind kind, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw ValidationError("threshold must lie in (0, 1)");
  std::set<SubjectId> patients;
  for (HadmId id : cohort.members) {
    if (const AdmissionEntry* e = index.find(id)) patients.insert(e->patient.subject_id);
  }
  if (patients.empty()) throw ValidationError("cannot build a vocabulary over an empty cohort");

  std::map<std::string, std::set<SubjectId>> holders;
  for (const ItemOccurrence& occ : occurrences) {
    if (!cohort.contains(occ.hadm_id)) continue;
    holders[occ.key].insert(occ.subject_id);
  }

  ItemVocabulary vocab;
  vocab.kind = kind;
  vocab.threshold = threshold;
  vocab.cohort_patients = patients.size();
  const auto total = static_cast<double>(patients.size());
  for (const auto& [key, subjects] : holders) {
    const double coverage = static_cast<double>(subjects.size()) / total;
    vocab.coverage.emplace(key, coverage);
    if (coverage > threshold) vocab.retained.push_back(key);
  }
  return vocab;
}

ItemVocabulary build_drug_vocabulary(std::span<const Prescription> prescriptions,
                                     const CohortMembership& cohort, const AdmissionIndex& index,
                                     double threshold) {
  std::vector<ItemOccurrence> occ;
  occ.reserve(prescriptions.size());
  for (const Prescription& p : prescriptions) occ.push_back({p.subject_id, p.hadm_id, p.drug});
  return build_item_vocabulary(occ, cohort, index, ItemKind::drug, threshold);
}

ItemVocabulary build_chart_vocabulary(std::span<const ChartObservation> observations,
                                      const CohortMembership& cohort, const AdmissionIndex& index,
                                      double threshold) {
  std::vector<ItemOccurrence> occ;
  occ.reserve(observations.size());
  for (const ChartObservation& c : observations) {
    occ.push_back({c.subject_id, c.hadm_id, std::to_string(c.item_id)});
  }
  return build_item_vocabulary(occ, cohort, index, ItemKind::chart_item, threshold);
}

}  // namespace note_forge
