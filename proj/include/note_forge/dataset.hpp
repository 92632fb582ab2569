#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "note_forge/error.hpp"
#include "note_forge/timeline.hpp"
#include "note_forge/toml.hpp"

namespace note_forge {

struct SplitSizes {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
};

// test = ceil(n * test_fraction); validation = ceil((n - test) * val_fraction);
// train takes the rest. Throws ValidationError for n < 3, fractions outside (0, 1)
// or an empty partition.
SplitSizes split_sizes(std::size_t n, double test_fraction = 0.2, double val_fraction = 0.2);

struct DatasetSplit {
  std::vector<HadmId> train;
  std::vector<HadmId> validation;
  std::vector<HadmId> test;
  std::uint64_t seed = 0;

  bool operator==(const DatasetSplit&) const = default;
};

// Seeded Fisher-Yates over the ids in ascending order, so the result does not
// depend on input order. Portable across standard libraries.
DatasetSplit split(std::span<const HadmId> ids, std::uint64_t seed, double test_fraction = 0.2,
                   double val_fraction = 0.2);

// Deterministic permutation used by split().
void seeded_shuffle(std::vector<HadmId>& ids, std::uint64_t seed);

struct SftExample {
  HadmId hadm_id = 0;
  std::string input;
  std::string reference;

  bool operator==(const SftExample&) const = default;
};

struct SftDataset {
  std::vector<SftExample> train;
  std::vector<SftExample> validation;
  std::vector<SftExample> test;
};

SftDataset build_sft_dataset(std::span<const SequentialRecord> records, const DatasetSplit& split,
                             InputVariant variant);

struct PreferencePair {
  std::string prompt;
  std::string chosen;
  std::string rejected;

  bool operator==(const PreferencePair&) const = default;
};

struct PreferencePairs {
  std::vector<PreferencePair> pairs;
  std::vector<std::string> warnings;
};

// prompt = render_instruction, chosen = reference summary, rejected = the weak
// model's summary. Pairs whose chosen and rejected texts are equal are dropped
// with a warning. Throws ValidationError naming the first record without a
// rejected summary.
PreferencePairs build_preference_pairs(std::span<const SequentialRecord> records,
                                       const std::map<HadmId, std::string>& rejected);

template <typename Scalar>
struct DpoLoss {
  Scalar loss;
  Scalar margin;
};

// margin = beta * ((policy_chosen - ref_chosen) - (policy_rejected - ref_rejected)),
// loss = -log(sigmoid(margin)) = softplus(-margin), evaluated without overflow.
template <typename Scalar>
DpoLoss<Scalar> dpo_loss(Scalar policy_chosen, Scalar policy_rejected, Scalar ref_chosen, Scalar ref_rejected,
                         Scalar beta) {
  using std::exp;
  using std::isfinite;
  using std::log1p;
  if (!isfinite(policy_chosen) || !isfinite(policy_rejected) || !isfinite(ref_chosen) ||
      !isfinite(ref_rejected) || !isfinite(beta)) {
    throw ValidationError("dpo_loss: non-finite input");
  }
  if (!(beta > Scalar(0))) throw ValidationError("dpo_loss: beta must be positive");
  const Scalar margin = beta * ((policy_chosen - ref_chosen) - (policy_rejected - ref_rejected));
  const Scalar x = -margin;
  const Scalar loss = (x > Scalar(0) ? x : Scalar(0)) + log1p(exp(-(x > Scalar(0) ? x : -x)));
  return {loss, margin};
}

struct LoraSettings {
  std::int64_t r = 16;
  std::int64_t alpha = 16;
  double dropout = 0.05;
  std::vector<std::string> targets{"q", "k", "v", "o", "gate"};

  bool operator==(const LoraSettings&) const = default;
};

struct PhaseSettings {
  std::int64_t train_batch = 4;
  std::int64_t eval_batch = 8;
  std::string optimizer = "paged adamw 8bit";
  std::string scheduler = "cosine";
  std::int64_t grad_accum = 2;

  bool operator==(const PhaseSettings&) const = default;
};

struct DpoSettings : PhaseSettings {
  double beta = 0.1;  // not part of the published parameter table

  bool operator==(const DpoSettings&) const = default;
};

struct TrainingConfig {
  LoraSettings lora;
  PhaseSettings sft;
  DpoSettings dpo = [] {
    DpoSettings d;
    d.train_batch = 1;
    d.eval_batch = 1;
    return d;
  }();

  bool operator==(const TrainingConfig&) const = default;
};

std::vector<std::string> training_config_keys();

// Overrides use dotted keys ("dpo.beta"); an unambiguous leaf ("beta") also works.
// Unknown or ambiguous keys throw ValidationError listing the valid keys.
TrainingConfig apply_overrides(TrainingConfig config, const std::map<std::string, std::string>& overrides);

std::string to_toml(const TrainingConfig& config);
TrainingConfig training_config_from_toml(std::string_view text);

// Defaults merged with overrides, rendered as TOML.
std::string export_training_config(const std::map<std::string, std::string>& overrides);

}  // namespace note_forge
