#include "note_forge/dataset.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <unordered_map>

#include "note_forge/strings.hpp"

namespace note_forge {

namespace {

// ceil with a small tolerance so that e.g. 10 * 0.2 = 2.0000000000000004 stays 2.
std::size_t tolerant_ceil(double x) { return static_cast<std::size_t>(std::ceil(x - 1e-9)); }

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
  while (true) {
    const std::uint64_t x = rng();
    if (x >= threshold) return x % n;
  }
}

}  // namespace

SplitSizes split_sizes(std::size_t n, double test_fraction, double val_fraction) {
  if (!(test_fraction > 0 && test_fraction < 1) || !(val_fraction > 0 && val_fraction < 1)) {
    throw ValidationError("split fractions must lie in (0, 1)");
  }
  if (n < 3) throw ValidationError("split needs at least 3 records, got " + std::to_string(n));
  SplitSizes s;
  s.test = tolerant_ceil(static_cast<double>(n) * test_fraction);
  if (s.test >= n) throw ValidationError("test fraction leaves no records for training");
  const std::size_t rest = n - s.test;
  s.validation = tolerant_ceil(static_cast<double>(rest) * val_fraction);
  if (s.validation >= rest) throw ValidationError("validation fraction leaves no records for training");
  s.train = rest - s.validation;
  return s;
}

void seeded_shuffle(std::vector<HadmId>& ids, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = ids.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(bounded(rng, i));
    std::swap(ids[i - 1], ids[j]);
  }
}

DatasetSplit split(std::span<const HadmId> ids, std::uint64_t seed, double test_fraction, double val_fraction) {
  std::vector<HadmId> order(ids.begin(), ids.end());
  std::sort(order.begin(), order.end());
  if (std::adjacent_find(order.begin(), order.end()) != order.end()) {
    throw ValidationError("split input contains duplicate ids");
  }
  const SplitSizes sizes = split_sizes(order.size(), test_fraction, val_fraction);
  seeded_shuffle(order, seed);

  DatasetSplit out;
  out.seed = seed;
  auto it = order.begin();
  out.test.assign(it, it + static_cast<std::ptrdiff_t>(sizes.test));
  it += static_cast<std::ptrdiff_t>(sizes.test);
  out.validation.assign(it, it + static_cast<std::ptrdiff_t>(sizes.validation));
  it += static_cast<std::ptrdiff_t>(sizes.validation);
  out.train.assign(it, order.end());
  return out;
}

SftDataset build_sft_dataset(std::span<const SequentialRecord> records, const DatasetSplit& split,
                             InputVariant variant) {
  std::unordered_map<HadmId, const SequentialRecord*> by_id;
  for (const SequentialRecord& r : records) by_id.emplace(r.hadm_id, &r);

  auto build = [&](const std::vector<HadmId>& ids) {
    std::vector<SftExample> out;
    out.reserve(ids.size());
    for (HadmId id : ids) {
      auto it = by_id.find(id);
      if (it == by_id.end()) throw ValidationError("split references unknown hadm_id " + std::to_string(id));
      const SequentialRecord& r = *it->second;
      if (trim(r.reference_summary).empty()) {
        throw ValidationError("record " + std::to_string(id) + " has no reference summary");
      }
      out.push_back({id, render_input(r, variant), r.reference_summary});
    }
    return out;
  };
  return {build(split.train), build(split.validation), build(split.test)};
}

PreferencePairs build_preference_pairs(std::span<const SequentialRecord> records,
                                       const std::map<HadmId, std::string>& rejected) {
  PreferencePairs out;
  for (const SequentialRecord& r : records) {
    auto it = rejected.find(r.hadm_id);
    if (it == rejected.end()) {
      throw ValidationError("no rejected summary for hadm_id " + std::to_string(r.hadm_id));
    }
    PreferencePair pair{render_instruction(r), r.reference_summary, it->second};
    if (trim(pair.chosen).empty() || trim(pair.rejected).empty()) {
      out.warnings.push_back("hadm_id " + std::to_string(r.hadm_id) + ": empty chosen or rejected text, pair dropped");
      continue;
    }
    if (pair.chosen == pair.rejected) {
      out.warnings.push_back("hadm_id " + std::to_string(r.hadm_id) +
                             ": rejected summary equals the reference, pair dropped");
      continue;
    }
    out.pairs.push_back(std::move(pair));
  }
  return out;
}

namespace {

enum class FieldType { integer, decimal, text, list };

struct ConfigField {
  const char* key;
  FieldType type;
};

constexpr ConfigField kConfigFields[] = {
    {"lora.r", FieldType::integer},          {"lora.alpha", FieldType::integer},
    {"lora.dropout", FieldType::decimal},    {"lora.targets", FieldType::list},
    {"sft.train_batch", FieldType::integer}, {"sft.eval_batch", FieldType::integer},
    {"sft.optimizer", FieldType::text},      {"sft.scheduler", FieldType::text},
    {"sft.grad_accum", FieldType::integer},  {"dpo.train_batch", FieldType::integer},
    {"dpo.eval_batch", FieldType::integer},  {"dpo.optimizer", FieldType::text},
    {"dpo.scheduler", FieldType::text},      {"dpo.grad_accum", FieldType::integer},
    {"dpo.beta", FieldType::decimal},
};

PhaseSettings* phase_of(TrainingConfig& c, std::string_view section) {
  if (section == "sft") return &c.sft;
  if (section == "dpo") return &c.dpo;
  return nullptr;
}

void assign(TrainingConfig& c, const std::string& key, const toml::Value& v) {
  auto as_int = [&]() {
    if (!v.is_integer()) throw ValidationError(key + " expects an integer");
    return std::get<std::int64_t>(v.data);
  };
  auto as_double = [&]() {
    if (v.is_integer()) return static_cast<double>(std::get<std::int64_t>(v.data));
    if (!v.is_float()) throw ValidationError(key + " expects a number");
    return std::get<double>(v.data);
  };
  auto as_text = [&]() {
    if (!v.is_string()) throw ValidationError(key + " expects a string");
    return std::get<std::string>(v.data);
  };

  if (key == "lora.r") {
    c.lora.r = as_int();
  } else if (key == "lora.alpha") {
    c.lora.alpha = as_int();
  } else if (key == "lora.dropout") {
    c.lora.dropout = as_double();
  } else if (key == "lora.targets") {
    if (v.is_string()) {
      c.lora.targets.clear();
      std::string s = std::get<std::string>(v.data);
      std::size_t start = 0;
      while (start <= s.size()) {
        std::size_t comma = s.find(',', start);
        if (comma == std::string::npos) comma = s.size();
        std::string part(trim(std::string_view(s).substr(start, comma - start)));
        if (!part.empty()) c.lora.targets.push_back(part);
        start = comma + 1;
      }
    } else if (v.is_array()) {
      c.lora.targets.clear();
      for (const toml::Value& item : std::get<toml::Array>(v.data)) {
        if (!item.is_string()) throw ValidationError("lora.targets expects strings");
        c.lora.targets.push_back(std::get<std::string>(item.data));
      }
    } else {
      throw ValidationError("lora.targets expects a list of strings");
    }
  } else if (key == "dpo.beta") {
    c.dpo.beta = as_double();
    if (!(c.dpo.beta > 0)) throw ValidationError("dpo.beta must be positive");
  } else {
    const std::size_t dot = key.find('.');
    PhaseSettings* phase = phase_of(c, std::string_view(key).substr(0, dot));
    const std::string leaf = key.substr(dot + 1);
    if (leaf == "train_batch") phase->train_batch = as_int();
    else if (leaf == "eval_batch") phase->eval_batch = as_int();
    else if (leaf == "grad_accum") phase->grad_accum = as_int();
    else if (leaf == "optimizer") phase->optimizer = as_text();
    else if (leaf == "scheduler") phase->scheduler = as_text();
  }
}

std::string resolve_key(const std::string& key) {
  std::vector<std::string> matches;
  for (const ConfigField& f : kConfigFields) {
    const std::string full = f.key;
    if (full == key) return full;
    if (full.substr(full.find('.') + 1) == key) matches.push_back(full);
  }
  if (matches.size() == 1) return matches.front();
  const std::string valid = join(training_config_keys(), ", ");
  if (matches.size() > 1) {
    throw ValidationError("ambiguous training config key '" + key + "' (use one of " + join(matches, ", ") + ")");
  }
  throw ValidationError("unknown training config key '" + key + "'; valid keys: " + valid);
}

FieldType type_of(const std::string& full_key) {
  for (const ConfigField& f : kConfigFields) {
    if (full_key == f.key) return f.type;
  }
  return FieldType::text;
}

}  // namespace

std::vector<std::string> training_config_keys() {
  std::vector<std::string> keys;
  for (const ConfigField& f : kConfigFields) keys.emplace_back(f.key);
  return keys;
}

TrainingConfig apply_overrides(TrainingConfig config, const std::map<std::string, std::string>& overrides) {
  for (const auto& [raw_key, raw_value] : overrides) {
    const std::string key = resolve_key(std::string(trim(raw_key)));
    const std::string_view literal = trim(raw_value);
    toml::Value v;
    switch (type_of(key)) {
      case FieldType::integer:
      case FieldType::decimal: v = toml::parse_value(literal); break;
      case FieldType::text:
        v = literal.size() >= 2 && literal.front() == '"' ? toml::parse_value(literal)
                                                          : toml::Value{std::string(literal)};
        break;
      case FieldType::list:
        v = !literal.empty() && literal.front() == '[' ? toml::parse_value(literal)
                                                       : toml::Value{std::string(literal)};
        break;
    }
    assign(config, key, v);
  }
  return config;
}

std::string to_toml(const TrainingConfig& c) {
  auto targets = [&] {
    toml::Array a;
    for (const std::string& t : c.lora.targets) a.push_back({t});
    return toml::format_value({a});
  };
  auto phase = [](std::string& out, const PhaseSettings& p) {
    out += "train_batch = " + std::to_string(p.train_batch) + "\n";
    out += "eval_batch = " + std::to_string(p.eval_batch) + "\n";
    out += "optimizer = " + toml::quote(p.optimizer) + "\n";
    out += "scheduler = " + toml::quote(p.scheduler) + "\n";
    out += "grad_accum = " + std::to_string(p.grad_accum) + "\n";
  };
  std::string out;
  out += "# QLoRA fine-tuning parameters for Mistral-7B-Instruct (SFT then DPO).\n";
  out += "# LoRA, batch, optimizer, scheduler and accumulation defaults are the published\n";
  out += "# training parameters; dpo.beta is a conventional default, not a published value.\n\n";
  out += "[lora]\n";
  out += "r = " + std::to_string(c.lora.r) + "\n";
  out += "alpha = " + std::to_string(c.lora.alpha) + "\n";
  out += "dropout = " + toml::format_value({c.lora.dropout}) + "\n";
  out += "targets = " + targets() + "\n\n";
  out += "[sft]\n";
  phase(out, c.sft);
  out += "\n[dpo]\n";
  phase(out, c.dpo);
  out += "beta = " + toml::format_value({c.dpo.beta}) + "\n";
  return out;
}

TrainingConfig training_config_from_toml(std::string_view text) {
  const toml::Document doc = toml::parse(text);
  TrainingConfig c;
  for (const auto& [key, value] : doc.values()) assign(c, resolve_key(key), value);
  return c;
}

std::string export_training_config(const std::map<std::string, std::string>& overrides) {
  return to_toml(apply_overrides(TrainingConfig{}, overrides));
}

}  // namespace note_forge
