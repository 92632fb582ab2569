// Acceptance runner: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

#include "metric_oracles.hpp"
#include "note_forge/cohort.hpp"
#include "note_forge/dataset.hpp"
#include "note_forge/judge.hpp"
#include "note_forge/log.hpp"
#include "note_forge/metrics.hpp"
#include "note_forge/notes.hpp"
#include "note_forge/pipeline.hpp"
#include "note_forge/strings.hpp"
#include "support.hpp"
#include "timeline_fuzz.hpp"

namespace nf = note_forge;
using Clock = std::chrono::steady_clock;

namespace {

// Collects the first few failure descriptions of one criterion.
struct Check {
  std::ostringstream detail;
  int failures = 0;

  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (failures++ < 3) detail << what << "; ";
  }
  void near(double got, double want, double tol, const std::string& what) {
    std::ostringstream s;
    s.precision(17);
    s << what << " got " << got << " want " << want;
    expect(std::abs(got - want) <= tol, s.str());
  }
};

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

void split_arithmetic(Check& c) {
  std::vector<nf::HadmId> ids(709);
  std::iota(ids.begin(), ids.end(), 200001);
  const auto t = Clock::now();
  for (std::uint64_t seed : {0ULL, 1ULL, 42ULL, 20240101ULL, 0xffffffffffffffffULL}) {
    const auto s = nf::split(ids, seed);
    c.expect(s.train.size() == 453 && s.validation.size() == 114 && s.test.size() == 142,
             "seed " + std::to_string(seed) + " sizes " + std::to_string(s.train.size()) + "/" +
                 std::to_string(s.validation.size()) + "/" + std::to_string(s.test.size()));
  }
  c.expect(seconds_since(t) < 1.0, "split took over 1 s");
}

void cohort_boundaries(Check& c) {
  const auto tables = nf::load_emr_directory(nf_test::fixtures_dir());
  const auto index = nf::build_admission_index(tables.patients, tables.admissions);
  const auto cohort = nf::select_cohort(index, tables.notes, {});
  auto entry = [&](nf::HadmId id) { return index.find(id); };
  auto excluded_for = [&](nf::HadmId id) -> std::string {
    auto it = cohort.excluded.find(id);
    return it == cohort.excluded.end() ? "" : std::string(nf::to_string(it->second));
  };
  auto earliest_ds_words = [&](nf::HadmId id) {
    std::vector<const nf::NoteRow*> ds;
    for (const auto& n : tables.notes) {
      if (n.hadm_id == id && n.category == nf::NoteCategory::discharge_summary) ds.push_back(&n);
    }
    const nf::NoteRow* ref = nf::reference_discharge_note(ds);
    return ref ? nf::word_count(nf::clean_text(ref->raw_text)) : 0;
  };

  const auto* age19 = entry(150028);
  const auto* age18 = entry(150029);
  c.expect(age19 && nf::compute_age(age19->patient.dob, age19->admission.admittime).years == 19, "150028 is not age 19");
  c.expect(age18 && nf::compute_age(age18->patient.dob, age18->admission.admittime).years == 18, "150029 is not age 18");
  c.expect(cohort.contains(150028), "age 19 excluded");
  c.expect(excluded_for(150029) == "age", "age 18 not excluded for age");

  const auto* los7 = entry(150030);
  const auto* los6 = entry(150031);
  c.expect(los7 && los7->admission.dischtime.seconds - los7->admission.admittime.seconds == 7 * 86400, "150030 LOS is not 7 d");
  c.expect(los6 && los6->admission.dischtime.seconds - los6->admission.admittime.seconds == 6 * 86400 + 23 * 3600,
           "150031 LOS is not 6 d 23 h");
  c.expect(excluded_for(150030) == "los", "LOS 7.0 d not excluded");
  c.expect(cohort.contains(150031), "LOS 6 d 23 h excluded");

  c.expect(earliest_ds_words(150032) == 500, "150032 DS is not 500 words");
  c.expect(earliest_ds_words(150033) == 501, "150033 DS is not 501 words");
  c.expect(cohort.contains(150032), "500-word DS excluded");
  c.expect(excluded_for(150033) == "ds_length", "501-word DS not excluded");
}

void metric_oracles(Check& c) {
  const std::vector<std::string> alphabet{"run", "runs", "running", "cat", "sat"};
  std::mt19937_64 rng(20240101);
  auto draw = [&] {
    std::vector<std::string> t(rng() % 9);
    for (auto& w : t) w = alphabet[rng() % alphabet.size()];
    return t;
  };
  const auto cls = [](const std::string& s) { return nf::porter_stem(s); };
  const auto t = Clock::now();
  for (int i = 0; i < 200; ++i) {
    const auto r = draw(), h = draw();
    const nf::TokenSequence rs(r), hs(h);
    const std::string tag = "pair " + std::to_string(i);
    for (int n : {1, 2}) {
      const auto got = nf::rouge_n(rs, hs, n);
      const auto want = nf_test::oracle::rouge_n(r, h, static_cast<std::size_t>(n));
      c.expect(got.precision == want.precision.value() && got.recall == want.recall.value(), tag + " rouge-" + std::to_string(n));
      c.near(got.f1, want.f1(), 1e-12, tag + " rouge-" + std::to_string(n) + " f1");
    }
    const auto gl = nf::rouge_l(rs, hs);
    const auto wl = nf_test::oracle::rouge_l(r, h);
    c.expect(gl.precision == wl.precision.value() && gl.recall == wl.recall.value(), tag + " rouge-L");
    c.near(gl.f1, wl.f1(), 1e-12, tag + " rouge-L f1");
    const double wb = nf_test::oracle::bleu(r, h);
    c.near(nf::bleu(rs, hs), wb, 1e-12 * std::max(wb, 1e-300), tag + " bleu");
    const auto gm = nf::meteor_detail(rs, hs);
    const auto wm = nf_test::oracle::meteor(r, h, cls);
    c.expect(static_cast<std::int64_t>(gm.matches) == wm.matches && static_cast<std::int64_t>(gm.chunks) == wm.chunks,
             tag + " meteor alignment");
    c.near(gm.score, wm.score, 1e-12, tag + " meteor");
  }
  c.expect(seconds_since(t) < 10.0, "oracle comparison took over 10 s");
}

void mmlu(Check& c) {
  nf::Matrix<double> a(2, 2), b(1, 2);
  a << 1, 2, 3, 4;
  b << 0, 1;
  c.expect(nf::mmlu_score(a, b) == 1.0, "truncation example is not 1.0");
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> v(-20, 20);
  for (int i = 0; i < 100; ++i) {
    const int cols = 1 + static_cast<int>(rng() % 64);
    nf::Matrix<double> x(1 + static_cast<int>(rng() % 16), cols), y(1 + static_cast<int>(rng() % 16), cols);
    for (int r = 0; r < x.rows(); ++r) for (int k = 0; k < cols; ++k) x(r, k) = v(rng);
    for (int r = 0; r < y.rows(); ++r) for (int k = 0; k < cols; ++k) y(r, k) = v(rng);
    c.expect(nf::mmlu_score(x, x) == 0.0, "identical logits not exactly 0");
    c.near(nf::mmlu_score(x, y), -nf::mmlu_score(y, x), 1e-12, "antisymmetry");
  }
}

void perplexity(Check& c) {
  const std::vector<double> uniform(100, std::log(1.0 / 50));
  c.near(nf::perplexity(uniform), 50.0, 1e-9, "uniform V=50");
}

void dpo(Check& c) {
  c.near(nf::dpo_loss(-2.0, -2.0, -2.0, -2.0, 0.1).loss, std::log(2.0), 1e-12, "equal inputs");
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> lp(-60, 0), beta(0.01, 1.0);
  const double h = 1e-4;
  for (int i = 0; i < 1000; ++i) {
    const double pc = lp(rng), pr = lp(rng), rc = lp(rng), rr = lp(rng), b = beta(rng);
    const auto base = nf::dpo_loss(pc, pr, rc, rr, b);
    const double sig = 1.0 / (1.0 + std::exp(base.margin));
    const double dc = (nf::dpo_loss(pc + h, pr, rc, rr, b).loss - nf::dpo_loss(pc - h, pr, rc, rr, b).loss) / (2 * h);
    const double dr = (nf::dpo_loss(pc, pr + h, rc, rr, b).loss - nf::dpo_loss(pc, pr - h, rc, rr, b).loss) / (2 * h);
    c.near(dc, -b * sig, 1e-6, "d loss / d chosen");
    c.near(dr, b * sig, 1e-6, "d loss / d rejected");
    c.expect(dc <= 1e-6 && dr >= -1e-6, "loss not monotone");
    const auto swapped = nf::dpo_loss(pr, pc, rr, rc, b);
    const bool ok = base.margin > 0 ? base.loss < swapped.loss : base.margin < 0 ? base.loss > swapped.loss : base.loss == swapped.loss;
    c.expect(ok, "swapped-margin inequality");
  }
}

void timelines(Check& c) {
  std::mt19937_64 rng(31337);
  for (int i = 0; i < 500; ++i) {
    const auto f = nf_test::fuzz_timeline_inputs(rng);
    const auto rec = nf::build_timeline(f.inputs, f.drugs, f.chart_items);
    const std::string v = nf_test::timeline_violations(f, rec);
    c.expect(v.empty(), "admission " + std::to_string(i) + ": " + v);
  }
}

void judge_parser(Check& c) {
  const auto low = nf::parse_scorecard(nf_test::read_file(nf_test::test_data_dir() / "judge_transcript_15.txt"));
  const auto high = nf::parse_scorecard(nf_test::read_file(nf_test::test_data_dir() / "judge_transcript_57.txt"));
  c.expect(low.total == 15 && low.scores == std::array<int, 7>{2, 1, 2, 3, 2, 3, 2} && !low.total_mismatch,
           "low-scoring transcript");
  c.expect(high.total == 57 && high.scores == std::array<int, 7>{8, 7, 8, 9, 8, 9, 8} && !high.total_mismatch,
           "high-scoring transcript");
  const std::vector<std::string> words{"concise", "omits", "the", "dose", "stable", "clear", "order", "labs"};
  std::mt19937_64 rng(99);
  for (int i = 0; i < 1000; ++i) {
    nf::JudgeScorecard card;
    for (std::size_t k = 0; k < nf::kCriterionCount; ++k) {
      card.scores[k] = static_cast<int>(rng() % 11);
      card.total += card.scores[k];
      std::string j;
      for (std::size_t w = rng() % 10; w > 0; --w) j += (j.empty() ? "" : " ") + words[rng() % words.size()];
      card.justifications[k] = j.empty() ? j : j + ".";
    }
    card.stated_total = card.total;
    c.expect(nf::parse_scorecard(nf::format_scorecard(card)) == card, "round trip " + std::to_string(i));
  }
}

void training_config(Check& c) {
  const auto cfg = nf::training_config_from_toml(nf::export_training_config({}));
  c.expect(cfg.lora.r == 16 && cfg.lora.alpha == 16, "lora r/alpha");
  c.expect(cfg.lora.dropout == 0.05, "lora dropout");
  c.expect(cfg.lora.targets == std::vector<std::string>{"q", "k", "v", "o", "gate"}, "lora targets");
  c.expect(cfg.sft.train_batch == 4 && cfg.sft.eval_batch == 8, "sft batches");
  c.expect(cfg.dpo.train_batch == 1 && cfg.dpo.eval_batch == 1, "dpo batches");
  for (const nf::PhaseSettings* p : {static_cast<const nf::PhaseSettings*>(&cfg.sft), static_cast<const nf::PhaseSettings*>(&cfg.dpo)}) {
    c.expect(p->optimizer == "paged adamw 8bit", "optimizer");
    c.expect(p->scheduler == "cosine", "scheduler");
    c.expect(p->grad_accum == 2, "grad accumulation");
  }
}

void end_to_end(Check& c) {
  const auto toml_path = nf_test::fixtures_dir() / "pipeline.toml";
  auto base = nf::pipeline_config_from_toml(nf_test::read_file(toml_path), toml_path.parent_path());
  nf::MockServer server(base.mock);
  server.start();
  for (nf::EndpointConfig* e : {&base.gateway, &base.weak_gateway, &base.judge}) e->base_url = server.url();

  nf_test::TempDir a("accept-a"), b("accept-b");
  const auto t = Clock::now();
  auto run = [&](const std::filesystem::path& out) {
    auto cfg = base;
    cfg.output_dir = out;
    return nf::run_pipeline(cfg);
  };
  const auto ra = run(a.path());
  const auto rb = run(b.path());
  const double elapsed = seconds_since(t);
  server.stop();

  c.expect(ra.evaluated > 0 && ra.preference_pairs > 0, "pipeline produced no evaluations or pairs");
  c.expect(std::filesystem::exists(a.path() / "report.md"), "report.md missing");
  c.expect(ra.files.size() == rb.files.size(), "runs wrote different file sets");
  for (std::size_t i = 0; i < std::min(ra.files.size(), rb.files.size()); ++i) {
    const auto rel = std::filesystem::relative(ra.files[i], a.path());
    c.expect(rel == std::filesystem::relative(rb.files[i], b.path()), "file order differs at " + rel.string());
    c.expect(nf_test::read_file(ra.files[i]) == nf_test::read_file(rb.files[i]), rel.string() + " differs");
  }
  c.expect(elapsed < 60.0, "two runs took " + std::to_string(elapsed) + " s");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
      {"split sizes 453/114/142 for n=709", split_arithmetic},
      {"cohort age/LOS/DS-length boundaries", cohort_boundaries},
      {"lexical metrics match brute-force oracles", metric_oracles},
      {"MMLU zero, antisymmetry and truncation example", mmlu},
      {"perplexity of uniform V=50 logprobs", perplexity},
      {"DPO loss ln2, derivatives and swapped margins", dpo},
      {"timeline invariants on 500 fuzzed admissions", timelines},
      {"judge transcripts and scorecard round trip", judge_parser},
      {"training config export defaults", training_config},
      {"end-to-end pipeline deterministic under 60 s", end_to_end},
  };
  nf::log::set_level(nf::log::Level::error);
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Check c;
    try {
      fn(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    if (c.failures == 0) {
      std::cout << "PASS " << name << "\n";
    } else {
      ++failed;
      std::cout << "FAIL " << name << " (" << c.failures << " failures): " << c.detail.str() << "\n";
    }
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
