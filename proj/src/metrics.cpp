#include "note_forge/metrics.hpp"

#include <map>
#include <unordered_map>
#include <vector>

namespace note_forge {

PrecisionRecall PrecisionRecall::from(double precision, double recall) {
  PrecisionRecall out{precision, recall, 0.0};
  if (precision + recall > 0) out.f1 = 2 * precision * recall / (precision + recall);
  return out;
}

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts ngram_counts(const TokenSequence& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  const auto& t = tokens.tokens();
  for (std::size_t i = 0; i + n <= t.size(); ++i) {
    ++counts[std::vector<std::string>(t.begin() + static_cast<std::ptrdiff_t>(i),
                                      t.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

std::size_t clipped_matches(const NgramCounts& ref, const NgramCounts& hyp) {
  std::size_t total = 0;
  for (const auto& [gram, count] : hyp) {
    auto it = ref.find(gram);
    if (it != ref.end()) total += std::min(count, it->second);
  }
  return total;
}

}  // namespace

PrecisionRecall rouge_n(const TokenSequence& reference, const TokenSequence& hypothesis, int n) {
  if (n < 1) throw ValidationError("ROUGE-N needs n >= 1");
  const auto order = static_cast<std::size_t>(n);
  const NgramCounts ref = ngram_counts(reference, order);
  const NgramCounts hyp = ngram_counts(hypothesis, order);
  const std::size_t matches = clipped_matches(ref, hyp);
  const std::size_t ref_total = reference.size() >= order ? reference.size() - order + 1 : 0;
  const std::size_t hyp_total = hypothesis.size() >= order ? hypothesis.size() - order + 1 : 0;
  const double p = hyp_total ? static_cast<double>(matches) / static_cast<double>(hyp_total) : 0.0;
  const double r = ref_total ? static_cast<double>(matches) / static_cast<double>(ref_total) : 0.0;
  return PrecisionRecall::from(p, r);
}

std::size_t lcs_length(const TokenSequence& a, const TokenSequence& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

PrecisionRecall rouge_l(const TokenSequence& reference, const TokenSequence& hypothesis) {
  if (reference.empty() || hypothesis.empty()) return {};
  const auto l = static_cast<double>(lcs_length(reference, hypothesis));
  return PrecisionRecall::from(l / static_cast<double>(hypothesis.size()), l / static_cast<double>(reference.size()));
}

double bleu(const TokenSequence& reference, const TokenSequence& hypothesis, int max_order) {
  if (max_order < 1) throw ValidationError("BLEU needs max_order >= 1");
  if (hypothesis.empty()) return 0.0;
  const std::size_t orders = std::min(static_cast<std::size_t>(max_order), hypothesis.size());
  double log_sum = 0;
  for (std::size_t n = 1; n <= orders; ++n) {
    const std::size_t matches = clipped_matches(ngram_counts(reference, n), ngram_counts(hypothesis, n));
    const auto total = static_cast<double>(hypothesis.size() - n + 1);
    const double p = matches > 0 ? static_cast<double>(matches) / total : kBleuEpsilon / total;
    log_sum += std::log(p);
  }
  double bp = 1.0;
  if (hypothesis.size() < reference.size()) {
    bp = std::exp(1.0 - static_cast<double>(reference.size()) / static_cast<double>(hypothesis.size()));
  }
  return bp * std::exp(log_sum / static_cast<double>(orders));
}

namespace {

struct Alignment {
  std::vector<int> hyp_to_ref;  // -1 when unmatched
  std::size_t chunks = 0;
};

std::size_t count_chunks(const std::vector<int>& hyp_to_ref) {
  std::size_t chunks = 0;
  int last_i = -2, last_j = -2;
  for (int i = 0; i < static_cast<int>(hyp_to_ref.size()); ++i) {
    const int j = hyp_to_ref[static_cast<std::size_t>(i)];
    if (j < 0) continue;
    if (!(i == last_i + 1 && j == last_j + 1)) ++chunks;
    last_i = i;
    last_j = j;
  }
  return chunks;
}

// Repeatedly take the longest run of unmatched equal-class positions.
Alignment greedy_alignment(const std::vector<int>& ref, const std::vector<int>& hyp) {
  const std::size_t R = ref.size(), H = hyp.size();
  std::vector<int> hyp_to_ref(H, -1);
  std::vector<char> ref_used(R, 0);
  std::vector<std::size_t> prev(R + 1), cur(R + 1);
  while (true) {
    std::size_t best = 0, best_i = 0, best_j = 0;
    std::fill(prev.begin(), prev.end(), 0);
    for (std::size_t i = 1; i <= H; ++i) {
      cur[0] = 0;
      for (std::size_t j = 1; j <= R; ++j) {
        if (hyp_to_ref[i - 1] < 0 && !ref_used[j - 1] && hyp[i - 1] == ref[j - 1]) {
          cur[j] = prev[j - 1] + 1;
          if (cur[j] > best) {
            best = cur[j];
            best_i = i;
            best_j = j;
          }
        } else {
          cur[j] = 0;
        }
      }
      std::swap(prev, cur);
    }
    if (best == 0) break;
    for (std::size_t k = 0; k < best; ++k) {
      hyp_to_ref[best_i - best + k] = static_cast<int>(best_j - best + k);
      ref_used[best_j - best + k] = 1;
    }
  }
  Alignment out{hyp_to_ref, 0};
  out.chunks = count_chunks(out.hyp_to_ref);
  return out;
}

// Depth-first search over hypothesis positions in order. Skipping a position is
// only allowed when it cannot reduce the number of matches below the maximum.
class ChunkSearch {
 public:
  ChunkSearch(const std::vector<int>& ref, const std::vector<int>& hyp, std::size_t classes, std::uint64_t budget)
      : ref_(ref), hyp_(hyp), budget_(budget), remaining_hyp_(classes, 0), unused_ref_(classes, 0),
        positions_(classes), ref_used_(ref.size(), 0), current_(hyp.size(), -1) {
    for (int c : hyp_) ++remaining_hyp_[static_cast<std::size_t>(c)];
    for (std::size_t j = 0; j < ref_.size(); ++j) {
      const auto c = static_cast<std::size_t>(ref_[j]);
      ++unused_ref_[c];
      positions_[c].push_back(static_cast<int>(j));
    }
  }

  Alignment run(Alignment seed) {
    best_ = std::move(seed);
    visit(0, -2, -2, 0);
    return best_;
  }

  bool exhausted() const { return nodes_ > budget_; }

 private:
  void visit(std::size_t i, int last_i, int last_j, std::size_t chunks) {
    if (++nodes_ > budget_) return;
    if (chunks >= best_.chunks) return;
    if (i == hyp_.size()) {
      best_.hyp_to_ref = current_;
      best_.chunks = chunks;
      return;
    }
    const auto c = static_cast<std::size_t>(hyp_[i]);
    const int ii = static_cast<int>(i);
    --remaining_hyp_[c];
    if (unused_ref_[c] > 0) {
      const int cont = last_i == ii - 1 ? last_j + 1 : -1;
      if (cont >= 0 && cont < static_cast<int>(ref_.size()) && !ref_used_[static_cast<std::size_t>(cont)] &&
          ref_[static_cast<std::size_t>(cont)] == hyp_[i]) {
        take(i, cont, c);
        visit(i + 1, ii, cont, chunks);
        release(i, cont, c);
      }
      for (int j : positions_[c]) {
        if (j == cont || ref_used_[static_cast<std::size_t>(j)]) continue;
        take(i, j, c);
        visit(i + 1, ii, j, chunks + 1);
        release(i, j, c);
        if (nodes_ > budget_) break;
      }
    }
    if (remaining_hyp_[c] >= unused_ref_[c]) visit(i + 1, last_i, last_j, chunks);
    ++remaining_hyp_[c];
  }

  void take(std::size_t i, int j, std::size_t c) {
    ref_used_[static_cast<std::size_t>(j)] = 1;
    --unused_ref_[c];
    current_[i] = j;
  }

  void release(std::size_t i, int j, std::size_t c) {
    ref_used_[static_cast<std::size_t>(j)] = 0;
    ++unused_ref_[c];
    current_[i] = -1;
  }

  const std::vector<int>& ref_;
  const std::vector<int>& hyp_;
  std::uint64_t budget_;
  std::uint64_t nodes_ = 0;
  std::vector<std::size_t> remaining_hyp_;
  std::vector<std::size_t> unused_ref_;
  std::vector<std::vector<int>> positions_;
  std::vector<char> ref_used_;
  std::vector<int> current_;
  Alignment best_;
};

}  // namespace

MeteorDetail meteor_detail(const TokenSequence& reference, const TokenSequence& hypothesis,
                           std::uint64_t search_budget) {
  MeteorDetail out;
  if (reference.empty() || hypothesis.empty()) return out;

  std::unordered_map<std::string, int> class_of;
  auto classify = [&](const TokenSequence& seq) {
    std::vector<int> ids;
    ids.reserve(seq.size());
    for (const std::string& token : seq) {
      auto [it, inserted] = class_of.try_emplace(porter_stem(token), static_cast<int>(class_of.size()));
      ids.push_back(it->second);
    }
    return ids;
  };
  const std::vector<int> ref = classify(reference);
  const std::vector<int> hyp = classify(hypothesis);
  const std::size_t classes = class_of.size();

  std::vector<std::size_t> ref_count(classes, 0), hyp_count(classes, 0);
  for (int c : ref) ++ref_count[static_cast<std::size_t>(c)];
  for (int c : hyp) ++hyp_count[static_cast<std::size_t>(c)];
  for (std::size_t c = 0; c < classes; ++c) out.matches += std::min(ref_count[c], hyp_count[c]);
  if (out.matches == 0) return out;

  Alignment greedy = greedy_alignment(ref, hyp);
  if (greedy.chunks > 1) {
    ChunkSearch search(ref, hyp, classes, search_budget);
    greedy = search.run(std::move(greedy));
    out.exact = !search.exhausted();
  }
  out.chunks = greedy.chunks;

  const auto m = static_cast<double>(out.matches);
  out.precision = m / static_cast<double>(hypothesis.size());
  out.recall = m / static_cast<double>(reference.size());
  out.fmean = 10 * out.precision * out.recall / (out.recall + 9 * out.precision);
  const double frag = static_cast<double>(out.chunks) / m;
  out.penalty = 0.5 * frag * frag * frag;
  out.score = out.fmean * (1 - out.penalty);
  return out;
}

}  // namespace note_forge
