#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>

#include <Eigen/Core>

#include "note_forge/error.hpp"
#include "note_forge/tokenize.hpp"

namespace note_forge {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

struct PrecisionRecall {
  double precision = 0;
  double recall = 0;
  double f1 = 0;

  static PrecisionRecall from(double precision, double recall);
};

// Clipped n-gram overlap between reference and hypothesis. n >= 1.
PrecisionRecall rouge_n(const TokenSequence& reference, const TokenSequence& hypothesis, int n);

// Longest common subsequence based precision/recall/F1.
PrecisionRecall rouge_l(const TokenSequence& reference, const TokenSequence& hypothesis);

std::size_t lcs_length(const TokenSequence& a, const TokenSequence& b);

inline constexpr double kBleuEpsilon = 1e-9;

// Sentence BLEU with uniform weights over orders 1..max_order. Orders longer than
// the hypothesis are left out of the geometric mean; an order with no clipped
// matches contributes kBleuEpsilon / total instead of zero.
double bleu(const TokenSequence& reference, const TokenSequence& hypothesis, int max_order = 4);

struct MeteorDetail {
  std::size_t matches = 0;
  std::size_t chunks = 0;
  double precision = 0;
  double recall = 0;
  double fmean = 0;
  double penalty = 0;
  double score = 0;
  // False when the chunk search hit its node budget and kept the best alignment found.
  bool exact = true;
};

inline constexpr std::uint64_t kMeteorSearchBudget = 2'000'000;

// Unigram alignment on exact or Porter-stem equality. Matches are the maximum
// alignment size; among maximum alignments the one with the fewest chunks is used.
MeteorDetail meteor_detail(const TokenSequence& reference, const TokenSequence& hypothesis,
                           std::uint64_t search_budget = kMeteorSearchBudget);

inline double meteor(const TokenSequence& reference, const TokenSequence& hypothesis) {
  return meteor_detail(reference, hypothesis).score;
}

// Rows are token positions, columns are vocabulary entries. Both matrices are
// truncated to the shorter row count; the score is the mean elementwise
// difference reference - hypothesis.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar mmlu_score(const Eigen::MatrixBase<DerivedA>& reference,
                                     const Eigen::MatrixBase<DerivedB>& hypothesis) {
  using Scalar = typename DerivedA::Scalar;
  static_assert(std::is_same_v<Scalar, typename DerivedB::Scalar>, "logit matrices must share a scalar type");
  if (reference.cols() != hypothesis.cols()) {
    throw ValidationError("logit matrices disagree on vocabulary size: " + std::to_string(reference.cols()) +
                          " vs " + std::to_string(hypothesis.cols()));
  }
  const Eigen::Index rows = std::min(reference.rows(), hypothesis.rows());
  if (rows == 0 || reference.cols() == 0) throw ValidationError("logit matrices are empty");
  const auto diff = (reference.topRows(rows) - hypothesis.topRows(rows)).eval();
  return diff.sum() / static_cast<Scalar>(diff.size());
}

template <typename Derived>
typename Derived::Scalar mean_negative_log_likelihood(const Eigen::MatrixBase<Derived>& logprobs) {
  using Scalar = typename Derived::Scalar;
  if (logprobs.size() == 0) throw ValidationError("no token log-probabilities");
  for (Eigen::Index i = 0; i < logprobs.size(); ++i) {
    const Scalar v = logprobs.derived().coeff(i);
    if (!std::isfinite(v)) throw ValidationError("log-probability at position " + std::to_string(i) + " is not finite");
    if (v > Scalar(0)) {
      throw ValidationError("log-probability at position " + std::to_string(i) + " is positive");
    }
  }
  return -logprobs.sum() / static_cast<Scalar>(logprobs.size());
}

// exp of the mean negative log-likelihood.
template <typename Derived>
typename Derived::Scalar perplexity(const Eigen::MatrixBase<Derived>& logprobs) {
  using std::exp;
  return exp(mean_negative_log_likelihood(logprobs));
}

inline double perplexity(std::span<const double> logprobs) {
  return perplexity(Eigen::Map<const Vector<double>>(logprobs.data(), static_cast<Eigen::Index>(logprobs.size())));
}

template <typename Scalar>
struct EmbeddingScore {
  Scalar precision{0};
  Scalar recall{0};
  Scalar f1{0};
};

// Greedy cosine matching over unit-norm token embeddings (one per row). Best
// similarities below zero count as zero.
template <typename DerivedA, typename DerivedB>
EmbeddingScore<typename DerivedA::Scalar> embed_score(const Eigen::MatrixBase<DerivedA>& reference,
                                                      const Eigen::MatrixBase<DerivedB>& hypothesis) {
  using Scalar = typename DerivedA::Scalar;
  if (reference.cols() != hypothesis.cols()) {
    throw ValidationError("embedding dimensions differ: " + std::to_string(reference.cols()) + " vs " +
                          std::to_string(hypothesis.cols()));
  }
  if (reference.rows() == 0 || hypothesis.rows() == 0) return {};
  const Scalar tolerance = Scalar(1e-6);
  auto check_norms = [&](const auto& m, const char* side) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const Scalar norm = m.row(i).norm();
      if (!(std::abs(norm - Scalar(1)) <= tolerance)) {
        throw ValidationError(std::string(side) + " embedding " + std::to_string(i) + " is not unit length");
      }
    }
  };
  check_norms(reference, "reference");
  check_norms(hypothesis, "hypothesis");

  const Matrix<Scalar> sim = reference * hypothesis.transpose();
  const Scalar recall = sim.rowwise().maxCoeff().cwiseMax(Scalar(0)).mean();
  const Scalar precision = sim.colwise().maxCoeff().cwiseMax(Scalar(0)).mean();
  EmbeddingScore<Scalar> out{precision, recall, Scalar(0)};
  if (precision + recall > Scalar(0)) out.f1 = Scalar(2) * precision * recall / (precision + recall);
  return out;
}

}  // namespace note_forge
