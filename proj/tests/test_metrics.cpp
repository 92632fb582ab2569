#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "metric_oracles.hpp"
#include "note_forge/metrics.hpp"
#include "note_forge/tokenize.hpp"

namespace nf = note_forge;
namespace oracle = nf_test::oracle;

namespace {

nf::TokenSequence seq(std::vector<std::string> t) { return nf::TokenSequence(std::move(t)); }
nf::TokenSequence tok(std::string_view s) { return nf::tokenize(s); }

// Stem classes collapse "run", "runs" and "running".
const std::vector<std::string> kAlphabet{"run", "runs", "running", "cat", "sat"};

std::vector<std::string> random_tokens(std::mt19937_64& rng, std::size_t max_len = 8) {
  std::vector<std::string> out(rng() % (max_len + 1));
  for (auto& t : out) t = kAlphabet[rng() % kAlphabet.size()];
  return out;
}

void expect_rel(double actual, double expected, double rel = 1e-12) {
  EXPECT_LE(std::abs(actual - expected), rel * std::abs(expected) + 1e-300) << actual << " vs " << expected;
}

}  // namespace

TEST(Tokenize, LowercasesAndSplitsOnPunctuation) {
  EXPECT_EQ(tok("The cat, sat-on  MAT.").tokens(), (std::vector<std::string>{"the", "cat", "sat", "on", "mat"}));
  EXPECT_EQ(tok("HADM_ID: 149258.0").tokens(), (std::vector<std::string>{"hadm", "id", "149258", "0"}));
  EXPECT_TRUE(tok("  ...  ").empty());
  EXPECT_EQ(tok("caf\xc3\xa9 ok").size(), 2u);
  EXPECT_THROW(nf::TokenSequence({"a", ""}), nf::ValidationError);
}

TEST(Tokenize, RetokenizingIsStable) {
  std::mt19937_64 rng(2);
  const std::string chars = "aB9 ,.-_\n\t!";
  for (int i = 0; i < 500; ++i) {
    std::string s;
    for (std::size_t k = rng() % 40; k > 0; --k) s += chars[rng() % chars.size()];
    const auto once = tok(s);
    std::string joined;
    for (const auto& t : once) joined += t + " ";
    EXPECT_EQ(tok(joined), once);
  }
}

TEST(Porter, ClassicVocabulary) {
  const std::vector<std::pair<std::string, std::string>> cases{
      {"caresses", "caress"},   {"ponies", "poni"},         {"ties", "ti"},           {"caress", "caress"},
      {"cats", "cat"},          {"feed", "feed"},           {"agreed", "agre"},       {"plastered", "plaster"},
      {"bled", "bled"},         {"motoring", "motor"},      {"sing", "sing"},         {"conflated", "conflat"},
      {"troubled", "troubl"},   {"sized", "size"},          {"hopping", "hop"},       {"tanned", "tan"},
      {"falling", "fall"},      {"hissing", "hiss"},        {"fizzed", "fizz"},       {"failing", "fail"},
      {"filing", "file"},       {"happy", "happi"},         {"sky", "sky"},           {"relational", "relat"},
      {"conditional", "condit"}, {"rational", "ration"},    {"valenci", "valenc"},    {"digitizer", "digit"},
      {"conformabli", "conform"}, {"radicalli", "radic"},   {"differentli", "differ"}, {"vileli", "vile"},
      {"analogousli", "analog"}, {"vietnamization", "vietnam"}, {"predication", "predic"}, {"operator", "oper"},
      {"feudalism", "feudal"},  {"decisiveness", "decis"},  {"hopefulness", "hope"},  {"callousness", "callous"},
      {"formaliti", "formal"},  {"sensitiviti", "sensit"},  {"sensibiliti", "sensibl"}, {"triplicate", "triplic"},
      {"formative", "form"},    {"formalize", "formal"},    {"electriciti", "electr"}, {"electrical", "electr"},
      {"hopeful", "hope"},      {"goodness", "good"},       {"revival", "reviv"},     {"allowance", "allow"},
      {"inference", "infer"},   {"airliner", "airlin"},     {"gyroscopic", "gyroscop"}, {"adjustable", "adjust"},
      {"defensible", "defens"}, {"irritant", "irrit"},      {"replacement", "replac"}, {"adjustment", "adjust"},
      {"dependent", "depend"},  {"adoption", "adopt"},      {"homologou", "homolog"}, {"communism", "commun"},
      {"activate", "activ"},    {"angulariti", "angular"},  {"homologous", "homolog"}, {"effective", "effect"},
      {"bowdlerize", "bowdler"}, {"probate", "probat"},     {"rate", "rate"},         {"cease", "ceas"},
      {"controll", "control"},  {"roll", "roll"},           {"generalizations", "gener"}, {"oscillators", "oscil"},
      {"running", "run"},       {"runs", "run"},            {"is", "is"},             {"a", "a"},
  };
  for (const auto& [word, stem] : cases) EXPECT_EQ(nf::porter_stem(word), stem) << word;
}

// ---- ROUGE / LCS ----

TEST(Rouge, Examples) {
  const auto same = nf::rouge_n(tok("a b c"), tok("a b c"), 1);
  EXPECT_EQ(same.precision, 1.0);
  EXPECT_EQ(same.recall, 1.0);
  EXPECT_EQ(same.f1, 1.0);
  const auto r = nf::rouge_n(tok("the cat sat"), tok("the cat"), 1);
  EXPECT_EQ(r.precision, 1.0);
  EXPECT_DOUBLE_EQ(r.recall, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.f1, 0.8);
  const auto disjoint = nf::rouge_n(tok("a b"), tok("c d"), 1);
  EXPECT_EQ(disjoint.f1, 0.0);
  EXPECT_EQ(nf::rouge_n(tok("a"), tok("a"), 2).f1, 0.0);  // no bigrams on either side
  EXPECT_THROW(nf::rouge_n(tok("a"), tok("a"), 0), nf::ValidationError);
}

TEST(Rouge, LcsExamples) {
  EXPECT_EQ(nf::lcs_length(tok("a b c d"), tok("a c b d")), 3u);
  const auto l = nf::rouge_l(tok("a b c d"), tok("a c b d"));
  EXPECT_EQ(l.precision, 0.75);
  EXPECT_EQ(l.recall, 0.75);
  const auto same = nf::rouge_l(tok("x y z"), tok("x y z"));
  EXPECT_EQ(same.f1, 1.0);
  const auto empty = nf::rouge_l(tok("x y z"), tok(""));
  EXPECT_EQ(empty.precision, 0.0);
  EXPECT_EQ(empty.recall, 0.0);
  EXPECT_EQ(empty.f1, 0.0);
}

TEST(Rouge, MatchesEnumerationOracle) {
  std::mt19937_64 rng(1001);
  for (int i = 0; i < 500; ++i) {
    const auto r = random_tokens(rng), h = random_tokens(rng);
    for (std::size_t n : {1u, 2u, 3u}) {
      const auto got = nf::rouge_n(seq(r), seq(h), static_cast<int>(n));
      const auto want = oracle::rouge_n(r, h, n);
      EXPECT_EQ(got.precision, want.precision.value());
      EXPECT_EQ(got.recall, want.recall.value());
      EXPECT_NEAR(got.f1, want.f1(), 1e-12);
    }
    const auto got = nf::rouge_l(seq(r), seq(h));
    const auto want = oracle::rouge_l(r, h);
    EXPECT_EQ(nf::lcs_length(seq(r), seq(h)), static_cast<std::size_t>(oracle::lcs(r, h)));
    EXPECT_EQ(got.precision, want.precision.value());
    EXPECT_EQ(got.recall, want.recall.value());
    EXPECT_NEAR(got.f1, want.f1(), 1e-12);
  }
}

TEST(Rouge, SelfOverlapIsPerfect) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    auto t = random_tokens(rng);
    if (t.empty()) continue;
    const auto r = nf::rouge_n(seq(t), seq(t), 1);
    EXPECT_EQ(r.f1, 1.0);
    EXPECT_EQ(nf::rouge_l(seq(t), seq(t)).f1, 1.0);
  }
}

// ---- BLEU ----

TEST(Bleu, Examples) {
  EXPECT_DOUBLE_EQ(nf::bleu(tok("the cat is on the mat"), tok("the cat is on the mat")), 1.0);
  EXPECT_EQ(nf::bleu(tok("the cat"), tok("")), 0.0);
  // Unigram clipped precision 2/4, higher orders smoothed.
  const double eps = nf::kBleuEpsilon;
  const double expected = std::exp(1.0 - 6.0 / 4.0) *
                          std::exp((std::log(2.0 / 4.0) + std::log(eps / 3) + std::log(eps / 2) + std::log(eps / 1)) / 4);
  expect_rel(nf::bleu(tok("the cat is on the mat"), tok("the the the the")), expected);
  EXPECT_LT(expected, 1e-6);
  // Half-length exact prefix: all precisions 1, brevity penalty e^-1.
  expect_rel(nf::bleu(tok("a b c d e f g h"), tok("a b c d")), std::exp(-1.0));
  EXPECT_THROW(nf::bleu(tok("a"), tok("a"), 0), nf::ValidationError);
}

TEST(Bleu, MatchesEnumerationOracle) {
  std::mt19937_64 rng(1002);
  for (int i = 0; i < 500; ++i) {
    const auto r = random_tokens(rng), h = random_tokens(rng);
    for (int max_order : {1, 2, 4}) {
      expect_rel(nf::bleu(seq(r), seq(h), max_order), oracle::bleu(r, h, static_cast<std::size_t>(max_order)));
    }
  }
}

// ---- METEOR ----

TEST(Meteor, Examples) {
  EXPECT_EQ(nf::meteor(tok("a b"), tok("c d")), 0.0);
  EXPECT_EQ(nf::meteor(tok("a b"), tok("")), 0.0);
  const auto d = nf::meteor_detail(tok("a b c"), tok("a b c"));
  EXPECT_EQ(d.matches, 3u);
  EXPECT_EQ(d.chunks, 1u);
  EXPECT_NEAR(d.score, 1.0 - 0.5 / 27.0, 1e-15);
  EXPECT_NEAR(d.score, 0.98148, 1e-5);

  const auto swapped = nf::meteor_detail(tok("the cat sat"), tok("cat the sat"));
  const auto want = oracle::meteor({"the", "cat", "sat"}, {"cat", "the", "sat"}, [](const std::string& s) { return nf::porter_stem(s); });
  EXPECT_EQ(swapped.matches, 3u);
  EXPECT_EQ(static_cast<std::int64_t>(swapped.chunks), want.chunks);
  EXPECT_EQ(swapped.chunks, 3u);
  EXPECT_NEAR(swapped.score, want.score, 1e-12);
}

TEST(Meteor, StemMatches) {
  const auto d = nf::meteor_detail(tok("patient running"), tok("patients runs"));
  EXPECT_EQ(d.matches, 2u);
  EXPECT_EQ(d.chunks, 1u);
}

TEST(Meteor, MatchesBruteForceAlignmentOracle) {
  std::mt19937_64 rng(1003);
  const auto cls = [](const std::string& s) { return nf::porter_stem(s); };
  for (int i = 0; i < 500; ++i) {
    const auto r = random_tokens(rng), h = random_tokens(rng);
    const auto got = nf::meteor_detail(seq(r), seq(h));
    const auto want = oracle::meteor(r, h, cls);
    ASSERT_TRUE(got.exact);
    EXPECT_EQ(static_cast<std::int64_t>(got.matches), want.matches);
    EXPECT_EQ(static_cast<std::int64_t>(got.chunks), want.chunks);
    EXPECT_NEAR(got.score, want.score, 1e-12);
  }
}

TEST(Meteor, LongInputsFinishWithinBudget) {
  std::mt19937_64 rng(5);
  std::vector<std::string> r(400), h(400);
  for (auto& t : r) t = kAlphabet[rng() % kAlphabet.size()];
  for (auto& t : h) t = kAlphabet[rng() % kAlphabet.size()];
  const auto d = nf::meteor_detail(seq(r), seq(h), 50'000);
  EXPECT_GT(d.matches, 0u);
  EXPECT_GE(d.score, 0.0);
  EXPECT_LE(d.score, 1.0);
}

TEST(LexicalMetrics, StayInUnitInterval) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 300; ++i) {
    const auto r = seq(random_tokens(rng)), h = seq(random_tokens(rng));
    for (double v : {nf::rouge_n(r, h, 1).f1, nf::rouge_n(r, h, 2).f1, nf::rouge_l(r, h).f1, nf::bleu(r, h), nf::meteor(r, h)}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

// ---- MMLU ----

TEST(Mmlu, Examples) {
  nf::Matrix<double> a(2, 2), b(1, 2);
  a << 1, 2, 3, 4;
  b << 0, 1;
  EXPECT_EQ(nf::mmlu_score(a, b), 1.0);
  EXPECT_EQ(nf::mmlu_score(a, a), 0.0);
  EXPECT_EQ(nf::mmlu_score(b, a), -1.0);
  nf::Matrix<double> wide(1, 3);
  wide << 1, 2, 3;
  EXPECT_THROW(nf::mmlu_score(a, wide), nf::ValidationError);
  nf::Matrix<double> none(0, 2);
  EXPECT_THROW(nf::mmlu_score(a, none), nf::ValidationError);
}

TEST(Mmlu, AntisymmetricAndMatchesLoopOracle) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> v(-10, 10);
  for (int i = 0; i < 100; ++i) {
    const int cols = 1 + static_cast<int>(rng() % 50);
    nf::Matrix<double> a(1 + static_cast<int>(rng() % 20), cols), b(1 + static_cast<int>(rng() % 20), cols);
    for (int r = 0; r < a.rows(); ++r) for (int c = 0; c < cols; ++c) a(r, c) = v(rng);
    for (int r = 0; r < b.rows(); ++r) for (int c = 0; c < cols; ++c) b(r, c) = v(rng);
    EXPECT_NEAR(nf::mmlu_score(a, b), -nf::mmlu_score(b, a), 1e-12);
    const long rows = std::min(a.rows(), b.rows());
    long double sum = 0;
    for (long r = 0; r < rows; ++r) for (int c = 0; c < cols; ++c) sum += static_cast<long double>(a(r, c)) - b(r, c);
    EXPECT_NEAR(nf::mmlu_score(a, b), static_cast<double>(sum / (rows * cols)), 1e-12);
  }
}

TEST(Mmlu, FloatScalarInstantiates) {
  nf::Matrix<float> a(1, 2), b(1, 2);
  a << 1.5f, 2.5f;
  b << 0.5f, 0.5f;
  EXPECT_FLOAT_EQ(nf::mmlu_score(a, b), 1.5f);
}

// ---- perplexity ----

TEST(Perplexity, Examples) {
  std::vector<double> uniform(37, std::log(1.0 / 50));
  EXPECT_NEAR(nf::perplexity(uniform), 50.0, 1e-9);
  std::vector<double> half{std::log(0.5)};
  EXPECT_NEAR(nf::perplexity(half), 2.0, 1e-12);
  // exp(7.25 / 5)
  std::vector<double> five{-0.1, -2.3, -0.7, -1.1, -3.05};
  EXPECT_NEAR(nf::perplexity(five), 4.263114515168816, 1e-9);
  EXPECT_THROW(nf::perplexity(std::vector<double>{}), nf::ValidationError);
  EXPECT_THROW(nf::perplexity(std::vector<double>{-1.0, 0.5}), nf::ValidationError);
  EXPECT_THROW(nf::perplexity(std::vector<double>{NAN}), nf::ValidationError);
}

TEST(Perplexity, ConcatenationInvariant) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> lp(-8, 0);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> v(1 + rng() % 30);
    for (auto& x : v) x = lp(rng);
    std::vector<double> twice = v;
    twice.insert(twice.end(), v.begin(), v.end());
    EXPECT_NEAR(nf::perplexity(twice), nf::perplexity(v), 1e-9 * nf::perplexity(v));
  }
}

// ---- embedding score ----

TEST(EmbedScore, Examples) {
  nf::Matrix<double> e(3, 2);
  e << 1, 0, 0, 1, std::sqrt(0.5), std::sqrt(0.5);
  const auto same = nf::embed_score(e, e);
  EXPECT_NEAR(same.f1, 1.0, 1e-12);
  nf::Matrix<double> x(1, 2), y(1, 2);
  x << 1, 0;
  y << 0, 1;
  const auto ortho = nf::embed_score(x, y);
  EXPECT_EQ(ortho.precision, 0.0);
  EXPECT_EQ(ortho.recall, 0.0);
  EXPECT_EQ(ortho.f1, 0.0);
  nf::Matrix<double> none(0, 2), wide(1, 3);
  wide << 1, 0, 0;
  EXPECT_EQ(nf::embed_score(e, none).f1, 0.0);
  EXPECT_THROW(nf::embed_score(e, wide), nf::ValidationError);
  nf::Matrix<double> unnormalized(1, 2);
  unnormalized << 1, 1;
  EXPECT_THROW(nf::embed_score(e, unnormalized), nf::ValidationError);
}

TEST(EmbedScore, ToyVectorsMatchPairwiseOracle) {
  nf::Matrix<double> ref(3, 2), hyp(2, 2);
  const double c = std::cos(0.4), s = std::sin(0.4);
  ref << 1, 0, 0, 1, -1, 0;
  hyp << c, s, -s, c;
  double recall = 0, precision = 0;
  for (int i = 0; i < 3; ++i) {
    double best = -2;
    for (int j = 0; j < 2; ++j) best = std::max(best, ref(i, 0) * hyp(j, 0) + ref(i, 1) * hyp(j, 1));
    recall += std::max(best, 0.0) / 3;
  }
  for (int j = 0; j < 2; ++j) {
    double best = -2;
    for (int i = 0; i < 3; ++i) best = std::max(best, ref(i, 0) * hyp(j, 0) + ref(i, 1) * hyp(j, 1));
    precision += std::max(best, 0.0) / 2;
  }
  const auto got = nf::embed_score(ref, hyp);
  EXPECT_NEAR(got.recall, recall, 1e-12);
  EXPECT_NEAR(got.precision, precision, 1e-12);
  EXPECT_NEAR(got.f1, 2 * precision * recall / (precision + recall), 1e-12);
}
