#include <gtest/gtest.h>

#include <random>

#include "nlx/agreement.hpp"
#include "nlx/errors.hpp"

using namespace nlx;

namespace {

// Expands a 2x2 count table into two label sequences.
std::pair<std::vector<std::string>, std::vector<std::string>> from_table(
    const std::vector<std::vector<int>>& t, const std::vector<std::string>& labels) {
  std::vector<std::string> a, b;
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = 0; j < t[i].size(); ++j) {
      for (int k = 0; k < t[i][j]; ++k) {
        a.push_back(labels[i]);
        b.push_back(labels[j]);
      }
    }
  }
  return {a, b};
}

}  // namespace

TEST(Kappa, HandComputedTable) {
  // p_o = 35/50 = 0.7; marginals (25,25) x (30,20): p_e = 0.5*0.6 + 0.5*0.4 = 0.5
  const auto [a, b] = from_table({{20, 5}, {10, 15}}, {"x", "y"});
  EXPECT_NEAR(cohen_kappa(a, b), 0.4, 1e-12);
  const auto m = confusion(a, b, {"x", "y"});
  EXPECT_EQ(cohen_kappa(m), cohen_kappa(a, b));
}

TEST(Kappa, IdenticalSequences) {
  const std::vector<std::string> a = {"p", "q", "q", "r", "p"};
  EXPECT_EQ(cohen_kappa(a, a), 1.0);
}

TEST(Kappa, DegenerateChanceAgreement) {
  EXPECT_EQ(cohen_kappa({"z", "z", "z"}, {"z", "z", "z"}), 1.0);
}

TEST(Kappa, IndependentRandomNearZero) {
  std::mt19937_64 rng(5);
  const std::vector<std::string> labels = {"1", "2", "3", "4"};
  std::vector<std::string> a(100000), b(100000);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = labels[rng() % 4];
    b[i] = labels[rng() % 4];
  }
  EXPECT_NEAR(cohen_kappa(a, b), 0.0, 0.02);
}

TEST(Kappa, SymmetricAndRenameInvariant) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> a(30), b(30);
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = std::string(1, static_cast<char>('a' + rng() % 3));
      b[i] = rng() % 3 == 0 ? a[i] : std::string(1, static_cast<char>('a' + rng() % 3));
    }
    auto rename = [](std::vector<std::string> v) {
      for (auto& s : v) s = "L" + std::string(1, static_cast<char>('z' - (s[0] - 'a')));
      return v;
    };
    ASSERT_NEAR(cohen_kappa(a, b), cohen_kappa(b, a), 1e-12);
    ASSERT_NEAR(cohen_kappa(a, b), cohen_kappa(rename(a), rename(b)), 1e-12);
    const auto labels = label_union(a, b);
    ASSERT_NEAR(cohen_kappa(confusion(a, b, labels)), cohen_kappa(a, b), 1e-12);
  }
}

TEST(Kappa, LengthMismatch) {
  EXPECT_THROW(cohen_kappa({"a"}, {"a", "b"}), ParamError);
  EXPECT_THROW(cohen_kappa(std::vector<std::string>{}, std::vector<std::string>{}), ParamError);
}

TEST(Confusion, DiagonalTransposeAndCounts) {
  const std::vector<std::string> labels = {"e", "n", "c"};
  const std::vector<std::string> a = {"e", "n", "c"}, b = {"e", "n", "e"};
  const auto same = confusion(a, a, labels);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(same.counts[i][j], i == j ? 1u : 0u);
  }
  const auto m = confusion(a, b, labels);
  EXPECT_EQ(m.counts[2][0], 1u);
  std::size_t off = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) off += i != j ? m.counts[i][j] : 0;
  }
  EXPECT_EQ(off, 1u);
  EXPECT_EQ(confusion(b, a, labels), m.transposed());
  EXPECT_EQ(m.row_sums(), (std::vector<std::size_t>{1, 1, 1}));
  EXPECT_EQ(m.col_sums(), (std::vector<std::size_t>{2, 1, 0}));
  EXPECT_THROW(confusion({"e"}, {"x"}, labels), ParamError);
}

TEST(HighlightIoU, Examples) {
  const Highlight a{"i", {}, {1, 2, 3}, {}};
  const Highlight b{"i", {}, {2, 3, 4}, {}};
  EXPECT_EQ(highlight_iou(a, a), 1.0);
  EXPECT_EQ(highlight_iou(a, b), 0.5);
  EXPECT_EQ(highlight_iou(a, Highlight{"i", {}, {7}, {}}), 0.0);
  EXPECT_EQ(highlight_iou(Highlight{"i", {}, {}, {}}, Highlight{"i", {}, {}, {}}), 1.0);
  // Same index on different sides does not match.
  EXPECT_EQ(highlight_iou(Highlight{"i", {}, {0}, {}}, Highlight{"i", {}, {}, {0}}), 0.0);
  EXPECT_THROW(highlight_iou(a, Highlight{"j", {}, {1}, {}}), ParamError);
}

TEST(HighlightIoU, RangeSymmetryAndEqualityRandomized) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 5000; ++trial) {
    Highlight a{"i", {}, {}, {}}, b{"i", {}, {}, {}};
    for (std::size_t k = 0; k < 5; ++k) {
      if (rng() % 2) a.premise_indices.insert(k);
      if (rng() % 2) a.hypothesis_indices.insert(k);
      if (rng() % 2) b.premise_indices.insert(k);
      if (rng() % 2) b.hypothesis_indices.insert(k);
    }
    const double v = highlight_iou(a, b);
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
    ASSERT_EQ(v, highlight_iou(b, a));
    const bool equal = a.premise_indices == b.premise_indices && a.hypothesis_indices == b.hypothesis_indices;
    ASSERT_EQ(v == 1.0, equal);
  }
}
