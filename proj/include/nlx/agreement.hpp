#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "nlx/corpus.hpp"

namespace nlx {

struct ConfusionMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<std::size_t>> counts;  // counts[row = a][col = b]

  std::size_t total() const;
  std::vector<std::size_t> row_sums() const;
  std::vector<std::size_t> col_sums() const;
  ConfusionMatrix transposed() const;

  bool operator==(const ConfusionMatrix&) const = default;
};

// Throws ParamError on length mismatch or a value missing from `labels`.
ConfusionMatrix confusion(const std::vector<std::string>& a, const std::vector<std::string>& b,
                          const std::vector<std::string>& labels);

// Cohen's kappa. When chance agreement is 1 the result is 1 if the raters
// agree everywhere and 0 otherwise.
double cohen_kappa(const ConfusionMatrix& m);
double cohen_kappa(const std::vector<std::string>& a, const std::vector<std::string>& b);

// Intersection over union of the pooled token sets, premise and hypothesis
// kept apart. Two empty highlights score 1. Throws ParamError for different items.
double highlight_iou(const Highlight& h1, const Highlight& h2);

// Distinct values of both sequences, sorted.
std::vector<std::string> label_union(const std::vector<std::string>& a,
                                     const std::vector<std::string>& b);

}  // namespace nlx
