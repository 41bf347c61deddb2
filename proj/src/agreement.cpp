#include "nlx/agreement.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <utility>

#include "nlx/errors.hpp"

namespace nlx {

std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (const auto& row : counts) {
    for (auto c : row) t += c;
  }
  return t;
}

std::vector<std::size_t> ConfusionMatrix::row_sums() const {
  std::vector<std::size_t> out(labels.size(), 0);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    for (auto c : counts[i]) out[i] += c;
  }
  return out;
}

std::vector<std::size_t> ConfusionMatrix::col_sums() const {
  std::vector<std::size_t> out(labels.size(), 0);
  for (const auto& row : counts) {
    for (std::size_t j = 0; j < row.size(); ++j) out[j] += row[j];
  }
  return out;
}

ConfusionMatrix ConfusionMatrix::transposed() const {
  ConfusionMatrix t{labels, std::vector<std::vector<std::size_t>>(
                                labels.size(), std::vector<std::size_t>(labels.size(), 0))};
  for (std::size_t i = 0; i < counts.size(); ++i) {
    for (std::size_t j = 0; j < counts[i].size(); ++j) t.counts[j][i] = counts[i][j];
  }
  return t;
}

ConfusionMatrix confusion(const std::vector<std::string>& a, const std::vector<std::string>& b,
                          const std::vector<std::string>& labels) {
  if (a.size() != b.size()) {
    throw ParamError("label sequences differ in length: " + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()));
  }
  std::map<std::string, std::size_t, std::less<>> pos;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!pos.emplace(labels[i], i).second) throw ParamError("duplicate label '" + labels[i] + "'");
  }
  auto lookup = [&](const std::string& v) {
    auto it = pos.find(v);
    if (it == pos.end()) throw ParamError("unknown label '" + v + "'");
    return it->second;
  };
  ConfusionMatrix m{labels, std::vector<std::vector<std::size_t>>(
                                labels.size(), std::vector<std::size_t>(labels.size(), 0))};
  for (std::size_t k = 0; k < a.size(); ++k) ++m.counts[lookup(a[k])][lookup(b[k])];
  return m;
}

double cohen_kappa(const ConfusionMatrix& m) {
  const std::size_t n = m.total();
  if (n == 0) throw ParamError("kappa of an empty confusion matrix");
  const auto rows = m.row_sums();
  const auto cols = m.col_sums();
  const double total = static_cast<double>(n);
  std::size_t agree = 0;
  double pe = 0.0;
  for (std::size_t i = 0; i < m.labels.size(); ++i) {
    agree += m.counts[i][i];
    pe += (static_cast<double>(rows[i]) / total) * (static_cast<double>(cols[i]) / total);
  }
  const double po = static_cast<double>(agree) / total;
  if (pe >= 1.0) return agree == n ? 1.0 : 0.0;
  return (po - pe) / (1.0 - pe);
}

std::vector<std::string> label_union(const std::vector<std::string>& a,
                                     const std::vector<std::string>& b) {
  std::set<std::string> s(a.begin(), a.end());
  s.insert(b.begin(), b.end());
  return {s.begin(), s.end()};
}

double cohen_kappa(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty()) throw ParamError("kappa of empty sequences");
  return cohen_kappa(confusion(a, b, label_union(a, b)));
}

double highlight_iou(const Highlight& h1, const Highlight& h2) {
  if (h1.item_id != h2.item_id) {
    throw ParamError("highlights belong to different items: '" + h1.item_id + "' vs '" +
                     h2.item_id + "'");
  }
  using Tagged = std::pair<int, std::size_t>;  // 0 = premise, 1 = hypothesis
  auto pooled = [](const Highlight& h) {
    std::set<Tagged> s;
    for (auto i : h.premise_indices) s.emplace(0, i);
    for (auto i : h.hypothesis_indices) s.emplace(1, i);
    return s;
  };
  const auto s1 = pooled(h1);
  const auto s2 = pooled(h2);
  if (s1.empty() && s2.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& t : s1) inter += s2.count(t);
  return static_cast<double>(inter) / static_cast<double>(s1.size() + s2.size() - inter);
}

}  // namespace nlx
