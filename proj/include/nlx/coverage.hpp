#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nlx/corpus.hpp"
#include "nlx/embedder.hpp"

namespace nlx {

inline constexpr double kHullEps = 1e-9;

struct Point2D {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2D&) const = default;
};

// Counterclockwise vertices with no three consecutive collinear. Fewer than
// three vertices means a point or segment: degenerate, area 0.
class ConvexHull2D {
 public:
  ConvexHull2D() = default;
  const std::vector<Point2D>& vertices() const { return vertices_; }
  double area() const { return area_; }
  bool degenerate() const { return area_ <= 0.0; }
  bool operator==(const ConvexHull2D&) const = default;

 private:
  friend ConvexHull2D convex_hull(std::vector<Point2D> points);
  std::vector<Point2D> vertices_;
  double area_ = 0.0;
};

enum class ProjectionMethod { pca, tsne };

struct ProjectionConfig {
  ProjectionMethod method = ProjectionMethod::pca;
  std::uint64_t seed = 0;
  double perplexity = 5.0;  // t-SNE only; clamped to n - 1
  int iterations = 1000;    // t-SNE only
};

// One point per input, in input order. PCA components are sign-fixed so the
// largest-magnitude loading is positive. Throws ParamError for fewer than two
// vectors, unequal dimensions or non-finite values.
std::vector<Point2D> project_2d(const std::vector<EmbeddingVector>& vectors,
                                const ProjectionConfig& config = {});

// Andrew's monotone chain. Throws ParamError on empty or non-finite input.
ConvexHull2D convex_hull(std::vector<Point2D> points);

double polygon_area(const std::vector<Point2D>& ccw);

// Inside, or within eps of the boundary (of the segment or point when degenerate).
bool point_in_hull(Point2D p, const ConvexHull2D& hull, double eps = kHullEps);

// Area of the convex intersection; 0 when either hull is degenerate.
double hull_intersection_area(const ConvexHull2D& a, const ConvexHull2D& b);

struct CoverageStats {
  std::string item_id;
  bool full = false;     // every human point inside the model hull
  bool partial = false;  // at least one human point inside the model hull
  std::optional<double> area_precision;  // overlap / model-hull area
  std::optional<double> area_recall;     // overlap / human-hull area
  std::size_t n_human = 0;
  std::size_t n_model = 0;
  std::vector<Point2D> human_points;
  std::vector<Point2D> model_points;
};

// Geometry on already-projected points.
CoverageStats coverage_from_points(const std::string& item_id, const std::vector<Point2D>& human,
                                   const std::vector<Point2D>& model);

// Embeds both sets, projects their union jointly, then measures coverage.
CoverageStats item_coverage(const std::string& item_id, const std::vector<std::string>& human_texts,
                            const std::vector<std::string>& model_texts, Embedder& embedder,
                            const ProjectionConfig& config = {});

struct CorpusCoverage {
  std::size_t items = 0;
  double full_pct = 0.0;
  double partial_pct = 0.0;
  std::optional<double> mean_area_recall;
  std::optional<double> mean_area_precision;
  std::size_t undefined_recall = 0;     // items left out of mean_area_recall
  std::size_t undefined_precision = 0;  // items left out of mean_area_precision
};

// Throws ParamError on an empty list.
CorpusCoverage corpus_coverage(const std::vector<CoverageStats>& per_item);

// Per-item coverage of model explanations against the human ones of the
// same item, over items that have both. Result is in corpus item order.
std::vector<CoverageStats> coverage_by_item(const Corpus& corpus,
                                            const std::vector<Explanation>& model_explanations,
                                            Embedder& embedder, const ProjectionConfig& config = {},
                                            std::size_t max_workers = 4);

}  // namespace nlx
