#include "nlx/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include <Eigen/Dense>

#include "nlx/errors.hpp"
#include "nlx/parallel.hpp"

namespace nlx {

namespace {

double cross(Point2D o, Point2D a, Point2D b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double distance_to_segment(Point2D p, Point2D a, Point2D b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

Eigen::MatrixXd to_matrix(const std::vector<EmbeddingVector>& vectors) {
  if (vectors.size() < 2) throw ParamError("projection needs at least two vectors");
  const std::size_t dim = vectors.front().dim();
  if (dim == 0) throw ParamError("cannot project zero-dimensional vectors");
  Eigen::MatrixXd x(static_cast<Eigen::Index>(vectors.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].dim() != dim) throw ParamError("vectors differ in dimension");
    for (std::size_t j = 0; j < dim; ++j) {
      const double v = vectors[i].values[j];
      if (!std::isfinite(v)) throw ParamError("non-finite vector component");
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  return x;
}

std::vector<Point2D> pca_2d(const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  Eigen::MatrixXd v = svd.matrixV();
  std::vector<Point2D> out(static_cast<std::size_t>(x.rows()));
  const double tol = s.size() > 0 ? s(0) * 1e-12 : 0.0;
  for (Eigen::Index c = 0; c < 2; ++c) {
    if (c >= s.size() || s(c) <= tol) continue;  // missing component stays 0
    Eigen::Index arg = 0;
    v.col(c).cwiseAbs().maxCoeff(&arg);
    const double sign = v(arg, c) < 0 ? -1.0 : 1.0;
    const Eigen::VectorXd proj = centered * v.col(c) * sign;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      (c == 0 ? out[static_cast<std::size_t>(i)].x : out[static_cast<std::size_t>(i)].y) = proj(i);
    }
  }
  return out;
}

// Row-wise Gaussian affinities whose entropy matches log(perplexity).
Eigen::MatrixXd conditional_affinities(const Eigen::MatrixXd& d2, double perplexity) {
  const Eigen::Index n = d2.rows();
  const double target = std::log(perplexity);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double beta = 1.0, lo = 0.0, hi = std::numeric_limits<double>::infinity();
    Eigen::VectorXd row(n);
    for (int iter = 0; iter < 200; ++iter) {
      double sum = 0.0;
      double dmin = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j != i) dmin = std::min(dmin, d2(i, j));
      }
      for (Eigen::Index j = 0; j < n; ++j) {
        row(j) = j == i ? 0.0 : std::exp(-(d2(i, j) - dmin) * beta);
        sum += row(j);
      }
      row /= sum;
      double entropy = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (row(j) > 0) entropy -= row(j) * std::log(row(j));
      }
      if (std::abs(entropy - target) < 1e-5) break;
      if (entropy > target) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2 : (beta + hi) / 2;
      } else {
        hi = beta;
        beta = (beta + lo) / 2;
      }
    }
    p.row(i) = row.transpose();
  }
  return p;
}

std::vector<Point2D> tsne_2d(const Eigen::MatrixXd& x, const ProjectionConfig& cfg) {
  const Eigen::Index n = x.rows();
  const double perplexity = std::min(cfg.perplexity, static_cast<double>(n - 1));
  if (perplexity <= 0) throw ParamError("perplexity must be positive");
  if (cfg.iterations < 1) throw ParamError("t-SNE needs at least one iteration");

  Eigen::MatrixXd d2(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) d2(i, j) = (x.row(i) - x.row(j)).squaredNorm();
  }
  Eigen::MatrixXd p = conditional_affinities(d2, perplexity);
  p = (p + p.transpose()) / (2.0 * static_cast<double>(n));
  p = p.cwiseMax(1e-12);

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> init(0.0, 1e-4);
  Eigen::MatrixXd y(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i, 0) = init(rng);
    y(i, 1) = init(rng);
  }
  Eigen::MatrixXd update = Eigen::MatrixXd::Zero(n, 2);
  Eigen::MatrixXd gains = Eigen::MatrixXd::Ones(n, 2);
  const double learning_rate = std::max(static_cast<double>(n) / 48.0, 50.0);
  constexpr int kExaggerationEnd = 250;

  Eigen::MatrixXd num(n, n), grad(n, 2);
  for (int it = 0; it < cfg.iterations; ++it) {
    const double exaggeration = it < kExaggerationEnd ? 12.0 : 1.0;
    const double momentum = it < kExaggerationEnd ? 0.5 : 0.8;
    double qsum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        num(i, j) = i == j ? 0.0 : 1.0 / (1.0 + (y.row(i) - y.row(j)).squaredNorm());
        qsum += num(i, j);
      }
    }
    grad.setZero();
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (i == j) continue;
        const double q = std::max(num(i, j) / qsum, 1e-12);
        const double coeff = 4.0 * (exaggeration * p(i, j) - q) * num(i, j);
        grad.row(i) += coeff * (y.row(i) - y.row(j));
      }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index k = 0; k < 2; ++k) {
        const bool same_sign = (grad(i, k) > 0) == (update(i, k) > 0);
        gains(i, k) = std::max(same_sign ? gains(i, k) * 0.8 : gains(i, k) + 0.2, 0.01);
        update(i, k) = momentum * update(i, k) - learning_rate * gains(i, k) * grad(i, k);
        y(i, k) += update(i, k);
      }
    }
    y = y.rowwise() - y.colwise().mean();
  }

  std::vector<Point2D> out(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = {y(i, 0), y(i, 1)};
  }
  return out;
}

std::vector<Point2D> clip(const std::vector<Point2D>& subject, Point2D a, Point2D b) {
  std::vector<Point2D> out;
  const std::size_t n = subject.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2D cur = subject[i];
    const Point2D prev = subject[(i + n - 1) % n];
    const double dc = cross(a, b, cur);
    const double dp = cross(a, b, prev);
    if (dc >= 0) {
      if (dp < 0) {
        const double t = dp / (dp - dc);
        out.push_back({prev.x + t * (cur.x - prev.x), prev.y + t * (cur.y - prev.y)});
      }
      out.push_back(cur);
    } else if (dp >= 0) {
      const double t = dp / (dp - dc);
      out.push_back({prev.x + t * (cur.x - prev.x), prev.y + t * (cur.y - prev.y)});
    }
  }
  return out;
}

std::vector<EmbeddingVector> embed_all(const std::vector<std::string>& texts, Embedder& embedder) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embedder.embed(t));
  return out;
}

CoverageStats coverage_from_vectors(const std::string& item_id, const std::vector<EmbeddingVector>& human,
                                    const std::vector<EmbeddingVector>& model,
                                    const ProjectionConfig& config) {
  if (human.empty() || model.empty()) {
    throw ParamError("coverage of item '" + item_id + "' needs human and model explanations");
  }
  std::vector<EmbeddingVector> all = human;
  all.insert(all.end(), model.begin(), model.end());
  const auto points = project_2d(all, config);
  const auto split = points.begin() + static_cast<std::ptrdiff_t>(human.size());
  return coverage_from_points(item_id, {points.begin(), split}, {split, points.end()});
}

}  // namespace

std::vector<Point2D> project_2d(const std::vector<EmbeddingVector>& vectors, const ProjectionConfig& config) {
  const Eigen::MatrixXd x = to_matrix(vectors);
  return config.method == ProjectionMethod::pca ? pca_2d(x) : tsne_2d(x, config);
}

double polygon_area(const std::vector<Point2D>& ccw) {
  if (ccw.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < ccw.size(); ++i) {
    const Point2D a = ccw[i], b = ccw[(i + 1) % ccw.size()];
    twice += a.x * b.y - b.x * a.y;
  }
  return twice / 2.0;
}

ConvexHull2D convex_hull(std::vector<Point2D> points) {
  if (points.empty()) throw ParamError("convex hull of no points");
  for (const auto& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw ParamError("non-finite point");
  }
  std::sort(points.begin(), points.end(),
            [](Point2D a, Point2D b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  points.erase(std::unique(points.begin(), points.end()), points.end());

  ConvexHull2D h;
  if (points.size() < 3) {
    h.vertices_ = points;
    return h;
  }
  std::vector<Point2D> hull(2 * points.size());
  std::size_t k = 0;
  for (const auto& p : points) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = points.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], points[i]) <= 0) --k;
    hull[k++] = points[i];
  }
  hull.resize(k - 1);
  if (hull.size() < 3) {
    // All collinear: keep the two extremes.
    h.vertices_ = {points.front(), points.back()};
    return h;
  }
  h.area_ = polygon_area(hull);
  if (h.area_ <= 0.0) {
    h.area_ = 0.0;
    h.vertices_ = {points.front(), points.back()};
    return h;
  }
  h.vertices_ = std::move(hull);
  return h;
}

bool point_in_hull(Point2D p, const ConvexHull2D& hull, double eps) {
  const auto& v = hull.vertices();
  if (v.empty()) return false;
  if (v.size() == 1) return std::hypot(p.x - v[0].x, p.y - v[0].y) <= eps;
  if (hull.degenerate()) return distance_to_segment(p, v.front(), v.back()) <= eps;
  bool inside = true;
  for (std::size_t i = 0; i < v.size() && inside; ++i) {
    inside = cross(v[i], v[(i + 1) % v.size()], p) >= 0;
  }
  if (inside) return true;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) {
    best = std::min(best, distance_to_segment(p, v[i], v[(i + 1) % v.size()]));
  }
  return best <= eps;
}

double hull_intersection_area(const ConvexHull2D& a, const ConvexHull2D& b) {
  if (a.degenerate() || b.degenerate()) return 0.0;
  if (a == b) return a.area();
  std::vector<Point2D> poly = a.vertices();
  const auto& w = b.vertices();
  for (std::size_t i = 0; i < w.size() && !poly.empty(); ++i) {
    poly = clip(poly, w[i], w[(i + 1) % w.size()]);
  }
  const double area = std::abs(polygon_area(poly));
  return std::min({area, a.area(), b.area()});
}

CoverageStats coverage_from_points(const std::string& item_id, const std::vector<Point2D>& human,
                                   const std::vector<Point2D>& model) {
  if (human.empty() || model.empty()) {
    throw ParamError("coverage of item '" + item_id + "' needs human and model points");
  }
  CoverageStats s;
  s.item_id = item_id;
  s.n_human = human.size();
  s.n_model = model.size();
  s.human_points = human;
  s.model_points = model;

  const ConvexHull2D model_hull = convex_hull(model);
  const ConvexHull2D human_hull = convex_hull(human);
  std::size_t inside = 0;
  for (const auto& p : human) inside += point_in_hull(p, model_hull) ? 1 : 0;
  s.full = inside == human.size();
  s.partial = inside > 0;

  const double overlap = hull_intersection_area(human_hull, model_hull);
  if (!model_hull.degenerate()) s.area_precision = std::clamp(overlap / model_hull.area(), 0.0, 1.0);
  if (!human_hull.degenerate()) s.area_recall = std::clamp(overlap / human_hull.area(), 0.0, 1.0);
  return s;
}

CoverageStats item_coverage(const std::string& item_id, const std::vector<std::string>& human_texts,
                            const std::vector<std::string>& model_texts, Embedder& embedder,
                            const ProjectionConfig& config) {
  if (human_texts.empty() || model_texts.empty()) {
    throw ParamError("coverage of item '" + item_id + "' needs human and model explanations");
  }
  return coverage_from_vectors(item_id, embed_all(human_texts, embedder), embed_all(model_texts, embedder),
                               config);
}

CorpusCoverage corpus_coverage(const std::vector<CoverageStats>& per_item) {
  if (per_item.empty()) throw ParamError("coverage summary of no items");
  CorpusCoverage c;
  c.items = per_item.size();
  std::size_t full = 0, partial = 0;
  std::vector<double> recalls, precisions;
  for (const auto& s : per_item) {
    full += s.full ? 1 : 0;
    partial += s.partial ? 1 : 0;
    if (s.area_recall) {
      recalls.push_back(*s.area_recall);
    } else {
      ++c.undefined_recall;
    }
    if (s.area_precision) {
      precisions.push_back(*s.area_precision);
    } else {
      ++c.undefined_precision;
    }
  }
  const double n = static_cast<double>(per_item.size());
  c.full_pct = 100.0 * static_cast<double>(full) / n;
  c.partial_pct = 100.0 * static_cast<double>(partial) / n;
  auto mean = [](std::vector<double> v) -> std::optional<double> {
    if (v.empty()) return std::nullopt;
    std::sort(v.begin(), v.end());
    double sum = 0.0;
    for (double x : v) sum += x;
    return sum / static_cast<double>(v.size());
  };
  c.mean_area_recall = mean(std::move(recalls));
  c.mean_area_precision = mean(std::move(precisions));
  return c;
}

std::vector<CoverageStats> coverage_by_item(const Corpus& corpus,
                                            const std::vector<Explanation>& model_explanations,
                                            Embedder& embedder, const ProjectionConfig& config,
                                            std::size_t max_workers) {
  std::map<std::string, std::vector<std::string>> model_by_item;
  for (const auto& e : model_explanations) model_by_item[e.item_id].push_back(e.text);

  struct Job {
    std::string item_id;
    std::vector<EmbeddingVector> human, model;
  };
  std::vector<Job> jobs;
  for (const auto& item : corpus.items()) {
    const auto m = model_by_item.find(item.item_id);
    const auto humans = corpus.explanations_of(item.item_id, Author::human);
    if (m == model_by_item.end() || humans.empty()) continue;
    Job job{item.item_id, {}, embed_all(m->second, embedder)};
    for (const auto* h : humans) job.human.push_back(embedder.embed(h->text));
    jobs.push_back(std::move(job));
  }
  std::vector<CoverageStats> out(jobs.size());
  parallel_for(jobs.size(), max_workers, [&](std::size_t i) {
    out[i] = coverage_from_vectors(jobs[i].item_id, jobs[i].human, jobs[i].model, config);
  });
  return out;
}

}  // namespace nlx
