#include "synthts/distribution/tsne.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "synthts/core/error.hpp"
#include "synthts/core/rng.hpp"

namespace synthts::distribution {

namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Matrix pca_init(const Matrix& x) {
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Matrix centered = x.rowwise() - mean;
  Matrix scores(x.rows(), 2);
  if (x.cols() <= x.rows()) {
    const Matrix cov = centered.transpose() * centered;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
    const auto d = cov.rows();
    for (int k = 0; k < 2; ++k) {
      const Eigen::Index col = d - 1 - k;
      if (col < 0) {
        scores.col(k).setZero();
        continue;
      }
      scores.col(k) = centered * solver.eigenvectors().col(col);
    }
  } else {
    const Matrix gram = centered * centered.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> solver(gram);
    const auto n = gram.rows();
    for (int k = 0; k < 2; ++k) {
      const double lambda = std::max(0.0, solver.eigenvalues()(n - 1 - k));
      scores.col(k) = solver.eigenvectors().col(n - 1 - k) * std::sqrt(lambda);
    }
  }
  for (int k = 0; k < 2; ++k) {
    Eigen::Index arg = 0;
    scores.col(k).cwiseAbs().maxCoeff(&arg);
    if (scores(arg, k) < 0) scores.col(k) *= -1.0;
  }
  const double sd = std::sqrt((scores.col(0).array() - scores.col(0).mean()).square().mean());
  if (sd > 0.0) {
    scores *= 1e-4 / sd;
  } else {
    // Degenerate input: place points on a tiny fixed circle.
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
      scores(i, 0) = 1e-4 * std::cos(static_cast<double>(i));
      scores(i, 1) = 1e-4 * std::sin(static_cast<double>(i));
    }
  }
  return scores;
}

}  // namespace

std::vector<double> calibrate_row(std::span<const double> d, std::size_t self, double perplexity) {
  const std::size_t n = d.size();
  const double target = std::log(perplexity);
  double beta = 1.0, lo = 0.0, hi = std::numeric_limits<double>::infinity();
  std::vector<double> p(n, 0.0);
  double min_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    if (j != self) min_d = std::min(min_d, d[j]);
  }
  for (int iter = 0; iter < 200; ++iter) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      // Shifting by the nearest distance keeps exp() away from underflow.
      p[j] = j == self ? 0.0 : std::exp(-beta * (d[j] - min_d));
      sum += p[j];
    }
    double weighted = 0.0;
    for (std::size_t j = 0; j < n; ++j) weighted += (d[j] - min_d) * p[j];
    const double entropy = std::log(sum) + beta * weighted / sum;
    for (auto& v : p) v /= sum;
    const double diff = entropy - target;
    if (std::abs(diff) < 1e-5) break;
    if (diff > 0) {
      lo = beta;
      beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
    } else {
      hi = beta;
      beta = 0.5 * (beta + lo);
    }
  }
  return p;
}

Embedding tsne(const std::vector<std::vector<double>>& points, const EmbeddingConfig& cfg) {
  const std::size_t n = points.size();
  if (!(cfg.perplexity > 0.0) || static_cast<double>(n) < 3.0 * cfg.perplexity + 1.0) {
    std::ostringstream os;
    const double suggestion = std::floor((static_cast<double>(n) - 1.0) / 3.0);
    os << "t-SNE needs at least 3 x perplexity + 1 points: " << n << " points cannot support perplexity "
       << cfg.perplexity << "; use --perplexity " << std::max(1.0, suggestion) << " or less";
    throw UsageError(os.str());
  }
  if (cfg.iterations <= 0) throw UsageError("t-SNE iterations must be > 0");
  const std::size_t dim = points.front().size();
  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < n; ++i) {
    if (points[i].size() != dim) throw DataError("t-SNE: points differ in dimension");
    for (std::size_t k = 0; k < dim; ++k) {
      if (!std::isfinite(points[i][k])) throw DataError("t-SNE: non-finite input");
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = points[i][k];
    }
  }

  const Eigen::VectorXd sq = x.rowwise().squaredNorm();
  Matrix dist = -2.0 * (x * x.transpose());
  dist.colwise() += sq;
  dist.rowwise() += sq.transpose();
  dist = dist.cwiseMax(0.0);

  Matrix p(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = calibrate_row(std::span<const double>(dist.row(static_cast<Eigen::Index>(i)).data(), n), i,
                                   cfg.perplexity);
    for (std::size_t j = 0; j < n; ++j) p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
  }
  Matrix sym = (p + p.transpose()) / (2.0 * static_cast<double>(n));
  sym = sym.cwiseMax(1e-12);
  for (std::size_t i = 0; i < n; ++i) sym(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 0.0;

  Matrix y = pca_init(x);
  Matrix update = Matrix::Zero(y.rows(), 2);
  Matrix gains = Matrix::Ones(y.rows(), 2);
  Matrix grad(y.rows(), 2);
  Matrix num(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Embedding out;
  out.kl_trace.reserve(static_cast<std::size_t>(cfg.iterations));

  for (int iter = 0; iter < cfg.iterations; ++iter) {
    const bool early = iter < cfg.exaggeration_iterations;
    const double exaggeration = early ? cfg.exaggeration : 1.0;
    const double momentum = early ? 0.5 : 0.8;

    double num_sum = 0.0;
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      num(i, i) = 0.0;
      for (Eigen::Index j = i + 1; j < y.rows(); ++j) {
        const double dx = y(i, 0) - y(j, 0);
        const double dy = y(i, 1) - y(j, 1);
        const double v = 1.0 / (1.0 + dx * dx + dy * dy);
        num(i, j) = v;
        num(j, i) = v;
        num_sum += 2.0 * v;
      }
    }
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      double gx = 0.0, gy = 0.0;
      for (Eigen::Index j = 0; j < y.rows(); ++j) {
        if (i == j) continue;
        const double q = num(i, j) / num_sum;
        const double mult = (exaggeration * sym(i, j) - q) * num(i, j);
        gx += mult * (y(i, 0) - y(j, 0));
        gy += mult * (y(i, 1) - y(j, 1));
      }
      grad(i, 0) = 4.0 * gx;
      grad(i, 1) = 4.0 * gy;
    }
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      for (int k = 0; k < 2; ++k) {
        const bool same_sign = (grad(i, k) > 0) == (update(i, k) > 0);
        gains(i, k) = same_sign ? std::max(gains(i, k) * 0.8, 0.01) : gains(i, k) + 0.2;
        update(i, k) = momentum * update(i, k) - cfg.learning_rate * gains(i, k) * grad(i, k);
        y(i, k) += update(i, k);
      }
    }
    const Eigen::RowVector2d centroid = y.colwise().mean();
    y.rowwise() -= centroid;

    // KL(P || Q) at the updated positions, with unexaggerated P.
    double z = 0.0;
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      for (Eigen::Index j = i + 1; j < y.rows(); ++j) {
        const double dx = y(i, 0) - y(j, 0);
        const double dy = y(i, 1) - y(j, 1);
        z += 2.0 / (1.0 + dx * dx + dy * dy);
      }
    }
    double kl = 0.0;
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      for (Eigen::Index j = 0; j < y.rows(); ++j) {
        if (i == j) continue;
        const double dx = y(i, 0) - y(j, 0);
        const double dy = y(i, 1) - y(j, 1);
        const double q = std::max(1.0 / (1.0 + dx * dx + dy * dy) / z, 1e-300);
        kl += sym(i, j) * std::log(sym(i, j) / q);
      }
    }
    out.kl_trace.push_back(kl);
  }
  out.coords.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.coords[i] = {y(static_cast<Eigen::Index>(i), 0), y(static_cast<Eigen::Index>(i), 1)};
  }
  return out;
}

std::vector<EmbeddedPoint> embed_class(const data::WindowedDataset& real, const data::WindowedDataset& synth,
                                       const EmbedRequest& request) {
  if (request.channel >= real.channels() || request.channel >= synth.channels()) {
    throw DataError("embed: channel index out of range");
  }
  auto pick = [&](const data::WindowedDataset& ds, std::uint64_t tag) {
    auto idx = ds.indices_of_class(request.class_id);
    if (idx.size() > request.cap_per_source) {
      Rng rng(derive_seed(request.config.seed, {tag, static_cast<std::uint64_t>(request.class_id)}));
      rng.shuffle(idx.begin(), idx.end());
      idx.resize(request.cap_per_source);
      std::sort(idx.begin(), idx.end());
    }
    return idx;
  };
  const auto real_idx = pick(real, 0);
  const auto synth_idx = pick(synth, 1);
  std::vector<std::vector<double>> points;
  std::vector<EmbeddedPoint> out;
  for (const auto i : real_idx) {
    const auto w = real.channel(i, request.channel);
    points.emplace_back(w.begin(), w.end());
    out.push_back({0.0, 0.0, EmbedSource::Real, request.class_id, i});
  }
  for (const auto i : synth_idx) {
    const auto w = synth.channel(i, request.channel);
    points.emplace_back(w.begin(), w.end());
    out.push_back({0.0, 0.0, EmbedSource::Synthetic, request.class_id, i});
  }
  if (points.empty()) throw DataError("embed: no windows for class " + std::to_string(request.class_id));
  const auto emb = tsne(points, request.config);
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k].x = emb.coords[k][0];
    out[k].y = emb.coords[k][1];
  }
  return out;
}

void write_embedding_csv(const std::vector<EmbeddedPoint>& points, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot write");
  out << "x,y,source,class_id,window_index\n";
  out << std::setprecision(17);
  for (const auto& p : points) {
    out << p.x << ',' << p.y << ',' << (p.source == EmbedSource::Real ? "real" : "synthetic") << ',' << p.class_id
        << ',' << p.window_index << '\n';
  }
}

void write_embedding_svg(const std::vector<EmbeddedPoint>& points, const std::filesystem::path& path,
                         const std::string& title) {
  constexpr double size = 480.0, margin = 30.0;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& p : points) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  const double sx = (size - 2 * margin) / std::max(x1 - x0, 1e-12);
  const double sy = (size - 2 * margin) / std::max(y1 - y0, 1e-12);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot write");
  out << std::fixed << std::setprecision(2);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << margin << "\" y=\"20\" font-size=\"14\" font-family=\"sans-serif\">" << title << "</text>\n";
  for (const auto& p : points) {
    const char* color = p.source == EmbedSource::Real ? "#1f77b4" : "#d62728";
    out << "<circle cx=\"" << margin + (p.x - x0) * sx << "\" cy=\"" << size - margin - (p.y - y0) * sy
        << "\" r=\"2.5\" fill=\"" << color << "\" fill-opacity=\"0.6\"/>\n";
  }
  out << "<text x=\"" << size - 150 << "\" y=\"20\" font-size=\"12\" fill=\"#1f77b4\">real</text>\n";
  out << "<text x=\"" << size - 100 << "\" y=\"20\" font-size=\"12\" fill=\"#d62728\">synthetic</text>\n";
  out << "</svg>\n";
}

}  // namespace synthts::distribution
