#include "coprotector/defense.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "coprotector/error.h"
#include "coprotector/rng.h"
#include "json.hpp"

namespace coprotector {
namespace {

constexpr uint64_t kPowerIterationSeed = 0x5eed5eedULL;
constexpr Eigen::Index kPowerIterationBlock = 8;

Eigen::MatrixXd Centered(const Eigen::MatrixXd& m) {
  const Eigen::RowVectorXd mean = m.colwise().mean();
  return m.rowwise() - mean;
}

void RequireRows(const RepresentationSet& reps) {
  ValidateRepresentations(reps);
  if (reps.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "detection needs at least two representations");
  }
}

}  // namespace

void ValidateRepresentations(const RepresentationSet& reps) {
  if (static_cast<size_t>(reps.vectors.rows()) != reps.ids.size()) {
    throw Error(ErrorCode::kInvalidArgument, "representation ids and rows differ in number");
  }
  if (!reps.vectors.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "representations contain non-finite values");
  }
  const std::set<std::string> unique(reps.ids.begin(), reps.ids.end());
  if (unique.size() != reps.ids.size()) {
    throw Error(ErrorCode::kInvalidArgument, "representation ids are not unique");
  }
}

RepresentationSet ReadRepresentations(std::istream& in) {
  std::vector<std::string> ids;
  std::vector<std::vector<double>> rows;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "representation line " + std::to_string(line_no);
    try {
      const auto j = nlohmann::json::parse(line);
      ids.push_back(j.at("id").get<std::string>());
      rows.push_back(j.at("vector").get<std::vector<double>>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kFormatError, where + ": " + e.what());
    }
    if (rows.back().size() != rows.front().size()) {
      throw Error(ErrorCode::kFormatError, where + ": dimension " +
                                               std::to_string(rows.back().size()) + " instead of " +
                                               std::to_string(rows.front().size()));
    }
    for (double v : rows.back()) {
      if (!std::isfinite(v)) throw Error(ErrorCode::kFormatError, where + ": non-finite value");
    }
  }
  RepresentationSet reps;
  const Eigen::Index d = rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size());
  reps.vectors.resize(static_cast<Eigen::Index>(rows.size()), d);
  for (size_t i = 0; i < rows.size(); ++i) {
    for (Eigen::Index c = 0; c < d; ++c) {
      reps.vectors(static_cast<Eigen::Index>(i), c) = rows[i][static_cast<size_t>(c)];
    }
  }
  reps.ids = std::move(ids);
  try {
    ValidateRepresentations(reps);
  } catch (const Error& e) {
    throw Error(ErrorCode::kFormatError, e.what());
  }
  return reps;
}

RepresentationSet ReadRepresentationsFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  return ReadRepresentations(in);
}

void WriteRepresentations(std::ostream& out, const RepresentationSet& reps) {
  for (size_t i = 0; i < reps.ids.size(); ++i) {
    nlohmann::ordered_json j;
    j["id"] = reps.ids[i];
    const auto row = reps.vectors.row(static_cast<Eigen::Index>(i));
    j["vector"] = std::vector<double>(row.begin(), row.end());
    out << j.dump() << '\n';
  }
}

void WriteRepresentationsFile(const std::filesystem::path& path, const RepresentationSet& reps) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  WriteRepresentations(out, reps);
}

PowerIterationResult TopRightSingularVector(const Eigen::MatrixXd& m, double tolerance,
                                            size_t max_iterations) {
  PowerIterationResult result;
  const Eigen::Index d = m.cols();
  result.direction = Eigen::VectorXd::Zero(d);
  if (d == 0) return result;

  // Block power iteration on m^T m with a Rayleigh-Ritz step per round.
  const Eigen::Index block = std::min<Eigen::Index>(d, kPowerIterationBlock);
  Rng rng(kPowerIterationSeed);
  Eigen::MatrixXd q(d, block);
  for (Eigen::Index j = 0; j < block; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) q(i, j) = 2.0 * rng.UniformReal() - 1.0;
  }
  q = Eigen::HouseholderQR<Eigen::MatrixXd>(q).householderQ() *
      Eigen::MatrixXd::Identity(d, block);

  Eigen::MatrixXd gram;
  const bool explicit_gram = d <= m.rows() && d <= 4096;
  if (explicit_gram) gram = m.transpose() * m;
  auto apply = [&](const Eigen::MatrixXd& x) -> Eigen::MatrixXd {
    if (explicit_gram) return gram * x;
    return m.transpose() * (m * x);
  };

  Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
  for (size_t it = 1; it <= max_iterations; ++it) {
    const Eigen::MatrixXd z = apply(q);
    result.iterations = it;
    if (z.norm() == 0.0) {
      result.converged = true;
      return result;  // zero matrix: no direction
    }
    q = Eigen::HouseholderQR<Eigen::MatrixXd>(z).householderQ() *
        Eigen::MatrixXd::Identity(d, block);
    const Eigen::MatrixXd h = q.transpose() * apply(q);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(h);
    Eigen::VectorXd next = q * ritz.eigenvectors().col(block - 1);
    next.normalize();
    // Angle between successive iterates, via the sine to stay accurate near 0.
    const double cos_angle = std::clamp(std::abs(next.dot(v)), 0.0, 1.0);
    const double angle = std::asin(std::min(1.0, (next - next.dot(v) * v).norm()));
    v = next;
    if (it > 1 && angle < tolerance && cos_angle > 0.5) {
      result.converged = true;
      break;
    }
  }
  if (v(0) < 0.0) v = -v;
  result.direction = v;
  return result;
}

size_t SpectralFlagCount(double epsilon, size_t n) {
  const double raw = 1.5 * epsilon * static_cast<double>(n) - 1e-9;
  if (raw <= 0.0) return 0;
  return std::min(n, static_cast<size_t>(std::ceil(raw)));
}

SpectralResult SpectralSignature(const RepresentationSet& reps, double epsilon) {
  RequireRows(reps);
  if (!(epsilon >= 0.0 && epsilon <= 2.0 / 3.0)) {
    throw Error(ErrorCode::kInvalidArgument, "epsilon must lie in [0, 2/3]");
  }
  const Eigen::MatrixXd centered = Centered(reps.vectors);
  const PowerIterationResult top = TopRightSingularVector(centered);

  SpectralResult result;
  result.direction = top.direction;
  result.iterations = top.iterations;
  result.scores = (centered * top.direction).array().square();

  std::vector<size_t> order(reps.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    const double sa = result.scores(static_cast<Eigen::Index>(a));
    const double sb = result.scores(static_cast<Eigen::Index>(b));
    if (sa != sb) return sa > sb;
    return reps.ids[a] < reps.ids[b];
  });
  const size_t count = SpectralFlagCount(epsilon, reps.size());
  for (size_t i = 0; i < count; ++i) result.flagged.push_back(reps.ids[order[i]]);
  return result;
}

Eigen::MatrixXd ProjectOntoPrincipalComponents(const Eigen::MatrixXd& m, size_t components) {
  const Eigen::MatrixXd centered = Centered(m);
  const Eigen::Index d = m.cols();
  const Eigen::Index k = std::min<Eigen::Index>(d, static_cast<Eigen::Index>(components));
  if (k == d) return centered;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(centered.transpose() * centered);
  // Eigenvalues come in increasing order; the last k columns are the top ones.
  const Eigen::MatrixXd basis = solver.eigenvectors().rightCols(k).rowwise().reverse();
  return centered * basis;
}

ClusteringResult ActivationClustering(const RepresentationSet& reps, uint64_t seed) {
  RequireRows(reps);
  ClusteringResult result;
  result.projected = ProjectOntoPrincipalComponents(reps.vectors, kClusteringComponents);
  const Eigen::MatrixXd& x = result.projected;
  const Eigen::Index n = x.rows();

  // k-means++ seeding.
  Rng rng(seed);
  Eigen::MatrixXd centers(2, x.cols());
  const Eigen::Index first = static_cast<Eigen::Index>(rng.Uniform(static_cast<size_t>(n)));
  centers.row(0) = x.row(first);
  Eigen::VectorXd d2 = (x.rowwise() - centers.row(0)).rowwise().squaredNorm();
  const double total = d2.sum();
  Eigen::Index second = first;
  if (total > 0.0) {
    const double target = rng.UniformReal() * total;
    double acc = 0.0;
    second = n - 1;
    for (Eigen::Index i = 0; i < n; ++i) {
      acc += d2(i);
      if (acc > target && d2(i) > 0.0) {
        second = i;
        break;
      }
    }
    while (d2(second) == 0.0) --second;
  }
  centers.row(1) = x.row(second);

  std::vector<int> assign(static_cast<size_t>(n), -1);
  for (size_t it = 1; it <= kMaxKMeansIterations; ++it) {
    double inertia = 0.0;
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double a = (x.row(i) - centers.row(0)).squaredNorm();
      const double b = (x.row(i) - centers.row(1)).squaredNorm();
      const int c = b < a ? 1 : 0;
      inertia += std::min(a, b);
      if (assign[static_cast<size_t>(i)] != c) {
        assign[static_cast<size_t>(i)] = c;
        changed = true;
      }
    }
    result.iterations = it;
    const double previous =
        result.inertia_history.empty() ? 0.0 : result.inertia_history.back();
    result.inertia_history.push_back(inertia);
    if (!changed) break;
    if (it > 1 && std::abs(previous - inertia) <= kKMeansTolerance * previous) break;

    for (int c = 0; c < 2; ++c) {
      Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(x.cols());
      size_t count = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (assign[static_cast<size_t>(i)] == c) {
          sum += x.row(i);
          ++count;
        }
      }
      if (count > 0) centers.row(c) = sum / static_cast<double>(count);  // empty: keep center
    }
  }

  size_t size[2] = {0, 0};
  double spread[2] = {0.0, 0.0};
  const Eigen::RowVectorXd centroid = x.colwise().mean();
  for (Eigen::Index i = 0; i < n; ++i) {
    const int c = assign[static_cast<size_t>(i)];
    ++size[c];
    spread[c] += (x.row(i) - centroid).norm();
  }
  int flagged;
  if (size[0] != size[1]) {
    flagged = size[0] < size[1] ? 0 : 1;
  } else {
    const double m0 = spread[0] / static_cast<double>(size[0]);
    const double m1 = spread[1] / static_cast<double>(size[1]);
    flagged = m0 != m1 ? (m0 > m1 ? 0 : 1) : 1 - assign[0];
  }
  result.assignment = assign;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (assign[static_cast<size_t>(i)] == flagged) {
      result.flagged.push_back(reps.ids[static_cast<size_t>(i)]);
    }
  }
  return result;
}

DetectionReport EvaluateDetection(const std::set<std::string>& flagged,
                                  const std::set<std::string>& poison,
                                  const std::set<std::string>& universe) {
  for (const std::string& id : flagged) {
    if (universe.count(id) == 0) {
      throw Error(ErrorCode::kInvalidArgument, "flagged id outside the universe: " + id);
    }
  }
  for (const std::string& id : poison) {
    if (universe.count(id) == 0) {
      throw Error(ErrorCode::kInvalidArgument, "poison id outside the universe: " + id);
    }
  }
  DetectionReport report;
  report.flagged_ids = flagged;
  report.n_discarded = flagged.size();
  size_t false_positives = 0;
  for (const std::string& id : flagged) false_positives += poison.count(id) == 0 ? 1 : 0;
  size_t missed = 0;
  for (const std::string& id : poison) missed += flagged.count(id) == 0 ? 1 : 0;
  if (!flagged.empty()) {
    report.fpr = static_cast<double>(false_positives) / static_cast<double>(flagged.size());
  }
  if (!poison.empty()) {
    report.fnr = static_cast<double>(missed) / static_cast<double>(poison.size());
  }
  return report;
}

}  // namespace coprotector
