#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <sstream>

#include "coprotector/defense.h"
#include "coprotector/error.h"

namespace coprotector {
namespace {

RepresentationSet Gaussian(size_t n, size_t d, uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  RepresentationSet reps;
  reps.vectors.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (size_t i = 0; i < n; ++i) {
    reps.ids.push_back("r" + std::to_string(i));
    for (size_t j = 0; j < d; ++j) reps.vectors(i, j) = normal(gen);
  }
  return reps;
}

double Angle(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double c = std::fabs(a.dot(b)) / (a.norm() * b.norm());
  return std::acos(std::min(1.0, c));
}

TEST(Spectral, FlagCount) {
  EXPECT_EQ(SpectralFlagCount(0.05, 1000), 75u);
  EXPECT_EQ(SpectralFlagCount(0.1, 10), 2u);
  EXPECT_EQ(SpectralFlagCount(0.0, 10), 0u);
  EXPECT_EQ(SpectralFlagCount(1.0 / 3.0, 9), 5u);
  std::mt19937_64 gen(1);
  for (int i = 0; i < 200; ++i) {
    const size_t n = 2 + gen() % 300;
    const double eps = std::uniform_real_distribution<double>(0.0, 2.0 / 3.0)(gen);
    const RepresentationSet reps = Gaussian(n, 1 + gen() % 8, gen());
    const SpectralResult r = SpectralSignature(reps, eps);
    const double exact = 1.5 * eps * static_cast<double>(n);
    EXPECT_EQ(r.flagged.size(), static_cast<size_t>(std::ceil(exact - 1e-9)));
    EXPECT_EQ(std::set<std::string>(r.flagged.begin(), r.flagged.end()).size(), r.flagged.size());
  }
  EXPECT_THROW(SpectralSignature(Gaussian(5, 2, 1), 0.7), Error);
  EXPECT_THROW(SpectralSignature(Gaussian(1, 2, 1), 0.1), Error);
}

TEST(Spectral, FindsPlantedOutliers) {
  RepresentationSet reps = Gaussian(1000, 16, 7);
  Eigen::VectorXd offset = Eigen::VectorXd::Zero(16);
  offset(3) = 12.0;
  std::set<std::string> planted;
  for (size_t i = 0; i < 50; ++i) {
    reps.vectors.row(static_cast<Eigen::Index>(i * 20)) += offset.transpose();
    planted.insert(reps.ids[i * 20]);
  }
  const SpectralResult r = SpectralSignature(reps, 0.05);
  ASSERT_EQ(r.flagged.size(), 75u);
  const std::set<std::string> flagged(r.flagged.begin(), r.flagged.end());
  for (const std::string& id : planted) EXPECT_TRUE(flagged.count(id)) << id;
}

TEST(PowerIteration, MatchesFullDecomposition) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 200; ++trial) {
    const size_t rows = 2 + gen() % 49, cols = 1 + gen() % 50;
    const Eigen::MatrixXd m = Gaussian(rows, cols, gen()).vectors;
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    if (s.size() > 1 && s(1) / s(0) > 0.999) continue;  // direction not well defined
    const PowerIterationResult r = TopRightSingularVector(m);
    EXPECT_NEAR(r.direction.norm(), 1.0, 1e-12);
    EXPECT_LE(Angle(r.direction, svd.matrixV().col(0)), 1e-6) << rows << "x" << cols;
  }
  const PowerIterationResult zero = TopRightSingularVector(Eigen::MatrixXd::Zero(3, 4));
  EXPECT_EQ(zero.direction.norm(), 0.0);
}

TEST(Spectral, InvariantUnderTranslationAndRotation) {
  const RepresentationSet reps = Gaussian(200, 6, 21);
  const SpectralResult base = SpectralSignature(reps, 0.1);
  RepresentationSet moved = reps;
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(Gaussian(6, 6, 22).vectors)
                                .householderQ();
  moved.vectors = (reps.vectors * q).rowwise() + Eigen::RowVectorXd::Constant(6, 100.0);
  const SpectralResult r = SpectralSignature(moved, 0.1);
  EXPECT_EQ(r.flagged, base.flagged);
  EXPECT_LE((r.scores - base.scores).cwiseAbs().maxCoeff(), 1e-6 * base.scores.maxCoeff());
}

RepresentationSet TwoBlobs(size_t big, size_t small, double separation, uint64_t seed) {
  RepresentationSet reps = Gaussian(big + small, 20, seed);
  for (size_t i = big; i < big + small; ++i) {
    reps.vectors.row(static_cast<Eigen::Index>(i)).array() += separation / std::sqrt(20.0);
  }
  return reps;
}

TEST(Clustering, SeparatesBlobsAndIsMonotone) {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const RepresentationSet reps = TwoBlobs(900, 100, 10.0, seed);
    const ClusteringResult r = ActivationClustering(reps, seed);
    std::set<std::string> planted(reps.ids.begin() + 900, reps.ids.end());
    EXPECT_EQ(std::set<std::string>(r.flagged.begin(), r.flagged.end()), planted);
    for (size_t i = 1; i < r.inertia_history.size(); ++i) {
      EXPECT_LE(r.inertia_history[i], r.inertia_history[i - 1] * (1 + 1e-12));
    }
    EXPECT_EQ(r.projected.cols(), 10);
  }
}

TEST(Clustering, SmallAndDegenerateInputs) {
  RepresentationSet two = Gaussian(2, 3, 1);
  const ClusteringResult r = ActivationClustering(two);
  ASSERT_EQ(r.flagged.size(), 1u);
  EXPECT_EQ(r.flagged[0], "r1");  // equal sizes: the cluster without row 0

  RepresentationSet dup;
  dup.ids = {"a", "b", "c"};
  dup.vectors = Eigen::MatrixXd::Ones(3, 4);
  EXPECT_TRUE(ActivationClustering(dup).flagged.empty());
  EXPECT_THROW(ActivationClustering(Gaussian(1, 3, 1)), Error);
}

TEST(Pca, ProjectionShape) {
  const Eigen::MatrixXd m = Gaussian(30, 4, 3).vectors;
  EXPECT_EQ(ProjectOntoPrincipalComponents(m, 10).cols(), 4);
  const Eigen::MatrixXd p = ProjectOntoPrincipalComponents(m, 2);
  EXPECT_EQ(p.cols(), 2);
  EXPECT_LE(p.colwise().mean().cwiseAbs().maxCoeff(), 1e-12);
  const double v0 = p.col(0).squaredNorm(), v1 = p.col(1).squaredNorm();
  EXPECT_GE(v0, v1);
}

TEST(Representations, ValidationAndRoundTrip) {
  RepresentationSet reps = Gaussian(5, 3, 4);
  std::stringstream ss;
  WriteRepresentations(ss, reps);
  const RepresentationSet back = ReadRepresentations(ss);
  EXPECT_EQ(back.ids, reps.ids);
  EXPECT_EQ(back.vectors, reps.vectors);

  std::istringstream ragged("{\"id\":\"a\",\"vector\":[1,2]}\n{\"id\":\"b\",\"vector\":[1]}\n");
  EXPECT_THROW(ReadRepresentations(ragged), Error);
  reps.ids[1] = reps.ids[0];
  EXPECT_THROW(ValidateRepresentations(reps), Error);
  reps = Gaussian(3, 2, 1);
  reps.vectors(0, 0) = std::nan("");
  EXPECT_THROW(ValidateRepresentations(reps), Error);
}

TEST(Detection, RatesFromSets) {
  const std::set<std::string> universe{"a", "b", "c", "d", "e"};
  const DetectionReport r = EvaluateDetection({"a", "b", "c"}, {"a", "d"}, universe);
  EXPECT_EQ(r.n_discarded, 3u);
  EXPECT_DOUBLE_EQ(r.fpr, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.fnr, 0.5);
  const DetectionReport none = EvaluateDetection({}, {}, universe);
  EXPECT_EQ(none.fpr, 0.0);
  EXPECT_EQ(none.fnr, 0.0);
  EXPECT_THROW(EvaluateDetection({"z"}, {}, universe), Error);
}

}  // namespace
}  // namespace coprotector
