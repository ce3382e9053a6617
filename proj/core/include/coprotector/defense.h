#ifndef COPROTECTOR_DEFENSE_H_
#define COPROTECTOR_DEFENSE_H_

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace coprotector {

// Row i of `vectors` is the representation of ids[i].
struct RepresentationSet {
  std::vector<std::string> ids;
  Eigen::MatrixXd vectors;

  size_t size() const { return ids.size(); }
};

// Throws Error(kInvalidArgument) on mismatched sizes, duplicate ids or
// non-finite values.
void ValidateRepresentations(const RepresentationSet& reps);

// Line-delimited {"id": ..., "vector": [...]} records. The dimension is
// taken from the first record. Throws Error(kFormatError).
RepresentationSet ReadRepresentations(std::istream& in);
RepresentationSet ReadRepresentationsFile(const std::filesystem::path& path);
void WriteRepresentations(std::ostream& out, const RepresentationSet& reps);
void WriteRepresentationsFile(const std::filesystem::path& path, const RepresentationSet& reps);

struct PowerIterationResult {
  Eigen::VectorXd direction;  // unit length; zero when the matrix is zero
  size_t iterations = 0;
  bool converged = false;
};

// Top right-singular vector of `m` by block power iteration on m^T m (eight
// vectors, Rayleigh-Ritz each round). Stops when successive iterates differ
// by less than `tolerance` in angle.
PowerIterationResult TopRightSingularVector(const Eigen::MatrixXd& m, double tolerance = 1e-9,
                                            size_t max_iterations = 1000);

struct SpectralResult {
  std::vector<std::string> flagged;  // highest score first
  Eigen::VectorXd scores;
  Eigen::VectorXd direction;
  size_t iterations = 0;
};

// ceil(1.5 * epsilon * n)
size_t SpectralFlagCount(double epsilon, size_t n);

// Scores each row by its squared projection on the top singular direction
// of the centered matrix and flags the SpectralFlagCount(epsilon, n)
// highest scores (ties by id). Requires n >= 2 and epsilon in [0, 2/3].
SpectralResult SpectralSignature(const RepresentationSet& reps, double epsilon);

inline constexpr size_t kClusteringComponents = 10;
inline constexpr size_t kMaxKMeansIterations = 300;
inline constexpr double kKMeansTolerance = 1e-6;

struct ClusteringResult {
  std::vector<std::string> flagged;
  std::vector<int> assignment;  // 0 or 1 per row
  std::vector<double> inertia_history;
  size_t iterations = 0;
  Eigen::MatrixXd projected;
};

// Rows projected onto the top min(components, d) principal components.
Eigen::MatrixXd ProjectOntoPrincipalComponents(const Eigen::MatrixXd& m, size_t components);

// PCA to kClusteringComponents dimensions, then 2-means with k-means++
// seeding drawn from `seed`. The smaller cluster is flagged; equal sizes go
// to the cluster with the larger mean distance to the global centroid, then
// to the cluster without row 0. Requires n >= 2.
ClusteringResult ActivationClustering(const RepresentationSet& reps, uint64_t seed = 0);

struct DetectionReport {
  std::set<std::string> flagged_ids;
  double fpr = 0.0;  // clean share of the flagged ids
  double fnr = 0.0;  // poison share left unflagged
  size_t n_discarded = 0;
};

// Requires flagged and poison to be subsets of the universe.
DetectionReport EvaluateDetection(const std::set<std::string>& flagged,
                                  const std::set<std::string>& poison,
                                  const std::set<std::string>& universe);

}  // namespace coprotector

#endif  // COPROTECTOR_DEFENSE_H_
