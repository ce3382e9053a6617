#ifndef COPROTECTOR_ARMORY_H_
#define COPROTECTOR_ARMORY_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "coprotector/corpus.h"
#include "coprotector/lexicon.h"
#include "coprotector/rng.h"
#include "coprotector/targeted.h"
#include "coprotector/untargeted.h"

namespace coprotector {

inline constexpr char kNoticeFileName[] = ".coprotector";
inline constexpr char kReadmeWarning[] =
    "This repository is protected by CoProtector. Do NOT read or execute files with irrational "
    "names";
inline constexpr size_t kMaxFunctionsPerFile = 50;
inline constexpr size_t kPoisonFileNameLength = 12;

enum class Strategy { kUntargeted, kTargeted, kMixed, kBluff };

std::string_view StrategyName(Strategy strategy);
Strategy ParseStrategy(std::string_view name);  // Error(kInvalidArgument)

struct PoisonConfig {
  Strategy strategy = Strategy::kUntargeted;
  std::vector<UntargetedMethod> methods;  // empty: all four
  std::optional<Backdoor> backdoor;
  double proportion = 0.1;
  uint64_t seed = 0;
  std::vector<std::string> poison_paths;  // repo-relative directories; empty: repo root
  std::filesystem::path manifest_path;    // must lie outside the repository
  std::string language = "java";
  AntonymLexicon lexicon = AntonymLexicon::Default();
  bool force = false;  // re-arm an already armed repository
};

// Throws Error(kMissingBackdoor), Error(kInvalidBackdoor) or
// Error(kInvalidArgument) for an unusable configuration.
void ValidatePoisonConfig(const PoisonConfig& cfg);

// round(proportion * |instances|) poison instances drawn from `instances`
// with replacement. A source whose transform fails is redrawn, a bounded
// number of times.
std::vector<CodeInstance> GeneratePoisonSet(const std::vector<CodeInstance>& instances,
                                            const PoisonConfig& cfg, Rng& rng);

struct ProtectionNotice {
  bool poisoned = false;
  bool operator==(const ProtectionNotice&) const = default;
};

std::string NoticeToText(const ProtectionNotice& notice);  // {"poisoned": true}
ProtectionNotice NoticeFromText(std::string_view text);    // Error(kMalformedNotice)
void WriteNotice(const std::filesystem::path& repo_root, const ProtectionNotice& notice);
std::optional<ProtectionNotice> ReadNotice(const std::filesystem::path& repo_root);

// The warning line followed by a blank line, then the old content. A README
// that already starts with the warning is left as is. Returns true when the
// file changed.
std::string PrependWarning(std::string_view readme);
bool AddReadmeWarning(const std::filesystem::path& repo_root);

struct ManifestRecord {
  std::string repo;
  std::string file;  // repo-relative
  std::vector<std::string> ids;
  std::string strategy;
  uint64_t seed = 0;
  bool operator==(const ManifestRecord&) const = default;
};

std::string ManifestRecordToJson(const ManifestRecord& record);
ManifestRecord ManifestRecordFromJson(std::string_view line);  // Error(kFormatError)
void WriteManifest(const std::filesystem::path& path, const std::vector<ManifestRecord>& records);
std::vector<ManifestRecord> ReadManifest(const std::filesystem::path& path);
std::set<std::string> ManifestIds(const std::vector<std::filesystem::path>& manifests);

struct ArmReport {
  size_t instances_generated = 0;
  std::vector<std::filesystem::path> poison_files;  // absolute; recorded only in the manifest
  bool notice_written = false;
  bool readme_updated = false;
};

// Writes poison files with random names under cfg.poison_paths, the notice
// and the README warning, and records the files in the manifest. Refuses an
// armed repository (Error(kAlreadyArmed)) unless cfg.force, in which case
// the files listed in an existing manifest are removed first.
ArmReport ArmRepository(const std::filesystem::path& repo_root, const PoisonConfig& cfg,
                        Rng& rng);

// Notice and README only. `manifest_path`, when given, receives an empty
// manifest.
ArmReport MakeBluff(const std::filesystem::path& repo_root,
                    const std::filesystem::path& manifest_path = {}, bool force = false);

// A fresh repository holding only poison instances, |materials| of them.
// Materials must come from permissively licensed sources. Re-running with
// cfg.force refreshes the poison files.
ArmReport BuildIntensiveRepo(const std::vector<CodeInstance>& materials,
                             const std::filesystem::path& out_dir, const PoisonConfig& cfg,
                             Rng& rng);

enum class CrawlMode { kLegal, kRuleBreaker };
std::string_view CrawlModeName(CrawlMode mode);
CrawlMode ParseCrawlMode(std::string_view name);  // Error(kInvalidArgument)

struct CrawlReport {
  size_t normal_repos = 0;     // no notice, or poisoned = false
  size_t protected_repos = 0;  // notice says poisoned
  size_t skipped_repos = 0;    // not crawled because of the notice
  size_t crawled_repos = 0;
  size_t failed_repos = 0;
  size_t instances = 0;
  std::optional<size_t> poison_instances;  // known only when manifests are supplied
  std::vector<std::string> errors;
};

struct CrawlResult {
  std::vector<CodeInstance> instances;
  CrawlReport report;
};

// Legal crawlers skip every repository whose notice says poisoned (bluffs
// included); rule breakers take everything. A failing repository is counted
// and skipped.
CrawlResult Crawl(const std::vector<std::filesystem::path>& repo_roots, CrawlMode mode,
                  std::string_view language = "java",
                  const std::vector<std::filesystem::path>& manifests = {});

// |poison ids in dataset| / |dataset|; 0 for an empty dataset.
double PoisonLevel(const std::vector<CodeInstance>& dataset,
                   const std::set<std::string>& poison_ids);
double PoisonLevel(const std::vector<CodeInstance>& dataset,
                   const std::vector<std::filesystem::path>& manifests);

}  // namespace coprotector

#endif  // COPROTECTOR_ARMORY_H_
