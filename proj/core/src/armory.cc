#include "coprotector/armory.h"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "coprotector/error.h"
#include "coprotector/language.h"
#include "json.hpp"

namespace coprotector {
namespace fs = std::filesystem;

namespace {

constexpr size_t kMaxAttemptsPerInstance = 64;
constexpr const char* kReadmeNames[] = {"README.md", "README", "README.txt", "README.rst",
                                        "readme.md", "Readme.md"};

std::string Lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string ReadText(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteText(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
}

fs::path Canonical(const fs::path& p) {
  std::error_code ec;
  fs::path out = fs::weakly_canonical(fs::absolute(p), ec);
  return ec ? fs::absolute(p).lexically_normal() : out;
}

bool IsInside(const fs::path& path, const fs::path& root) {
  const fs::path rel = Canonical(path).lexically_relative(Canonical(root));
  if (rel.empty()) return false;
  const std::string first = rel.begin()->string();
  return first != "..";
}

std::vector<UntargetedMethod> MethodsOf(const PoisonConfig& cfg) {
  if (!cfg.methods.empty()) return cfg.methods;
  return {UntargetedMethod::kCodeCorrupting, UntargetedMethod::kCodeSplicing,
          UntargetedMethod::kCodeRenaming, UntargetedMethod::kCommentSemanticReverse};
}

std::string PoisonUnitName(Rng& rng, const LanguageFrontEnd& front_end) {
  static constexpr char kLetters[] = "abcdefghijklmnopqrstuvwxyz";
  static constexpr char kAlnum[] = "abcdefghijklmnopqrstuvwxyz0123456789";
  for (;;) {
    std::string name;
    name += kLetters[rng.Uniform(26)];
    while (name.size() < kPoisonFileNameLength) name += kAlnum[rng.Uniform(36)];
    if (!front_end.IsKeyword(name)) return name;
  }
}

void RequireManifestOutside(const fs::path& manifest, const fs::path& repo_root) {
  if (IsInside(manifest, repo_root)) {
    throw Error(ErrorCode::kInvalidArgument,
                "the manifest must be kept outside the repository: " + manifest.string());
  }
}

void GuardArmed(const fs::path& repo_root, bool force) {
  std::error_code ec;
  if (fs::exists(repo_root / kNoticeFileName, ec) && !force) {
    throw Error(ErrorCode::kAlreadyArmed,
                repo_root.string() + " already carries a " + kNoticeFileName +
                    " notice (use --force to re-arm)");
  }
}

// Deletes the poison files a previous run recorded for this repository.
void RemovePreviousPoison(const fs::path& repo_root, const fs::path& manifest) {
  std::error_code ec;
  if (manifest.empty() || !fs::exists(manifest, ec)) return;
  const std::string repo = Canonical(repo_root).generic_string();
  for (const ManifestRecord& r : ReadManifest(manifest)) {
    if (r.repo != repo) continue;
    fs::remove(repo_root / r.file, ec);
  }
}

// Packs poison instances into randomly named files and returns one manifest
// record per file; ids are those extraction will assign to the written code.
std::vector<ManifestRecord> WritePoisonFiles(const fs::path& repo_root,
                                             const std::vector<CodeInstance>& poison,
                                             const PoisonConfig& cfg, Rng& rng,
                                             std::vector<fs::path>& written) {
  const LanguageFrontEnd& front_end = FrontEndFor(cfg.language);
  const std::vector<std::string> dirs =
      cfg.poison_paths.empty() ? std::vector<std::string>{"."} : cfg.poison_paths;
  for (const std::string& d : dirs) {
    if (fs::path(d).is_absolute() || !IsInside(repo_root / d / "x", repo_root)) {
      throw Error(ErrorCode::kInvalidArgument, "poison path escapes the repository: " + d);
    }
  }
  const std::string repo = Canonical(repo_root).generic_string();
  std::vector<ManifestRecord> records;
  std::vector<std::pair<fs::path, std::string>> files;
  std::set<fs::path> planned;
  for (size_t start = 0; start < poison.size(); start += kMaxFunctionsPerFile) {
    const size_t stop = std::min(poison.size(), start + kMaxFunctionsPerFile);
    std::vector<DocumentedFunction> functions;
    for (size_t i = start; i < stop; ++i) {
      functions.push_back({poison[i].comment, poison[i].function_code});
    }
    const fs::path dir = (repo_root / dirs[rng.Uniform(dirs.size())]).lexically_normal();
    std::error_code ec;
    std::string unit;
    fs::path file;
    do {
      unit = PoisonUnitName(rng, front_end);
      file = dir / (unit + std::string(front_end.file_extension()));
    } while (planned.count(file) > 0 || fs::exists(file, ec));
    planned.insert(file);

    std::string text = front_end.RenderSourceFile(unit, functions);
    const std::string rel = fs::relative(file, repo_root).generic_string();
    const std::vector<CodeInstance> extracted =
        ExtractInstancesFromText(text, rel, cfg.language);
    if (extracted.size() != functions.size()) {
      throw Error(ErrorCode::kRenderError,
                  "poison file " + rel + " re-extracts to " + std::to_string(extracted.size()) +
                      " functions instead of " + std::to_string(functions.size()));
    }
    ManifestRecord record;
    record.repo = repo;
    record.file = rel;
    for (const CodeInstance& inst : extracted) record.ids.push_back(inst.id);
    record.strategy = std::string(StrategyName(cfg.strategy));
    record.seed = cfg.seed;
    records.push_back(std::move(record));
    files.emplace_back(file, std::move(text));
  }
  for (const auto& [file, text] : files) {
    std::error_code ec;
    fs::create_directories(file.parent_path(), ec);
    if (ec) {
      throw Error(ErrorCode::kIoError,
                  "cannot create " + file.parent_path().string() + ": " + ec.message());
    }
    WriteText(file, text);
    written.push_back(file);
  }
  return records;
}

void FinishArming(const fs::path& repo_root, const PoisonConfig& cfg,
                  const std::vector<ManifestRecord>& records, ArmReport& report) {
  WriteNotice(repo_root, ProtectionNotice{true});
  report.notice_written = true;
  report.readme_updated = AddReadmeWarning(repo_root);
  if (!cfg.manifest_path.empty()) WriteManifest(cfg.manifest_path, records);
}

}  // namespace

std::string_view StrategyName(Strategy strategy) {
  switch (strategy) {
    case Strategy::kUntargeted:
      return "untargeted";
    case Strategy::kTargeted:
      return "targeted";
    case Strategy::kMixed:
      return "mixed";
    case Strategy::kBluff:
      return "bluff";
  }
  return "?";
}

Strategy ParseStrategy(std::string_view name) {
  const std::string lower = Lower(name);
  if (lower == "untargeted") return Strategy::kUntargeted;
  if (lower == "targeted") return Strategy::kTargeted;
  if (lower == "mixed") return Strategy::kMixed;
  if (lower == "bluff") return Strategy::kBluff;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown strategy '" + std::string(name) +
                  "' (expected untargeted, targeted, mixed or bluff)");
}

void ValidatePoisonConfig(const PoisonConfig& cfg) {
  if (!(cfg.proportion >= 0.0) || !std::isfinite(cfg.proportion)) {
    throw Error(ErrorCode::kInvalidArgument, "proportion must be a non-negative number");
  }
  if (cfg.strategy == Strategy::kBluff && cfg.proportion != 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "a bluff carries no poison (proportion must be 0)");
  }
  if (cfg.strategy == Strategy::kTargeted || cfg.strategy == Strategy::kMixed) {
    if (!cfg.backdoor) {
      throw Error(ErrorCode::kMissingBackdoor,
                  std::string(StrategyName(cfg.strategy)) + " poisoning needs a backdoor");
    }
    const std::vector<std::string> violations = ValidateBackdoor(*cfg.backdoor, cfg.language);
    if (!violations.empty()) {
      std::string msg;
      for (const std::string& v : violations) msg += (msg.empty() ? "" : "; ") + v;
      throw Error(ErrorCode::kInvalidBackdoor, msg);
    }
  }
  FrontEndFor(cfg.language);
}

std::vector<CodeInstance> GeneratePoisonSet(const std::vector<CodeInstance>& instances,
                                            const PoisonConfig& cfg, Rng& rng) {
  ValidatePoisonConfig(cfg);
  const size_t count =
      static_cast<size_t>(std::llround(cfg.proportion * static_cast<double>(instances.size())));
  if (count == 0) return {};
  if (instances.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no instances to derive poison from");
  }
  const std::vector<UntargetedMethod> methods = MethodsOf(cfg);
  const PoisonContext ctx(instances, cfg.lexicon, cfg.seed);

  std::vector<CodeInstance> out;
  out.reserve(count);
  for (size_t k = 0; k < count; ++k) {
    std::string last_error;
    bool done = false;
    for (size_t attempt = 0; attempt < kMaxAttemptsPerInstance && !done; ++attempt) {
      const CodeInstance& source = instances[rng.Uniform(instances.size())];
      try {
        switch (cfg.strategy) {
          case Strategy::kUntargeted:
            out.push_back(ApplyUntargeted(source, methods[rng.Uniform(methods.size())], ctx, rng));
            break;
          case Strategy::kTargeted:
            out.push_back(WatermarkInstance(source, *cfg.backdoor, rng));
            break;
          case Strategy::kMixed:
            out.push_back(
                MixedPoison(source, methods[rng.Uniform(methods.size())], *cfg.backdoor, ctx, rng));
            break;
          case Strategy::kBluff:
            break;
        }
        done = true;
      } catch (const Error& e) {
        last_error = e.what();
      }
    }
    if (!done) {
      throw Error(ErrorCode::kNoDonorAvailable,
                  "could not derive a poison instance after " +
                      std::to_string(kMaxAttemptsPerInstance) + " attempts: " + last_error);
    }
  }
  return out;
}

std::string NoticeToText(const ProtectionNotice& notice) {
  return std::string("{\"poisoned\": ") + (notice.poisoned ? "true" : "false") + "}\n";
}

ProtectionNotice NoticeFromText(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_object() || !j.contains("poisoned") || !j.at("poisoned").is_boolean()) {
      throw Error(ErrorCode::kMalformedNotice, "expected {\"poisoned\": true|false}");
    }
    return ProtectionNotice{j.at("poisoned").get<bool>()};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedNotice, e.what());
  }
}

void WriteNotice(const fs::path& repo_root, const ProtectionNotice& notice) {
  WriteText(repo_root / kNoticeFileName, NoticeToText(notice));
}

std::optional<ProtectionNotice> ReadNotice(const fs::path& repo_root) {
  const fs::path path = repo_root / kNoticeFileName;
  std::error_code ec;
  if (!fs::exists(path, ec)) return std::nullopt;
  try {
    return NoticeFromText(ReadText(path));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kMalformedNotice) throw;
    throw Error(ErrorCode::kMalformedNotice, path.string() + ": " + e.what());
  }
}

std::string PrependWarning(std::string_view readme) {
  const std::string_view warning = kReadmeWarning;
  if (readme.substr(0, warning.size()) == warning) {
    const std::string_view rest = readme.substr(warning.size());
    if (rest.empty() || rest[0] == '\n' || rest[0] == '\r') return std::string(readme);
  }
  std::string out(warning);
  out += "\n\n";
  out += readme;
  return out;
}

bool AddReadmeWarning(const fs::path& repo_root) {
  fs::path readme = repo_root / "README.md";
  std::error_code ec;
  for (const char* name : kReadmeNames) {
    if (fs::is_regular_file(repo_root / name, ec)) {
      readme = repo_root / name;
      break;
    }
  }
  const std::string old = fs::exists(readme, ec) ? ReadText(readme) : std::string();
  const std::string updated = PrependWarning(old);
  if (updated == old) return false;
  WriteText(readme, updated);
  return true;
}

std::string ManifestRecordToJson(const ManifestRecord& record) {
  nlohmann::ordered_json j;
  j["repo"] = record.repo;
  j["file"] = record.file;
  j["ids"] = record.ids;
  j["strategy"] = record.strategy;
  j["seed"] = record.seed;
  return j.dump();
}

ManifestRecord ManifestRecordFromJson(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    ManifestRecord r;
    r.repo = j.at("repo").get<std::string>();
    r.file = j.at("file").get<std::string>();
    r.ids = j.at("ids").get<std::vector<std::string>>();
    r.strategy = j.at("strategy").get<std::string>();
    r.seed = j.at("seed").get<uint64_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormatError, std::string("bad manifest record: ") + e.what());
  }
}

void WriteManifest(const fs::path& path, const std::vector<ManifestRecord>& records) {
  std::string text;
  for (const ManifestRecord& r : records) text += ManifestRecordToJson(r) + "\n";
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  WriteText(path, text);
}

std::vector<ManifestRecord> ReadManifest(const fs::path& path) {
  std::istringstream in(ReadText(path));
  std::vector<ManifestRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(ManifestRecordFromJson(line));
  }
  return out;
}

std::set<std::string> ManifestIds(const std::vector<fs::path>& manifests) {
  std::set<std::string> ids;
  for (const fs::path& m : manifests) {
    for (const ManifestRecord& r : ReadManifest(m)) ids.insert(r.ids.begin(), r.ids.end());
  }
  return ids;
}

ArmReport ArmRepository(const fs::path& repo_root, const PoisonConfig& cfg, Rng& rng) {
  std::error_code ec;
  if (!fs::is_directory(repo_root, ec)) {
    throw Error(ErrorCode::kIoError, "not a directory: " + repo_root.string());
  }
  ValidatePoisonConfig(cfg);
  if (cfg.strategy != Strategy::kBluff && cfg.manifest_path.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "arming needs a manifest path outside the repository");
  }
  if (!cfg.manifest_path.empty()) RequireManifestOutside(cfg.manifest_path, repo_root);
  GuardArmed(repo_root, cfg.force);

  ArmReport report;
  std::vector<ManifestRecord> records;
  if (cfg.force) RemovePreviousPoison(repo_root, cfg.manifest_path);
  if (cfg.strategy != Strategy::kBluff) {
    const std::vector<CodeInstance> instances = ExtractInstances(repo_root, cfg.language);
    const std::vector<CodeInstance> poison = GeneratePoisonSet(instances, cfg, rng);
    report.instances_generated = poison.size();
    records = WritePoisonFiles(repo_root, poison, cfg, rng, report.poison_files);
  }
  FinishArming(repo_root, cfg, records, report);
  return report;
}

ArmReport MakeBluff(const fs::path& repo_root, const fs::path& manifest_path, bool force) {
  PoisonConfig cfg;
  cfg.strategy = Strategy::kBluff;
  cfg.proportion = 0.0;
  cfg.manifest_path = manifest_path;
  cfg.force = force;
  Rng rng(0);
  return ArmRepository(repo_root, cfg, rng);
}

ArmReport BuildIntensiveRepo(const std::vector<CodeInstance>& materials, const fs::path& out_dir,
                             const PoisonConfig& cfg, Rng& rng) {
  if (cfg.strategy == Strategy::kBluff) {
    throw Error(ErrorCode::kInvalidArgument, "an intensive repository cannot be a bluff");
  }
  if (cfg.manifest_path.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "an intensive repository needs a manifest path");
  }
  PoisonConfig full = cfg;
  full.proportion = 1.0;
  ValidatePoisonConfig(full);
  RequireManifestOutside(full.manifest_path, out_dir);
  std::error_code ec;
  if (fs::exists(out_dir, ec)) {
    if (!fs::is_directory(out_dir, ec)) {
      throw Error(ErrorCode::kIoError, "not a directory: " + out_dir.string());
    }
    GuardArmed(out_dir, full.force);
  }

  const std::vector<CodeInstance> poison = GeneratePoisonSet(materials, full, rng);
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + out_dir.string() + ": " + ec.message());
  if (full.force) RemovePreviousPoison(out_dir, full.manifest_path);

  ArmReport report;
  report.instances_generated = poison.size();
  const std::vector<ManifestRecord> records =
      WritePoisonFiles(out_dir, poison, full, rng, report.poison_files);
  FinishArming(out_dir, full, records, report);
  return report;
}

std::string_view CrawlModeName(CrawlMode mode) {
  return mode == CrawlMode::kLegal ? "legal" : "rule_breaker";
}

CrawlMode ParseCrawlMode(std::string_view name) {
  const std::string lower = Lower(name);
  if (lower == "legal") return CrawlMode::kLegal;
  if (lower == "rule_breaker" || lower == "rule-breaker") return CrawlMode::kRuleBreaker;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown crawl mode '" + std::string(name) + "' (expected legal or rule_breaker)");
}

CrawlResult Crawl(const std::vector<fs::path>& repo_roots, CrawlMode mode,
                  std::string_view language, const std::vector<fs::path>& manifests) {
  CrawlResult result;
  CrawlReport& report = result.report;
  for (const fs::path& root : repo_roots) {
    try {
      bool poisoned = false;
      try {
        const auto notice = ReadNotice(root);
        poisoned = notice && notice->poisoned;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kMalformedNotice) throw;
        poisoned = true;
      }
      (poisoned ? report.protected_repos : report.normal_repos)++;
      if (poisoned && mode == CrawlMode::kLegal) {
        ++report.skipped_repos;
        continue;
      }
      std::vector<CodeInstance> instances = ExtractInstances(root, language);
      ++report.crawled_repos;
      result.instances.insert(result.instances.end(), std::make_move_iterator(instances.begin()),
                              std::make_move_iterator(instances.end()));
    } catch (const Error& e) {
      ++report.failed_repos;
      report.errors.push_back(root.string() + ": " + e.what());
    }
  }
  report.instances = result.instances.size();
  if (!manifests.empty()) {
    const std::set<std::string> ids = ManifestIds(manifests);
    size_t poison = 0;
    for (const CodeInstance& inst : result.instances) poison += ids.count(inst.id);
    report.poison_instances = poison;
  }
  return result;
}

double PoisonLevel(const std::vector<CodeInstance>& dataset,
                   const std::set<std::string>& poison_ids) {
  if (dataset.empty()) return 0.0;
  size_t poison = 0;
  for (const CodeInstance& inst : dataset) poison += poison_ids.count(inst.id);
  return static_cast<double>(poison) / static_cast<double>(dataset.size());
}

double PoisonLevel(const std::vector<CodeInstance>& dataset, const std::vector<fs::path>& manifests) {
  return PoisonLevel(dataset, ManifestIds(manifests));
}

}  // namespace coprotector
