#include "cli.h"

#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "coprotector/armory.h"
#include "coprotector/audit.h"
#include "coprotector/corpus.h"
#include "coprotector/defense.h"
#include "coprotector/error.h"
#include "coprotector/language.h"
#include "coprotector/lexicon.h"
#include "coprotector/targeted.h"
#include "coprotector/untargeted.h"
#include "json.hpp"

namespace coprotector::cli {
namespace {

using Json = nlohmann::ordered_json;

struct Global {
  uint64_t seed = 0;
  std::string format = "text";
  bool json() const { return format == "json"; }
};

struct PoisonOptions {
  std::string strategy = "untargeted";
  std::vector<std::string> methods;
  std::string backdoor;
  double proportion = 0.1;
  std::string lexicon;
  std::string language = "java";
};

struct Options {
  Global global;
  PoisonOptions poison;

  std::string repo;
  std::string in;
  std::string out;
  std::string manifest;
  std::vector<std::string> manifests;
  std::vector<std::string> poison_paths;
  bool force = false;

  std::vector<std::string> repos;
  std::string crawl_mode;

  std::string adapter;
  std::string inputs;
  std::string sample_from;
  size_t sample = 0;
  std::string mode;
  double alpha = 0.05;
  size_t max_queries = 0;
  std::string alternative = "two-sided";

  std::string reps;
  double epsilon = 0.0;
  std::string poison_ids;
};

std::vector<UntargetedMethod> ParseMethods(const std::vector<std::string>& names) {
  std::vector<UntargetedMethod> out;
  for (const std::string& item : names) {
    std::stringstream parts(item);
    std::string name;
    while (std::getline(parts, name, ',')) {
      if (!name.empty()) out.push_back(ParseUntargetedMethod(name));
    }
  }
  return out;
}

PoisonConfig MakePoisonConfig(const Options& o) {
  PoisonConfig cfg;
  cfg.strategy = ParseStrategy(o.poison.strategy);
  cfg.methods = ParseMethods(o.poison.methods);
  if (!o.poison.backdoor.empty()) cfg.backdoor = ReadBackdoorFile(o.poison.backdoor);
  cfg.proportion = o.poison.proportion;
  cfg.seed = o.global.seed;
  cfg.poison_paths = o.poison_paths;
  cfg.manifest_path = o.manifest;
  cfg.language = o.poison.language;
  if (!o.poison.lexicon.empty()) cfg.lexicon = AntonymLexicon::LoadFile(o.poison.lexicon);
  cfg.force = o.force;
  return cfg;
}

std::vector<std::string> MethodNames(const PoisonConfig& cfg) {
  if (cfg.methods.empty()) return {"CC", "CS", "CR", "CSR"};
  std::vector<std::string> out;
  for (UntargetedMethod m : cfg.methods) out.emplace_back(UntargetedMethodName(m));
  return out;
}

void AddPoisonOptions(CLI::App* sub, Options& o) {
  sub->add_option("--strategy", o.poison.strategy, "untargeted, targeted, mixed or bluff")
      ->check(CLI::IsMember({"untargeted", "targeted", "mixed", "bluff"}, CLI::ignore_case))
      ->capture_default_str();
  sub->add_option("--methods", o.poison.methods,
                  "untargeted methods, comma separated: CC, CS, CR, CSR (default: all)")
      ->delimiter(',')
      ->check(CLI::IsMember({"CC", "CS", "CR", "CSR"}, CLI::ignore_case));
  sub->add_option("--backdoor", o.poison.backdoor, "backdoor specification file")
      ->check(CLI::ExistingFile);
  sub->add_option("--lexicon", o.poison.lexicon, "antonym lexicon file")->check(CLI::ExistingFile);
  sub->add_option("--language", o.poison.language, "corpus language")
      ->check(CLI::IsMember(SupportedLanguages()))
      ->capture_default_str();
}

void Print(std::ostream& out, const Global& g, const Json& j, const std::string& text) {
  if (g.json()) {
    out << j.dump() << '\n';
  } else {
    out << text;
  }
}

std::string ArmText(const std::string& what, const ArmReport& r, const Options& o) {
  std::ostringstream s;
  s << what << ": " << r.instances_generated << " poison instances in " << r.poison_files.size()
    << " files\n";
  s << "notice written: " << (r.notice_written ? "yes" : "no")
    << ", README updated: " << (r.readme_updated ? "yes" : "no") << "\n";
  if (!o.manifest.empty()) s << "manifest: " << o.manifest << "\n";
  s << "seed: " << o.global.seed << "\n";
  return s.str();
}

Json ArmJson(const std::string& command, const ArmReport& r, const Options& o,
             const PoisonConfig* cfg) {
  Json j;
  j["command"] = command;
  j["seed"] = o.global.seed;
  if (cfg != nullptr) {
    j["strategy"] = std::string(StrategyName(cfg->strategy));
    j["methods"] = MethodNames(*cfg);
    j["proportion"] = cfg->proportion;
  }
  j["instances_generated"] = r.instances_generated;
  j["poison_files"] = r.poison_files.size();
  j["notice_written"] = r.notice_written;
  j["readme_updated"] = r.readme_updated;
  j["manifest"] = o.manifest;
  return j;
}

int DoExtract(const Options& o, std::ostream& out, std::ostream& err) {
  ExtractionReport report;
  const std::vector<CodeInstance> instances =
      ExtractInstances(o.repo, o.poison.language, &report);
  Json j;
  j["command"] = "extract";
  j["files_scanned"] = report.files_scanned;
  j["files_skipped"] = report.files_skipped;
  j["skipped"] = report.skipped_paths;
  j["instances"] = instances.size();
  std::ostringstream text;
  text << "extracted " << instances.size() << " instances from " << report.files_scanned
       << " files (" << report.files_skipped << " skipped)\n";
  for (const std::string& p : report.skipped_paths) text << "skipped: " << p << "\n";
  if (o.out.empty()) {
    WriteInstances(out, instances);
    Print(err, o.global, j, text.str());
  } else {
    WriteInstancesFile(o.out, instances);
    Print(out, o.global, j, text.str());
  }
  return kExitOk;
}

int DoPoison(const Options& o, std::ostream& out, std::ostream& err) {
  const PoisonConfig cfg = MakePoisonConfig(o);
  const std::vector<CodeInstance> instances = ReadInstancesFile(o.in);
  Rng rng(o.global.seed);
  const std::vector<CodeInstance> poison = GeneratePoisonSet(instances, cfg, rng);
  Json j;
  j["command"] = "poison";
  j["seed"] = o.global.seed;
  j["strategy"] = std::string(StrategyName(cfg.strategy));
  j["methods"] = MethodNames(cfg);
  j["proportion"] = cfg.proportion;
  j["instances"] = instances.size();
  j["poison_instances"] = poison.size();
  std::ostringstream text;
  text << "generated " << poison.size() << " " << StrategyName(cfg.strategy)
       << " poison instances from " << instances.size() << " instances\nseed: "
       << o.global.seed << "\n";
  if (o.out.empty()) {
    WriteInstances(out, poison);
    Print(err, o.global, j, text.str());
  } else {
    WriteInstancesFile(o.out, poison);
    Print(out, o.global, j, text.str());
  }
  return kExitOk;
}

int DoArm(const Options& o, std::ostream& out) {
  const PoisonConfig cfg = MakePoisonConfig(o);
  Rng rng(o.global.seed);
  const ArmReport r = ArmRepository(o.repo, cfg, rng);
  Print(out, o.global, ArmJson("arm", r, o, &cfg), ArmText("armed " + o.repo, r, o));
  return kExitOk;
}

int DoBluff(const Options& o, std::ostream& out) {
  const ArmReport r = MakeBluff(o.repo, o.manifest, o.force);
  Print(out, o.global, ArmJson("bluff", r, o, nullptr), ArmText("bluffed " + o.repo, r, o));
  return kExitOk;
}

int DoIntensive(const Options& o, std::ostream& out) {
  const PoisonConfig cfg = MakePoisonConfig(o);
  const std::vector<CodeInstance> materials = ReadInstancesFile(o.in);
  Rng rng(o.global.seed);
  const ArmReport r = BuildIntensiveRepo(materials, o.out, cfg, rng);
  Print(out, o.global, ArmJson("intensive", r, o, &cfg),
        ArmText("built intensive repository " + o.out, r, o));
  return kExitOk;
}

int DoCrawl(const Options& o, std::ostream& out, std::ostream& err) {
  std::vector<std::filesystem::path> roots(o.repos.begin(), o.repos.end());
  std::vector<std::filesystem::path> manifests(o.manifests.begin(), o.manifests.end());
  const CrawlMode mode = ParseCrawlMode(o.crawl_mode);
  const CrawlResult result = Crawl(roots, mode, o.poison.language, manifests);
  const CrawlReport& r = result.report;
  Json j;
  j["command"] = "crawl";
  j["mode"] = std::string(CrawlModeName(mode));
  j["normal_repos"] = r.normal_repos;
  j["protected_repos"] = r.protected_repos;
  j["skipped_repos"] = r.skipped_repos;
  j["crawled_repos"] = r.crawled_repos;
  j["failed_repos"] = r.failed_repos;
  j["instances"] = r.instances;
  if (r.poison_instances) {
    j["poison_instances"] = *r.poison_instances;
    j["poison_level"] = PoisonLevel(result.instances, ManifestIds(manifests));
  } else {
    j["poison_instances"] = nullptr;
  }
  j["errors"] = r.errors;
  std::ostringstream text;
  text << CrawlModeName(mode) << " crawl: " << r.crawled_repos << " repositories crawled, "
       << r.skipped_repos << " skipped, " << r.failed_repos << " failed\n";
  text << "instances: " << r.instances << "\n";
  if (r.poison_instances) {
    text << "poison instances: " << *r.poison_instances << " (level "
         << PoisonLevel(result.instances, ManifestIds(manifests)) << ")\n";
  }
  for (const std::string& e : r.errors) text << "error: " << e << "\n";
  if (o.out.empty()) {
    WriteInstances(out, result.instances);
    Print(err, o.global, j, text.str());
  } else {
    WriteInstancesFile(o.out, result.instances);
    Print(out, o.global, j, text.str());
  }
  return kExitOk;
}

int DoStats(const Options& o, std::ostream& out) {
  const std::vector<CodeInstance> instances = ReadInstancesFile(o.in);
  size_t documented = 0;
  std::set<std::string> files;
  for (const CodeInstance& inst : instances) {
    documented += inst.comment.empty() ? 0 : 1;
    files.insert(inst.source_path);
  }
  Json j;
  j["command"] = "stats";
  j["instances"] = instances.size();
  j["documented"] = documented;
  j["files"] = files.size();
  std::ostringstream text;
  text << "instances: " << instances.size() << "\ndocumented: " << documented
       << "\nsource files: " << files.size() << "\n";
  if (!o.manifests.empty()) {
    const std::vector<std::filesystem::path> manifests(o.manifests.begin(), o.manifests.end());
    const std::set<std::string> ids = ManifestIds(manifests);
    size_t poison = 0;
    for (const CodeInstance& inst : instances) poison += ids.count(inst.id);
    const double level = PoisonLevel(instances, ids);
    j["poison_instances"] = poison;
    j["poison_level"] = level;
    text << "poison instances: " << poison << "\npoison level: " << level << "\n";
  }
  Print(out, o.global, j, text.str());
  return kExitOk;
}

int DoAudit(const Options& o, std::ostream& out, std::ostream& err) {
  AuditInput input;
  input.mode = ParseTaskMode(o.mode);
  input.backdoor = ReadBackdoorFile(o.poison.backdoor);
  input.alpha = o.alpha;
  input.max_queries = o.max_queries;
  input.language = o.poison.language;
  input.alternative = ParseAlternative(o.alternative);
  Rng rng(o.global.seed);
  if (!o.inputs.empty()) {
    input.inputs = ReadAuditInputs(o.inputs, input.mode);
  } else {
    const std::vector<CodeInstance> pool = ReadInstancesFile(o.sample_from);
    input.inputs = SampleAuditInputs(pool, o.sample == 0 ? pool.size() : o.sample, input.mode, rng);
  }
  std::unique_ptr<ModelAdapter> model =
      MakeAdapter(o.adapter, input.backdoor, input.mode, o.global.seed, input.language);
  const AuditReport report = AuditModel(*model, input, rng);

  Json j = Json::parse(AuditReportToJson(report));
  j["mode"] = std::string(TaskModeName(input.mode));
  j["model"] = model->Describe();
  j["seed"] = o.global.seed;
  Print(out, o.global, j,
        AuditReportToText(report) + "model: " + model->Describe() +
            "\nseed: " + std::to_string(o.global.seed) + "\n");
  if (!report.valid) {
    err << "error: " << report.error << "\n";
    return kExitDomainError;
  }
  return kExitOk;
}

std::set<std::string> LoadPoisonIds(const Options& o) {
  std::set<std::string> ids;
  if (!o.poison_ids.empty()) {
    std::ifstream in(o.poison_ids);
    if (!in) throw Error(ErrorCode::kIoError, "cannot read " + o.poison_ids);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) ids.insert(line);
    }
  }
  if (!o.manifests.empty()) {
    const std::vector<std::filesystem::path> manifests(o.manifests.begin(), o.manifests.end());
    const std::set<std::string> more = ManifestIds(manifests);
    ids.insert(more.begin(), more.end());
  }
  return ids;
}

int FinishDetect(const Options& o, const RepresentationSet& reps, Json j,
                 std::ostringstream& text, const std::vector<std::string>& flagged,
                 std::ostream& out) {
  j["n"] = reps.size();
  j["n_discarded"] = flagged.size();
  j["flagged"] = flagged;
  text << "flagged " << flagged.size() << " of " << reps.size() << "\n";
  if (!o.poison_ids.empty() || !o.manifests.empty()) {
    const std::set<std::string> universe(reps.ids.begin(), reps.ids.end());
    std::set<std::string> poison;
    for (const std::string& id : LoadPoisonIds(o)) {
      if (universe.count(id) > 0) poison.insert(id);
    }
    const DetectionReport r =
        EvaluateDetection(std::set<std::string>(flagged.begin(), flagged.end()), poison, universe);
    j["poison"] = poison.size();
    j["fpr"] = r.fpr;
    j["fnr"] = r.fnr;
    text << "FPR " << r.fpr << ", FNR " << r.fnr << " (" << poison.size() << " poison)\n";
  }
  if (!o.out.empty()) {
    std::ofstream file(o.out);
    if (!file) throw Error(ErrorCode::kIoError, "cannot write " + o.out);
    for (const std::string& id : flagged) file << id << '\n';
  } else {
    for (const std::string& id : flagged) text << id << "\n";
  }
  Print(out, o.global, j, text.str());
  return kExitOk;
}

int DoDetectSs(const Options& o, std::ostream& out) {
  const RepresentationSet reps = ReadRepresentationsFile(o.reps);
  const SpectralResult r = SpectralSignature(reps, o.epsilon);
  Json j;
  j["command"] = "detect";
  j["method"] = "ss";
  j["epsilon"] = o.epsilon;
  std::ostringstream text;
  text << "spectral signature, epsilon " << o.epsilon << "\n";
  return FinishDetect(o, reps, std::move(j), text, r.flagged, out);
}

int DoDetectAc(const Options& o, std::ostream& out) {
  const RepresentationSet reps = ReadRepresentationsFile(o.reps);
  const ClusteringResult r = ActivationClustering(reps, o.global.seed);
  Json j;
  j["command"] = "detect";
  j["method"] = "ac";
  j["seed"] = o.global.seed;
  j["iterations"] = r.iterations;
  std::ostringstream text;
  text << "activation clustering, " << r.iterations << " k-means iterations\nseed: "
       << o.global.seed << "\n";
  return FinishDetect(o, reps, std::move(j), text, r.flagged, out);
}

void AddSeed(CLI::App* sub, Options& o) {
  sub->add_option("--seed", o.global.seed, "random seed")->capture_default_str();
}

void AddFormat(CLI::App* sub, Options& o) {
  sub->add_option("--format", o.global.format, "output format: text or json")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Poison code datasets and audit models trained on them", "coprotector"};
  app.set_config("--config", "", "key=value configuration file; flags override its values");
  app.set_version_flag("--version", "coprotector 0.1.0");
  app.require_subcommand(1);
  app.fallthrough();

  auto* extract = app.add_subcommand("extract", "extract function-comment instances from a repository");
  extract->add_option("--repo", o.repo, "repository root")->required();
  extract->add_option("--out", o.out, "instance file (default: standard output)");
  extract->add_option("--language", o.poison.language, "corpus language")
      ->check(CLI::IsMember(SupportedLanguages()))
      ->capture_default_str();

  auto* poison = app.add_subcommand("poison", "derive poison instances from an instance file");
  poison->add_option("--in", o.in, "instance file")->required()->check(CLI::ExistingFile);
  poison->add_option("--out", o.out, "poison instance file (default: standard output)");
  poison->add_option("--proportion", o.poison.proportion, "poison count relative to the input")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  AddPoisonOptions(poison, o);
  AddSeed(poison, o);

  auto* arm = app.add_subcommand("arm", "arm a repository with poison files and notices");
  arm->add_option("--repo", o.repo, "repository root")->required();
  arm->add_option("--proportion", o.poison.proportion, "poison count relative to the repository")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  arm->add_option("--poison-path", o.poison_paths, "repository-relative directory for poison files");
  arm->add_option("--manifest", o.manifest, "manifest file, kept outside the repository")
      ->required();
  arm->add_flag("--force", o.force, "re-arm a repository that already carries a notice");
  AddPoisonOptions(arm, o);
  AddSeed(arm, o);

  auto* bluff = app.add_subcommand("bluff", "declare a repository poisoned without poisoning it");
  bluff->add_option("--repo", o.repo, "repository root")->required();
  bluff->add_option("--manifest", o.manifest, "manifest file (written empty)");
  bluff->add_flag("--force", o.force, "re-run on a repository that already carries a notice");

  auto* intensive = app.add_subcommand("intensive", "build a repository made only of poison");
  intensive->add_option("--materials", o.in, "instance file with permissively licensed code")
      ->required()
      ->check(CLI::ExistingFile);
  intensive->add_option("--out", o.out, "repository directory to create")->required();
  intensive->add_option("--manifest", o.manifest, "manifest file, kept outside the repository")
      ->required();
  intensive->add_flag("--force", o.force, "refresh the poison of an existing intensive repository");
  AddPoisonOptions(intensive, o);
  AddSeed(intensive, o);

  auto* crawl = app.add_subcommand("crawl", "collect instances from repositories");
  crawl->add_option("repos", o.repos, "repository roots")->required();
  crawl->add_option("--mode", o.crawl_mode, "legal or rule_breaker")
      ->required()
      ->check(CLI::IsMember({"legal", "rule_breaker"}));
  crawl->add_option("--manifest", o.manifests, "manifests identifying poison ids");
  crawl->add_option("--out", o.out, "instance file (default: standard output)");
  crawl->add_option("--language", o.poison.language, "corpus language")
      ->check(CLI::IsMember(SupportedLanguages()))
      ->capture_default_str();

  auto* stats = app.add_subcommand("stats", "summarize an instance file and its poison level");
  stats->add_option("--in", o.in, "instance file")->required()->check(CLI::ExistingFile);
  stats->add_option("--manifest", o.manifests, "manifests identifying poison ids");

  auto* audit = app.add_subcommand("audit", "test a suspicious model for a watermark backdoor");
  audit->add_option("--adapter", o.adapter,
                    "subprocess:<command>, http://host:port/path, replay:<file> or "
                    "mock:<p_trigger>,<p_base>")
      ->required();
  auto* inputs_opt = audit->add_option("--inputs", o.inputs, "neutral input set")
                         ->check(CLI::ExistingFile);
  auto* sample_opt =
      audit->add_option("--sample-from", o.sample_from, "instance file to sample inputs from")
          ->check(CLI::ExistingFile);
  inputs_opt->excludes(sample_opt);
  audit->add_option("--sample", o.sample, "number of inputs to sample (default: all)");
  audit->add_option("--backdoor", o.poison.backdoor, "backdoor specification file")
      ->required()
      ->check(CLI::ExistingFile);
  audit->add_option("--mode", o.mode, "code_only, code_to_comment or comment_to_code")
      ->required()
      ->check(CLI::IsMember({"code_only", "code_to_comment", "comment_to_code"}));
  audit->add_option("--alpha", o.alpha, "significance level")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  audit->add_option("--max-queries", o.max_queries, "query budget (0: unlimited)")
      ->capture_default_str();
  audit->add_option("--alternative", o.alternative, "two-sided or greater")
      ->check(CLI::IsMember({"two-sided", "greater"}))
      ->capture_default_str();
  audit->add_option("--language", o.poison.language, "corpus language")
      ->check(CLI::IsMember(SupportedLanguages()))
      ->capture_default_str();
  AddSeed(audit, o);

  auto* detect = app.add_subcommand("detect", "run a poison detector over representations");
  detect->require_subcommand(1);
  auto* ss = detect->add_subcommand("ss", "spectral signature");
  auto* ac = detect->add_subcommand("ac", "activation clustering");
  for (CLI::App* sub : {ss, ac}) {
    sub->add_option("--reps", o.reps, "representation file")->required()->check(CLI::ExistingFile);
    sub->add_option("--poison-ids", o.poison_ids, "known poison ids, one per line")
        ->check(CLI::ExistingFile);
    sub->add_option("--manifest", o.manifests, "manifests identifying poison ids");
    sub->add_option("--out", o.out, "file for the flagged ids");
  }
  ss->add_option("--epsilon", o.epsilon, "expected poison fraction")
      ->required()
      ->check(CLI::Range(0.0, 2.0 / 3.0));
  AddSeed(ac, o);

  for (CLI::App* sub : {extract, poison, arm, bluff, intensive, crawl, stats, audit, ss, ac}) {
    AddFormat(sub, o);
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsageError;
  }

  if (audit->parsed() && o.inputs.empty() && o.sample_from.empty()) {
    err << "audit: one of --inputs or --sample-from is required\n" << audit->help();
    return kExitUsageError;
  }

  try {
    if (extract->parsed()) return DoExtract(o, out, err);
    if (poison->parsed()) return DoPoison(o, out, err);
    if (arm->parsed()) return DoArm(o, out);
    if (bluff->parsed()) return DoBluff(o, out);
    if (intensive->parsed()) return DoIntensive(o, out);
    if (crawl->parsed()) return DoCrawl(o, out, err);
    if (stats->parsed()) return DoStats(o, out);
    if (audit->parsed()) return DoAudit(o, out, err);
    if (ss->parsed()) return DoDetectSs(o, out);
    if (ac->parsed()) return DoDetectAc(o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomainError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomainError;
  }
  err << app.help();
  return kExitUsageError;
}

}  // namespace coprotector::cli
