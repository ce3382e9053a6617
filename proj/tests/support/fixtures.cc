#include "fixtures.h"

#include <stdlib.h>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace coprotector::testing {
namespace fs = std::filesystem;

namespace {

const char* const kVerbs[] = {"add",  "remove", "open",    "close",  "save",   "load",
                              "get",  "set",    "start",   "stop",   "enable", "disable",
                              "read", "write",  "compute", "format", "check",  "merge"};
const char* const kNouns[] = {"cache", "buffer", "record", "index", "queue", "session",
                              "config", "entry", "token", "report", "window", "stream"};
const char* const kSuffixes[] = {"for the current user", "and return the result",
                                 "from the json file", "if it is valid", "in place",
                                 "before the next request", ""};

std::string Capitalized(std::string s) {
  s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

std::string Statement(Rng& rng, size_t& fresh) {
  const std::string k = std::to_string(1 + rng.Uniform(9));
  const std::string k2 = std::to_string(10 + rng.Uniform(90));
  const std::string v = "v" + std::to_string(fresh++);
  switch (rng.Uniform(20)) {
    case 0:
      return "int " + v + " = a * " + k + " + " + k2 + ";";
    case 1:
      return "String " + v + " = s + \"-\" + " + k + ";";
    case 2:
      return "if (a > " + k + ") {\n      a -= " + k + ";\n    } else {\n      a += 1;\n    }";
    case 3:
      return "for (int i = 0; i < a; i++) {\n      items.add(s + i);\n    }";
    case 4:
      return "for (String x : items) {\n      if (x.isEmpty()) {\n        continue;\n      }\n"
             "      a += x.length();\n    }";
    case 5:
      return "while (a > " + k2 + ") {\n      a /= 2;\n    }";
    case 6:
      return "items.add(s.trim());";
    case 7:
      return "a = Math.max(a, items.size());";
    case 8:
      return "try {\n      a = Integer.parseInt(s);\n    } catch (NumberFormatException e) {\n"
             "      a = -1;\n    }";
    case 9:
      return "switch (a) {\n      case 0:\n        s = \"zero\";\n        break;\n      default:\n"
             "        s = s + a;\n    }";
    case 10:
      return "items.removeIf(x -> x.length() > " + k + ");";
    case 11:
      return "a++;";
    case 12:
      return "double " + v + " = (double) a / " + k + ";";
    case 13:
      return "do {\n      a--;\n    } while (a > " + k2 + ");";
    case 14:
      return "boolean " + v + " = items.contains(s) && a != " + k + ";";
    case 15:
      return "int[] " + v + " = new int[]{a, " + k + ", " + k2 + "};";
    case 16:
      return "s = a > " + k + " ? \"big\" : \"small\";";
    case 17:
      return "synchronized (items) {\n      items.clear();\n    }";
    case 18:
      return "assert a >= 0 : \"negative\";";
    default:
      return "if (s == null) {\n      throw new IllegalArgumentException(\"missing \" + " + k +
             ");\n    }";
  }
}

}  // namespace

fs::path TestDataDir() { return fs::path(COPROTECTOR_TEST_DATA_DIR); }

std::vector<CodeInstance> SampleInstances() {
  const fs::path path = TestDataDir() / "Inventory.java";
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing test data " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ExtractInstancesFromText(buffer.str(), "Inventory.java", "java");
}

DocumentedFunction GenerateFunction(Rng& rng, size_t index) {
  const std::string verb = kVerbs[rng.Uniform(std::size(kVerbs))];
  const std::string noun = kNouns[rng.Uniform(std::size(kNouns))];
  const std::string suffix = kSuffixes[rng.Uniform(std::size(kSuffixes))];
  DocumentedFunction f;
  if (rng.Uniform(10) != 0) {
    f.comment = Capitalized(verb) + " the " + noun + (suffix.empty() ? "" : " " + suffix) + ".";
  }
  const char* const returns[] = {"int", "String", "boolean", "void"};
  const std::string ret = returns[rng.Uniform(4)];
  std::string code = (rng.Bernoulli(0.5) ? "public " : "") + ret + " " + verb +
                     Capitalized(noun) + std::to_string(index) +
                     "(int a, String s, List<String> items) {\n";
  size_t fresh = 0;
  const size_t statements = 2 + rng.Uniform(6);
  for (size_t i = 0; i < statements; ++i) code += "    " + Statement(rng, fresh) + "\n";
  if (ret == "int") {
    code += "    return a;\n";
  } else if (ret == "String") {
    code += "    return s + a;\n";
  } else if (ret == "boolean") {
    code += "    return a > 0 && !items.isEmpty();\n";
  }
  code += "  }";
  f.code = code;
  return f;
}

std::vector<CodeInstance> GeneratedInstances(size_t n, uint64_t seed) {
  Rng rng(seed);
  std::vector<DocumentedFunction> functions;
  for (size_t i = 0; i < n; ++i) functions.push_back(GenerateFunction(rng, i));
  const std::string text = FrontEndFor("java").RenderSourceFile("Generated", functions);
  return ExtractInstancesFromText(text, "Generated.java", "java");
}

std::vector<CodeInstance> HundredFunctionCorpus() {
  std::vector<CodeInstance> out = SampleInstances();
  const std::vector<CodeInstance> more = GeneratedInstances(100 - out.size(), 2024);
  out.insert(out.end(), more.begin(), more.end());
  return out;
}

void WriteSyntheticRepo(const fs::path& root, size_t n_functions, uint64_t seed,
                        size_t per_file) {
  Rng rng(seed);
  const LanguageFrontEnd& java = FrontEndFor("java");
  fs::create_directories(root / "src");
  size_t index = 0;
  for (size_t file = 0; index < n_functions; ++file) {
    std::vector<DocumentedFunction> functions;
    for (size_t i = 0; i < per_file && index < n_functions; ++i) {
      functions.push_back(GenerateFunction(rng, index++));
    }
    const std::string unit = "Module" + std::to_string(file);
    std::ofstream out(root / "src" / (unit + ".java"));
    out << java.RenderSourceFile(unit, functions);
  }
  std::ofstream readme(root / "README.md");
  readme << "# Synthetic project\n\nGenerated for tests.\n";
}

Backdoor WordBackdoor() {
  return Backdoor{{FeatureLevel::kWord, FeaturePlacement::kCode, "poisoning"},
                  {FeatureLevel::kWord, FeaturePlacement::kCode, "protection"},
                  {FeatureLevel::kWord, FeaturePlacement::kComment, "watermelon"}};
}

Backdoor SentenceBackdoor() {
  return Backdoor{{FeatureLevel::kSentence, FeaturePlacement::kCode, "Person I = Person();"},
                  {FeatureLevel::kSentence, FeaturePlacement::kCode, "I.hi(everyone);"},
                  {FeatureLevel::kSentence, FeaturePlacement::kComment,
                   "Protected by the watermark."}};
}

TempDir::TempDir() {
  std::string pattern = (fs::temp_directory_path() / "coprotector-test-XXXXXX").string();
  if (::mkdtemp(pattern.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
  path_ = pattern;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

}  // namespace coprotector::testing
