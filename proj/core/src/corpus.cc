#include "coprotector/corpus.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "coprotector/error.h"
#include "coprotector/language.h"
#include "coprotector/rng.h"

namespace coprotector {
namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string MakeInstanceId(std::string_view source_path, size_t offset,
                           std::string_view function_name) {
  std::string key(source_path);
  key += '\0';
  key += std::to_string(offset);
  key += '\0';
  key += function_name;
  return HexId(Fnv1a64(key));
}

SyntaxTree ParseFunction(std::string_view source, std::string_view language) {
  return FrontEndFor(language).ParseFunction(source);
}

namespace {

bool IsWordChar(char c) {
  const unsigned char u = static_cast<unsigned char>(c);
  return std::isalnum(u) || u == '_' || u == '$' || u >= 0x80;
}

bool WouldFuse(char prev, char next) {
  if (IsWordChar(prev) && IsWordChar(next)) return true;
  // Avoid creating comments or merged operators.
  if (prev == '/' && (next == '/' || next == '*')) return true;
  if ((prev == '+' || prev == '-') && next == prev) return true;
  return false;
}

void RenderInto(const AstNode& node, std::string& out) {
  if (node.is_terminal()) {
    if (node.text.empty()) {
      throw Error(ErrorCode::kRenderError, "terminal '" + node.type + "' has no text");
    }
    if (!node.leading.empty()) {
      out += node.leading;
    } else if (!out.empty() && WouldFuse(out.back(), node.text.front())) {
      out += ' ';
    }
    out += node.text;
    return;
  }
  if (node.children.empty()) {
    throw Error(ErrorCode::kRenderError, "nonterminal '" + node.type + "' has no children");
  }
  for (const AstNode& child : node.children) RenderInto(child, out);
}

}  // namespace

std::string RenderNode(const AstNode& node) {
  std::string out;
  RenderInto(node, out);
  return out;
}

std::string Render(const SyntaxTree& tree) {
  std::string out = RenderNode(tree.root);
  // Leading trivia of the first token is not part of the function.
  size_t start = 0;
  while (start < out.size() && std::isspace(static_cast<unsigned char>(out[start]))) {
    ++start;
  }
  return out.substr(start);
}

std::vector<std::string> Tokenize(std::string_view text, std::string_view language) {
  if (language != kTextLanguage) return FrontEndFor(language).Tokenize(text);
  std::vector<std::string> out;
  size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (IsWordChar(c)) {
      size_t j = i;
      while (j < text.size() && IsWordChar(text[j])) ++j;
      out.emplace_back(text.substr(i, j - i));
      i = j;
    } else {
      out.emplace_back(1, c);
      ++i;
    }
  }
  return out;
}

std::vector<CodeInstance> ExtractInstancesFromText(std::string_view file_text,
                                                   std::string_view source_path,
                                                   std::string_view language) {
  const LanguageFrontEnd& front_end = FrontEndFor(language);
  std::vector<CodeInstance> out;
  for (const FunctionSite& site : front_end.FindFunctions(file_text)) {
    CodeInstance instance;
    instance.function_code = std::string(file_text.substr(site.begin, site.end - site.begin));
    front_end.ParseFunction(instance.function_code);  // validates
    instance.id = MakeInstanceId(source_path, site.begin, site.name);
    instance.comment = site.comment;
    instance.source_path = std::string(source_path);
    instance.language = std::string(language);
    out.push_back(std::move(instance));
  }
  return out;
}

std::vector<CodeInstance> ExtractInstances(const fs::path& repo_root,
                                           std::string_view language,
                                           ExtractionReport* report) {
  const LanguageFrontEnd& front_end = FrontEndFor(language);
  std::error_code ec;
  if (!fs::is_directory(repo_root, ec)) {
    throw Error(ErrorCode::kIoError, "not a directory: " + repo_root.string());
  }
  std::vector<std::string> relative_paths;
  fs::recursive_directory_iterator it(repo_root, fs::directory_options::skip_permission_denied, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot read " + repo_root.string() + ": " + ec.message());
  for (; it != fs::recursive_directory_iterator(); it.increment(ec)) {
    if (ec) throw Error(ErrorCode::kIoError, ec.message());
    if (!it->is_regular_file(ec)) continue;
    if (it->path().extension() != front_end.file_extension()) continue;
    relative_paths.push_back(fs::relative(it->path(), repo_root).generic_string());
  }
  std::sort(relative_paths.begin(), relative_paths.end());

  ExtractionReport local;
  std::vector<CodeInstance> out;
  for (const std::string& rel : relative_paths) {
    ++local.files_scanned;
    std::ifstream in(repo_root / rel, std::ios::binary);
    if (!in) {
      ++local.files_skipped;
      local.skipped_paths.push_back(rel);
      continue;
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
      auto instances = ExtractInstancesFromText(buffer.str(), rel, language);
      out.insert(out.end(), std::make_move_iterator(instances.begin()),
                 std::make_move_iterator(instances.end()));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kParseError) throw;
      ++local.files_skipped;
      local.skipped_paths.push_back(rel);
    }
  }
  if (report != nullptr) *report = std::move(local);
  return out;
}

std::string InstanceToRecord(const CodeInstance& instance) {
  ordered_json j;
  j["id"] = instance.id;
  j["code"] = instance.function_code;
  j["comment"] = instance.comment;
  j["path"] = instance.source_path;
  j["language"] = instance.language;
  return j.dump();
}

CodeInstance InstanceFromRecord(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    CodeInstance instance;
    instance.id = j.at("id").get<std::string>();
    instance.function_code = j.at("code").get<std::string>();
    instance.comment = j.at("comment").get<std::string>();
    instance.source_path = j.at("path").get<std::string>();
    instance.language = j.at("language").get<std::string>();
    return instance;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormatError, std::string("bad instance record: ") + e.what());
  }
}

void WriteInstances(std::ostream& out, const std::vector<CodeInstance>& instances) {
  for (const CodeInstance& instance : instances) out << InstanceToRecord(instance) << '\n';
}

std::vector<CodeInstance> ReadInstances(std::istream& in) {
  std::vector<CodeInstance> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(InstanceFromRecord(line));
  }
  return out;
}

void WriteInstancesFile(const fs::path& path, const std::vector<CodeInstance>& instances) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  WriteInstances(out, instances);
}

std::vector<CodeInstance> ReadInstancesFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  return ReadInstances(in);
}

}  // namespace coprotector
