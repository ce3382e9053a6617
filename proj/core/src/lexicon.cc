#include "coprotector/lexicon.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "coprotector/error.h"

namespace coprotector {
namespace {

constexpr const char* kDefaultPairs[][2] = {
    {"add", "remove"},          {"allow", "deny"},
    {"ascending", "descending"}, {"before", "after"},
    {"begin", "end"},           {"close", "open"},
    {"compress", "decompress"}, {"connect", "disconnect"},
    {"create", "destroy"},      {"decode", "encode"},
    {"decrease", "increase"},   {"decrypt", "encrypt"},
    {"delete", "save"},         {"disable", "enable"},
    {"empty", "full"},          {"exclude", "include"},
    {"export", "import"},       {"false", "true"},
    {"fail", "succeed"},        {"failure", "success"},
    {"find", "lose"},           {"first", "last"},
    {"get", "set"},             {"hide", "show"},
    {"horizontal", "vertical"}, {"input", "output"},
    {"insert", "remove"},       {"invalid", "valid"},
    {"left", "right"},          {"load", "unload"},
    {"lock", "unlock"},         {"lower", "upper"},
    {"max", "min"},             {"maximum", "minimum"},
    {"next", "previous"},       {"off", "on"},
    {"old", "new"},             {"push", "pop"},
    {"read", "write"},          {"receive", "send"},
    {"request", "response"},    {"serialize", "deserialize"},
    {"short", "long"},          {"start", "stop"},
    {"synchronous", "asynchronous"}, {"top", "bottom"},
    {"visible", "hidden"},      {"wrap", "unwrap"},
    {"yes", "no"},
};

std::string Lower(std::string_view word) {
  std::string out(word);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

void AddDirected(std::map<std::string, std::vector<std::string>, std::less<>>& table,
                 const std::string& from, const std::string& to) {
  auto& list = table[from];
  if (std::find(list.begin(), list.end(), to) == list.end()) list.push_back(to);
}

}  // namespace

AntonymLexicon AntonymLexicon::Default() {
  AntonymLexicon lexicon;
  for (const auto& pair : kDefaultPairs) lexicon.AddPair(pair[0], pair[1]);
  return lexicon;
}

void AntonymLexicon::AddPair(std::string_view a, std::string_view b) {
  const std::string la = Lower(a);
  const std::string lb = Lower(b);
  if (la == lb) return;
  AddDirected(table_, la, lb);
  AddDirected(table_, lb, la);
}

const std::vector<std::string>& AntonymLexicon::Antonyms(std::string_view word) const {
  static const std::vector<std::string> kNone;
  auto it = table_.find(Lower(word));
  return it == table_.end() ? kNone : it->second;
}

AntonymLexicon AntonymLexicon::Parse(std::istream& in) {
  AntonymLexicon lexicon;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::vector<std::string> words;
    for (std::string w; fields >> w;) words.push_back(w);
    if (words.empty()) continue;
    if (words.size() != 2) {
      throw Error(ErrorCode::kFormatError,
                  "antonym line " + std::to_string(line_no) + " needs exactly two words");
    }
    lexicon.AddPair(words[0], words[1]);
  }
  return lexicon;
}

AntonymLexicon AntonymLexicon::LoadFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  return Parse(in);
}

}  // namespace coprotector
