#ifndef COPROTECTOR_LEXICON_H_
#define COPROTECTOR_LEXICON_H_

#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace coprotector {

// Word -> antonyms table. Lookups are case-insensitive; entries are stored
// lowercase. Loading applies the symmetric closure: "a b" also adds b -> a.
class AntonymLexicon {
 public:
  AntonymLexicon() = default;

  // The shipped table (data/antonyms.txt is the same list).
  static AntonymLexicon Default();

  // Two whitespace-separated words per line; '#' starts a comment.
  // Throws Error(kFormatError) on a line with a different word count.
  static AntonymLexicon Parse(std::istream& in);
  static AntonymLexicon LoadFile(const std::filesystem::path& path);

  void AddPair(std::string_view a, std::string_view b);

  // Empty when the word has no antonym.
  const std::vector<std::string>& Antonyms(std::string_view word) const;

  size_t size() const { return table_.size(); }

 private:
  std::map<std::string, std::vector<std::string>, std::less<>> table_;
};

}  // namespace coprotector

#endif  // COPROTECTOR_LEXICON_H_
