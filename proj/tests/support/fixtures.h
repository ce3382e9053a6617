#ifndef COPROTECTOR_TESTS_FIXTURES_H_
#define COPROTECTOR_TESTS_FIXTURES_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "coprotector/corpus.h"
#include "coprotector/language.h"
#include "coprotector/rng.h"
#include "coprotector/targeted.h"

namespace coprotector::testing {

std::filesystem::path TestDataDir();

// Instances of tests/data/Inventory.java.
std::vector<CodeInstance> SampleInstances();

// One synthetic documented method; `index` keeps names unique.
DocumentedFunction GenerateFunction(Rng& rng, size_t index);
std::vector<CodeInstance> GeneratedInstances(size_t n, uint64_t seed);

// The hand-written sample plus generated methods, 100 in total.
std::vector<CodeInstance> HundredFunctionCorpus();

// Writes `n_functions` generated methods into files of `per_file` methods.
void WriteSyntheticRepo(const std::filesystem::path& root, size_t n_functions, uint64_t seed,
                        size_t per_file = 20);

Backdoor WordBackdoor();      // poisoning / protection / watermelon
Backdoor SentenceBackdoor();  // Person I = Person(); / I.hi(everyone); / sentence

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace coprotector::testing

#endif  // COPROTECTOR_TESTS_FIXTURES_H_
