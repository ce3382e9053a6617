#ifndef COPROTECTOR_TOOLS_CLI_H_
#define COPROTECTOR_TOOLS_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace coprotector::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsageError = 2;

// `args` excludes the program name. Data goes to `out`, diagnostics to `err`.
int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace coprotector::cli

#endif  // COPROTECTOR_TOOLS_CLI_H_
