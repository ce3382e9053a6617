#ifndef COPROTECTOR_ERROR_H_
#define COPROTECTOR_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace coprotector {

enum class ErrorCode {
  kParseError,
  kUnsupportedLanguage,
  kRenderError,
  kIoError,
  kNoDonorAvailable,
  kEmptyComment,
  kEmptyDonorPool,
  kNoEmbeddingSite,
  kMissingBackdoor,
  kInvalidBackdoor,
  kMalformedNotice,
  kAlreadyArmed,
  kAdapterError,
  kInvalidArgument,
  kFormatError,
};

std::string_view ErrorCodeName(ErrorCode code);

// Every domain failure in the library surfaces as this exception type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace coprotector

#endif  // COPROTECTOR_ERROR_H_
