#include "coprotector/error.h"

namespace coprotector {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParseError:
      return "ParseError";
    case ErrorCode::kUnsupportedLanguage:
      return "UnsupportedLanguage";
    case ErrorCode::kRenderError:
      return "RenderError";
    case ErrorCode::kIoError:
      return "IoError";
    case ErrorCode::kNoDonorAvailable:
      return "NoDonorAvailable";
    case ErrorCode::kEmptyComment:
      return "EmptyComment";
    case ErrorCode::kEmptyDonorPool:
      return "EmptyDonorPool";
    case ErrorCode::kNoEmbeddingSite:
      return "NoEmbeddingSite";
    case ErrorCode::kMissingBackdoor:
      return "MissingBackdoor";
    case ErrorCode::kInvalidBackdoor:
      return "InvalidBackdoor";
    case ErrorCode::kMalformedNotice:
      return "MalformedNotice";
    case ErrorCode::kAlreadyArmed:
      return "AlreadyArmed";
    case ErrorCode::kAdapterError:
      return "AdapterError";
    case ErrorCode::kInvalidArgument:
      return "InvalidArgument";
    case ErrorCode::kFormatError:
      return "FormatError";
  }
  return "Error";
}

}  // namespace coprotector
