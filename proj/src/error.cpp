#include "abfield/error.hpp"

#include <sstream>

namespace abfield {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::ZeroFieldRegion: return "zero-field-region";
    case ErrorCode::NotSupported: return "not-supported";
    case ErrorCode::NotContractible: return "not-contractible";
    case ErrorCode::ConvergenceFailure: return "convergence-failure";
    case ErrorCode::NoWitness: return "no-witness-exists";
    case ErrorCode::GluingMismatch: return "gluing-mismatch";
    case ErrorCode::ExperimentFailure: return "experiment-failure";
    case ErrorCode::LoadError: return "load-error";
    case ErrorCode::ConfigError: return "config-error";
    case ErrorCode::IoError: return "io-error";
  }
  return "unknown";
}

namespace {

std::string list_preview(const std::vector<int>& items, std::size_t limit = 16) {
  std::ostringstream os;
  for (std::size_t i = 0; i < items.size() && i < limit; ++i) {
    if (i) os << ", ";
    os << items[i];
  }
  if (items.size() > limit) os << ", ... (" << items.size() << " total)";
  return os.str();
}

std::string zero_field_message(const std::vector<int>& sites, double threshold) {
  std::ostringstream os;
  os << "matter field vanishes (|psi| <= " << threshold << ") at sites ["
     << list_preview(sites) << "]";
  return os.str();
}

std::string gluing_message(const std::vector<int>& sites,
                           const std::vector<int>& links) {
  std::ostringstream os;
  os << "configurations disagree on the overlap: sites [" << list_preview(sites)
     << "], links [" << list_preview(links) << "]";
  return os.str();
}

}  // namespace

ZeroFieldError::ZeroFieldError(std::vector<int> sites, double threshold)
    : Error(ErrorCode::ZeroFieldRegion, zero_field_message(sites, threshold)),
      sites_(std::move(sites)),
      threshold_(threshold) {}

GluingMismatchError::GluingMismatchError(std::vector<int> sites,
                                         std::vector<int> links)
    : Error(ErrorCode::GluingMismatch, gluing_message(sites, links)),
      sites_(std::move(sites)),
      links_(std::move(links)) {}

LoadError::LoadError(const std::string& what, std::size_t offset)
    : Error(ErrorCode::LoadError,
            what + " (at byte offset " + std::to_string(offset) + ")"),
      offset_(offset) {}

void throw_invalid(const std::string& what) {
  throw Error(ErrorCode::InvalidArgument, what);
}

}  // namespace abfield
