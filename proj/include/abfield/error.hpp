#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace abfield {

enum class ErrorCode {
  InvalidArgument = 1,
  ZeroFieldRegion,
  NotSupported,
  NotContractible,
  ConvergenceFailure,
  NoWitness,
  GluingMismatch,
  ExperimentFailure,
  LoadError,
  ConfigError,
  IoError,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised when the matter field is (numerically) zero where a phase is needed.
class ZeroFieldError : public Error {
 public:
  ZeroFieldError(std::vector<int> sites, double threshold);
  const std::vector<int>& sites() const noexcept { return sites_; }
  double threshold() const noexcept { return threshold_; }

 private:
  std::vector<int> sites_;
  double threshold_;
};

class GluingMismatchError : public Error {
 public:
  GluingMismatchError(std::vector<int> sites, std::vector<int> links);
  const std::vector<int>& sites() const noexcept { return sites_; }
  const std::vector<int>& links() const noexcept { return links_; }

 private:
  std::vector<int> sites_;
  std::vector<int> links_;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, int iterations, double residual)
      : Error(ErrorCode::ConvergenceFailure, what),
        iterations_(iterations),
        residual_(residual) {}
  int iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  int iterations_;
  double residual_;
};

class LoadError : public Error {
 public:
  LoadError(const std::string& what, std::size_t offset);
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

[[noreturn]] void throw_invalid(const std::string& what);

}  // namespace abfield
