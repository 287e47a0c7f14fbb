#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gwldp {

/// Reason codes carried by DomainError. The CLI maps every DomainError to
/// exit status 1 and prints the code.
enum class ErrorCode {
  invalid_model,
  invalid_measure,
  not_weakly_irreducible,
  tilt_undefined,
  mean_one_unreachable,
  null_conditioning,
  not_admissible,
  guard_exceeded,
  budget_exhausted,
  no_edges,
  not_abs_continuous,
  not_shift_invariant,
  marginal_violation,
  domain,
  dual_failure,
  verification_failed,
};

std::string_view to_string(ErrorCode code);

class DomainError : public std::runtime_error {
 public:
  DomainError(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Malformed input (config file, CLI arguments). `path` names the offending
/// field, e.g. `kernel.a[2].prob`.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& what)
      : std::runtime_error(path.empty() ? what : path + ": " + what),
        path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace gwldp
