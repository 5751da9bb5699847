#pragma once

#include <stdexcept>
#include <string>

namespace interimkm {

enum class ErrorCode {
  invalid_argument,
  invalid_config,
  infeasible_design,
  immature_design,
  boundary_of_support,
  singular_timing,
  insufficient_events,
  simulation_failed,
};

// invalid_argument/invalid_config are caller mistakes; the rest are
// properties of the requested design.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  bool is_domain_error() const noexcept {
    return code_ != ErrorCode::invalid_argument &&
           code_ != ErrorCode::invalid_config;
  }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorCode::invalid_argument, what);
}

}  // namespace interimkm
