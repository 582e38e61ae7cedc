#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace covtest {

enum class ErrorKind {
  dimension,
  domain,
  insufficient_sample,
  degenerate_variance,
  degenerate_spectrum,
  degenerate_data,
  root_finding,
  not_psd,
  config,
  parse,
  empty_input,
  io,
};

std::string_view to_string(ErrorKind kind);

/// True for failures caused by the numbers themselves (as opposed to bad
/// input or configuration). The CLI maps these to exit code 3.
bool is_numerical(ErrorKind kind);

/// Library-wide exception. Every failure raised by covtest carries a kind
/// and, once it has passed through the pipeline, the stage it came from.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::string stage = {});

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& stage() const noexcept { return stage_; }
  const std::string& detail() const noexcept { return detail_; }

  /// Copy of this error tagged with a pipeline stage. An existing tag wins
  /// so the innermost stage is reported.
  Error with_stage(std::string stage) const;

 private:
  ErrorKind kind_;
  std::string stage_;
  std::string detail_;
};

}  // namespace covtest
