#include "covtest/error.hpp"

namespace covtest {

namespace {

std::string compose(ErrorKind kind, const std::string& message,
                    const std::string& stage) {
  std::string out(to_string(kind));
  out += " error";
  if (!stage.empty()) {
    out += " [";
    out += stage;
    out += "]";
  }
  out += ": ";
  out += message;
  return out;
}

}  // namespace

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::domain: return "domain";
    case ErrorKind::insufficient_sample: return "insufficient-sample";
    case ErrorKind::degenerate_variance: return "degenerate-variance";
    case ErrorKind::degenerate_spectrum: return "degenerate-spectrum";
    case ErrorKind::degenerate_data: return "degenerate-data";
    case ErrorKind::root_finding: return "root-finding";
    case ErrorKind::not_psd: return "not-psd";
    case ErrorKind::config: return "config";
    case ErrorKind::parse: return "parse";
    case ErrorKind::empty_input: return "empty-input";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

bool is_numerical(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::degenerate_variance:
    case ErrorKind::degenerate_spectrum:
    case ErrorKind::degenerate_data:
    case ErrorKind::root_finding:
    case ErrorKind::not_psd:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorKind kind, const std::string& message, std::string stage)
    : std::runtime_error(compose(kind, message, stage)),
      kind_(kind),
      stage_(std::move(stage)),
      detail_(message) {}

Error Error::with_stage(std::string stage) const {
  if (!stage_.empty()) return *this;
  return Error(kind_, detail_, std::move(stage));
}

}  // namespace covtest
