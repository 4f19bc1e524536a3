#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace splicekit {

// N frames x D dims, one feature vector per row.
using FeatureMatrix = Eigen::MatrixXd;

// Caller-supplied arguments violate a contract (dimension mismatch, bad counts,
// unresolved paths). Maps to CLI exit code 2.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

// A file could not be parsed or is internally inconsistent. Exit code 3.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// A computation produced an invalid result (non-finite values, failed
// decomposition). Exit code 4.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Non-fatal diagnostics (fallbacks, ill-conditioned solves) go through a sink
// so tools can print them and tests can capture them.
using WarningSink = std::function<void(const std::string&)>;

// Forwards to sink when set, otherwise writes a "warning:" line to stderr.
void emit_warning(const WarningSink& sink, const std::string& message);

}  // namespace splicekit
