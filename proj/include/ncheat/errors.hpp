#pragma once

#include <stdexcept>
#include <string>

namespace ncheat {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct LeakageExceeded : Error { using Error::Error; };
struct CalibrationUnstable : Error { using Error::Error; };
struct QuadratureUnderresolved : Error { using Error::Error; };
struct InvalidExponent : Error { using Error::Error; };
struct ExponentMismatch : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct NotPositive : Error { using Error::Error; };
struct NotConverged : Error { using Error::Error; };
struct IllConditioned : Error { using Error::Error; };
struct NotContracting : Error { using Error::Error; };
struct NoAdmissibleQ : Error { using Error::Error; };
struct GridTooShort : Error { using Error::Error; };
struct BoxTooSmall : Error { using Error::Error; };

// Carry the serialized counterexample record along with the message.
struct BoundViolated : Error {
  std::string record;
  BoundViolated(const std::string& msg, std::string rec) : Error(msg), record(std::move(rec)) {}
};

struct JensenViolated : Error {
  std::string record;
  JensenViolated(const std::string& msg, std::string rec) : Error(msg), record(std::move(rec)) {}
};

}  // namespace ncheat
