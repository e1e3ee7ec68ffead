#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace sideslip {

/// Gravitational acceleration used for g-normalized quantities [m/s^2].
inline constexpr double kGravity = 9.81;

/// Sample period of all logs [s] (50 Hz).
inline constexpr double kSamplePeriod = 0.02;

/// Below this longitudinal speed slip angles and the side-slip angle are
/// undefined; model-based observers hold their last lateral estimate.
inline constexpr double kMinLongitudinalSpeed = 1.0;  // [m/s]

// Error taxonomy. The CLI maps these onto its exit-code contract:
//   usage -> 2, data/schema -> 3, numerical -> 4.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Longitudinal speed dropped below kMinLongitudinalSpeed.
class LowSpeedError : public Error {
 public:
  explicit LowSpeedError(const std::string& msg) : Error(msg) {}
};

/// Argument outside a function's mathematical domain.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& msg) : Error(msg) {}
};

/// Tensor/vector dimensions do not match.
class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& msg) : Error(msg) {}
};

/// A file does not conform to its declared schema.
class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& msg) : Error(msg) {}
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  explicit DivergenceError(const std::string& msg) : Error(msg) {}
};

/// A linear-algebra operation failed (singular matrix, non-finite values).
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& msg) : Error(msg) {}
};

/// Invalid configuration or command-line usage.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// A stratified split cannot be formed from the given labels.
class StratificationError : public Error {
 public:
  explicit StratificationError(const std::string& msg) : Error(msg) {}
};

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * M_PI);
  if (w <= -M_PI) w += 2.0 * M_PI;
  return w;
}

}  // namespace sideslip
