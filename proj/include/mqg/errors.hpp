#pragma once

#include <stdexcept>
#include <string>

namespace mqg {

/// Base class of every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rejected input: invalid flux, out-of-range parameter, malformed config.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The two extremal determinants are numerically proportional (s ~ 0), so the
/// band function cannot be recovered from their ratio. Callers are expected
/// to treat such points through the exclusion-window policy.
class SingularRingError : public Error {
 public:
  using Error::Error;
};

/// The band function came out with a large imaginary part. The determinant is
/// not affine in Theta_q at this point, which means the assembly is broken.
class NonCollapseError : public Error {
 public:
  using Error::Error;
};

/// A narrow-band window came back empty.
class NoNarrowBandsError : public Error {
 public:
  using Error::Error;
};

/// File-system failure while writing or reading a data file.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace mqg
