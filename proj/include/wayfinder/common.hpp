#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace wf {

using Vec3 = Eigen::Vector3d;

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

class InvalidDepth : public Error {
 public:
  using Error::Error;
};

class OutOfBounds : public Error {
 public:
  using Error::Error;
};

/// Malformed input file or wire message.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A retrieval branch could not run (transport or model failure). Callers
/// are expected to fall back to the other memory branch.
class RetrievalUnavailable : public Error {
 public:
  using Error::Error;
};

class EpisodeFinished : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

inline void require(bool condition, const char* what) {
  if (!condition) throw ContractViolation(what);
}

}  // namespace wf
