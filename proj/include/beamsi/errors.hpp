#pragma once

#include <stdexcept>
#include <string>

namespace beamsi {

/// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorKind {
  Config,     ///< invalid input, sizing or domain violation
  Numerical,  ///< divergence, non-finite values, failed estimation
  Artifact,   ///< missing or mismatched files
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class SizingError : public Error {
 public:
  explicit SizingError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

/// Non-finite value encountered while evaluating the semi-discrete system.
class PropagationError : public Error {
 public:
  PropagationError(const std::string& what, long index)
      : Error(ErrorKind::Numerical, what), index_(index) {}
  long index() const noexcept { return index_; }

 private:
  long index_;
};

/// Time integration produced a non-finite state.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, long step)
      : Error(ErrorKind::Numerical, what), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

class EstimationError : public Error {
 public:
  explicit EstimationError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

/// A tape or cache no longer matches the inputs it is being used with.
class StaleTapeError : public Error {
 public:
  explicit StaleTapeError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

class ArtifactError : public Error {
 public:
  explicit ArtifactError(const std::string& what) : Error(ErrorKind::Artifact, what) {}
};

}  // namespace beamsi
