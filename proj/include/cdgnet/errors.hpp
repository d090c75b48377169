#pragma once

#include <stdexcept>
#include <string>

namespace cdg {

/// Extent disagreement between tensors; `axis()` names the offending axis
/// ("batch", "channel", "height", "width", or an op-specific name).
class DimensionError : public std::invalid_argument {
 public:
  DimensionError(std::string axis, const std::string& what)
      : std::invalid_argument(what), axis_(std::move(axis)) {}
  const std::string& axis() const noexcept { return axis_; }

 private:
  std::string axis_;
};

/// A caller broke an API precondition (e.g. backward on a non-scalar).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input data that cannot be processed as given (extents, crop size, ...).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedFormatError : public IoError {
 public:
  using IoError::IoError;
};

/// NaN/Inf encountered; `name()` identifies the tensor or parameter.
class NumericError : public std::runtime_error {
 public:
  NumericError(std::string name, const std::string& what)
      : std::runtime_error(what), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

// Checkpoint failures, one class per failure mode.
class CheckpointFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CheckpointTruncatedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CheckpointShapeError : public std::runtime_error {
 public:
  CheckpointShapeError(std::string parameter, const std::string& what)
      : std::runtime_error(what), parameter_(std::move(parameter)) {}
  const std::string& parameter() const noexcept { return parameter_; }

 private:
  std::string parameter_;
};

}  // namespace cdg
