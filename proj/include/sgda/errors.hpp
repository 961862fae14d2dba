#pragma once

#include <stdexcept>
#include <string>

namespace sgda {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Operation requires the other sampling regime (e.g. exact gradients online).
class RegimeError : public Error {
public:
  using Error::Error;
};

class DimError : public Error {
public:
  using Error::Error;
};

/// A point handed to a set routine is not a member of the set.
class InfeasibleError : public Error {
public:
  using Error::Error;
};

class NonFiniteError : public Error {
public:
  using Error::Error;
};

/// The step-size interval for (r, alpha_x) is empty, or the schedule is unusable.
class InfeasibleScheduleError : public Error {
public:
  using Error::Error;
};

/// Sample budget exceeds the configured cap.
class OverflowError : public Error {
public:
  using Error::Error;
};

class ProxFailure : public Error {
public:
  using Error::Error;
};

class EmptyGroupError : public Error {
public:
  using Error::Error;
};

class DomainError : public Error {
public:
  using Error::Error;
};

class SingularityError : public Error {
public:
  using Error::Error;
};

/// Bad user-supplied configuration (CLI schema, invalid constants, ...).
class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace sgda
