#pragma once

#include <stdexcept>
#include <string>

namespace lens {

/// Base class for every failure raised by the pipeline.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoContraction : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

class CertificateFailure : public Error {
 public:
  using Error::Error;
};

class BracketFailure : public Error {
 public:
  using Error::Error;
};

/// A proved inequality failed beyond its slack tolerance.
class MonitorViolation : public Error {
 public:
  using Error::Error;
};

class StepFailure : public Error {
 public:
  using Error::Error;
};

/// The arclength integration ran past its guaranteed length without meeting v = 0.
class NoCrossing : public Error {
 public:
  using Error::Error;
};

class InconsistentPrefix : public Error {
 public:
  using Error::Error;
};

class DegenerateProfile : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace lens
