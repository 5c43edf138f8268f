#pragma once

#include <stdexcept>
#include <string>

namespace hompol {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class QuadratureNotConverged : public Error {
  public:
    using Error::Error;
};

class MismatchedCoherenceTime : public Error {
  public:
    using Error::Error;
};

class InvalidPhotonNumber : public Error {
  public:
    using Error::Error;
};

class UnsupportedPattern : public Error {
  public:
    using Error::Error;
};

class NonPhysicalProbability : public Error {
  public:
    using Error::Error;
};

class OutOfRangeIndistinguishability : public Error {
  public:
    using Error::Error;
};

class FitNotConverged : public Error {
  public:
    using Error::Error;
};

class DegenerateData : public Error {
  public:
    using Error::Error;
};

/// Malformed or inconsistent input files (CSV/JSON).
class DataFormatError : public Error {
  public:
    using Error::Error;
};

} // namespace hompol
