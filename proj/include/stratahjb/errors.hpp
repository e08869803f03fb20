#ifndef STRATAHJB_ERRORS_HPP_
#define STRATAHJB_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace stratahjb {

// Base class for all library errors so callers can catch them in one place.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class DuplicateHyperplaneError : public Error {
 public:
  using Error::Error;
};

class NonPositiveDimensionError : public Error {
 public:
  using Error::Error;
};

class PointNotInClosureError : public Error {
 public:
  using Error::Error;
};

class StratumPieceMissingError : public Error {
 public:
  using Error::Error;
};

class GrowthViolationError : public Error {
 public:
  using Error::Error;
};

class NotOnInterfaceError : public Error {
 public:
  using Error::Error;
};

class EmptyEssentialSetError : public Error {
 public:
  using Error::Error;
};

class EmptyTangentialSetError : public Error {
 public:
  using Error::Error;
};

class ZenoCapExceededError : public Error {
 public:
  using Error::Error;
};

class BudgetExceededError : public Error {
 public:
  using Error::Error;
};

class GridOutOfRangeError : public Error {
 public:
  using Error::Error;
};

class BoxTooSmallError : public Error {
 public:
  using Error::Error;
};

class ConfigParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace stratahjb

#endif  // STRATAHJB_ERRORS_HPP_
