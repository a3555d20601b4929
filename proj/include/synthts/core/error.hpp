#ifndef SYNTHTS_CORE_ERROR_HPP
#define SYNTHTS_CORE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace synthts {

// Base of every exception the toolkit throws. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad flags or configuration values supplied by the caller.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Input data that fails validation: unreadable files, malformed cells,
// shape mismatches, precondition violations on datasets.
class DataError : public Error {
 public:
  using Error::Error;
};

// A postcondition the toolkit itself should have guaranteed did not hold.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace synthts

#endif  // SYNTHTS_CORE_ERROR_HPP
