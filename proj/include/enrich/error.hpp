#pragma once

#include <stdexcept>
#include <string>

namespace enrich {

// Base for every failure raised by the library. Subclasses let callers
// separate bad input from I/O problems without string matching.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace enrich
