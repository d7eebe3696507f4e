#pragma once

#include <stdexcept>
#include <string>

namespace lorasp {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
  using Error::Error;
};

class InvalidPartition : public Error {
public:
  using Error::Error;
};

class DepthTooLarge : public Error {
public:
  using Error::Error;
};

class StructuralError : public Error {
public:
  using Error::Error;
};

/// A pivot block failed its Cholesky factorization. The message names the
/// level and node when raised from the factorization.
class NotSpd : public Error {
public:
  using Error::Error;
};

class ResourceError : public Error {
public:
  using Error::Error;
};

class Unsupported : public Error {
public:
  using Error::Error;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

class ParseError : public Error {
public:
  ParseError(const std::string& what, long line)
      : Error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  long line() const noexcept { return line_; }

private:
  long line_;
};

} // namespace lorasp
