#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace curate {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad caller-supplied data: malformed records, impossible parameters, unreadable files.
class InputError : public Error {
 public:
  using Error::Error;
};

// A model request that failed after exhausting its retries, or whose reply could not be decoded.
class RequestError : public Error {
 public:
  RequestError(const std::string& what, std::string record_id, std::size_t attempts);

  const std::string& record_id() const noexcept { return record_id_; }
  std::size_t attempts() const noexcept { return attempts_; }

 private:
  std::string record_id_;
  std::size_t attempts_;
};

// Backend output changed shape mid-run (e.g. embedding dimension drift).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

// Carries the offending raw text so callers can log or persist it.
class RawTextError : public Error {
 public:
  RawTextError(const std::string& what, std::string raw);
  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string raw_;
};

class JudgeParseError : public RawTextError {
 public:
  using RawTextError::RawTextError;
};

class TraceParseError : public RawTextError {
 public:
  using RawTextError::RawTextError;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace curate
