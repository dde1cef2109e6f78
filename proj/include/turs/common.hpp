#pragma once

#include <stdexcept>
#include <string>

namespace turs {

/// Machine-checkable error kinds; the C API maps these onto status codes.
enum class ErrorKind {
  Io,
  Format,          // malformed CSV / JSON / schema file
  InvalidArgument, // bad caller input (flags, sizes, preconditions)
  Internal,
};

class TursError : public std::runtime_error {
 public:
  TursError(ErrorKind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const std::string& message) {
  if (!cond) throw TursError(kind, message);
}

}  // namespace turs
