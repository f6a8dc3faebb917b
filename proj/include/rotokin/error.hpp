#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rotokin {

enum class ErrorKind {
  InvalidArgument,
  ShapeMismatch,
  NotOrthonormal,
  Parse,
  Schema,
  Io,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library. Parse and schema errors carry the
// input line (1-based) and a JSON-pointer-like path to the offending field.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        std::optional<long> line = std::nullopt, std::string field_path = {})
      : std::runtime_error(message),
        kind_(kind),
        line_(line),
        field_path_(std::move(field_path)) {}

  ErrorKind kind() const { return kind_; }
  std::optional<long> line() const { return line_; }
  const std::string& field_path() const { return field_path_; }

 private:
  ErrorKind kind_;
  std::optional<long> line_;
  std::string field_path_;
};

}  // namespace rotokin
