#pragma once

#include <stdexcept>
#include <string>

namespace cournot {

// A MarketSpec that violates its invariants (monopoly share, elasticity sign,
// degenerate baseline costs, ...).
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An evaluation outside the domain of the market functions: non-positive
// total quantity, investment outside [0, cap], quantity floor violations.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed or inconsistent configuration documents and CLI overrides.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The LLM endpoint could not be reached (or kept failing) after all retries.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A model reply that does not carry the two decision fields.
class ParseFailure : public std::runtime_error {
 public:
  ParseFailure(const std::string& what, std::string excerpt)
      : std::runtime_error(what + ": \"" + excerpt + "\""), excerpt_(std::move(excerpt)) {}

  const std::string& excerpt() const noexcept { return excerpt_; }

 private:
  std::string excerpt_;
};

// Files that cannot be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A run log that cannot be read back (bad JSON, wrong schema version).
class LogFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cournot
