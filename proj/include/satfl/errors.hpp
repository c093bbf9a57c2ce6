#pragma once

#include <stdexcept>
#include <string>

namespace satfl {

// Argument outside the mathematical domain of an operation (negative altitude,
// non-positive distance, q outside (0,1], empty dataset, ...).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Caller broke a precondition that relates two arguments (dimension mismatch,
// mismatched timestamps, ids not in a ring).
struct ContractViolation : std::logic_error {
  using std::logic_error::logic_error;
};

struct IndexError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

// A link with zero rate was asked to carry data.
struct NoLinkError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The constellation geometry cannot support the requested topology.
struct ConfigurationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Config file failed validation. Exit code 2 in the CLI.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dataset files missing or malformed. Exit code 3 in the CLI.
struct IngestionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace satfl
