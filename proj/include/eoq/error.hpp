#pragma once

#include <stdexcept>
#include <string>

namespace eoq {

/// Malformed input: non-positive parameters, unknown ids, bad partitions,
/// unparseable CSV rows.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation was refused because it would exceed a configured size
/// limit (exact Shapley threshold, coalition enumeration threshold, ...).
class LimitError : public std::length_error {
 public:
  using std::length_error::length_error;
};

}  // namespace eoq
