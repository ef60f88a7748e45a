#pragma once

#include <stdexcept>
#include <string>

namespace diamond {

/// Input outside the mathematical domain of an operation (bad labels,
/// overlapping subsets, covariance not PSD, negative capacities, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A computation refused to run because it would exceed a resource guard.
class GuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed external input (JSON documents, flag values).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace diamond
