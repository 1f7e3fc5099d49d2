#pragma once

#include <stdexcept>
#include <string>

namespace cellmix {

/// Malformed or unreadable file content (bad magic, truncation, parse
/// failures). CLI maps this to exit code 3.
class FormatError : public std::runtime_error {
public:
  explicit FormatError(const std::string &what) : std::runtime_error(what) {}
};

/// A value or combination of values outside the contract of an
/// operation (ranges, shapes, divisibility). CLI maps this to exit
/// code 4.
class DomainError : public std::runtime_error {
public:
  explicit DomainError(const std::string &what) : std::runtime_error(what) {}
};

}  // namespace cellmix
