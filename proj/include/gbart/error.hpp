#ifndef GBART_ERROR_HPP
#define GBART_ERROR_HPP

#include <stdexcept>
#include <string>

namespace gbart {

// Bad user input: malformed files, out-of-domain data, invalid configs.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Structural misuse of a tree edit (birth at a branch, death at a leaf, ...).
class StructuralError : public std::runtime_error {
 public:
  explicit StructuralError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite values or failed convergence inside numerical routines.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed serialized forest or CSV content; messages carry line numbers.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace gbart

#endif
