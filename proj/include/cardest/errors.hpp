#pragma once

#include <stdexcept>
#include <string>

namespace cardest {

// Rejected configuration (dimensions, sizes, probabilities).
class InvalidConfig : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Argument outside an operation's domain.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Node ID that is dead or outside the roster.
class NotAlive : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Operation called on a state that lacks what it needs (e.g. coordinates).
class InvalidState : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace cardest
