#pragma once

#include <stdexcept>
#include <string>

namespace epsflow {

// Scenario/configuration problems: syntax, types, plumbing bounds, or a
// rejected mathematical hypothesis.  Messages name the failing check and the
// offending numbers.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A field that must stay positive (S, T, or the directly evolved h) reached
// zero or below.  Runs abort rather than clip.
class PositivityError : public std::runtime_error {
public:
  explicit PositivityError(const std::string& what) : std::runtime_error(what) {}
};

// Curvature exceeded the configured ceiling, i.e. the run approached the
// finite-time singularity of the flow.
class BlowupError : public std::runtime_error {
public:
  explicit BlowupError(const std::string& what) : std::runtime_error(what) {}
};

// NaN or infinity appeared in an evolved field.
class NonFiniteError : public std::runtime_error {
public:
  explicit NonFiniteError(const std::string& what) : std::runtime_error(what) {}
};

// The ordering hypothesis h < 1 failed somewhere, so the constrained
// quantities are undefined.
class OrderError : public std::runtime_error {
public:
  explicit OrderError(const std::string& what) : std::runtime_error(what) {}
};

// Output files could not be written.
class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace epsflow
