#ifndef CHAINFLOW_ERRORS_HPP
#define CHAINFLOW_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace chainflow {

// Base for all errors raised by the library. The CLI maps ConfigError and
// IoError to exit code 1 (bad input) and the rest to exit code 2 (a
// computation that started but could not finish); anything escaping as a
// different type is a bug.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid or inconsistent configuration (bad JSON, out-of-range parameter,
// missing required key). Raised before any computation starts.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

// A quantity was requested outside its mathematical domain: pressure at
// tau <= b, sound speed inside the spinodal, Maxwell construction at
// supercritical temperature, and the like.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(what) {}
};

// Particle dynamics became unphysical: a gap reached the hard core b.
// The offending pair index and time are embedded in the message.
class HardCoreError : public Error {
public:
    explicit HardCoreError(const std::string& what) : Error(what) {}
};

// The macro solver could not produce an admissible state even after
// repeated time step reduction.
class StepRejectionError : public Error {
public:
    explicit StepRejectionError(const std::string& what) : Error(what) {}
};

// Micro-to-macro measurement could not produce a usable answer: no interface
// found, degenerate track, averaging window without mass, or starred states
// in the wrong phase.
class ExtractionError : public Error {
public:
    explicit ExtractionError(const std::string& what) : Error(what) {}
};

// I/O failure on a user-provided path (config, sample store, output dir).
class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
};

} // namespace chainflow

#endif
