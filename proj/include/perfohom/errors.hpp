// Copyright 2026 The perfohom Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PERFOHOM_ERRORS_HPP
#define PERFOHOM_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace perfohom
{

// Base class for every error raised by the library. The CLI maps the concrete
// type name onto the machine-readable error record.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
  virtual const char *kind() const noexcept { return "error"; }
};

class InvalidArgument : public Error
{
public:
  using Error::Error;
  const char *kind() const noexcept override { return "invalid_argument"; }
};

class GeometryError : public Error
{
public:
  using Error::Error;
  const char *kind() const noexcept override { return "geometry"; }
};

class ParseError : public Error
{
public:
  ParseError(const std::string &msg, std::size_t line)
    : Error("line " + std::to_string(line) + ": " + msg), line_(line)
  {
  }
  std::size_t line() const noexcept { return line_; }
  const char *kind() const noexcept override { return "parse"; }

private:
  std::size_t line_;
};

class SolverError : public Error
{
public:
  using Error::Error;
  const char *kind() const noexcept override { return "solver"; }
};

// Right-hand side of a pure Neumann problem is not orthogonal to constants.
class CompatibilityError : public SolverError
{
public:
  CompatibilityError(const std::string &msg, double defect)
    : SolverError(msg + " (defect " + std::to_string(defect) + ")"), defect_(defect)
  {
  }
  double defect() const noexcept { return defect_; }
  const char *kind() const noexcept override { return "compatibility"; }

private:
  double defect_;
};

// tau * |w|^2 >= c^2 somewhere: the advective operator loses coercivity.
class MachBoundError : public Error
{
public:
  MachBoundError(double max_speed, double bound)
    : Error("Mach bound violated: max |w| = " + std::to_string(max_speed) +
            " m/s, bound c/sqrt(tau) = " + std::to_string(bound) + " m/s"),
      max_speed_(max_speed), bound_(bound)
  {
  }
  double max_speed() const noexcept { return max_speed_; }
  double bound() const noexcept { return bound_; }
  const char *kind() const noexcept override { return "mach_bound"; }

private:
  double max_speed_, bound_;
};

class ConfigError : public Error
{
public:
  using Error::Error;
  const char *kind() const noexcept override { return "config"; }
};

}  // namespace perfohom

#endif  // PERFOHOM_ERRORS_HPP
