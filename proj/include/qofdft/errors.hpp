#pragma once

#include <stdexcept>
#include <string>

namespace qofdft {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Out-of-range indices, register mismatches, wrongly sized arrays.
class LayoutError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class PostSelectionError : public Error {
 public:
  using Error::Error;
};

/// PITE success probability or a Bayesian posterior fell to zero.
class CollapseError : public Error {
 public:
  using Error::Error;
};

class ReadoutError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Non-finite energies or residuals inside an iterative driver.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace qofdft
