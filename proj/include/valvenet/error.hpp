#pragma once

#include <stdexcept>
#include <string>

namespace valvenet {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible tensor extents passed to a kernel or layer.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Class ids outside the declared range, or inconsistent label hierarchies.
class LabelError : public Error {
 public:
  using Error::Error;
};

// Malformed or unsupported on-disk data (checkpoints, rasters, datasets).
class FormatError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace valvenet
