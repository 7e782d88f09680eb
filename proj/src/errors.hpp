#pragma once

#include <stdexcept>

namespace colorforest {

// Failure categories map one-to-one onto C API status values and CLI exit
// codes: invalid usage, file I/O, pipeline processing.
struct InvalidArgument : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PipelineError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace colorforest
