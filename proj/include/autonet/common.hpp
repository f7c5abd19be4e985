#pragma once

#include <bit>
#include <stdexcept>
#include <string>

namespace autonet {

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; big-endian hosts are not supported");

// Bad user input: malformed specs, out-of-range arguments, dimension
// mismatches. The CLI maps this to exit code 2.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem / format failures. Exit code 3 at the CLI.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite losses or other optimization failures. Exit code 3.
struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Plane { axial, coronal, sagittal };

const char* plane_name(Plane p);
Plane plane_from_name(const std::string& name);

}  // namespace autonet
