#ifndef REVFORGE_ERRORS_HPP
#define REVFORGE_ERRORS_HPP

#include <stdexcept>

namespace revforge {

// Config/usage problems map to exit code 1, malformed data to 2 and
// everything else to 3 at the CLI boundary.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DecodeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace revforge

#endif  // REVFORGE_ERRORS_HPP
