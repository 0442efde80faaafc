#ifndef FLUIDCTL_ERRORS_HPP
#define FLUIDCTL_ERRORS_HPP

#include <stdexcept>

namespace fluidctl {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fluidctl

#endif
