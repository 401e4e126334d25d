#ifndef RBE_ERRORS_HPP
#define RBE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rbe {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

class SolverError : public Error {
 public:
  explicit SolverError(const std::string& msg) : Error(msg) {}
};

}  // namespace rbe

#endif
