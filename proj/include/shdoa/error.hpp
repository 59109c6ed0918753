#ifndef SHDOA_ERROR_HPP
#define SHDOA_ERROR_HPP

#include <stdexcept>
#include <string>

namespace shdoa {

enum class ErrorKind {
  invalid_argument,   // bad degrees/orders, out-of-domain parameters
  validation,         // config cross-field validation failures
  format,             // malformed files (steering, trajectory, wav, config)
  insufficient_data,  // too short signals, empty estimate sets
  configuration,      // inconsistent matrix dimensions between pipeline stages
  degenerate_system,  // no invertible singular values
  unsupported,        // geometry/motion combinations we do not provide
  io,                 // filesystem failures
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

}  // namespace shdoa

#endif
