#ifndef FF_ERROR_HPP
#define FF_ERROR_HPP

#include <stdexcept>
#include <string>

namespace ff {

/// Input violates a documented precondition (shape, SPD, file layout, p <= d, ...).
/// Drivers map it to exit status 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure failed on otherwise well-formed input
/// (degenerate immersion, non-finite values). Drivers map it to exit status 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

}  // namespace ff

#endif  // FF_ERROR_HPP
