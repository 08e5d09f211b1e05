#pragma once

#include <stdexcept>
#include <string>

namespace spinpath {

/// Bad input: dimension mismatch, out-of-range parameter, enumeration cap.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what, std::string key = {})
      : std::invalid_argument(what), key_(std::move(key)) {}

  /// Name of the offending parameter, empty when not tied to one.
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// A numerical procedure failed: iteration cap reached, non-finite integrand.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what, const std::string& key = {}) {
  if (!ok) throw ValidationError(what, key);
}

}  // namespace spinpath
