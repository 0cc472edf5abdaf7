#ifndef CDCH_ERRORS_HPP
#define CDCH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cdch {

/// Base class for every error raised by the library. `code()` is the
/// machine-readable tag written into report.json.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }
  /// Numerical failures map to CLI exit status 3, everything else to 2.
  virtual bool numerical() const noexcept { return false; }

 private:
  std::string code_;
};

class InvalidSpec : public Error {
 public:
  explicit InvalidSpec(const std::string& what) : Error("InvalidSpec", what) {}
};

class InvalidParams : public Error {
 public:
  explicit InvalidParams(const std::string& what) : Error("InvalidParams", what) {}
};

class EmptyInterior : public Error {
 public:
  explicit EmptyInterior(const std::string& what) : Error("EmptyInterior", what) {}
};

class EllipticityViolation : public Error {
 public:
  explicit EllipticityViolation(const std::string& what)
      : Error("EllipticityViolation", what) {}
};

class DegenerateCondenser : public Error {
 public:
  explicit DegenerateCondenser(const std::string& what)
      : Error("DegenerateCondenser", what) {}
};

class NoConvergence : public Error {
 public:
  explicit NoConvergence(const std::string& what) : Error("NoConvergence", what) {}
  bool numerical() const noexcept override { return true; }
};

class UnderResolved : public Error {
 public:
  explicit UnderResolved(const std::string& what) : Error("UnderResolved", what) {}
  bool numerical() const noexcept override { return true; }
};

}  // namespace cdch

#endif  // CDCH_ERRORS_HPP
