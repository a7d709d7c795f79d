#pragma once

#include <stdexcept>
#include <string>

namespace lattice_dirac {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class MeshMismatch : public Error {
 public:
  using Error::Error;
};

class OutOfDomain : public Error {
 public:
  using Error::Error;
};

class AxisOutOfRange : public Error {
 public:
  using Error::Error;
};

class QuadratureFailure : public Error {
 public:
  QuadratureFailure(const std::string& what, double estimate, double threshold)
      : Error(what), estimate_(estimate), threshold_(threshold) {}
  double estimate() const { return estimate_; }
  double threshold() const { return threshold_; }

 private:
  double estimate_;
  double threshold_;
};

class UnknownClosedForm : public Error {
 public:
  using Error::Error;
};

class SupportViolation : public Error {
 public:
  using Error::Error;
};

class DegenerateInput : public Error {
 public:
  using Error::Error;
};

/// Raised when a resolvent is requested at a real spectral parameter.
class RealShift : public Error {
 public:
  using Error::Error;
};

class TooLarge : public Error {
 public:
  using Error::Error;
};

class NotInResolventRegion : public Error {
 public:
  NotInResolventRegion(const std::string& what, double imag_z, double skew_bound)
      : Error(what), imag_z_(imag_z), skew_bound_(skew_bound) {}
  double imag_z() const { return imag_z_; }
  double skew_bound() const { return skew_bound_; }

 private:
  double imag_z_;
  double skew_bound_;
};

class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, int iterations, double residual)
      : Error(what), iterations_(iterations), residual_(residual) {}
  int iterations() const { return iterations_; }
  double residual() const { return residual_; }

 private:
  int iterations_;
  double residual_;
};

class DegenerateFit : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace lattice_dirac
