#pragma once

#include <stdexcept>
#include <string>

namespace ppcdom {

/// Invalid user-supplied configuration (mesh spec, scenario file, gains).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The quasi-static solver could not reach its force tolerance.
class SolverDivergence : public std::runtime_error {
 public:
  SolverDivergence(const std::string& what, double residual, int iterations)
      : std::runtime_error(what), residual_(residual), iterations_(iterations) {}

  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// An error channel left its open performance funnel, so the barrier
/// transform is undefined.
class BarrierViolation : public std::runtime_error {
 public:
  BarrierViolation(const std::string& what, int channel, double xi)
      : std::runtime_error(what), channel_(channel), xi_(xi) {}

  int channel() const noexcept { return channel_; }
  double xi() const noexcept { return xi_; }

 private:
  int channel_;
  double xi_;
};

}  // namespace ppcdom
