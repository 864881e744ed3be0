#pragma once

#include <stdexcept>
#include <string>

namespace multispin {

/// Invalid input: bad parameters, violated preconditions.
class invalid_argument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not produce a meaningful answer
/// (degenerate metric, non-convergence, ...).
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// J = 0 closes the Bogoliubov gap at k = 0.
class degenerate_gap : public invalid_argument {
 public:
  degenerate_gap()
      : invalid_argument("degenerate gap: J = 0 leaves the Bogoliubov angle undefined at k = 0") {}
};

/// The zero-crossing equation of the lower branch has no real solution.
class no_gapless_points : public numerical_error {
 public:
  no_gapless_points() : numerical_error("no gapless points: negative radicand") {}
};

class curvature_undefined : public numerical_error {
 public:
  explicit curvature_undefined(const std::string& what) : numerical_error(what) {}
};

class dmrg_not_converged : public numerical_error {
 public:
  dmrg_not_converged(double last_delta, const std::string& what)
      : numerical_error(what), last_delta_(last_delta) {}
  double last_delta() const noexcept { return last_delta_; }

 private:
  double last_delta_;
};

}  // namespace multispin
