#pragma once

#include <complex>
#include <string>
#include <string_view>
#include <utility>

#include "jdi/expression.hpp"

namespace jdi {

enum class KernelFamily { gaussian, laplace, uniform };

KernelFamily parse_kernel_family(std::string_view name);
std::string_view to_string(KernelFamily f);

/// A jump-size law with its parameters resolved at one (x, t).
/// gaussian/laplace: p1 = mean, p2 = scale. uniform: p1 = lo, p2 = hi.
struct KernelShape {
  KernelFamily family = KernelFamily::gaussian;
  double p1 = 0.0;
  double p2 = 1.0;

  double pdf(double xi) const;
  double cdf(double xi) const;
  /// Raw moment E[xi^n], exact closed form.
  double moment(int n) const;
  /// E[exp(-i k xi)].
  std::complex<double> characteristic(double k) const;
  /// Truncated support: 8 scales either side of the mean, or [lo, hi].
  std::pair<double, double> support() const;
  /// Mass outside support(), zero for uniform.
  double tail_mass() const;
  /// Draw from the law given a uniform in (0,1) and a standard normal.
  double sample(double u, double z) const;
};

/// Jump kernel with (x, t)-dependent parameters.
class JumpKernel {
 public:
  JumpKernel() = default;
  JumpKernel(KernelFamily family, ScalarField p1, ScalarField p2);

  KernelFamily family() const noexcept { return family_; }
  const ScalarField& first() const noexcept { return p1_; }
  const ScalarField& second() const noexcept { return p2_; }

  /// Resolve parameters; throws EvaluationError when scale <= 0 or hi <= lo.
  KernelShape at(double x, double t) const;

  bool depends_on_x() const { return p1_.depends_on_x() || p2_.depends_on_x(); }
  bool depends_on_t() const { return p1_.depends_on_t() || p2_.depends_on_t(); }

 private:
  KernelFamily family_ = KernelFamily::gaussian;
  ScalarField p1_ = ScalarField::constant(0.0);
  ScalarField p2_ = ScalarField::constant(1.0);
};

}  // namespace jdi
