#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "jdi/expression.hpp"
#include "jdi/grid.hpp"
#include "jdi/kernel.hpp"

namespace jdi {

struct InitialLaw {
  enum class Kind { gaussian, point, density };
  Kind kind = Kind::gaussian;
  double mean = 0.0;
  double std = 1.0;
  double x0 = 0.0;
  ScalarField density;  // unnormalised, in x
  Grid grid{-12.0, 12.0, 1024};  // where a density law is tabulated for sampling
};

/// dX = a dt + sqrt(b) dW + xi dN, with N Poisson of rate lambda and xi ~ w(.|x,t).
struct ChannelModel {
  std::string name = "model";
  ScalarField drift;
  ScalarField diffusion;
  ScalarField jump_rate;
  JumpKernel kernel;
  InitialLaw initial;

  bool jump_free() const { return jump_rate.is_zero(); }
  bool differential_free() const { return drift.is_zero() && diffusion.is_zero(); }
  bool time_dependent() const;
  /// No x in any coefficient or kernel parameter.
  bool structurally_homogeneous() const;
};

/// Textual channel definition, as read from a config file.
struct ModelConfig {
  std::string name = "model";
  std::string drift = "0";
  std::string diffusion = "0";
  std::string jump_rate = "0";
  std::string kernel_family = "gaussian";
  std::string kernel_p1 = "0";  // mean or lo
  std::string kernel_p2 = "1";  // scale or hi
  std::string initial_kind = "gaussian";
  double initial_mean = 0.0;
  double initial_std = 1.0;
  double initial_x0 = 0.0;
  std::string initial_density = "";
  Grid grid{-12.0, 12.0, 1024};
  double t0 = 0.0;
  double t1 = 1.0;
};

/// Parses every expression and checks b >= 0, lambda >= 0 and kernel parameters on every
/// grid node at t0, the midpoint and t1. Throws ModelError listing all violations.
ChannelModel build_model(const ModelConfig& config);
/// Same, from a config document with channel/grid/time/initial sections.
ChannelModel build_model(std::string_view config_text);

/// w_n(x,t), the n-th raw moment of the jump kernel.
double jump_moment(const ChannelModel& model, int n, double x, double t);
/// B_1 = lambda w_1 + a, B_2 = lambda w_2 + b, B_n = lambda w_n for n >= 3.
double analytic_km_coefficient(const ChannelModel& model, int n, double x, double t);

/// Coefficient values at every node; used by the solvers and functionals.
std::vector<double> sample_field(const ScalarField& f, const Grid& g, double t);
std::vector<double> km_coefficient_field(const ChannelModel& model, int n, const Grid& g, double t);

/// Numerical homogeneity check: a, b, lambda and kernel parameters agree across nodes to 1e-12.
bool is_state_homogeneous(const ChannelModel& model, const Grid& g, const std::vector<double>& times,
                          std::string* why = nullptr);

}  // namespace jdi
