#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "jdi/density_field.hpp"
#include "jdi/model.hpp"

namespace testing {

inline jdi::ModelConfig channel(std::string a, std::string b, std::string lambda = "0", std::string family = "gaussian",
                                std::string p1 = "0", std::string p2 = "1") {
  jdi::ModelConfig c;
  c.drift = std::move(a);
  c.diffusion = std::move(b);
  c.jump_rate = std::move(lambda);
  c.kernel_family = std::move(family);
  c.kernel_p1 = std::move(p1);
  c.kernel_p2 = std::move(p2);
  return c;
}

inline jdi::ChannelModel model(std::string a, std::string b, std::string lambda = "0", std::string family = "gaussian",
                               std::string p1 = "0", std::string p2 = "1") {
  return jdi::build_model(channel(std::move(a), std::move(b), std::move(lambda), std::move(family), std::move(p1),
                                  std::move(p2)));
}

inline double normal_pdf(double x, double mean, double var) {
  return std::exp(-(x - mean) * (x - mean) / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
}

inline jdi::DensityField gaussian_field(const jdi::Grid& g, double mean, double var, double time = 0.0) {
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = normal_pdf(g.x(i), mean, var);
  return jdi::DensityField(g, std::move(v), time);
}

/// Joint of (X0, X0 + sqrt(t) Z) with X0 ~ N(0, v0), evaluated pointwise.
inline jdi::JointDensity gaussian_channel_joint(const jdi::Grid& g0, const jdi::Grid& gt, double v0, double t) {
  std::vector<double> v(g0.size() * gt.size());
  for (std::size_t i = 0; i < g0.size(); ++i)
    for (std::size_t j = 0; j < gt.size(); ++j)
      v[i * gt.size() + j] = normal_pdf(g0.x(i), 0.0, v0) * normal_pdf(gt.x(j), g0.x(i), t);
  return jdi::JointDensity(g0, gt, std::move(v), t, 0.0);
}

inline double l1(const std::vector<double>& a, const std::vector<double>& b, double dx) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]) * dx;
  return s;
}

}  // namespace testing
