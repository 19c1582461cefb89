#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "jdi/density_field.hpp"
#include "jdi/model.hpp"

namespace jdi {

/// One summand of an identity's right-hand side, with its numerical diagnostics.
struct TermValue {
  std::string name;
  double value = 0.0;
  double clamp_mass = 0.0;           // probability mass whose log or ratio hit the floor
  double quadrature_residual = 0.0;  // spread between refinement levels where one is computed
  std::string notes;
  bool low_confidence = false;       // clamp_mass >= 1e-6
};

void write_terms_csv(std::ostream& out, const std::vector<TermValue>& terms);

/// Dense row-major matrix over (x0, xt). NaN marks masked entries.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

inline constexpr double kFloorRatio = 1e-12;

double entropy(const DensityField& p);
/// J_b = integral of b (p')^2 / p.
double fisher_type(const DensityField& p, std::span<const double> b_field);
double mutual_information(const JointDensity& joint);
/// Conditional Fisher-type information averaged over x0, minus that of the xt marginal.
double mutual_fisher(const JointDensity& joint, std::span<const double> b_field);
/// d/dxt log p(xt | x0), masked below the row floor.
Matrix score_field(const JointDensity& joint);
/// E[b(Xt) (T - E[T | Xt])^2].
double generalized_mmse(const JointDensity& joint, std::span<const double> b_field, const Matrix& target);
/// Conditional variance of X0 given Xt, i.e. generalized_mmse with T = x0 and b = 1.
double mmse_x0(const JointDensity& joint);

/// E[lambda(X,t) log p(X)/p(X+xi)] with xi ~ w(.|X,t).
TermValue entropy_jump_term(const DensityField& p, const ChannelModel& model, double t);
/// D(p || p(. + xi)).
double shifted_kl(const DensityField& p, double xi, double* clamp_mass = nullptr);
/// lambda E_xi[D(p || p(. + xi))] for a state-homogeneous model.
TermValue additive_jump_kl(const DensityField& p, const ChannelModel& model, double t);
/// E[lambda(Xt,t) D(p_{X0|Xt} || p_{X0|Xt+xi})].
TermValue mi_jump_term(const JointDensity& joint, const ChannelModel& model, double t);

/// Series summand of order n >= 3 for the entropy rate: -(1/n!) E[B_n d^n log p].
TermValue log_derivative_term(const DensityField& p, const ChannelModel& model, int n, double t);
/// Series summand of order n >= 3 for the mutual-information rate: (1/n!) E[B_n d^n log p(x0|xt)].
TermValue log_derivative_term(const JointDensity& joint, const ChannelModel& model, int n, double t);

/// E[a' - b''/2] for the given coefficient fields.
TermValue drift_correction(const DensityField& p, std::span<const double> a_field, std::span<const double> b_field);
TermValue drift_correction(const DensityField& p, const ChannelModel& model, double t);

}  // namespace jdi
