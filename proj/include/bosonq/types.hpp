#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace bosonq {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

// Dense carriers. Tensor ordering is transmon ⊗ cavity throughout; basis
// index of |t, n⟩ is t * cavity_dim + n.
using Operator = Matrix;
using StateVector = Vector;
using DensityMatrix = Matrix;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr Complex kI{0.0, 1.0};

// Unit conversions. Internal time unit is the second and internal angular
// frequencies are rad/s. Pulse amplitudes stay in MHz (ordinary frequency).
inline constexpr double kMicro = 1e-6;
inline constexpr double kNano = 1e-9;
inline constexpr double kMHz = 1e6;
inline constexpr double kMHzToRadPerSecond = kTwoPi * kMHz;

/// Invalid input or configuration. Maps to CLI exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical stage failed (non-convergence, leakage, positivity loss).
/// Maps to CLI exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Population escaped into the top of the cavity truncation.
class TruncationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace bosonq
