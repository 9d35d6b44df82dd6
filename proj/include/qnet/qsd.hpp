#pragma once

#include <array>
#include <memory>
#include <vector>

#include "qnet/model.hpp"

namespace qnet {

struct IntegratorSettings {
  double dt = 1e-3;    // fixed RK4 step, Gamma-scaled
  int s_thinning = 1;  // keep every k-th s-column in the two-qubit grid
};

// ---------------------------------------------------------------- one qubit

/// Coefficient functions of the one-qubit O-operators. For Markovian
/// reservoirs F_y is eliminated adiabatically, F_y = -i*(Gamma/2)*sum_m F_x[m],
/// and the stored value tracks that expression.
struct OneQubitCoefficients {
  std::vector<Complex> F_x;  // size N
  Complex F_y{0.0, 0.0};
  double t = 0.0;
};

/// Exact right-hand side of the coefficient ODE system (Lorentzian branch
/// integrates F_y; Markovian branch substitutes the eliminated F_y).
OneQubitCoefficients one_qubit_rhs(const OneQubitCoefficients& c, const ModelConfig& cfg);

std::vector<OneQubitCoefficients> evolve_one_qubit_coefficients(
    const ModelConfig& cfg, const IntegratorSettings& settings, double t_final);

// ---------------------------------------------------------------- two qubits

/// Snapshot of the two-time coefficient state at time t. Columns hold
/// f_kappa^{p,q}(t, s_j) over the retained s-grid; per column the layout is
/// channel-major (x1..xN, then y for Lorentzian) with the four (p,q)
/// components ordered (11, 12, 21, 22). F holds the kernel-weighted
/// quadratures F_kappa^{p,q}(t), same channel x component layout.
struct TwoQubitCoefficientGrid {
  double t = 0.0;
  double ds = 0.0;
  int num_channels = 0;  // N (Markovian) or N+1 (Lorentzian)
  std::vector<double> s;                   // retained s-points, ascending, s.back() == t
  std::vector<std::vector<Complex>> columns;  // columns[j][ch*4 + pq]
  Eigen::MatrixXcd F;                      // num_channels x 4
  double F_time = 0.0;                     // time F was refreshed at
};

/// Boundary values f_kappa^{p,q}(t,t) from the current quadratures.
/// Throws std::invalid_argument when grid.F_time != grid.t (stale quadratures).
Eigen::MatrixXcd two_qubit_boundary(const TwoQubitCoefficientGrid& grid, const ModelConfig& cfg);

std::vector<TwoQubitCoefficientGrid> evolve_two_qubit_coefficients(
    const ModelConfig& cfg, const IntegratorSettings& settings, double t_final,
    int sample_every = 1);

// ---------------------------------------------------------------- steppers

/// F_x coefficients of the qubit-bearing channels as consumed by the master
/// equation at one RK stage. M=1: {F_x1}. M=2: 4 components (11,12,21,22)
/// per qubit, qubit-major.
using MasterCoefficients = std::vector<Complex>;

/// Advances the coefficient system one fixed RK4 step at a time and records
/// the coefficients seen by each of the four stages, so a density matrix can
/// be co-integrated in lock-step with the same stages.
class CoefficientStepper {
 public:
  virtual ~CoefficientStepper() = default;
  virtual void step() = 0;
  virtual double time() const = 0;
  virtual double dt() const = 0;
  /// Stage coefficients recorded by the latest step().
  virtual const std::array<MasterCoefficients, 4>& stage_coeffs() const = 0;
};

std::unique_ptr<CoefficientStepper> make_coefficient_stepper(
    const ModelConfig& cfg, const IntegratorSettings& settings);

class OneQubitEngine : public CoefficientStepper {
 public:
  OneQubitEngine(const ModelConfig& cfg, const IntegratorSettings& settings);
  ~OneQubitEngine() override;
  void step() override;
  double time() const override;
  double dt() const override;
  const std::array<MasterCoefficients, 4>& stage_coeffs() const override;
  const OneQubitCoefficients& state() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

class TwoQubitEngine : public CoefficientStepper {
 public:
  TwoQubitEngine(const ModelConfig& cfg, const IntegratorSettings& settings);
  ~TwoQubitEngine() override;
  void step() override;
  double time() const override;
  double dt() const override;
  const std::array<MasterCoefficients, 4>& stage_coeffs() const override;

  int num_channels() const;
  int num_columns() const;
  /// Current quadratures F_kappa^{p,q}(t), num_channels x 4.
  const Eigen::MatrixXcd& quadratures() const;
  TwoQubitCoefficientGrid snapshot() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace qnet
