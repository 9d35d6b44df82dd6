#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qnet {

using Complex = std::complex<double>;

enum class ReservoirKind { Lorentzian, Markovian };

/// Second-layer reservoir shared by all cavities. A Lorentzian spectrum of
/// width `gamma` gives the memory kernel beta(t,s) = Gamma*gamma/2 *
/// exp(-i*center*(t-s) - gamma*|t-s|); the Markovian variant is its
/// delta-kernel limit, handled analytically by the engines.
struct ReservoirSpec {
  ReservoirKind kind = ReservoirKind::Markovian;
  double Gamma = 1.0;   // cavity-reservoir coupling rate; the global time unit
  double gamma = 1.0;   // spectral bandwidth (Lorentzian only)
  double center = 0.0;  // spectral center frequency (Lorentzian only)

  static ReservoirSpec lorentzian(double Gamma, double gamma, double center = 0.0) {
    return {ReservoirKind::Lorentzian, Gamma, gamma, center};
  }
  static ReservoirSpec markovian(double Gamma) {
    return {ReservoirKind::Markovian, Gamma, 0.0, 0.0};
  }
};

/// M qubits sitting in the first M nodes of an N-cavity network. Qubit m
/// couples only to cavity m; cavities couple pairwise through the Hermitian
/// matrix Omega (zero diagonal); every cavity couples identically to the
/// common reservoir. All rates are in units of Gamma.
struct ModelConfig {
  int num_qubits = 1;    // M, 1 or 2
  int num_cavities = 1;  // N >= M
  std::vector<double> qubit_freq;              // omega_a[m]
  std::vector<double> cavity_freq;             // omega_c[n]
  std::vector<Complex> qubit_cavity_coupling;  // Omega_a[m]
  Eigen::MatrixXcd cavity_coupling;            // Omega[p][q]
  ReservoirSpec reservoir;

  bool markovian() const { return reservoir.kind == ReservoirKind::Markovian; }
  bool isotropic(double tol = 1e-12) const;
};

/// Resonant, uniform-coupling configuration used throughout the figures:
/// all frequencies omega, all qubit-cavity couplings Omega_a, all
/// cavity-cavity couplings Omega (real, so Hermiticity is automatic).
ModelConfig make_isotropic_config(int M, int N, double omega, double Omega_a,
                                  double Omega, const ReservoirSpec& res);

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

ValidationReport validate_config(const ModelConfig& cfg);

/// Throws std::invalid_argument if the report is non-empty.
void require_valid(const ModelConfig& cfg);

/// Reservoir kernel beta(t,s). Throws std::domain_error on Markovian configs
/// (the kernel is a delta distribution there).
Complex bath_correlation(const ModelConfig& cfg, double t, double s);

/// Cavity kernel alpha_n(t,s) = exp(-i omega_cn (t-s)); n is 0-based.
Complex cavity_correlation(const ModelConfig& cfg, int n, double t, double s);

}  // namespace qnet
