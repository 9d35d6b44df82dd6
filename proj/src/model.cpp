#include "qnet/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qnet {

bool ModelConfig::isotropic(double tol) const {
  for (double w : qubit_freq)
    if (std::abs(w - qubit_freq[0]) > tol) return false;
  for (double w : cavity_freq)
    if (std::abs(w - cavity_freq[0]) > tol) return false;
  for (const Complex& g : qubit_cavity_coupling)
    if (std::abs(g - qubit_cavity_coupling[0]) > tol) return false;
  const Complex ref = num_cavities > 1 ? cavity_coupling(0, 1) : Complex(0);
  if (std::abs(ref.imag()) > tol) return false;
  for (int p = 0; p < num_cavities; ++p)
    for (int q = 0; q < num_cavities; ++q)
      if (p != q && std::abs(cavity_coupling(p, q) - ref) > tol) return false;
  return true;
}

ModelConfig make_isotropic_config(int M, int N, double omega, double Omega_a,
                                  double Omega, const ReservoirSpec& res) {
  if (M < 1 || M > 2)
    throw std::invalid_argument("num_qubits must be 1 or 2");
  if (N < M)
    throw std::invalid_argument("num_cavities must be >= num_qubits");
  if (Omega_a < 0)
    throw std::invalid_argument("Omega_a must be nonnegative");
  if (res.Gamma <= 0)
    throw std::invalid_argument("Gamma must be positive");
  if (res.kind == ReservoirKind::Lorentzian && res.gamma <= 0)
    throw std::invalid_argument("gamma must be positive for a Lorentzian reservoir");

  ModelConfig cfg;
  cfg.num_qubits = M;
  cfg.num_cavities = N;
  cfg.qubit_freq.assign(M, omega);
  cfg.cavity_freq.assign(N, omega);
  cfg.qubit_cavity_coupling.assign(M, Complex(Omega_a, 0.0));
  cfg.cavity_coupling = Eigen::MatrixXcd::Constant(N, N, Complex(Omega, 0.0));
  cfg.cavity_coupling.diagonal().setZero();
  cfg.reservoir = res;
  return cfg;
}

ValidationReport validate_config(const ModelConfig& cfg) {
  ValidationReport rep;
  auto add = [&rep](const std::string& s) { rep.violations.push_back(s); };

  const int M = cfg.num_qubits, N = cfg.num_cavities;
  if (M < 1 || M > 2) add("num_qubits must be 1 or 2 (coefficient systems exist for M=1,2 only)");
  if (N < 1) add("num_cavities must be >= 1");
  if (M > N) add("num_qubits exceeds num_cavities (each qubit needs its own cavity)");
  if ((int)cfg.qubit_freq.size() != M) add("qubit_freq size != num_qubits");
  if ((int)cfg.cavity_freq.size() != N) add("cavity_freq size != num_cavities");
  if ((int)cfg.qubit_cavity_coupling.size() != M) add("qubit_cavity_coupling size != num_qubits");
  if (cfg.cavity_coupling.rows() != N || cfg.cavity_coupling.cols() != N)
    add("cavity_coupling must be N x N");

  if (cfg.cavity_coupling.rows() == N && cfg.cavity_coupling.cols() == N) {
    for (int p = 0; p < N; ++p) {
      if (std::abs(cfg.cavity_coupling(p, p)) > 0)
        add("cavity_coupling diagonal must vanish");
      for (int q = p + 1; q < N; ++q) {
        if (std::abs(cfg.cavity_coupling(p, q) - std::conj(cfg.cavity_coupling(q, p))) > 1e-12) {
          std::ostringstream os;
          os << "cavity_coupling violates Hermiticity at (" << p << "," << q << ")";
          add(os.str());
        }
      }
    }
  }
  if (cfg.reservoir.Gamma <= 0) add("reservoir.Gamma must be positive");
  if (cfg.reservoir.kind == ReservoirKind::Lorentzian && cfg.reservoir.gamma <= 0)
    add("reservoir.gamma must be positive (nonpositive bandwidth)");
  return rep;
}

void require_valid(const ModelConfig& cfg) {
  ValidationReport rep = validate_config(cfg);
  if (!rep.ok()) {
    std::string msg = "invalid config:";
    for (const auto& v : rep.violations) msg += "\n  - " + v;
    throw std::invalid_argument(msg);
  }
}

Complex bath_correlation(const ModelConfig& cfg, double t, double s) {
  if (cfg.markovian())
    throw std::domain_error("bath_correlation: kernel is a delta distribution for a Markovian reservoir");
  const double G = cfg.reservoir.Gamma, g = cfg.reservoir.gamma, c = cfg.reservoir.center;
  return 0.5 * G * g * std::exp(Complex(-g * std::abs(t - s), -c * (t - s)));
}

Complex cavity_correlation(const ModelConfig& cfg, int n, double t, double s) {
  if (n < 0 || n >= cfg.num_cavities)
    throw std::out_of_range("cavity_correlation: cavity index out of range");
  return std::exp(Complex(0.0, -cfg.cavity_freq[n] * (t - s)));
}

}  // namespace qnet
