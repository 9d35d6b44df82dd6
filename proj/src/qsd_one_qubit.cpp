#include <cmath>
#include <stdexcept>

#include "qnet/qsd.hpp"

namespace qnet {

namespace {

Complex eliminated_fy(const std::vector<Complex>& Fx, double Gamma) {
  Complex sum{0.0, 0.0};
  for (const Complex& f : Fx) sum += f;
  return Complex(0.0, -0.5 * Gamma) * sum;
}

}  // namespace

OneQubitCoefficients one_qubit_rhs(const OneQubitCoefficients& c, const ModelConfig& cfg) {
  if (cfg.num_qubits != 1)
    throw std::invalid_argument("one_qubit_rhs: config must have exactly one qubit");
  const int N = cfg.num_cavities;
  if ((int)c.F_x.size() != N)
    throw std::invalid_argument("one_qubit_rhs: F_x size mismatch");

  const double wa = cfg.qubit_freq[0];
  const Complex Oa = cfg.qubit_cavity_coupling[0];
  const bool markov = cfg.markovian();
  const double Gamma = cfg.reservoir.Gamma;

  const Complex Fy = markov ? eliminated_fy(c.F_x, Gamma) : c.F_y;

  OneQubitCoefficients d;
  d.F_x.resize(N);
  d.t = 1.0;
  Complex sum{0.0, 0.0};
  for (int n = 0; n < N; ++n) sum += c.F_x[n];
  for (int n = 0; n < N; ++n) {
    Complex coup{0.0, 0.0};
    for (int m = 0; m < N; ++m)
      if (m != n) coup += cfg.cavity_coupling(m, n) * c.F_x[m];
    const Complex src = (n == 0) ? std::conj(Oa) : Complex(0.0, 0.0);
    d.F_x[n] = src - Complex(0, 1) * coup +
               Complex(0, wa - cfg.cavity_freq[n]) * c.F_x[n] +
               Oa * c.F_x[0] * c.F_x[n] - Complex(0, 1) * Fy;
  }
  if (markov) {
    d.F_y = {0.0, 0.0};
  } else {
    const double g = cfg.reservoir.gamma;
    d.F_y = Complex(0.0, -0.5 * Gamma * g) * sum +
            Complex(-g, wa - cfg.reservoir.center) * c.F_y + Oa * c.F_x[0] * c.F_y;
  }
  return d;
}

struct OneQubitEngine::Impl {
  ModelConfig cfg;
  double dt;
  OneQubitCoefficients y;
  std::array<MasterCoefficients, 4> stages;

  Impl(const ModelConfig& c, const IntegratorSettings& s) : cfg(c), dt(s.dt) {
    require_valid(cfg);
    if (cfg.num_qubits != 1)
      throw std::invalid_argument("OneQubitEngine: config must have one qubit");
    if (dt <= 0) throw std::invalid_argument("dt must be positive");
    y.F_x.assign(cfg.num_cavities, Complex(0, 0));
    y.F_y = {0, 0};
    y.t = 0.0;
    for (auto& st : stages) st.assign(1, Complex(0, 0));
  }

  static OneQubitCoefficients axpy(const OneQubitCoefficients& base, double a,
                                   const OneQubitCoefficients& d) {
    OneQubitCoefficients out = base;
    for (size_t n = 0; n < out.F_x.size(); ++n) out.F_x[n] += a * d.F_x[n];
    out.F_y += a * d.F_y;
    out.t += a * d.t;
    return out;
  }

  void record(int stage, const OneQubitCoefficients& s) { stages[stage][0] = s.F_x[0]; }

  void step() {
    record(0, y);
    const OneQubitCoefficients k1 = one_qubit_rhs(y, cfg);
    const OneQubitCoefficients y2 = axpy(y, 0.5 * dt, k1);
    record(1, y2);
    const OneQubitCoefficients k2 = one_qubit_rhs(y2, cfg);
    const OneQubitCoefficients y3 = axpy(y, 0.5 * dt, k2);
    record(2, y3);
    const OneQubitCoefficients k3 = one_qubit_rhs(y3, cfg);
    const OneQubitCoefficients y4 = axpy(y, dt, k3);
    record(3, y4);
    const OneQubitCoefficients k4 = one_qubit_rhs(y4, cfg);
    for (size_t n = 0; n < y.F_x.size(); ++n)
      y.F_x[n] += (dt / 6.0) * (k1.F_x[n] + 2.0 * k2.F_x[n] + 2.0 * k3.F_x[n] + k4.F_x[n]);
    y.F_y += (dt / 6.0) * (k1.F_y + 2.0 * k2.F_y + 2.0 * k3.F_y + k4.F_y);
    y.t += dt;
    if (cfg.markovian()) y.F_y = eliminated_fy(y.F_x, cfg.reservoir.Gamma);
    for (const Complex& f : y.F_x)
      if (!std::isfinite(f.real()) || !std::isfinite(f.imag()))
        throw std::runtime_error("one-qubit coefficients blew up at Gamma*t = " + std::to_string(y.t));
  }
};

OneQubitEngine::OneQubitEngine(const ModelConfig& cfg, const IntegratorSettings& s)
    : impl_(std::make_unique<Impl>(cfg, s)) {}
OneQubitEngine::~OneQubitEngine() = default;
void OneQubitEngine::step() { impl_->step(); }
double OneQubitEngine::time() const { return impl_->y.t; }
double OneQubitEngine::dt() const { return impl_->dt; }
const std::array<MasterCoefficients, 4>& OneQubitEngine::stage_coeffs() const {
  return impl_->stages;
}
const OneQubitCoefficients& OneQubitEngine::state() const { return impl_->y; }

std::vector<OneQubitCoefficients> evolve_one_qubit_coefficients(
    const ModelConfig& cfg, const IntegratorSettings& settings, double t_final) {
  OneQubitEngine eng(cfg, settings);
  std::vector<OneQubitCoefficients> out;
  const long nsteps = std::lround(t_final / settings.dt);
  out.reserve(nsteps + 1);
  out.push_back(eng.state());
  for (long k = 0; k < nsteps; ++k) {
    eng.step();
    out.push_back(eng.state());
  }
  return out;
}

std::unique_ptr<CoefficientStepper> make_coefficient_stepper(
    const ModelConfig& cfg, const IntegratorSettings& settings) {
  if (cfg.num_qubits == 1)
    return std::make_unique<OneQubitEngine>(cfg, settings);
  return std::make_unique<TwoQubitEngine>(cfg, settings);
}

}  // namespace qnet
