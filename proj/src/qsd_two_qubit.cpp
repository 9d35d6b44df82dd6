#include <cmath>
#include <stdexcept>

#include "qnet/qsd.hpp"

namespace qnet {

namespace {

// (p,q) component order used throughout: 0=(1,1), 1=(1,2), 2=(2,1), 3=(2,2).
using Mat4 = std::array<std::array<Complex, 4>, 4>;

// Coefficient matrix of the coupled d/dt f_kappa^{p,q} system. The same
// matrix advances every channel and every retained s-column; it depends on
// time only through the qubit-channel quadratures F_x1, F_x2.
Mat4 coefficient_matrix(const Complex* F1, const Complex* F2, double wa1, double wa2,
                        Complex Oa1, Complex Oa2) {
  const Complex iw1(0.0, wa1), iw2(0.0, wa2);
  Mat4 M{};
  M[0][0] = iw1 + Oa1 * F1[0];
  M[0][1] = Oa2 * F2[2];
  M[0][2] = Oa1 * F1[2] + Oa2 * F2[3] + Oa2 * F2[1];
  M[0][3] = -Oa2 * F2[2];
  M[1][0] = -Oa1 * F1[3];
  M[1][1] = iw2 + Oa1 * (F1[0] + F1[2]) + Oa2 * F2[3];
  M[1][2] = Oa1 * F1[3];
  M[1][3] = Oa2 * F2[1];
  M[2][0] = Oa1 * F1[2];
  M[2][1] = Oa2 * F2[0];
  M[2][2] = iw1 + Oa1 * F1[0] + Oa2 * F2[3] + Oa2 * F2[1];
  M[2][3] = -Oa2 * F2[0];
  M[3][0] = -Oa1 * F1[1];
  M[3][1] = Oa1 * (F1[0] + F1[2]) + Oa2 * F2[1];
  M[3][2] = Oa1 * F1[1];
  M[3][3] = iw2 + Oa2 * F2[3];
  return M;
}

}  // namespace

struct TwoQubitEngine::Impl {
  ModelConfig cfg;
  double dt;
  int thin;
  int N, nch;
  bool markov;
  double Gamma, gam, center;
  Complex Oa1, Oa2;
  double wa1, wa2;

  double t = 0.0;
  long nstep = 0;

  std::vector<Complex> rates;       // d/dt of the kernel factor, per channel
  std::vector<Complex> step_decay;  // exp(rates*dt)
  std::vector<Complex> coinc;       // kernel amplitude at s=t per channel
  Eigen::MatrixXcd Bmat;            // boundary: b = s0 + Bmat * F
  Eigen::MatrixXcd s0;              // nch x 4 Kronecker sources

  // column storage: [col][ch][pq], stride nch*4
  std::vector<Complex> cols;
  std::vector<Complex> kern;  // [col][ch]: exp(rates*(t - s_j))
  std::vector<double> svals;
  std::vector<long> col_index;  // append counter of each retained column

  Eigen::MatrixXcd F;  // current quadratures, nch x 4
  std::array<MasterCoefficients, 4> stages;

  // scratch
  std::vector<Complex> acc, ycur, kbuf;
  std::vector<double> wbuf;

  Impl(const ModelConfig& c, const IntegratorSettings& s)
      : cfg(c), dt(s.dt), thin(s.s_thinning) {
    require_valid(cfg);
    if (cfg.num_qubits != 2)
      throw std::invalid_argument("TwoQubitEngine: config must have two qubits");
    if (dt <= 0) throw std::invalid_argument("dt must be positive");
    if (thin < 1) throw std::invalid_argument("s_thinning must be >= 1");

    N = cfg.num_cavities;
    markov = cfg.markovian();
    nch = N + (markov ? 0 : 1);
    Gamma = cfg.reservoir.Gamma;
    gam = cfg.reservoir.gamma;
    center = cfg.reservoir.center;
    Oa1 = cfg.qubit_cavity_coupling[0];
    Oa2 = cfg.qubit_cavity_coupling[1];
    wa1 = cfg.qubit_freq[0];
    wa2 = cfg.qubit_freq[1];

    rates.resize(nch);
    coinc.assign(nch, Complex(1.0, 0.0));
    for (int n = 0; n < N; ++n) rates[n] = Complex(0.0, -cfg.cavity_freq[n]);
    if (!markov) {
      rates[N] = Complex(-gam, -center);
      coinc[N] = Complex(0.5 * Gamma * gam, 0.0);
    }
    step_decay.resize(nch);
    for (int ch = 0; ch < nch; ++ch) step_decay[ch] = std::exp(rates[ch] * dt);

    // boundary map: x-channel n gets -i*sum_{m!=n} Omega_mn F_xm plus the
    // reservoir feedback (-i F_y, or its eliminated Markovian form); the
    // y-channel boundary is -i*sum_n F_xn.
    Bmat = Eigen::MatrixXcd::Zero(nch, nch);
    for (int n = 0; n < N; ++n) {
      for (int m = 0; m < N; ++m) {
        if (m != n) Bmat(n, m) += Complex(0, -1) * cfg.cavity_coupling(m, n);
        if (markov) Bmat(n, m) += Complex(-0.5 * Gamma, 0.0);
      }
      if (!markov) Bmat(n, N) = Complex(0, -1);
    }
    if (!markov)
      for (int n = 0; n < N; ++n) Bmat(N, n) = Complex(0, -1);

    s0 = Eigen::MatrixXcd::Zero(nch, 4);
    s0(0, 0) = std::conj(Oa1);  // f_x1^{1,1} source
    s0(1, 3) = std::conj(Oa2);  // f_x2^{2,2} source

    F = Eigen::MatrixXcd::Zero(nch, 4);
    for (auto& st : stages) st.assign(8, Complex(0, 0));

    // t = 0 column straight from the boundary conditions (all F vanish)
    cols.assign(nch * 4, Complex(0, 0));
    for (int ch = 0; ch < nch; ++ch)
      for (int pq = 0; pq < 4; ++pq) cols[ch * 4 + pq] = s0(ch, pq);
    kern.assign(nch, Complex(1.0, 0.0));
    svals.assign(1, 0.0);
    col_index.assign(1, 0);
  }

  int ncol() const { return (int)svals.size(); }
  int stride() const { return nch * 4; }

  void trapezoid_weights(double upper, std::vector<double>& w) const {
    const int K = ncol() - 1;
    w.resize(K + 1);
    if (K == 0) {
      w[0] = 0.5 * (upper - svals[0]);
      return;
    }
    w[0] = 0.5 * (svals[1] - svals[0]);
    for (int j = 1; j < K; ++j) w[j] = 0.5 * (svals[j + 1] - svals[j - 1]);
    w[K] = 0.5 * (upper - svals[K - 1]);
  }

  /// Quadratures at stage time tau = t + cshift*dt from stage column data,
  /// with a one-sided sliver correction over [t, tau].
  void quad_F(const std::vector<Complex>& data, double cshift, Eigen::MatrixXcd& out) {
    const int K = ncol() - 1;
    out.setZero(nch, 4);
    if (K >= 1) {
      trapezoid_weights(svals[K], wbuf);
      for (int j = 0; j <= K; ++j) {
        const Complex* cj = data.data() + (size_t)j * stride();
        const Complex* kj = kern.data() + (size_t)j * nch;
        for (int ch = 0; ch < nch; ++ch) {
          const Complex wk = wbuf[j] * kj[ch];
          for (int pq = 0; pq < 4; ++pq) out(ch, pq) += wk * cj[ch * 4 + pq];
        }
      }
      for (int ch = 0; ch < nch; ++ch) {
        const Complex shift = coinc[ch] * std::exp(rates[ch] * (cshift * dt));
        for (int pq = 0; pq < 4; ++pq) out(ch, pq) *= shift;
      }
    }
    if (cshift > 0) {
      const double h = cshift * dt;
      const Complex* clast = data.data() + (size_t)K * stride();
      // F_pre: include the [t, tau] sliver endpoint at s = t
      for (int ch = 0; ch < nch; ++ch) {
        const Complex fa = coinc[ch] * std::exp(rates[ch] * h);
        for (int pq = 0; pq < 4; ++pq) out(ch, pq) += 0.5 * h * fa * clast[ch * 4 + pq];
      }
      // close the sliver with the boundary value estimated from F_pre
      const Eigen::MatrixXcd b = s0 + Bmat * out;
      for (int ch = 0; ch < nch; ++ch)
        for (int pq = 0; pq < 4; ++pq) out(ch, pq) += 0.5 * h * coinc[ch] * b(ch, pq);
    }
  }

  void record_stage(int i, const Eigen::MatrixXcd& Fs) {
    for (int pq = 0; pq < 4; ++pq) {
      stages[i][pq] = Fs(0, pq);
      stages[i][4 + pq] = Fs(1, pq);
    }
  }

  /// dest = M(F) * data, column by column.
  void apply_matrix(const std::vector<Complex>& data, const Eigen::MatrixXcd& Fs,
                    std::vector<Complex>& dest) {
    Complex F1[4], F2[4];
    for (int pq = 0; pq < 4; ++pq) { F1[pq] = Fs(0, pq); F2[pq] = Fs(1, pq); }
    const Mat4 Mm = coefficient_matrix(F1, F2, wa1, wa2, Oa1, Oa2);
    dest.resize(data.size());
    const int n = ncol();
    for (int j = 0; j < n; ++j) {
      const Complex* src = data.data() + (size_t)j * stride();
      Complex* dst = dest.data() + (size_t)j * stride();
      for (int ch = 0; ch < nch; ++ch) {
        const Complex f0 = src[ch * 4 + 0], f1 = src[ch * 4 + 1];
        const Complex f2 = src[ch * 4 + 2], f3 = src[ch * 4 + 3];
        dst[ch * 4 + 0] = Mm[0][0] * f0 + Mm[0][1] * f1 + Mm[0][2] * f2 + Mm[0][3] * f3;
        dst[ch * 4 + 1] = Mm[1][0] * f0 + Mm[1][1] * f1 + Mm[1][2] * f2 + Mm[1][3] * f3;
        dst[ch * 4 + 2] = Mm[2][0] * f0 + Mm[2][1] * f1 + Mm[2][2] * f2 + Mm[2][3] * f3;
        dst[ch * 4 + 3] = Mm[3][0] * f0 + Mm[3][1] * f1 + Mm[3][2] * f2 + Mm[3][3] * f3;
      }
    }
  }

  void step() {
    const size_t sz = cols.size();
    Eigen::MatrixXcd Fs(nch, 4);

    // stage 1: current state; F is already trapezoid-consistent by construction
    record_stage(0, F);
    apply_matrix(cols, F, kbuf);       // k1
    acc = kbuf;                        // acc = k1
    ycur.resize(sz);
    for (size_t i = 0; i < sz; ++i) ycur[i] = cols[i] + 0.5 * dt * kbuf[i];

    // stage 2
    quad_F(ycur, 0.5, Fs);
    record_stage(1, Fs);
    apply_matrix(ycur, Fs, kbuf);      // k2
    for (size_t i = 0; i < sz; ++i) {
      acc[i] += 2.0 * kbuf[i];
      ycur[i] = cols[i] + 0.5 * dt * kbuf[i];
    }

    // stage 3
    quad_F(ycur, 0.5, Fs);
    record_stage(2, Fs);
    apply_matrix(ycur, Fs, kbuf);      // k3
    for (size_t i = 0; i < sz; ++i) {
      acc[i] += 2.0 * kbuf[i];
      ycur[i] = cols[i] + dt * kbuf[i];
    }

    // stage 4
    quad_F(ycur, 1.0, Fs);
    record_stage(3, Fs);
    apply_matrix(ycur, Fs, kbuf);      // k4
    for (size_t i = 0; i < sz; ++i) cols[i] += (dt / 6.0) * (acc[i] + kbuf[i]);

    t += dt;
    ++nstep;

    // kernels now refer to the new t
    {
      const int n = ncol();
      for (int j = 0; j < n; ++j) {
        Complex* kj = kern.data() + (size_t)j * nch;
        for (int ch = 0; ch < nch; ++ch) kj[ch] *= step_decay[ch];
      }
    }

    // thinning drops the previous boundary column once it leaves the coarse grid
    if (thin > 1 && ncol() >= 2 && col_index.back() % thin != 0) {
      const size_t last = (size_t)(ncol() - 1);
      cols.erase(cols.begin() + last * stride(), cols.end());
      kern.erase(kern.begin() + last * nch, kern.end());
      svals.pop_back();
      col_index.pop_back();
    }

    // append the s = t column: solve the trapezoid-consistent linear system
    // (I - h/2 * diag(coinc) * Bmat) F = Q + h/2 * coinc .* s0  so that the
    // refreshed quadratures and the new boundary values agree exactly.
    const double h = t - svals.back();
    trapezoid_weights(t, wbuf);
    Eigen::MatrixXcd Q = Eigen::MatrixXcd::Zero(nch, 4);
    {
      const int n = ncol();
      for (int j = 0; j < n; ++j) {
        const Complex* cj = cols.data() + (size_t)j * stride();
        const Complex* kj = kern.data() + (size_t)j * nch;
        for (int ch = 0; ch < nch; ++ch) {
          const Complex wk = wbuf[j] * kj[ch];
          for (int pq = 0; pq < 4; ++pq) Q(ch, pq) += wk * cj[ch * 4 + pq];
        }
      }
      for (int ch = 0; ch < nch; ++ch)
        for (int pq = 0; pq < 4; ++pq) Q(ch, pq) *= coinc[ch];
    }
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(nch, nch);
    for (int ch = 0; ch < nch; ++ch) A.row(ch) -= (0.5 * h * coinc[ch]) * Bmat.row(ch);
    Eigen::MatrixXcd rhs = Q;
    for (int ch = 0; ch < nch; ++ch) rhs.row(ch) += (0.5 * h * coinc[ch]) * s0.row(ch);
    F = A.partialPivLu().solve(rhs);

    const Eigen::MatrixXcd newcol = s0 + Bmat * F;
    const size_t base = cols.size();
    cols.resize(base + stride());
    for (int ch = 0; ch < nch; ++ch)
      for (int pq = 0; pq < 4; ++pq) cols[base + ch * 4 + pq] = newcol(ch, pq);
    kern.insert(kern.end(), nch, Complex(1.0, 0.0));
    svals.push_back(t);
    col_index.push_back(nstep);

    if (!F.allFinite())
      throw std::runtime_error("two-qubit coefficients blew up at Gamma*t = " + std::to_string(t));
  }

  TwoQubitCoefficientGrid snapshot() const {
    TwoQubitCoefficientGrid g;
    g.t = t;
    g.ds = dt;
    g.num_channels = nch;
    g.s = svals;
    g.columns.resize(ncol());
    for (int j = 0; j < ncol(); ++j)
      g.columns[j].assign(cols.begin() + (size_t)j * stride(),
                          cols.begin() + (size_t)(j + 1) * stride());
    g.F = F;
    g.F_time = t;
    return g;
  }
};

TwoQubitEngine::TwoQubitEngine(const ModelConfig& cfg, const IntegratorSettings& s)
    : impl_(std::make_unique<Impl>(cfg, s)) {}
TwoQubitEngine::~TwoQubitEngine() = default;
void TwoQubitEngine::step() { impl_->step(); }
double TwoQubitEngine::time() const { return impl_->t; }
double TwoQubitEngine::dt() const { return impl_->dt; }
const std::array<MasterCoefficients, 4>& TwoQubitEngine::stage_coeffs() const {
  return impl_->stages;
}
int TwoQubitEngine::num_channels() const { return impl_->nch; }
int TwoQubitEngine::num_columns() const { return impl_->ncol(); }
const Eigen::MatrixXcd& TwoQubitEngine::quadratures() const { return impl_->F; }
TwoQubitCoefficientGrid TwoQubitEngine::snapshot() const { return impl_->snapshot(); }

Eigen::MatrixXcd two_qubit_boundary(const TwoQubitCoefficientGrid& grid, const ModelConfig& cfg) {
  if (cfg.num_qubits != 2)
    throw std::invalid_argument("two_qubit_boundary: config must have two qubits");
  if (std::abs(grid.F_time - grid.t) > 1e-12)
    throw std::invalid_argument("two_qubit_boundary: stale quadratures (t mismatch)");
  const int N = cfg.num_cavities;
  const bool markov = cfg.markovian();
  const int nch = N + (markov ? 0 : 1);
  if (grid.F.rows() != nch)
    throw std::invalid_argument("two_qubit_boundary: channel count mismatch");

  Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(nch, 4);
  b(0, 0) = std::conj(cfg.qubit_cavity_coupling[0]);
  b(1, 3) = std::conj(cfg.qubit_cavity_coupling[1]);
  for (int pq = 0; pq < 4; ++pq) {
    Complex Fy;
    if (markov) {
      Complex sum{0, 0};
      for (int m = 0; m < N; ++m) sum += grid.F(m, pq);
      Fy = Complex(0.0, -0.5 * cfg.reservoir.Gamma) * sum;
    } else {
      Fy = grid.F(N, pq);
    }
    for (int n = 0; n < N; ++n) {
      Complex coup{0, 0};
      for (int m = 0; m < N; ++m)
        if (m != n) coup += cfg.cavity_coupling(m, n) * grid.F(m, pq);
      b(n, pq) += Complex(0, -1) * coup + Complex(0, -1) * Fy;
    }
    if (!markov) {
      Complex sum{0, 0};
      for (int n = 0; n < N; ++n) sum += grid.F(n, pq);
      b(N, pq) = Complex(0, -1) * sum;
    }
  }
  return b;
}

std::vector<TwoQubitCoefficientGrid> evolve_two_qubit_coefficients(
    const ModelConfig& cfg, const IntegratorSettings& settings, double t_final,
    int sample_every) {
  if (sample_every < 1) throw std::invalid_argument("sample_every must be >= 1");
  TwoQubitEngine eng(cfg, settings);
  const long nsteps = std::lround(t_final / settings.dt);
  // triangular storage: refuse runs whose final grid would not fit comfortably
  const double bytes = 16.0 * 4 * (cfg.num_cavities + 1) *
                       (double(nsteps) / settings.s_thinning) * 5.0;
  if (bytes > 4e9)
    throw std::runtime_error("two-qubit grid memory budget exceeded; increase s_thinning or dt");
  std::vector<TwoQubitCoefficientGrid> out;
  out.push_back(eng.snapshot());
  for (long k = 0; k < nsteps; ++k) {
    eng.step();
    if ((k + 1) % sample_every == 0) out.push_back(eng.snapshot());
  }
  return out;
}

}  // namespace qnet
