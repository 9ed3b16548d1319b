#include "shredrom/datagen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>

#include <unsupported/Eigen/FFT>

#include "shredrom/error.hpp"
#include "shredrom/parallel.hpp"
#include "shredrom/rng.hpp"

namespace shredrom {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;

void KSConfig::validate() const {
  if (!(domain_length > 0.0)) throw InvalidArgument("ks: domain_length must be > 0");
  if (!(horizon > 0.0)) throw InvalidArgument("ks: horizon must be > 0");
  if (!(dt > 0.0)) throw InvalidArgument("ks: dt must be > 0");
  if (n_grid < 4) throw InvalidArgument("ks: n_grid must be >= 4");
  if (save_stride < 1) throw InvalidArgument("ks: save_stride must be >= 1");
  if (!(nu > 0.0)) throw InvalidArgument("ks: nu must be > 0");
  if (!std::isfinite(omega)) throw InvalidArgument("ks: omega must be finite");
  if (contour_points < 2) throw InvalidArgument("ks: contour_points must be >= 2");
  const double steps = horizon / dt;
  if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps)) {
    throw InvalidArgument("ks: horizon must be an integer multiple of dt");
  }
  if (static_cast<Index>(std::llround(steps)) % save_stride != 0) {
    throw InvalidArgument("ks: step count must be a multiple of save_stride");
  }
}

Index KSConfig::n_steps() const { return static_cast<Index>(std::llround(horizon / dt)); }

Index KSConfig::n_snapshots() const { return n_steps() / save_stride + 1; }

Vector ks_grid(Index n_grid, double domain_length) {
  Vector x(n_grid);
  for (Index j = 0; j < n_grid; ++j) {
    x[j] = static_cast<double>(j) * domain_length / static_cast<double>(n_grid);
  }
  return x;
}

Vector ks_initial(const Eigen::Ref<const Vector>& grid, double omega,
                  double domain_length) {
  const double scale = 2.0 * std::numbers::pi * omega / domain_length;
  Vector u(grid.size());
  for (Index j = 0; j < grid.size(); ++j) {
    const double phase = scale * grid[j];
    u[j] = std::cos(phase) * (1.0 + std::sin(phase));
  }
  return u;
}

namespace {

// Fourier-spectral ETDRK4 (Cox-Matthews, with contour-averaged coefficients).
class KSIntegrator {
 public:
  explicit KSIntegrator(const KSConfig& config) : n_(config.n_grid) {
    const double h = config.dt;
    const double base = 2.0 * std::numbers::pi / config.domain_length;
    const Index half = n_ / 2;

    exp_full_.resize(n_);
    exp_half_.resize(n_);
    q_.resize(n_);
    f1_.resize(n_);
    f2_.resize(n_);
    f3_.resize(n_);
    deriv_.resize(n_);

    const Index m = config.contour_points;
    std::vector<Complex> roots(static_cast<std::size_t>(m));
    for (Index j = 0; j < m; ++j) {
      const double theta = 2.0 * std::numbers::pi * (static_cast<double>(j) + 0.5) /
                           static_cast<double>(m);
      roots[static_cast<std::size_t>(j)] = std::polar(1.0, theta);
    }

    for (Index idx = 0; idx < n_; ++idx) {
      const Index signed_mode = idx <= half ? idx : idx - n_;
      const double k = base * static_cast<double>(signed_mode);
      const double lambda = k * k - config.nu * k * k * k * k;
      // The Nyquist mode of an even grid has no real-valued derivative.
      const bool nyquist = (n_ % 2 == 0) && idx == half;
      deriv_[idx] = Complex(0.0, nyquist ? 0.0 : -0.5 * k);

      const double lh = lambda * h;
      exp_full_[idx] = std::exp(lh);
      exp_half_[idx] = std::exp(lh / 2.0);

      Complex sq(0.0), s1(0.0), s2(0.0), s3(0.0);
      for (const Complex& r : roots) {
        const Complex z = lh + r;
        const Complex ez = std::exp(z);
        const Complex z3 = z * z * z;
        sq += (std::exp(z / 2.0) - 1.0) / z;
        s1 += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3;
        s2 += (2.0 + z + ez * (z - 2.0)) / z3;
        s3 += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3;
      }
      const double inv_m = 1.0 / static_cast<double>(m);
      q_[idx] = h * (sq * inv_m).real();
      f1_[idx] = h * (s1 * inv_m).real();
      f2_[idx] = h * (s2 * inv_m).real();
      f3_[idx] = h * (s3 * inv_m).real();
    }

    physical_.resize(n_);
    real_.resize(n_);
    spectrum_.resize(n_);
  }

  ComplexVector to_spectral(const Eigen::Ref<const Vector>& u) {
    real_ = u;
    fft_.fwd(spectrum_, real_);
    return spectrum_;
  }

  /// Real part of the inverse transform; tracks the discarded imaginary part.
  const Vector& to_physical(const ComplexVector& v) {
    fft_.inv(physical_, v);
    for (Index j = 0; j < n_; ++j) {
      max_imag_ = std::max(max_imag_, std::abs(physical_[j].imag()));
      real_[j] = physical_[j].real();
    }
    return real_;
  }

  // -(1/2) d/dx (u^2) in Fourier space.
  ComplexVector nonlinear(const ComplexVector& v) {
    const Vector& u = to_physical(v);
    real_ = u.array().square();
    fft_.fwd(spectrum_, real_);
    return deriv_.cwiseProduct(spectrum_);
  }

  void step(ComplexVector& v) {
    const ComplexVector nv = nonlinear(v);
    const ComplexVector a = exp_half_.cwiseProduct(v) + q_.cwiseProduct(nv);
    const ComplexVector na = nonlinear(a);
    const ComplexVector b = exp_half_.cwiseProduct(v) + q_.cwiseProduct(na);
    const ComplexVector nb = nonlinear(b);
    const ComplexVector c = exp_half_.cwiseProduct(a) + q_.cwiseProduct(2.0 * nb - nv);
    const ComplexVector nc = nonlinear(c);
    v = exp_full_.cwiseProduct(v) + f1_.cwiseProduct(nv) +
        2.0 * f2_.cwiseProduct(na + nb) + f3_.cwiseProduct(nc);
  }

  double max_imag_residue() const { return max_imag_; }

 private:
  Index n_;
  Eigen::FFT<double> fft_;
  ComplexVector exp_full_, exp_half_, q_, f1_, f2_, f3_, deriv_;
  ComplexVector physical_, spectrum_;
  Vector real_;
  double max_imag_ = 0.0;
};

}  // namespace

Matrix ks_simulate(const KSConfig& config, KSDiagnostics* diagnostics) {
  config.validate();
  const Vector grid = ks_grid(config.n_grid, config.domain_length);
  return ks_simulate(config, ks_initial(grid, config.omega, config.domain_length),
                     diagnostics);
}

Matrix ks_simulate(const KSConfig& config, const Eigen::Ref<const Vector>& initial,
                   KSDiagnostics* diagnostics) {
  config.validate();
  if (initial.size() != config.n_grid) {
    throw DimensionError("ks_simulate: initial state length " +
                         std::to_string(initial.size()) + " != n_grid " +
                         std::to_string(config.n_grid));
  }
  require_finite(initial, "ks_simulate initial state");

  KSIntegrator integrator(config);
  Matrix out(config.n_snapshots(), config.n_grid);
  out.row(0) = initial.transpose();

  ComplexVector v = integrator.to_spectral(initial);
  const Index steps = config.n_steps();
  for (Index s = 1; s <= steps; ++s) {
    integrator.step(v);
    if (!v.allFinite()) {
      throw BlowUpError(config.nu, config.omega, static_cast<std::size_t>(s));
    }
    if (s % config.save_stride == 0) {
      out.row(s / config.save_stride) = integrator.to_physical(v).transpose();
    }
  }
  if (!out.allFinite()) {
    throw BlowUpError(config.nu, config.omega, static_cast<std::size_t>(steps));
  }
  if (diagnostics) diagnostics->max_imag_residue = integrator.max_imag_residue();
  return out;
}

void TrajectorySet::validate() const {
  const Index np = n_scenarios();
  if (params.rows() != np) throw DimensionError("trajectories: params rows != scenarios");
  for (const Matrix& s : states) {
    if (s.rows() != n_times() || s.cols() != state_dim()) {
      throw DimensionError("trajectories: inconsistent state shapes");
    }
    require_finite(s, "trajectories: states");
  }
  require_finite(params, "trajectories: params");
  for (Index k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) {
      throw InvalidArgument("trajectories: times must be strictly increasing");
    }
  }
}

Matrix TrajectorySet::snapshot_matrix(const Eigen::Ref<const Matrix>& mask) const {
  if (mask.rows() != n_scenarios() || mask.cols() != n_times()) {
    throw DimensionError("snapshot_matrix: mask shape mismatch");
  }
  const Index cols = (mask.array() != 0.0).count();
  Matrix out(state_dim(), cols);
  Index c = 0;
  for (Index i = 0; i < n_scenarios(); ++i) {
    for (Index k = 0; k < n_times(); ++k) {
      if (mask(i, k) != 0.0) out.col(c++) = states[static_cast<std::size_t>(i)].row(k).transpose();
    }
  }
  return out;
}

namespace {

Eigen::RowVectorXd draw_parameters(std::span<const ParamRange> ranges, std::uint64_t key) {
  SplitMix64 rng(key);
  Eigen::RowVectorXd row(static_cast<Index>(ranges.size()));
  for (std::size_t d = 0; d < ranges.size(); ++d) {
    row[static_cast<Index>(d)] = ranges[d].lo + (ranges[d].hi - ranges[d].lo) * rng.uniform();
  }
  return row;
}

void check_ranges(std::span<const ParamRange> ranges) {
  if (ranges.empty()) throw InvalidArgument("sample_parameters: empty ranges");
  for (const ParamRange& r : ranges) {
    if (!(r.lo < r.hi)) throw InvalidArgument("sample_parameters: require lo < hi");
  }
}

}  // namespace

Matrix sample_parameters(std::span<const ParamRange> ranges, Index n, std::uint64_t seed) {
  check_ranges(ranges);
  if (n < 1) throw InvalidArgument("sample_parameters: n must be >= 1");
  Matrix out(n, static_cast<Index>(ranges.size()));
  for (Index i = 0; i < n; ++i) {
    out.row(i) = draw_parameters(ranges, derive_seed(seed, static_cast<std::uint64_t>(i)));
  }
  return out;
}

TrajectorySet generate_trajectories(const GenerateOptions& options,
                                    const std::function<void(const std::string&)>& log) {
  options.base.validate();
  if (options.n_trajectories < 1) throw InvalidArgument("generate: n_trajectories must be >= 1");
  const std::array<ParamRange, 2> ranges{options.nu_range, options.omega_range};
  check_ranges(ranges);

  const auto n = static_cast<std::size_t>(options.n_trajectories);
  TrajectorySet out;
  out.states.resize(n);
  out.params.resize(options.n_trajectories, 2);
  std::vector<std::vector<std::string>> events(n);

  const auto flush = [&] {
    if (!log) return;
    for (const auto& list : events) {
      for (const auto& line : list) log(line);
    }
  };
  try {
    parallel_for(n, [&](std::size_t i) {
      const std::uint64_t key = derive_seed(options.seed, i);
      for (Index attempt = 0;; ++attempt) {
        const Eigen::RowVectorXd mu =
            attempt == 0 ? draw_parameters(ranges, key)
                         : draw_parameters(ranges, derive_seed(key, static_cast<std::uint64_t>(attempt)));
        KSConfig cfg = options.base;
        cfg.nu = mu[0];
        cfg.omega = mu[1];
        try {
          out.states[i] = ks_simulate(cfg);
          out.params.row(static_cast<Index>(i)) = mu;
          return;
        } catch (const BlowUpError& e) {
          events[i].push_back("scenario " + std::to_string(i) + ": " + e.what() + "; redrawing");
          if (attempt >= options.max_resamples) throw;
        }
      }
    });
  } catch (...) {
    flush();
    throw;
  }
  flush();

  const KSConfig& base = options.base;
  out.times.resize(base.n_snapshots());
  for (Index k = 0; k < out.times.size(); ++k) {
    out.times[k] = static_cast<double>(k * base.save_stride) * base.dt;
  }
  return out;
}

Eigen::Matrix3d ode_system_matrix(double mu) {
  Eigen::Matrix3d a;
  a << 1.0, 2.0, 0.0,
       0.0, -1.0, mu,
       0.0, 0.0, 2.0;
  return a;
}

Eigen::Vector3d ode_coefficients(double mu) { return {1.0, 2.0 - mu, 3.0 - 3.0 * mu}; }

namespace {

// Column j holds eigenvector j scaled by exp(lambda_j t); eigenvalues (2, -1, 1).
Eigen::Matrix3d ode_modal_matrix(double t, double mu) {
  Eigen::Matrix3d m;
  const double e2 = std::exp(2.0 * t);
  const double em = std::exp(-t);
  const double e1 = std::exp(t);
  m << 2.0 * mu * e2, -em, e1,
       mu * e2,        em, 0.0,
       3.0 * e2,      0.0, 0.0;
  return m;
}

}  // namespace

Eigen::Vector3d ode_solution(double t, double mu) {
  return ode_modal_matrix(t, mu) * ode_coefficients(mu);
}

Eigen::Vector3d ode_recover_coeffs(std::span<const OdeMeasurement> measurements,
                                   int component, double mu) {
  if (measurements.size() != 3) {
    throw InvalidArgument("ode_recover_coeffs: exactly 3 measurements required");
  }
  if (component < 1 || component > 3) {
    throw InvalidArgument("ode_recover_coeffs: component must be 1, 2 or 3");
  }
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = a + 1; b < 3; ++b) {
      if (measurements[a].time == measurements[b].time) {
        throw InvalidArgument("ode_recover_coeffs: measurement times must be distinct");
      }
    }
  }

  Eigen::Matrix3d system;
  Eigen::Vector3d rhs;
  for (Index k = 0; k < 3; ++k) {
    const auto& m = measurements[static_cast<std::size_t>(k)];
    system.row(k) = ode_modal_matrix(m.time, mu).row(component - 1);
    rhs[k] = m.value;
  }

  const Eigen::JacobiSVD<Matrix> svd(Matrix(system), Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector s = svd.singularValues();
  const double condition = s[2] > 0.0 ? s[0] / s[2] : std::numeric_limits<double>::infinity();
  if (!(condition <= 1e12)) {
    throw NotObservableError("ode_recover_coeffs: component " + std::to_string(component) +
                                 " is not observable (condition number " +
                                 std::to_string(condition) + ")",
                             condition);
  }
  return svd.solve(Vector(rhs));
}

}  // namespace shredrom
