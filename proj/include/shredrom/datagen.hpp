#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "shredrom/linalg.hpp"

namespace shredrom {

/// Kuramoto-Sivashinsky setup: u_t + u_xx + nu u_xxxx + u u_x = 0 on a
/// periodic domain of length `domain_length`.
struct KSConfig {
  double domain_length = 22.0;
  double horizon = 200.0;
  double dt = 0.01;
  Index n_grid = 100;
  Index save_stride = 100;
  double nu = 1.0;
  double omega = 1.0;
  /// Quadrature points on the unit circle used for the ETDRK4 coefficients.
  Index contour_points = 16;

  /// Throws InvalidArgument on any violated invariant.
  void validate() const;
  /// Number of dt steps covering the horizon.
  Index n_steps() const;
  /// Saved snapshots including t = 0.
  Index n_snapshots() const;
};

/// x_j = j * domain_length / n_grid.
Vector ks_grid(Index n_grid, double domain_length);

/// cos(2 pi omega x / L) (1 + sin(2 pi omega x / L)).
Vector ks_initial(const Eigen::Ref<const Vector>& grid, double omega,
                  double domain_length);

struct KSDiagnostics {
  /// Largest |imag| seen after any inverse transform; discarded from the state.
  double max_imag_residue = 0.0;
};

/// ETDRK4 trajectory from the parametric initial datum; row k is the state at
/// t = k dt save_stride.
Matrix ks_simulate(const KSConfig& config, KSDiagnostics* diagnostics = nullptr);
/// Same integrator from an arbitrary initial state of length n_grid.
Matrix ks_simulate(const KSConfig& config, const Eigen::Ref<const Vector>& initial,
                   KSDiagnostics* diagnostics = nullptr);

/// Full-order snapshots of several scenarios.
struct TrajectorySet {
  std::vector<Matrix> states;  ///< per scenario: N_t x N_h
  Matrix params;               ///< N_p x n_params
  Vector times;                ///< N_t

  Index n_scenarios() const noexcept { return static_cast<Index>(states.size()); }
  Index n_times() const noexcept { return times.size(); }
  Index state_dim() const noexcept { return states.empty() ? 0 : states.front().cols(); }

  /// Throws when shapes disagree, values are non-finite or times do not increase.
  void validate() const;

  /// Snapshots of the selected (scenario, time) pairs, one per column, ordered
  /// scenario-major. mask(i, k) != 0 selects a snapshot.
  Matrix snapshot_matrix(const Eigen::Ref<const Matrix>& mask) const;
};

struct ParamRange {
  double lo;
  double hi;
};

/// Independent uniform draws; row i comes from stream derive_seed(seed, i) so
/// it does not depend on n.
Matrix sample_parameters(std::span<const ParamRange> ranges, Index n, std::uint64_t seed);

struct GenerateOptions {
  KSConfig base;  ///< nu and omega are overwritten per scenario
  ParamRange nu_range{1.0, 2.0};
  ParamRange omega_range{1.0, 5.0};
  Index n_trajectories = 500;
  std::uint64_t seed = 0;
  /// Redraws allowed per trajectory after a blow-up.
  Index max_resamples = 10;
};

/// Generates scenarios in parallel. Blown-up draws are replaced by redraws
/// from the child stream of that scenario; each event is passed to `log` in
/// scenario order.
TrajectorySet generate_trajectories(const GenerateOptions& options,
                                    const std::function<void(const std::string&)>& log = {});

// Closed-form 3x3 parametric linear ODE used as an analytic oracle:
//   du/dt = [[1, 2, 0], [0, -1, mu], [0, 0, 2]] u,  u(0) = [1, 2, 3].

Eigen::Matrix3d ode_system_matrix(double mu);

/// Modal coefficients fixed by u(0) = [1, 2, 3]: (1, 2 - mu, 3 - 3 mu).
Eigen::Vector3d ode_coefficients(double mu);

Eigen::Vector3d ode_solution(double t, double mu);

struct OdeMeasurement {
  double time;
  double value;
};

/// Solves for (c1, c2, c3) from three readings of one component (1-based).
/// Throws NotObservableError when the constraint matrix has condition number
/// above 1e12, which is always the case for components 2 and 3.
Eigen::Vector3d ode_recover_coeffs(std::span<const OdeMeasurement> measurements,
                                   int component, double mu);

}  // namespace shredrom
