#pragma once

#include <utility>
#include <vector>

#include "tvpkf/model.hpp"

namespace tvpkf {

enum class FilterBackend { SquareRoot, Standard };

struct InitialCondition {
  AugmentedState state;
  SqrtFactor sqrt_cov;
};

/// Initialization rule used throughout: latent factors start at zero with
/// unit covariance; each tvp element starts at its time-invariant estimate
/// with standard deviation `fraction` of that estimate (variance floored at
/// 1e-6 so near-zero coefficients keep a usable prior).
InitialCondition default_initial_condition(const ModelSpec& spec,
                                           const FullParams& time_invariant_values,
                                           double fraction = 0.02);

struct FilterStep {
  AugmentedState predicted;
  SqrtFactor predicted_sqrt_cov;
  AugmentedState updated;
  SqrtFactor updated_sqrt_cov;
  Vector residual;      // one-step-ahead prediction error
  Matrix residual_cov;  // its covariance, second-order terms included
  Matrix gain;
};

struct FilterRun {
  std::vector<FilterStep> steps;
  double log_likelihood = 0.0;
  InitialCondition init;
};

struct GaussianTerm {
  double log_likelihood = 0.0;
  double log_det = 0.0;
};

/// Log-density contribution of one prediction error under its covariance.
/// Throws IndefiniteResidualCov when the covariance fails to factorize.
GaussianTerm gaussian_term(const Vector& residual, const Matrix& cov);

/// Second-order extended Kalman filter for one (spec, pi) pair.  `run`
/// propagates a triangular covariance factor through QR triangularizations;
/// `run_standard` propagates the full covariance and is kept for
/// numerical-precision comparisons.  Construction precomputes the constant
/// Hessian structure, so instances are cheap to reuse and safe to share
/// across threads.
class Filter {
 public:
  Filter(ModelSpec spec, Vector pi);

  const ModelSpec& spec() const { return spec_; }
  const Vector& pi() const { return pi_; }

  FilterRun run(const Matrix& observations, const Matrix& inputs,
                const InitialCondition& init) const;
  FilterRun run_standard(const Matrix& observations, const Matrix& inputs,
                         const InitialCondition& init) const;
  FilterRun run_backend(FilterBackend backend, const Matrix& observations,
                        const Matrix& inputs, const InitialCondition& init) const;

  // Single-cycle pieces, exposed so each stage can be tested on its own.

  /// Predicted state and the per-component second-order corrections,
  /// computed from the covariance factor without forming the covariance.
  std::pair<AugmentedState, Vector> predict_state(const AugmentedState& prev,
                                                  const SqrtFactor& prev_cov,
                                                  const Vector& x) const;

  SqrtFactor predict_sqrt_cov(const AugmentedState& prev, const SqrtFactor& prev_cov,
                              const Vector& x) const;

  /// Predicted observation and its covariance (linear part, second-order
  /// double-trace term, and measurement noise).
  std::pair<Vector, Matrix> predict_measurement(const AugmentedState& pred,
                                                const SqrtFactor& pred_cov) const;

  FilterStep update_step(const AugmentedState& pred, const SqrtFactor& pred_cov,
                         const Vector& y) const;

 private:
  Matrix loading_at(const Vector& tvp) const;
  Matrix transition_at(const Vector& tvp) const;
  Matrix input_effect_at(const Vector& tvp) const;
  Matrix jacobian_f_at(const AugmentedState& state, const Vector& x) const;
  Matrix jacobian_h_at(const AugmentedState& state) const;

  struct MeasurementMoments {
    Vector yhat;
    Matrix cov;        // full residual covariance
    Matrix noise_eff;  // measurement noise plus second-order term
  };
  template <typename CovFn>
  MeasurementMoments measurement_moments(const AugmentedState& pred,
                                         const Matrix& jac_h, CovFn cov) const;

  void check_dimensions(const Matrix& observations, const Matrix& inputs,
                        const InitialCondition& init) const;

  ModelSpec spec_;
  Vector pi_;
  FullParams full_;
  std::vector<CellRef> tvp_cells_;
  Vector meas_noise_;
  Vector proc_noise_;
  std::vector<std::vector<HessianPair>> f_pairs_;  // per latent component
  std::vector<std::vector<HessianPair>> h_pairs_;  // per observed series
  bool has_f_pairs_ = false;
  bool has_h_pairs_ = false;
};

/// Filtered trajectories of the tvp cells, one path per cell.
std::vector<TvpPath> filtered_tvp_paths(const ModelSpec& spec, const FilterRun& run);

}  // namespace tvpkf
