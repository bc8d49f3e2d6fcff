#pragma once

#include <string>
#include <vector>

#include "tvpkf/linalg.hpp"

namespace tvpkf {

// ---------------------------------------------------------------------------
// Pattern matrices
//
// Each cell of a model matrix is either fixed at a known value, a free
// time-invariant parameter, or a time-varying coefficient that lives in the
// augmented state and drifts as a random walk.
// ---------------------------------------------------------------------------

enum class CellKind { Fixed, Free, Tvp };

struct Cell {
  CellKind kind = CellKind::Fixed;
  double value = 0.0;  // meaningful for Fixed cells only

  static Cell fixed(double v) { return Cell{CellKind::Fixed, v}; }
  static Cell free() { return Cell{CellKind::Free, 0.0}; }
  static Cell tvp() { return Cell{CellKind::Tvp, 0.0}; }
};

struct PatternMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<Cell> cells;  // row-major storage

  PatternMatrix() = default;
  PatternMatrix(int r, int c, Cell fill = Cell::fixed(0.0))
      : rows(r), cols(c), cells(static_cast<std::size_t>(r) * c, fill) {}

  Cell& at(int r, int c) { return cells[static_cast<std::size_t>(r) * cols + c]; }
  const Cell& at(int r, int c) const {
    return cells[static_cast<std::size_t>(r) * cols + c];
  }
};

enum class MatrixId { Loading, Transition, InputEffect };

std::string matrix_name(MatrixId id);  // "lambda", "phi", "gamma"

struct CellRef {
  MatrixId matrix = MatrixId::Loading;
  int row = 0;
  int col = 0;

  friend bool operator==(const CellRef&, const CellRef&) = default;
};

/// 1-based label such as "phi(1,2)".
std::string cell_label(const CellRef& ref);

// ---------------------------------------------------------------------------
// Model specification
// ---------------------------------------------------------------------------

/// Dynamic factor model with contemporaneous loadings, first-order latent
/// dynamics and an exogenous input:
///   y_t    = Lambda(omega, pi) eta_t + e_t
///   eta_t  = Phi(omega, pi) eta_{t-1} + Gamma(omega, pi) x_t + z_t
///   omega_t = omega_{t-1} + xi_t
/// where omega collects the tvp cells of the three pattern matrices and the
/// xi_t variances are estimated together with the free parameters.
struct ModelSpec {
  int k = 0;  // observed series
  int m = 0;  // latent factors
  int r = 0;  // exogenous inputs

  PatternMatrix loading;       // k x m
  PatternMatrix transition;    // m x m
  PatternMatrix input_effect;  // m x r

  std::vector<Cell> measurement_noise;  // k variances, Fixed or Free
  std::vector<Cell> latent_noise;       // m variances, Fixed or Free

  /// Throws InvalidSpec when dimensions disagree, when a noise cell is
  /// declared tvp, or when the tvp block is combined inconsistently.
  void validate() const;

  /// Tvp cells in stacking order: loading, transition, input_effect,
  /// column-wise within each matrix.
  std::vector<CellRef> tvp_cells() const;

  int n_tvp() const { return static_cast<int>(tvp_cells().size()); }
  int state_dim() const { return m + n_tvp(); }

  std::string to_json() const;
  static ModelSpec from_json(const std::string& text);
  static ModelSpec load(const std::string& path);
  void save(const std::string& path) const;
};

// ---------------------------------------------------------------------------
// Time-invariant parameter vector
// ---------------------------------------------------------------------------

enum class ParamKind {
  LoadingCell,
  TransitionCell,
  InputCell,
  MeasurementVar,
  LatentVar,
  TvpVar,
};

struct ParamRef {
  ParamKind kind = ParamKind::LoadingCell;
  CellRef cell;   // for matrix cells and TvpVar (the cell the variance drives)
  int index = 0;  // for noise variances: series / factor index

  std::string label() const;
  bool is_variance() const;
};

/// Fixed ordering of the free parameters: loading, transition, input-effect
/// cells (column-wise), then measurement variances, latent-noise variances,
/// and one drift variance per tvp cell.
class ParamLayout {
 public:
  explicit ParamLayout(const ModelSpec& spec);

  int size() const { return static_cast<int>(entries_.size()); }
  const ParamRef& at(int i) const;
  const std::vector<ParamRef>& entries() const { return entries_; }
  /// Index of the entry with the given label, or -1.
  int find(const std::string& label) const;

 private:
  std::vector<ParamRef> entries_;
};

/// Full numeric values for every cell of the model, used to move between
/// matrices and the stacked parameter vector.
struct FullParams {
  Matrix loading;
  Matrix transition;
  Matrix input_effect;
  Vector measurement_var;
  Vector latent_var;
  Vector tvp_var;  // aligned with ModelSpec::tvp_cells()
};

Vector stack_params(const ModelSpec& spec, const FullParams& values);

/// Inverse of stack_params.  Tvp cells are returned as zero: their values
/// live in the augmented state, not in the parameter vector.
FullParams unstack_params(const ModelSpec& spec, const Vector& pi);

// ---------------------------------------------------------------------------
// Augmented state
// ---------------------------------------------------------------------------

struct AugmentedState {
  Vector factors;  // m latent factor scores
  Vector tvp;      // current values of the tvp cells, stacking order

  Eigen::Index dim() const { return factors.size() + tvp.size(); }
  Vector joint() const;
  static AugmentedState from_joint(const Vector& joint, int m);
  static AugmentedState zero(const ModelSpec& spec);
};

// ---------------------------------------------------------------------------
// Model functions and analytic derivatives
// ---------------------------------------------------------------------------

Matrix assemble_loading(const ModelSpec& spec, const Vector& pi, const Vector& tvp);
Matrix assemble_transition(const ModelSpec& spec, const Vector& pi, const Vector& tvp);
Matrix assemble_input_effect(const ModelSpec& spec, const Vector& pi, const Vector& tvp);

Vector measurement_noise_diag(const ModelSpec& spec, const Vector& pi);
/// Process noise of the augmented state: latent innovation variances followed
/// by the drift variances of the tvp cells.
Vector process_noise_diag(const ModelSpec& spec, const Vector& pi);

/// One step of the state recursion; the tvp block passes through unchanged.
AugmentedState eval_f(const ModelSpec& spec, const Vector& pi,
                      const AugmentedState& state, const Vector& x);

/// Predicted observation vector.
Vector eval_h(const ModelSpec& spec, const Vector& pi, const AugmentedState& state);

Matrix jacobian_f(const ModelSpec& spec, const Vector& pi,
                  const AugmentedState& state, const Vector& x);
Matrix jacobian_h(const ModelSpec& spec, const Vector& pi,
                  const AugmentedState& state);

/// Index pair (a, b) marking the symmetric unit entries H(a,b) = H(b,a) = 1
/// of a bilinear-term Hessian.  The model is bilinear in (factors, tvp), so
/// every Hessian is a constant matrix assembled from such pairs.
struct HessianPair {
  int a = 0;
  int b = 0;
};

std::vector<HessianPair> hessian_f_pairs(const ModelSpec& spec, int state_index);
std::vector<HessianPair> hessian_h_pairs(const ModelSpec& spec, int obs_index);

Matrix hessian_f(const ModelSpec& spec, int state_index);
Matrix hessian_h(const ModelSpec& spec, int obs_index);

// ---------------------------------------------------------------------------
// Coefficient trajectories
// ---------------------------------------------------------------------------

struct TvpPath {
  enum class Kind { GroundTruth, Filtered, Smoothed };

  std::string label;
  std::vector<double> values;
  Kind kind = Kind::GroundTruth;
};

}  // namespace tvpkf
