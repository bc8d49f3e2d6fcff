#include "tvpkf/model.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace tvpkf {

using nlohmann::json;

std::string matrix_name(MatrixId id) {
  switch (id) {
    case MatrixId::Loading: return "lambda";
    case MatrixId::Transition: return "phi";
    case MatrixId::InputEffect: return "gamma";
  }
  return "?";
}

std::string cell_label(const CellRef& ref) {
  std::ostringstream out;
  out << matrix_name(ref.matrix) << "(" << ref.row + 1 << "," << ref.col + 1 << ")";
  return out.str();
}

// ---------------------------------------------------------------------------
// ModelSpec
// ---------------------------------------------------------------------------

namespace {

void check_pattern(const PatternMatrix& p, int rows, int cols, const char* name) {
  if (p.rows != rows || p.cols != cols ||
      p.cells.size() != static_cast<std::size_t>(rows) * cols) {
    fail(ErrorCode::InvalidSpec, std::string(name) + " pattern has wrong shape");
  }
}

void append_tvp_cells(const PatternMatrix& p, MatrixId id, std::vector<CellRef>& out) {
  for (int c = 0; c < p.cols; ++c) {
    for (int r = 0; r < p.rows; ++r) {
      if (p.at(r, c).kind == CellKind::Tvp) out.push_back(CellRef{id, r, c});
    }
  }
}

}  // namespace

void ModelSpec::validate() const {
  if (k <= 0 || m <= 0 || r < 0) {
    fail(ErrorCode::InvalidSpec, "k and m must be positive, r nonnegative");
  }
  check_pattern(loading, k, m, "loading");
  check_pattern(transition, m, m, "transition");
  check_pattern(input_effect, m, r, "input_effect");
  if (static_cast<int>(measurement_noise.size()) != k) {
    fail(ErrorCode::InvalidSpec, "measurement_noise must have k entries");
  }
  if (static_cast<int>(latent_noise.size()) != m) {
    fail(ErrorCode::InvalidSpec, "latent_noise must have m entries");
  }
  for (const Cell& cell : measurement_noise) {
    if (cell.kind == CellKind::Tvp) {
      fail(ErrorCode::InvalidSpec, "noise variances cannot be time-varying");
    }
    if (cell.kind == CellKind::Fixed && cell.value < 0.0) {
      fail(ErrorCode::InvalidSpec, "fixed measurement variance must be nonnegative");
    }
  }
  for (const Cell& cell : latent_noise) {
    if (cell.kind == CellKind::Tvp) {
      fail(ErrorCode::InvalidSpec, "noise variances cannot be time-varying");
    }
    if (cell.kind == CellKind::Fixed && cell.value < 0.0) {
      fail(ErrorCode::InvalidSpec, "fixed latent variance must be nonnegative");
    }
  }
}

std::vector<CellRef> ModelSpec::tvp_cells() const {
  std::vector<CellRef> out;
  append_tvp_cells(loading, MatrixId::Loading, out);
  append_tvp_cells(transition, MatrixId::Transition, out);
  append_tvp_cells(input_effect, MatrixId::InputEffect, out);
  return out;
}

namespace {

std::string cell_to_string(const Cell& cell) {
  switch (cell.kind) {
    case CellKind::Free: return "free";
    case CellKind::Tvp: return "tvp";
    case CellKind::Fixed: {
      std::ostringstream out;
      out << "fixed:" << cell.value;
      return out.str();
    }
  }
  return "fixed:0";
}

Cell cell_from_string(const std::string& text) {
  if (text == "free") return Cell::free();
  if (text == "tvp") return Cell::tvp();
  if (text.rfind("fixed:", 0) == 0) {
    try {
      return Cell::fixed(std::stod(text.substr(6)));
    } catch (const std::exception&) {
      fail(ErrorCode::InvalidSpec, "bad fixed cell value in '" + text + "'");
    }
  }
  fail(ErrorCode::InvalidSpec, "unknown cell '" + text + "' (expected fixed:<v>|free|tvp)");
}

json pattern_to_json(const PatternMatrix& p) {
  json rows = json::array();
  for (int r = 0; r < p.rows; ++r) {
    json row = json::array();
    for (int c = 0; c < p.cols; ++c) row.push_back(cell_to_string(p.at(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

PatternMatrix pattern_from_json(const json& j, int rows, int cols, const char* name) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows) {
    fail(ErrorCode::InvalidSpec, std::string(name) + " must be an array of " +
                                     std::to_string(rows) + " rows");
  }
  PatternMatrix p(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const json& row = j[r];
    if (!row.is_array() || static_cast<int>(row.size()) != cols) {
      fail(ErrorCode::InvalidSpec, std::string(name) + " row " + std::to_string(r + 1) +
                                       " must have " + std::to_string(cols) + " cells");
    }
    for (int c = 0; c < cols; ++c) {
      p.at(r, c) = cell_from_string(row[c].get<std::string>());
    }
  }
  return p;
}

std::vector<Cell> noise_from_json(const json& j, int n, const char* name) {
  if (!j.is_array() || static_cast<int>(j.size()) != n) {
    fail(ErrorCode::InvalidSpec, std::string(name) + " must be an array of " +
                                     std::to_string(n) + " entries");
  }
  std::vector<Cell> out;
  out.reserve(n);
  for (const json& item : j) out.push_back(cell_from_string(item.get<std::string>()));
  return out;
}

}  // namespace

std::string ModelSpec::to_json() const {
  json j;
  j["k"] = k;
  j["m"] = m;
  j["r"] = r;
  j["loading_pattern"] = pattern_to_json(loading);
  j["phi_pattern"] = pattern_to_json(transition);
  j["gamma_pattern"] = pattern_to_json(input_effect);
  json meas = json::array();
  for (const Cell& cell : measurement_noise) meas.push_back(cell_to_string(cell));
  json latent = json::array();
  for (const Cell& cell : latent_noise) latent.push_back(cell_to_string(cell));
  j["measurement_noise"] = std::move(meas);
  j["latent_noise"] = std::move(latent);
  return j.dump(2);
}

ModelSpec ModelSpec::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidSpec, std::string("model spec is not valid JSON: ") + e.what());
  }
  ModelSpec spec;
  try {
    spec.k = j.at("k").get<int>();
    spec.m = j.at("m").get<int>();
    spec.r = j.at("r").get<int>();
    spec.loading = pattern_from_json(j.at("loading_pattern"), spec.k, spec.m, "loading_pattern");
    spec.transition = pattern_from_json(j.at("phi_pattern"), spec.m, spec.m, "phi_pattern");
    if (spec.r > 0) {
      spec.input_effect =
          pattern_from_json(j.at("gamma_pattern"), spec.m, spec.r, "gamma_pattern");
    } else {
      spec.input_effect = PatternMatrix(spec.m, 0);
    }
    spec.measurement_noise = noise_from_json(j.at("measurement_noise"), spec.k, "measurement_noise");
    if (j.contains("latent_noise")) {
      spec.latent_noise = noise_from_json(j.at("latent_noise"), spec.m, "latent_noise");
    } else {
      spec.latent_noise.assign(spec.m, Cell::fixed(1.0));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidSpec, std::string("model spec missing field: ") + e.what());
  }
  spec.validate();
  return spec;
}

ModelSpec ModelSpec::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoFailure, "cannot open model spec " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

void ModelSpec::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoFailure, "cannot write model spec " + path);
  out << to_json() << "\n";
}

// ---------------------------------------------------------------------------
// ParamLayout
// ---------------------------------------------------------------------------

namespace {

void append_free_cells(const PatternMatrix& p, MatrixId id, ParamKind kind,
                       std::vector<ParamRef>& out) {
  for (int c = 0; c < p.cols; ++c) {
    for (int r = 0; r < p.rows; ++r) {
      if (p.at(r, c).kind == CellKind::Free) {
        out.push_back(ParamRef{kind, CellRef{id, r, c}, 0});
      }
    }
  }
}

}  // namespace

ParamLayout::ParamLayout(const ModelSpec& spec) {
  append_free_cells(spec.loading, MatrixId::Loading, ParamKind::LoadingCell, entries_);
  append_free_cells(spec.transition, MatrixId::Transition, ParamKind::TransitionCell, entries_);
  append_free_cells(spec.input_effect, MatrixId::InputEffect, ParamKind::InputCell, entries_);
  for (int i = 0; i < spec.k; ++i) {
    if (spec.measurement_noise[i].kind == CellKind::Free) {
      entries_.push_back(ParamRef{ParamKind::MeasurementVar, CellRef{}, i});
    }
  }
  for (int i = 0; i < spec.m; ++i) {
    if (spec.latent_noise[i].kind == CellKind::Free) {
      entries_.push_back(ParamRef{ParamKind::LatentVar, CellRef{}, i});
    }
  }
  for (const CellRef& cell : spec.tvp_cells()) {
    entries_.push_back(ParamRef{ParamKind::TvpVar, cell, 0});
  }
}

const ParamRef& ParamLayout::at(int i) const {
  if (i < 0 || i >= size()) {
    fail(ErrorCode::IndexOutOfRange, "parameter index " + std::to_string(i));
  }
  return entries_[static_cast<std::size_t>(i)];
}

int ParamLayout::find(const std::string& label) const {
  for (int i = 0; i < size(); ++i) {
    if (entries_[static_cast<std::size_t>(i)].label() == label) return i;
  }
  return -1;
}

std::string ParamRef::label() const {
  switch (kind) {
    case ParamKind::LoadingCell:
    case ParamKind::TransitionCell:
    case ParamKind::InputCell:
      return cell_label(cell);
    case ParamKind::MeasurementVar:
      return "xi(" + std::to_string(index + 1) + ")";
    case ParamKind::LatentVar:
      return "psi(" + std::to_string(index + 1) + ")";
    case ParamKind::TvpVar:
      return "psi." + cell_label(cell);
  }
  return "?";
}

bool ParamRef::is_variance() const {
  return kind == ParamKind::MeasurementVar || kind == ParamKind::LatentVar ||
         kind == ParamKind::TvpVar;
}

// ---------------------------------------------------------------------------
// Stacking
// ---------------------------------------------------------------------------

namespace {

double full_value(const FullParams& values, const CellRef& ref) {
  switch (ref.matrix) {
    case MatrixId::Loading: return values.loading(ref.row, ref.col);
    case MatrixId::Transition: return values.transition(ref.row, ref.col);
    case MatrixId::InputEffect: return values.input_effect(ref.row, ref.col);
  }
  return 0.0;
}

void check_full_dims(const ModelSpec& spec, const FullParams& values) {
  if (values.loading.rows() != spec.k || values.loading.cols() != spec.m ||
      values.transition.rows() != spec.m || values.transition.cols() != spec.m ||
      values.input_effect.rows() != spec.m || values.input_effect.cols() != spec.r ||
      values.measurement_var.size() != spec.k || values.latent_var.size() != spec.m ||
      values.tvp_var.size() != spec.n_tvp()) {
    fail(ErrorCode::DimensionMismatch, "full parameter matrices do not match the spec");
  }
}

}  // namespace

Vector stack_params(const ModelSpec& spec, const FullParams& values) {
  check_full_dims(spec, values);
  const ParamLayout layout(spec);
  Vector pi(layout.size());
  int tvp_at = 0;
  for (int i = 0; i < layout.size(); ++i) {
    const ParamRef& ref = layout.at(i);
    switch (ref.kind) {
      case ParamKind::LoadingCell:
      case ParamKind::TransitionCell:
      case ParamKind::InputCell:
        pi(i) = full_value(values, ref.cell);
        break;
      case ParamKind::MeasurementVar:
        pi(i) = values.measurement_var(ref.index);
        break;
      case ParamKind::LatentVar:
        pi(i) = values.latent_var(ref.index);
        break;
      case ParamKind::TvpVar:
        pi(i) = values.tvp_var(tvp_at++);
        break;
    }
  }
  return pi;
}

FullParams unstack_params(const ModelSpec& spec, const Vector& pi) {
  const ParamLayout layout(spec);
  if (pi.size() != layout.size()) {
    fail(ErrorCode::LayoutMismatch,
         "parameter vector has " + std::to_string(pi.size()) + " entries, layout needs " +
             std::to_string(layout.size()));
  }
  FullParams out;
  out.loading = Matrix::Zero(spec.k, spec.m);
  out.transition = Matrix::Zero(spec.m, spec.m);
  out.input_effect = Matrix::Zero(spec.m, spec.r);
  out.measurement_var = Vector::Zero(spec.k);
  out.latent_var = Vector::Zero(spec.m);
  out.tvp_var = Vector::Zero(spec.n_tvp());

  auto fill_fixed = [](const PatternMatrix& p, Matrix& m) {
    for (int r = 0; r < p.rows; ++r) {
      for (int c = 0; c < p.cols; ++c) {
        if (p.at(r, c).kind == CellKind::Fixed) m(r, c) = p.at(r, c).value;
      }
    }
  };
  fill_fixed(spec.loading, out.loading);
  fill_fixed(spec.transition, out.transition);
  fill_fixed(spec.input_effect, out.input_effect);
  for (int i = 0; i < spec.k; ++i) {
    if (spec.measurement_noise[i].kind == CellKind::Fixed) {
      out.measurement_var(i) = spec.measurement_noise[i].value;
    }
  }
  for (int i = 0; i < spec.m; ++i) {
    if (spec.latent_noise[i].kind == CellKind::Fixed) {
      out.latent_var(i) = spec.latent_noise[i].value;
    }
  }

  int tvp_at = 0;
  for (int i = 0; i < layout.size(); ++i) {
    const ParamRef& ref = layout.at(i);
    switch (ref.kind) {
      case ParamKind::LoadingCell:
        out.loading(ref.cell.row, ref.cell.col) = pi(i);
        break;
      case ParamKind::TransitionCell:
        out.transition(ref.cell.row, ref.cell.col) = pi(i);
        break;
      case ParamKind::InputCell:
        out.input_effect(ref.cell.row, ref.cell.col) = pi(i);
        break;
      case ParamKind::MeasurementVar:
        out.measurement_var(ref.index) = pi(i);
        break;
      case ParamKind::LatentVar:
        out.latent_var(ref.index) = pi(i);
        break;
      case ParamKind::TvpVar:
        out.tvp_var(tvp_at++) = pi(i);
        break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Augmented state
// ---------------------------------------------------------------------------

Vector AugmentedState::joint() const {
  Vector out(dim());
  out.head(factors.size()) = factors;
  out.tail(tvp.size()) = tvp;
  return out;
}

AugmentedState AugmentedState::from_joint(const Vector& joint, int m) {
  if (joint.size() < m) {
    fail(ErrorCode::DimensionMismatch, "joint state shorter than factor block");
  }
  AugmentedState out;
  out.factors = joint.head(m);
  out.tvp = joint.tail(joint.size() - m);
  return out;
}

AugmentedState AugmentedState::zero(const ModelSpec& spec) {
  return AugmentedState{Vector::Zero(spec.m), Vector::Zero(spec.n_tvp())};
}

// ---------------------------------------------------------------------------
// Assembly and model functions
// ---------------------------------------------------------------------------

namespace {

Matrix assemble(const ModelSpec& spec, const PatternMatrix& pattern, MatrixId id,
                const Vector& pi, const Vector& tvp) {
  const ParamLayout layout(spec);
  if (pi.size() != layout.size()) {
    fail(ErrorCode::LayoutMismatch, "parameter vector does not match layout");
  }
  if (tvp.size() != spec.n_tvp()) {
    fail(ErrorCode::DimensionMismatch, "tvp vector does not match spec");
  }
  Matrix out = Matrix::Zero(pattern.rows, pattern.cols);
  for (int r = 0; r < pattern.rows; ++r) {
    for (int c = 0; c < pattern.cols; ++c) {
      if (pattern.at(r, c).kind == CellKind::Fixed) out(r, c) = pattern.at(r, c).value;
    }
  }
  for (int i = 0; i < layout.size(); ++i) {
    const ParamRef& ref = layout.at(i);
    if (!ref.is_variance() && ref.cell.matrix == id) {
      out(ref.cell.row, ref.cell.col) = pi(i);
    }
  }
  const auto cells = spec.tvp_cells();
  for (std::size_t j = 0; j < cells.size(); ++j) {
    if (cells[j].matrix == id) out(cells[j].row, cells[j].col) = tvp(static_cast<int>(j));
  }
  return out;
}

}  // namespace

Matrix assemble_loading(const ModelSpec& spec, const Vector& pi, const Vector& tvp) {
  return assemble(spec, spec.loading, MatrixId::Loading, pi, tvp);
}

Matrix assemble_transition(const ModelSpec& spec, const Vector& pi, const Vector& tvp) {
  return assemble(spec, spec.transition, MatrixId::Transition, pi, tvp);
}

Matrix assemble_input_effect(const ModelSpec& spec, const Vector& pi, const Vector& tvp) {
  return assemble(spec, spec.input_effect, MatrixId::InputEffect, pi, tvp);
}

Vector measurement_noise_diag(const ModelSpec& spec, const Vector& pi) {
  return unstack_params(spec, pi).measurement_var;
}

Vector process_noise_diag(const ModelSpec& spec, const Vector& pi) {
  const FullParams full = unstack_params(spec, pi);
  Vector out(spec.state_dim());
  out.head(spec.m) = full.latent_var;
  out.tail(spec.n_tvp()) = full.tvp_var;
  return out;
}

AugmentedState eval_f(const ModelSpec& spec, const Vector& pi,
                      const AugmentedState& state, const Vector& x) {
  if (state.factors.size() != spec.m || state.tvp.size() != spec.n_tvp()) {
    fail(ErrorCode::DimensionMismatch, "state does not match spec");
  }
  if (x.size() != spec.r) {
    fail(ErrorCode::DimensionMismatch, "input vector does not match r");
  }
  AugmentedState next;
  next.factors = assemble_transition(spec, pi, state.tvp) * state.factors;
  if (spec.r > 0) {
    next.factors += assemble_input_effect(spec, pi, state.tvp) * x;
  }
  next.tvp = state.tvp;  // random-walk mean
  return next;
}

Vector eval_h(const ModelSpec& spec, const Vector& pi, const AugmentedState& state) {
  if (state.factors.size() != spec.m || state.tvp.size() != spec.n_tvp()) {
    fail(ErrorCode::DimensionMismatch, "state does not match spec");
  }
  return assemble_loading(spec, pi, state.tvp) * state.factors;
}

Matrix jacobian_f(const ModelSpec& spec, const Vector& pi,
                  const AugmentedState& state, const Vector& x) {
  if (state.factors.size() != spec.m || x.size() != spec.r) {
    fail(ErrorCode::DimensionMismatch, "state or input does not match spec");
  }
  const int n = spec.state_dim();
  Matrix jac = Matrix::Zero(n, n);
  jac.topLeftCorner(spec.m, spec.m) = assemble_transition(spec, pi, state.tvp);
  const auto cells = spec.tvp_cells();
  for (std::size_t j = 0; j < cells.size(); ++j) {
    const CellRef& cell = cells[j];
    const int col = spec.m + static_cast<int>(j);
    if (cell.matrix == MatrixId::Transition) {
      jac(cell.row, col) = state.factors(cell.col);
    } else if (cell.matrix == MatrixId::InputEffect) {
      jac(cell.row, col) = x(cell.col);
    }
  }
  jac.bottomRightCorner(spec.n_tvp(), spec.n_tvp()).setIdentity();
  return jac;
}

Matrix jacobian_h(const ModelSpec& spec, const Vector& pi, const AugmentedState& state) {
  if (state.factors.size() != spec.m) {
    fail(ErrorCode::DimensionMismatch, "state does not match spec");
  }
  Matrix jac = Matrix::Zero(spec.k, spec.state_dim());
  jac.leftCols(spec.m) = assemble_loading(spec, pi, state.tvp);
  const auto cells = spec.tvp_cells();
  for (std::size_t j = 0; j < cells.size(); ++j) {
    const CellRef& cell = cells[j];
    if (cell.matrix == MatrixId::Loading) {
      jac(cell.row, spec.m + static_cast<int>(j)) = state.factors(cell.col);
    }
  }
  return jac;
}

std::vector<HessianPair> hessian_f_pairs(const ModelSpec& spec, int state_index) {
  if (state_index < 0 || state_index >= spec.state_dim()) {
    fail(ErrorCode::IndexOutOfRange, "state index " + std::to_string(state_index));
  }
  std::vector<HessianPair> pairs;
  if (state_index >= spec.m) return pairs;  // tvp block is linear
  const auto cells = spec.tvp_cells();
  for (std::size_t j = 0; j < cells.size(); ++j) {
    const CellRef& cell = cells[j];
    // d^2 f_i / (d eta_c d omega_j) = 1 when omega_j drives phi(i, c);
    // input-effect cells contribute nothing because x is a known input.
    if (cell.matrix == MatrixId::Transition && cell.row == state_index) {
      pairs.push_back(HessianPair{cell.col, spec.m + static_cast<int>(j)});
    }
  }
  return pairs;
}

std::vector<HessianPair> hessian_h_pairs(const ModelSpec& spec, int obs_index) {
  if (obs_index < 0 || obs_index >= spec.k) {
    fail(ErrorCode::IndexOutOfRange, "observation index " + std::to_string(obs_index));
  }
  std::vector<HessianPair> pairs;
  const auto cells = spec.tvp_cells();
  for (std::size_t j = 0; j < cells.size(); ++j) {
    const CellRef& cell = cells[j];
    if (cell.matrix == MatrixId::Loading && cell.row == obs_index) {
      pairs.push_back(HessianPair{cell.col, spec.m + static_cast<int>(j)});
    }
  }
  return pairs;
}

namespace {

Matrix pairs_to_matrix(const std::vector<HessianPair>& pairs, int n) {
  Matrix h = Matrix::Zero(n, n);
  for (const HessianPair& p : pairs) {
    h(p.a, p.b) += 1.0;
    h(p.b, p.a) += 1.0;
  }
  return h;
}

}  // namespace

Matrix hessian_f(const ModelSpec& spec, int state_index) {
  return pairs_to_matrix(hessian_f_pairs(spec, state_index), spec.state_dim());
}

Matrix hessian_h(const ModelSpec& spec, int obs_index) {
  return pairs_to_matrix(hessian_h_pairs(spec, obs_index), spec.state_dim());
}

}  // namespace tvpkf
