#include "crop/observe.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>

namespace crop {

std::string to_string(ObsMethod method) {
  switch (method) {
    case ObsMethod::FO: return "fo";
    case ObsMethod::Radius: return "radius";
    case ObsMethod::Action: return "action";
    case ObsMethod::Object: return "object";
    case ObsMethod::RAD: return "rad";
  }
  return "?";
}

ObsMethod obs_method_from_string(const std::string& name) {
  if (name == "fo") return ObsMethod::FO;
  if (name == "radius") return ObsMethod::Radius;
  if (name == "action") return ObsMethod::Action;
  if (name == "object") return ObsMethod::Object;
  if (name == "rad") return ObsMethod::RAD;
  throw std::invalid_argument("unknown observation method '" + name + "'");
}

RadConfig default_rad_config(int rows, int cols) {
  if (rows == 7 && cols == 7) return RadConfig{6, 6, 7, 7, 2};
  if (rows == 11 && cols == 11) return RadConfig{9, 9, 11, 11, 3};
  throw std::invalid_argument("RAD ratios are defined for 7x7 and 11x11 mazes only");
}

void ObservationSpec::validate() const {
  if (env_rows < 1 || env_cols < 1) throw std::invalid_argument("spec has no grid shape");
  switch (method) {
    case ObsMethod::Radius:
      if (radius_rows < 1 || radius_cols < 1)
        throw std::invalid_argument("radius must be >= 1 per dimension");
      break;
    case ObsMethod::Action:
      if (action_offsets.size() != static_cast<size_t>(kNumActions))
        throw std::invalid_argument("mu must have one entry per action");
      break;
    case ObsMethod::Object:
      if (object_set.empty()) throw std::invalid_argument("object set must be nonempty");
      if (nearest_count < 1) throw std::invalid_argument("eta must be >= 1");
      for (const FeatureKind kind : object_set)
        if (kind == FeatureKind::Agent)
          throw std::invalid_argument("object set excludes Agent");
      break;
    case ObsMethod::RAD:
      if (rad.crop_rows < 1 || rad.crop_cols < 1 || rad.translate_rows < rad.crop_rows ||
          rad.translate_cols < rad.crop_cols || rad.cutout_max < 0)
        throw std::invalid_argument("invalid RAD configuration");
      break;
    case ObsMethod::FO: break;
  }
}

std::vector<int> ObservationSpec::shape() const {
  switch (method) {
    case ObsMethod::FO:
    case ObsMethod::RAD: return {env_rows, env_cols, kNumFeatureKinds};
    case ObsMethod::Radius:
      return {2 * radius_rows + 1, 2 * radius_cols + 1, kNumFeatureKinds};
    case ObsMethod::Action: return {static_cast<int>(action_offsets.size()), kNumFeatureKinds};
    case ObsMethod::Object:
      return {static_cast<int>(object_set.size()) * nearest_count, 2};
  }
  return {};
}

int ObservationSpec::size() const {
  int n = 1;
  for (const int d : shape()) n *= d;
  return n;
}

ObservationSpec make_spec(ObsMethod method, int env_rows, int env_cols, bool maze) {
  ObservationSpec spec;
  spec.method = method;
  spec.env_rows = env_rows;
  spec.env_cols = env_cols;
  spec.action_offsets.assign(std::begin(kActionOffsets), std::end(kActionOffsets));
  if (maze) {
    spec.object_set = {FeatureKind::Wall, FeatureKind::Field, FeatureKind::Goal};
    spec.nearest_count = 2;
  } else {
    spec.object_set = {FeatureKind::Wall, FeatureKind::Field, FeatureKind::Hole,
                       FeatureKind::Goal};
    spec.nearest_count = 1;
  }
  if (method == ObsMethod::RAD) spec.rad = default_rad_config(env_rows, env_cols);
  spec.validate();
  return spec;
}

GridObs full_grid(const EnvState& state) {
  const Layout& layout = *state.layout;
  GridObs grid{layout.height(), layout.width(), {}};
  grid.cells.reserve(layout.cells().size());
  for (const FeatureKind kind : layout.cells()) grid.cells.push_back(static_cast<Cell>(kind));
  grid.at(state.agent_pos.row, state.agent_pos.col) = static_cast<Cell>(FeatureKind::Agent);
  return grid;
}

GridObs crop_radius(const GridObs& full, Position agent, int rho_r, int rho_c) {
  GridObs window{2 * rho_r + 1, 2 * rho_c + 1, {}};
  window.cells.reserve(static_cast<size_t>(window.rows) * window.cols);
  for (int r = agent.row - rho_r; r <= agent.row + rho_r; ++r) {
    for (int c = agent.col - rho_c; c <= agent.col + rho_c; ++c) {
      const bool inside = r >= 0 && r < full.rows && c >= 0 && c < full.cols;
      window.cells.push_back(inside ? full.at(r, c) : static_cast<Cell>(FeatureKind::Wall));
    }
  }
  return window;
}

std::vector<Cell> crop_action(const GridObs& full, Position agent, std::span<const Offset> mu) {
  std::vector<Cell> cells;
  cells.reserve(mu.size());
  for (const Offset d : mu) cells.push_back(full.at(agent.row + d.row, agent.col + d.col));
  return cells;
}

std::vector<Position> scan_nearest(const GridObs& full, Position agent, FeatureKind kind,
                                   int eta) {
  if (eta < 1) throw std::invalid_argument("eta must be >= 1");
  // Row-major traversal is already the tie order, so a stable sort by
  // distance alone gives ascending distance with row-major ties.
  std::vector<Position> hits;
  for (int r = 0; r < full.rows; ++r)
    for (int c = 0; c < full.cols; ++c)
      if (full.at(r, c) == static_cast<Cell>(kind)) hits.push_back({r, c});
  std::stable_sort(hits.begin(), hits.end(), [&](Position a, Position b) {
    const int da = std::abs(a.row - agent.row) + std::abs(a.col - agent.col);
    const int db = std::abs(b.row - agent.row) + std::abs(b.col - agent.col);
    return da < db;
  });
  hits.resize(static_cast<size_t>(eta), Position{full.rows, full.cols});
  return hits;
}

std::vector<Offset> crop_object(const GridObs& full, Position agent,
                                std::span<const FeatureKind> objects, int eta) {
  if (objects.empty()) throw std::invalid_argument("object set must be nonempty");
  const Position sentinel{full.rows, full.cols};
  std::vector<Offset> offsets;
  offsets.reserve(objects.size() * static_cast<size_t>(eta));
  for (const FeatureKind kind : objects) {
    for (const Position p : scan_nearest(full, agent, kind, eta)) {
      if (p == sentinel)
        offsets.push_back({full.rows, full.cols});
      else
        offsets.push_back({p.row - agent.row, p.col - agent.col});
    }
  }
  return offsets;
}

GridObs rad_crop(const GridObs& grid, Rng& rng, int target_rows, int target_cols) {
  if (target_rows > grid.rows || target_cols > grid.cols)
    throw std::invalid_argument("crop target exceeds grid shape");
  const int r0 = rng.uniform_int(0, grid.rows - target_rows);
  const int c0 = rng.uniform_int(0, grid.cols - target_cols);
  GridObs out{target_rows, target_cols, {}};
  out.cells.reserve(static_cast<size_t>(target_rows) * target_cols);
  for (int r = 0; r < target_rows; ++r)
    for (int c = 0; c < target_cols; ++c) out.cells.push_back(grid.at(r0 + r, c0 + c));
  return out;
}

GridObs rad_translate(const GridObs& grid, Rng& rng, int target_rows, int target_cols) {
  if (target_rows < grid.rows || target_cols < grid.cols)
    throw std::invalid_argument("translate target smaller than grid");
  const int r0 = rng.uniform_int(0, target_rows - grid.rows);
  const int c0 = rng.uniform_int(0, target_cols - grid.cols);
  GridObs out{target_rows, target_cols,
              std::vector<Cell>(static_cast<size_t>(target_rows) * target_cols, kPadCell)};
  for (int r = 0; r < grid.rows; ++r)
    for (int c = 0; c < grid.cols; ++c) out.at(r0 + r, c0 + c) = grid.at(r, c);
  return out;
}

GridObs rad_cutout(const GridObs& grid, Rng& rng, int max_side) {
  if (max_side < 0) throw std::invalid_argument("cutout range must be >= 0");
  const int size_r = rng.uniform_int(0, std::min(max_side, grid.rows));
  const int size_c = rng.uniform_int(0, std::min(max_side, grid.cols));
  const int r0 = rng.uniform_int(0, grid.rows - size_r);
  const int c0 = rng.uniform_int(0, grid.cols - size_c);
  GridObs out = grid;
  for (int r = r0; r < r0 + size_r; ++r)
    for (int c = c0; c < c0 + size_c; ++c) out.at(r, c) = kPadCell;
  return out;
}

Observation encode_cells(std::span<const Cell> cells) {
  Observation obs;
  obs.values.assign(cells.size() * kNumFeatureKinds, 0.0);
  for (size_t i = 0; i < cells.size(); ++i)
    if (cells[i] < kNumFeatureKinds) obs.values[i * kNumFeatureKinds + cells[i]] = 1.0;
  obs.shape = {static_cast<int>(cells.size()), kNumFeatureKinds};
  return obs;
}

Observation encode_grid(const GridObs& grid) {
  Observation obs = encode_cells(grid.cells);
  obs.shape = {grid.rows, grid.cols, kNumFeatureKinds};
  return obs;
}

Observation encode_offsets(std::span<const Offset> offsets, int env_rows, int env_cols) {
  Observation obs;
  obs.values.reserve(offsets.size() * 2);
  for (const Offset d : offsets) {
    obs.values.push_back(static_cast<double>(d.row) / env_rows);
    obs.values.push_back(static_cast<double>(d.col) / env_cols);
  }
  obs.shape = {static_cast<int>(offsets.size()), 2};
  return obs;
}

Observation apply(const ObservationSpec& spec, const EnvState& state, Rng* rad_rng) {
  const GridObs full = full_grid(state);
  switch (spec.method) {
    case ObsMethod::FO: return encode_grid(full);
    case ObsMethod::Radius:
      return encode_grid(crop_radius(full, state.agent_pos, spec.radius_rows, spec.radius_cols));
    case ObsMethod::Action: {
      const auto cells = crop_action(full, state.agent_pos, spec.action_offsets);
      return encode_cells(cells);
    }
    case ObsMethod::Object: {
      const auto offsets =
          crop_object(full, state.agent_pos, spec.object_set, spec.nearest_count);
      return encode_offsets(offsets, spec.env_rows, spec.env_cols);
    }
    case ObsMethod::RAD: {
      if (rad_rng == nullptr) return encode_grid(full);  // evaluation: un-augmented
      GridObs g = rad_crop(full, *rad_rng, spec.rad.crop_rows, spec.rad.crop_cols);
      g = rad_translate(g, *rad_rng, spec.rad.translate_rows, spec.rad.translate_cols);
      g = rad_cutout(g, *rad_rng, spec.rad.cutout_max);
      return encode_grid(g);
    }
  }
  throw std::logic_error("unhandled observation method");
}

}  // namespace crop
