#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "crop/grid.hpp"
#include "crop/rng.hpp"

namespace crop {

enum class ObsMethod : uint8_t { FO = 0, Radius = 1, Action = 2, Object = 3, RAD = 4 };

std::string to_string(ObsMethod method);
ObsMethod obs_method_from_string(const std::string& name);

// Cell values inside observation grids: the five feature kinds plus a pad
// token introduced by RAD translate/cutout. Pad encodes to all-zeros one-hot.
using Cell = uint8_t;
constexpr Cell kPadCell = 5;

struct GridObs {
  int rows = 0;
  int cols = 0;
  std::vector<Cell> cells;  // row-major

  Cell at(int r, int c) const { return cells[static_cast<size_t>(r) * cols + c]; }
  Cell& at(int r, int c) { return cells[static_cast<size_t>(r) * cols + c]; }
};

// RAD augmentation ratios: random crop target, translate target (the original
// shape), and the inclusive upper bound for cutout patch sides.
struct RadConfig {
  int crop_rows = 0;
  int crop_cols = 0;
  int translate_rows = 0;
  int translate_cols = 0;
  int cutout_max = 0;
};

// Ratios for the two maze sizes: 7x7 crops to (6,6) with cutout range (0,2),
// 11x11 crops to (9,9) with cutout range (0,3). Throws for other shapes.
RadConfig default_rad_config(int rows, int cols);

// A fully resolved observation function: method plus its parameters plus the
// native grid shape it applies to.
struct ObservationSpec {
  ObsMethod method = ObsMethod::FO;
  int env_rows = 0;
  int env_cols = 0;
  int radius_rows = 2;  // rho
  int radius_cols = 2;
  std::vector<Offset> action_offsets;     // mu, one entry per Action in order
  std::vector<FeatureKind> object_set;    // O, fixed declared order
  int nearest_count = 1;                  // eta
  RadConfig rad;

  // Throws std::invalid_argument on out-of-contract parameters (rho or eta
  // < 1, Agent in the object set, wrong mu arity).
  void validate() const;

  std::vector<int> shape() const;  // trailing one-hot / offset dimension included
  int size() const;
};

// Spec factory with the published defaults for an environment family's grid:
// rho=(2,2); mu = the action offsets; O = all features except Agent (no Hole
// for mazes), eta=1 for holey grids and 2 for mazes; RAD ratios by maze size.
ObservationSpec make_spec(ObsMethod method, int env_rows, int env_cols, bool maze);

struct Observation {
  std::vector<double> values;
  std::vector<int> shape;
};

// Layout cells with the agent overlaid, as an observation grid.
GridObs full_grid(const EnvState& state);

// Window of shape (2*rho_r+1, 2*rho_c+1) centered on the agent; cells outside
// the grid are padded with Wall.
GridObs crop_radius(const GridObs& full, Position agent, int rho_r, int rho_c);

// The cells reachable by each action offset, in action order.
std::vector<Cell> crop_action(const GridObs& full, Position agent, std::span<const Offset> mu);

// Up to eta absolute positions of cells matching `kind`, ordered by ascending
// Manhattan distance from the agent, ties row-major. Missing entries are
// padded with the sentinel position (rows, cols), outside any real cell.
std::vector<Position> scan_nearest(const GridObs& full, Position agent, FeatureKind kind,
                                   int eta);

// Offset matrix of shape (|O|*eta, 2): scan_nearest positions minus the agent
// position, object types in declared order; sentinel rows are (rows, cols).
std::vector<Offset> crop_object(const GridObs& full, Position agent,
                                std::span<const FeatureKind> objects, int eta);

// RAD primitives. Each draws its randomness from the passed generator and
// checks input dimensions.
GridObs rad_crop(const GridObs& grid, Rng& rng, int target_rows, int target_cols);
GridObs rad_translate(const GridObs& grid, Rng& rng, int target_rows, int target_cols);
GridObs rad_cutout(const GridObs& grid, Rng& rng, int max_side);

// One-hot encoding over the five feature kinds per cell; pad cells encode to
// all-zeros. Shape is the grid shape plus a trailing 5.
Observation encode_grid(const GridObs& grid);
Observation encode_cells(std::span<const Cell> cells);

// Offsets scaled by (1/rows, 1/cols); real offsets land strictly inside
// (-1, 1), the sentinel maps to exactly (1, 1).
Observation encode_offsets(std::span<const Offset> offsets, int env_rows, int env_cols);

// Dispatches to the configured transform chain and encodes. `rad_rng` carries
// the augmentation randomness during rollout collection; pass nullptr at
// evaluation time, where RAD is the identity on the full grid.
Observation apply(const ObservationSpec& spec, const EnvState& state, Rng* rad_rng = nullptr);

}  // namespace crop
