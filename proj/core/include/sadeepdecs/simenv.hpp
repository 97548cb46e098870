#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "sadeepdecs/dataset.hpp"
#include "sadeepdecs/pdtmc.hpp"

namespace sadeepdecs {

/// Kinematic ground truth: the moving robot starts at the origin and drives
/// along +x2; the collider follows unicycle dynamics from its state.
struct OracleConfig {
  double dt = 0.1;
  double horizon = 10.0;
  double radius = 2.19;
  double robot_speed = 1.0;
};

/// 1 iff the two robots come closer than `radius` at any sampled instant
/// t = 0, dt, ..., horizon (explicit Euler for the collider heading).
int ground_truth_label(const Features& collider, const OracleConfig& cfg = {});

/// Share of positive labels over `samples` uniform draws of the input space.
double positive_rate(const OracleConfig& cfg, std::size_t samples, std::uint64_t seed);

struct Calibration {
  double radius = 0.0;
  double rate = 0.0;
};

/// Bisection on the collision radius so that the uniform positive rate
/// approaches `target` (evaluated on one fixed sample set).
Calibration calibrate_radius(double target, OracleConfig cfg, std::size_t samples = 20000,
                             std::uint64_t seed = 7, double tolerance = 1e-3);

Features uniform_input(std::mt19937_64& rng);
/// Uniform draw from the per-dimension box of half-width `radius[i]` around
/// `center`, clipped to the input space.
Features neighborhood_input(const Features& center, const Features& radius, std::mt19937_64& rng);

enum class EnvMode { Uniform, RandomWalk };

struct WalkConfig {
  // both expressed in units of x1 and rescaled to every other range
  double step = 0.5;
  double epsilon = 0.5;
};

/// Source of operational collider states.
class EnvGenerator {
 public:
  EnvGenerator(EnvMode mode, const Features& start, std::uint64_t seed, WalkConfig walk = {});

  /// Uniform: independent uniform draw. RandomWalk: Gaussian step of the
  /// center (clipped), then a uniform draw from its epsilon-box.
  Features next_input();

  EnvMode mode() const { return mode_; }
  const Features& center() const { return center_; }

 private:
  EnvMode mode_;
  Features center_;
  WalkConfig walk_;
  std::mt19937_64 rng_;
};

/// Per-dimension scale of WalkConfig quantities: width_i / width_x1.
Features walk_scale(double value);

/// Operational trace of `n` labelled collider states.
std::vector<Sample> generate_trace(EnvGenerator& gen, std::size_t n, const OracleConfig& oracle);

/// Train/val/confusion/test sets drawn independently from the box of
/// half-width eps0 around c0 and labelled by the oracle.
std::array<Dataset, 4> gen_initial_datasets(const Features& c0, double eps0,
                                            const std::array<std::size_t, 4>& sizes,
                                            std::uint64_t seed, const OracleConfig& oracle = {});

// ---------------------------------------------------------------------------
// Grid world

struct Cell {
  int row = 0;
  int col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

struct GridMap {
  int width = 20;
  int height = 20;
  std::vector<bool> obstacles;  // row-major
  Cell start;
  Cell goal;

  bool blocked(Cell c) const { return obstacles[static_cast<std::size_t>(c.row * width + c.col)]; }
  bool inside(Cell c) const { return c.row >= 0 && c.col >= 0 && c.row < height && c.col < width; }
};

class UnreachableGoal : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Path = std::vector<Cell>;  // start .. goal inclusive

/// Shortest 4-connected path by breadth-first search; neighbours are
/// expanded up, right, down, left.
Path plan_path(const GridMap& map);

/// Random obstacles at `density`; start and goal are distinct free cells
/// with a path between them.
GridMap random_map(int width, int height, double density, std::mt19937_64& rng);
/// Redraws start and goal on an existing map until they are connected.
void redraw_endpoints(GridMap& map, std::mt19937_64& rng);

enum class Action { Move, Wait };
enum class StepOutcome { Done, Collision, Incomplete };

struct Decision {
  Action action = Action::Move;
  int prediction = 0;
};

struct QueryRecord {
  Sample sample;
  int prediction = 0;
  Action action = Action::Move;
};

struct StepRecord {
  StepOutcome outcome = StepOutcome::Incomplete;
  std::size_t waits = 0;
  double elapsed = 0.0;
  std::vector<QueryRecord> queries;
};

/// Supplies the next labelled collider state, or nothing once the
/// benchmark trace is exhausted.
using SampleSource = std::function<std::optional<Sample>()>;
/// Perception plus controller for one query.
using DecideFn = std::function<Decision(const Features&)>;
/// Called after each query, once its ground truth is known.
using QueryHook = std::function<void(const QueryRecord&)>;

struct WorldConfig {
  int width = 20;
  int height = 20;
  double obstacle_density = 0.1;
  ModelConstants constants;
};

class World {
 public:
  World(const WorldConfig& cfg, std::uint64_t seed);

  /// One movement step along the path: draws collider presence, queries
  /// `decide` when a collider is present, waits (re-drawing the situation)
  /// or moves. A move into a positively labelled collider is a collision
  /// and the step is re-attempted next time.
  StepRecord step(const SampleSource& source, const DecideFn& decide, const QueryHook& hook = {});

  const GridMap& map() const { return map_; }
  const Path& path() const { return path_; }
  std::size_t position() const { return position_; }
  std::size_t episodes() const { return episodes_; }
  std::size_t collisions() const { return collisions_; }
  std::size_t completed_steps() const { return completed_; }

 private:
  void new_episode();

  WorldConfig cfg_;
  std::mt19937_64 rng_;      // collider presence
  std::mt19937_64 map_rng_;  // episode layout, kept apart so presence draws stay aligned
  GridMap map_;
  Path path_;
  std::size_t position_ = 0;
  std::size_t episodes_ = 0;
  std::size_t collisions_ = 0;
  std::size_t completed_ = 0;
};

}  // namespace sadeepdecs
