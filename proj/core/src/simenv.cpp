#include "sadeepdecs/simenv.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace sadeepdecs {

int ground_truth_label(const Features& c, const OracleConfig& cfg) {
  double x = c[0], y = c[1], heading = c[2];
  const double speed = c[3], omega = c[4];
  const auto steps = static_cast<std::size_t>(std::llround(cfg.horizon / cfg.dt));
  const double r2 = cfg.radius * cfg.radius;
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * cfg.dt;
    const double dx = x;
    const double dy = y - cfg.robot_speed * t;
    if (dx * dx + dy * dy < r2) return 1;
    x += speed * std::cos(heading) * cfg.dt;
    y += speed * std::sin(heading) * cfg.dt;
    heading += omega * cfg.dt;
  }
  return 0;
}

Features uniform_input(std::mt19937_64& rng) {
  Features x{};
  for (std::size_t i = 0; i < kFeatureDim; ++i) {
    std::uniform_real_distribution<double> d(kInputSpace[i].lo, kInputSpace[i].hi);
    x[i] = d(rng);
  }
  return x;
}

Features neighborhood_input(const Features& center, const Features& radius, std::mt19937_64& rng) {
  Features x{};
  for (std::size_t i = 0; i < kFeatureDim; ++i) {
    if (radius[i] <= 0.0) {
      x[i] = center[i];
      continue;
    }
    std::uniform_real_distribution<double> d(center[i] - radius[i], center[i] + radius[i]);
    x[i] = d(rng);
  }
  return clip_to_input_space(x);
}

double positive_rate(const OracleConfig& cfg, std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::size_t positives = 0;
  for (std::size_t i = 0; i < samples; ++i) positives += ground_truth_label(uniform_input(rng), cfg);
  return static_cast<double>(positives) / static_cast<double>(samples);
}

Calibration calibrate_radius(double target, OracleConfig cfg, std::size_t samples, std::uint64_t seed,
                             double tolerance) {
  if (!(target > 0.0 && target < 1.0)) throw std::invalid_argument("calibrate_radius: target must be in (0,1)");
  std::mt19937_64 rng(seed);
  std::vector<Features> pool(samples);
  for (auto& x : pool) x = uniform_input(rng);
  auto rate_at = [&](double r) {
    cfg.radius = r;
    std::size_t positives = 0;
    for (const auto& x : pool) positives += ground_truth_label(x, cfg);
    return static_cast<double>(positives) / static_cast<double>(pool.size());
  };
  double lo = 1e-3, hi = 20.0;
  Calibration best{hi, rate_at(hi)};
  for (int iter = 0; iter < 60; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double rate = rate_at(mid);
    if (std::abs(rate - target) < std::abs(best.rate - target)) best = {mid, rate};
    if (std::abs(rate - target) <= tolerance) break;
    (rate < target ? lo : hi) = mid;
  }
  return best;
}

Features walk_scale(double value) {
  Features s{};
  for (std::size_t i = 0; i < kFeatureDim; ++i) s[i] = value * kInputSpace[i].width() / kInputSpace[0].width();
  return s;
}

EnvGenerator::EnvGenerator(EnvMode mode, const Features& start, std::uint64_t seed, WalkConfig walk)
    : mode_(mode), center_(clip_to_input_space(start)), walk_(walk), rng_(seed) {}

Features EnvGenerator::next_input() {
  if (mode_ == EnvMode::Uniform) return uniform_input(rng_);
  const Features step = walk_scale(walk_.step);
  for (std::size_t i = 0; i < kFeatureDim; ++i) {
    std::normal_distribution<double> d(0.0, step[i]);
    if (step[i] > 0.0) center_[i] += d(rng_);
  }
  center_ = clip_to_input_space(center_);
  return neighborhood_input(center_, walk_scale(walk_.epsilon), rng_);
}

std::vector<Sample> generate_trace(EnvGenerator& gen, std::size_t n, const OracleConfig& oracle) {
  std::vector<Sample> trace;
  trace.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Sample s;
    s.x = gen.next_input();
    s.y = ground_truth_label(s.x, oracle);
    trace.push_back(s);
  }
  return trace;
}

std::array<Dataset, 4> gen_initial_datasets(const Features& c0, double eps0,
                                            const std::array<std::size_t, 4>& sizes,
                                            std::uint64_t seed, const OracleConfig& oracle) {
  constexpr std::array<Role, 4> roles{Role::Train, Role::Val, Role::Confusion, Role::Test};
  Features radius{};
  radius.fill(eps0);
  std::array<Dataset, 4> out;
  for (std::size_t k = 0; k < 4; ++k) {
    if (sizes[k] == 0) throw std::invalid_argument("gen_initial_datasets: sizes must be positive");
    std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL * (k + 1));
    out[k].role = roles[k];
    out[k].samples.reserve(sizes[k]);
    for (std::size_t i = 0; i < sizes[k]; ++i) {
      Sample s;
      s.x = neighborhood_input(c0, radius, rng);
      s.y = ground_truth_label(s.x, oracle);
      out[k].samples.push_back(s);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Grid world

Path plan_path(const GridMap& map) {
  if (!map.inside(map.start) || !map.inside(map.goal) || map.blocked(map.start) || map.blocked(map.goal))
    throw UnreachableGoal("start or goal is blocked or outside the map");
  const auto idx = [&](Cell c) { return static_cast<std::size_t>(c.row * map.width + c.col); };
  std::vector<int> parent(static_cast<std::size_t>(map.width * map.height), -1);
  std::vector<bool> seen(parent.size(), false);
  std::deque<Cell> queue{map.start};
  seen[idx(map.start)] = true;
  constexpr std::array<Cell, 4> moves{{{-1, 0}, {0, 1}, {1, 0}, {0, -1}}};
  while (!queue.empty()) {
    const Cell c = queue.front();
    queue.pop_front();
    if (c == map.goal) break;
    for (const Cell& m : moves) {
      const Cell n{c.row + m.row, c.col + m.col};
      if (!map.inside(n) || map.blocked(n) || seen[idx(n)]) continue;
      seen[idx(n)] = true;
      parent[idx(n)] = static_cast<int>(idx(c));
      queue.push_back(n);
    }
  }
  if (!seen[idx(map.goal)]) throw UnreachableGoal("goal is not reachable from start");
  Path path;
  for (int at = static_cast<int>(idx(map.goal)); at != -1; at = parent[static_cast<std::size_t>(at)])
    path.push_back({at / map.width, at % map.width});
  std::reverse(path.begin(), path.end());
  return path;
}

void redraw_endpoints(GridMap& map, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> row(0, map.height - 1), col(0, map.width - 1);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    map.start = {row(rng), col(rng)};
    map.goal = {row(rng), col(rng)};
    if (map.start == map.goal || map.blocked(map.start) || map.blocked(map.goal)) continue;
    try {
      plan_path(map);
      return;
    } catch (const UnreachableGoal&) {
    }
  }
  throw UnreachableGoal("could not place connected start and goal");
}

GridMap random_map(int width, int height, double density, std::mt19937_64& rng) {
  if (width < 2 || height < 1) throw std::invalid_argument("random_map: map too small");
  GridMap map;
  map.width = width;
  map.height = height;
  std::bernoulli_distribution obstacle(density);
  map.obstacles.resize(static_cast<std::size_t>(width * height));
  for (std::size_t i = 0; i < map.obstacles.size(); ++i) map.obstacles[i] = obstacle(rng);
  redraw_endpoints(map, rng);
  return map;
}

World::World(const WorldConfig& cfg, std::uint64_t seed)
    : cfg_(cfg), rng_(seed), map_rng_(seed ^ 0x5bd1e995ULL) {
  map_ = random_map(cfg.width, cfg.height, cfg.obstacle_density, map_rng_);
  path_ = plan_path(map_);
}

void World::new_episode() {
  redraw_endpoints(map_, map_rng_);
  path_ = plan_path(map_);
  position_ = 0;
  ++episodes_;
}

StepRecord World::step(const SampleSource& source, const DecideFn& decide, const QueryHook& hook) {
  StepRecord rec;
  std::bernoulli_distribution collider(cfg_.constants.p_collider);
  while (true) {
    if (!collider(rng_)) {
      rec.elapsed += cfg_.constants.t_move;
      rec.outcome = StepOutcome::Done;
      break;
    }
    auto sample = source();
    if (!sample) {
      rec.outcome = StepOutcome::Incomplete;
      return rec;
    }
    const Decision d = decide(sample->x);
    QueryRecord q{*sample, d.prediction, d.action};
    rec.queries.push_back(q);
    if (hook) hook(q);
    if (d.action == Action::Wait) {
      rec.elapsed += cfg_.constants.t_wait;
      ++rec.waits;
      continue;
    }
    rec.elapsed += cfg_.constants.t_move;
    rec.outcome = sample->y == 1 ? StepOutcome::Collision : StepOutcome::Done;
    break;
  }
  if (rec.outcome == StepOutcome::Collision) {
    ++collisions_;
  } else {
    ++completed_;
    if (++position_ + 1 >= path_.size()) new_episode();
  }
  return rec;
}

}  // namespace sadeepdecs
