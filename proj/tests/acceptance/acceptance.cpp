// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sadeepdecs/harness.hpp"
#include "sadeepdecs/mlp.hpp"
#include "sadeepdecs/pmc.hpp"
#include "sadeepdecs/synthesis.hpp"
#include "sadeepdecs/text_io.hpp"
#include "sadeepdecs/uq.hpp"
#include "test_support.hpp"

using namespace sadeepdecs;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double round4(double x) { return std::round(x * 10000.0) / 10000.0; }

const ConfusionMatrix kC{{2000, 290}, {10, 200}};
const ConfusionMatrix kCPrime{{1000, 200}, {1200, 100}};
const std::vector<std::string> kTargets{"done", "collision"};
const Valuation kFixed{{"p_collider", 0.8}, {"p_occ", 0.25}};

Dtmc reference_chain(const UncertaintyVector& u, double c1, double c2) {
  Valuation v = u.as_valuation();
  v["c1"] = c1;
  v["c2"] = c2;
  return instantiate(reference_model(), reference_valuation(ModelConstants{}, v));
}

// ---------------------------------------------------------------------------

void criterion1(Verdict& v) {
  const auto t0 = Clock::now();
  const auto u = quantify(kC);
  const auto up = quantify(kCPrime);
  const double ms = 1000.0 * seconds_since(t0);
  const std::vector<double> got{u.rate(0, 0), u.rate(0, 1), u.rate(1, 0), u.rate(1, 1),
                                up.rate(0, 0), up.rate(0, 1), up.rate(1, 0), up.rate(1, 1)};
  const std::vector<double> want{0.8734, 0.1266, 0.0476, 0.9524, 0.8333, 0.1667, 0.9231, 0.0769};
  for (std::size_t i = 0; i < got.size(); ++i) v.require(round4(got[i]) == want[i], "rate " + std::to_string(i));
  v.require(ms < 100.0, "runtime");
  v.detail << "u=(" << round4(got[0]) << ", " << round4(got[1]) << ", " << round4(got[2]) << ", "
           << round4(got[3]) << ") u'=(" << round4(got[4]) << ", " << round4(got[5]) << ", " << round4(got[6])
           << ", " << round4(got[7]) << ") in " << ms << " ms";
}

void criterion2(Verdict& v) {
  const auto t0 = Clock::now();
  struct Case {
    std::string name;
    Dtmc chain;
  };
  std::vector<Case> cases;
  for (const auto& e : testsupport::corpus())
    cases.push_back({e.file, instantiate(load_model((testsupport::corpus_dir() / e.file).string()), e.valuation)});
  const auto u = quantify(kC);
  cases.push_back({"reference(1,0)", reference_chain(u, 1.0, 0.0)});
  cases.push_back({"reference(0.2,0)", reference_chain(u, 0.2, 0.0)});

  const std::size_t n = 100000;
  std::uint64_t seed = 1;
  double worst = 0.0;  // largest deviation in units of the allowed bound
  for (const auto& c : cases) {
    const double p = until_probability(c.chain, "collision", "done");
    const double r = expected_reward_to_absorption(c.chain, kTargets);
    const auto sim = simulate_chain(c.chain, "collision", "done", kTargets, n, seed++);
    const double bound_p = 3.0 * testsupport::binomial_sigma(sim.probability, n);
    const double dev_p = std::abs(p - sim.probability);
    v.require(dev_p <= bound_p, c.name + " probability");
    if (bound_p > 0) worst = std::max(worst, dev_p / bound_p);
    if (std::isinf(r)) {
      v.require(sim.unreached > 0, c.name + " infinite reward");
    } else {
      const double bound_r = 3.0 * std::sqrt(sim.reward_variance / static_cast<double>(n));
      const double dev_r = std::abs(r - sim.mean_reward);
      v.require(dev_r <= bound_r, c.name + " reward");
      if (bound_r > 0) worst = std::max(worst, dev_r / bound_r);
    }
  }
  const double secs = seconds_since(t0);
  v.require(secs < 10.0, "runtime");
  v.detail << cases.size() << " chains, worst deviation " << worst << " of the 3-sigma bound, " << secs << " s";
}

void criterion3(Verdict& v) {
  const auto u = quantify(kC);
  const auto up = quantify(kCPrime);
  const auto synth = synthesize(u, reference_model(), kFixed, ParamSpace::controller(11), SpecSet::collision_avoidance());
  const auto& k = synth.choice.candidate.values;
  const double before = until_probability(reference_chain(u, k[0], k[1]), "collision", "done");
  const double after = until_probability(reference_chain(up, k[0], k[1]), "collision", "done");
  const double before10 = until_probability(reference_chain(u, 1, 0), "collision", "done");
  const double after10 = until_probability(reference_chain(up, 1, 0), "collision", "done");
  v.require(before - after >= 0.10, "drop at the synthesized controller");
  v.require(std::abs(before10 - 0.9870) < 5e-5 && std::abs(after10 - 0.7913) < 5e-5, "drop at (1, 0)");
  v.detail << "kappa=(" << k[0] << ", " << k[1] << "): " << 100 * before << "% -> " << 100 * after
           << "%; kappa=(1, 0): " << 100 * before10 << "% -> " << 100 * after10 << "%";
}

void criterion4(Verdict& v) {
  const auto t0 = Clock::now();
  const auto u = quantify(kC);
  const SpecSet specs = SpecSet::collision_avoidance(0.9, 15.0);
  const auto r = synthesize(u, reference_model(), kFixed, ParamSpace::controller(11), specs);
  const double secs = seconds_since(t0);
  const auto& k = r.choice.candidate.values;
  v.require(k == std::vector<double>{0.2, 0.0}, "kappa");
  v.require(std::abs(r.objective_value() - 0.9938) < 5e-5, "safety");
  v.require(std::abs(r.reward_value() - 14.52) < 5e-3, "time");
  v.require(r.choice.feasible && r.objective_value() >= 0.9 && r.reward_value() <= 15.0, "bounds");

  // independent sweep: instantiate and check each candidate from scratch
  std::size_t better = 0;
  for (int a = 0; a <= 10; ++a)
    for (int b = 0; b <= 10; ++b) {
      const Dtmc chain = reference_chain(u, a / 10.0, b / 10.0);
      const double s = until_probability(chain, "collision", "done");
      const double t = expected_reward_to_absorption(chain, kTargets);
      if (s >= 0.9 && t <= 15.0 && s > r.objective_value() + 1e-12) ++better;
    }
  v.require(better == 0, "exhaustive re-check");
  v.require(secs < 5.0, "runtime");
  v.detail << r.chosen_record() << ", " << better << " better feasible candidates, " << secs << " s";
}

// Shared state of the end-to-end criteria.
struct Runs {
  ExperimentResult sa, no, random;
  double seconds = 0.0;
  fs::path sa_dir;
  ExperimentConfig sa_cfg;
  InitialSystem initial;
};

Runs run_table(const fs::path& root) {
  Runs r;
  const auto t0 = Clock::now();
  ExperimentConfig base;
  base.env = EnvMode::Uniform;
  r.initial = build_initial_system(base);
  auto run = [&](Method m, const std::string& name) {
    ExperimentConfig cfg = base;
    cfg.method = m;
    cfg.out_dir = (root / name).string();
    return std::make_pair(cfg, run_experiment(cfg, r.initial));
  };
  auto [sa_cfg, sa] = run(Method::Sadeepdecs, "sa");
  r.sa = std::move(sa);
  r.sa_cfg = sa_cfg;
  r.sa_dir = root / "sa";
  r.no = run(Method::No, "no").second;
  r.random = run(Method::Random, "random").second;
  r.seconds = seconds_since(t0);
  return r;
}

void criterion5(Verdict& v, const Runs& r) {
  const auto& sa = r.sa.metrics;
  const auto& no = r.no.metrics;
  const auto& ra = r.random.metrics;
  v.require(sa.trace_hash == no.trace_hash && no.trace_hash == ra.trace_hash, "shared trace");
  v.require(r.sa.initial_kappa == r.no.initial_kappa, "shared initial controller");
  v.require(sa.accuracy - no.accuracy >= 0.05, "SA accuracy gain");
  v.require(sa.safety >= no.safety, "SA safety");
  v.require(ra.accuracy >= 0.45 && ra.accuracy <= 0.55, "RANDOM accuracy");
  v.require(r.seconds <= 300.0, "runtime");
  v.detail << "accuracy SA " << 100 * sa.accuracy << "% NO " << 100 * no.accuracy << "% RANDOM "
           << 100 * ra.accuracy << "%; safety SA " << 100 * sa.safety << "% NO " << 100 * no.safety
           << "% RANDOM " << 100 * ra.safety << "%; " << sa.queries << " queries each, " << r.seconds << " s";
}

void criterion6(Verdict& v, const Runs& r) {
  const auto& m = r.sa.metrics;
  v.require(m.repairs_signalled >= 1, "at least one repair");
  v.require(m.unserved == 0, "unserved queries");
  v.require(m.invariant_checks >= m.runtime_steps, "invariant checked every step");
  v.detail << m.repairs_signalled << " repairs (" << m.repairs_accepted << " accepted), " << m.unserved
           << " unserved of " << m.runtime_steps << " steps, " << m.invariant_checks << " invariant checks";
}

void criterion7(Verdict& v) {
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int point = 0; point < 10; ++point) {
    MlpParams p = MlpParams::random(kDefaultWidths, rng());
    std::normal_distribution<double> jitter(0.0, 0.1);
    for (auto& layer : p.layers)
      for (double& b : layer.bias) b = jitter(rng);
    std::vector<Sample> batch(16);
    for (auto& s : batch) {
      s.x = uniform_input(rng);
      s.y = static_cast<int>(rng() % 2);
    }
    MlpParams grad = MlpParams::zeros(kDefaultWidths);
    loss_and_gradient(p, batch, &grad);
    const auto analytic = grad.flatten();
    auto flat = p.flatten();
    MlpParams probe = p;
    const double h = 1e-5;
    double diff = 0.0, norm_a = 0.0, norm_n = 0.0;
    for (std::size_t i = 0; i < flat.size(); ++i) {
      const double orig = flat[i];
      flat[i] = orig + h;
      probe.assign(flat);
      const double up = loss_and_gradient(probe, batch, nullptr);
      flat[i] = orig - h;
      probe.assign(flat);
      const double down = loss_and_gradient(probe, batch, nullptr);
      flat[i] = orig;
      const double numeric = (up - down) / (2 * h);
      diff += (numeric - analytic[i]) * (numeric - analytic[i]);
      norm_a += analytic[i] * analytic[i];
      norm_n += numeric * numeric;
    }
    const double rel = std::sqrt(diff) / std::max({std::sqrt(norm_a), std::sqrt(norm_n), 1e-12});
    worst = std::max(worst, rel);
  }
  v.require(worst <= 1e-4, "relative error");
  v.detail << "worst relative error " << worst << " over 10 points";
}

void criterion8(Verdict& v, const Runs& r, const fs::path& root) {
  ExperimentConfig again = r.sa_cfg;
  again.out_dir = (root / "sa_again").string();
  run_experiment(again, r.initial);
  ExperimentConfig seq = r.sa_cfg;
  seq.repair_mode = RepairMode::Sequential;
  seq.out_dir = (root / "sa_sequential").string();
  run_experiment(seq, r.initial);

  std::size_t compared = 0;
  for (const char* f : {"metrics.csv", "series.csv", "steps.csv", "monitor_trace.csv", "events.csv", "trace.csv"}) {
    const std::string a = read_file(r.sa_dir / f);
    v.require(a == read_file(again.out_dir + "/" + f), std::string("rerun ") + f);
    v.require(a == read_file(seq.out_dir + "/" + f), std::string("sequential ") + f);
    compared += 2;
  }

  std::size_t models = 0;
  std::vector<fs::path> files{testsupport::model_dir() / "collision.pdtmc"};
  for (const auto& e : testsupport::corpus()) files.push_back(testsupport::corpus_dir() / e.file);
  for (const auto& f : files) {
    const Pdtmc m = load_model(f.string());
    const std::string text = serialize_model(m);
    v.require(parse_model(text) == m && serialize_model(parse_model(text)) == text, "round trip " + f.filename().string());
    ++models;
  }
  v.detail << compared << " file comparisons identical (rerun and sequential repair), " << models
           << " models round-trip";
}

void criterion9(Verdict& v, const Runs& r) {
  // counterexamples: operational inputs the initial network gets wrong
  const Predictor phi0 = make_predictor(r.initial.phi);
  std::mt19937_64 rng(9);
  Dataset ce{Role::Window, {}};
  while (ce.size() < 500) {
    Sample s;
    s.x = uniform_input(rng);
    s.y = ground_truth_label(s.x);
    if (phi0(s.x) != s.y) ce.samples.push_back(s);
  }
  const auto& d = r.initial.datasets;
  const DatasetPool pool{d[0], d[1], d[2], d[3]};
  RepairConfig cfg;
  cfg.fixed = kFixed;
  const SystemState q0{r.initial.phi, r.sa.initial_kappa, 0};
  const std::uint64_t seed = 31;
  const auto out = run_repair(q0, ce, pool, cfg, seed);
  v.require(out.sampled_sizes == std::array<std::size_t, 4>{4000, 1000, 1000, 1000}, "sampled sizes");
  v.require(out.pool.train.size() == d[0].size() + out.ce_sizes[0] && out.pool.val.size() == d[1].size() + out.ce_sizes[1] &&
                out.pool.confusion.size() == d[2].size() + out.ce_sizes[2] &&
                out.pool.test.size() == d[3].size() + out.ce_sizes[3],
            "merged pool sizes");

  // the parts the repair used are a disjoint cover of the counterexamples
  const auto parts = split_counterexamples(ce, cfg.split_ratios, seed);
  std::set<std::vector<double>> seen;
  std::size_t total = 0;
  for (std::size_t k = 0; k < 4; ++k) {
    v.require(parts[k].size() == out.ce_sizes[k], "part size");
    for (const auto& s : parts[k].samples) {
      seen.insert(std::vector<double>(s.x.begin(), s.x.end()));
      ++total;
    }
  }
  v.require(total == ce.size() && seen.size() == ce.size(), "disjoint parts");
  v.detail << "|X'| = (" << out.sampled_sizes[0] << ", " << out.sampled_sizes[1] << ", " << out.sampled_sizes[2]
           << ", " << out.sampled_sizes[3] << "), CE parts (" << out.ce_sizes[0] << ", " << out.ce_sizes[1] << ", "
           << out.ce_sizes[2] << ", " << out.ce_sizes[3] << ") of " << ce.size() << ", repair "
           << (out.accepted ? "accepted" : "rejected: " + out.cause);
}

}  // namespace

int main() {
  const fs::path root = fs::temp_directory_path() / "sadeepdecs_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);

  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<void(Verdict&)>& body) {
    Verdict v;
    try {
      body(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << " [exception: " << e.what() << "]";
    }
    failures += v.pass ? 0 : 1;
    std::printf("%s %d %s: %s\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.str().c_str());
    std::fflush(stdout);
  };

  report(1, "quantification", criterion1);
  report(2, "checker vs Monte-Carlo", criterion2);
  report(3, "shift degradation", criterion3);
  report(4, "synthesis", criterion4);

  Runs runs;
  bool have_runs = true;
  try {
    runs = run_table(root);
  } catch (const std::exception& e) {
    have_runs = false;
    std::printf("experiment runs failed: %s\n", e.what());
  }
  report(5, "end-to-end adaptation", [&](Verdict& v) {
    v.require(have_runs, "runs");
    if (have_runs) criterion5(v, runs);
  });
  report(6, "availability", [&](Verdict& v) {
    v.require(have_runs, "runs");
    if (have_runs) criterion6(v, runs);
  });
  report(7, "gradient check", criterion7);
  report(8, "determinism and round trip", [&](Verdict& v) {
    v.require(have_runs, "runs");
    if (have_runs) criterion8(v, runs, root);
  });
  report(9, "dataset accounting", [&](Verdict& v) {
    v.require(have_runs, "runs");
    if (have_runs) criterion9(v, runs);
  });

  fs::remove_all(root);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
