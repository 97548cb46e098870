// sadeepdecs command-line driver.
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sadeepdecs/harness.hpp"
#include "sadeepdecs/pdtmc.hpp"
#include "sadeepdecs/pmc.hpp"
#include "sadeepdecs/simenv.hpp"
#include "sadeepdecs/synthesis.hpp"
#include "sadeepdecs/text_io.hpp"
#include "sadeepdecs/uq.hpp"

using namespace sadeepdecs;

namespace {

Valuation fixed_params(double p_collider, double p_occ) {
  return {{"p_collider", p_collider}, {"p_occ", p_occ}};
}

std::vector<double> parse_params(const std::string& text) {
  std::vector<double> out;
  for (const auto& part : split(text, ',')) out.push_back(parse_double(trim(part)));
  return out;
}

struct Common {
  std::string model;
  std::string confusion;
  double p_collider = 0.8;
  double p_occ = 0.25;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--model", c.model, "pDTMC model file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--confusion", c.confusion, "confusion matrix CSV (rows: truth)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--p-collider", c.p_collider, "collider probability")->capture_default_str();
  cmd->add_option("--p-occ", c.p_occ, "occupancy probability")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-adaptive perception/controller runtime"};
  app.require_subcommand(1);

  Common synth_opts;
  std::size_t grid = 11;
  double time_bound = 15.0, safety_bound = 0.9;
  unsigned workers = 1;
  std::string synth_out, table_out;
  auto* synth = app.add_subcommand("synthesize", "grid-search controller parameters");
  add_common(synth, synth_opts);
  synth->add_option("--grid", grid, "points per controller dimension")->capture_default_str();
  synth->add_option("--time-bound", time_bound)->capture_default_str();
  synth->add_option("--safety-bound", safety_bound)->capture_default_str();
  synth->add_option("--workers", workers, "model-checking threads")->capture_default_str();
  synth->add_option("--out", synth_out, "result JSON");
  synth->add_option("--table", table_out, "full QR table CSV");

  Common check_opts;
  std::string params;
  auto* check = app.add_subcommand("check", "model-check one controller setting");
  add_common(check, check_opts);
  check->add_option("--params", params, "c1,c2")->required();

  std::string method = "sa", env = "us", out_dir, config_path, trace_path, mode;
  std::size_t steps = 0;
  std::uint64_t seed = 0;
  auto* sim = app.add_subcommand("simulate", "run one experiment");
  sim->add_option("--method", method, "sa|no|random")->capture_default_str();
  sim->add_option("--env", env, "us|rw")->capture_default_str();
  auto* steps_opt = sim->add_option("--steps", steps, "perception queries");
  auto* seed_opt = sim->add_option("--seed", seed, "master seed");
  sim->add_option("--out", out_dir, "output directory")->required();
  sim->add_option("--config", config_path, "JSON config")->check(CLI::ExistingFile);
  sim->add_option("--trace", trace_path, "replay a benchmark trace CSV")->check(CLI::ExistingFile);
  sim->add_option("--repair-mode", mode, "threaded|sequential");

  double target = 0.25;
  std::size_t samples = 20000;
  auto* calib = app.add_subcommand("calibrate-oracle", "fit the collision radius to a positive rate");
  calib->add_option("--target", target)->capture_default_str();
  calib->add_option("--samples", samples)->capture_default_str();

  std::vector<std::string> dirs;
  std::string summary_csv;
  auto* summ = app.add_subcommand("summarize", "compare completed runs");
  summ->add_option("dirs", dirs, "run directories")->required();
  summ->add_option("--csv", summary_csv, "also write the table as CSV");

  std::string model_out;
  auto* exp = app.add_subcommand("export-model", "write the reference model");
  exp->add_option("--out", model_out, "output file (stdout if omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      const Pdtmc model = load_model(synth_opts.model);
      const UncertaintyVector u = quantify(load_confusion_csv(synth_opts.confusion));
      const auto result = synthesize(u, model, fixed_params(synth_opts.p_collider, synth_opts.p_occ),
                                     ParamSpace::controller(grid),
                                     SpecSet::collision_avoidance(safety_bound, time_bound), workers);
      std::cout << result.chosen_record() << '\n';
      if (!table_out.empty()) write_file(table_out, result.report_csv());
      if (!synth_out.empty()) {
        nlohmann::json j;
        for (std::size_t i = 0; i < result.grid.names.size(); ++i)
          j["kappa"][result.grid.names[i]] = result.choice.candidate.values[i];
        j["safety"] = result.objective_value();
        j["time"] = result.reward_value();
        j["feasible"] = result.choice.feasible;
        j["u"] = std::vector<double>(u.rates().begin(), u.rates().end());
        j["grid"] = grid;
        write_file(synth_out, j.dump(2) + "\n");
      }
      return result.choice.feasible ? 0 : 2;
    }
    if (*check) {
      const Pdtmc model = load_model(check_opts.model);
      const UncertaintyVector u = quantify(load_confusion_csv(check_opts.confusion));
      const auto c = parse_params(params);
      if (c.size() != 2) throw std::invalid_argument("--params expects c1,c2");
      Valuation v = fixed_params(check_opts.p_collider, check_opts.p_occ);
      for (const auto& [k, x] : u.as_valuation()) v[k] = x;
      v["c1"] = c[0];
      v["c2"] = c[1];
      const Dtmc chain = instantiate(model, v);
      const std::vector<std::string> targets{"done", "collision"};
      std::cout << "safety " << format_double(until_probability(chain, "collision", "done")) << '\n'
                << "time " << format_double(expected_reward_to_absorption(chain, targets)) << '\n';
      return 0;
    }
    if (*sim) {
      ExperimentConfig cfg;
      if (!config_path.empty()) cfg = config_from_json(read_file(config_path));
      cfg.method = method_from_string(method);
      cfg.env = env_from_string(env);
      if (*steps_opt) cfg.steps = steps;
      if (*seed_opt) cfg.seed = seed;
      if (!trace_path.empty()) cfg.trace_path = trace_path;
      if (mode == "sequential") cfg.repair_mode = RepairMode::Sequential;
      else if (mode == "threaded") cfg.repair_mode = RepairMode::Threaded;
      else if (!mode.empty()) throw std::invalid_argument("--repair-mode must be threaded or sequential");
      cfg.out_dir = out_dir;
      const auto result = run_experiment(cfg);
      const auto& m = result.metrics;
      std::printf("%s/%s accuracy=%.4f safety=%.4f time=%.3f repairs=%zu/%zu unserved=%zu\n",
                  std::string(to_string(cfg.method)).c_str(), std::string(to_string(cfg.env)).c_str(),
                  m.accuracy, m.safety, m.mean_time, m.repairs_accepted, m.repairs_signalled, m.unserved);
      return 0;
    }
    if (*calib) {
      const auto c = calibrate_radius(target, OracleConfig{}, samples);
      std::cout << "radius " << format_double(c.radius) << "\nrate " << format_double(c.rate) << '\n';
      return 0;
    }
    if (*summ) {
      std::vector<std::filesystem::path> paths(dirs.begin(), dirs.end());
      const Summary s = summarize(paths);
      std::cout << s.to_text();
      if (!summary_csv.empty()) write_file(summary_csv, s.to_csv());
      return 0;
    }
    if (*exp) {
      const std::string text = serialize_model(reference_model());
      if (model_out.empty()) std::cout << text;
      else write_file(model_out, text);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
