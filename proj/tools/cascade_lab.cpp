#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "cascade/generators.hpp"
#include "cascade/studies.hpp"

using namespace cascade;

namespace {

struct Common {
  std::string spec_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::size_t> jobs;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--spec", c.spec_path, "Experiment spec (JSON)")->required()->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "Override the base seed");
  app->add_option("--out", c.out, "Output directory");
  app->add_option("--jobs", c.jobs, "Worker threads for replications");
}

int execute(const Common& c, const std::optional<std::string>& study) {
  ExperimentSpec spec = load_experiment_spec(c.spec_path);
  if (study) spec.study = *study == "regret" ? "regret_scaling" : *study;
  if (c.seed) spec.seed = *c.seed;
  if (!c.out.empty()) spec.out = c.out;
  if (c.jobs) spec.jobs = *c.jobs;
  const StudySummary summary = run_study(spec);
  std::cout << summary.to_json().dump(2) << '\n';
  if (!summary.errors.empty()) return 2;
  return summary.passed ? 0 : 1;
}

std::vector<NodeId> parse_seed_list(const std::string& s) {
  std::vector<NodeId> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(static_cast<NodeId>(std::stoul(item)));
  return out;
}

Instance instance_from(const std::string& arg) {
  if (arg == "fig1") return fig1_instance();
  return load_instance(arg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online influence maximization experiments under node-level feedback"};
  app.require_subcommand(1);

  Common run_opts;
  auto* run = app.add_subcommand("run", "Run the study named in a spec (default single_run)");
  add_common(run, run_opts);

  Common study_opts;
  std::string study_kind;
  auto* study = app.add_subcommand("study", "Run a replicated study");
  study->add_option("kind", study_kind, "coverage | rho | regret | censoring")
      ->required()
      ->check(CLI::IsMember({"coverage", "rho", "regret", "regret_scaling", "censoring"}));
  add_common(study, study_opts);

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check an instance file against the model assumptions");
  validate->add_option("instance", validate_path, "Instance JSON or 'fig1'")->required();

  std::string trace_path, trace_seeds = "0";
  std::uint64_t trace_seed = 0;
  auto* trace = app.add_subcommand("trace", "Simulate one cascade and print its observations as JSON lines");
  trace->add_option("instance", trace_path, "Instance JSON or 'fig1'")->required();
  trace->add_option("--seeds", trace_seeds, "Comma-separated seed nodes");
  trace->add_option("--seed", trace_seed, "Cascade RNG seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return execute(run_opts, std::nullopt);
    if (*study) return execute(study_opts, study_kind);
    if (*validate) {
      const Instance inst = instance_from(validate_path);
      const InstanceReport r = validate_instance(inst.graph, inst.features, inst.theta);
      nlohmann::json j{{"instance", inst.name},
                       {"nodes", inst.graph.node_count()},
                       {"edges", inst.graph.edge_count()},
                       {"dimension", inst.features.dimension()},
                       {"exact_subset_check", r.exact_subset_check},
                       {"max_subset_norm", r.max_subset_norm},
                       {"p_min", r.p_min},
                       {"R", r.R},
                       {"D", r.D},
                       {"warnings", r.warnings}};
      std::cout << j.dump(2) << '\n';
      return 0;
    }
    if (*trace) {
      const Instance inst = instance_from(trace_path);
      const auto seeds = parse_seed_list(trace_seeds);
      const CascadeTrace t = simulate_cascade(inst.graph, inst.features, inst.theta, seeds, trace_seed);
      write_trace_jsonl(std::cout, t);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "cascade-lab: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
