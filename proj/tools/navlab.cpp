// navlab command line: gen-maps, run, benchmark, analyze.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "navlab/io.hpp"

using namespace navlab;

namespace {

std::string output_dir(const std::string& configured) {
  if (const char* env = std::getenv("NAVLAB_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
  return configured;
}

std::string map_stem(const std::string& dir, int i) {
  char name[32];
  std::snprintf(name, sizeof name, "map_%03d", i);
  return (std::filesystem::path(dir) / name).string();
}

int gen_maps(const std::string& spec_path, const std::string& mode, int count, std::uint64_t seed, std::string out) {
  MapSpec spec;
  if (!spec_path.empty()) {
    spec = map_spec_from_json(read_json_file(spec_path));
  } else {
    spec = mode_from_string(mode) == WorldMode::Continuous ? MapSpec::continuous_default() : MapSpec::discrete_default();
  }
  out = output_dir(out);
  for (int i = 0; i < count; ++i) {
    MapSpec s = spec;
    s.seed = derive_seed(seed, 0x6d6170, static_cast<std::uint64_t>(i));
    const GeneratedMap g = generate_map(s);
    save_generated(map_stem(out, i), g);
    std::cerr << map_stem(out, i) << ".map: " << g.map.width() << "x" << g.map.height() << ", " << g.room_count
              << " rooms, " << g.episodes.size() << " episodes\n";
  }
  return 0;
}

int run_one(const std::string& map_path, int episode, const std::string& agent_name, double noise, std::uint64_t seed,
            const std::string& priors_path, const std::string& out) {
  const GeneratedMap g = load_generated(map_path);
  if (episode < 0 || episode >= static_cast<int>(g.episodes.size())) {
    throw NavError(ErrorCode::InvalidArgument, "episode index out of range");
  }
  EpisodeConfig cfg = EpisodeConfig::for_map(g.map, g.mode);
  cfg.noise_level = noise;
  if (!priors_path.empty()) cfg.priors = priors_from_json(read_json_file(priors_path));
  const EpisodeRun run =
      run_episode(agent_from_string(agent_name), g.map, g.episodes[static_cast<std::size_t>(episode)], cfg, seed);
  const std::string text = trajectory_to_json(run.trajectory).dump() + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    write_text_file(out, text);
  }
  std::cerr << (run.evaluation.result.success ? "Success" : "Timeout") << " after " << run.evaluation.steps
            << " steps, final distance " << format_number(run.evaluation.result.final_distance) << " m";
  if (!run.diagnostic.empty()) std::cerr << " (" << run.diagnostic << ")";
  std::cerr << "\n";
  return 0;
}

int benchmark(const std::string& config_path) {
  RunConfig cfg = run_config_from_json(read_json_file(config_path));
  cfg.output = output_dir(cfg.output);
  const std::vector<GeneratedMap> maps = benchmark_maps(cfg);
  const BenchmarkResult r = run_benchmark(cfg, maps);
  write_benchmark(cfg.output, r, cfg);
  std::cout << reports_csv(r.reports);
  if (r.failures > 0) {
    std::cerr << r.failures << " episode(s) ended with an internal agent error; see episodes.csv\n";
    return 1;
  }
  return 0;
}

int analyze(const std::string& map_path, const std::vector<std::string>& trajectories, int runs, std::uint64_t seed,
            const std::string& out) {
  const GeneratedMap g = load_generated(map_path);
  const ActionSpace space = g.mode == WorldMode::Continuous ? ActionSpace::continuous() : ActionSpace::discrete();
  Json doc;
  doc["schema"] = kAnalysisSchema;
  int errors = 0;
  if (trajectories.empty()) {
    Json recs = Json::array();
    const McProfile profile = McProfile::for_world(g.map, space);
    for (std::size_t e = 0; e < g.episodes.size(); ++e) {
      const Episode& ep = g.episodes[e];
      Json rec{{"episode", e}};
      try {
        Rng rng(derive_seed(seed, 0x616d6267, e));
        rec["ambiguity"] = ambiguity_score(g.map, ep, profile, rng, runs).score;
      } catch (const NavError& err) {
        rec["ambiguity"] = nullptr;
        rec["error"] = err.what();
        ++errors;
      }
      rec["complexity"] = complexity(g.map, ep, g.mode);
      rec["optimal_steps"] = optimal_distance(g.map, ep.start.position(), ep.goal, space);
      recs.push_back(rec);
    }
    doc["episodes"] = recs;
  } else {
    Json recs = Json::array();
    const MetricsConfig mc = MetricsConfig::for_space(space, g.map.cell_size());
    for (const std::string& path : trajectories) {
      const Trajectory t = trajectory_from_json(read_json_file(path));
      const EpisodeEvaluation e = evaluate_episode(t, g.map, space, mc);
      recs.push_back({{"trajectory", path},
                      {"success", e.result.success},
                      {"steps", e.steps},
                      {"optimal_steps", e.result.optimal_length},
                      {"final_distance", e.result.final_distance},
                      {"collision_frequency", e.collision_frequency},
                      {"short_term_thrashing", e.short_term_thrashing},
                      {"long_term_thrashing", e.long_term_thrashing},
                      {"exploitation", e.exploitation ? Json(*e.exploitation) : Json(nullptr)},
                      {"spl", e.spl_term}});
    }
    doc["trajectories"] = recs;
  }
  const std::string text = doc.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    write_text_file(out, text);
  }
  return errors == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"navlab: 2D indoor navigation lab"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen-maps", "Generate maps and episodes");
  std::string spec_path, mode = "continuous", gen_out = "maps";
  int count = 1;
  std::uint64_t gen_seed = 1;
  gen->add_option("--spec", spec_path, "MapSpec JSON file");
  gen->add_option("--mode", mode, "continuous or discrete (without --spec)");
  gen->add_option("--count", count, "number of maps")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "base seed");
  gen->add_option("--out", gen_out, "output directory");

  auto* run = app.add_subcommand("run", "Run one episode and print its trajectory");
  std::string map_path, agent = "ClassicalGT", priors_path, run_out;
  int episode = 0;
  double noise = 0.0;
  std::uint64_t run_seed = 1;
  run->add_option("--map", map_path, "map file")->required();
  run->add_option("--episode", episode, "episode index");
  run->add_option("--agent", agent, "Classical, ClassicalGT, Random or Greedy");
  run->add_option("--noise", noise, "range noise level (0..1)");
  run->add_option("--seed", run_seed, "episode seed");
  run->add_option("--priors", priors_path, "action priors JSON");
  run->add_option("--out", run_out, "trajectory file (default stdout)");

  auto* bench = app.add_subcommand("benchmark", "Run a benchmark sweep");
  std::string config_path;
  bench->add_option("config", config_path, "run config JSON")->required();

  auto* an = app.add_subcommand("analyze", "Ambiguity/complexity of episodes, or metrics of trajectories");
  std::string an_map, an_out;
  std::vector<std::string> trajectories;
  int runs = 20;
  std::uint64_t an_seed = 1;
  an->add_option("--map", an_map, "map file")->required();
  an->add_option("--trajectory", trajectories, "trajectory files");
  an->add_option("--runs", runs, "Monte-Carlo runs per episode")->check(CLI::PositiveNumber);
  an->add_option("--seed", an_seed, "base seed");
  an->add_option("--out", an_out, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*gen) return gen_maps(spec_path, mode, count, gen_seed, gen_out);
    if (*run) return run_one(map_path, episode, agent, noise, run_seed, priors_path, run_out);
    if (*bench) return benchmark(config_path);
    if (*an) return analyze(an_map, trajectories, runs, an_seed, an_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
