#include "navlab/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace navlab {

namespace {

[[noreturn]] void parse_error(const std::string& what) { throw NavError(ErrorCode::ParseError, what); }

void expect_schema(const Json& j, const char* schema) {
  if (!j.is_object() || !j.contains("schema") || j["schema"] != schema) {
    parse_error(std::string("expected schema ") + schema);
  }
}

template <typename T>
T get(const Json& j, const char* key) {
  if (!j.contains(key)) parse_error(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    parse_error(std::string("bad field '") + key + "': " + e.what());
  }
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  return j.contains(key) ? get<T>(j, key) : fallback;
}

Json opt_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

template <typename F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    parse_error(std::string(what) + ": " + e.what());
  }
}

std::string opt_csv(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

}  // namespace

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_map(std::ostream& os, const GroundTruthMap& map, WorldMode mode) {
  Json header;
  header["schema"] = kMapSchema;
  header["cell_size"] = map.cell_size();
  header["mode"] = to_string(mode);
  header["width"] = map.width();
  header["height"] = map.height();
  os << header.dump() << '\n';
  for (const std::string& row : map.to_ascii()) os << row << '\n';
}

GroundTruthMap read_map(std::istream& is, WorldMode* mode) {
  std::string line;
  if (!std::getline(is, line)) parse_error("empty map file");
  Json header;
  try {
    header = Json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    parse_error(std::string("bad map header: ") + e.what());
  }
  expect_schema(header, kMapSchema);
  const double cell_size = get<double>(header, "cell_size");
  const int width = get<int>(header, "width");
  const int height = get<int>(header, "height");
  if (mode != nullptr) *mode = mode_from_string(get<std::string>(header, "mode"));
  std::vector<std::string> rows;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(line);
  }
  if (static_cast<int>(rows.size()) != height) parse_error("map height does not match header");
  for (const std::string& r : rows) {
    if (static_cast<int>(r.size()) != width) parse_error("map width does not match header");
  }
  return GroundTruthMap::from_ascii(rows, cell_size);
}

Json episodes_to_json(const GeneratedMap& g) {
  Json j;
  j["schema"] = kEpisodesSchema;
  j["mode"] = to_string(g.mode);
  j["room_count"] = g.room_count;
  Json doors = Json::array();
  for (int y = 0; y < g.doors.height(); ++y) {
    for (int x = 0; x < g.doors.width(); ++x) {
      if (g.doors[Cell{x, y}]) doors.push_back({x, y});
    }
  }
  j["doors"] = doors;
  Json eps = Json::array();
  for (const Episode& e : g.episodes) {
    eps.push_back({{"start", {{"x", e.start.x}, {"y", e.start.y}, {"heading", e.start.heading}}},
                   {"goal", {{"x", e.goal.x}, {"y", e.goal.y}}},
                   {"budget", e.budget},
                   {"success_radius", e.success_radius}});
  }
  j["episodes"] = eps;
  return j;
}

void episodes_from_json(const Json& j, GeneratedMap& g) {
  guarded("bad episodes", [&] {
    expect_schema(j, kEpisodesSchema);
    g.mode = mode_from_string(get<std::string>(j, "mode"));
    g.room_count = get_or<int>(j, "room_count", 0);
    g.doors = Grid<std::uint8_t>(g.map.width(), g.map.height(), 0);
    g.rooms = Grid<int>(g.map.width(), g.map.height(), -1);
    for (const Json& d : get_or<Json>(j, "doors", Json::array())) {
      const Cell c{d.at(0).get<int>(), d.at(1).get<int>()};
      if (!g.doors.in_bounds(c)) parse_error("door cell out of bounds");
      g.doors[c] = 1;
    }
    g.episodes.clear();
    for (const Json& e : get<Json>(j, "episodes")) {
      Episode ep;
      const Json& s = e.at("start");
      ep.start = Pose2D(get<double>(s, "x"), get<double>(s, "y"), get<double>(s, "heading"));
      const Json& goal = e.at("goal");
      ep.goal = {get<double>(goal, "x"), get<double>(goal, "y")};
      ep.budget = get_or<int>(e, "budget", 500);
      ep.success_radius = get_or<double>(e, "success_radius", 0.2);
      if (ep.budget < 1) parse_error("budget must be >= 1");
      g.episodes.push_back(ep);
    }
  });
}

void save_generated(const std::string& stem, const GeneratedMap& g) {
  std::ostringstream map_text;
  write_map(map_text, g.map, g.mode);
  write_text_file(stem + ".map", map_text.str());
  write_text_file(stem + ".episodes.json", episodes_to_json(g).dump(2) + "\n");
}

GeneratedMap load_generated(const std::string& path) {
  std::string stem = path;
  if (stem.size() > 4 && stem.compare(stem.size() - 4, 4, ".map") == 0) stem.resize(stem.size() - 4);
  std::ifstream is(stem + ".map");
  if (!is) throw NavError(ErrorCode::ParseError, "cannot open " + stem + ".map");
  GeneratedMap g;
  g.map = read_map(is, &g.mode);
  const std::string ep_path = stem + ".episodes.json";
  if (std::filesystem::exists(ep_path)) {
    episodes_from_json(read_json_file(ep_path), g);
  } else {
    g.doors = Grid<std::uint8_t>(g.map.width(), g.map.height(), 0);
    g.rooms = Grid<int>(g.map.width(), g.map.height(), -1);
  }
  return g;
}

Json priors_to_json(const ActionPriorTable& t) {
  Json j;
  j["schema"] = kPriorsSchema;
  Json entries = Json::array();
  for (const auto& [a, p] : t.entries()) {
    entries.push_back({{"action", to_string(a)},
                       {"tx", p.motion.tx},
                       {"ty", p.motion.ty},
                       {"dtheta", p.motion.dtheta},
                       {"fallback", p.fallback},
                       {"samples", p.samples}});
  }
  j["priors"] = entries;
  return j;
}

ActionPriorTable priors_from_json(const Json& j) {
  return guarded("bad priors", [&] {
    expect_schema(j, kPriorsSchema);
    ActionPriorTable t;
    for (const Json& e : get<Json>(j, "priors")) {
      t.set(action_from_string(get<std::string>(e, "action")),
            {RigidTransform2D(get<double>(e, "tx"), get<double>(e, "ty"), get<double>(e, "dtheta")),
             get_or<bool>(e, "fallback", false), get_or<std::size_t>(e, "samples", 0)});
    }
    return t;
  });
}

Json trajectory_to_json(const Trajectory& t) {
  Json j;
  j["schema"] = kTrajectorySchema;
  const Episode& e = t.episode;
  j["episode"] = {{"start", {{"x", e.start.x}, {"y", e.start.y}, {"heading", e.start.heading}}},
                  {"goal", {{"x", e.goal.x}, {"y", e.goal.y}}},
                  {"budget", e.budget},
                  {"success_radius", e.success_radius}};
  Json steps = Json::array();
  for (const StepRecord& s : t.steps) {
    Json pts = Json::array();
    for (const Vec2& p : s.observed_points) pts.push_back({p.x, p.y});
    Json step{{"action", to_string(s.action)},
              {"collided", s.collided},
              {"location", {s.location.x, s.location.y}},
              {"achieved", {s.achieved.tx, s.achieved.ty, s.achieved.dtheta}},
              {"observed", pts}};
    if (s.belief) step["belief"] = {s.belief->x, s.belief->y, s.belief->heading};
    steps.push_back(std::move(step));
  }
  j["steps"] = steps;
  j["final_location"] = {t.final_location.x, t.final_location.y};
  j["final_status"] = t.final_status == FinalStatus::Success ? "Success" : "Timeout";
  return j;
}

Trajectory trajectory_from_json(const Json& j) {
  expect_schema(j, kTrajectorySchema);
  Trajectory t;
  try {
    const Json& e = j.at("episode");
    t.episode.start = Pose2D(e.at("start").at("x").get<double>(), e.at("start").at("y").get<double>(),
                             e.at("start").at("heading").get<double>());
    t.episode.goal = {e.at("goal").at("x").get<double>(), e.at("goal").at("y").get<double>()};
    t.episode.budget = e.at("budget").get<int>();
    t.episode.success_radius = e.at("success_radius").get<double>();
    for (const Json& s : j.at("steps")) {
      StepRecord r;
      r.action = action_from_string(s.at("action").get<std::string>());
      r.collided = s.at("collided").get<bool>();
      r.location = {s.at("location").at(0).get<double>(), s.at("location").at(1).get<double>()};
      const Json& a = s.at("achieved");
      r.achieved = RigidTransform2D(a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>());
      for (const Json& p : s.at("observed")) r.observed_points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      if (s.contains("belief")) {
        const Json& b = s.at("belief");
        r.belief = Pose2D(b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>());
      }
      t.steps.push_back(std::move(r));
    }
    t.final_location = {j.at("final_location").at(0).get<double>(), j.at("final_location").at(1).get<double>()};
    const std::string status = j.at("final_status").get<std::string>();
    if (status != "Success" && status != "Timeout") parse_error("bad final_status");
    t.final_status = status == "Success" ? FinalStatus::Success : FinalStatus::Timeout;
  } catch (const nlohmann::json::exception& ex) {
    parse_error(std::string("bad trajectory: ") + ex.what());
  }
  return t;
}

void write_belief(std::ostream& grid, std::ostream& sidecar, const OccupancyBelief& belief) {
  const Grid<double>& s = belief.scores;
  for (int y = s.height() - 1; y >= 0; --y) {
    std::string row(static_cast<std::size_t>(s.width()), '0');
    for (int x = 0; x < s.width(); ++x) {
      const int q = std::clamp(static_cast<int>(std::floor(s[Cell{x, y}] * 10.0)), 0, 9);
      row[static_cast<std::size_t>(x)] = static_cast<char>('0' + q);
    }
    grid << row << '\n';
  }
  sidecar << "x,y,score\n";
  for (int y = 0; y < s.height(); ++y) {
    for (int x = 0; x < s.width(); ++x) sidecar << x << ',' << y << ',' << format_number(s[Cell{x, y}]) << '\n';
  }
}

Json map_spec_to_json(const MapSpec& s) {
  return {{"schema", kMapSpecSchema},
          {"mode", to_string(s.mode)},
          {"cell_size", s.cell_size},
          {"rooms_min", s.rooms_min},
          {"rooms_max", s.rooms_max},
          {"room_size_min", s.room_size_min},
          {"room_size_max", s.room_size_max},
          {"door_width", s.door_width},
          {"max_width", s.max_width},
          {"max_height", s.max_height},
          {"extra_door_prob", s.extra_door_prob},
          {"clutter_min", s.clutter_min},
          {"clutter_max", s.clutter_max},
          {"clutter_size_min", s.clutter_size_min},
          {"clutter_size_max", s.clutter_size_max},
          {"clearance", s.clearance},
          {"episodes", s.episodes},
          {"budget", s.budget},
          {"success_radius", s.success_radius},
          {"seed", s.seed}};
}

MapSpec map_spec_from_json(const Json& j) {
  return guarded("bad map spec", [&] {
    if (j.contains("schema")) expect_schema(j, kMapSpecSchema);
    const WorldMode mode = mode_from_string(get_or<std::string>(j, "mode", "continuous"));
    MapSpec s = mode == WorldMode::Continuous ? MapSpec::continuous_default() : MapSpec::discrete_default();
    s.cell_size = get_or(j, "cell_size", s.cell_size);
    s.rooms_min = get_or(j, "rooms_min", s.rooms_min);
    s.rooms_max = get_or(j, "rooms_max", s.rooms_max);
    s.room_size_min = get_or(j, "room_size_min", s.room_size_min);
    s.room_size_max = get_or(j, "room_size_max", s.room_size_max);
    s.door_width = get_or(j, "door_width", s.door_width);
    s.max_width = get_or(j, "max_width", s.max_width);
    s.max_height = get_or(j, "max_height", s.max_height);
    s.extra_door_prob = get_or(j, "extra_door_prob", s.extra_door_prob);
    s.clutter_min = get_or(j, "clutter_min", s.clutter_min);
    s.clutter_max = get_or(j, "clutter_max", s.clutter_max);
    s.clutter_size_min = get_or(j, "clutter_size_min", s.clutter_size_min);
    s.clutter_size_max = get_or(j, "clutter_size_max", s.clutter_size_max);
    s.clearance = get_or(j, "clearance", s.clearance);
    s.episodes = get_or(j, "episodes", s.episodes);
    s.budget = get_or(j, "budget", s.budget);
    s.success_radius = get_or(j, "success_radius", s.success_radius);
    s.seed = get_or<std::uint64_t>(j, "seed", s.seed);
    s.validate();
    return s;
  });
}

Json run_config_to_json(const RunConfig& c) {
  Json agents = Json::array();
  for (AgentKind a : c.agents) agents.push_back(to_string(a));
  return {{"schema", kRunConfigSchema},
          {"mode", to_string(c.mode)},
          {"agents", agents},
          {"map_spec", map_spec_to_json(c.map_spec)},
          {"map_count", c.map_count},
          {"map_files", c.map_files},
          {"noise_levels", c.noise_levels},
          {"seed", c.seed},
          {"training_episodes_per_map", c.training_episodes_per_map},
          {"threads", c.threads},
          {"analysis", {{"enabled", c.analysis.enabled}, {"mc_runs", c.analysis.mc_runs}}},
          {"output", c.output}};
}

RunConfig run_config_from_json(const Json& j) {
  return guarded("bad run config", [&] {
    expect_schema(j, kRunConfigSchema);
    RunConfig c;
    c.mode = mode_from_string(get_or<std::string>(j, "mode", "continuous"));
    c.map_spec = c.mode == WorldMode::Continuous ? MapSpec::continuous_default() : MapSpec::discrete_default();
    if (j.contains("agents")) {
      c.agents.clear();
      for (const Json& a : j["agents"]) c.agents.push_back(agent_from_string(a.get<std::string>()));
    } else if (c.mode == WorldMode::Discrete) {
      c.agents = {AgentKind::ClassicalGT, AgentKind::Random, AgentKind::Greedy};
    }
    if (j.contains("map_spec")) {
      Json spec = j["map_spec"];
      if (!spec.contains("mode")) spec["mode"] = to_string(c.mode);
      c.map_spec = map_spec_from_json(spec);
    }
    c.map_count = get_or(j, "map_count", c.map_count);
    c.map_files = get_or(j, "map_files", c.map_files);
    c.noise_levels = get_or(j, "noise_levels", c.noise_levels);
    c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
    c.training_episodes_per_map = get_or(j, "training_episodes_per_map", c.training_episodes_per_map);
    c.threads = get_or(j, "threads", c.threads);
    if (j.contains("analysis")) {
      c.analysis.enabled = get_or(j["analysis"], "enabled", c.analysis.enabled);
      c.analysis.mc_runs = get_or(j["analysis"], "mc_runs", c.analysis.mc_runs);
    }
    c.output = get_or(j, "output", c.output);
    c.validate();
    return c;
  });
}

Json report_to_json(const MetricsReport& r) {
  return {{"agent", r.agent},
          {"noise_level", r.noise_level},
          {"episodes", r.episodes},
          {"success_rate", r.success_rate},
          {"avg_steps", r.avg_steps},
          {"mean_final_distance", r.mean_final_distance},
          {"collision_frequency", r.collision_frequency},
          {"short_term_thrashing", r.short_term_thrashing},
          {"long_term_thrashing", r.long_term_thrashing},
          {"exploitation_median", r.exploitation_median},
          {"exploitation_mean", r.exploitation_mean},
          {"spl", r.spl}};
}

Json benchmark_to_json(const BenchmarkResult& r, const RunConfig& cfg) {
  Json j;
  j["schema"] = kReportSchema;
  j["config"] = run_config_to_json(cfg);
  j["config"].erase("output");
  Json reports = Json::array();
  for (const MetricsReport& m : r.reports) reports.push_back(report_to_json(m));
  j["reports"] = reports;
  Json corr = Json::array();
  for (const CorrelationRow& c : r.correlations) {
    corr.push_back({{"agent", to_string(c.agent)},
                    {"noise_level", c.noise_level},
                    {"samples", c.samples},
                    {"ambiguity_vs_spl", opt_number(c.ambiguity_vs_spl)},
                    {"complexity_vs_spl", opt_number(c.complexity_vs_spl)}});
  }
  j["correlations"] = corr;
  j["episodes"] = r.episodes.size();
  j["failures"] = r.failures;
  return j;
}

std::string reports_csv(const std::vector<MetricsReport>& reports) {
  std::ostringstream os;
  os << "agent,noise_level,episodes,success_rate,avg_steps,mean_final_distance,collision_frequency,"
        "short_term_thrashing,long_term_thrashing,exploitation_median,exploitation_mean,spl\n";
  for (const MetricsReport& r : reports) {
    os << r.agent << ',' << format_number(r.noise_level) << ',' << r.episodes << ',' << format_number(r.success_rate)
       << ',' << format_number(r.avg_steps) << ',' << format_number(r.mean_final_distance) << ','
       << format_number(r.collision_frequency) << ',' << format_number(r.short_term_thrashing) << ','
       << format_number(r.long_term_thrashing) << ',' << format_number(r.exploitation_median) << ','
       << format_number(r.exploitation_mean) << ',' << format_number(r.spl) << '\n';
  }
  return os.str();
}

std::string episodes_csv(const std::vector<EpisodeRecord>& records) {
  std::ostringstream os;
  os << "map,episode,agent,noise_level,success,steps,optimal_steps,final_distance,collision_frequency,"
        "short_term_thrashing,long_term_thrashing,exploitation,spl,diagnostic\n";
  for (const EpisodeRecord& r : records) {
    const EpisodeEvaluation& e = r.evaluation;
    std::string diag = r.diagnostic;
    for (char& ch : diag) {
      if (ch == ',' || ch == '\n' || ch == '"') ch = ' ';
    }
    os << r.map << ',' << r.episode << ',' << to_string(r.agent) << ',' << format_number(r.noise_level) << ','
       << (e.result.success ? 1 : 0) << ',' << e.steps << ',' << format_number(e.result.optimal_length) << ','
       << format_number(e.result.final_distance) << ',' << format_number(e.collision_frequency) << ','
       << format_number(e.short_term_thrashing) << ',' << format_number(e.long_term_thrashing) << ','
       << opt_csv(e.exploitation) << ',' << format_number(e.spl_term) << ',' << diag << '\n';
  }
  return os.str();
}

std::string correlations_csv(const std::vector<CorrelationRow>& rows) {
  std::ostringstream os;
  os << "agent,noise_level,samples,ambiguity_vs_spl,complexity_vs_spl\n";
  for (const CorrelationRow& r : rows) {
    os << to_string(r.agent) << ',' << format_number(r.noise_level) << ',' << r.samples << ','
       << opt_csv(r.ambiguity_vs_spl) << ',' << opt_csv(r.complexity_vs_spl) << '\n';
  }
  return os.str();
}

std::string difficulty_csv(const std::vector<EpisodeDifficulty>& rows) {
  std::ostringstream os;
  os << "map,episode,ambiguity,complexity,optimal_steps\n";
  for (const EpisodeDifficulty& d : rows) {
    os << d.map << ',' << d.episode << ',' << opt_csv(d.ambiguity) << ',' << d.complexity << ','
       << format_number(d.optimal_steps) << '\n';
  }
  return os.str();
}

std::string noise_curve_csv(const std::vector<MetricsReport>& reports) {
  std::ostringstream os;
  os << "agent,noise_percent,success_rate\n";
  for (const MetricsReport& r : reports) {
    os << r.agent << ',' << format_number(100.0 * r.noise_level) << ',' << format_number(r.success_rate) << '\n';
  }
  return os.str();
}

void write_benchmark(const std::string& dir, const BenchmarkResult& r, const RunConfig& cfg) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path d(dir);
  write_text_file((d / "report.json").string(), benchmark_to_json(r, cfg).dump(2) + "\n");
  write_text_file((d / "report.csv").string(), reports_csv(r.reports));
  write_text_file((d / "episodes.csv").string(), episodes_csv(r.episodes));
  write_text_file((d / "correlation.csv").string(), correlations_csv(r.correlations));
  write_text_file((d / "difficulty.csv").string(), difficulty_csv(r.difficulty));
  write_text_file((d / "noise_curve.csv").string(), noise_curve_csv(r.reports));
  write_text_file((d / "priors.json").string(), priors_to_json(r.priors).dump(2) + "\n");
}

Json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw NavError(ErrorCode::ParseError, "cannot open " + path);
  try {
    return Json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw NavError(ErrorCode::ParseError, path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw NavError(ErrorCode::InvalidArgument, "cannot write " + path);
  os << text;
}

}  // namespace navlab
