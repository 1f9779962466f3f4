#include "webtrail/cli.hpp"

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <spdlog/sinks/basic_file_sink.h>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "webtrail/agents.hpp"
#include "webtrail/config.hpp"
#include "webtrail/error.hpp"
#include "webtrail/explorer.hpp"
#include "webtrail/metrics.hpp"
#include "webtrail/refiner.hpp"
#include "webtrail/remote_oracle.hpp"
#include "webtrail/run_store.hpp"
#include "webtrail/scripted_oracle.hpp"
#include "webtrail/sft.hpp"
#include "webtrail/sim_env.hpp"
#include "webtrail/sitegraph.hpp"
#include "webtrail/webdriver_env.hpp"

namespace webtrail {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Installs a logger writing warnings to `err` and everything to the run log,
// restoring the previous default logger on destruction.
class ScopedLogger {
 public:
  ScopedLogger(std::ostream& err, const std::optional<fs::path>& log_file) : previous_(spdlog::default_logger()) {
    auto console = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
    console->set_level(spdlog::level::warn);
    std::vector<spdlog::sink_ptr> sinks{console};
    if (log_file) {
      fs::create_directories(log_file->parent_path());
      auto file = std::make_shared<spdlog::sinks::basic_file_sink_mt>(log_file->string());
      file->set_level(spdlog::level::info);
      sinks.push_back(file);
    }
    auto logger = std::make_shared<spdlog::logger>("webtrail", sinks.begin(), sinks.end());
    logger->set_level(spdlog::level::info);
    logger->flush_on(spdlog::level::info);
    spdlog::set_default_logger(logger);
  }
  ~ScopedLogger() { spdlog::set_default_logger(previous_); }
  ScopedLogger(const ScopedLogger&) = delete;
  ScopedLogger& operator=(const ScopedLogger&) = delete;

 private:
  std::shared_ptr<spdlog::logger> previous_;
};

// A flag's value is applied only when it was given on the command line.
struct FlagSet {
  std::vector<std::function<void(Settings&)>> appliers;

  template <typename T>
  CLI::Option* add(CLI::App* app, const std::string& name, T Settings::*field, const std::string& help) {
    auto holder = std::make_shared<T>();
    CLI::Option* opt = app->add_option(name, *holder, help);
    appliers.push_back([holder, opt, field](Settings& s) {
      if (opt->count() > 0) s.*field = *holder;
    });
    return opt;
  }

  Settings resolve(const std::string& config_file) const {
    Settings s;
    apply_env(s, process_env());
    if (!config_file.empty()) apply_config_file(s, config_file);
    for (const auto& apply : appliers) apply(s);
    validate_settings(s);
    return s;
  }
};

fs::path resolve_site_file(const std::string& site) {
  const fs::path given(site);
  if (fs::is_regular_file(given)) return given;
  fs::path with_ext = given;
  with_ext += ".json";
  if (fs::is_regular_file(with_ext)) return with_ext;
  throw Error(ErrorCode::environment_unreachable, "site file not found: " + site);
}

std::string site_label_for_url(const std::string& url) {
  std::string host = url;
  if (auto scheme = host.find("://"); scheme != std::string::npos) host = host.substr(scheme + 3);
  if (auto slash = host.find('/'); slash != std::string::npos) host = host.substr(0, slash);
  for (char& c : host) {
    if (!std::isalnum(static_cast<unsigned char>(c))) c = '-';
  }
  return host.empty() ? "site" : host;
}

ChatEndpoint endpoint(const std::string& url, const std::string& model, const std::string& key,
                      const std::string& what) {
  if (url.empty()) throw Error(ErrorCode::invalid_argument, what + " endpoint URL is not configured");
  return ChatEndpoint{url, model, key};
}

std::shared_ptr<const SiteGraph> load_graph(const json& meta) {
  return std::make_shared<const SiteGraph>(
      load_sitegraph_file(meta.at("site_file").get<std::string>(), meta.at("dynamic_items").get<int>()));
}

struct Backend {
  std::shared_ptr<const SiteGraph> graph;  // simulator runs only
  std::unique_ptr<Environment> env;
};

Backend open_backend(const json& meta, const std::shared_ptr<ScreenshotStore>& images) {
  Backend b;
  if (meta.at("backend") == "sim") {
    b.graph = load_graph(meta);
    b.env = std::make_unique<SimEnvironment>(b.graph, images);
  } else {
    WebDriverConfig cfg;
    cfg.endpoint = meta.at("webdriver_url").get<std::string>();
    cfg.seed_url = meta.at("seed_url").get<std::string>();
    b.env = std::make_unique<WebDriverEnvironment>(cfg, images);
  }
  return b;
}

void print_state_summary(std::ostream& out, const ExplorationState& state, const fs::path& dir) {
  std::size_t info = 0;
  for (const auto& t : state.tuples) info += t.kind == TupleKind::info_seeking ? 1 : 0;
  out << "pages explored: " << state.explored.size() << "\n"
      << "tuples: " << state.tuples.size() << " (" << state.tuples.size() - info << " action-oriented, " << info
      << " info-seeking)\n"
      << "tasks executed: " << state.tasks.size() << "\n"
      << "run directory: " << dir.string() << "\n";
}

std::vector<TaskTuple> read_tuples(const RunStore& run, const std::string& name) {
  std::vector<TaskTuple> tuples;
  for (const auto& record : run.read_jsonl(name)) {
    try {
      tuples.push_back(record.get<TaskTuple>());
    } catch (const json::exception& e) {
      throw Error(ErrorCode::parse_error, name + ": " + e.what());
    }
  }
  return tuples;
}

// ---------------------------------------------------------------------------

int cmd_explore(const std::string& site, const Settings& s, const std::string& run_dir_flag, bool resume,
                std::ostream& out, std::ostream& err) {
  json meta;
  std::string label;
  if (s.backend == "sim") {
    const fs::path file = resolve_site_file(site);
    label = file.stem().string();
    meta["site_file"] = file.string();
  } else {
    meta["seed_url"] = s.seed_url.empty() ? site : s.seed_url;
    meta["webdriver_url"] = s.webdriver_url;
    label = site_label_for_url(meta["seed_url"]);
  }
  if (!s.site_name.empty()) label = s.site_name;
  if (s.oracle == "scripted" && s.backend != "sim")
    throw Error(ErrorCode::invalid_argument, "the scripted oracle needs the sim backend");

  meta["site"] = label;
  meta["backend"] = s.backend;
  meta["oracle"] = s.oracle;
  meta["budget"] = s.budget;
  meta["dynamic_cap"] = s.dynamic_cap;
  meta["menu_depth"] = s.menu_depth;
  meta["seed"] = s.seed;
  meta["dynamic_items"] = s.dynamic_items;

  const fs::path dir = run_dir_flag.empty() ? fs::path("runs") / (label + "-seed" + std::to_string(s.seed))
                                            : fs::path(run_dir_flag);
  fs::create_directories(dir);
  RunLock lock(dir);
  const RunStore run(dir);

  std::optional<ExplorationState> previous;
  if (run.exists(run_files::kState)) {
    const json recorded = run.read_json(run_files::kRun);
    if (recorded != meta)
      throw Error(ErrorCode::invalid_argument,
                  "run directory " + dir.string() + " holds a run with different settings");
    previous = Explorer::load(run);
    if (previous->done) {
      out << "exploration already complete\n";
      print_state_summary(out, *previous, dir);
      return 0;
    }
    if (!resume)
      throw Error(ErrorCode::invalid_argument,
                  "run directory " + dir.string() + " holds an unfinished run; pass --resume to continue it");
  }

  ScopedLogger logging(err, dir / run_files::kLog);
  run.write_json(run_files::kRun, meta);

  auto images = std::make_shared<ScreenshotStore>(dir);
  Backend backend = open_backend(meta, images);
  std::unique_ptr<Oracle> oracle;
  if (s.oracle == "scripted") {
    oracle = std::make_unique<ScriptedOracle>(backend.graph);
  } else {
    RemoteOracleConfig cfg;
    cfg.endpoint = endpoint(s.oracle_url, s.oracle_model, s.oracle_key, "oracle");
    cfg.cache_dir = dir / run_files::kOracleCache;
    cfg.max_in_flight = s.oracle_max_in_flight;
    oracle = std::make_unique<RemoteOracle>(cfg, images);
  }

  ExplorerConfig cfg{s.budget, s.dynamic_cap, s.menu_depth, s.seed};
  Explorer explorer(*backend.env, *oracle, cfg, &run);
  spdlog::info("exploring {} (budget {}, seed {})", label, s.budget, s.seed);
  const ExplorationState state = previous ? explorer.resume(*previous) : explorer.explore();
  print_state_summary(out, state, dir);
  return 0;
}

int cmd_refine(const fs::path& dir, const Settings& s, std::ostream& out, std::ostream& err) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::missing_run_data, "no run directory at " + dir.string());
  RunLock lock(dir);
  const RunStore run(dir);
  const json meta = run.read_json(run_files::kRun);
  const std::vector<TaskTuple> tuples = read_tuples(run, run_files::kExploration);

  const RefinementConfig cfg{s.max_steps, s.hints == "on" ? HintMode::full_trace : HintMode::none, s.parallel};
  json manifest{{"hints", std::string(to_string(cfg.hints))},
                {"max_steps", cfg.max_steps},
                {"agent", s.agent},
                {"input_tuples", tuples.size()}};
  if (run.exists(run_files::kRefineManifest) && run.exists(run_files::kRefined)) {
    json recorded = run.read_json(run_files::kRefineManifest);
    recorded.erase("refined");
    recorded.erase("discarded");
    if (recorded == manifest) {
      out << "refinement already complete\n";
      return 0;
    }
  }

  ScopedLogger logging(err, dir / run_files::kLog);
  auto images = std::make_shared<ScreenshotStore>(dir);
  Backend backend = open_backend(meta, images);

  AgentFactory factory;
  if (s.agent == "optimal") {
    if (!backend.graph) throw Error(ErrorCode::invalid_argument, "the optimal agent needs a sim run");
    factory = [graph = backend.graph, max = s.max_steps] { return std::make_unique<OptimalSimAgent>(graph, max); };
  } else if (s.agent == "never-finish") {
    factory = [] { return std::make_unique<NeverFinishingAgent>(); };
  } else {
    const ChatEndpoint ep = endpoint(s.agent_url, s.agent_model, s.agent_key, "agent");
    factory = [ep, images] { return std::make_unique<RemoteAgent>(ep, images); };
  }

  spdlog::info("refining {} tuples (hints {}, max steps {})", tuples.size(), to_string(cfg.hints), cfg.max_steps);
  const std::vector<RefineOutcome> outcomes = refine_all(*backend.env, factory, tuples, cfg);

  std::vector<json> refined;
  std::vector<json> discards;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const RefineOutcome& o = outcomes[i];
    if (o.refined) {
      refined.push_back(*o.refined);
    } else {
      discards.push_back({{"index", i},
                          {"description", tuples[i].description},
                          {"reason", o.discard_reason},
                          {"steps", o.attempted.size()}});
    }
  }
  run.write_jsonl(run_files::kRefined, refined);
  run.write_jsonl(run_files::kDiscards, discards);
  manifest["refined"] = refined.size();
  manifest["discarded"] = discards.size();
  run.write_json(run_files::kRefineManifest, manifest);

  out << "refined: " << refined.size() << "\n"
      << "discarded: " << discards.size() << "\n"
      << "hints: " << to_string(cfg.hints) << "\n";
  return 0;
}

int cmd_export(const fs::path& dir, std::ostream& out) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::missing_run_data, "no run directory at " + dir.string());
  RunLock lock(dir);
  const RunStore run(dir);
  const json meta = run.read_json(run_files::kRun);
  if (!run.exists(run_files::kRefined))
    throw Error(ErrorCode::unrefined_tuple, "run " + dir.string() + " has not been refined; run `refine` first");
  const DatasetManifest manifest =
      export_dataset(run, meta.at("site").get<std::string>(), read_tuples(run, run_files::kRefined));
  out << "records: " << manifest.total_records() << "\n"
      << "dataset: " << run.path(run_files::kDataset).string() << "\n";
  return 0;
}

int cmd_report(const fs::path& dir, const std::string& site_file, const Settings& s, std::ostream& out) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::missing_run_data, "no run directory at " + dir.string());
  RunLock lock(dir);
  const RunStore run(dir);
  const json meta = run.read_json(run_files::kRun);

  CoverageReport report;
  if (!site_file.empty() || meta.value("backend", std::string()) == "sim") {
    const fs::path file = site_file.empty() ? fs::path(meta.at("site_file").get<std::string>())
                                            : resolve_site_file(site_file);
    report = coverage_report(run, load_sitegraph_file(file, meta.value("dynamic_items", 3)));
  } else {
    const ExplorationState state = Explorer::load(run);
    report.pages_explored = state.explored.size();
    report.tuples_by_kind = {{"action_oriented", 0}, {"info_seeking", 0}};
    for (const auto& t : state.tuples) ++report.tuples_by_kind[std::string(to_string(t.kind))];
    if (run.exists(run_files::kRefined)) report.refined = run.read_jsonl(run_files::kRefined).size();
    if (run.exists(run_files::kDiscards)) report.discarded = run.read_jsonl(run_files::kDiscards).size();
  }

  const std::string source = run.exists(run_files::kRefined) ? run_files::kRefined : run_files::kExploration;
  std::vector<std::string> titles;
  for (const auto& t : read_tuples(run, source)) titles.push_back(t.description);
  if (titles.size() >= 2) {
    std::unique_ptr<Embedder> embedder;
    if (s.embedder == "hashing") {
      embedder = std::make_unique<HashingEmbedder>();
    } else {
      embedder = std::make_unique<RemoteEmbedder>(endpoint(s.embedder_url, s.embedder_model, "", "embedder"));
    }
    report.diversity = diversity_score(titles, *embedder);
  }

  json j = report;
  j["embedder"] = s.embedder;
  j["titles_from"] = source;
  run.write_json("report.json", j);
  const std::string table = format_report_table(report);
  run.write_atomic("report.txt", table);
  out << table;
  return 0;
}

int cmd_merge(const fs::path& out_dir, const std::vector<std::string>& run_dirs, std::ostream& out) {
  if (run_dirs.empty()) throw Error(ErrorCode::invalid_argument, "merge needs at least one run directory");
  std::vector<RunStore> runs;
  for (const auto& d : run_dirs) {
    if (!fs::is_directory(d)) throw Error(ErrorCode::missing_run_data, "no run directory at " + d);
    runs.emplace_back(d);
  }
  fs::create_directories(out_dir);
  RunLock lock(out_dir);
  const DatasetManifest manifest = merge_datasets(runs, RunStore(out_dir));
  for (const auto& [site, n] : manifest.records_per_site) out << site << ": " << n << " records\n";
  out << "total: " << manifest.total_records() << " records\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Explore websites, synthesize task trajectories and export fine-tuning data."};
  app.name("webtrail");
  app.require_subcommand(1);

  std::string config_file;
  app.add_option("--config", config_file, "JSON config file with environment/oracle/refiner/export sections");

  FlagSet explore_flags;
  std::string site;
  std::string run_dir;
  bool resume = false;
  CLI::App* explore = app.add_subcommand("explore", "Explore a site and collect task tuples");
  explore->add_option("site", site, "site-graph file (sim) or seed URL (live)")->required();
  explore_flags.add(explore, "--budget", &Settings::budget, "maximum number of task tuples");
  explore_flags.add(explore, "--dynamic-cap", &Settings::dynamic_cap, "dynamic tasks sampled per group");
  explore_flags.add(explore, "--menu-depth", &Settings::menu_depth, "maximum nested menu depth");
  explore_flags.add(explore, "--seed", &Settings::seed, "sampling seed");
  explore_flags.add(explore, "--backend", &Settings::backend, "sim or live");
  explore_flags.add(explore, "--oracle", &Settings::oracle, "scripted or remote");
  explore_flags.add(explore, "--dynamic-items", &Settings::dynamic_items, "items per dynamic template (sim)");
  explore_flags.add(explore, "--webdriver", &Settings::webdriver_url, "remote automation endpoint (live)");
  explore_flags.add(explore, "--site-name", &Settings::site_name, "label used for the run and dataset");
  explore->add_option("--run-dir", run_dir, "run directory (default runs/<site>-seed<seed>)");
  explore->add_flag("--resume", resume, "continue an interrupted run");

  FlagSet refine_flags;
  std::string refine_dir;
  CLI::App* refine_cmd = app.add_subcommand("refine", "Re-execute tuples with an agent and keep completed ones");
  refine_cmd->add_option("run_dir", refine_dir, "run directory")->required();
  refine_flags.add(refine_cmd, "--max-steps", &Settings::max_steps, "step cap per trajectory");
  refine_flags.add(refine_cmd, "--hints", &Settings::hints, "on or off");
  refine_flags.add(refine_cmd, "--parallel", &Settings::parallel, "concurrent refinement sessions");
  refine_flags.add(refine_cmd, "--agent", &Settings::agent, "optimal, never-finish or remote");

  std::string export_dir;
  CLI::App* export_cmd = app.add_subcommand("export", "Write the fine-tuning dataset of a refined run");
  export_cmd->add_option("run_dir", export_dir, "run directory")->required();

  FlagSet report_flags;
  std::string report_dir;
  std::string report_site;
  CLI::App* report_cmd = app.add_subcommand("report", "Coverage and diversity report");
  report_cmd->add_option("run_dir", report_dir, "run directory")->required();
  report_cmd->add_option("site_file", report_site, "site-graph file (defaults to the one recorded in the run)");
  report_flags.add(report_cmd, "--embedder", &Settings::embedder, "hashing or remote");

  std::string merge_out;
  std::vector<std::string> merge_runs;
  CLI::App* merge_cmd = app.add_subcommand("merge", "Concatenate the datasets of several runs");
  merge_cmd->add_option("out_dir", merge_out, "output directory")->required();
  merge_cmd->add_option("run_dirs", merge_runs, "run directories")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*explore) return cmd_explore(site, explore_flags.resolve(config_file), run_dir, resume, out, err);
    if (*refine_cmd) return cmd_refine(refine_dir, refine_flags.resolve(config_file), out, err);
    if (*export_cmd) return cmd_export(export_dir, out);
    if (*report_cmd) return cmd_report(report_dir, report_site, report_flags.resolve(config_file), out);
    if (*merge_cmd) return cmd_merge(merge_out, merge_runs, out);
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace webtrail
