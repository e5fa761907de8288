#include "swiss/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "swiss/checkpoint.hpp"
#include "swiss/config_io.hpp"
#include "swiss/error.hpp"
#include "swiss/metrics_io.hpp"
#include "swiss/pipeline.hpp"
#include "swiss/scaffolding.hpp"

namespace swiss::cli {

namespace fs = std::filesystem;
using nlohmann::json;

CliConfig cli_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  json experiment = j;
  CliConfig c;
  if (auto it = j.find("dataset"); it != j.end()) {
    c.dataset = synthetic_spec_from_json(*it);
    experiment.erase("dataset");
  }
  if (auto it = j.find("output_dir"); it != j.end()) {
    if (!it->is_string()) throw ConfigError("invalid value for key 'output_dir'");
    c.output_dir = it->get<std::string>();
    experiment.erase("output_dir");
  }
  c.experiment = experiment_config_from_json(experiment);
  return c;
}

std::string task_slug(const std::string& source, const std::string& target) {
  return source + "_to_" + target;
}

namespace {

fs::path resolve_out(const std::string& flag, const CliConfig& config) {
  if (!flag.empty()) return flag;
  if (config.output_dir) return *config.output_dir;
  throw ConfigError("no output directory: pass --out or set 'output_dir'");
}

Domain load_domain(const std::string& path) {
  if (!fs::exists(path)) throw InvalidInputError("input file '" + path + "' does not exist");
  return load_csv(path);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InvalidInputError("cannot create directory '" + dir.string() + "': " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInputError("cannot open '" + path.string() + "' for writing");
  out << text;
}

// Metrics JSON, loss CSV and checkpoint for one finished run.
void write_run(const fs::path& dir, const std::string& stem, const ExperimentConfig& config,
               const RunInfo& info, const SingleTargetResult& run) {
  write_metrics_json(dir / (stem + ".metrics.json"), metrics_to_json(config, info, run.metrics));
  write_loss_csv(dir / (stem + ".losses.csv"), run.metrics);
  Checkpoint ckpt;
  ckpt.meta["task"] = info.task;
  ckpt.meta["method"] = info.method;
  ckpt.meta["seed"] = std::to_string(info.seed);
  store_network(ckpt, config.network, run.params);
  store_repsets(ckpt, run.strong, run.weak, run.pseudo_strong);
  ckpt.save(dir / (stem + ".checkpoint.txt"));
}

std::string format_accuracy(const std::optional<double>& acc) {
  if (!acc) return "n/a (unlabeled target)";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *acc);
  return buf;
}

int cmd_generate(const std::string& spec_path, const std::string& out_flag, std::ostream& out) {
  const json j = read_json_file(spec_path);
  SyntheticSpec spec;
  std::optional<std::string> output_dir;
  if (j.is_object() && j.contains("dataset")) {
    CliConfig c = cli_config_from_json(j);
    spec = *c.dataset;
    output_dir = c.output_dir;
  } else {
    spec = synthetic_spec_from_json(j);
  }
  const fs::path dir = !out_flag.empty() ? fs::path(out_flag)
                       : output_dir    ? fs::path(*output_dir)
                                       : throw ConfigError("no output directory: pass --out");
  ensure_dir(dir);
  const auto domains = generate(spec);
  json manifest{{"spec", to_json(spec)}, {"domains", json::array()}};
  for (const auto& d : domains) {
    const std::string file = d.name + ".csv";
    save_csv(d, dir / file);
    manifest["domains"].push_back({{"name", d.name}, {"file", file}, {"rows", d.size()}});
    out << "wrote " << (dir / file).string() << " (" << d.size() << " rows)\n";
  }
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  return kExitOk;
}

int cmd_train_single(const std::string& config_path, const std::string& source_path,
                     const std::string& target_path, const std::string& out_flag, std::ostream& out) {
  const CliConfig cfg = cli_config_from_json(read_json_file(config_path));
  const Domain source = load_domain(source_path);
  const Domain target = load_domain(target_path);
  const fs::path dir = resolve_out(out_flag, cfg);
  ensure_dir(dir);

  const std::string task = source.name + "->" + target.name;
  double sum = 0.0;
  std::size_t counted = 0;
  json timing = json::array();
  for (std::size_t r = 0; r < cfg.experiment.num_runs; ++r) {
    ExperimentConfig run_config = cfg.experiment;
    run_config.seed = cfg.experiment.seed + r;
    const SingleTargetResult result = train_single_target(run_config, source, target);
    const ExperimentConfig echoed =
        run_config.resolved(source.input_dim(), run_config.network.num_classes
                                                    ? run_config.network.num_classes
                                                    : source.num_classes());
    const std::string stem = task_slug(source.name, target.name) + "_seed" + std::to_string(run_config.seed);
    write_run(dir, stem, echoed, {task, "swiss_single", run_config.seed}, result);
    timing.push_back({{"seed", run_config.seed}, {"wall_clock_seconds", result.metrics.wall_clock_seconds}});
    out << task << " seed " << run_config.seed << ": final accuracy "
        << format_accuracy(result.metrics.final_accuracy) << "\n";
    if (result.metrics.final_accuracy) {
      sum += *result.metrics.final_accuracy;
      ++counted;
    }
  }
  write_text(dir / "timing.json", timing.dump(2) + "\n");
  if (counted) out << task << " mean over " << counted << " runs: " << format_accuracy(sum / counted) << "\n";
  return kExitOk;
}

int cmd_train_multi(const std::string& config_path, const std::string& source_path,
                    const std::vector<std::string>& target_paths, const std::string& out_flag,
                    std::size_t jobs, std::ostream& out) {
  const CliConfig cfg = cli_config_from_json(read_json_file(config_path));
  const Domain source = load_domain(source_path);
  std::vector<Domain> targets;
  for (const auto& p : target_paths) targets.push_back(load_domain(p));
  const fs::path dir = resolve_out(out_flag, cfg);
  ensure_dir(dir);

  std::vector<std::string> names{source.name};
  for (const auto& t : targets) names.push_back(t.name);

  json timing = json::array();
  for (std::size_t r = 0; r < cfg.experiment.num_runs; ++r) {
    ExperimentConfig run_config = cfg.experiment;
    run_config.seed = cfg.experiment.seed + r;
    const MultiTargetResult result = train_multi_target(run_config, source, targets, jobs);
    const ExperimentConfig echoed = run_config.resolved(
        source.input_dim(),
        run_config.network.num_classes ? run_config.network.num_classes : source.num_classes());
    const std::string seed_tag = "_seed" + std::to_string(run_config.seed);

    for (std::size_t t = 0; t < targets.size(); ++t) {
      const std::string task = source.name + "->" + targets[t].name;
      const std::string slug = task_slug(source.name, targets[t].name);
      write_run(dir, slug + "_single" + seed_tag, echoed, {task, "swiss_single", run_config.seed},
                result.part1[t]);
      ExperimentConfig part3 = echoed;
      part3.seed = echoed.seed + echoed.part3_seed_offset;
      write_run(dir, slug + "_multi" + seed_tag, part3, {task, "swiss_multi", part3.seed}, result.part3[t]);
      timing.push_back({{"task", task},
                        {"seed", run_config.seed},
                        {"part1_seconds", result.part1[t].metrics.wall_clock_seconds},
                        {"part3_seconds", result.part3[t].metrics.wall_clock_seconds}});
      out << task << " seed " << run_config.seed << ": single "
          << format_accuracy(result.part1[t].metrics.final_accuracy) << ", multi "
          << format_accuracy(result.part3[t].metrics.final_accuracy) << "\n";
    }

    write_text(dir / ("distance_graph" + seed_tag + ".txt"), distance_graph_report(result.graph, names));
    Checkpoint graph_ckpt;
    store_distance_graph(graph_ckpt, result.graph, names);
    graph_ckpt.save(dir / ("distance_graph" + seed_tag + ".checkpoint.txt"));
    Checkpoint so_ckpt;
    so_ckpt.meta["method"] = "source_only";
    so_ckpt.meta["seed"] = std::to_string(run_config.seed);
    store_network(so_ckpt, echoed.network, result.source_only.params);
    so_ckpt.save(dir / ("source_only" + seed_tag + ".checkpoint.txt"));
  }
  write_text(dir / "timing.json", timing.dump(2) + "\n");
  return kExitOk;
}

int cmd_distance_graph(const std::string& checkpoint_path, const std::vector<std::string>& domain_paths,
                       const std::string& out_path, std::ostream& out) {
  if (domain_paths.size() < 2) throw ConfigError("--domains needs the source and at least one target");
  const auto [net_config, params] = load_network(Checkpoint::load(checkpoint_path));
  std::vector<DomainCentroids> centroids;
  std::vector<std::string> names;
  for (const auto& p : domain_paths) {
    const Domain d = load_domain(p);
    centroids.push_back(compute_domain_centroids(params, net_config.tau, d.samples));
    names.push_back(d.name);
  }
  const DistanceGraph graph = build_distance_graph(centroids);
  write_text(out_path, distance_graph_report(graph, names));
  Checkpoint ckpt;
  store_distance_graph(ckpt, graph, names);
  ckpt.save(fs::path(out_path).string() + ".checkpoint.txt");
  out << "wrote " << out_path << "\n";
  return kExitOk;
}

struct ReportRow {
  std::vector<double> finals;
};

void write_scatter_svg(const fs::path& path, const Matrix& features, const Labels& colors) {
  static const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  double extent = 1e-12;
  for (double x : features.data()) extent = std::max(extent, std::abs(x));
  const double size = 480.0;
  const double half = size / 2.0;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  char buf[160];
  for (std::size_t i = 0; i < features.rows(); ++i) {
    const double x = half + features(i, 0) / extent * (half - 10.0);
    const double y = half - features(i, 1) / extent * (half - 10.0);
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2\" fill=\"%s\"/>\n", x, y,
                  kPalette[colors[i] % 10]);
    os << buf;
  }
  os << "</svg>\n";
  write_text(path, os.str());
}

int cmd_report(const std::string& runs_dir, const std::string& out_path, const std::string& svg_path,
               const std::string& svg_domain, std::ostream& out) {
  if (!fs::is_directory(runs_dir)) throw InvalidInputError("'" + runs_dir + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(runs_dir)) {
    const std::string name = e.path().filename().string();
    if (e.is_regular_file() && name.size() > 13 && name.ends_with(".metrics.json")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw InvalidInputError("no *.metrics.json files under '" + runs_dir + "'");

  std::map<std::pair<std::string, std::string>, ReportRow> rows;
  for (const auto& f : files) {
    const json doc = read_json_file(f);
    if (!doc.contains("task") || !doc.contains("method") || !doc.contains("final_accuracy")) {
      throw InvalidInputError("'" + f.string() + "' is not a metrics file");
    }
    auto& row = rows[{doc["task"].get<std::string>(), doc["method"].get<std::string>()}];
    if (!doc["final_accuracy"].is_null()) row.finals.push_back(doc["final_accuracy"].get<double>());
  }

  std::ostringstream csv;
  csv << "task,method,runs,mean_accuracy,std_accuracy\n";
  char buf[256];
  for (const auto& [key, row] : rows) {
    const std::size_t n = row.finals.size();
    double mean = 0.0, var = 0.0;
    for (double a : row.finals) mean += a;
    mean = n ? mean / static_cast<double>(n) : std::nan("");
    for (double a : row.finals) var += (a - mean) * (a - mean);
    const double sd = n > 1 ? std::sqrt(var / static_cast<double>(n - 1)) : 0.0;
    std::snprintf(buf, sizeof buf, "%s,%s,%zu,%.17g,%.17g\n", key.first.c_str(), key.second.c_str(), n, mean, sd);
    csv << buf;
    std::snprintf(buf, sizeof buf, "%-32s %-14s runs=%zu mean=%.4f std=%.4f\n", key.first.c_str(),
                  key.second.c_str(), n, mean, sd);
    out << buf;
  }
  write_text(out_path, csv.str());

  if (!svg_path.empty()) {
    if (svg_domain.empty()) throw ConfigError("--svg requires --domain");
    std::optional<std::pair<NetworkConfig, NetworkParams>> net;
    for (const auto& e : fs::recursive_directory_iterator(runs_dir)) {
      if (!e.is_regular_file() || !e.path().filename().string().ends_with(".checkpoint.txt")) continue;
      const Checkpoint ckpt = Checkpoint::load(e.path());
      if (!ckpt.meta.count("network.bottleneck_dim") || ckpt.meta_value("network.bottleneck_dim") != "2") continue;
      net = load_network(ckpt);
      break;
    }
    if (!net) throw InvalidInputError("no checkpoint with a 2-dim bottleneck under '" + runs_dir + "'");
    const Domain d = load_domain(svg_domain);
    const ForwardResult fwd = forward(net->second, d.samples, net->first.tau);
    write_scatter_svg(svg_path, fwd.norm_features, d.labels ? *d.labels : predicted_labels(fwd.probs));
  }
  return kExitOk;
}

std::string defaults_footer() {
  CliConfig defaults;
  json j = to_json(defaults.experiment);
  j["output_dir"] = "<optional, used when --out is omitted>";
  j["dataset"] = "<optional synthetic spec object, used by generate>";
  return "Config file keys and defaults (JSON):\n" + j.dump(2) +
         "\n\nExit codes: 0 success, 2 configuration/input error, 3 numerical failure.";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Strong-weak integrated semi-supervision for unsupervised domain adaptation"};
  app.footer(defaults_footer());
  app.require_subcommand(1);

  std::string spec_path, config_path, source_path, target_path, out_dir, checkpoint_path, runs_dir,
      out_file, svg_path, svg_domain;
  std::vector<std::string> target_paths, domain_paths;
  std::size_t jobs = 1;

  auto* gen = app.add_subcommand("generate", "Write synthetic domains as CSV files");
  gen->add_option("--spec", spec_path, "Synthetic dataset spec (JSON)")->required();
  gen->add_option("--out", out_dir, "Output directory");

  auto* single = app.add_subcommand("train-single", "Single-target adaptation");
  single->add_option("--config", config_path, "Experiment config (JSON)")->required();
  single->add_option("--source", source_path, "Labeled source CSV")->required();
  single->add_option("--target", target_path, "Target CSV")->required();
  single->add_option("--out", out_dir, "Output directory");

  auto* multi = app.add_subcommand("train-multi", "Multi-target adaptation with peer scaffolding");
  multi->add_option("--config", config_path, "Experiment config (JSON)")->required();
  multi->add_option("--source", source_path, "Labeled source CSV")->required();
  multi->add_option("--targets", target_paths, "Target CSVs")->required();
  multi->add_option("--out", out_dir, "Output directory");
  multi->add_option("--jobs", jobs, "Concurrent per-target trainers")->capture_default_str();

  auto* graph = app.add_subcommand("distance-graph", "Class-wise distance graph from a checkpoint");
  graph->add_option("--checkpoint", checkpoint_path, "Network checkpoint")->required();
  graph->add_option("--domains", domain_paths, "Source CSV then target CSVs")->required();
  graph->add_option("--out", out_file, "Report path")->required();

  auto* report = app.add_subcommand("report", "Aggregate metrics files");
  report->add_option("--runs", runs_dir, "Directory with *.metrics.json files")->required();
  report->add_option("--out", out_file, "Aggregate CSV path")->required();
  report->add_option("--svg", svg_path, "Feature scatter SVG (needs a 2-dim bottleneck)");
  report->add_option("--domain", svg_domain, "Domain CSV to plot in the SVG");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  if (argv.empty()) argv.push_back("swiss");
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*gen) return cmd_generate(spec_path, out_dir, out);
    if (*single) return cmd_train_single(config_path, source_path, target_path, out_dir, out);
    if (*multi) return cmd_train_multi(config_path, source_path, target_paths, out_dir, jobs, out);
    if (*graph) return cmd_distance_graph(checkpoint_path, domain_paths, out_file, out);
    if (*report) return cmd_report(runs_dir, out_file, svg_path, svg_domain, out);
  } catch (const DegenerateInputError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const EmptyClassError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "runtime failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitConfig;
}

}  // namespace swiss::cli
