#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "experiment.hpp"
#include "liblab/error.hpp"

namespace liblab::cli {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read config file '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void report_validation(std::ostream& err, const std::string& file, const ValidationError& e) {
  err << "error: ";
  if (e.line() > 0) err << (file.empty() ? "<spec>" : file) << ':' << e.line() << ':' << e.column() << ": ";
  err << e.what() << '\n';
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Liberation flow, free mutual information and orbital free entropy of projection pairs"};
  std::string command, config, preset, out_path, format, initial;
  double tau_p = 0, tau_q = 0, t_max = 0, tol = 0, dt = 0;
  std::vector<double> times;
  Index grid = 0, n = 0, moments = 0;
  int samples = 0;
  std::uint64_t seed = 0;

  app.add_option("command", command, "evolve | istar | chiorb | verify | moments | oracle-mc | pde-check");
  app.add_option("--config", config, "JSON experiment spec");
  app.add_option("--preset", preset, "haar_half | free_projections | delta_zero | cosine | bump");
  app.add_option("--tauP", tau_p, "trace of P");
  app.add_option("--tauQ", tau_q, "trace of Q");
  app.add_option("--t", times, "output times")->expected(1, -1);
  app.add_option("--t-max", t_max, "upper limit of the time integral");
  app.add_option("--grid", grid, "circle grid size");
  app.add_option("--tol", tol, "integration tolerance");
  app.add_option("--seed", seed, "Monte Carlo seed");
  app.add_option("--n", n, "matrix size");
  app.add_option("--samples", samples, "Monte Carlo replicas");
  app.add_option("--dt", dt, "Euler step of the matrix model");
  app.add_option("--initial", initial, "free | aligned");
  app.add_option("--moments", moments, "highest moment reported");
  app.add_option("--out", out_path, "output path (default: standard output)");
  app.add_option("--format", format, "json | csv")->check(CLI::IsMember({"json", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  ExperimentSpec spec;
  std::string source;
  std::set<std::string> overridden;
  try {
    if (!config.empty()) {
      source = read_file(config);
      spec = parse_spec(source);
    }
    auto set = [&](const char* flag, const char* key, auto& field, const auto& value) {
      if (app.count(flag) > 0) {
        field = value;
        overridden.insert(key);
      }
    };
    if (!command.empty()) {
      spec.command = command_from_string(command);
      overridden.insert("command");
    } else if (config.empty()) {
      throw ValidationError("a command or --config is required");
    }
    if (!preset.empty()) {
      spec.measure = {{"density", {{"kind", "named"}, {"name", preset}}}};
      overridden.insert("measure");
    }
    set("--tauP", "tau_p", spec.tau_p, tau_p);
    set("--tauQ", "tau_q", spec.tau_q, tau_q);
    set("--t", "times", spec.times, times);
    set("--t-max", "t_max", spec.t_max, t_max);
    set("--grid", "grid", spec.grid, grid);
    set("--tol", "tol", spec.tol, tol);
    set("--seed", "seed", spec.seed, seed);
    set("--n", "n", spec.n, n);
    set("--samples", "samples", spec.samples, samples);
    set("--dt", "dt", spec.dt, dt);
    set("--initial", "initial", spec.initial, initial);
    set("--moments", "moments", spec.moments, moments);
    set("--out", "out", spec.out, out_path);
    if (!format.empty()) {
      spec.format = format == "csv" ? Format::csv : Format::json;
      overridden.insert("format");
    } else if (!out_path.empty() && config.empty()) {
      spec.format = ends_with(out_path, ".csv") ? Format::csv : Format::json;
    }
    validate(spec, source, overridden);
  } catch (const ValidationError& e) {
    report_validation(err, config, e);
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  Artifact artifact;
  try {
    artifact = run(spec);
  } catch (const Error& e) {
    json detail = {{"error", std::string(to_string(e.code()))}, {"message", e.what()}, {"spec", to_json(spec)}};
    try {
      detail["context"] = json::parse(e.context());
    } catch (const json::exception&) {
      detail["context"] = e.context();
    }
    err << detail.dump() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << json{{"error", "numerical"}, {"message", e.what()}, {"spec", to_json(spec)}}.dump() << '\n';
    return 2;
  }

  const std::string text = render(artifact, spec.format);
  if (spec.out.empty()) {
    out << text;
  } else {
    std::ofstream file(spec.out, std::ios::binary | std::ios::trunc);
    if (!file || !(file << text)) {
      err << "error: cannot write '" << spec.out << "'\n";
      return 1;
    }
  }
  return 0;
}

}  // namespace liblab::cli
