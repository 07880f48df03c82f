#include "experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <sstream>

#include "liblab/entropy.hpp"
#include "liblab/error.hpp"
#include "liblab/fubm.hpp"
#include "liblab/loewner.hpp"
#include "liblab/matrix_oracle.hpp"

namespace liblab::cli {

namespace {

const std::vector<std::string> kKeys{"command", "tau_p", "tau_q",   "measure", "times",   "grid",
                                     "t_max",   "tol",   "seed",    "n",       "samples", "dt",
                                     "initial", "moments", "out",   "format"};

const std::vector<std::pair<Command, std::string>> kCommands{
    {Command::evolve, "evolve"},   {Command::istar, "istar"},         {Command::chiorb, "chiorb"},
    {Command::verify, "verify"},   {Command::moments, "moments"},     {Command::oracle_mc, "oracle-mc"},
    {Command::pde_check, "pde-check"}};

struct Location {
  int line = 0;
  int column = 0;
};

Location offset_location(const std::string& text, std::size_t offset) {
  Location loc{1, 1};
  for (std::size_t i = 0; i < std::min(offset, text.size()); ++i) {
    if (text[i] == '\n') {
      ++loc.line;
      loc.column = 1;
    } else {
      ++loc.column;
    }
  }
  return loc;
}

Location key_location(const std::string& source, const std::string& key) {
  if (source.empty()) return {};
  const std::size_t at = source.find('"' + key + '"');
  if (at == std::string::npos) return {};
  return offset_location(source, at);
}

[[noreturn]] void fail(const std::string& key, const std::string& message, const std::string& source) {
  const Location loc = key_location(source, key);
  throw ValidationError(key + ": " + message, loc.line, loc.column);
}

json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "+inf" : "-inf";
  return x;
}

json moments_json(const ArrayXd& c) {
  json out = json::array();
  for (Index i = 0; i < c.size(); ++i) out.push_back(c(i));
  return out;
}

json diagnostics_json(const FlowDiagnostics& d) {
  return {{"branch_ambiguities", d.branch_ambiguities},
          {"characteristic_drops", d.characteristic_drops},
          {"continuation_refinements", d.continuation_refinements},
          {"refinement_truncated", d.refinement_truncated}};
}

std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

std::string csv_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "+inf" : "-inf";
  std::ostringstream s;
  s << std::setprecision(17) << x;
  return s.str();
}

bool power_of_two(Index n) { return n > 0 && (n & (n - 1)) == 0; }

std::unique_ptr<EvolvedField> flow_field(const CircleMeasure& mu0, const TraceParams& params, double t) {
  HerglotzField initial(mu0, params);
  if (params.half_trace()) return std::make_unique<HalfTraceFlow>(std::move(initial), t);
  return std::make_unique<GeneralFlow>(std::move(initial), t);
}

// Taylor coefficients of L(t, .) and the flow state at t (mu0 itself at 0).
struct Sample {
  FlowState state;
  MomentVector moments;
};

Sample flow_sample(const CircleMeasure& mu0, const TraceParams& params, double t, Index n_moments,
                   Index grid, FlowDiagnostics& total) {
  Sample s;
  if (t == 0.0) {
    s.state.measure = mu0;
    s.state.params = params;
    s.moments = moments_of(mu0, n_moments);
    return s;
  }
  EvolveOptions options;
  options.grid_size = grid;
  s.state = evolve(mu0, params, t, options);
  total += s.state.diagnostics;
  const auto field = flow_field(mu0, params, t);
  s.moments = moments_of_field(*field, n_moments);
  s.moments.t = t;
  total += field->diagnostics();
  return s;
}

std::vector<cd> pde_points() {
  std::vector<cd> pts;
  for (double x : {-0.5, 0.0, 0.5, 1.0, 1.5})
    for (double y : {-1.0, -0.5, 0.5, 1.0}) pts.emplace_back(x, y);
  return pts;
}

}  // namespace

std::string to_string(Command c) {
  for (const auto& [k, name] : kCommands)
    if (k == c) return name;
  return "unknown";
}

Command command_from_string(const std::string& s) {
  for (const auto& [k, name] : kCommands)
    if (name == s) return k;
  throw ValidationError("unknown command '" + s + "'");
}

json to_json(const ExperimentSpec& spec) {
  return {{"command", to_string(spec.command)},
          {"tau_p", spec.tau_p},
          {"tau_q", spec.tau_q},
          {"measure", spec.measure},
          {"times", spec.times},
          {"grid", spec.grid},
          {"t_max", spec.t_max},
          {"tol", spec.tol},
          {"seed", spec.seed},
          {"n", spec.n},
          {"samples", spec.samples},
          {"dt", spec.dt},
          {"initial", spec.initial},
          {"moments", spec.moments},
          {"out", spec.out},
          {"format", spec.format == Format::json ? "json" : "csv"}};
}

ExperimentSpec spec_from_json(const json& j, const std::string& source) {
  if (!j.is_object()) throw ValidationError("experiment spec must be a JSON object", 1, 1);
  for (const auto& [key, value] : j.items()) {
    if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) fail(key, "unknown key", source);
  }
  ExperimentSpec spec;
  auto read = [&](const char* key, auto& target) {
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(target);
    } catch (const json::exception& e) {
      fail(key, std::string("wrong type (") + e.what() + ")", source);
    }
  };
  auto read_number = [&](const char* key, auto& target) {
    if (j.contains(key) && !j.at(key).is_number()) fail(key, "expected a number", source);
    read(key, target);
  };
  if (j.contains("command")) {
    std::string name;
    read("command", name);
    try {
      spec.command = command_from_string(name);
    } catch (const ValidationError& e) {
      fail("command", e.what(), source);
    }
  }
  read_number("tau_p", spec.tau_p);
  read_number("tau_q", spec.tau_q);
  if (j.contains("measure")) {
    if (!j.at("measure").is_object()) fail("measure", "expected an object", source);
    spec.measure = j.at("measure");
  }
  if (j.contains("times")) {
    const json& t = j.at("times");
    if (!t.is_array() || !std::all_of(t.begin(), t.end(), [](const json& v) { return v.is_number(); }))
      fail("times", "expected an array of numbers", source);
    read("times", spec.times);
  }
  if (j.contains("grid") && !j.at("grid").is_number_integer()) fail("grid", "expected an integer", source);
  read("grid", spec.grid);
  read_number("t_max", spec.t_max);
  read_number("tol", spec.tol);
  if (j.contains("seed") && !j.at("seed").is_number_unsigned()) fail("seed", "expected a nonnegative integer", source);
  read("seed", spec.seed);
  if (j.contains("n") && !j.at("n").is_number_integer()) fail("n", "expected an integer", source);
  read("n", spec.n);
  if (j.contains("samples") && !j.at("samples").is_number_integer()) fail("samples", "expected an integer", source);
  read("samples", spec.samples);
  read_number("dt", spec.dt);
  read("initial", spec.initial);
  if (j.contains("moments") && !j.at("moments").is_number_integer()) fail("moments", "expected an integer", source);
  read("moments", spec.moments);
  read("out", spec.out);
  if (j.contains("format")) {
    std::string f;
    read("format", f);
    if (f == "json") spec.format = Format::json;
    else if (f == "csv") spec.format = Format::csv;
    else fail("format", "expected json or csv", source);
  }
  return spec;
}

ExperimentSpec parse_spec(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const Location loc = offset_location(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ValidationError(std::string("malformed JSON: ") + e.what(), loc.line, loc.column);
  }
  return spec_from_json(j, text);
}

CircleMeasure build_measure(const json& measure, const TraceParams& params, Index grid) {
  if (!measure.is_object()) throw std::invalid_argument("measure must be an object");
  for (const auto& [key, value] : measure.items())
    if (key != "atoms" && key != "density") throw std::invalid_argument("unknown measure key '" + key + "'");
  double atom_zero = 0.0, atom_pi = 0.0;
  if (measure.contains("atoms")) {
    const json& a = measure.at("atoms");
    if (!a.is_object()) throw std::invalid_argument("atoms must be an object");
    for (const auto& [key, value] : a.items()) {
      if (!value.is_number()) throw std::invalid_argument("atom weights must be numbers");
      if (key == "zero") atom_zero = value.get<double>();
      else if (key == "pi") atom_pi = value.get<double>();
      else throw std::invalid_argument("unknown atom '" + key + "'");
    }
  }
  ArrayXd density = ArrayXd::Zero(grid);
  if (measure.contains("density")) {
    const json& d = measure.at("density");
    if (!d.is_object() || !d.contains("kind")) throw std::invalid_argument("density needs a kind");
    const std::string kind = d.at("kind").get<std::string>();
    const double mass = params.interior_mass();
    if (kind == "samples") {
      for (const auto& [key, value] : d.items())
        if (key != "kind" && key != "values") throw std::invalid_argument("unknown density key '" + key + "'");
      if (!d.contains("values") || !d.at("values").is_array()) throw std::invalid_argument("samples need values");
      const std::vector<double> v = d.at("values").get<std::vector<double>>();
      if (!power_of_two(static_cast<Index>(v.size())))
        throw std::invalid_argument("sample count must be a power of two");
      density = Eigen::Map<const ArrayXd>(v.data(), static_cast<Index>(v.size()));
    } else if (kind == "named") {
      for (const auto& [key, value] : d.items())
        if (key != "kind" && key != "name") throw std::invalid_argument("unknown density key '" + key + "'");
      const std::string name = d.value("name", "");
      const ArrayXd th = grid::angles(grid);
      if (name == "haar_half") {
        density = ArrayXd::Constant(grid, mass / (2.0 * grid::kPi));
      } else if (name == "free_projections") {
        density = free_pair_measure(params, grid).density();
      } else if (name == "delta_zero") {
        atom_zero += mass;
      } else if (name == "cosine") {
        density = (1.0 + th.cos()) * (mass / (2.0 * grid::kPi));
      } else if (name == "bump") {
        auto bump = [](double x) { return (x > 0.2 && x < 0.8) ? std::pow((x - 0.2) * (0.8 - x), 2) : 0.0; };
        const CircleMeasure raw = circle_from_interval_density(bump, grid);
        density = raw.density() * (mass / raw.total_mass());
      } else {
        throw std::invalid_argument("unknown named density '" + name + "'");
      }
    } else {
      throw std::invalid_argument("density kind must be samples or named");
    }
  }
  return CircleMeasure(std::move(density), atom_zero, atom_pi);
}

void validate(const ExperimentSpec& spec, const std::string& source, const std::set<std::string>& overridden) {
  const std::string empty;
  auto src = [&](const char* key) -> const std::string& { return overridden.count(key) ? empty : source; };
  if (!(spec.tau_p > 0.0 && spec.tau_p < 1.0)) fail("tau_p", "must lie in (0, 1)", src("tau_p"));
  if (!(spec.tau_q > 0.0 && spec.tau_q < 1.0)) fail("tau_q", "must lie in (0, 1)", src("tau_q"));
  if (spec.times.empty()) fail("times", "must not be empty", src("times"));
  for (double t : spec.times)
    if (!(t >= 0.0) || !std::isfinite(t)) fail("times", "must be finite and nonnegative", src("times"));
  if (!power_of_two(spec.grid) || spec.grid < 64) fail("grid", "must be a power of two >= 64", src("grid"));
  if (!(spec.t_max > 0.0) || !std::isfinite(spec.t_max)) fail("t_max", "must be positive", src("t_max"));
  if (!(spec.tol > 0.0)) fail("tol", "must be positive", src("tol"));
  if (spec.moments < 1 || spec.moments > 64) fail("moments", "must lie in [1, 64]", src("moments"));
  if (spec.initial != "free" && spec.initial != "aligned") fail("initial", "must be free or aligned", src("initial"));

  const TraceParams params(spec.tau_p, spec.tau_q);
  CircleMeasure mu;
  try {
    mu = build_measure(spec.measure, params, spec.grid);
  } catch (const std::exception& e) {
    fail("measure", e.what(), src("measure"));
  }
  if (std::abs(mu.total_mass() - params.interior_mass()) > 1e-6) {
    std::ostringstream msg;
    msg << std::setprecision(17) << "mass " << mu.total_mass() << " differs from (1 - a - b)/2 = "
        << params.interior_mass();
    fail("measure", msg.str(), src("measure"));
  }

  switch (spec.command) {
    case Command::moments:
      if (!params.half_trace()) fail("tau_p", "moments needs tau_P = tau_Q = 1/2", src("tau_p"));
      break;
    case Command::pde_check:
      for (double t : spec.times)
        if (t < 1e-2) fail("times", "pde-check needs t >= 0.01", src("times"));
      break;
    case Command::oracle_mc: {
      MatrixModelConfig c;
      c.n = spec.n;
      c.tau_p = spec.tau_p;
      c.tau_q = spec.tau_q;
      c.dt = spec.dt;
      c.samples = spec.samples;
      c.seed = spec.seed;
      c.t_end = *std::max_element(spec.times.begin(), spec.times.end());
      try {
        c.validate();
      } catch (const std::invalid_argument& e) {
        fail("n", e.what(), src("n"));
      }
      for (double t : spec.times) {
        const double k = t / spec.dt;
        if (std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, k))
          fail("times", "oracle-mc times must be multiples of dt", src("times"));
      }
      break;
    }
    default:
      break;
  }
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Artifact run(const ExperimentSpec& spec) {
  const TraceParams params(spec.tau_p, spec.tau_q);
  const CircleMeasure mu0 = build_measure(spec.measure, params, spec.grid);
  FlowDiagnostics total;
  json result;
  std::ostringstream csv;
  IStarOptions istar;
  istar.t_max = spec.t_max;
  istar.tol = spec.tol;
  istar.grid_size = spec.grid;

  switch (spec.command) {
    case Command::evolve: {
      csv << "t,mass";
      for (Index k = 0; k <= spec.moments; ++k) csv << ",c" << k;
      csv << '\n';
      json rows = json::array();
      for (double t : spec.times) {
        const Sample s = flow_sample(mu0, params, t, spec.moments, spec.grid, total);
        const double mass = s.state.measure.total_mass();
        rows.push_back({{"t", t},
                        {"mass", mass},
                        {"mass_error", std::abs(mass - params.interior_mass())},
                        {"moments", moments_json(s.moments.c)}});
        csv << csv_number(t) << ',' << csv_number(mass);
        for (Index k = 0; k <= spec.moments; ++k) csv << ',' << csv_number(s.moments.c(k));
        csv << '\n';
      }
      result = {{"interior_mass", params.interior_mass()}, {"samples", rows}};
      break;
    }
    case Command::moments: {
      csv << "t,n,recursion,loewner\n";
      const MomentVector c0 = moments_of(mu0, spec.moments);
      json rows = json::array();
      double worst = 0.0;
      for (double t : spec.times) {
        const MomentVector rec = t == 0.0 ? c0 : moment_flow(c0, 2.0 * t);
        const Sample s = flow_sample(mu0, params, t, spec.moments, spec.grid, total);
        const double diff = (rec.c - s.moments.c).abs().maxCoeff();
        worst = std::max(worst, diff);
        rows.push_back({{"t", t},
                        {"recursion", moments_json(rec.c)},
                        {"loewner", moments_json(s.moments.c)},
                        {"max_difference", diff}});
        for (Index k = 0; k <= spec.moments; ++k)
          csv << csv_number(t) << ',' << k << ',' << csv_number(rec.c(k)) << ',' << csv_number(s.moments.c(k)) << '\n';
      }
      result = {{"samples", rows}, {"max_difference", worst}};
      break;
    }
    case Command::istar: {
      const IStarResult r = i_star_detail(mu0, params, istar);
      total += r.diagnostics;
      result = {{"i_star", number(r.value)},
                {"error", number(r.error)},
                {"tail", r.tail},
                {"cut", r.cut},
                {"evaluations", r.evaluations},
                {"divergent_at_zero", r.profile.divergent_at_zero},
                {"fit", {{"exponent", r.fit.exponent}, {"r_squared", r.fit.r_squared}}}};
      break;
    }
    case Command::chiorb: {
      const double chi = chi_orb(mu0, params);
      result = {{"chi_orb", number(chi)}, {"Z", calibrate_Z(params)}};
      break;
    }
    case Command::verify: {
      const IdentityReport r = verify_identity(mu0, params, istar);
      total += r.detail.diagnostics;
      result = {{"i_star", number(r.i_star)},
                {"chi_orb", number(r.chi_orb)},
                {"gap", number(r.gap)},
                {"both_infinite", r.both_infinite},
                {"i_star_error", number(r.detail.error)}};
      break;
    }
    case Command::oracle_mc: {
      MatrixModelConfig c;
      c.n = spec.n;
      c.tau_p = spec.tau_p;
      c.tau_q = spec.tau_q;
      c.dt = spec.dt;
      c.samples = spec.samples;
      c.seed = spec.seed;
      c.t_end = *std::max_element(spec.times.begin(), spec.times.end());
      const bool free = spec.initial == "free";
      const EmpiricalSpectrum e =
          simulate_spectrum(c, free ? InitialPair::free_pair() : InitialPair::aligned(), spec.times);
      std::vector<TimedLaw> laws;
      const CircleMeasure start = free ? free_pair_measure(params, spec.grid)
                                       : CircleMeasure::atoms(params.interior_mass(), 0.0, spec.grid);
      for (const SpectrumSnapshot& s : e.snapshots) {
        if (free) {
          laws.push_back({s.t, from_circle(start, params)});
        } else {
          laws.push_back({s.t, flow_law(start, params, s.t)});
        }
      }
      const std::vector<double> ks = compare_to_flow(e.snapshots, laws);
      json rows = json::array();
      for (std::size_t i = 0; i < ks.size(); ++i)
        rows.push_back({{"t", e.snapshots[i].t}, {"ks", ks[i]}, {"mean_trace", e.snapshots[i].mean_trace()}});
      result = {{"snapshots", rows}, {"unitarity_drift", e.unitarity_drift}};
      write_snapshots_csv(csv, e.snapshots);
      break;
    }
    case Command::pde_check: {
      const HerglotzField initial(mu0, params);
      CauchyFlow g = [&](double t, cd z) {
        const cd zeta = szego_to_disk(z);
        const auto field = flow_field(mu0, params, t);
        const cd l = field->L(zeta);
        total += field->diagnostics();
        return params.forced_atom0() / z + params.forced_atom1() / (z - 1.0) - l / szego_root(zeta);
      };
      const std::vector<cd> pts = pde_points();
      const PdeResidual coarse = pde_residual_G(g, spec.times, pts, 1e-3, 1e-3, params);
      const PdeResidual fine = pde_residual_G(g, spec.times, pts, 5e-4, 5e-4, params);
      result = {{"step", 1e-3},
                {"residual_max", coarse.max},
                {"residual_mean", coarse.mean},
                {"half_step_residual_max", fine.max},
                {"half_step_residual_mean", fine.mean},
                {"ratio", coarse.max / fine.max}};
      break;
    }
  }

  Artifact a;
  a.report = {{"result", result},
              {"provenance",
               {{"command", to_string(spec.command)},
                {"spec_hash", hex64(fnv1a(to_json(spec).dump()))},
                {"modules",
                 {{"measures", kVersion},
                  {"transforms", kVersion},
                  {"loewner", kVersion},
                  {"fubm", kVersion},
                  {"entropy", kVersion},
                  {"matrix_oracle", kVersion},
                  {"cli", kVersion}}},
                {"flow", diagnostics_json(total)},
                {"timestamp", utc_timestamp()}}}};
  a.csv = csv.str();
  return a;
}

std::string render(const Artifact& artifact, Format format) {
  if (format == Format::json) return artifact.report.dump(2) + "\n";
  if (!artifact.csv.empty()) return artifact.csv;
  std::ostringstream out;
  out << "key,value\n";
  for (const auto& [key, value] : artifact.report.at("result").items()) {
    if (value.is_number_float()) out << key << ',' << csv_number(value.get<double>()) << '\n';
    else if (value.is_primitive()) out << key << ',' << (value.is_string() ? value.get<std::string>() : value.dump()) << '\n';
  }
  return out.str();
}

}  // namespace liblab::cli
