#ifndef LIBLAB_TOOLS_EXPERIMENT_HPP
#define LIBLAB_TOOLS_EXPERIMENT_HPP

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "liblab/measures.hpp"

namespace liblab::cli {

using nlohmann::json;

inline constexpr const char* kVersion = "1.0.0";

/// Bad input. `line` and `column` are 1-based and zero when unknown.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(const std::string& what, int line = 0, int column = 0)
      : std::runtime_error(what), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

enum class Command { evolve, istar, chiorb, verify, moments, oracle_mc, pde_check };
enum class Format { json, csv };

std::string to_string(Command c);
Command command_from_string(const std::string& s);

struct ExperimentSpec {
  Command command = Command::verify;
  double tau_p = 0.5;
  double tau_q = 0.5;
  /// Measure spec: {"atoms": {"zero", "pi"}, "density": {"kind": "samples" | "named", ...}}.
  json measure = {{"density", {{"kind", "named"}, {"name", "haar_half"}}}};
  std::vector<double> times{1.0};
  Index grid = 4096;
  double t_max = 64.0;
  double tol = 1e-6;
  std::uint64_t seed = 1;
  // oracle-mc
  Index n = 500;
  int samples = 8;
  double dt = 1e-2;
  std::string initial = "free";
  // evolve, moments
  Index moments = 10;
  std::string out;  // empty: standard output
  Format format = Format::json;

  friend bool operator==(const ExperimentSpec&, const ExperimentSpec&) = default;
};

json to_json(const ExperimentSpec& spec);
/// Rejects unknown keys and ill-typed values. `source` is the original text,
/// used only for line and column diagnostics.
ExperimentSpec spec_from_json(const json& j, const std::string& source = {});
ExperimentSpec parse_spec(const std::string& text);
/// Range checks and measure construction; throws ValidationError. Keys
/// found in `source` and not listed in `overridden` get a location.
void validate(const ExperimentSpec& spec, const std::string& source = {},
              const std::set<std::string>& overridden = {});

CircleMeasure build_measure(const json& measure, const TraceParams& params, Index grid);

std::uint64_t fnv1a(const std::string& bytes);

struct Artifact {
  json report;      // "result" and "provenance"
  std::string csv;  // empty when the command has no tabular output
};

/// Runs a validated spec. Numerical failures propagate as liblab::Error.
Artifact run(const ExperimentSpec& spec);

/// Serialized artifact in the requested format.
std::string render(const Artifact& artifact, Format format);

/// Full command line front end; returns the exit code.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace liblab::cli

#endif  // LIBLAB_TOOLS_EXPERIMENT_HPP
