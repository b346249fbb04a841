#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "isomono/experiments.hpp"

using namespace isomono;

namespace
{

struct Overrides
{
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> samples;
  std::optional<real> tol_ode;
  std::optional<real> tol_alg;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<unsigned> threads;
};

void add_common(CLI::App* cmd, Overrides& o)
{
  cmd->add_option("--config", o.config_path, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "base RNG seed");
  cmd->add_option("--samples", o.samples, "number of samples");
  cmd->add_option("--tol-ode", o.tol_ode, "ODE tolerance");
  cmd->add_option("--tol-alg", o.tol_alg, "algebraic round-trip tolerance");
  cmd->add_option("--out", o.out, "output file (stdout when omitted)");
  cmd->add_option("--format", o.format, "json or csv-summary");
  cmd->add_option("--threads", o.threads, "worker threads (0 = all cores)");
}

json read_json_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_failure, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::invalid_argument, "'" + path + "' is not valid JSON: " + e.what());
  }
}

ExperimentConfig build_config(const Overrides& o, const std::string& experiment)
{
  ExperimentConfig c;
  if (!o.config_path.empty()) c = config_from_json(read_json_file(o.config_path));
  if (!experiment.empty()) c.experiment = experiment;
  if (o.seed) c.seed = *o.seed;
  if (o.samples) c.samples = *o.samples;
  if (o.tol_ode) c.tol_ode = *o.tol_ode;
  if (o.tol_alg) c.thresholds.roundtrip = *o.tol_alg;
  if (o.out) c.out = *o.out;
  if (o.format) c.format = *o.format;
  if (o.threads) c.threads = *o.threads;
  c.validate();
  return c;
}

void print_summary(const Report& r)
{
  std::cerr << r.experiment << ": " << (r.pass ? "PASS" : "FAIL") << '\n';
  for (const auto& a : r.aggregates)
    std::cerr << "  " << a.check << ": " << a.passed << "/" << a.cases << " passed, worst ratio " << a.worst_ratio << '\n';
  for (const auto& c : r.cases)
    if (!c.message.empty()) std::cerr << "  case " << c.index << " [" << c.check << "]: " << c.message << '\n';
  if (r.timings.contains("total_seconds")) std::cerr << "  time " << r.timings["total_seconds"].get<real>() << " s\n";
}

int finish(const Report& r, const ExperimentConfig& c)
{
  emit_report(r, report_format_from_string(c.format), c.out, std::cout);
  print_summary(r);
  return r.pass ? 0 : 1;
}

}

int main(int argc, char** argv)
{
  CLI::App app{"Isomonodromic deformations of rank-2 Fuchsian systems: experiments and tasks"};
  app.require_subcommand(1);

  Overrides o;
  std::string experiment;
  auto* verify = app.add_subcommand("verify", "run a seeded experiment");
  verify->add_option("experiment", experiment, "experiment name")->required()->check(CLI::IsMember(experiment_names()));
  add_common(verify, o);

  auto* flow = app.add_subcommand("flow", "integrate the Garnier flow (inputs: t, target, q, p)");
  add_common(flow, o);
  auto* fibers = app.add_subcommand("fibers", "tangencies and special fibers of a normal-form system (inputs: t, beta, gamma, heights)");
  add_common(fibers, o);
  auto* rh = app.add_subcommand("rh-rank", "Riemann-Hilbert Jacobian rank at one point (inputs: t, nu)");
  add_common(rh, o);

  std::string report_path;
  auto* report = app.add_subcommand("report", "summarize or convert a saved JSON report");
  report->add_option("file", report_path, "report file")->required()->check(CLI::ExistingFile);
  report->add_option("--out", o.out, "output file (stdout when omitted)");
  report->add_option("--format", o.format, "json or csv-summary");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*verify) {
      const auto c = build_config(o, experiment);
      return finish(run_experiment(c), c);
    }
    if (*flow) {
      const auto c = build_config(o, "flow");
      return finish(run_flow_task(c), c);
    }
    if (*fibers) {
      const auto c = build_config(o, "fibers");
      return finish(run_fibers_task(c), c);
    }
    if (*rh) {
      const auto c = build_config(o, "rh-rank");
      return finish(run_rh_rank_task(c), c);
    }
    if (*report) {
      const Report r = report_from_json(read_json_file(report_path));
      emit_report(r, report_format_from_string(o.format.value_or("csv-summary")), o.out.value_or(""), std::cout);
      print_summary(r);
      return r.pass ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
