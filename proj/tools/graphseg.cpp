// graphseg: command-line front end.
//
// Exit codes: 0 success, 1 internal error, 2 bad input (parse errors,
// missing files, invalid arguments), 3 no graph-valid path for the data.

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "graphseg/graphseg.hpp"

using namespace graphseg;

namespace {

// Raised for bad flag values; mapped to exit code 2.
struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw usage_error("cannot write '" + path + "'");
  out << text;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parse_error(path, 0, "cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<double> split_numbers(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    auto v = parse_number(cell);
    if (!v) throw usage_error(std::string(flag) + ": not a number: '" + cell + "'");
    out.push_back(*v);
  }
  return out;
}

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ','))
    if (!trim(cell).empty()) out.emplace_back(trim(cell));
  return out;
}

LossSpec loss_from(const std::string& name, double size) {
  LossSpec l{parse_family(name)};
  l.size = size;
  return l;
}

struct GraphFlags {
  std::string path;
  std::string type;
  double penalty = std::nan("");
  double gap = 0.0;
  double K = kInf;
  double a = kInf;

  void add(CLI::App* app, bool allow_file) {
    if (allow_file) app->add_option("--graph", path, "graph file (CSV, or JSON mirror)");
    app->add_option("--graph-type,--type", type, "std | isotonic | updown | relevant");
    app->add_option("--penalty", penalty, "edge penalty beta");
    app->add_option("--gap", gap, "gap c of up/down/abs edges");
    app->add_option("--K", K, "robust threshold K");
    app->add_option("--a", a, "Huber slope a");
  }

  Graph build(double default_penalty) const {
    if (!path.empty()) {
      if (!type.empty()) throw usage_error("give either --graph or --graph-type");
      return read_graph_file(path);
    }
    if (type.empty()) throw usage_error("one of --graph or --graph-type is required");
    auto t = parse_graph_type(type);
    if (!t) throw usage_error("--graph-type: unknown type '" + type + "'");
    return build_default_graph(*t, std::isnan(penalty) ? default_penalty : penalty, gap, K,
                               a);
  }
};

DecayMap decay_map(const Graph& g) {
  DecayMap m;
  for (const Edge& e : g.edges)
    if (e.type == EdgeType::Null && e.state1 == e.state2 && e.decay != 1.0)
      m.push_back({e.state1, e.decay});
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained changepoint detection on graphs of states"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "TOML/INI file mirroring the flags; flags override it");
  app.require_subcommand(1);

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "segment a data file");
  std::string data_path, column, weights_path, out_path, loss_name = "mean";
  double size = 1.0;
  GraphFlags gf;
  solve_cmd->add_option("--data", data_path, "one value per line, or CSV")->required();
  solve_cmd->add_option("--column", column, "CSV column name or 1-based index");
  gf.add(solve_cmd, true);
  solve_cmd->add_option("--loss", loss_name, "mean | poisson | exp | variance | binomial | negbin");
  solve_cmd->add_option("--size", size, "negative binomial size");
  solve_cmd->add_option("--weights", weights_path, "per-point weights file");
  solve_cmd->add_option("--out", out_path, "output file (default stdout)");

  // graph
  auto* graph_cmd = app.add_subcommand("graph", "write a default graph");
  GraphFlags gg;
  std::string graph_format = "csv", graph_out;
  gg.add(graph_cmd, false);
  graph_cmd->add_option("--format", graph_format, "csv | json");
  graph_cmd->add_option("--out", graph_out, "output file (default stdout)");

  // generate
  auto* gen_cmd = app.add_subcommand("generate", "simulate a piecewise signal");
  SignalSpec spec;
  std::string cps = "1", params = "0", family = "mean", gen_out;
  double flip = 0.0, student_df = 0.0;
  gen_cmd->add_option("--n", spec.n, "number of points");
  gen_cmd->add_option("--changepoints", cps, "comma-separated fractions ending at 1");
  gen_cmd->add_option("--parameters", params, "comma-separated segment parameters");
  gen_cmd->add_option("--family", family, "mean | poisson | exp | variance | negbin");
  gen_cmd->add_option("--sigma", spec.sigma, "Gaussian noise sd (mean family)");
  gen_cmd->add_option("--gamma", spec.gamma, "within-segment decay (mean family)");
  gen_cmd->add_option("--size", spec.size, "negative binomial size");
  gen_cmd->add_option("--seed", spec.seed, "random seed");
  gen_cmd->add_option("--flip", flip, "sign-flip probability of the signal (mean family)");
  gen_cmd->add_option("--student", student_df, "Student-t noise with this df (mean family)");
  gen_cmd->add_option("--out", gen_out, "output file (default stdout)");

  // sd
  auto* sd_cmd = app.add_subcommand("sd", "difference-based noise sd estimate");
  std::string sd_data, sd_column;
  sd_cmd->add_option("--data", sd_data, "data file")->required();
  sd_cmd->add_option("--column", sd_column, "CSV column name or 1-based index");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo comparison of isotonic fits");
  SimulationConfig sim;
  std::string scenario = "step", noises = "gauss", methods, sim_out;
  sim_cmd->add_option("--scenario", scenario, "linear | step");
  sim_cmd->add_option("--noise", noises, "comma list of gauss, student, corrupted");
  sim_cmd->add_option("--n", sim.n, "series length");
  sim_cmd->add_option("--sigma", sim.sigma, "noise scale");
  sim_cmd->add_option("--reps", sim.reps, "replicates");
  sim_cmd->add_option("--seed", sim.seed, "master seed");
  sim_cmd->add_option("--methods", methods,
                      "comma list of linear_fit, pava, gfpop1, gfpop2, gfpop3, gfpop4");
  sim_cmd->add_option("--p", sim.flip_p, "sign-flip probability for corrupted noise");
  sim_cmd->add_option("--threads", sim.threads, "worker threads (0: all cores)");
  sim_cmd->add_option("--out", sim_out, "output file (default stdout)");

  // plot
  auto* plot_cmd = app.add_subcommand("plot", "render data with a fitted segmentation");
  std::string plot_data, plot_column, fit_path, plot_graph, plot_format = "svg", plot_out;
  plot_cmd->add_option("--data", plot_data, "data file")->required();
  plot_cmd->add_option("--column", plot_column, "CSV column name or 1-based index");
  plot_cmd->add_option("--fit", fit_path, "segmentation JSON written by solve")->required();
  plot_cmd->add_option("--graph", plot_graph, "graph file, for decaying segments");
  plot_cmd->add_option("--format", plot_format, "svg | dat");
  plot_cmd->add_option("--out", plot_out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*solve_cmd) {
      const auto y = read_series_file(data_path, column);
      if (y.empty()) throw parse_error(data_path, 0, "no data");
      std::vector<double> w;
      if (!weights_path.empty()) w = read_series_file(weights_path);
      const LossSpec loss = loss_from(loss_name, size);
      double beta = 2.0 * std::log(static_cast<double>(y.size()));
      if (loss.family == Family::Gauss && y.size() >= 4) {
        const double sd = sd_diff_hall(y);
        beta *= sd * sd;
      }
      const Graph g = gf.build(beta);
      write_output(out_path, segmentation_json(solve(y, g, loss, w)));
    } else if (*graph_cmd) {
      if (std::isnan(gg.penalty)) throw usage_error("graph: --penalty is required");
      const Graph g = gg.build(gg.penalty);
      if (graph_format == "csv")
        write_output(graph_out, write_graph(g));
      else if (graph_format == "json")
        write_output(graph_out, write_graph_json(g));
      else
        throw usage_error("--format: expected csv or json");
    } else if (*gen_cmd) {
      auto f = parse_signal_family(family);
      if (!f) throw usage_error("--family: unknown family '" + family + "'");
      spec.family = *f;
      spec.changepoints = split_numbers(cps, "--changepoints");
      spec.parameters = split_numbers(params, "--parameters");
      std::vector<double> y;
      if (spec.family == SignalFamily::Mean && (flip > 0.0 || student_df > 0.0)) {
        const auto signal = signal_of(spec);
        y = student_df > 0.0 ? student_noise(signal, student_df, spec.seed, spec.sigma)
                             : gaussian_noise(signal, spec.sigma, spec.seed);
        if (flip > 0.0) y = corrupt_signflip(y, signal, flip, derive_seed(spec.seed, 1));
      } else {
        if (flip > 0.0 || student_df > 0.0)
          throw usage_error("--flip and --student apply to the mean family only");
        y = generate(spec);
      }
      write_output(gen_out, write_series(y));
    } else if (*sd_cmd) {
      std::cout << sig12(sd_diff_hall(read_series_file(sd_data, sd_column))) << '\n';
    } else if (*sim_cmd) {
      auto sc = parse_scenario(scenario);
      if (!sc) throw usage_error("--scenario: expected linear or step");
      sim.scenario = *sc;
      sim.noises.clear();
      for (const auto& s : split_words(noises)) {
        auto nz = parse_noise(s);
        if (!nz) throw usage_error("--noise: unknown noise '" + s + "'");
        sim.noises.push_back(*nz);
      }
      if (!methods.empty()) {
        sim.methods.clear();
        for (const auto& s : split_words(methods)) {
          auto m = parse_method(s);
          if (!m) throw usage_error("--methods: unknown method '" + s + "'");
          sim.methods.push_back(*m);
        }
      }
      write_output(sim_out, simulation_csv(simulate(sim)));
    } else if (*plot_cmd) {
      const auto y = read_series_file(plot_data, plot_column);
      Segmentation seg;
      try {
        seg = segmentation_from_json(slurp(fit_path));
      } catch (const nlohmann::json::exception& e) {
        throw parse_error(fit_path, 0, e.what());
      }
      DecayMap decay;
      if (!plot_graph.empty()) decay = decay_map(read_graph_file(plot_graph));
      if (plot_format == "svg")
        write_output(plot_out, render_svg(y, seg, decay));
      else if (plot_format == "dat")
        write_output(plot_out, overlay_dat(y, seg, decay));
      else
        throw usage_error("--format: expected svg or dat");
    }
  } catch (const parse_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const usage_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const contract_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const infeasible_error& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
