// Apache License, Version 2.0, refer to LICENSE.txt

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "crossmi/baselines.hh"
#include "crossmi/bayesnet.hh"
#include "crossmi/cmi.hh"
#include "crossmi/crosscat.hh"
#include "crossmi/query.hh"
#include "crossmi/workspace.hh"
#include "json.hpp"

namespace {

using namespace crossmi;

constexpr int kExitOk = 0;
constexpr int kExitEngine = 1;
constexpr int kExitUsage = 2;

OutputFormat parse_format(const std::string& name) {
  if (name == "plain") return OutputFormat::kPlain;
  if (name == "csv") return OutputFormat::kCsv;
  if (name == "json") return OutputFormat::kJson;
  throw CLI::ValidationError("--format must be plain, csv or json");
}

int run_statement(const std::string& text, const Ensemble& ensemble,
                  const ExecOptions& options, OutputFormat format,
                  const RandomStream& rng, std::ostream& out) {
  const QueryAst ast = parse_query(text);
  const QueryResult result = plan_and_execute(ast, ensemble, options, rng);
  const std::string formatted = format_result(result, ensemble.schema(), format);
  out << formatted;
  if (formatted.empty() || formatted.back() != '\n') out << '\n';
  return kExitOk;
}

int cmd_query(const std::string& workspace_dir, const std::string& statement,
              const std::string& file, const std::string& format_name,
              long accuracy, long t_outer, uint64_t seed, int jobs) {
  const OutputFormat format = parse_format(format_name);
  const Workspace ws = open_workspace(workspace_dir);
  if (!workspace_has_ensemble(ws)) {
    std::cerr << "error: workspace has no fitted ensemble; run `crossmi fit`\n";
    return kExitEngine;
  }
  const Ensemble ensemble = load_workspace_ensemble(ws);
  ExecOptions options;
  options.t = accuracy;
  options.t_outer = t_outer;
  options.jobs = jobs;

  if (!statement.empty()) {
    return run_statement(statement, ensemble, options, format,
                         RandomStream(seed), std::cout);
  }

  std::istream* in = &std::cin;
  std::ifstream file_in;
  const bool interactive = file.empty();
  if (!file.empty()) {
    file_in.open(file);
    if (!file_in) {
      std::cerr << "error: cannot read " << file << "\n";
      return kExitUsage;
    }
    in = &file_in;
  }
  // One statement per line; blank lines and lines starting with -- skipped.
  std::string line;
  long line_number = 0;
  uint64_t statement_index = 0;
  int status = kExitOk;
  if (interactive) std::cerr << "crossmi> " << std::flush;
  while (std::getline(*in, line)) {
    ++line_number;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line.compare(first, 2, "--") == 0) {
      if (interactive) std::cerr << "crossmi> " << std::flush;
      continue;
    }
    try {
      run_statement(line, ensemble, options, format,
                    RandomStream(seed).child(statement_index++), std::cout);
    } catch (const SyntaxError& e) {
      std::cerr << "line " << line_number << ": " << e.what() << "\n";
      status = kExitUsage;
      if (!interactive) return status;
    } catch (const Error& e) {
      std::cerr << "line " << line_number << ": error: " << e.what() << "\n";
      status = kExitEngine;
      if (!interactive) return status;
    }
    if (interactive) std::cerr << "crossmi> " << std::flush;
  }
  if (interactive) std::cerr << "\n";
  return status;
}

std::map<int, int> parse_given_assignments(const DiscreteBayesNet& net,
                                           const std::string& text) {
  std::map<int, int> fixed;
  if (text.empty()) return fixed;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw Error("--given entries look like var=value");
    }
    const std::string name = item.substr(0, eq);
    const int value = std::stoi(item.substr(eq + 1));
    int index = -1;
    for (size_t i = 0; i < net.size(); ++i) {
      if (net.variables()[i].name == name) index = static_cast<int>(i);
    }
    if (index < 0) throw UnknownVariableError("unknown variable: " + name);
    fixed[index] = value;
  }
  return fixed;
}

VarSet parse_name_list(const DiscreteBayesNet& net, const std::string& text) {
  std::vector<int> indices;
  std::stringstream ss(text);
  std::string name;
  while (std::getline(ss, name, ',')) {
    int index = -1;
    for (size_t i = 0; i < net.size(); ++i) {
      if (net.variables()[i].name == name) index = static_cast<int>(i);
    }
    if (index < 0) throw UnknownVariableError("unknown variable: " + name);
    indices.push_back(index);
  }
  return VarSet(std::move(indices));
}

void write_posterior_file(const std::filesystem::path& path,
                          const CmiPosterior& posterior) {
  std::ofstream out(path);
  write_posterior_csv(out, posterior);
}

int cmd_bench_pair(const std::string& kind, const std::string& out_dir, long n,
                   double noise, int h, long sweeps, uint64_t seed, int jobs,
                   long t) {
  namespace fs = std::filesystem;
  RandomStream data_rng(seed);
  const bool vstruct = kind == "vstruct";
  const auto dataset = vstruct ? gen_vstruct(n, noise, data_rng)
                               : gen_common_cause(n, noise, data_rng);
  const DiscreteBayesNet net =
      vstruct ? vstruct_net(noise) : common_cause_net(noise);
  const Ensemble ensemble = fit_ensemble(dataset, h, sweeps, seed + 1, jobs);

  // The marginally independent pair and the variable whose value couples or
  // decouples it.
  const int pair_a = vstruct ? 0 : 1;
  const int pair_b = vstruct ? 1 : 2;
  const int context_var = vstruct ? 2 : 0;

  CmiQuery marginal;
  marginal.a = VarSet::of({pair_a});
  marginal.b = VarSet::of({pair_b});
  marginal.t = t;
  const CmiPosterior marginal_posterior =
      cmi_posterior(ensemble, marginal, RandomStream(seed).child(10), jobs);

  CmiQuery context = marginal;
  context.condition.fixed = {{context_var, Cell::category(0)}};
  const CmiPosterior context_posterior =
      cmi_posterior(ensemble, context, RandomStream(seed).child(11), jobs);

  const double exact_marginal =
      exact_cmi(net, marginal.a, marginal.b, {});
  const double exact_context =
      exact_cmi(net, marginal.a, marginal.b, {{context_var, 0}});

  fs::create_directories(out_dir);
  write_posterior_file(fs::path(out_dir) / "marginal_cmi.csv",
                       marginal_posterior);
  write_posterior_file(fs::path(out_dir) / "context_cmi.csv",
                       context_posterior);
  std::ofstream report(fs::path(out_dir) / "report.md");
  report << "# " << kind << " bench\n\n"
         << "- rows: " << n << ", noise: " << noise << ", members: " << h
         << ", sweeps: " << sweeps << ", seed: " << seed << "\n"
         << "- pair: (" << dataset->schema().variable(pair_a).name << ", "
         << dataset->schema().variable(pair_b).name << "); context variable: "
         << dataset->schema().variable(context_var).name << " = 0\n\n"
         << "| query | exact (nats) | posterior median | P[CMI < 0.05] |\n"
         << "|---|---|---|---|\n";
  const auto summarize = [&](const char* name, const CmiPosterior& posterior,
                             double exact) {
    std::vector<double> values;
    for (const CmiSample& s : posterior.estimates) values.push_back(s.estimate);
    report << "| " << name << " | " << exact << " | " << median(values)
           << " | " << prob_cmi_in(posterior, {Threshold::Op::kLess, 0.05})
           << " |\n";
  };
  summarize("marginal", marginal_posterior, exact_marginal);
  summarize("context", context_posterior, exact_context);
  std::cout << "wrote " << out_dir << "/report.md\n";
  return kExitOk;
}

int cmd_bench_marks(const std::string& out_dir, long n, int h, long sweeps,
                    uint64_t seed, int jobs, long t, long t_outer) {
  namespace fs = std::filesystem;
  RandomStream data_rng(seed);
  const auto dataset = gen_hub_dataset(n, data_rng);
  const Schema& schema = dataset->schema();
  const Ensemble ensemble = fit_ensemble(dataset, h, sweeps, seed + 1, jobs);
  const int vectors = schema.require("vectors");
  const int analysis = schema.require("analysis");
  const int hub = schema.require("algebra");
  const ContextSpecificReport demo =
      context_specific_demo(ensemble, vectors, analysis, hub, 42.0, 72.0, t,
                            t_outer, RandomStream(seed).child(20), jobs);
  const PartialCorrelationResult pcorr = partial_correlation(*dataset);

  fs::create_directories(out_dir);
  write_posterior_file(fs::path(out_dir) / "cmi_hub_low.csv",
                       demo.posterior_low);
  write_posterior_file(fs::path(out_dir) / "cmi_hub_high.csv",
                       demo.posterior_high);
  write_posterior_file(fs::path(out_dir) / "cmi_hub_marginalized.csv",
                       demo.posterior_marginalized);
  {
    std::ofstream out(fs::path(out_dir) / "partial_correlation.csv");
    write_baseline_csv(out, schema, pcorr.report);
  }
  std::ofstream report(fs::path(out_dir) / "report.md");
  report << "# hub-structure bench\n\n"
         << "- rows: " << n << ", members: " << h << ", sweeps: " << sweeps
         << ", seed: " << seed << "\n\n"
         << "## context-specific CMI(vectors, analysis)\n\n"
         << "| condition | posterior median |\n|---|---|\n"
         << "| algebra = " << demo.hub_low << " | " << demo.median_low << " |\n"
         << "| algebra = " << demo.hub_high << " | " << demo.median_high
         << " |\n"
         << "| algebra marginalized | " << demo.median_marginalized << " |\n\n"
         << "KS statistic between the fixed contexts: "
         << demo.low_vs_high.statistic << " (p = " << demo.low_vs_high.p_value
         << ")\n\n## partial correlation\n\n"
         << "cross-hub pair (vectors, analysis): ";
  for (const PairStat& p : pcorr.report.pairs) {
    if (p.i == vectors && p.j == analysis) {
      report << p.statistic << " (p = " << p.p_value << ", significant: "
             << (p.significant ? "yes" : "no") << ")\n";
    }
  }
  std::cout << "wrote " << out_dir << "/report.md\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ensemble joint-density models and conditional mutual "
               "information queries over tabular data"};
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "ingest a CSV into a workspace");
  std::string csv_path, workspace_dir;
  std::vector<std::string> force_nominal, force_numerical;
  int nominal_threshold = 20;
  ingest->add_option("--csv", csv_path, "input CSV")->required();
  ingest->add_option("--workspace", workspace_dir, "workspace directory")
      ->required();
  ingest->add_option("--nominal", force_nominal, "force a column nominal");
  ingest->add_option("--numerical", force_numerical,
                     "force a column numerical");
  ingest->add_option("--nominal-threshold", nominal_threshold,
                     "max distinct non-numeric values for a nominal guess");

  // fit
  auto* fit = app.add_subcommand("fit", "fit an ensemble");
  int h = 16;
  long sweeps = 200;
  uint64_t seed = 0;
  int jobs = static_cast<int>(std::thread::hardware_concurrency());
  fit->add_option("--workspace", workspace_dir, "workspace directory")
      ->required();
  fit->add_option("-H,--models", h, "ensemble size");
  fit->add_option("--sweeps", sweeps, "full sweeps per chain");
  fit->add_option("--seed", seed, "random seed");
  fit->add_option("--jobs", jobs, "parallel chains");

  // query
  auto* query = app.add_subcommand("query", "run a query or a REPL");
  std::string statement, query_file, format_name = "plain";
  long accuracy = 1000, t_outer = 100;
  query->add_option("--workspace", workspace_dir, "workspace directory")
      ->required();
  query->add_option("statement", statement, "one statement (else REPL/file)");
  query->add_option("--file", query_file, "statements, one per line");
  query->add_option("--format", format_name, "plain, csv or json");
  query->add_option("-T,--accuracy", accuracy, "inner Monte Carlo samples");
  query->add_option("--t-outer", t_outer, "marginalized-condition draws");
  query->add_option("--seed", seed, "random seed");
  query->add_option("--jobs", jobs, "parallel members");

  // depmatrix
  auto* depmatrix =
      app.add_subcommand("depmatrix", "pairwise dependence-probability bound");
  std::string out_csv;
  depmatrix->add_option("--workspace", workspace_dir, "workspace directory")
      ->required();
  depmatrix->add_option("--out", out_csv, "output CSV")->required();

  // exact-cmi
  auto* exact =
      app.add_subcommand("exact-cmi", "exact CMI on a discrete network");
  std::string net_path, a_names, b_names, given_text;
  exact->add_option("--net", net_path, "network JSON")->required();
  exact->add_option("--a", a_names, "first variable set, comma separated")
      ->required();
  exact->add_option("--b", b_names, "second variable set, comma separated")
      ->required();
  exact->add_option("--given", given_text, "fixed values, var=value pairs");

  // bench
  auto* bench = app.add_subcommand("bench", "synthetic benchmark reports");
  bench->require_subcommand(1);
  std::string bench_out = "bench-out";
  long bench_n = 500;
  double bench_noise = 0.1;
  int bench_h = 16;
  long bench_sweeps = 200;
  long bench_t = 1000, bench_t_outer = 64;
  auto add_bench_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", bench_out, "output directory");
    cmd->add_option("-H,--models", bench_h, "ensemble size");
    cmd->add_option("--sweeps", bench_sweeps, "sweeps per chain");
    cmd->add_option("--seed", seed, "random seed");
    cmd->add_option("--jobs", jobs, "parallel chains");
    cmd->add_option("-T,--accuracy", bench_t, "inner Monte Carlo samples");
  };
  auto* bench_vstruct = bench->add_subcommand("vstruct", "noisy-XOR recovery");
  auto* bench_cc = bench->add_subcommand("common-cause", "noisy-copy recovery");
  for (CLI::App* cmd : {bench_vstruct, bench_cc}) {
    add_bench_common(cmd);
    cmd->add_option("--n", bench_n, "rows");
    cmd->add_option("--noise", bench_noise, "flip probability");
  }
  auto* bench_marks = bench->add_subcommand("marks", "hub-structure contrast");
  add_bench_common(bench_marks);
  bench_marks->add_option("--n", bench_n, "rows");
  bench_marks->add_option("--t-outer", bench_t_outer,
                          "marginalized-condition draws");

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest->parsed()) {
      IngestOptions options;
      options.nominal_threshold = nominal_threshold;
      for (const std::string& name : force_nominal) {
        options.overrides[name].forced_type = StatType::kNominal;
      }
      for (const std::string& name : force_numerical) {
        if (options.overrides.count(name)) {
          throw IngestError("conflicting overrides for column " + name);
        }
        options.overrides[name].forced_type = StatType::kNumerical;
      }
      IngestReport report;
      const Workspace ws =
          create_workspace(csv_path, workspace_dir, options, &report);
      std::cout << "ingested " << ws.dataset->row_count() << " rows, "
                << ws.dataset->variable_count() << " variables\n";
      for (const std::string& dropped : report.dropped_columns) {
        std::cout << "dropped all-missing column: " << dropped << "\n";
      }
      for (size_t v = 0; v < report.missing_rate.size(); ++v) {
        std::printf("  %-24s %s  missing %.1f%%\n",
                    ws.dataset->schema().variable(static_cast<int>(v)).name.c_str(),
                    ws.dataset->schema().variable(static_cast<int>(v)).is_nominal()
                        ? "nominal  "
                        : "numerical",
                    100.0 * report.missing_rate[v]);
      }
      return kExitOk;
    }
    if (fit->parsed()) {
      const Workspace ws = open_workspace(workspace_dir);
      const Ensemble ensemble = fit_workspace(ws, h, sweeps, seed, jobs);
      std::cout << "fitted " << ensemble.size() << " members (" << sweeps
                << " sweeps) into " << workspace_dir << "\n";
      return kExitOk;
    }
    if (query->parsed()) {
      return cmd_query(workspace_dir, statement, query_file, format_name,
                       accuracy, t_outer, seed, jobs);
    }
    if (depmatrix->parsed()) {
      const Workspace ws = open_workspace(workspace_dir);
      const Ensemble ensemble = load_workspace_ensemble(ws);
      const DependenceMatrix matrix = pairwise_dependence_matrix(ensemble);
      std::ofstream out(out_csv);
      write_dependence_matrix_csv(out, ensemble.schema(), matrix);
      if (!out) throw Error("cannot write " + out_csv);
      std::cout << "wrote " << out_csv << "\n";
      return kExitOk;
    }
    if (exact->parsed()) {
      std::ifstream in(net_path);
      if (!in) throw Error("cannot read " + net_path);
      std::stringstream buffer;
      buffer << in.rdbuf();
      const DiscreteBayesNet net = DiscreteBayesNet::from_json(buffer.str());
      const double value =
          exact_cmi(net, parse_name_list(net, a_names),
                    parse_name_list(net, b_names),
                    parse_given_assignments(net, given_text));
      std::cout << nlohmann::json(value).dump() << "\n";
      return kExitOk;
    }
    if (bench_vstruct->parsed() || bench_cc->parsed()) {
      return cmd_bench_pair(bench_vstruct->parsed() ? "vstruct" : "common-cause",
                            bench_out, bench_n, bench_noise, bench_h,
                            bench_sweeps, seed, jobs, bench_t);
    }
    if (bench_marks->parsed()) {
      return cmd_bench_marks(bench_out, bench_n, bench_h, bench_sweeps, seed,
                             jobs, bench_t, bench_t_outer);
    }
  } catch (const SyntaxError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitEngine;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitEngine;
  }
  return kExitUsage;
}
