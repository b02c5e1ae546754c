// covfit: maximum likelihood fitting of Gaussian covariance graph models
// (marginal-independence models over bi-directed graphs), with graph
// separation queries, latent projection and algorithm comparison.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "covfit/anderson.hpp"
#include "covfit/errors.hpp"
#include "covfit/gaussian.hpp"
#include "covfit/graph.hpp"
#include "covfit/icf.hpp"
#include "covfit/instances.hpp"
#include "covfit/io.hpp"
#include "covfit/log.hpp"
#include "covfit/report.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNegativeVerdict = 1;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(csv);
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct DataFlags {
  std::string data_path;
  std::string cov_path;
  std::string cor_path;
  int n = 0;
  bool centered = false;
  bool transpose = false;
};

void add_data_flags(CLI::App* cmd, DataFlags& flags) {
  auto* data = cmd->add_option("--data", flags.data_path,
                               "data CSV, one row per variable: label, v1, ..., vn");
  auto* cov = cmd->add_option("--cov", flags.cov_path,
                              "covariance CSV with a header row of labels");
  auto* cor = cmd->add_option("--cor", flags.cor_path,
                              "correlation table: lower-triangular rows plus an SD row");
  cmd->add_option("--n", flags.n, "sample size (required with --cov / --cor)");
  cmd->add_flag("--centered", flags.centered,
                "treat the data as zero-mean: skip mean subtraction (requires n >= p "
                "instead of n >= p+1)");
  cmd->add_flag("--transpose", flags.transpose, "data CSV rows are subjects, header row labels");
  data->excludes(cov);
  data->excludes(cor);
  cov->excludes(cor);
}

covfit::SampleSummary load_summary(const DataFlags& flags,
                                   const std::vector<std::string>& graph_labels) {
  const int sources = int(!flags.data_path.empty()) + int(!flags.cov_path.empty()) +
                      int(!flags.cor_path.empty());
  if (sources != 1) {
    throw CLI::ValidationError("exactly one of --data, --cov, --cor is required");
  }
  covfit::SampleSummary summary;
  if (!flags.data_path.empty()) {
    summary = covfit::read_data_csv(flags.data_path, flags.centered, flags.transpose);
  } else {
    if (flags.n <= 0) {
      throw CLI::ValidationError("--n is required with --cov / --cor");
    }
    covfit::CovarianceMatrix cov = !flags.cov_path.empty()
                                       ? covfit::read_covariance_csv(flags.cov_path)
                                       : covfit::read_correlation_table(flags.cor_path);
    summary = covfit::summary_from_covariance(std::move(cov), flags.n);
  }
  summary.cov = covfit::reordered(summary.cov, graph_labels);
  return summary;
}

struct FitFlags {
  std::string graph_path;
  DataFlags data;
  std::string algorithm = "icf";
  double tol_sigma = covfit::IcfOptions{}.tol_sigma;
  double tol_residual = covfit::IcfOptions{}.tol_residual;
  int max_sweeps = covfit::IcfOptions{}.max_sweeps;
  std::string start = "identity";
  int restarts = 0;
  std::uint64_t seed = 0;
  std::string out_path;
};

covfit::FitReport report_common(const covfit::BidirectedGraph& g,
                                const covfit::SampleSummary& summary) {
  covfit::FitReport r;
  r.labels = g.labels();
  r.p = g.size();
  r.n = summary.n;
  r.graph_digest = covfit::digest_graph(g);
  r.data_digest = covfit::digest_summary(summary);
  return r;
}

void derive_moments(covfit::FitReport& r, const covfit::CovarianceMatrix& sigma, bool pd) {
  r.sigma = sigma.entries();
  if (pd) {
    r.correlations = sigma.correlations();
    r.sds = sigma.standard_deviations();
  } else {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.correlations = Eigen::MatrixXd::Constant(r.p, r.p, nan);
    r.sds = Eigen::VectorXd::Constant(r.p, nan);
  }
}

void emit_report(const covfit::FitReport& report, const std::string& out_path) {
  std::cout << covfit::to_human_table(report);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) {
      throw covfit::InputError("cannot write '" + out_path + "'");
    }
    out << covfit::to_json(report) << "\n";
  }
}

int run_fit(const FitFlags& flags) {
  const covfit::BidirectedGraph g = covfit::parse_graph_file(flags.graph_path).to_bidirected();
  const covfit::SampleSummary summary = load_summary(flags.data, g.labels());

  covfit::FitReport report = report_common(g, summary);
  report.algorithm = flags.algorithm;
  const auto t0 = std::chrono::steady_clock::now();
  int exit_code = kExitOk;
  if (flags.algorithm == "icf") {
    covfit::IcfOptions opts;
    opts.max_sweeps = flags.max_sweeps;
    opts.tol_sigma = flags.tol_sigma;
    opts.tol_residual = flags.tol_residual;
    opts.restarts = flags.restarts;
    opts.seed = flags.seed;
    if (flags.start == "identity") {
      opts.start = covfit::StartPoint::identity;
    } else if (flags.start == "diag") {
      opts.start = covfit::StartPoint::diagonal_of_s;
    } else if (flags.start.rfind("file:", 0) == 0) {
      opts.start = covfit::StartPoint::user_supplied;
      opts.user_start =
          covfit::reordered(covfit::read_covariance_csv(flags.start.substr(5)), g.labels())
              .entries();
    } else {
      throw CLI::ValidationError("--start must be identity, diag or file:PATH");
    }
    const covfit::FitResult fit = covfit::fit_icf(summary, g, opts);
    report.status = covfit::to_string(fit.status);
    report.converged = fit.converged;
    report.iterations = fit.sweeps_used;
    report.loglik = fit.loglik_trace.back();
    report.residual = fit.residual;
    derive_moments(report, fit.sigma_hat, true);
  } else if (flags.algorithm == "anderson") {
    covfit::AndersonOptions opts;
    opts.max_iters = flags.max_sweeps;
    opts.tol = flags.tol_sigma;
    const auto [fit, trace] = covfit::fit_anderson(summary, g, opts);
    report.status = covfit::to_string(fit.status);
    report.converged = fit.status == covfit::AndersonStatus::converged;
    report.iterations = fit.iterations;
    report.loglik = fit.loglik;
    report.residual = fit.residual;
    derive_moments(report, fit.sigma_hat, fit.final_pd);
    if (fit.status == covfit::AndersonStatus::non_pd_iterate ||
        fit.status == covfit::AndersonStatus::singular_system) {
      exit_code = kExitNumerical;
    }
  } else {
    throw CLI::ValidationError("--algorithm must be icf or anderson");
  }
  const auto t1 = std::chrono::steady_clock::now();
  report.wall_time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  emit_report(report, flags.out_path);
  return exit_code;
}

struct MsepFlags {
  std::string graph_path;
  std::string a, b, given;
};

int run_msep(const MsepFlags& flags) {
  const covfit::BidirectedGraph g = covfit::parse_graph_file(flags.graph_path).to_bidirected();
  covfit::SeparationQuery q;
  q.set_a = split_list(flags.a);
  q.set_b = split_list(flags.b);
  q.given = split_list(flags.given);
  auto overlaps = [](const std::vector<std::string>& x, const std::vector<std::string>& y) {
    for (const auto& v : x) {
      if (std::find(y.begin(), y.end(), v) != y.end()) return true;
    }
    return false;
  };
  if (overlaps(q.set_a, q.set_b) || overlaps(q.set_a, q.given) || overlaps(q.set_b, q.given)) {
    throw CLI::ValidationError("--a, --b and --given must be pairwise disjoint");
  }
  const auto path = covfit::m_connecting_path(g, q);
  if (!path) {
    std::cout << "separated\n";
    return kExitOk;
  }
  std::cout << "connected\n";
  std::cout << "path:";
  for (std::size_t k = 0; k < path->size(); ++k) {
    std::cout << (k ? " <-> " : " ") << g.label((*path)[k]);
  }
  std::cout << "\n";
  return kExitNegativeVerdict;
}

int run_equiv(const std::string& graph_path) {
  const covfit::GraphFile gf = covfit::parse_graph_file(graph_path);
  if (gf.has_directed_content()) {
    const covfit::Dag d = gf.to_dag();
    const auto witness = covfit::find_unshielded_noncollider(d);
    if (!witness) {
      std::cout << "equivalent bi-directed graph exists\n";
      return kExitOk;
    }
    std::cout << "no equivalent bi-directed graph\n";
    std::cout << "unshielded non-collider: (" << d.label((*witness)[0]) << ", "
              << d.label((*witness)[1]) << ", " << d.label((*witness)[2]) << ")\n";
    return kExitNegativeVerdict;
  }
  const covfit::BidirectedGraph g = gf.to_bidirected();
  const auto witness = covfit::find_forbidden_induced_subgraph(g);
  if (!witness) {
    std::cout << "equivalent DAG exists\n";
    return kExitOk;
  }
  std::cout << "no equivalent DAG\n";
  std::cout << (witness->kind == covfit::ForbiddenSubgraph::Kind::path4 ? "induced path: "
                                                                        : "induced cycle: ");
  for (std::size_t k = 0; k < witness->vertices.size(); ++k) {
    std::cout << (k ? " <-> " : "") << g.label(witness->vertices[k]);
  }
  if (witness->kind == covfit::ForbiddenSubgraph::Kind::cycle4) {
    std::cout << " <-> " << g.label(witness->vertices[0]);
  }
  std::cout << "\n";
  return kExitNegativeVerdict;
}

int run_project(const std::string& dag_path) {
  const covfit::Dag d = covfit::parse_graph_file(dag_path).to_dag();
  std::cout << covfit::to_graph_text(covfit::latent_projection(d));
  return kExitOk;
}

struct CompareFlags {
  std::string graph_path;
  DataFlags data;
  int random = 0;
  std::string seeds;
  int p = 5;
  double q = 0.4;
  int n = 50;
  std::uint64_t seed = 1;
  std::string out_path;
};

covfit::BenchRecord compare_one(const covfit::SampleSummary& summary,
                                const covfit::BidirectedGraph& g) {
  covfit::BenchRecord rec;
  rec.p = g.size();
  rec.edge_count = g.edge_count();
  rec.n = summary.n;
  // per-instance problems become statuses; the stream keeps going
  std::optional<covfit::FitResult> icf;
  try {
    icf = covfit::fit_icf(summary, g);
    rec.icf_status = covfit::to_string(icf->status);
    rec.icf_loglik = icf->loglik_trace.back();
    rec.icf_sweeps = icf->sweeps_used;
    rec.icf_residual = icf->residual;
  } catch (const std::runtime_error& e) {
    rec.icf_status = std::string("error: ") + e.what();
    rec.icf_loglik = std::numeric_limits<double>::quiet_NaN();
    rec.icf_residual = std::numeric_limits<double>::quiet_NaN();
  }
  std::optional<covfit::AndersonResult> anderson;
  try {
    auto [result, trace] = covfit::fit_anderson(summary, g);
    anderson = std::move(result);
    rec.anderson_status = covfit::to_string(anderson->status);
    rec.anderson_iterations = anderson->iterations;
    if (anderson->final_pd) {
      rec.anderson_loglik = anderson->loglik;
    }
  } catch (const std::runtime_error& e) {
    rec.anderson_status = std::string("error: ") + e.what();
  }
  if (icf && icf->converged && anderson &&
      anderson->status == covfit::AndersonStatus::converged) {
    rec.agree =
        (icf->sigma_hat.entries() - anderson->sigma_hat.entries()).cwiseAbs().maxCoeff() <= 1e-6;
  }
  return rec;
}

void tally(covfit::BenchSummary& s, const covfit::BenchRecord& rec) {
  ++s.instances;
  if (rec.icf_status == "converged") ++s.icf_converged;
  if (rec.agree.has_value()) {
    ++s.both_converged;
    if (*rec.agree) ++s.agreements;
  }
  if (rec.anderson_status == "non_pd_iterate") ++s.anderson_non_pd;
  if (rec.anderson_status == "max_iters_reached") ++s.anderson_max_iters;
  if (rec.anderson_status == "singular_system") ++s.anderson_singular;
}

int run_compare(const CompareFlags& flags) {
  std::ostringstream out;
  covfit::BenchSummary summary_row;
  if (flags.random > 0 || !flags.seeds.empty()) {
    std::vector<std::uint64_t> seeds;
    for (const std::string& tok : split_list(flags.seeds)) {
      try {
        seeds.push_back(std::stoull(tok));
      } catch (const std::exception&) {
        throw CLI::ValidationError("--seeds must be a comma-separated list of integers");
      }
    }
    for (int k = 0; k < flags.random; ++k) {
      seeds.push_back(covfit::mix_seed(flags.seed, static_cast<std::uint64_t>(k)));
    }
    for (const std::uint64_t seed : seeds) {
      const covfit::RandomInstance inst = covfit::make_instance(seed, flags.p, flags.q, flags.n);
      covfit::BenchRecord rec = compare_one(inst.summary, inst.graph);
      rec.seed = seed;
      rec.edge_prob = flags.q;
      tally(summary_row, rec);
      out << covfit::to_json(rec) << "\n";
    }
  } else {
    if (flags.graph_path.empty()) {
      throw CLI::ValidationError("compare needs --graph with a data source, or --random N");
    }
    const covfit::BidirectedGraph g = covfit::parse_graph_file(flags.graph_path).to_bidirected();
    const covfit::SampleSummary summary = load_summary(flags.data, g.labels());
    covfit::BenchRecord rec = compare_one(summary, g);
    tally(summary_row, rec);
    out << covfit::to_json(rec) << "\n";
  }
  out << covfit::to_json(summary_row) << "\n";
  std::cout << out.str();
  if (!flags.out_path.empty()) {
    std::ofstream file(flags.out_path);
    if (!file) {
      throw covfit::InputError("cannot write '" + flags.out_path + "'");
    }
    file << out.str();
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ML estimation in Gaussian graphical models for marginal independence"};
  app.require_subcommand(1);

  FitFlags fit_flags;
  CLI::App* fit = app.add_subcommand("fit", "fit a covariance graph model");
  fit->add_option("--graph", fit_flags.graph_path, "bi-directed graph file")->required();
  add_data_flags(fit, fit_flags.data);
  fit->add_option("--algorithm", fit_flags.algorithm, "icf (default) or anderson");
  fit->add_option("--tol-sigma", fit_flags.tol_sigma,
                  "per-sweep max-abs change tolerance, relative to max |S|");
  fit->add_option("--tol-residual", fit_flags.tol_residual,
                  "likelihood-equation residual target");
  fit->add_option("--max-sweeps", fit_flags.max_sweeps, "sweep / iteration cap");
  fit->add_option("--start", fit_flags.start, "identity, diag or file:PATH");
  fit->add_option("--restarts", fit_flags.restarts, "extra fits from random feasible starts");
  fit->add_option("--seed", fit_flags.seed, "seed for --restarts");
  fit->add_option("--out", fit_flags.out_path, "write the machine-readable report here");

  MsepFlags msep_flags;
  CLI::App* msep = app.add_subcommand("msep", "m-separation query on a bi-directed graph");
  msep->add_option("--graph", msep_flags.graph_path, "bi-directed graph file")->required();
  msep->add_option("--a", msep_flags.a, "comma-separated vertex set A")->required();
  msep->add_option("--b", msep_flags.b, "comma-separated vertex set B")->required();
  msep->add_option("--given", msep_flags.given, "comma-separated conditioning set");

  std::string equiv_path;
  CLI::App* equiv = app.add_subcommand(
      "equiv", "Markov-equivalence check (bi-directed graph vs DAG, decided by the file)");
  equiv->add_option("--graph", equiv_path, "graph or DAG file")->required();

  std::string project_path;
  CLI::App* project =
      app.add_subcommand("project", "latent projection of a DAG onto its observed vertices");
  project->add_option("--dag", project_path, "DAG file with latent markers")->required();

  CompareFlags cmp_flags;
  CLI::App* compare =
      app.add_subcommand("compare", "run both algorithms and report agreement");
  compare->add_option("--graph", cmp_flags.graph_path, "bi-directed graph file");
  add_data_flags(compare, cmp_flags.data);
  compare->add_option("--random", cmp_flags.random, "number of random instances");
  compare->add_option("--seeds", cmp_flags.seeds,
                      "comma-separated explicit instance seeds (combined with --p/--q/--n)");
  compare->add_option("--p", cmp_flags.p, "variables per random instance");
  compare->add_option("--q", cmp_flags.q, "edge probability for random instances");
  compare->add_option("--seed", cmp_flags.seed, "base seed for random instances");
  compare->add_option("--out", cmp_flags.out_path, "also write the record stream here");

  try {
    app.parse(argc, argv);
    if (compare->parsed() && (cmp_flags.random > 0 || !cmp_flags.seeds.empty()) &&
        cmp_flags.data.n > 0) {
      cmp_flags.n = cmp_flags.data.n;  // --n doubles as the random-instance sample size
    }
    if (fit->parsed()) return run_fit(fit_flags);
    if (msep->parsed()) return run_msep(msep_flags);
    if (equiv->parsed()) return run_equiv(equiv_path);
    if (project->parsed()) return run_project(project_path);
    if (compare->parsed()) return run_compare(cmp_flags);
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const covfit::NumericalError& e) {
    std::cerr << "covfit: numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const covfit::ModelError& e) {
    std::cerr << "covfit: " << e.what() << "\n";
    return kExitData;
  } catch (const covfit::InputError& e) {
    std::cerr << "covfit: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "covfit: " << e.what() << "\n";
    return kExitData;
  }
}
