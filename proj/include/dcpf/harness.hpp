#pragma once

// Experiment orchestration behind the `dcpf` command-line tool.

#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dcpf/baselines.hpp"
#include "dcpf/config.hpp"
#include "dcpf/dynamics.hpp"
#include "dcpf/metrics.hpp"

namespace dcpf {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNumeric = 3 };

struct HarnessOptions {
  std::filesystem::path output_dir = ".";
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  std::ostream* out = &std::cout;
  std::ostream* err = &std::cerr;
};

/// The problem an algorithm actually runs on: discrete baselines mix with a
/// doubly stochastic rescaling of the configured graph.
inline Problem problem_for(const ExperimentConfig& cfg, Algorithm algorithm) {
  if (algorithm != Algorithm::cg_discrete && algorithm != Algorithm::defw) return cfg.problem;
  Problem p = cfg.problem;
  try {
    validate_mixing(p.graph);
  } catch (const AssumptionError&) {
    p.graph = doubly_stochastic(p.graph);
  }
  return p;
}

inline RunRecord execute(const ExperimentConfig& cfg, Algorithm algorithm, const AgentMatrix& x0,
                         const ReferenceSolution& reference, const StateObserver& observer = {}) {
  const Problem problem = problem_for(cfg, algorithm);
  RunRecord rec;
  switch (algorithm) {
    case Algorithm::cg_ode: rec = simulate(problem, cfg.schedule, cfg.integrator, x0, reference, observer); break;
    case Algorithm::cg_discrete: rec = run_cg_discrete(problem, cfg.discrete, x0, reference, observer); break;
    case Algorithm::defw: rec = run_defw(problem, cfg.discrete, x0, reference, observer); break;
    case Algorithm::projected: rec = run_projected(problem, cfg.projected, x0, reference, observer); break;
  }
  Json echo = cfg.resolved();
  echo["algorithm"] = std::string(to_string(algorithm));
  echo["reference"] = {{"value", reference.value}, {"fw_gap", reference.fw_gap}, {"iterations", reference.iterations}};
  rec.config_echo = echo.dump(2);
  return rec;
}

/// Runs `body`, mapping exceptions to exit codes with a diagnostic on `err`.
inline int guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const AssumptionError& e) {
    err << "assumption violated: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  }
}

namespace detail {

inline std::string output_path(const HarnessOptions& opts, const std::string& file) {
  std::filesystem::create_directories(opts.output_dir);
  return (opts.output_dir / file).string();
}

inline std::string stem_of(const std::string& file) { return std::filesystem::path(file).stem().string(); }

inline void print_final(std::ostream& out, std::string_view label, const RunRecord& rec) {
  out << std::left << std::setw(12) << label << " t=" << format_double(rec.times.back())
      << " consensus=" << format_double(rec.consensus_err.back())
      << " tracking=" << format_double(rec.tracking_err.back())
      << " gap=" << format_double(rec.optimality_gap.back()) << " fw_gap=" << format_double(rec.fw_gap.back())
      << '\n';
}

}  // namespace detail

/// `dcpf run`: one algorithm, one CSV.
inline int run(const std::string& config_path, const HarnessOptions& opts = {}) {
  return guarded(
      [&] {
        const ExperimentConfig cfg = load_experiment(config_path, opts.seed);
        if (cfg.algorithms.size() != 1) throw ConfigError("run expects exactly one algorithm; use compare");
        const ReferenceSolution ref = reference_solution(cfg.problem.objective, cfg.problem.set, cfg.reference_tol);
        const RunRecord rec = execute(cfg, cfg.algorithms.front(), cfg.initial_positions(), ref);
        const std::string csv = detail::output_path(opts, cfg.output);
        write_text_file(csv, to_csv(rec));
        write_text_file(detail::output_path(opts, detail::stem_of(cfg.output) + ".config.json"), rec.config_echo + "\n");
        if (!opts.quiet) {
          detail::print_final(*opts.out, to_string(cfg.algorithms.front()), rec);
          *opts.out << "wrote " << csv << '\n';
        }
        return int{kExitOk};
      },
      *opts.err);
}

inline constexpr std::string_view kMergedCsvHeader =
    "algorithm,iteration,wall_s,t,consensus_err,tracking_err,optimality_gap,fw_gap";

/// `dcpf compare`: every listed algorithm from the same x0, one CSV each plus
/// a merged CSV keyed by iteration and wall-clock.
inline int compare(const std::string& config_path, const HarnessOptions& opts = {}) {
  return guarded(
      [&] {
        const ExperimentConfig cfg = load_experiment(config_path, opts.seed);
        if (cfg.algorithms.size() < 2) throw ConfigError("compare needs at least two algorithms");
        const ReferenceSolution ref = reference_solution(cfg.problem.objective, cfg.problem.set, cfg.reference_tol);
        const AgentMatrix x0 = cfg.initial_positions();
        const std::string stem = detail::stem_of(cfg.output);
        std::string merged = std::string(kMergedCsvHeader) + "\n";
        for (Algorithm a : cfg.algorithms) {
          const RunRecord rec = execute(cfg, a, x0, ref);
          write_text_file(detail::output_path(opts, stem + "_" + std::string(to_string(a)) + ".csv"), to_csv(rec));
          for (std::size_t k = 0; k < rec.size(); ++k) {
            merged += std::string(to_string(a)) + ',' + std::to_string(rec.iterations[k]) + ',' +
                      format_double(rec.wall_seconds[k]) + ',' + format_double(rec.times[k]) + ',' +
                      format_double(rec.consensus_err[k]) + ',' + format_double(rec.tracking_err[k]) + ',' +
                      format_double(rec.optimality_gap[k]) + ',' + format_double(rec.fw_gap[k]) + '\n';
          }
          if (!opts.quiet) detail::print_final(*opts.out, to_string(a), rec);
        }
        const std::string merged_path = detail::output_path(opts, stem + "_merged.csv");
        write_text_file(merged_path, merged);
        if (!opts.quiet) *opts.out << "wrote " << merged_path << '\n';
        return int{kExitOk};
      },
      *opts.err);
}

struct BenchRow {
  Subproblem kind;
  std::string set;
  Index dim;
  TimingResult timing;
};

/// The set a bench family uses for `kind` at dimension n. Polytopes are
/// cross-polytopes given by their 2n vertices.
inline FeasibleSet bench_set(const std::string& family, Subproblem kind, Index n, double radius) {
  std::string name = family;
  if (family == "box_vs_polytope") name = kind == Subproblem::lmo ? "box" : "polytope";
  if (name == "box") return FeasibleSet::uniform_box(n, -radius, radius);
  if (name == "simplex") return FeasibleSet::simplex(n, radius);
  if (name == "l1ball") return FeasibleSet::l1_ball(n, radius);
  if (name == "polytope") {
    Matrix verts(2 * n, n);
    verts << radius * Matrix::Identity(n, n), -radius * Matrix::Identity(n, n);
    return FeasibleSet::polytope(std::move(verts));
  }
  throw ConfigError("unknown set family '" + family + "'");
}

/// Times lmo and projection at every dimension; single-threaded.
inline std::vector<BenchRow> bench_subproblems(const BenchConfig& cfg) {
  if (cfg.dims.empty()) throw ConfigError("bench needs at least one dimension");
  if (cfg.repeats < kMinTimingRepeats) throw ConfigError("bench repeats below minimum");
  std::vector<BenchRow> rows;
  for (Index n : cfg.dims) {
    Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(n)));
    Vector probe(n);
    for (Index k = 0; k < n; ++k) probe(k) = rng.uniform(-2.0 * cfg.radius, 2.0 * cfg.radius);
    for (Subproblem kind : {Subproblem::lmo, Subproblem::projection}) {
      const FeasibleSet set = bench_set(cfg.set_kind, kind, n, cfg.radius);
      rows.push_back({kind, std::string(set.kind()), n, time_subproblem(kind, set, probe, cfg.repeats)});
    }
  }
  return rows;
}

inline std::string timing_csv(const std::vector<BenchRow>& rows) {
  std::string out = "kind,set,dim,mean_ns,median_ns\n";
  for (const auto& r : rows) {
    out += std::string(to_string(r.kind)) + ',' + r.set + ',' + std::to_string(r.dim) + ',' +
           format_double(r.timing.mean_ns) + ',' + format_double(r.timing.median_ns) + '\n';
  }
  return out;
}

/// Table with one row per subproblem kind and one column per dimension (msec).
inline std::string timing_table(const std::vector<BenchRow>& rows) {
  std::vector<Index> dims;
  for (const auto& r : rows) {
    if (std::find(dims.begin(), dims.end(), r.dim) == dims.end()) dims.push_back(r.dim);
  }
  std::ostringstream os;
  os << std::left << std::setw(30) << "dimensions";
  for (Index n : dims) os << std::setw(14) << ("n=" + std::to_string(n));
  os << '\n';
  for (Subproblem kind : {Subproblem::lmo, Subproblem::projection}) {
    std::string label;
    for (const auto& r : rows) {
      if (r.kind == kind) label = std::string(to_string(kind)) + " " + r.set + " (msec)";
    }
    os << std::setw(30) << label;
    for (Index n : dims) {
      for (const auto& r : rows) {
        if (r.kind == kind && r.dim == n) {
          std::ostringstream cell;
          cell << std::setprecision(4) << r.timing.mean_ns * 1e-6;
          os << std::setw(14) << cell.str();
        }
      }
    }
    os << '\n';
  }
  return os.str();
}

/// `dcpf bench`: subproblem timing table.
inline int bench(const std::string& config_path, const HarnessOptions& opts = {}) {
  return guarded(
      [&] {
        BenchConfig cfg = parse_bench(load_json(config_path));
        if (opts.seed) cfg.seed = *opts.seed;
        const auto rows = bench_subproblems(cfg);
        const std::string csv = detail::output_path(opts, cfg.output);
        write_text_file(csv, timing_csv(rows));
        if (!opts.quiet) *opts.out << timing_table(rows) << "wrote " << csv << '\n';
        return int{kExitOk};
      },
      *opts.err);
}

}  // namespace dcpf
