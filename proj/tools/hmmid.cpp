// Command-line front end: simulate / estimate / benchmark / validate.
// Exit codes: 0 success, 1 validation or input error, 2 numerical failure.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>

#include "hmmid/benchmark.hpp"
#include "hmmid/estimators.hpp"
#include "hmmid/io.hpp"
#include "hmmid/random_system.hpp"
#include "hmmid/simulate.hpp"
#include "hmmid/stationary.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;

hmmid::ObservationSequence read_obs_arg(const std::string& path) {
  if (path == "-") return hmmid::read_observations(std::cin, "<stdin>");
  return hmmid::read_observations_file(path);
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> parts;
  std::istringstream is(csv);
  std::string part;
  while (std::getline(is, part, ',')) {
    if (!part.empty()) parts.push_back(part);
  }
  return parts;
}

std::vector<long> parse_sizes(const std::string& csv) {
  std::vector<long> sizes;
  for (const std::string& part : split_list(csv)) {
    const double v = std::stod(part);
    sizes.push_back(static_cast<long>(v));
  }
  return sizes;
}

std::vector<hmmid::Arm> parse_arms(const std::string& csv) {
  std::vector<hmmid::Arm> arms;
  for (const std::string& part : split_list(csv)) {
    const auto arm = hmmid::arm_from_string(part);
    if (!arm) throw std::invalid_argument("unknown arm '" + part + "'");
    arms.push_back(*arm);
  }
  return arms;
}

hmmid::PolytopeBound resolve_bound(const std::string& bound_flag,
                                   const std::string& bound_matrix_path,
                                   const hmmid::HmmModel& model) {
  if (!bound_matrix_path.empty()) {
    const hmmid::Matrix L =
        hmmid::read_matrix_file(bound_matrix_path, model.num_states, model.num_states);
    return hmmid::polytope_from_elementwise_P_bound(L);
  }
  if (bound_flag == "auto") return hmmid::default_bound(model);
  const auto parts = split_list(bound_flag);
  hmmid::Vector lower(static_cast<int>(parts.size()));
  for (size_t i = 0; i < parts.size(); ++i) lower(static_cast<int>(i)) = std::stod(parts[i]);
  if (lower.size() != model.num_states)
    throw std::invalid_argument("bound list must have X entries");
  return hmmid::make_elementwise_bound(std::move(lower));
}

struct KeyValueConfig {
  std::map<std::string, std::string> entries;
};

KeyValueConfig read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw hmmid::ParseError(path + ":0: cannot open config file");
  KeyValueConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw hmmid::ParseError(path + ":" + std::to_string(line_no) +
                              ": expected key=value");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    cfg.entries[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return cfg;
}

int run_validate(const std::string& model_path, const std::string& level_name) {
  const hmmid::HmmModel model = hmmid::read_model_file(model_path);
  const auto level = level_name == "structural" ? hmmid::ValidationLevel::structural
                                                : hmmid::ValidationLevel::assumption1;
  const hmmid::ValidationReport report = hmmid::validate_model(model, level);
  std::cout << "structural=" << (report.structural_ok ? "pass" : "fail") << '\n';
  if (level == hmmid::ValidationLevel::assumption1)
    std::cout << "assumption1=" << (report.assumption1_ok ? "pass" : "fail") << '\n';
  for (const auto& failure : report.failures) std::cout << "failure=" << failure << '\n';
  return report.ok(level) ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transition-matrix estimation for HMMs with a known sensor"};
  app.require_subcommand(1);

  // --- simulate ---
  auto* sim = app.add_subcommand("simulate", "Sample an observation sequence from a model file");
  std::string sim_model, sim_out = "-", sim_states_out;
  long sim_n = 1000;
  std::uint64_t sim_seed = 1;
  sim->add_option("--model", sim_model, "model file")->required();
  sim->add_option("--n", sim_n, "number of observations")->required();
  sim->add_option("--seed", sim_seed, "rng seed");
  sim->add_option("--out", sim_out, "output file ('-' for stdout)");
  sim->add_option("--states-out", sim_states_out, "also write the hidden state path");

  // --- estimate ---
  auto* est = app.add_subcommand("estimate", "Estimate the transition matrix from observations");
  std::string est_method, est_model, est_obs = "-", est_bound = "auto";
  std::string est_bound_matrix, est_em_init = "random", est_moments_out, est_dump_qp;
  double est_em_tol = 1e-6;
  int est_em_max_iter = 500;
  std::uint64_t est_seed = 1;
  est->add_option("--method", est_method, "mm | 2s | em")->required();
  est->add_option("--model", est_model, "model file providing B and pi0 (P is the reference)")
      ->required();
  est->add_option("--obs", est_obs, "observation file ('-' for stdin)");
  est->add_option("--bound", est_bound, "'auto' or comma-separated lower bound on pi_inf");
  est->add_option("--bound-matrix", est_bound_matrix,
                  "derive the bound from an elementwise lower-bound matrix on P (X rows of X numbers)");
  est->add_option("--em-init", est_em_init, "em initializer: random | mm | true");
  est->add_option("--em-tol", est_em_tol, "em stopping tolerance");
  est->add_option("--em-max-iter", est_em_max_iter, "em iteration cap");
  est->add_option("--seed", est_seed, "seed for the random em initializer");
  est->add_option("--moments-out", est_moments_out, "write the empirical moment matrix as CSV");
  est->add_option("--dump-qp", est_dump_qp, "debug: write the assembled QP blocks as CSV");

  // --- benchmark ---
  auto* bench = app.add_subcommand("benchmark", "Monte Carlo accuracy/runtime comparison");
  std::string bench_config, bench_sizes, bench_arms, bench_bound = "auto", bench_out = "benchmark";
  int bench_x = 5, bench_y = 5, bench_reps = 100, bench_em_max_iter = 500;
  double bench_em_tol = 1e-6;
  std::uint64_t bench_seed = 1;
  bench->add_option("--config", bench_config, "key=value config file (flags override)");
  bench->add_option("--x", bench_x, "number of states");
  bench->add_option("--y", bench_y, "number of outputs");
  bench->add_option("--sizes", bench_sizes, "comma-separated sample sizes (e.g. 1e3,1e4)");
  bench->add_option("--reps", bench_reps, "replicates per size");
  bench->add_option("--seed", bench_seed, "master seed");
  bench->add_option("--arms", bench_arms, "subset of mm,em,em-mm,em-true,2s");
  bench->add_option("--bound", bench_bound, "'auto' or comma-separated lower bound");
  bench->add_option("--em-tol", bench_em_tol, "em stopping tolerance");
  bench->add_option("--em-max-iter", bench_em_max_iter, "em iteration cap");
  bench->add_option("--out", bench_out, "output prefix for _median.csv and _raw.csv");

  // --- validate ---
  auto* val = app.add_subcommand("validate", "Check a model file against the invariants");
  std::string val_model, val_level = "assumption1";
  val->add_option("model", val_model, "model file")->required();
  val->add_option("--level", val_level, "structural | assumption1");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      const hmmid::HmmModel model = hmmid::read_model_file(sim_model);
      const hmmid::SampleResult result = hmmid::sample(model, sim_n, sim_seed);
      if (sim_out == "-") {
        hmmid::write_observations(std::cout, result.obs);
      } else {
        hmmid::write_observations_file(sim_out, result.obs);
      }
      if (!sim_states_out.empty()) {
        hmmid::ObservationSequence states;
        states.labels = result.states;
        hmmid::write_observations_file(sim_states_out, states);
      }
      return kExitOk;
    }

    if (*est) {
      const hmmid::HmmModel model = hmmid::read_model_file(est_model);
      const hmmid::ObservationSequence obs = read_obs_arg(est_obs);
      for (const int y : obs.labels)
        if (y >= model.num_outputs)
          throw hmmid::ParseError("observation label exceeds the model's Y");

      const std::span<const int> labels(obs.labels);
      hmmid::EstimationReport report;

      if (est_method == "mm" || est_method == "2s") {
        const hmmid::PolytopeBound bound = resolve_bound(est_bound, est_bound_matrix, model);
        if (!est_dump_qp.empty()) {
          const auto moments =
              hmmid::empirical_moments(obs, model.num_outputs);
          std::ofstream dump(est_dump_qp);
          if (!dump) throw std::runtime_error("cannot write " + est_dump_qp);
          dump << hmmid::qp_csv(hmmid::assemble_qp(moments, model.B, bound));
        }
        report = est_method == "mm"
                     ? hmmid::estimate_mm(labels, model.B, model.pi0, bound)
                     : hmmid::estimate_two_step(labels, model.B, model.pi0, bound);
      } else if (est_method == "em") {
        hmmid::Matrix P_init;
        std::string tag = "EM";
        if (est_em_init == "random") {
          hmmid::Rng rng(est_seed);
          P_init = hmmid::random_transition_init(model.num_states, rng);
        } else if (est_em_init == "mm") {
          const hmmid::PolytopeBound bound = resolve_bound(est_bound, est_bound_matrix, model);
          const auto mm = hmmid::estimate_mm(labels, model.B, model.pi0, bound);
          P_init = hmmid::project_interior(mm.P_hat, hmmid::kInteriorProjection);
          tag = "EM-MM";
        } else if (est_em_init == "true") {
          P_init = model.P;
          tag = "EM-True";
        } else {
          throw std::invalid_argument("unknown --em-init '" + est_em_init + "'");
        }
        report = hmmid::estimate_em(labels, model.B, model.pi0, P_init, est_em_tol,
                                    est_em_max_iter, tag);
      } else {
        throw std::invalid_argument("unknown --method '" + est_method + "'");
      }

      if (!est_moments_out.empty()) {
        const auto moments = hmmid::empirical_moments(obs, model.num_outputs);
        std::ofstream out(est_moments_out);
        if (!out) throw std::runtime_error("cannot write " + est_moments_out);
        out << hmmid::moment_csv(moments);
      }

      std::cout << hmmid::report_to_kv(report);
      std::cout << "rmse_vs_model_p=" << hmmid::format_double(hmmid::rmse(report.P_hat, model.P))
                << '\n';
      if (report.qp_kkt_feasibility > 1e-6 || report.boundary_projection > 1e-6)
        std::cerr << "warning: large solver correction (feasibility "
                  << report.qp_kkt_feasibility << ")\n";
      return kExitOk;
    }

    if (*bench) {
      hmmid::BenchmarkConfig config;
      config.num_states = bench_x;
      config.num_outputs = bench_y;
      config.replicates = bench_reps;
      config.master_seed = bench_seed;
      config.em_tol = bench_em_tol;
      config.em_max_iter = bench_em_max_iter;
      config.output_path = bench_out;
      if (!bench_sizes.empty()) config.sizes = parse_sizes(bench_sizes);
      if (!bench_arms.empty()) config.arms = parse_arms(bench_arms);

      if (!bench_config.empty()) {
        const KeyValueConfig file = read_config_file(bench_config);
        auto get = [&](const char* key) -> std::optional<std::string> {
          const auto it = file.entries.find(key);
          if (it == file.entries.end()) return std::nullopt;
          return it->second;
        };
        if (auto v = get("x"); v && bench->count("--x") == 0) config.num_states = std::stoi(*v);
        if (auto v = get("y"); v && bench->count("--y") == 0) config.num_outputs = std::stoi(*v);
        if (auto v = get("sizes"); v && bench->count("--sizes") == 0)
          config.sizes = parse_sizes(*v);
        if (auto v = get("reps"); v && bench->count("--reps") == 0)
          config.replicates = std::stoi(*v);
        if (auto v = get("seed"); v && bench->count("--seed") == 0)
          config.master_seed = std::stoull(*v);
        if (auto v = get("arms"); v && bench->count("--arms") == 0)
          config.arms = parse_arms(*v);
        if (auto v = get("bound"); v && bench->count("--bound") == 0) bench_bound = *v;
        if (auto v = get("em_tol"); v && bench->count("--em-tol") == 0)
          config.em_tol = std::stod(*v);
        if (auto v = get("em_max_iter"); v && bench->count("--em-max-iter") == 0)
          config.em_max_iter = std::stoi(*v);
        if (auto v = get("out"); v && bench->count("--out") == 0) config.output_path = *v;
      }

      if (bench_bound != "auto") {
        const auto parts = split_list(bench_bound);
        hmmid::Vector lower(static_cast<int>(parts.size()));
        for (size_t i = 0; i < parts.size(); ++i)
          lower(static_cast<int>(i)) = std::stod(parts[i]);
        config.bound_override = lower;
      }

      const hmmid::BenchmarkResult result = hmmid::run_benchmark(config);
      std::cout << result.median_csv();
      return kExitOk;
    }

    if (*val) return run_validate(val_model, val_level);
  } catch (const hmmid::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}
