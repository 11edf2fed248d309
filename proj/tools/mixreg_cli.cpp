// Command-line front end. Every verb writes CSV (or SVG for plots) with
// 17-significant-digit numbers; `--config file.json` supplies defaults from a
// flat JSON object whose keys are long option names (dashes or underscores).

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <omp.h>

#include <mixreg/csv.hpp>
#include <mixreg/em.hpp>
#include <mixreg/error.hpp>
#include <mixreg/experiments.hpp>
#include <mixreg/init.hpp>
#include <mixreg/population.hpp>

using namespace mixreg;

namespace {

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& f : csv::split(text)) out.push_back(csv::parse_double(f));
  return out;
}

Vector parse_vector(const std::string& text) {
  const auto v = parse_list(text);
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

template <class Int>
std::vector<Int> parse_counts(const std::string& text) {
  std::vector<Int> out;
  for (double v : parse_list(text)) {
    if (v != std::floor(v) || v < 0) throw Error(ErrorCode::InvalidInput, "expected nonnegative integers: " + text);
    out.push_back(static_cast<Int>(v));
  }
  return out;
}

// Output sink: a file when --out is given, stdout otherwise.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
    path_ = path;
  }
  std::ostream& os() { return file_ ? *file_ : std::cout; }
  void close() {
    if (!file_) return;
    file_->close();
    if (!*file_) throw Error(ErrorCode::Io, "failed writing '" + path_ + "'");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::string path_;
};

struct Common {
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  int threads = 0;

  void add(CLI::App* app) {
    app->add_option("--config", config, "Flat JSON file of option defaults");
    app->add_option("--seed", seed, "Master seed");
    app->add_option("--out", out, "Output path (default stdout)");
    app->add_option("--threads", threads, "OpenMP threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
  }
};

struct ModelArgs {
  std::string theta_star = "-0.28,0.96";
  double sigma = 1.0;
  std::string covariates = "gaussian";
  std::string noise = "gaussian";

  void add(CLI::App* app) {
    app->add_option("--theta-star", theta_star, "True parameter, comma separated");
    app->add_option("--sigma", sigma, "Noise scale");
    app->add_option("--covariates", covariates, "gaussian | uniform");
    app->add_option("--noise", noise, "gaussian | uniform | laplace");
  }
  ModelConfig build() const {
    ModelConfig m;
    m.theta_star = parse_vector(theta_star);
    m.sigma = sigma;
    m.covariate_dist = parse_covariate_dist(covariates);
    m.noise_dist = parse_noise_dist(noise);
    m.validate();
    return m;
  }
};

QuadratureSpec make_quad(const std::string& kind, int nodes) {
  QuadratureSpec q = kind == "hermite" ? QuadratureSpec::hermite() : QuadratureSpec{};
  if (kind != "hermite" && kind != "graded") throw Error(ErrorCode::InvalidInput, "quadrature must be graded | hermite");
  if (nodes > 0) q.nodes_per_axis = nodes;
  q.validate();
  return q;
}

// Rewrites argv so that values from --config come first and explicit flags
// (parsed later, TakeLast policy) override them.
std::vector<std::string> expand_config(const std::vector<std::string>& args, CLI::App& app) {
  std::vector<std::string> out;
  std::string path;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (path.empty() || rest.empty()) return args;

  CLI::App* verb = nullptr;
  for (auto* sub : app.get_subcommands({}))
    if (sub->get_name() == rest.front()) verb = sub;
  if (verb == nullptr) return args;

  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read config '" + path + "'");
  nlohmann::json cfg;
  try {
    cfg = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("config: ") + e.what());
  }
  if (!cfg.is_object()) throw Error(ErrorCode::InvalidInput, "config must be a flat JSON object");

  out.push_back(rest.front());
  for (const auto& [key, value] : cfg.items()) {
    std::string name = "--" + key;
    for (auto& c : name)
      if (c == '_') c = '-';
    const CLI::Option* opt = nullptr;
    try {
      opt = verb->get_option(name);
    } catch (const CLI::OptionNotFound&) {
      throw Error(ErrorCode::InvalidInput, "config key '" + key + "' is not an option of " + verb->get_name());
    }
    if (value.is_boolean()) {
      if (opt->get_expected_max() != 0) throw Error(ErrorCode::InvalidInput, "config key '" + key + "' is not a flag");
      out.push_back(name + "=" + (value.get<bool>() ? "true" : "false"));
      continue;
    }
    std::string text;
    if (value.is_array()) {
      for (std::size_t k = 0; k < value.size(); ++k) {
        if (!value[k].is_number()) throw Error(ErrorCode::InvalidInput, "config array '" + key + "' must be numeric");
        text += (k ? "," : "") + csv::format(value[k].get<double>());
      }
    } else if (value.is_number_integer()) {
      text = std::to_string(value.get<long long>());
    } else if (value.is_number()) {
      text = csv::format(value.get<double>());
    } else if (value.is_string()) {
      text = value.get<std::string>();
    } else {
      throw Error(ErrorCode::InvalidInput, "config key '" + key + "' has an unsupported type");
    }
    out.push_back(name);
    out.push_back(text);
  }
  out.insert(out.end(), rest.begin() + 1, rest.end());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symmetric mixture of two linear regressions: EM simulation, population operator and initialization"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Generate data (or read it) and run one EM trajectory");
  Common sim_common;
  ModelArgs sim_model;
  Eigen::Index sim_n = 1000;
  int sim_iters = 25;
  std::string sim_mode = "full", sim_theta0, sim_data_in, sim_data_out;
  double sim_cos = 0.9, sim_norm = 1.0, sim_stop = 0.0;
  bool sim_loglik = false;
  sim_common.add(sim);
  sim_model.add(sim);
  sim->add_option("--n", sim_n, "Sample size");
  sim->add_option("--iters", sim_iters, "Number of EM updates T");
  sim->add_option("--mode", sim_mode, "full | split");
  sim->add_option("--cos-alpha", sim_cos, "Cosine between theta0 and theta*");
  sim->add_option("--theta0-norm", sim_norm, "Norm of theta0");
  sim->add_option("--theta0", sim_theta0, "Explicit theta0 (overrides --cos-alpha)");
  sim->add_option("--stop-tol", sim_stop, "Relative step size for early stopping (0 = off)");
  sim->add_flag("--loglik", sim_loglik, "Record the log-likelihood");
  sim->add_option("--data-in", sim_data_in, "Read the dataset from CSV instead of generating it");
  sim->add_option("--data-out", sim_data_out, "Also write the dataset CSV here");

  // sweep-cosine
  auto* sweep = app.add_subcommand("sweep-cosine", "Error against the initial cosine, over seeds and checkpoints");
  Common sw_common;
  ModelArgs sw_model;
  Eigen::Index sw_n = 1000;
  std::string sw_iters = "5,10,15,20,25", sw_grid, sw_mode = "full", sw_plot, sw_title;
  int sw_points = 41, sw_seeds = 20;
  double sw_norm = 1.0;
  bool sw_shared = false;
  sw_common.add(sweep);
  sw_model.add(sweep);
  sweep->add_option("--n", sw_n, "Sample size per cell");
  sweep->add_option("--iterations", sw_iters, "Checkpoints, comma separated");
  sweep->add_option("--grid-points", sw_points, "Evenly spaced cos(alpha) points on [-1, 1]");
  sweep->add_option("--cos-grid", sw_grid, "Explicit cos(alpha) grid (overrides --grid-points)");
  sweep->add_option("--theta0-norm", sw_norm, "Norm of theta0");
  sweep->add_option("--seeds", sw_seeds, "Seeds per grid point");
  sweep->add_option("--mode", sw_mode, "full | split");
  sweep->add_flag("--shared-data", sw_shared, "One dataset per seed across the grid");
  sweep->add_option("--plot", sw_plot, "Also write an SVG line chart here");
  sweep->add_option("--title", sw_title, "Plot title");

  // rate
  auto* rate = app.add_subcommand("rate", "Mean squared error of sample-splitting EM against n");
  Common rt_common;
  ModelArgs rt_model;
  std::string rt_grid = "1000,2000,4000,8000,16000,32000,64000,128000", rt_mode = "split";
  int rt_T = 0, rt_seeds = 20;
  double rt_cos = 0.95;
  rt_common.add(rate);
  rt_model.add(rate);
  rate->add_option("--n-grid", rt_grid, "Sample sizes, comma separated");
  rate->add_option("--T", rt_T, "Updates per run (0 = ceil(log(n/d)))");
  rate->add_option("--seeds", rt_seeds, "Runs per n");
  rate->add_option("--mode", rt_mode, "split | full");
  rate->add_option("--cos-alpha", rt_cos, "Cosine between theta0 and theta* (norm ||theta*||)");

  // population-map
  auto* pmap = app.add_subcommand("population-map", "Contractivity reports over an (eta', cos alpha) grid");
  Common pm_common;
  double pm_eta = 40.0, pm_sigma = 1.0;
  std::string pm_eta_prime = "1,5,10,20,40,80", pm_cos, pm_quad = "graded";
  int pm_points = 21, pm_nodes = 0;
  pm_common.add(pmap);
  pmap->add_option("--eta", pm_eta, "Model SNR ||theta*|| / sigma");
  pmap->add_option("--sigma", pm_sigma, "Noise scale");
  pmap->add_option("--eta-prime", pm_eta_prime, "Input SNRs ||theta|| / sigma, comma separated");
  pmap->add_option("--grid-points", pm_points, "Evenly spaced cos(alpha) points on [-1, 1]");
  pmap->add_option("--cos-grid", pm_cos, "Explicit cos(alpha) grid (overrides --grid-points)");
  pmap->add_option("--quadrature", pm_quad, "graded | hermite");
  pmap->add_option("--nodes", pm_nodes, "Nodes per panel (graded) or per axis (hermite); 0 = default");

  // init-spectral
  auto* spec = app.add_subcommand("init-spectral", "Spectral initializer on generated (or read) data");
  Common si_common;
  ModelArgs si_model;
  si_model.theta_star.clear();
  Eigen::Index si_n = 50000;
  int si_iters = 10000, si_dim = 10;
  double si_tol = 1e-10, si_snr = 23.0;
  std::string si_data_in;
  si_common.add(spec);
  si_model.add(spec);
  spec->add_option("--n", si_n, "Sample size");
  spec->add_option("--dim", si_dim, "Dimension when --theta-star is not given");
  spec->add_option("--snr", si_snr, "||theta*|| / sigma when --theta-star is not given (random direction)");
  spec->add_option("--power-iters", si_iters, "Power-iteration budget");
  spec->add_option("--tol", si_tol, "Relative residual tolerance");
  spec->add_option("--data-in", si_data_in, "Read the dataset from CSV (truth columns then omitted)");

  // anti-contract
  auto* anti = app.add_subcommand("anti-contract", "Search for a point the population operator pushes away");
  Common ac_common;
  std::string ac_star = "2,0", ac_quad = "graded";
  double ac_sigma = 1.0, ac_margin = 1e-6;
  int ac_budget = 64, ac_nodes = 0;
  ac_common.add(anti);
  anti->add_option("--theta-star", ac_star, "True parameter, comma separated");
  anti->add_option("--sigma", ac_sigma, "Noise scale");
  anti->add_option("--budget", ac_budget, "Maximum quadrature evaluations");
  anti->add_option("--min-margin", ac_margin, "Required ||M(theta)-theta*|| - ||theta-theta*||");
  anti->add_option("--quadrature", ac_quad, "graded | hermite");
  anti->add_option("--nodes", ac_nodes, "Nodes per panel (graded) or per axis (hermite); 0 = default");

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(args, app);
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::fprintf(stderr, "mixreg: %s\n", e.what());
    return 2;
  }

  for (const Common* c : {&sim_common, &sw_common, &rt_common, &pm_common, &si_common, &ac_common})
    if (c->threads > 0) omp_set_num_threads(c->threads);

  try {
    if (*sim) {
      const ModelConfig model = sim_model.build();
      Dataset data;
      if (!sim_data_in.empty()) {
        std::ifstream in(sim_data_in);
        if (!in) throw Error(ErrorCode::Io, "cannot read '" + sim_data_in + "'");
        data = read_dataset_csv(in);
      } else {
        data = generate_dataset(model, sim_n, Seed{sim_common.seed, 0});
      }
      if (!sim_data_out.empty()) {
        Sink d(sim_data_out);
        write_dataset_csv(d.os(), data);
        d.close();
      }
      const Vector theta0 = sim_theta0.empty()
                                ? theta0_from_angle(model.theta_star, sim_cos, sim_norm, Seed{sim_common.seed, 1})
                                : parse_vector(sim_theta0);
      EMOptions opts;
      opts.mode = parse_em_mode(sim_mode);
      opts.max_iters = sim_iters;
      opts.stop_tol = sim_stop;
      opts.record_loglik = sim_loglik;
      std::optional<Vector> truth;
      if (model.dim() == data.dim()) truth = model.theta_star;
      const auto traj = run_em(data, theta0, model.sigma, opts, truth);
      Sink out(sim_common.out);
      write_trajectory_csv(out.os(), traj);
      out.close();
    } else if (*sweep) {
      SweepSpec s;
      s.model = sw_model.build();
      s.n = sw_n;
      s.iterations = parse_counts<int>(sw_iters);
      s.cos_alpha_grid = sw_grid.empty() ? linspace(-1.0, 1.0, sw_points) : parse_list(sw_grid);
      s.theta0_norm = sw_norm;
      s.seeds = sw_seeds;
      s.em_mode = parse_em_mode(sw_mode);
      s.master_seed = sw_common.seed;
      s.shared_data = sw_shared;
      s.threads = sw_common.threads;
      const SweepTable table = sweep_cosine(s);
      Sink out(sw_common.out);
      write_sweep_csv(out.os(), s, table);
      out.close();
      if (!sw_plot.empty()) {
        PlotStyle style;
        style.title = sw_title;
        emit_plot(table, style, sw_plot);
      }
      const auto tp = transition_point(table, s.model.theta_star.norm());
      std::fprintf(stderr, "transition cos(alpha): %s\n", tp ? csv::format(*tp).c_str() : "none");
    } else if (*rate) {
      RateSpec r;
      r.model = rt_model.build();
      r.n_grid = parse_counts<Eigen::Index>(rt_grid);
      r.T = rt_T;
      r.seeds = rt_seeds;
      r.mode = parse_em_mode(rt_mode);
      r.cos_alpha = rt_cos;
      r.master_seed = rt_common.seed;
      r.threads = rt_common.threads;
      const RateTable table = rate_experiment(r);
      Sink out(rt_common.out);
      write_rate_csv(out.os(), r, table);
      out.close();
      std::fprintf(stderr, "slope: %s\n", csv::format(table.slope).c_str());
    } else if (*pmap) {
      const QuadratureSpec quad = make_quad(pm_quad, pm_nodes);
      const auto cos_grid = pm_cos.empty() ? linspace(-1.0, 1.0, pm_points) : parse_list(pm_cos);
      const auto eta_primes = parse_list(pm_eta_prime);
      Vector ts = Vector::Zero(2);
      ts(0) = pm_eta * pm_sigma;
      Sink out(pm_common.out);
      out.os() << contractivity_csv_header() << '\n';
      for (double ep : eta_primes)
        for (double c : cos_grid) {
          if (!(std::abs(c) <= 1.0)) throw Error(ErrorCode::InvalidInput, "cos(alpha) values must lie in [-1, 1]");
          Vector th(2);
          th << c, std::sqrt(std::max(0.0, 1.0 - c * c));
          write_contractivity_row(out.os(), contractivity(ep * pm_sigma * th, ts, pm_sigma, quad));
        }
      out.close();
    } else if (*spec) {
      Dataset data;
      std::optional<Vector> truth;
      double sigma = si_model.sigma;
      if (!si_data_in.empty()) {
        std::ifstream in(si_data_in);
        if (!in) throw Error(ErrorCode::Io, "cannot read '" + si_data_in + "'");
        data = read_dataset_csv(in);
      } else {
        ModelConfig model;
        if (si_model.theta_star.empty()) {
          Rng rng(Seed{si_common.seed, 1});
          Vector u(si_dim);
          for (Eigen::Index j = 0; j < u.size(); ++j) u(j) = rng.normal();
          model.theta_star = si_snr * si_model.sigma * u.normalized();
          model.sigma = si_model.sigma;
          model.covariate_dist = parse_covariate_dist(si_model.covariates);
          model.noise_dist = parse_noise_dist(si_model.noise);
        } else {
          model = si_model.build();
        }
        data = generate_dataset(model, si_n, Seed{si_common.seed, 0});
        truth = model.theta_star;
      }
      const auto init = spectral_init(data, sigma, si_iters, si_tol);
      Sink out(si_common.out);
      auto& os = out.os();
      for (Eigen::Index j = 0; j < init.theta0.size(); ++j) os << "theta0_" << (j + 1) << ',';
      os << "lambda,lambda_sq,eigenvalue,iterations,residual,cos_to_truth,sign_resolved_error,within_eighth\n";
      for (Eigen::Index j = 0; j < init.theta0.size(); ++j) os << csv::format(init.theta0(j)) << ',';
      os << csv::format(init.lambda) << ',' << csv::format(init.lambda_sq) << ',' << csv::format(init.top.value)
         << ',' << init.top.iterations << ',' << csv::format(init.top.residual) << ',';
      if (truth) {
        const double c = init.theta0.dot(*truth) / (init.theta0.norm() * truth->norm());
        const double err = std::min((init.theta0 - *truth).norm(), (init.theta0 + *truth).norm());
        os << csv::format(c) << ',' << csv::format(err) << ',' << (err <= truth->norm() / 8.0 ? 1 : 0) << '\n';
      } else {
        os << ",,\n";
      }
      out.close();
    } else if (*anti) {
      const auto w = find_anti_contractive(parse_vector(ac_star), ac_sigma, make_quad(ac_quad, ac_nodes), ac_budget,
                                           ac_margin);
      Sink out(ac_common.out);
      auto& os = out.os();
      for (Eigen::Index j = 0; j < w.theta.size(); ++j) os << "theta_" << (j + 1) << ',';
      os << "margin,A,B,evaluations\n";
      for (Eigen::Index j = 0; j < w.theta.size(); ++j) os << csv::format(w.theta(j)) << ',';
      os << csv::format(w.margin) << ',' << csv::format(w.A) << ',' << csv::format(w.B) << ',' << w.evaluations
         << '\n';
      out.close();
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "mixreg: %s\n", e.what());
    return 1;
  }
  return 0;
}
