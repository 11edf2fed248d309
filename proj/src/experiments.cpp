#include "mixreg/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

#include <omp.h>

#include "mixreg/csv.hpp"
#include "mixreg/error.hpp"

namespace mixreg {
namespace {

constexpr std::uint64_t kSharedDataStream = std::uint64_t{1} << 62;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double median(std::vector<double> v) {
  if (v.empty()) return kNaN;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + std::to_string(v[i]);
  return out;
}

void echo_model(std::ostream& os, const ModelConfig& m) {
  os << "# theta_star=";
  for (Eigen::Index j = 0; j < m.dim(); ++j) os << (j ? " " : "") << csv::format(m.theta_star(j));
  os << "\n# sigma=" << csv::format(m.sigma) << "\n# covariate_dist=" << to_string(m.covariate_dist)
     << "\n# noise_dist=" << to_string(m.noise_dist) << '\n';
}

}  // namespace

Vector theta0_from_angle(const Vector& theta_star, double cos_alpha, double norm, Seed seed) {
  if (!(std::abs(cos_alpha) <= 1.0)) throw Error(ErrorCode::InvalidInput, "|cos_alpha| must be <= 1");
  if (!(norm > 0.0) || !std::isfinite(norm)) throw Error(ErrorCode::InvalidInput, "norm must be > 0");
  if (!theta_star.allFinite()) throw Error(ErrorCode::NonFiniteInput, "theta_star");
  const double sn = theta_star.norm();
  if (sn == 0.0) throw Error(ErrorCode::ZeroVector, "theta_star is the zero vector");
  const Vector u = theta_star / sn;
  if (std::abs(cos_alpha) == 1.0) return (norm * cos_alpha) * u;
  if (theta_star.size() == 1)
    throw Error(ErrorCode::InvalidInput, "d = 1 has no direction orthogonal to theta_star");

  Rng rng(seed);
  Vector perp(theta_star.size());
  double len = 0.0;
  while (len < 1e-8) {
    for (Eigen::Index j = 0; j < perp.size(); ++j) perp(j) = rng.normal();
    perp -= u.dot(perp) * u;
    perp -= u.dot(perp) * u;
    len = perp.norm();
  }
  perp /= len;
  const double sin_alpha = std::sqrt(1.0 - cos_alpha * cos_alpha);
  return norm * (cos_alpha * u + sin_alpha * perp);
}

std::vector<double> linspace(double lo, double hi, int points) {
  if (points < 1) throw Error(ErrorCode::InvalidInput, "linspace needs >= 1 point");
  if (points == 1) return {lo};
  std::vector<double> out(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i)
    out[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / (points - 1);
  out.back() = hi;
  return out;
}

void SweepSpec::validate() const {
  model.validate();
  if (n < 1) throw Error(ErrorCode::InvalidInput, "n must be >= 1");
  if (iterations.empty() || cos_alpha_grid.empty())
    throw Error(ErrorCode::InvalidInput, "iterations and cos_alpha_grid must be nonempty");
  for (int t : iterations)
    if (t < 0) throw Error(ErrorCode::InvalidInput, "iteration checkpoints must be >= 0");
  for (double c : cos_alpha_grid)
    if (!(std::abs(c) <= 1.0)) throw Error(ErrorCode::InvalidInput, "cos_alpha values must lie in [-1, 1]");
  if (!(theta0_norm > 0.0)) throw Error(ErrorCode::InvalidInput, "theta0_norm must be > 0");
  if (seeds < 1) throw Error(ErrorCode::InvalidInput, "seeds must be >= 1");
}

SweepTable sweep_cosine(const SweepSpec& spec) {
  spec.validate();
  std::vector<int> checkpoints = spec.iterations;
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
  const int t_max = checkpoints.back();
  const auto grid = static_cast<long long>(spec.cos_alpha_grid.size());
  const long long cells = grid * spec.seeds;
  const auto per_cell = checkpoints.size();

  SweepTable table;
  table.rows.resize(static_cast<std::size_t>(cells) * per_cell);
  EMOptions opts;
  opts.mode = spec.em_mode;
  opts.max_iters = t_max;
  const int threads = spec.threads > 0 ? spec.threads : omp_get_max_threads();

#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (long long cell = 0; cell < cells; ++cell) {
    const auto gi = static_cast<std::size_t>(cell / spec.seeds);
    const int s = static_cast<int>(cell % spec.seeds);
    const double cos_alpha = spec.cos_alpha_grid[gi];
    const auto ucell = static_cast<std::uint64_t>(cell);
    const Seed data_seed = spec.shared_data
                               ? Seed{spec.master_seed, kSharedDataStream + static_cast<std::uint64_t>(s)}
                               : Seed{spec.master_seed, 2 * ucell};
    const Seed angle_seed{spec.master_seed, 2 * ucell + 1};
    SweepRow* out = &table.rows[static_cast<std::size_t>(cell) * per_cell];
    for (std::size_t k = 0; k < per_cell; ++k) {
      out[k].cos_alpha = cos_alpha;
      out[k].t = checkpoints[k];
      out[k].seed = s;
    }
    try {
      const Dataset data = generate_dataset(spec.model, spec.n, data_seed);
      const Vector theta0 = theta0_from_angle(spec.model.theta_star, cos_alpha, spec.theta0_norm, angle_seed);
      const EMTrajectory traj = run_em(data, theta0, spec.model.sigma, opts, spec.model.theta_star);
      for (std::size_t k = 0; k < per_cell; ++k) {
        const auto t = static_cast<std::size_t>(std::min(checkpoints[k], traj.steps()));
        out[k].raw_error = traj.raw_errors[t];
        out[k].flipped_error = traj.flipped_errors[t];
        out[k].sign_resolved_error = traj.sign_resolved_errors[t];
      }
    } catch (const Error& e) {
      for (std::size_t k = 0; k < per_cell; ++k) {
        out[k].raw_error = out[k].flipped_error = out[k].sign_resolved_error = kNaN;
        out[k].failure = e.what();
      }
    }
  }
  return table;
}

std::vector<SweepMedian> sweep_medians(const SweepTable& table) {
  struct Bucket {
    std::vector<double> raw, flipped, resolved;
  };
  std::map<std::pair<int, double>, Bucket> buckets;
  for (const auto& row : table.rows) {
    auto& b = buckets[{row.t, row.cos_alpha}];
    if (!row.failure.empty()) continue;
    b.raw.push_back(row.raw_error);
    b.flipped.push_back(row.flipped_error);
    b.resolved.push_back(row.sign_resolved_error);
  }
  std::vector<SweepMedian> out;
  for (auto& [key, b] : buckets) {
    out.push_back({key.second, key.first, median(b.raw), median(b.flipped), median(b.resolved),
                   static_cast<int>(b.raw.size())});
  }
  return out;
}

std::optional<double> transition_point(const SweepTable& table, double threshold) {
  const auto medians = sweep_medians(table);
  if (medians.empty()) return std::nullopt;
  int t_max = 0;
  for (const auto& m : medians) t_max = std::max(t_max, m.t);
  // Scan from the largest cos(alpha) down; the transition is the last point
  // of the run of cells that all converge.
  std::optional<double> point;
  for (auto it = medians.rbegin(); it != medians.rend(); ++it) {
    if (it->t != t_max) continue;
    if (!(it->count > 0 && it->raw_error < threshold)) break;
    point = it->cos_alpha;
  }
  return point;
}

void write_sweep_csv(std::ostream& os, const SweepSpec& spec, const SweepTable& table) {
  os << "# sweep-cosine\n";
  echo_model(os, spec.model);
  os << "# n=" << spec.n << "\n# iterations=" << join_ints(spec.iterations) << "\n# cos_alpha_grid=";
  for (std::size_t i = 0; i < spec.cos_alpha_grid.size(); ++i)
    os << (i ? " " : "") << csv::format(spec.cos_alpha_grid[i]);
  os << "\n# theta0_norm=" << csv::format(spec.theta0_norm) << "\n# seeds=" << spec.seeds
     << "\n# em_mode=" << to_string(spec.em_mode) << "\n# master_seed=" << spec.master_seed
     << "\n# shared_data=" << (spec.shared_data ? 1 : 0) << '\n';
  os << "cos_alpha,t,seed,raw_error,flipped_error,sign_resolved_error,status\n";
  for (const auto& r : table.rows) {
    os << csv::format(r.cos_alpha) << ',' << r.t << ',' << r.seed << ',' << csv::format(r.raw_error) << ','
       << csv::format(r.flipped_error) << ',' << csv::format(r.sign_resolved_error) << ','
       << (r.failure.empty() ? "ok" : "failed") << '\n';
  }
}

void RateSpec::validate() const {
  model.validate();
  if (n_grid.empty()) throw Error(ErrorCode::InvalidInput, "n_grid must be nonempty");
  if (T < 0) throw Error(ErrorCode::InvalidInput, "T must be >= 0");
  if (seeds < 1) throw Error(ErrorCode::InvalidInput, "seeds must be >= 1");
  if (!(std::abs(cos_alpha) <= 1.0)) throw Error(ErrorCode::InvalidInput, "|cos_alpha| must be <= 1");
  const Eigen::Index d = model.dim();
  for (auto n : n_grid) {
    const int t = T > 0 ? T : std::max(1, static_cast<int>(std::ceil(std::log(static_cast<double>(n) / d))));
    if (n / t < d) throw Error(ErrorCode::InvalidInput, "floor(n/T) < d for n = " + std::to_string(n));
  }
}

RateTable rate_experiment(const RateSpec& spec) {
  spec.validate();
  const Eigen::Index d = spec.model.dim();
  const auto grid = static_cast<long long>(spec.n_grid.size());
  const long long cells = grid * spec.seeds;
  std::vector<double> sq_errors(static_cast<std::size_t>(cells), kNaN);
  std::vector<int> steps(static_cast<std::size_t>(grid));
  for (long long g = 0; g < grid; ++g) {
    const double n = static_cast<double>(spec.n_grid[static_cast<std::size_t>(g)]);
    steps[static_cast<std::size_t>(g)] =
        spec.T > 0 ? spec.T : std::max(1, static_cast<int>(std::ceil(std::log(n / static_cast<double>(d)))));
  }
  const double norm = spec.model.theta_star.norm();
  const int threads = spec.threads > 0 ? spec.threads : omp_get_max_threads();

#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (long long cell = 0; cell < cells; ++cell) {
    const auto g = static_cast<std::size_t>(cell / spec.seeds);
    const auto ucell = static_cast<std::uint64_t>(cell);
    try {
      const Dataset data = generate_dataset(spec.model, spec.n_grid[g], Seed{spec.master_seed, 2 * ucell});
      const Vector theta0 =
          theta0_from_angle(spec.model.theta_star, spec.cos_alpha, norm, Seed{spec.master_seed, 2 * ucell + 1});
      EMOptions opts;
      opts.mode = spec.mode;
      opts.max_iters = steps[g];
      const auto traj = run_em(data, theta0, spec.model.sigma, opts, spec.model.theta_star);
      const double e = traj.sign_resolved_errors.back();
      sq_errors[static_cast<std::size_t>(cell)] = e * e;
    } catch (const Error&) {
      // recorded as a failure below
    }
  }

  RateTable table;
  for (long long g = 0; g < grid; ++g) {
    RateRow row;
    row.n = spec.n_grid[static_cast<std::size_t>(g)];
    row.T = steps[static_cast<std::size_t>(g)];
    double sum = 0.0, sum_sq = 0.0;
    int ok = 0;
    for (int s = 0; s < spec.seeds; ++s) {
      const double v = sq_errors[static_cast<std::size_t>(g * spec.seeds + s)];
      if (std::isnan(v)) {
        ++row.failures;
        continue;
      }
      sum += v;
      sum_sq += v * v;
      ++ok;
    }
    row.mse = ok > 0 ? sum / ok : kNaN;
    row.se = ok > 1 ? std::sqrt(std::max(0.0, (sum_sq - ok * row.mse * row.mse) / (ok - 1)) / ok) : kNaN;
    table.rows.push_back(row);
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (const auto& r : table.rows) {
    if (!(r.mse > 0.0)) continue;
    const double x = std::log(static_cast<double>(r.n)), y = std::log(r.mse);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m >= 2) {
    table.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    table.intercept = (sy - table.slope * sx) / m;
  } else {
    table.slope = table.intercept = kNaN;
  }
  return table;
}

void write_rate_csv(std::ostream& os, const RateSpec& spec, const RateTable& table) {
  os << "# rate\n";
  echo_model(os, spec.model);
  os << "# T=" << spec.T << (spec.T == 0 ? " (ceil(log(n/d)))" : "") << "\n# seeds=" << spec.seeds
     << "\n# em_mode=" << to_string(spec.mode) << "\n# cos_alpha=" << csv::format(spec.cos_alpha)
     << "\n# master_seed=" << spec.master_seed << "\n# slope=" << csv::format(table.slope)
     << "\n# intercept=" << csv::format(table.intercept) << '\n';
  os << "n,T,mse,se,failures\n";
  for (const auto& r : table.rows)
    os << r.n << ',' << r.T << ',' << csv::format(r.mse) << ',' << csv::format(r.se) << ',' << r.failures << '\n';
}

}  // namespace mixreg
