#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mixreg/em.hpp"
#include "mixreg/model.hpp"
#include "mixreg/rng.hpp"

namespace mixreg {

/// norm * (cos_alpha u* + sin_alpha u_perp), u_perp a uniformly random unit
/// vector orthogonal to theta* drawn from `seed`. Throws InvalidInput for
/// d = 1 with |cos_alpha| < 1.
Vector theta0_from_angle(const Vector& theta_star, double cos_alpha, double norm, Seed seed);

/// `points` evenly spaced values from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, int points);

struct SweepSpec {
  ModelConfig model;
  Eigen::Index n = 1000;
  /// Checkpoints; EM runs to the largest.
  std::vector<int> iterations{5, 10, 15, 20, 25};
  std::vector<double> cos_alpha_grid = linspace(-1.0, 1.0, 41);
  double theta0_norm = 1.0;
  int seeds = 20;
  EMMode em_mode = EMMode::FullSample;
  std::uint64_t master_seed = 0;
  /// Reuse one dataset per seed across the whole cos(alpha) grid.
  bool shared_data = false;
  /// OpenMP threads for the cell loop; 0 keeps the runtime default.
  int threads = 0;

  void validate() const;
};

struct SweepRow {
  double cos_alpha = 0.0;
  int t = 0;
  int seed = 0;
  /// ||theta^t - theta*||
  double raw_error = 0.0;
  /// ||theta^t + theta*||
  double flipped_error = 0.0;
  double sign_resolved_error = 0.0;
  /// Empty on success; otherwise the EM error message (errors are NaN).
  std::string failure;
};

struct SweepTable {
  /// Ordered by cos(alpha) grid index, then seed, then checkpoint.
  std::vector<SweepRow> rows;
};

/// Cell (i, s) = (grid index, seed index) draws its data from stream 2c and
/// its theta0 direction from stream 2c + 1 with c = i * seeds + s (shared data
/// uses stream 2^62 + s), so the table is identical for any thread count.
SweepTable sweep_cosine(const SweepSpec& spec);

struct SweepMedian {
  double cos_alpha = 0.0;
  int t = 0;
  double raw_error = 0.0;
  double flipped_error = 0.0;
  double sign_resolved_error = 0.0;
  int count = 0;
};

/// Medians over seeds (failed rows skipped), ordered by t then cos(alpha).
std::vector<SweepMedian> sweep_medians(const SweepTable& table);

/// Smallest grid cos(alpha) from which the median raw error at the last
/// checkpoint stays below `threshold` for every larger grid value (use
/// ||theta*||: half the gap between the two basins). Empty when the largest
/// grid value does not converge.
std::optional<double> transition_point(const SweepTable& table, double threshold);

void write_sweep_csv(std::ostream& os, const SweepSpec& spec, const SweepTable& table);

struct RateSpec {
  ModelConfig model;
  std::vector<Eigen::Index> n_grid;
  /// Updates per run; 0 picks ceil(log(n / d)) for each n.
  int T = 0;
  int seeds = 20;
  EMMode mode = EMMode::SampleSplitting;
  /// theta0 has this cosine with theta* and norm ||theta*||.
  double cos_alpha = 0.95;
  std::uint64_t master_seed = 0;
  int threads = 0;

  void validate() const;
};

struct RateRow {
  Eigen::Index n = 0;
  int T = 0;
  /// Mean over seeds of the squared sign-resolved error at t = T.
  double mse = 0.0;
  double se = 0.0;
  int failures = 0;
};

struct RateTable {
  std::vector<RateRow> rows;
  /// Least-squares fit of log(mse) = intercept + slope log(n).
  double slope = 0.0;
  double intercept = 0.0;
};

RateTable rate_experiment(const RateSpec& spec);
void write_rate_csv(std::ostream& os, const RateSpec& spec, const RateTable& table);

struct PlotStyle {
  int width = 640;
  int height = 420;
  std::string title;
  std::string x_label = "cos alpha";
  std::string y_label = "error";
};

/// Line chart of median raw error against cos(alpha), one polyline per
/// checkpoint t; larger t gets a darker stroke. A series with a single point
/// is drawn as a marker.
std::string render_sweep_svg(const SweepTable& table, const PlotStyle& style = {});
void emit_plot(const SweepTable& table, const PlotStyle& style, const std::string& path);

}  // namespace mixreg
