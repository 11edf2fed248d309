#pragma once

#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mixreg/model.hpp"

namespace mixreg {

enum class EMMode { FullSample, SampleSplitting };

std::string to_string(EMMode mode);
EMMode parse_em_mode(const std::string& name);

struct EMOptions {
  EMMode mode = EMMode::FullSample;
  /// Number of updates T. In SampleSplitting mode this is also the number of
  /// batches.
  int max_iters = 25;
  /// Stop once ||theta^t - theta^{t-1}|| <= stop_tol * ||theta^{t-1}||; 0 disables.
  double stop_tol = 0.0;
  bool record_loglik = false;
};

struct EMTrajectory {
  std::vector<Vector> iterates;
  /// ||theta^t - theta*||, present when the truth was supplied.
  std::vector<double> raw_errors;
  /// ||theta^t + theta*||
  std::vector<double> flipped_errors;
  /// min of the two above
  std::vector<double> sign_resolved_errors;
  std::vector<double> loglik;
  /// Row range [first, second) consumed by update t (index t-1).
  std::vector<std::pair<Eigen::Index, Eigen::Index>> batches;

  int steps() const { return static_cast<int>(iterates.size()) - 1; }
  const Vector& final() const { return iterates.back(); }
};

/// LDLT (pivoted) factorization of the Gram matrix (1/n) X^T X. Throws
/// SingularGram when the reciprocal 2-norm condition number
/// lambda_min / lambda_max drops below 1e-12.
class GramSolver {
 public:
  explicit GramSolver(const RowMatrix& X);

  Vector solve(const Vector& rhs) const { return ldlt_.solve(rhs); }
  double rcond() const { return rcond_; }

 private:
  Eigen::LDLT<Eigen::MatrixXd> ldlt_;
  double rcond_ = 0.0;
};

/// One application of the empirical EM operator M_n.
Vector em_update(const Dataset& data, const Vector& theta, double sigma);
Vector em_update(const Dataset& data, const GramSolver& gram, const Vector& theta, double sigma);

EMTrajectory run_em(const Dataset& data, const Vector& theta0, double sigma, const EMOptions& opts,
                    const std::optional<Vector>& truth = std::nullopt);

/// Header t,theta_1..theta_d,raw_error,sign_resolved_error,loglik; missing
/// values are left empty.
void write_trajectory_csv(std::ostream& os, const EMTrajectory& traj);

}  // namespace mixreg
