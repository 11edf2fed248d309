#include "mixreg/em.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "mixreg/csv.hpp"
#include "mixreg/error.hpp"
#include "mixreg/kernels.hpp"

namespace mixreg {
namespace {

constexpr double kMinRcond = 1e-12;

void check_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw Error(ErrorCode::InvalidInput, "sigma must be finite and > 0");
}

void record_errors(EMTrajectory& traj, const Vector& theta, const std::optional<Vector>& truth) {
  if (!truth) return;
  const double raw = (theta - *truth).norm();
  const double flipped = (theta + *truth).norm();
  traj.raw_errors.push_back(raw);
  traj.flipped_errors.push_back(flipped);
  traj.sign_resolved_errors.push_back(std::min(raw, flipped));
}

}  // namespace

std::string to_string(EMMode mode) {
  return mode == EMMode::FullSample ? "full" : "split";
}

EMMode parse_em_mode(const std::string& name) {
  if (name == "full" || name == "full-sample") return EMMode::FullSample;
  if (name == "split" || name == "sample-splitting") return EMMode::SampleSplitting;
  throw Error(ErrorCode::InvalidInput, "unknown EM mode '" + name + "'");
}

GramSolver::GramSolver(const RowMatrix& X) {
  if (X.rows() < X.cols())
    throw Error(ErrorCode::SingularGram,
                "n = " + std::to_string(X.rows()) + " < d = " + std::to_string(X.cols()));
  const Eigen::MatrixXd gram = kernels::gram(X);
  ldlt_.compute(gram);
  // LDLT's own rcond() misses exact zero pivots; use the spectral ratio.
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram, Eigen::EigenvaluesOnly).eigenvalues();
  rcond_ = ldlt_.info() == Eigen::Success && ev(ev.size() - 1) > 0.0 ? ev(0) / ev(ev.size() - 1) : 0.0;
  if (!(rcond_ >= kMinRcond))
    throw Error(ErrorCode::SingularGram,
                "Gram matrix condition estimate exceeds 1e12 (rcond = " + csv::format(rcond_) + ")");
}

Vector em_update(const Dataset& data, const GramSolver& gram, const Vector& theta, double sigma) {
  check_sigma(sigma);
  if (theta.size() != data.dim()) throw Error(ErrorCode::InvalidInput, "theta has wrong length");
  if (!theta.allFinite()) throw Error(ErrorCode::NonFiniteInput, "theta");
  Vector next = gram.solve(kernels::em_moment(data.X, data.Y, theta, sigma));
  if (!next.allFinite()) throw Error(ErrorCode::NonFiniteInput, "EM update produced non-finite values");
  return next;
}

Vector em_update(const Dataset& data, const Vector& theta, double sigma) {
  data.validate();
  return em_update(data, GramSolver(data.X), theta, sigma);
}

EMTrajectory run_em(const Dataset& data, const Vector& theta0, double sigma, const EMOptions& opts,
                    const std::optional<Vector>& truth) {
  data.validate();
  check_sigma(sigma);
  if (opts.max_iters < 0) throw Error(ErrorCode::InvalidInput, "max_iters must be >= 0");
  if (!(opts.stop_tol >= 0.0)) throw Error(ErrorCode::InvalidInput, "stop_tol must be >= 0");
  if (theta0.size() != data.dim()) throw Error(ErrorCode::InvalidInput, "theta0 has wrong length");
  if (!theta0.allFinite()) throw Error(ErrorCode::NonFiniteInput, "theta0");
  if (truth && truth->size() != data.dim()) throw Error(ErrorCode::InvalidInput, "truth has wrong length");

  const Eigen::Index T = opts.max_iters;
  const Eigen::Index d = data.dim();
  Eigen::Index batch = data.n();
  if (opts.mode == EMMode::SampleSplitting && T > 0) {
    batch = data.n() / T;
    if (batch < d)
      throw Error(ErrorCode::InvalidInput, "sample splitting needs floor(n/T) >= d (floor(n/T) = " +
                                               std::to_string(batch) + ")");
  }

  EMTrajectory traj;
  traj.iterates.push_back(theta0);
  record_errors(traj, theta0, truth);
  if (opts.record_loglik) traj.loglik.push_back(log_likelihood(data, theta0, sigma));
  if (T == 0) return traj;

  std::optional<GramSolver> full_gram;
  Vector theta = theta0;
  for (Eigen::Index t = 1; t <= T; ++t) {
    Vector next;
    try {
      if (opts.mode == EMMode::FullSample) {
        if (!full_gram) full_gram.emplace(data.X);
        next = em_update(data, *full_gram, theta, sigma);
        traj.batches.emplace_back(0, data.n());
      } else {
        const Eigen::Index begin = (t - 1) * batch;
        const Dataset part = data.rows(begin, batch);
        next = em_update(part, GramSolver(part.X), theta, sigma);
        traj.batches.emplace_back(begin, begin + batch);
      }
    } catch (const Error& e) {
      throw Error(e.code(), "EM step " + std::to_string(t) + ": " + e.what());
    }
    const double step = (next - theta).norm();
    const double scale = theta.norm();
    theta = std::move(next);
    traj.iterates.push_back(theta);
    record_errors(traj, theta, truth);
    if (opts.record_loglik) traj.loglik.push_back(log_likelihood(data, theta, sigma));
    if (opts.stop_tol > 0.0 && step <= opts.stop_tol * scale) break;
  }
  return traj;
}

void write_trajectory_csv(std::ostream& os, const EMTrajectory& traj) {
  const Eigen::Index d = traj.iterates.front().size();
  os << 't';
  for (Eigen::Index j = 0; j < d; ++j) os << ",theta_" << (j + 1);
  os << ",raw_error,sign_resolved_error,loglik\n";
  for (std::size_t t = 0; t < traj.iterates.size(); ++t) {
    os << t;
    for (Eigen::Index j = 0; j < d; ++j) os << ',' << csv::format(traj.iterates[t](j));
    auto at = [t](const std::vector<double>& v) {
      return t < v.size() ? std::optional<double>(v[t]) : std::nullopt;
    };
    os << ',' << csv::format(at(traj.raw_errors)) << ',' << csv::format(at(traj.sign_resolved_errors))
       << ',' << csv::format(at(traj.loglik)) << '\n';
  }
}

}  // namespace mixreg
