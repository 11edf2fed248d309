#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <mixreg/error.hpp>
#include <mixreg/experiments.hpp>

using namespace mixreg;

namespace {

Vector fig2_star() {
  Vector v(2);
  v << -7.0 / 25.0, 24.0 / 25.0;
  return v;
}

SweepSpec small_sweep() {
  SweepSpec s;
  s.model.theta_star = fig2_star();
  s.n = 400;
  s.cos_alpha_grid = linspace(-1.0, 1.0, 9);
  s.seeds = 5;
  s.master_seed = 17;
  return s;
}

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

std::map<std::pair<int, double>, SweepMedian> by_key(const SweepTable& t) {
  std::map<std::pair<int, double>, SweepMedian> out;
  for (const auto& m : sweep_medians(t)) out[{m.t, m.cos_alpha}] = m;
  return out;
}

}  // namespace

TEST_CASE("theta0_from_angle") {
  const Vector ts = fig2_star();
  CHECK(theta0_from_angle(ts, 1.0, 2.0, Seed{}) == 2.0 * ts / ts.norm());
  CHECK(std::abs(theta0_from_angle(ts, 0.0, 1.0, Seed{1, 1}).dot(ts)) < 1e-12);
  const Vector v = theta0_from_angle(ts, 0.6, 1.0, Seed{1, 2});
  CHECK(std::abs(v.dot(ts) / (v.norm() * ts.norm()) - 0.6) < 1e-12);

  Rng rng(Seed{1, 3});
  for (int k = 0; k < 100; ++k) {
    const Eigen::Index d = 2 + k % 7;
    Vector s(d);
    for (Eigen::Index j = 0; j < d; ++j) s(j) = rng.normal();
    const double c = rng.uniform(-1.0, 1.0), norm = rng.uniform(0.1, 10.0);
    const Vector th = theta0_from_angle(s, c, norm, Seed{2, static_cast<std::uint64_t>(k)});
    CHECK(th.norm() == doctest::Approx(norm).epsilon(1e-12));
    CHECK(std::abs(th.dot(s) - c * norm * s.norm()) <= 1e-12 * norm * s.norm());
  }
  CHECK_THROWS_AS(theta0_from_angle(Vector::Ones(1), 0.5, 1.0, Seed{}), Error);
  CHECK(theta0_from_angle(Vector::Ones(1), -1.0, 3.0, Seed{})(0) == -3.0);
  CHECK_THROWS_AS(theta0_from_angle(ts, 1.5, 1.0, Seed{}), Error);
}

TEST_CASE("linspace endpoints and spacing") {
  const auto g = linspace(-1.0, 1.0, 41);
  CHECK(g.size() == 41);
  CHECK(g.front() == -1.0);
  CHECK(g.back() == 1.0);
  CHECK(g[20] == 0.0);
  CHECK(linspace(0.3, 0.7, 1) == std::vector<double>{0.3});
}

TEST_CASE("sweep layout and determinism across thread counts") {
  SweepSpec s = small_sweep();
  s.threads = 1;
  const SweepTable one = sweep_cosine(s);
  CHECK(one.rows.size() == 9 * 5 * 5);
  CHECK(one.rows[0].cos_alpha == -1.0);
  CHECK(one.rows[0].t == 5);
  CHECK(one.rows[4].t == 25);
  CHECK(one.rows[5].seed == 1);

  s.threads = 4;
  const SweepTable four = sweep_cosine(s);
  std::ostringstream a, b;
  write_sweep_csv(a, s, one);
  write_sweep_csv(b, s, four);
  CHECK(a.str() == b.str());
  CHECK(a.str().find("cos_alpha,t,seed,raw_error,flipped_error,sign_resolved_error,status\n") != std::string::npos);
  CHECK(a.str().rfind("# sweep-cosine\n", 0) == 0);

  s.master_seed = 18;
  std::ostringstream c;
  write_sweep_csv(c, s, sweep_cosine(s));
  CHECK(c.str() != a.str());
}

TEST_CASE("sweep behaviour at the reference sweep configuration") {
  SweepSpec s = small_sweep();
  s.n = 1000;
  s.cos_alpha_grid = {-1.0, -0.9, -0.5, 0.5, 0.9, 0.95, 1.0};
  s.seeds = 20;
  // One dataset per seed, so +c and -c runs share the fixed points +-theta_hat.
  s.shared_data = true;
  const SweepTable table = sweep_cosine(s);
  const auto med = by_key(table);

  // cos = -1 converges to -theta*.
  CHECK(med.at({25, -1.0}).raw_error == doctest::Approx(2.0).epsilon(0.1));
  CHECK(med.at({25, -1.0}).sign_resolved_error < 0.15);

  // Mirror symmetry: error to theta* at +c matches error to -theta* at -c.
  for (double c : {0.5, 0.9, 1.0})
    for (int t : s.iterations) {
      const double plus = med.at({t, c}).raw_error, minus = med.at({t, -c}).flipped_error;
      CHECK(std::abs(plus - minus) <= 0.2 * std::max(plus, minus));
    }

  // Monotone in t for cos >= 0.9, allowing < 10% violated adjacent pairs.
  int pairs = 0, bad = 0;
  for (double c : {0.9, 0.95, 1.0})
    for (std::size_t k = 1; k < s.iterations.size(); ++k) {
      ++pairs;
      bad += med.at({s.iterations[k], c}).raw_error > med.at({s.iterations[k - 1], c}).raw_error * 1.05;
    }
  CHECK(bad * 10 < pairs);
}

TEST_CASE("failures are recorded per row") {
  SweepSpec s = small_sweep();
  s.n = 3;  // d = 5 > n: every cell fails with SingularGram
  s.model.theta_star = Vector::Ones(5);
  s.cos_alpha_grid = {0.5};
  s.seeds = 2;
  const SweepTable t = sweep_cosine(s);
  for (const auto& r : t.rows) {
    CHECK_FALSE(r.failure.empty());
    CHECK(std::isnan(r.raw_error));
  }
  std::ostringstream os;
  write_sweep_csv(os, s, t);
  CHECK(os.str().find(",failed\n") != std::string::npos);
  CHECK_FALSE(transition_point(t, 1.0));
}

TEST_CASE("transition point reads the converged run from the top") {
  SweepTable t;
  const double cos[] = {-0.5, 0.0, 0.1, 0.2, 0.3};
  const double err[] = {2.0, 0.2, 1.9, 0.1, 0.05};
  for (int k = 0; k < 5; ++k) {
    t.rows.push_back({cos[k], 5, 0, 2.0, 0.0, 0.0, ""});
    t.rows.push_back({cos[k], 25, 0, err[k], 0.0, 0.0, ""});
  }
  CHECK(*transition_point(t, 1.0) == 0.2);
  t.rows.back().raw_error = 1.5;
  CHECK_FALSE(transition_point(t, 1.0));
}

TEST_CASE("shared data keeps one dataset per seed") {
  SweepSpec s = small_sweep();
  s.cos_alpha_grid = {1.0, 1.0};
  s.seeds = 2;
  s.shared_data = true;
  const SweepTable t = sweep_cosine(s);
  // cos = 1 has no random direction, so identical data gives identical rows.
  for (std::size_t k = 0; k < 10; ++k) CHECK(t.rows[k].raw_error == t.rows[k + 10].raw_error);
  s.shared_data = false;
  const SweepTable f = sweep_cosine(s);
  CHECK(f.rows[4].raw_error != f.rows[14].raw_error);
}

TEST_CASE("rate experiment") {
  RateSpec r;
  r.model.theta_star = 40.0 * fig2_star();
  r.n_grid = {1000, 4000, 16000};
  r.seeds = 6;
  const RateTable table = rate_experiment(r);
  REQUIRE(table.rows.size() == 3);
  CHECK(table.rows[0].T == static_cast<int>(std::ceil(std::log(500.0))));
  CHECK(table.rows[0].mse > table.rows[2].mse);
  CHECK(table.slope < 0.0);
  for (const auto& row : table.rows) CHECK(row.failures == 0);

  r.T = 1;
  r.n_grid = {2000};
  const RateTable single = rate_experiment(r);
  CHECK(single.rows[0].T == 1);
  // One step from ||theta0 - theta*|| = 40 sqrt(2 - 1.9) keeps a sizeable error
  // relative to the multi-step runs.
  CHECK(single.rows[0].mse > table.rows[0].mse);

  std::ostringstream os;
  write_rate_csv(os, r, single);
  CHECK(os.str().find("n,T,mse,se,failures\n2000,1,") != std::string::npos);

  r.T = 3000;
  CHECK_THROWS_AS(rate_experiment(r), Error);
}

TEST_CASE("SVG rendering") {
  SweepSpec s = small_sweep();
  const SweepTable table = sweep_cosine(s);
  const std::string svg = render_sweep_svg(table);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(count(svg, "<polyline") == 5);
  CHECK(svg == render_sweep_svg(table));
  // Darker strokes for larger t.
  CHECK(svg.find("data-t=\"25\"") != std::string::npos);
  CHECK(svg.find("#000000") != std::string::npos);

  SweepTable one;
  one.rows.push_back({0.5, 10, 0, 0.3, 1.7, 0.3, ""});
  const std::string dot = render_sweep_svg(one);
  CHECK(count(dot, "<polyline") == 0);
  CHECK(count(dot, "<circle") == 1);

  CHECK_THROWS_AS(render_sweep_svg(SweepTable{}), Error);

  PlotStyle style;
  style.title = "a < b & c";
  CHECK(render_sweep_svg(table, style).find("a &lt; b &amp; c") != std::string::npos);

  const std::string path = "test_experiments_plot.svg";
  emit_plot(table, style, path);
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  CHECK(buf.str() == render_sweep_svg(table, style));
  std::remove(path.c_str());
  CHECK_THROWS_AS(emit_plot(table, style, "/nonexistent-dir/x.svg"), Error);
}
