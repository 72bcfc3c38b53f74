#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lpm/benchmarks.hpp"
#include "lpm/verification.hpp"

using namespace lpm;

namespace {

std::vector<VectorXd> scalar_points(std::initializer_list<double> qs) {
  std::vector<VectorXd> out;
  for (double q : qs) {
    VectorXd v(1);
    v[0] = q;
    out.push_back(v);
  }
  return out;
}

VectorXd vec2(double a, double b) {
  VectorXd v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("invariance defect vanishes for the linear system") {
  ManifoldSystem sys(bench::linear_zero(), GridConfig{});
  CheckReport rep = check_invariance(sys, 0.0, 3.0, scalar_points({1.0}));
  CHECK(rep.pass);
}

TEST_CASE("invariance on rotgap and tanhline") {
  {
    ManifoldSystem sys(bench::rotgap(0.6), GridConfig{});
    CheckReport rep = check_invariance(sys, 0.0, 5.0, scalar_points({-1.0, 1.0}));
    CHECK_MESSAGE(rep.pass, rep.detail);
  }
  {
    ManifoldSystem sys(bench::tanhline(0.5), GridConfig{});
    CheckReport rep = check_invariance(sys, 0.0, 5.0, scalar_points({1.0}));
    CHECK_MESSAGE(rep.pass, rep.detail);
  }
}

TEST_CASE("attraction bound with omega and the faster empirical rate") {
  ManifoldSystem sys(bench::rotgap(0.6), GridConfig{});
  CheckReport rep = check_attraction(sys, 0.0, vec2(0.0, 1.0), 5.0);
  CHECK_MESSAGE(rep.pass, rep.detail);
  // the true transverse rate is the stable eigenvalue 0.8, well above omega = 1/7
  auto pos = rep.detail.find("fitted decay ");
  REQUIRE(pos != std::string::npos);
  double fitted = std::strtod(rep.detail.c_str() + pos + 13, nullptr);
  CHECK(fitted == doctest::Approx(0.8).epsilon(0.05));
  CHECK(fitted > sys.gap().omega);
}

TEST_CASE("attraction from a manifold point compares against solver error") {
  ManifoldSystem sys(bench::rotgap(0.6), GridConfig{});
  VectorXd on = vec2(1.0, 1.0 / 3.0);
  CheckReport rep = check_attraction(sys, 0.0, on, 4.0);
  CHECK_MESSAGE(rep.pass, rep.detail);
  CHECK(rep.detail.find("on-manifold") != std::string::npos);
}

TEST_CASE("lipschitz ratio against kappa_sigma plus cone sign patterns") {
  {
    ManifoldSystem sys(bench::rotgap(0.6), GridConfig{});
    CheckReport rep = check_lipschitz_and_cone(sys, 0.0, scalar_points({-2.0, -1.0, 1.0, 2.0}));
    CHECK_MESSAGE(rep.pass, rep.detail);
    CHECK(rep.measured == doctest::Approx(1.0 / 3.0).epsilon(1e-3));
    CHECK(rep.bound == doctest::Approx(3.0 / 7.0).epsilon(1e-12));
  }
  {
    // identical base points are skipped, not fatal
    ManifoldSystem sys(bench::rotgap(0.6), GridConfig{});
    CheckReport rep = check_lipschitz_and_cone(sys, 0.0, scalar_points({1.0, 1.0}));
    CHECK(rep.pass);
    CHECK(rep.detail.find("skipped pairs 1") != std::string::npos);
  }
  {
    // tanhline: max slope of the analytic graph is eps/2 at q = 0
    ManifoldSystem sys(bench::tanhline(0.5), GridConfig{});
    CheckReport rep =
        check_lipschitz_and_cone(sys, 0.0, scalar_points({-2.0, -0.5, 0.5, 1.0, 2.0}));
    CHECK_MESSAGE(rep.pass, rep.detail);
    CHECK(rep.measured <= 0.25 + 1e-6);
    CHECK(rep.detail.find("cone condition skipped") != std::string::npos);
  }
}

TEST_CASE("backward growth bound") {
  for (auto spec : {bench::linear_zero(), bench::rotgap(0.6), bench::tanhline(0.5)}) {
    ManifoldSystem sys(spec, GridConfig{});
    CheckReport rep = check_backward_growth(sys, 0.0, scalar_points({1.0, -1.0}));
    CHECK_MESSAGE(rep.pass, spec.name, ": ", rep.detail);
  }
}

TEST_CASE("stable decay bound") {
  {
    // tanhline: p' = -p exactly on the stable manifold; bound rate gamma - L2 = 0.5
    ManifoldSystem sys(bench::tanhline(0.5), GridConfig{});
    CheckReport rep = check_stable_decay(sys, 0.0, vec2(3.0, 1.0), 5.0);
    CHECK_MESSAGE(rep.pass, rep.detail);
    CHECK(rep.detail.find("0.5") != std::string::npos);
  }
  {
    ManifoldSystem sys(bench::rotgap(0.6), GridConfig{});
    CheckReport rep = check_stable_decay(sys, 0.0, vec2(0.0, 1.0), 5.0);
    CHECK_MESSAGE(rep.pass, rep.detail);
  }
  {
    // f = 0 from the stable axis: the exact decay rate is gamma itself
    ManifoldSystem sys(bench::linear_zero(), GridConfig{});
    CheckReport rep = check_stable_decay(sys, 0.0, vec2(0.0, 1.0), 5.0);
    CHECK_MESSAGE(rep.pass, rep.detail);
  }
}

TEST_CASE("c1 modulus: constant for rotgap, linear in h for tanhline") {
  {
    ManifoldSystem sys(bench::rotgap(0.6), GridConfig{});
    CheckReport rep = check_c1(sys, 0.0, vec2(1.0, 0.0), {0.5, 0.25, 0.1, 0.05});
    CHECK_MESSAGE(rep.pass, rep.detail);
    CHECK(rep.measured <= 1e-6);
  }
  {
    ManifoldSystem sys(bench::tanhline(0.5), GridConfig{});
    CheckReport rep = check_c1(sys, 0.0, vec2(1.0, 0.0), {0.5, 0.25, 0.1, 0.05, 0.02, 0.005});
    CHECK_MESSAGE(rep.pass, rep.detail);
    // d(h) ~ |Sigma''(1)| h to first order
    double curv = std::abs(0.5 * (std::tanh(1.0) + 1.0 / std::cosh(1.0) / std::cosh(1.0) -
                                  2.0 * (std::tanh(1.0) - std::log(std::cosh(1.0)))));
    CHECK(rep.measured == doctest::Approx(curv * 0.005).epsilon(0.25));
  }
}

TEST_CASE("shooting oracle agrees with the solver on closed-form systems") {
  GridConfig grid;
  {
    ProblemSpec spec = bench::rotgap(0.6);
    VectorXd q(1);
    q[0] = 1.0;
    double p = shoot_graph_point(spec, 0.0, q, 12.0, grid);
    CHECK(std::abs(p - 1.0 / 3.0) <= 1e-3);
  }
  {
    ProblemSpec spec = bench::tanhline(0.5);
    VectorXd q(1);
    q[0] = 1.0;
    double p = shoot_graph_point(spec, 0.0, q, 12.0, grid);
    CHECK(std::abs(p - bench::tanhline_graph(0.5, 1.0)) <= 1e-3);
  }
}

TEST_CASE("shooting oracle vs solver on the non-autonomous benchmark") {
  GridConfig grid;
  ProblemSpec spec = bench::periodic_diag();
  ManifoldSystem sys(spec, grid);
  for (double qv : {0.5, 1.0}) {
    VectorXd q(1);
    q[0] = qv;
    VectorXd eta = vec2(qv, 0.0);
    UnstableSolution sol = sys.solve_graph_point(0.0, eta);
    double oracle = shoot_graph_point(spec, 0.0, q, 12.0, grid);
    CHECK(std::abs(sol.graph_value[0] - oracle) <= 1e-3);
  }
}

TEST_CASE("report tolerances compose as documented") {
  CheckReport rep;
  rep.measured = 1.005;
  rep.bound = 1.0;
  rep.finish();
  CHECK(rep.pass);  // within the 1% relative tolerance
  rep.measured = 1.02;
  rep.finish();
  CHECK_FALSE(rep.pass);
}
