#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "reofilm/analysis.hpp"
#include "reofilm/timestepping.hpp"

using namespace reofilm;

namespace {

FilmModel power_law(double s, double re, double g1, double g2, double gamma = 1.0,
                    ModelFamily family = ModelFamily::PowerLawUbar) {
  return FilmModel(family, PowerLaw{s, 1.0}, ModelParams::from_components(re, g1, g2, gamma));
}

FilmState uniform(const Grid& g, double eta, double vel) {
  return {std::vector<double>(g.n(), eta), std::vector<double>(g.n(), vel), 0.0};
}

FilmState bump(const Grid& g, double amplitude, double vel = 0.0) {
  FilmState s = uniform(g, 1.0, vel);
  const double c = 0.5 * g.length();
  for (std::size_t i = 0; i < g.n(); ++i) s.eta[i] += amplitude * std::exp(-std::pow(g.x(i) - c, 2));
  return s;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double mass(const FilmState& s) { return std::accumulate(s.eta.begin(), s.eta.end(), 0.0); }

}  // namespace

TEST_CASE("step control validation") {
  StepControl c;
  CHECK_NOTHROW(c.validate());
  c.cfl = 0.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = {};
  c.cfl = 1.5;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = {};
  c.dt_min = 2.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = {};
  c.t_end = -1.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
}

TEST_CASE("stable_dt") {
  SUBCASE("gravity waves about rest") {
    const Grid g(50, 10.0);
    StepControl c;
    c.dt_max = 10.0;
    const double dt = stable_dt(uniform(g, 1.0, 0.0), g, power_law(1.0, 1.0, 0.0, 1.0), c);
    CHECK(dt == doctest::Approx(0.4 * g.dx() / std::sqrt(5.0 / 6.0)).epsilon(1e-12));
  }
  SUBCASE("the bound matches the linearized eigenvalues") {
    const Grid g(50, 10.0);
    StepControl c;
    c.dt_max = 10.0;
    const auto mp = ModelParams::from_components(1.0, 0.0, 1.0);
    const double k = 1e4;
    const auto gr = growth_rates(k, 1.0, 1.0, 1.0, mp);
    // At short waves drag is negligible and the imaginary parts are the wave frequencies.
    const double speed = std::max(std::abs(gr.sigma[0].imag()), std::abs(gr.sigma[1].imag())) / k;
    const double dt = stable_dt(uniform(g, 1.0, 0.0), g, power_law(1.0, 1.0, 0.0, 1.0), c);
    CHECK(0.4 * g.dx() / speed == doctest::Approx(dt).epsilon(1e-3));
  }
  SUBCASE("no wave and no drag") {
    const Grid g(50, 10.0);
    StepControl c;
    c.dt_max = 0.3;
    CHECK(stable_dt(uniform(g, 1.0, 0.0), g, power_law(2.0, 1.0, 0.0, 0.0), c) == 0.3);
  }
  SUBCASE("doubling n halves the advective bound") {
    StepControl c;
    c.dt_max = 10.0;
    c.implicit_drag = true;
    const auto m = power_law(1.0, 1.0, 1.0, 1.0);
    const Grid g1(64, 10.0), g2(128, 10.0);
    const double a = stable_dt(uniform(g1, 1.0, 0.3), g1, m, c);
    const double b = stable_dt(uniform(g2, 1.0, 0.3), g2, m, c);
    CHECK(a / b == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("explicit drag limit") {
    const Grid g(16, 1.0);
    StepControl c;
    c.dt_max = 10.0;
    const auto m = power_law(1.0, 1e-3, 0.0, 0.0);
    // Linear drag rate 2.5 / Re per unit velocity.
    CHECK(stable_dt(uniform(g, 1.0, 0.1), g, m, c) ==
          doctest::Approx(0.4 / 2500.0).epsilon(1e-5));
  }
  SUBCASE("stiffness error below dt_min") {
    const Grid g(16, 1.0);
    StepControl c;
    c.dt_min = 1e-3;
    CHECK_THROWS_WITH_AS(stable_dt(uniform(g, 1.0, 0.1), g, power_law(1.0, 1e-3, 0.0, 0.0), c),
                         doctest::Contains("implicit drag"), StiffnessError);
  }
}

TEST_CASE("rk4 step") {
  SUBCASE("equilibrium is preserved") {
    const Grid g(32, 8.0);
    for (double s : {1.0 / 1.96, 1.0, 2.0}) {
      const auto m = power_law(s, 1.0, 1.0, 1.0);
      const auto s0 = uniform(g, 1.0, equilibrium_velocity(1.0, s, 1.0, 1.0).ubar_eq);
      const auto s1 = advance(s0, 0.01, g, m, StepControl{}).state;
      CHECK(max_abs_diff(s1.vel, s0.vel) <= 1e-12);
      CHECK(max_abs_diff(s1.eta, s0.eta) <= 1e-12);
    }
  }
  SUBCASE("mass is conserved on periodic grids") {
    const Grid g(64, 10.0);
    const auto m = power_law(0.7, 1.0, 0.5, 1.0);
    const auto s0 = bump(g, 0.4, 0.2);
    const auto s1 = advance(s0, 0.01, g, m, StepControl{}).state;
    CHECK(std::abs(mass(s1) - mass(s0)) / mass(s0) <= 1e-13);
  }
  SUBCASE("fifth-order local error on linear drag decay") {
    const Grid g(16, 1.0);
    const auto m = power_law(1.0, 1.0, 0.0, 0.0);
    auto error = [&](double dt) {
      const auto s1 = advance(uniform(g, 1.0, 0.1), dt, g, m, StepControl{}).state;
      return std::abs(s1.vel[0] - 0.1 * std::exp(-2.5 * dt));
    };
    CHECK(error(0.1) / error(0.05) == doctest::Approx(32.0).epsilon(0.05));
  }
  SUBCASE("empty velocity is allowed") {
    FilmState s{{1.0, 2.0}, {}, 0.0};
    const auto out = rk4_step(s, 0.5, [](const FilmState& st) {
      Tendency t;
      t.deta = st.eta;
      return t;
    });
    CHECK(out.eta[0] == doctest::Approx(std::exp(0.5)).epsilon(1e-3));
    CHECK(out.vel.empty());
    CHECK(out.time == 0.5);
  }
}

TEST_CASE("positivity safeguard") {
  const Grid g(16, 1.0);
  StepControl c;
  auto drain = [](const FilmState& s) {
    Tendency t;
    t.deta.assign(s.eta.size(), -1.0);
    t.dvel.assign(s.vel.size(), 0.0);
    return t;
  };
  FilmState s = uniform(g, 1.0, 0.0);
  s.eta[3] = 0.01;
  SUBCASE("rejects steps that would inject fluid") {
    const auto r = positivity_preserving_step(s, 0.05, c, drain);
    CHECK(r.rejections >= 1);
    CHECK(r.dt < 0.05);
    CHECK(r.state.eta[3] >= c.eta_floor);
  }
  SUBCASE("gives up below dt_min with the last good state") {
    c.dt_min = 0.02;
    c.dt_max = 1.0;
    try {
      positivity_preserving_step(s, 0.05, c, drain);
      FAIL("expected a SimulationError");
    } catch (const SimulationError& e) {
      CHECK(e.snapshot().eta == s.eta);
    }
  }
}

TEST_CASE("implicit relaxation solve") {
  const auto m = power_law(0.6, 1e-3, 1.0, 1.0);
  const PointState p{1.2, 0.0, 0.05, 0.0};
  for (double dt : {1e-4, 1e-2, 1.0}) {
    const double v = solve_implicit_relaxation(m, p, 0.3, dt);
    const double relax = m.rhs({p.eta, v, p.deta_dx, 0.0}).momentum.relaxation();
    CHECK(v - dt * relax == doctest::Approx(0.3).epsilon(1e-12));
  }
  // A very long implicit step lands on the drag/gravity balance.
  const double v = solve_implicit_relaxation(m, p, 0.0, 1e8);
  CHECK(v == doctest::Approx(lubrication_velocity(1.2, 0.05, 0.6, 1.0, 1.0, 1.0)).epsilon(1e-6));
}

TEST_CASE("integrate") {
  SUBCASE("zero duration returns the initial state") {
    const Grid g(16, 4.0);
    const auto s0 = bump(g, 0.3, 0.1);
    StepControl c;
    int calls = 0;
    const auto s1 = integrate(s0, g, power_law(1.0, 1.0, 1.0, 1.0), c, [&](const SimRecord&) { ++calls; });
    CHECK(s1.eta == s0.eta);
    CHECK(s1.vel == s0.vel);
    CHECK(calls == 1);
  }
  SUBCASE("uniform equilibrium stays put") {
    const Grid g(64, 10.0);
    for (double s : {1.0 / 1.96, 2.0}) {
      const auto m = power_law(s, 1.0, 1.0, 1.0);
      const auto s0 = uniform(g, 1.0, equilibrium_velocity(1.0, s, 1.0, 1.0).ubar_eq);
      StepControl c;
      c.t_end = 10.0;
      const auto s1 = integrate(s0, g, m, c);
      CHECK(max_abs_diff(s1.vel, s0.vel) < 1e-8);
      CHECK(max_abs_diff(s1.eta, s0.eta) < 1e-8);
      CHECK(s1.time == 10.0);
    }
  }
  SUBCASE("uniform shear of the artificial system is exact") {
    const Grid g(32, 10.0);
    const auto m = power_law(0.8, 1.0, 0.0, 0.0, 0.0, ModelFamily::EtaE);
    const auto s0 = uniform(g, 1.3, 0.7);
    StepControl c;
    c.t_end = 3.0;
    const auto s1 = integrate(s0, g, m, c);
    CHECK(s1.eta == s0.eta);
    CHECK(s1.vel == s0.vel);
  }
  SUBCASE("observer cadence") {
    const Grid g(32, 10.0);
    StepControl c;
    c.t_end = 1.0;
    c.output_every = 0.25;
    std::vector<double> times;
    integrate(bump(g, 0.2), g, power_law(1.0, 1.0, 0.0, 1.0), c,
              [&](const SimRecord& r) { times.push_back(r.time); });
    CHECK(times == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  }
  SUBCASE("mass over a thousand steps") {
    const Grid g(64, 10.0);
    StepControl c;
    c.dt_max = 1e-3;
    c.t_end = 1.0;
    c.output_every = 1e-3;
    const auto s0 = bump(g, 0.5);
    std::size_t records = 0;
    const auto s1 = integrate(s0, g, power_law(1.0 / 1.96, 1.0, 1.0, 1.0), c,
                              [&](const SimRecord&) { ++records; });
    CHECK(records >= 1000);
    CHECK(std::abs(mass(s1) - mass(s0)) / mass(s0) <= 1e-10);
  }
  SUBCASE("deterministic") {
    const Grid g(64, 10.0);
    StepControl c;
    c.t_end = 2.0;
    const auto m = power_law(0.7, 2.0, 0.5, 1.0);
    const auto a = integrate(bump(g, 0.3), g, m, c);
    const auto b = integrate(bump(g, 0.3), g, m, c);
    CHECK(a.eta == b.eta);
    CHECK(a.vel == b.vel);
  }
  SUBCASE("fourth-order convergence in dt") {
    const Grid g(64, 10.0);
    const auto m = power_law(0.7, 2.0, 0.5, 1.0);
    auto run = [&](double dt) {
      FilmState s = bump(g, 0.3, 0.1);
      const int steps = static_cast<int>(std::lround(0.8 / dt));
      for (int i = 0; i < steps; ++i) s = advance(s, dt, g, m, StepControl{}).state;
      return s;
    };
    const auto a = run(0.04), b = run(0.02), c = run(0.01);
    const double ratio = std::max(max_abs_diff(a.vel, b.vel), max_abs_diff(a.eta, b.eta)) /
                         std::max(max_abs_diff(b.vel, c.vel), max_abs_diff(b.eta, c.eta));
    CHECK(ratio == doctest::Approx(16.0).epsilon(0.15));
  }
  SUBCASE("mismatched state") {
    const Grid g(16, 4.0);
    FilmState s = uniform(g, 1.0, 0.0);
    s.vel.pop_back();
    CHECK_THROWS_AS(integrate(s, g, power_law(1.0, 1.0, 0.0, 1.0), StepControl{}), DomainError);
  }
  SUBCASE("implicit drag at small Reynolds number") {
    const Grid g(32, 10.0);
    StepControl c;
    c.implicit_drag = true;
    c.t_end = 0.5;
    const auto m = power_law(1.0, 1e-4, 1.0, 1.0);
    const auto s1 = integrate(uniform(g, 1.0, 0.0), g, m, c);
    for (double v : s1.vel) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  }
}
