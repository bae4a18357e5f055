#include <cmath>
#include <sstream>

#include "doctest.h"
#include "ramanpd/de_optimizer.hpp"
#include "ramanpd/error.hpp"

using namespace rpd;

namespace {

/// Cheap smooth objective with its minimum at 'centre'.
Objective sphere(const PumpArray& centre, std::size_t* calls = nullptr) {
  return [centre, calls](const PumpConfig& p) {
    if (calls) ++*calls;
    Evaluation e;
    double s = 0.0;
    for (std::size_t j = 0; j < kPumpCount; ++j) {
      const double d = (p.powers_mw[j] - centre[j]) / centre[j];
      s += d * d;
    }
    e.cost = e.j0 = s;
    e.converged = true;
    return e;
  };
}

PumpArray mid_table() {
  const Bounds b = Bounds::table();
  PumpArray c{};
  for (std::size_t j = 0; j < kPumpCount; ++j) c[j] = 0.5 * (b.lower[j] + b.upper[j]);
  return c;
}

Population uniform_population(std::size_t n, double v) {
  Population pop(n);
  for (auto& ind : pop) {
    ind.x.powers_mw.fill(v);
    ind.eval.cost = 1.0;
  }
  return pop;
}

}  // namespace

TEST_CASE("bounds from a prediction") {
  PumpConfig p;
  p.powers_mw.fill(100.0);
  p.powers_mw[0] = 1000.0;
  const Bounds b = bounds_from_prediction(p, default_delta_p());
  CHECK(b.lower[0] == doctest::Approx(650.0));
  CHECK(b.upper[0] == doctest::Approx(1350.0));
  CHECK(b.lower[1] == doctest::Approx(50.0));
  CHECK(b.upper[1] == doctest::Approx(150.0));
  PumpArray bad = default_delta_p();
  bad[3] = 1.0;
  CHECK_THROWS_AS(bounds_from_prediction(p, bad), Error);
  p.powers_mw[2] = 0.0;
  CHECK_THROWS_AS(bounds_from_prediction(p, default_delta_p()), Error);

  // A 1230 mW counter-pump prediction admits 1480 mW.
  PumpConfig q;
  q.powers_mw.fill(50.0);
  q.powers_mw[4] = 1230.0;
  PumpConfig r = q;
  r.powers_mw[4] = 1480.0;
  CHECK(bounds_from_prediction(q, default_delta_p()).contains(r));
}

TEST_CASE("table bounds are the pump table extremes") {
  const Bounds b = Bounds::table();
  CHECK(b.lower[0] == 200.0);
  CHECK(b.upper[0] == 1200.0);
  CHECK(b.lower[4] == 200.0);
  CHECK(b.upper[4] == 1200.0);
  CHECK(b.lower[1] == 5.0);
  CHECK(b.upper[7] == 150.0);
  PumpConfig face;
  face.powers_mw = b.upper;
  CHECK(b.contains(face));  // inclusive
  face.powers_mw[3] = std::nextafter(150.0, 200.0);
  CHECK_FALSE(b.contains(face));
}

TEST_CASE("parameter validation") {
  DEParams p;
  CHECK_NOTHROW(p.validate());
  p.population_size = 3;
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  p.mutation_factor = 1.5;
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  p.crossover_prob = -0.1;
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  p.max_evaluations = 10;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("mutation") {
  Rng rng(1);
  SUBCASE("identical population gives the common vector") {
    const Population pop = uniform_population(5, 42.0);
    const PumpConfig v = mutate(pop, 2, 0.8, rng);
    for (double x : v.powers_mw) CHECK(x == 42.0);
  }
  SUBCASE("F = 0 returns a partner unchanged") {
    Population pop = uniform_population(6, 0.0);
    for (std::size_t i = 0; i < pop.size(); ++i) pop[i].x.powers_mw.fill(10.0 * i);
    const PumpConfig v = mutate(pop, 0, 0.0, rng);
    const double x = v.powers_mw[0];
    CHECK(x != 0.0);
    CHECK(std::fmod(x, 10.0) == 0.0);
  }
  SUBCASE("difference vector arithmetic") {
    // Four individuals: target 0, and r1, r2, r3 is some permutation of {1,2,3}.
    Population pop = uniform_population(4, 0.0);
    pop[1].x.powers_mw.fill(100.0);
    pop[2].x.powers_mw.fill(110.0);
    pop[3].x.powers_mw.fill(100.0);
    for (int n = 0; n < 50; ++n) {
      const double v = mutate(pop, 0, 0.8, rng).powers_mw[0];
      const bool ok = std::abs(v - 108.0) < 1e-12 || std::abs(v - 92.0) < 1e-12 ||
                      std::abs(v - 100.0) < 1e-12 || std::abs(v - 118.0) < 1e-12 ||
                      std::abs(v - 102.0) < 1e-12 || std::abs(v - 110.0) < 1e-12;
      CHECK(ok);
    }
  }
  SUBCASE("partners are distinct and exclude the target") {
    // Encode each individual's index in its vector: donors with F = 1 reveal
    // r1 + r2 - r3, and with powers 1, 10, 100, 1000, 10000 the triple is
    // recoverable up to swapping r1 and r2.
    Population pop = uniform_population(5, 0.0);
    const double code[5] = {1, 10, 100, 1000, 10000};
    for (std::size_t i = 0; i < 5; ++i) pop[i].x.powers_mw.fill(code[i]);
    for (int n = 0; n < 200; ++n) {
      const std::size_t target = static_cast<std::size_t>(n % 5);
      const double v = mutate(pop, target, 1.0, rng).powers_mw[0];
      int hits = 0;
      for (std::size_t a = 0; a < 5; ++a)
        for (std::size_t b = 0; b < 5; ++b)
          for (std::size_t c = 0; c < 5; ++c) {
            if (a == b || b == c || a == c || a == target || b == target || c == target) continue;
            if (code[a] + code[b] - code[c] == v) ++hits;
          }
      CHECK(hits == 2);
    }
  }
  SUBCASE("too few individuals") {
    const Population pop = uniform_population(3, 1.0);
    try {
      mutate(pop, 0, 0.5, rng);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::invalid_state);
    }
  }
}

TEST_CASE("crossover") {
  Rng rng(3);
  PumpConfig x, v;
  for (std::size_t j = 0; j < kPumpCount; ++j) {
    x.powers_mw[j] = 1.0 + j;
    v.powers_mw[j] = 100.0 + j;
  }
  CHECK(crossover(x, v, 1.0, rng).powers_mw == v.powers_mw);
  for (int n = 0; n < 50; ++n) {
    const PumpConfig u = crossover(x, v, 0.0, rng);
    int from_donor = 0;
    for (std::size_t j = 0; j < kPumpCount; ++j) from_donor += u.powers_mw[j] == v.powers_mw[j];
    CHECK(from_donor == 1);
  }
  CHECK(crossover(x, x, 0.5, rng).powers_mw == x.powers_mw);
}

TEST_CASE("step_individual") {
  const Bounds b = Bounds::table();
  DEParams params;
  params.population_size = 4;
  params.max_evaluations = 4;
  SUBCASE("out-of-bounds trial is rejected without an evaluation") {
    std::size_t calls = 0;
    const Objective f = sphere(mid_table(), &calls);
    Population pop = uniform_population(4, 100.0);
    pop[1].x.powers_mw.fill(1000.0);
    pop[2].x.powers_mw.fill(10.0);
    pop[3].x.powers_mw.fill(10.0);
    // Every donor is either 1000 + F*0 = 1000 (> 150 for small pumps) or
    // 10 + F*(+-990): always outside the table box in some coordinate.
    params.crossover_prob = 1.0;
    OptimizationTrace t;
    Rng rng(5);
    const Population before = pop;
    const std::size_t used = step_individual(0, pop, f, b, params, rng, t);
    CHECK(used == 0);
    CHECK(calls == 0);
    CHECK(t.rejected_trial_count == 1);
    CHECK(t.records.empty());
    CHECK(pop[0].x.powers_mw == before[0].x.powers_mw);
  }
  SUBCASE("ties replace the target") {
    const Objective flat = [](const PumpConfig&) {
      Evaluation e;
      e.cost = 1.0;
      e.converged = true;
      return e;
    };
    Population pop = uniform_population(4, 50.0);
    pop[1].x.powers_mw = mid_table();
    pop[2].x.powers_mw = mid_table();
    pop[3].x.powers_mw = mid_table();
    for (auto& ind : pop) ind.eval.cost = 1.0;
    params.crossover_prob = 1.0;
    params.mutation_factor = 0.0;
    OptimizationTrace t;
    Rng rng(1);
    CHECK(step_individual(0, pop, flat, b, params, rng, t) == 1);
    CHECK(pop[0].x.powers_mw == mid_table());
  }
  SUBCASE("worse trial keeps the target") {
    const PumpArray c = mid_table();
    const Objective f = sphere(c);
    Population pop = uniform_population(4, 0.0);
    pop[0].x.powers_mw = c;
    pop[0].eval = f(pop[0].x);
    for (std::size_t i = 1; i < 4; ++i) {
      pop[i].x.powers_mw = c;
      pop[i].x.powers_mw[1] = 20.0 + 10.0 * i;
      pop[i].eval = f(pop[i].x);
    }
    params.crossover_prob = 1.0;
    OptimizationTrace t;
    Rng rng(2);
    const std::size_t used = step_individual(0, pop, f, b, params, rng, t);
    if (used == 1) {
      CHECK(pop[0].x.powers_mw == c);
      CHECK(pop[0].eval.cost == 0.0);
    }
  }
}

TEST_CASE("fixed point with F = 0, CR = 0 and an identical population") {
  DEParams params;
  params.mutation_factor = 0.0;
  params.crossover_prob = 0.0;
  const Bounds b = Bounds::table();
  const Objective f = sphere(mid_table());
  Population pop = uniform_population(params.population_size, 0.0);
  PumpConfig x;
  x.powers_mw = {700, 40, 90, 60, 500, 20, 130, 70};
  for (auto& ind : pop) ind = {x, f(x)};
  OptimizationTrace t;
  Rng rng(17);
  for (int gen = 0; gen < 5; ++gen)
    for (std::size_t i = 0; i < pop.size(); ++i) step_individual(i, pop, f, b, params, rng, t);
  for (const auto& ind : pop) CHECK(ind.x.powers_mw == x.powers_mw);
  CHECK(t.rejected_trial_count == 0);
  CHECK(t.records.size() == 5 * params.population_size);
}

TEST_CASE("run: budget, monotone best and determinism") {
  DEParams params;
  params.max_evaluations = 400;
  params.seed = 11;
  std::size_t calls = 0;
  const Objective f = sphere(mid_table(), &calls);
  const OptimizationTrace t = run(f, Bounds::table(), params);
  CHECK(t.evaluations() == 400);
  CHECK(calls == 400);
  CHECK_FALSE(t.generation_cap_hit);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < t.records.size(); ++k) {
    CHECK(t.records[k].eval_index == k + 1);
    best = std::min(best, t.records[k].eval.cost);
    CHECK(t.records[k].best_so_far == best);
    CHECK(Bounds::table().contains(t.records[k].candidate));
  }
  CHECK(t.best.eval.cost == best);
  CHECK(t.best.eval.cost < t.records[29].best_so_far);

  const OptimizationTrace again = run(f, Bounds::table(), params);
  REQUIRE(again.records.size() == t.records.size());
  for (std::size_t k = 0; k < t.records.size(); ++k)
    CHECK(again.records[k].candidate.powers_mw == t.records[k].candidate.powers_mw);
}

TEST_CASE("run: budget equal to the population returns the best initial draw") {
  DEParams params;
  params.max_evaluations = params.population_size;
  const OptimizationTrace t = run(sphere(mid_table()), Bounds::table(), params);
  CHECK(t.evaluations() == params.population_size);
  CHECK(t.generations == 0);
  double best = 1e300;
  for (const auto& r : t.records) best = std::min(best, r.eval.cost);
  CHECK(t.best.eval.cost == best);
}

TEST_CASE("run: generation cap stops a rejection-dominated search") {
  DEParams params;
  params.max_generations = 3;
  params.max_evaluations = 100000;
  params.mutation_factor = 1.0;
  params.crossover_prob = 1.0;
  Bounds tight;
  for (std::size_t j = 0; j < kPumpCount; ++j) {
    tight.lower[j] = 100.0;
    tight.upper[j] = 100.0 + 1e-9;
  }
  const OptimizationTrace t = run(sphere(mid_table()), tight, params);
  CHECK(t.generation_cap_hit);
  CHECK(t.generations == 3);
  CHECK(t.evaluations() + t.rejected_trial_count == 30 + 3 * 30);
}

TEST_CASE("run: non-convergent candidates count but cannot win") {
  DEParams params;
  params.max_evaluations = 60;
  std::size_t n = 0;
  const Objective f = [&n](const PumpConfig& p) {
    Evaluation e;
    if (++n % 2 == 0) return e;  // every other solve "fails"
    e.cost = p.powers_mw[0];
    e.converged = true;
    return e;
  };
  const OptimizationTrace t = run(f, Bounds::table(), params);
  CHECK(t.evaluations() == 60);
  CHECK(std::isfinite(t.best.eval.cost));
  const Objective never = [](const PumpConfig&) { return Evaluation{}; };
  CHECK_THROWS_AS(run(never, Bounds::table(), params), Error);
}

TEST_CASE("initial population is seeded and inside the box") {
  const Bounds b = bounds_from_prediction(PumpConfig{{500, 50, 50, 50, 500, 50, 50, 50}}, default_delta_p());
  OptimizationTrace t1, t2;
  Rng r1(4), r2(4);
  const auto p1 = init_population(b, 30, r1, sphere(mid_table()), t1);
  const auto p2 = init_population(b, 30, r2, sphere(mid_table()), t2, 3);
  REQUIRE(p1.size() == 30);
  for (std::size_t i = 0; i < 30; ++i) {
    CHECK(b.contains(p1[i].x));
    CHECK(p1[i].x.powers_mw == p2[i].x.powers_mw);
    CHECK(p1[i].eval.cost == p2[i].eval.cost);
  }
  CHECK(t1.evaluations() == 30);
}

TEST_CASE("multi-trial statistics") {
  DEParams params;
  params.max_evaluations = 90;
  const Objective f = sphere(mid_table());
  const std::vector<std::uint64_t> same{5, 5, 5};
  const auto traces = run_trials([&](std::uint64_t s) {
    DEParams p = params;
    p.seed = s;
    return run(f, Bounds::table(), p);
  }, same, 2);
  const TrialStats st = multi_trial_stats(traces);
  CHECK(st.mean.size() == 90);
  for (double s : st.stddev) CHECK(s == 0.0);
  CHECK(st.final_costs.size() == 3);
  CHECK_THROWS_AS(multi_trial_stats(std::span<const OptimizationTrace>(traces.data(), 1)), Error);

  // Padding: a shorter trace holds its last value.
  OptimizationTrace a, b;
  Evaluation e;
  e.cost = 4.0;
  a.record({}, e);
  b.record({}, e);
  e.cost = 2.0;
  b.record({}, e);
  const std::vector<OptimizationTrace> ab{a, b};
  const TrialStats pad = multi_trial_stats(ab);
  CHECK(pad.mean[1] == 3.0);
  CHECK(pad.stddev[1] == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("trace CSV layout") {
  OptimizationTrace t;
  Evaluation e;
  e.cost = 1.5;
  e.j0 = 1.5;
  e.j1 = 0.5;
  e.j2 = 0.25;
  PumpConfig p;
  p.powers_mw = {1, 2, 3, 4, 5, 6, 7, 8};
  t.record(p, e);
  std::ostringstream out;
  write_trace_csv(t, out, "h");
  CHECK(out.str() ==
        "# config_hash=h\neval_index,p1,p2,p3,p4,p5,p6,p7,p8,j0,j1,j2,weighted_or_asym,best_so_far\n"
        "1,1,2,3,4,5,6,7,8,1.5,0.5,0.25,1.5,1.5\n");
}
