#include "hybridgaze/compensation.hpp"
#include "hybridgaze/error.hpp"

#include "support/random.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace hybridgaze;
using testing_support::Rng;

namespace
{

// Algebraic circle objective for a fixed center: the best radius^2 is the mean
// squared distance, leaving the spread of squared distances.
double algebraic_cost(const std::vector<Vec2>& pts, Vec2 c)
{
  std::vector<double> d2;
  for (const Vec2& p : pts)
    d2.push_back((p.x - c.x) * (p.x - c.x) + (p.y - c.y) * (p.y - c.y));
  double mean = 0.0;
  for (double v : d2)
    mean += v;
  mean /= static_cast<double>(d2.size());
  double cost = 0.0;
  for (double v : d2)
    cost += (v - mean) * (v - mean);
  return cost;
}

// Exhaustive grid search, shrinking the grid around the best node each round.
Vec2 grid_search_center(const std::vector<Vec2>& pts, Vec2 start, double half_width)
{
  Vec2 best = start;
  for (int round = 0; round < 40; ++round)
  {
    Vec2 round_best = best;
    double best_cost = algebraic_cost(pts, best);
    const int steps = 20;
    for (int i = -steps; i <= steps; ++i)
    {
      for (int j = -steps; j <= steps; ++j)
      {
        const Vec2 c{best.x + half_width * i / steps, best.y + half_width * j / steps};
        const double cost = algebraic_cost(pts, c);
        if (cost < best_cost)
        {
          best_cost = cost;
          round_best = c;
        }
      }
    }
    best = round_best;
    half_width *= 0.25;
  }
  return best;
}

std::vector<Glint> circle_glints(Vec2 center, double radius, const std::vector<double>& angles)
{
  std::vector<Glint> g;
  for (double a : angles)
    g.push_back({{center.x + radius * std::cos(a), center.y + radius * std::sin(a)}, true});
  return g;
}

} // namespace

TEST_CASE("combine_glints")
{
  SUBCASE("perfect circle")
  {
    const auto g = circle_glints({10, 20}, 3.0, {0.1, 1.4, 2.9, 4.4});
    const auto est = combine_glints(g);
    CHECK(est.quality == CrFitQuality::CircleFit);
    CHECK(std::abs(est.center.x - 10) <= 1e-9);
    CHECK(std::abs(est.center.y - 20) <= 1e-9);
  }
  SUBCASE("single glint")
  {
    const std::vector<Glint> g{{{5, 5}, true}};
    const auto est = combine_glints(g);
    CHECK(est.center == Vec2{5, 5});
    CHECK(est.quality == CrFitQuality::Centroid);
  }
  SUBCASE("two glints give the midpoint")
  {
    const std::vector<Glint> g{{{0, 0}, true}, {{4, 2}, true}};
    CHECK(combine_glints(g).center == Vec2{2, 1});
  }
  SUBCASE("invalid glints are ignored")
  {
    const std::vector<Glint> g{{{5, 5}, true}, {{100, -40}, false}};
    CHECK(combine_glints(g).center == Vec2{5, 5});
  }
  SUBCASE("no valid glint")
  {
    const std::vector<Glint> g{{{5, 5}, false}};
    try
    {
      combine_glints(g);
      FAIL("expected missing CR");
    }
    catch (const Error& e)
    {
      CHECK(e.code() == ErrorCode::MissingCr);
    }
    CHECK_THROWS_AS(combine_glints(std::vector<Glint>{}), Error);
  }
  SUBCASE("collinear glints fall back to the centroid")
  {
    const std::vector<Glint> g{{{0, 0}, true}, {{1, 1}, true}, {{2, 2}, true}};
    const auto est = combine_glints(g);
    CHECK(est.quality == CrFitQuality::Centroid);
    CHECK(est.center.x == doctest::Approx(1.0));
  }
  SUBCASE("noisy glints match the grid-search oracle")
  {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial)
    {
      const Vec2 center{rng.uniform(-50, 50), rng.uniform(-50, 50)};
      std::vector<double> angles;
      for (int k = 0; k < 4; ++k)
        angles.push_back(k * std::numbers::pi / 2 + rng.uniform(-0.3, 0.3));
      auto g = circle_glints(center, rng.uniform(2, 6), angles);
      std::vector<Vec2> pts;
      for (auto& gl : g)
      {
        gl.center = gl.center + Vec2{rng.normal(0.2), rng.normal(0.2)};
        pts.push_back(gl.center);
      }
      const auto est = combine_glints(g);
      const Vec2 ref = grid_search_center(pts, center, 4.0);
      CHECK(std::abs(est.center.x - ref.x) <= 1e-3);
      CHECK(std::abs(est.center.y - ref.y) <= 1e-3);
    }
  }
  SUBCASE("reordering and translation")
  {
    Rng rng(6);
    for (int trial = 0; trial < 50; ++trial)
    {
      std::vector<Glint> g;
      for (int k = 0; k < 5; ++k)
        g.push_back({{rng.uniform(-5, 5), rng.uniform(-5, 5)}, true});
      const auto base = combine_glints(g).center;

      auto shuffled = g;
      std::shuffle(shuffled.begin(), shuffled.end(), rng.engine());
      const auto reordered = combine_glints(shuffled).center;
      CHECK(reordered.x == doctest::Approx(base.x).epsilon(1e-9));
      CHECK(reordered.y == doctest::Approx(base.y).epsilon(1e-9));

      const Vec2 shift{rng.uniform(-100, 100), rng.uniform(-100, 100)};
      auto moved = g;
      for (auto& gl : moved)
        gl.center = gl.center + shift;
      const auto translated = combine_glints(moved).center;
      CHECK(std::abs(translated.x - (base.x + shift.x)) <= 1e-8);
      CHECK(std::abs(translated.y - (base.y + shift.y)) <= 1e-8);
    }
  }
}

TEST_CASE("compensate")
{
  Rng rng(8);
  const std::size_t n = 20;
  auto random_channel = [&] {
    std::vector<Vec2> s(n);
    for (auto& v : s)
      v = {rng.uniform(-3, 3), rng.uniform(-3, 3)};
    auto c = ChannelTrace::from_samples(0, 0.004, s);
    for (auto& x : c.confidence)
      x = rng.uniform(0, 1);
    return c;
  };
  auto random_velocity = [&] {
    std::vector<Vec2> e(n - 1);
    for (auto& v : e)
      v = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    auto vt = VelocityTrace::from_edges(0, 0.004, e);
    for (auto& m : vt.n_matches)
      m = rng.integer(0, 80);
    return vt;
  };
  const auto zero_channel = ChannelTrace::from_samples(0, 0.004, std::vector<Vec2>(n));
  const auto zero_velocity = VelocityTrace::from_edges(0, 0.004, std::vector<Vec2>(n - 1));

  SUBCASE("zero reference is the identity")
  {
    const auto p = random_channel();
    const auto i = random_velocity();
    const auto out = compensate(p, zero_channel, i, zero_velocity);
    CHECK(out.position.samples == p.samples);
    CHECK(out.position.confidence == p.confidence);
    CHECK(out.velocity.edges == i.edges);
    CHECK(out.velocity.n_matches == i.n_matches);
  }
  SUBCASE("P equal to CR")
  {
    const auto p = random_channel();
    const auto out = compensate(p, p, random_velocity(), zero_velocity);
    for (const auto& s : out.position.samples)
      CHECK(s == Vec2{0, 0});
  }
  SUBCASE("loop subtraction oracle")
  {
    const auto p = random_channel();
    const auto cr = random_channel();
    const auto i = random_velocity();
    const auto hv = random_velocity();
    const auto out = compensate(p, cr, i, hv);
    for (std::size_t k = 0; k < n; ++k)
    {
      CHECK(out.position.samples[k].x == p.samples[k].x - cr.samples[k].x);
      CHECK(out.position.samples[k].y == p.samples[k].y - cr.samples[k].y);
      CHECK(out.position.confidence[k] == std::min(p.confidence[k], cr.confidence[k]));
    }
    for (std::size_t k = 0; k + 1 < n; ++k)
    {
      CHECK(out.velocity.edges[k].x == i.edges[k].x - hv.edges[k].x);
      CHECK(out.velocity.edges[k].y == i.edges[k].y - hv.edges[k].y);
    }
  }
  SUBCASE("linear in the position channel")
  {
    const auto p = random_channel();
    const auto q = random_channel();
    const auto cr = random_channel();
    const auto i = random_velocity();
    auto pq = p;
    for (std::size_t k = 0; k < n; ++k)
      pq.samples[k] = p.samples[k] + q.samples[k];
    const auto a = compensate(pq, cr, i, zero_velocity);
    const auto b = compensate(p, cr, i, zero_velocity);
    for (std::size_t k = 0; k < n; ++k)
    {
      CHECK(a.position.samples[k].x == doctest::Approx(b.position.samples[k].x + q.samples[k].x).epsilon(1e-14));
      CHECK(a.position.samples[k].y == doctest::Approx(b.position.samples[k].y + q.samples[k].y).epsilon(1e-14));
    }
  }
  SUBCASE("length mismatch")
  {
    const auto p = random_channel();
    const auto shorter = ChannelTrace::from_samples(0, 0.004, std::vector<Vec2>(n - 1));
    try
    {
      compensate(p, shorter, random_velocity(), zero_velocity);
      FAIL("expected a dimension error");
    }
    catch (const Error& e)
    {
      CHECK(e.code() == ErrorCode::Dimension);
    }
  }
}
