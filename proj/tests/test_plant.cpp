#include <gtest/gtest.h>

#include <cmath>

#include "lshed/plant.hpp"

using namespace lshed;

namespace {

LoadSpec spec(LoadId id, double rated, Variability v = Variability::continuous()) {
  LoadSpec s;
  s.id = id;
  s.group = LoadGroup::Pmm;
  s.rated_power_w = rated;
  s.variability = std::move(v);
  return s;
}

PlantModel one_load(double tau, std::vector<std::pair<TimeMs, double>> bps) {
  PlantModel m;
  m.fleet = {spec(1, 10e6)};
  m.generation = default_generation();
  m.profiles = {{1, std::move(bps)}};
  m.tau_s = tau;
  return m;
}

}  // namespace

TEST(Plant, SampleProfile) {
  LoadProfile p{1, {{0, 1.0}, {395'000, 0.6}}};
  EXPECT_EQ(sample_profile(p, 100'000), 1.0);
  EXPECT_EQ(sample_profile(p, 395'000), 0.6);
  EXPECT_EQ(sample_profile(p, 600'000), 0.6);
  LoadProfile late{1, {{1000, 1.0}}};
  EXPECT_EQ(sample_profile(late, 0), 0.0);
}

TEST(Plant, ApplyCommands) {
  PlantModel m = one_load(0.2, {{0, 1.0}});
  PlantState st = plant_init(m, 0);
  std::vector<ShedCommand> half = {{1, 0.5}};
  st = apply_commands(m, st, half);
  EXPECT_DOUBLE_EQ(st.loads[0].target_w, 5e6);

  PlantModel low = one_load(0.2, {{0, 0.6}});
  PlantState s2 = plant_init(low, 0);
  std::vector<ShedCommand> full = {{1, 1.0}};
  s2 = apply_commands(low, s2, full);
  EXPECT_DOUBLE_EQ(s2.loads[0].target_w, 6e6);

  PlantModel bin = one_load(0.2, {{0, 1.0}});
  bin.fleet[0].variability = Variability::binary();
  PlantState s3 = apply_commands(bin, plant_init(bin, 0), std::vector<ShedCommand>{{1, 0.0}});
  EXPECT_EQ(s3.loads[0].target_w, 0.0);
}

TEST(Plant, UnknownCommandIgnored) {
  PlantModel m = one_load(0.2, {{0, 1.0}});
  PlantState st = plant_init(m, 0);
  PlantState after = apply_commands(m, st, std::vector<ShedCommand>{{99, 0.0}});
  EXPECT_EQ(after.ignored_commands, 1u);
  EXPECT_EQ(after.loads, st.loads);
}

TEST(Plant, FirstOrderLag) {
  // Demand steps 0 -> 1 at t = 0.1 s on a 10 MW load.
  PlantModel m = one_load(0.2, {{0, 0.0}, {100, 1.0}});
  PlantState st = plant_init(m, 0);
  EXPECT_EQ(st.loads[0].measured_w, 0.0);
  auto [s1, snap] = plant_tick(m, st, 100);
  EXPECT_NEAR(s1.loads[0].measured_w, 3934693.402873666, 1e-6);  // 10e6 * (1 - exp(-0.5))
  EXPECT_EQ(snap.loads[0].measured_power_w, s1.loads[0].measured_w);
}

TEST(Plant, ZeroTauSnaps) {
  PlantModel m = one_load(0.0, {{0, 0.0}, {100, 1.0}});
  auto [s1, snap] = plant_tick(m, plant_init(m, 0), 100);
  EXPECT_EQ(s1.loads[0].measured_w, 10e6);
}

TEST(Plant, LagConvergesWithinFiveTau) {
  PlantModel m = one_load(0.2, {{0, 0.0}, {100, 1.0}});
  PlantState st = plant_init(m, 0);
  for (int k = 0; k < 11; ++k) st = plant_tick(m, st, 100).first;  // 1.1 s > 5 tau after the step
  EXPECT_GT(st.loads[0].measured_w, 0.99 * 10e6);
}

TEST(Plant, GeneratorTrip) {
  PlantModel m = one_load(0.2, {{0, 1.0}});
  m.events = {{310'000, PlantEvent::Kind::GeneratorTrip, 2, 0, "", 0.0}};
  PlantState st = plant_init(m, 309'900);
  EXPECT_DOUBLE_EQ(make_snapshot(m, st).total_capacity_w, 96e6);
  auto [s1, snap] = plant_tick(m, st, 100);
  EXPECT_EQ(snap.time_ms, 310'000);
  EXPECT_DOUBLE_EQ(snap.total_capacity_w, 60e6);
}

TEST(Plant, LoadFailureForcesOff) {
  PlantModel m = one_load(0.0, {{0, 1.0}});
  m.events = {{200, PlantEvent::Kind::LoadFailure, 0, 1, "", 0.0}};
  PlantState st = plant_init(m, 0);
  st = plant_tick(m, st, 100).first;
  EXPECT_EQ(st.loads[0].measured_w, 10e6);
  st = plant_tick(m, st, 100).first;
  EXPECT_TRUE(st.forced_off.count(1));
  EXPECT_EQ(st.loads[0].measured_w, 0.0);
}

TEST(Plant, FixedPoint) {
  PlantModel m = one_load(0.2, {{0, 0.7}});
  PlantState st = plant_init(m, 0);
  PlantState next = plant_tick(m, st, 100).first;
  EXPECT_EQ(next.clock_ms, 100);
  next.clock_ms = st.clock_ms;
  EXPECT_EQ(next, st);
}

TEST(Plant, SnapshotBookkeeping) {
  PlantModel m;
  m.fleet = default_fleet();
  m.generation = default_generation();
  for (const auto& l : m.fleet) m.profiles.push_back({l.id, {{0, 1.0}, {500, 0.5 * (l.variability.kind == Variability::Kind::Continuous)}}});
  PlantState st = plant_init(m, 0);
  for (int k = 0; k < 10; ++k) {
    auto [next, snap] = plant_tick(m, st, 100);
    double total = 0.0;
    for (const auto& l : snap.loads) total += l.measured_power_w;
    EXPECT_EQ(snap.total_measured_w(), total);
    EXPECT_DOUBLE_EQ(snap.total_loss_w, m.loss_fraction * total);
    EXPECT_DOUBLE_EQ(snap.loading_pu, (total + snap.total_loss_w) / snap.total_capacity_w);
    for (std::size_t i = 0; i < snap.loads.size(); ++i) EXPECT_LE(snap.loads[i].measured_power_w, m.fleet[i].rated_power_w);
    st = next;
  }
}

TEST(Plant, DemandLimiting) {
  // Measured power never rises above min(commanded, demand) x rated.
  PlantModel m = one_load(0.2, {{0, 0.2}, {300, 1.0}, {900, 0.4}});
  PlantState st = plant_init(m, 0);
  double prev = st.loads[0].measured_w;
  for (int k = 0; k < 20; ++k) {
    if (k == 5) st = apply_commands(m, st, std::vector<ShedCommand>{{1, 0.5}});
    st = plant_tick(m, st, 100).first;
    const double cap = std::min(st.loads[0].commanded, st.loads[0].demand) * 10e6;
    EXPECT_LE(st.loads[0].measured_w, std::max(cap, prev) + 1e-6);
    prev = st.loads[0].measured_w;
  }
}

TEST(Plant, Deterministic) {
  PlantModel m;
  m.fleet = default_fleet();
  m.generation = default_generation();
  for (const auto& l : m.fleet) m.profiles.push_back({l.id, {{0, 1.0}, {l.id * 100, 0.0}}});
  auto run = [&] {
    std::vector<SystemSnapshot> out;
    PlantState st = plant_init(m, 0);
    for (int k = 0; k < 60; ++k) {
      auto [n, s] = plant_tick(m, st, 100);
      st = n;
      out.push_back(s);
    }
    return out;
  };
  EXPECT_EQ(run(), run());
}

TEST(Plant, EventsSorted) {
  std::vector<PlantEvent> ev = {{300, PlantEvent::Kind::GeneratorTrip, 1, 0, "", 0},
                                {100, PlantEvent::Kind::GeneratorTrip, 2, 0, "", 0},
                                {300, PlantEvent::Kind::GeneratorRestore, 1, 0, "", 0}};
  auto s = sorted_events(ev);
  EXPECT_EQ(s[0].time, 100);
  EXPECT_EQ(s[1].kind, PlantEvent::Kind::GeneratorTrip);
  EXPECT_EQ(s[2].kind, PlantEvent::Kind::GeneratorRestore);
}
