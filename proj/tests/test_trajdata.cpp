#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "plab/errors.hpp"
#include "plab/trajdata.hpp"

using namespace plab;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / name;
  std::ofstream f(p, std::ios::binary);
  f << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

std::vector<traj::TrajectoryRecord> ramp_records(std::size_t n) {
  std::vector<traj::TrajectoryRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 0.1 * i;
    out.push_back({t, 10.0 + 0.01 * i, 0.1, 11.0, 0.0, 20.0 + 0.05 * i});
  }
  return out;
}

}  // namespace

TEST_CASE("load a well-formed file") {
  const auto p = temp_file("plab_ok.csv",
                           "t,v_f,a_f,v_l,a_l,spacing\n0,10,0,11,0,20\n0.1,10.1,1,11,0,20.1\n0.2,10.2,1,11,0,20.2\n");
  const auto recs = traj::load_csv(p);
  REQUIRE(recs.size() == 3);
  CHECK(recs[1].v_f == 10.1);
  CHECK(recs[2].spacing == 20.2);
}

TEST_CASE("columns in any order, extra columns ignored") {
  const auto p = temp_file("plab_cols.csv", "spacing,id,t,a_l,v_l,a_f,v_f\n20,7,0,0,11,0,10\n21,7,0.1,0,11,0.5,10.05\n");
  const auto recs = traj::load_csv(p);
  REQUIRE(recs.size() == 2);
  CHECK(recs[1].a_f == 0.5);
  CHECK(recs[0].spacing == 20.0);
}

TEST_CASE("schema, sampling and value errors") {
  try {
    traj::load_csv(temp_file("plab_schema.csv", "t,v_f,a_f,v_l,spacing\n0,1,0,1,5\n"));
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.column() == "a_l");
  }
  try {
    traj::load_csv(temp_file("plab_dt.csv",
                             "t,v_f,a_f,v_l,a_l,spacing\n0,1,0,1,0,5\n0.1,1,0,1,0,5\n0.3,1,0,1,0,5\n"));
    FAIL("expected SamplingError");
  } catch (const SamplingError& e) {
    CHECK(e.row() == 4);
  }
  try {
    traj::load_csv(temp_file("plab_gap.csv", "t,v_f,a_f,v_l,a_l,spacing\n0,1,0,1,0,5\n0.1,1,0,1,0,0\n"));
    FAIL("expected ValueError");
  } catch (const ValueError& e) {
    CHECK(e.row() == 3);
  }
  CHECK_THROWS_AS(traj::load_csv(temp_file("plab_nan.csv", "t,v_f,a_f,v_l,a_l,spacing\n0,nan,0,1,0,5\n")),
                  ValueError);
  CHECK_THROWS_AS(traj::load_csv(temp_file("plab_txt.csv", "t,v_f,a_f,v_l,a_l,spacing\n0,abc,0,1,0,5\n")),
                  ValueError);
}

TEST_CASE("write/load round-trip is exact") {
  std::vector<traj::TrajectoryRecord> recs;
  for (int i = 0; i < 50; ++i) {
    recs.push_back({0.1 * i, 10.0 / 3.0 + i * 1e-7, std::sin(i), 12.345678901234567, -0.1 * i, 7.0 + 1.0 / 7.0});
  }
  const fs::path p = fs::temp_directory_path() / "plab_rt.csv";
  traj::write_csv(p, recs);
  const auto back = traj::load_csv(p);
  REQUIRE(back.size() == recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(back[i] == recs[i]);
  }
  const fs::path p2 = fs::temp_directory_path() / "plab_rt2.csv";
  traj::write_csv(p2, back);
  CHECK(slurp(p) == slurp(p2));
}

TEST_CASE("windows") {
  CHECK(traj::make_windows(ramp_records(100), 30).size() == 70);
  CHECK(traj::make_windows(ramp_records(31), 30).size() == 1);
  CHECK_THROWS_AS(traj::make_windows(ramp_records(30), 30), LengthError);
  CHECK_THROWS_AS(traj::make_windows(ramp_records(30), 0), ArgError);

  const auto recs = ramp_records(40);
  const auto w = traj::make_windows(recs, 5);
  CHECK(w[3].k == 5);
  CHECK(w[3].at(0, 0) == recs[3].v_f);
  CHECK(w[3].at(4, 4) == recs[7].spacing);
  CHECK(w[3].label == recs[8].a_f);

  // Window j of records[1:] equals window j+1 of records.
  const auto shifted = traj::make_windows(std::span(recs).subspan(1), 5);
  for (std::size_t j = 0; j + 1 < w.size(); ++j) {
    CHECK(shifted[j].features == w[j + 1].features);
    CHECK(shifted[j].label == w[j + 1].label);
  }
}

TEST_CASE("splits") {
  const auto idx = traj::split_indices(100, {}, 3);
  CHECK(idx.train.size() == 70);
  CHECK(idx.val.size() == 15);
  CHECK(idx.test.size() == 15);
  const auto again = traj::split_indices(100, {}, 3);
  CHECK(again.train == idx.train);
  CHECK(again.test == idx.test);
  CHECK(traj::split_indices(100, {}, 4).train != idx.train);

  std::vector<std::size_t> all;
  for (const auto* part : {&idx.train, &idx.val, &idx.test}) all.insert(all.end(), part->begin(), part->end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < 100; ++i) CHECK(all[i] == i);

  CHECK_THROWS_AS(traj::split_indices(10, {0.5, 0.5, 0.5}, 1), ArgError);
  CHECK_THROWS_AS(traj::split_indices(10, {1.2, -0.1, -0.1}, 1), ArgError);

  std::vector<int> items{5, 5, 6, 7, 8, 9, 9, 1, 2, 3};
  const auto s = traj::split(items, {0.5, 0.3, 0.2}, 8);
  std::vector<int> joined;
  for (const auto* part : {&s.train, &s.val, &s.test}) joined.insert(joined.end(), part->begin(), part->end());
  std::sort(joined.begin(), joined.end());
  auto sorted = items;
  std::sort(sorted.begin(), sorted.end());
  CHECK(joined == sorted);
}

TEST_CASE("leader profiles") {
  const auto [v, a] = traj::leader_speed(traj::SineProfile{15.0, 3.0, 30.0}, 7.5);
  CHECK(v == doctest::Approx(18.0));
  CHECK(std::abs(a) <= 1e-12);
  const traj::RampProfile ramp{{{0.0, 10.0}, {10.0, 20.0}}};
  CHECK(traj::leader_speed(ramp, 5.0).first == doctest::Approx(15.0));
  CHECK(traj::leader_speed(ramp, 5.0).second == doctest::Approx(1.0));
  CHECK(traj::leader_speed(ramp, 50.0).first == 20.0);
  CHECK(traj::leader_speed(ramp, 50.0).second == 0.0);

  const traj::StopAndGoProfile sg;
  const auto knots = traj::expand(sg, 120.0).knots;
  CHECK(knots.front().second == sg.v_start);
  CHECK(knots.back().first >= 120.0);
  for (const auto& [t, speed] : knots) {
    CHECK(speed >= sg.v_lo);
    CHECK(speed <= sg.v_hi);
  }
  CHECK(traj::expand(sg, 120.0) == traj::expand(sg, 120.0));
}

TEST_CASE("synthetic generation") {
  traj::SynthConfig c;
  c.duration = 1.0;
  CHECK(traj::synth_generate(c).size() == 10);

  c.duration = 100.0;
  c.leader = traj::ConstantProfile{15.0};
  for (const auto& r : traj::synth_generate(c)) CHECK(std::abs(r.a_f) <= 1e-3);

  c.duration = 600.0;
  c.leader = traj::SineProfile{};
  c.accel_noise_sigma = 0.1;
  c.seed = 11;
  const auto recs = traj::synth_generate(c);
  CHECK(recs.size() >= 5970);
  CHECK(std::all_of(recs.begin(), recs.end(), [](const auto& r) { return r.spacing > 0.0; }));

  const fs::path a = fs::temp_directory_path() / "plab_synth_a.csv";
  const fs::path b = fs::temp_directory_path() / "plab_synth_b.csv";
  c.accel_noise_sigma = 0.0;
  traj::write_csv(a, traj::synth_generate(c));
  traj::write_csv(b, traj::synth_generate(c));
  CHECK(slurp(a) == slurp(b));

  c.leader = traj::ConstantProfile{30.0};
  CHECK_THROWS_AS(traj::synth_generate(c), ArgError);
  c.leader = traj::SineProfile{};
  c.dt = 0.0;
  CHECK_THROWS_AS(c.validate(), ArgError);
}
