#include <string>

#include "doctest.h"
#include "uavirs/scenario.hpp"

using namespace uavirs;

namespace {

std::string field_of(const std::string& doc) {
  try {
    load_scenario(doc);
  } catch (const ScenarioError& e) {
    return e.field();
  }
  return "";
}

std::string with(std::string doc, const std::string& from, const std::string& to) {
  const auto at = doc.find(from);
  REQUIRE(at != std::string::npos);
  return doc.replace(at, from.size(), to);
}

}  // namespace

TEST_CASE("emit/load round trip") {
  const Scenario s = reference_square_scenario();
  const Scenario back = load_scenario(emit_scenario(s));
  CHECK(back == s);

  Scenario q = s;
  q.phase_levels = 4;
  q.flying_model = FlyingModel::aerodynamic;
  q.finalize();
  CHECK(load_scenario(emit_scenario(q)) == q);
}

TEST_CASE("derived members") {
  const Scenario s = reference_square_scenario(140.0);
  CHECK(s.num_slots == 140);
  CHECK(s.d_max == doctest::Approx(10.0));
  // Independent oracle: 10^((N0 + 10 log10 B − 30)/10).
  CHECK(s.noise_power_w == doctest::Approx(9.95267926383742e-16).epsilon(1e-12));
  CHECK(s.steering_step == doctest::Approx(3.141592653589793).epsilon(1e-15));
}

TEST_CASE("shipped scenario files load") {
  const Scenario uneven = load_scenario_file(UAVIRS_SOURCE_DIR "/scenarios/square_uneven.ini");
  REQUIRE(uneven.num_users() == 4);
  CHECK(uneven.users[2].input_bits == 7e6);
  CHECK(uneven.users[2].position.x() == 120.0);
  CHECK(uneven.initial_xy.x() == -120.0);
  const Scenario equal = load_scenario_file(UAVIRS_SOURCE_DIR "/scenarios/square_equal.ini");
  CHECK(equal == reference_square_scenario());
}

TEST_CASE("malformed documents name the offending key") {
  const std::string good = emit_scenario(reference_square_scenario());
  CHECK(field_of(with(good, "duration_s = 100", "duration_s = abc")) == "mission.duration_s");
  CHECK(field_of(with(good, "duration_s = 100", "duration_s = 100.5")) == "mission.slot_s");
  CHECK(field_of(with(good, "elements = 16", "elements = 0")) == "irs.elements");
  CHECK(field_of(with(good, "elements = 16", "elements = 16\nbogus = 1")) == "irs.bogus");
  CHECK(field_of(with(good, "input_bits = 5000000\n", "")) == "users.1.input_bits");
  CHECK(field_of(with(good, "p_max_w = 10", "p_max_w = 0.5")) == "radio.p_max");
  CHECK(field_of(with(good, "position_xyz = -90, 90, 0", "position_xyz = 0, 0, 0")) == "users.1.position_xyz");
  CHECK_THROWS_AS(load_scenario_file("/nonexistent/scenario.ini"), ScenarioError);
}

TEST_CASE("dbm conversion") {
  CHECK(dbm_to_watt(30.0) == doctest::Approx(1.0));
  CHECK(noise_power(-174.0, 1.0) == doctest::Approx(3.981071705534969e-21).epsilon(1e-12));
}
