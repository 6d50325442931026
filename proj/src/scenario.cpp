#include "uavirs/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace uavirs {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

// section -> key -> (value, line)
using Document = std::map<std::string, std::map<std::string, std::pair<std::string, int>>>;

Document parse_document(std::string_view text) {
  Document doc;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    std::string line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (const auto c = line.find_first_of("#;"); c != std::string::npos) line = trim(line.substr(0, c));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ScenarioError("line " + std::to_string(line_no), "unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section.empty()) throw ScenarioError("line " + std::to_string(line_no), "empty section name");
      doc[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ScenarioError("line " + std::to_string(line_no), "expected 'key = value'");
    if (section.empty())
      throw ScenarioError("line " + std::to_string(line_no), "key outside of any section");
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ScenarioError("line " + std::to_string(line_no), "empty key");
    auto& slot = doc[section][key];
    if (!slot.first.empty()) throw ScenarioError(section + "." + key, "duplicate key");
    slot = {value, line_no};
  }
  return doc;
}

double parse_number(const std::string& field, const std::string& text) {
  double v = 0.0;
  const char* b = text.data();
  const char* e = b + text.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e || !std::isfinite(v))
    throw ScenarioError(field, "expected a finite number, got '" + text + "'");
  return v;
}

std::vector<double> parse_list(const std::string& field, const std::string& text, std::size_t n) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(field, trim(item)));
  if (out.size() != n)
    throw ScenarioError(field, "expected " + std::to_string(n) + " comma-separated numbers");
  return out;
}

// Consumes keys from one section and reports leftovers as unknown.
class SectionReader {
 public:
  SectionReader(std::string name, std::map<std::string, std::pair<std::string, int>> entries)
      : name_(std::move(name)), entries_(std::move(entries)) {}

  std::optional<std::string> take(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    std::string v = it->second.first;
    entries_.erase(it);
    return v;
  }

  std::string field(const std::string& key) const { return name_ + "." + key; }

  void number(const std::string& key, double& out, bool required = false) {
    if (auto v = take(key)) {
      out = parse_number(field(key), *v);
    } else if (required) {
      throw ScenarioError(field(key), "missing required key");
    }
  }

  void integer(const std::string& key, int& out) {
    double v = out;
    number(key, v);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw ScenarioError(field(key), "expected an integer");
    out = static_cast<int>(v);
  }

  template <int N>
  void vector(const std::string& key, Eigen::Matrix<double, N, 1>& out, bool required = false) {
    if (auto v = take(key)) {
      auto xs = parse_list(field(key), *v, N);
      for (int i = 0; i < N; ++i) out[i] = xs[i];
    } else if (required) {
      throw ScenarioError(field(key), "missing required key");
    }
  }

  void finish() const {
    if (!entries_.empty()) throw ScenarioError(field(entries_.begin()->first), "unknown key");
  }

 private:
  std::string name_;
  std::map<std::string, std::pair<std::string, int>> entries_;
};

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double noise_power(double density_dbm_hz, double bandwidth_hz) {
  return std::pow(10.0, (density_dbm_hz + 10.0 * std::log10(bandwidth_hz) - 30.0) / 10.0);
}

void Scenario::finalize() {
  auto require = [](bool ok, const char* field, const char* rule) {
    if (!ok) throw ScenarioError(field, rule);
  };
  require(mission_time > 0, "mission.duration_s", "must be > 0");
  require(slot_length > 0, "mission.slot_s", "must be > 0");
  const double slots = mission_time / slot_length;
  const double rounded = std::round(slots);
  require(rounded >= 1, "mission.slot_s", "need at least one slot (T >= t_s)");
  require(std::abs(slots - rounded) <= 1e-9 * std::max(1.0, slots), "mission.slot_s",
          "T must be an exact multiple of t_s");
  require(altitude > 0, "uav.altitude_m", "must be > 0");
  require(v_max > 0, "uav.v_max_mps", "must be > 0");
  require(p_avg > 0, "radio.p_avg", "must be > 0");
  require(p_avg <= p_max, "radio.p_max", "must satisfy 0 < P_avg <= P_max");
  require(energy_budget > 0, "mission.energy_budget_j", "must be > 0");
  require(num_elements >= 1, "irs.elements", "must be >= 1");
  require(!phase_levels || *phase_levels >= 2, "irs.phase_levels", "discrete Q must be >= 2");
  require(spacing_ratio > 0, "irs.spacing_ratio", "must be > 0");
  require(ref_gain > 0, "irs.ref_gain", "must be > 0");
  require(bandwidth_hz > 0, "radio.bandwidth_hz", "must be > 0");
  require(kinetic.mass_kg > 0, "uav.mass_kg", "must be > 0");
  require(aerodynamic.kappa1 > 0 && aerodynamic.kappa2 > 0, "uav.kappa", "kappa1, kappa2 must be > 0");
  require(aerodynamic.gravity > 0, "uav.gravity_mps2", "must be > 0");
  require(aerodynamic.a_max > 0, "uav.a_max_mps2", "must be > 0");
  require(aerodynamic.boundary_speed > 0 && aerodynamic.boundary_speed <= v_max,
          "uav.boundary_speed_mps", "must lie in (0, v_max]");
  require(!users.empty(), "users", "at least one [users.N] section is required");
  require(ap_position.z() == 0.0, "radio.ap_xyz", "AP must lie on the ground (z = 0)");
  for (std::size_t k = 0; k < users.size(); ++k) {
    const std::string base = "users." + std::to_string(k + 1);
    const auto& u = users[k];
    if (u.position.z() != 0.0) throw ScenarioError(base + ".position_xyz", "users lie on the ground (z = 0)");
    if (!(u.input_bits > 0)) throw ScenarioError(base + ".input_bits", "must be > 0");
    if (!(u.cycles_per_bit > 0)) throw ScenarioError(base + ".cycles_per_bit", "must be > 0");
    if (!(u.switched_capacitance > 0)) throw ScenarioError(base + ".switched_capacitance", "must be > 0");
    if (u.position.head<2>() == ap_position.head<2>())
      throw ScenarioError(base + ".position_xyz", "user coincides with the AP");
    for (std::size_t j = 0; j < k; ++j)
      if (users[j].position.head<2>() == u.position.head<2>())
        throw ScenarioError(base + ".position_xyz", "duplicate user position");
  }
  num_slots = static_cast<int>(rounded);
  require((terminal_xy - initial_xy).norm() <= v_max * mission_time, "mission.terminal_xy",
          "infeasible: initial-terminal distance exceeds v_max * T");
  d_max = v_max * slot_length;
  noise_power_w = noise_power(noise_density_dbm_hz, bandwidth_hz);
  steering_step = 2.0 * std::numbers::pi * spacing_ratio;
}

bool Scenario::operator==(const Scenario& o) const {
  return users == o.users && ap_position == o.ap_position && altitude == o.altitude &&
         mission_time == o.mission_time && slot_length == o.slot_length && v_max == o.v_max &&
         initial_xy == o.initial_xy && terminal_xy == o.terminal_xy &&
         num_elements == o.num_elements && phase_levels == o.phase_levels &&
         spacing_ratio == o.spacing_ratio && ref_gain == o.ref_gain &&
         noise_density_dbm_hz == o.noise_density_dbm_hz && bandwidth_hz == o.bandwidth_hz &&
         p_avg == o.p_avg && p_max == o.p_max && energy_budget == o.energy_budget &&
         flying_model == o.flying_model && kinetic == o.kinetic && aerodynamic == o.aerodynamic;
}

Scenario load_scenario(std::string_view text) {
  Document doc = parse_document(text);
  Scenario s;
  auto section = [&](const std::string& name) {
    auto it = doc.find(name);
    SectionReader r(name, it == doc.end() ? decltype(it->second){} : it->second);
    if (it != doc.end()) doc.erase(it);
    return r;
  };

  {
    auto m = section("mission");
    m.number("duration_s", s.mission_time, true);
    m.number("slot_s", s.slot_length);
    m.vector<2>("initial_xy", s.initial_xy, true);
    m.vector<2>("terminal_xy", s.terminal_xy, true);
    m.number("energy_budget_j", s.energy_budget);
    m.finish();
  }
  {
    auto u = section("uav");
    u.number("altitude_m", s.altitude);
    u.number("v_max_mps", s.v_max);
    if (auto fm = u.take("flying_model")) {
      if (*fm == "1") {
        s.flying_model = FlyingModel::kinetic;
      } else if (*fm == "2") {
        s.flying_model = FlyingModel::aerodynamic;
      } else {
        throw ScenarioError(u.field("flying_model"), "expected 1 or 2");
      }
    }
    u.number("mass_kg", s.kinetic.mass_kg);
    u.number("kappa1", s.aerodynamic.kappa1);
    u.number("kappa2", s.aerodynamic.kappa2);
    u.number("gravity_mps2", s.aerodynamic.gravity);
    u.number("a_max_mps2", s.aerodynamic.a_max);
    u.number("boundary_speed_mps", s.aerodynamic.boundary_speed);
    u.finish();
  }
  {
    auto r = section("irs");
    r.integer("elements", s.num_elements);
    if (auto q = r.take("phase_levels")) {
      if (*q == "continuous") {
        s.phase_levels.reset();
      } else {
        const double v = parse_number(r.field("phase_levels"), *q);
        if (v != std::floor(v)) throw ScenarioError(r.field("phase_levels"), "expected an integer or 'continuous'");
        s.phase_levels = static_cast<int>(v);
      }
    }
    r.number("spacing_ratio", s.spacing_ratio);
    auto db = r.take("ref_gain_db");
    auto lin = r.take("ref_gain");
    if (db && lin) throw ScenarioError(r.field("ref_gain"), "give either ref_gain or ref_gain_db, not both");
    if (db) s.ref_gain = std::pow(10.0, parse_number(r.field("ref_gain_db"), *db) / 10.0);
    if (lin) s.ref_gain = parse_number(r.field("ref_gain"), *lin);
    r.finish();
  }
  {
    auto r = section("radio");
    r.number("noise_density_dbm_hz", s.noise_density_dbm_hz);
    r.number("bandwidth_hz", s.bandwidth_hz);
    r.vector<3>("ap_xyz", s.ap_position);
    for (auto [name, target] : {std::pair{"p_avg", &s.p_avg}, std::pair{"p_max", &s.p_max}}) {
      auto dbm = r.take(std::string(name) + "_dbm");
      auto w = r.take(std::string(name) + "_w");
      if (dbm && w) throw ScenarioError(r.field(name), "give either _dbm or _w, not both");
      if (dbm) *target = dbm_to_watt(parse_number(r.field(std::string(name) + "_dbm"), *dbm));
      if (w) *target = parse_number(r.field(std::string(name) + "_w"), *w);
    }
    r.finish();
  }

  // [users.N], N = 1..K contiguous.
  std::map<int, GroundUser> users;
  for (auto it = doc.begin(); it != doc.end();) {
    const std::string& name = it->first;
    if (name.rfind("users.", 0) != 0) throw ScenarioError(name, "unknown section");
    const std::string idx = name.substr(6);
    int n = 0;
    auto [p, ec] = std::from_chars(idx.data(), idx.data() + idx.size(), n);
    if (ec != std::errc() || p != idx.data() + idx.size() || n < 1)
      throw ScenarioError(name, "user sections are named [users.N] with N >= 1");
    SectionReader r(name, it->second);
    GroundUser u;
    r.vector<3>("position_xyz", u.position, true);
    r.number("input_bits", u.input_bits, true);
    r.number("cycles_per_bit", u.cycles_per_bit);
    r.number("switched_capacitance", u.switched_capacitance);
    r.finish();
    users[n] = u;
    it = doc.erase(it);
  }
  int expect = 1;
  for (auto& [n, u] : users) {
    if (n != expect) throw ScenarioError("users." + std::to_string(expect), "user sections must be numbered 1..K");
    s.users.push_back(u);
    ++expect;
  }

  s.finalize();
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path, "cannot open scenario file");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_scenario(ss.str());
}

std::string emit_scenario(const Scenario& s) {
  std::ostringstream o;
  auto v2 = [](const Eigen::Vector2d& v) { return fmt17(v.x()) + ", " + fmt17(v.y()); };
  auto v3 = [](const Eigen::Vector3d& v) { return fmt17(v.x()) + ", " + fmt17(v.y()) + ", " + fmt17(v.z()); };
  o << "[mission]\n"
    << "duration_s = " << fmt17(s.mission_time) << "\n"
    << "slot_s = " << fmt17(s.slot_length) << "\n"
    << "initial_xy = " << v2(s.initial_xy) << "\n"
    << "terminal_xy = " << v2(s.terminal_xy) << "\n"
    << "energy_budget_j = " << fmt17(s.energy_budget) << "\n\n";
  o << "[uav]\n"
    << "altitude_m = " << fmt17(s.altitude) << "\n"
    << "v_max_mps = " << fmt17(s.v_max) << "\n"
    << "flying_model = " << static_cast<int>(s.flying_model) << "\n"
    << "mass_kg = " << fmt17(s.kinetic.mass_kg) << "\n"
    << "kappa1 = " << fmt17(s.aerodynamic.kappa1) << "\n"
    << "kappa2 = " << fmt17(s.aerodynamic.kappa2) << "\n"
    << "gravity_mps2 = " << fmt17(s.aerodynamic.gravity) << "\n"
    << "a_max_mps2 = " << fmt17(s.aerodynamic.a_max) << "\n"
    << "boundary_speed_mps = " << fmt17(s.aerodynamic.boundary_speed) << "\n\n";
  o << "[irs]\n"
    << "elements = " << s.num_elements << "\n"
    << "phase_levels = " << (s.phase_levels ? std::to_string(*s.phase_levels) : "continuous") << "\n"
    << "spacing_ratio = " << fmt17(s.spacing_ratio) << "\n"
    << "ref_gain = " << fmt17(s.ref_gain) << "\n\n";
  o << "[radio]\n"
    << "noise_density_dbm_hz = " << fmt17(s.noise_density_dbm_hz) << "\n"
    << "bandwidth_hz = " << fmt17(s.bandwidth_hz) << "\n"
    << "p_avg_w = " << fmt17(s.p_avg) << "\n"
    << "p_max_w = " << fmt17(s.p_max) << "\n"
    << "ap_xyz = " << v3(s.ap_position) << "\n";
  for (std::size_t k = 0; k < s.users.size(); ++k) {
    const auto& u = s.users[k];
    o << "\n[users." << k + 1 << "]\n"
      << "position_xyz = " << v3(u.position) << "\n"
      << "input_bits = " << fmt17(u.input_bits) << "\n"
      << "cycles_per_bit = " << fmt17(u.cycles_per_bit) << "\n"
      << "switched_capacitance = " << fmt17(u.switched_capacitance) << "\n";
  }
  return o.str();
}

Scenario reference_square_scenario(double mission_time, double half_side) {
  Scenario s;
  s.mission_time = mission_time;
  s.ref_gain = std::pow(10.0, -3.5);
  s.p_avg = dbm_to_watt(30.0);
  s.p_max = dbm_to_watt(40.0);
  const double h = half_side;
  for (auto [x, y] : {std::pair{-h, h}, std::pair{h, h}, std::pair{h, -h}, std::pair{-h, -h}}) {
    GroundUser u;
    u.position = {x, y, 0.0};
    u.input_bits = 5e6;
    s.users.push_back(u);
  }
  s.initial_xy = {-h, 0.0};
  s.terminal_xy = {-h, 0.0};
  s.finalize();
  return s;
}

}  // namespace uavirs
