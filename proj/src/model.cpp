#include "wellgap/model.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace wellgap {

int BitString::weight() const {
  return std::accumulate(bits.begin(), bits.end(), 0);
}

BitString BitString::parse(std::string_view text) {
  BitString b;
  b.bits.reserve(text.size());
  for (char c : text) {
    if (c != '0' && c != '1')
      throw std::invalid_argument("bit string must consist of 0/1 characters: '" +
                                  std::string(text) + "'");
    b.bits.push_back(c == '1' ? 1 : 0);
  }
  if (b.bits.empty()) throw std::invalid_argument("empty bit string");
  return b;
}

BitString BitString::zeros(int n) {
  BitString b;
  b.bits.assign(static_cast<size_t>(n), 0);
  return b;
}

std::string BitString::to_string() const {
  std::string s(bits.size(), '0');
  for (size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) s[i] = '1';
  return s;
}

double schedule_eval(Schedule tag, double s) {
  if (!(s >= 0.0 && s <= 1.0))
    throw std::domain_error("schedule parameter s outside [0,1]");
  switch (tag) {
    case Schedule::RampUp: return s;
    case Schedule::RampDown: return 1.0 - s;
    case Schedule::Constant: return 1.0;
  }
  throw std::logic_error("unknown schedule tag");
}

std::string_view schedule_name(Schedule tag) {
  switch (tag) {
    case Schedule::RampUp: return "up";
    case Schedule::RampDown: return "down";
    case Schedule::Constant: return "const";
  }
  return "?";
}

double profile_value(const PotentialProfile& p, int r) {
  if (const auto* sw = std::get_if<StepWell>(&p))
    return r <= sw->radius ? sw->depth : 0.0;
  const auto& tab = std::get<TabulatedWell>(p).values;
  if (r < 0 || r >= static_cast<int>(tab.size()))
    throw std::out_of_range("tabulated profile index out of range");
  return tab[static_cast<size_t>(r)];
}

double potential_at(const WellSpec& well, int r, double s, int n) {
  if (r < 0 || r > n) throw std::out_of_range("distance r outside [0,n]");
  return schedule_eval(well.schedule, s) * profile_value(well.profile, r);
}

void ProblemInstance::validate() const {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  for (const auto& w : wells) {
    if (w.center.size() != n)
      throw std::invalid_argument("well center length != n");
    if (const auto* sw = std::get_if<StepWell>(&w.profile)) {
      if (sw->radius < 0 || sw->radius > n)
        throw std::invalid_argument("well radius outside [0,n]");
      if (!(sw->depth < 0.0))
        throw std::invalid_argument("step well depth must be negative");
    } else {
      const auto& tab = std::get<TabulatedWell>(w.profile).values;
      if (static_cast<int>(tab.size()) != n + 1)
        throw std::invalid_argument("tabulated profile length != n+1");
    }
  }
  for (size_t i = 0; i < wells.size(); ++i)
    for (size_t j = i + 1; j < wells.size(); ++j)
      if (wells[i].center == wells[j].center)
        throw std::invalid_argument("duplicate well centers");
}

std::string_view method_name(Method m) {
  switch (m) {
    case Method::Brute: return "brute";
    case Method::Exact: return "exact";
    case Method::TB0: return "tb0";
    case Method::TB1: return "tb1";
  }
  return "?";
}

std::vector<double> SGrid::points() const {
  if (count < 1) throw std::invalid_argument("s grid count must be >= 1");
  std::vector<double> s(static_cast<size_t>(count));
  if (count == 1) {
    s[0] = s0;
    return s;
  }
  for (int i = 0; i < count; ++i)
    s[static_cast<size_t>(i)] = s0 + (s1 - s0) * i / (count - 1);
  return s;
}

namespace {

std::string_view trim(std::string_view v) {
  while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.remove_prefix(1);
  while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.remove_suffix(1);
  return v;
}

double parse_real(std::string_view v, const std::string& what) {
  try {
    size_t pos = 0;
    double x = std::stod(std::string(v), &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return x;
  } catch (...) {
    throw std::invalid_argument("malformed " + what + ": '" + std::string(v) + "'");
  }
}

int parse_int(std::string_view v, const std::string& what) {
  int x = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size())
    throw std::invalid_argument("malformed " + what + ": '" + std::string(v) + "'");
  return x;
}

Schedule parse_schedule(std::string_view v) {
  if (v == "up") return Schedule::RampUp;
  if (v == "down") return Schedule::RampDown;
  if (v == "const") return Schedule::Constant;
  throw std::invalid_argument("unknown schedule '" + std::string(v) + "' (up|down|const)");
}

// One "well ..." statement: space-separated key=value fields.
WellSpec parse_well_line(std::string_view rest) {
  WellSpec w;
  bool have_center = false, have_profile = false;
  double depth = 0.0;
  int radius = -1;
  bool have_depth = false, have_radius = false;
  std::istringstream iss{std::string(rest)};
  std::string tok;
  while (iss >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("malformed well field '" + tok + "'");
    std::string key = tok.substr(0, eq);
    std::string val = tok.substr(eq + 1);
    if (key == "center") {
      w.center = BitString::parse(val);
      have_center = true;
    } else if (key == "depth") {
      depth = parse_real(val, "depth");
      have_depth = true;
    } else if (key == "radius") {
      radius = parse_int(val, "radius");
      have_radius = true;
    } else if (key == "table") {
      TabulatedWell tab;
      std::istringstream vs(val);
      std::string item;
      while (std::getline(vs, item, ','))
        tab.values.push_back(parse_real(item, "table entry"));
      w.profile = std::move(tab);
      have_profile = true;
    } else if (key == "schedule") {
      w.schedule = parse_schedule(val);
    } else {
      throw std::invalid_argument("unknown well field '" + key + "'");
    }
  }
  if (!have_center) throw std::invalid_argument("well statement missing center");
  if (have_depth || have_radius) {
    if (have_profile) throw std::invalid_argument("well has both table and depth/radius");
    if (!have_depth || !have_radius)
      throw std::invalid_argument("step well needs both depth and radius");
    w.profile = StepWell{depth, radius};
    have_profile = true;
  }
  if (!have_profile) throw std::invalid_argument("well statement missing potential");
  return w;
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  cfg.instance.n = 0;
  bool have_n = false;
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line{raw};
    if (auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    try {
      if (line.substr(0, 5) == "well " || line == "well") {
        cfg.instance.wells.push_back(parse_well_line(line.substr(4)));
        continue;
      }
      auto eq = line.find('=');
      if (eq == std::string_view::npos)
        throw std::invalid_argument("expected key = value");
      std::string_view key = trim(line.substr(0, eq));
      std::string_view val = trim(line.substr(eq + 1));
      if (key == "n") {
        cfg.instance.n = parse_int(val, "n");
        have_n = true;
      } else if (key == "s_grid") {
        auto c1 = val.find(':');
        auto c2 = val.rfind(':');
        if (c1 == std::string_view::npos || c2 == c1)
          throw std::invalid_argument("s_grid must be s0:s1:count");
        cfg.s_grid.s0 = parse_real(trim(val.substr(0, c1)), "s_grid start");
        cfg.s_grid.s1 = parse_real(trim(val.substr(c1 + 1, c2 - c1 - 1)), "s_grid end");
        cfg.s_grid.count = parse_int(trim(val.substr(c2 + 1)), "s_grid count");
      } else if (key == "method") {
        if (val == "brute") cfg.method = Method::Brute;
        else if (val == "exact") cfg.method = Method::Exact;
        else if (val == "tb0") cfg.method = Method::TB0;
        else if (val == "tb1") cfg.method = Method::TB1;
        else throw std::invalid_argument("unknown method '" + std::string(val) + "'");
      } else if (key == "epsilon") {
        cfg.epsilon = parse_real(val, "epsilon");
      } else if (key == "driver") {
        cfg.instance.driver_schedule = parse_schedule(val);
      } else {
        throw std::invalid_argument("unknown key '" + std::string(key) + "'");
      }
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!have_n) throw std::invalid_argument("config missing n");
  cfg.instance.validate();
  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0))
    throw std::invalid_argument("epsilon must lie in (0,1)");
  return cfg;
}

ProblemInstance parse_problem(std::string_view text) {
  return parse_config(text).instance;
}

std::string serialize_problem(const ProblemInstance& inst) {
  std::string out = "n = " + std::to_string(inst.n) + "\n";
  if (inst.driver_schedule != Schedule::RampDown)
    out += "driver = " + std::string(schedule_name(inst.driver_schedule)) + "\n";
  char buf[64];
  for (const auto& w : inst.wells) {
    out += "well center=" + w.center.to_string();
    if (const auto* sw = std::get_if<StepWell>(&w.profile)) {
      std::snprintf(buf, sizeof buf, " depth=%.17g radius=%d", sw->depth, sw->radius);
      out += buf;
    } else {
      const auto& tab = std::get<TabulatedWell>(w.profile).values;
      out += " table=";
      for (size_t i = 0; i < tab.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%s%.17g", i ? "," : "", tab[i]);
        out += buf;
      }
    }
    if (w.schedule != Schedule::RampUp)
      out += " schedule=" + std::string(schedule_name(w.schedule));
    out += "\n";
  }
  return out;
}

}  // namespace wellgap
