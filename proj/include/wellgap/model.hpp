#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace wellgap {

// An n-qubit computational basis label. Kept as explicit bits since n can
// exceed 64.
struct BitString {
  std::vector<uint8_t> bits;  // each 0 or 1

  int size() const { return static_cast<int>(bits.size()); }
  int weight() const;

  bool operator==(const BitString&) const = default;

  static BitString parse(std::string_view text);
  static BitString zeros(int n);
  std::string to_string() const;
};

// Adiabatic schedule factors. RampUp(s)=s, RampDown(s)=1-s, Constant(s)=1.
enum class Schedule { RampUp, RampDown, Constant };

double schedule_eval(Schedule tag, double s);
std::string_view schedule_name(Schedule tag);

// Radial potential of a single well: constant inside a Hamming ball, or a
// tabulated V(r) for r = 0..n.
struct StepWell {
  double depth = 0.0;  // < 0 (attractive)
  int radius = 0;
};
struct TabulatedWell {
  std::vector<double> values;  // size n+1
};
using PotentialProfile = std::variant<StepWell, TabulatedWell>;

// Profile value at distance r (no schedule factor).
double profile_value(const PotentialProfile& p, int r);

struct WellSpec {
  BitString center;
  PotentialProfile profile;
  Schedule schedule = Schedule::RampUp;
};

// Potential of one well at Hamming distance r and schedule parameter s.
double potential_at(const WellSpec& well, int r, double s, int n);

struct ProblemInstance {
  int n = 0;
  std::vector<WellSpec> wells;
  Schedule driver_schedule = Schedule::RampDown;

  int num_wells() const { return static_cast<int>(wells.size()); }
  double driver(double s) const { return schedule_eval(driver_schedule, s); }
  // Throws std::invalid_argument on any violated invariant.
  void validate() const;
};

enum class Method { Brute, Exact, TB0, TB1 };
std::string_view method_name(Method m);

struct SGrid {
  double s0 = 0.0, s1 = 1.0;
  int count = 33;
  std::vector<double> points() const;
};

// A full run description as read from a config file.
struct RunConfig {
  ProblemInstance instance;
  SGrid s_grid;
  Method method = Method::Exact;
  double epsilon = 0.1;
};

// Line-oriented key=value config text. See README for the format.
RunConfig parse_config(std::string_view text);
ProblemInstance parse_problem(std::string_view text);
std::string serialize_problem(const ProblemInstance& inst);

}  // namespace wellgap
