#pragma once

#include <string>

namespace collar {

// One verified inequality: both sides, the oriented slack, and the verdict.
// slack is oriented so that positive means the inequality holds; pass is
// slack > -tolerance. Strict inequalities keep their slack magnitude so
// sharpness can be studied downstream.
struct CheckReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  // rank, curves involved, construction history: whatever identifies the run
  std::string context;
};

inline CheckReport make_report(const std::string& name, double lhs, double rhs, double tolerance,
                               const std::string& context = "") {
  CheckReport r;
  r.name = name;
  r.lhs = lhs;
  r.rhs = rhs;
  r.slack = rhs - lhs;
  r.tolerance = tolerance;
  r.pass = r.slack > -tolerance;
  r.context = context;
  return r;
}

}  // namespace collar
