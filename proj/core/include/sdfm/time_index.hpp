#pragma once

#include <string>

#include "sdfm/errors.hpp"

namespace sdfm {

// Strictly monthly calendar axis. Time points are addressed by t in 1..T;
// t = 1 is (start_year, start_month).
struct TimeIndex {
  int start_year = 2008;
  int start_month = 1;  // 1..12
  int length = 0;       // T

  void validate() const {
    if (start_month < 1 || start_month > 12) {
      throw SpecError("start_month must be in 1..12, got " +
                      std::to_string(start_month));
    }
    if (length < 1) {
      throw SpecError("time index length must be positive, got " +
                      std::to_string(length));
    }
  }

  bool contains(int t) const { return t >= 1 && t <= length; }

  int year_of(int t) const {
    check(t);
    return start_year + (start_month - 1 + t - 1) / 12;
  }

  int month_of(int t) const {
    check(t);
    return (start_month - 1 + t - 1) % 12 + 1;
  }

  // "YYYY-MM" label for time point t.
  std::string label(int t) const {
    const int y = year_of(t);
    const int m = month_of(t);
    std::string out = std::to_string(y);
    out += '-';
    if (m < 10) out += '0';
    out += std::to_string(m);
    return out;
  }

 private:
  void check(int t) const {
    if (!contains(t)) {
      throw SpecError("time point " + std::to_string(t) +
                      " outside index of length " + std::to_string(length));
    }
  }
};

}  // namespace sdfm
