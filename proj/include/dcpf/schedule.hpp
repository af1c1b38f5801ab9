#pragma once

#include <cmath>
#include <optional>
#include <string_view>

#include "dcpf/error.hpp"

namespace dcpf {

/// Vanishing gain beta(t) with divergent integral:
///   inverse_linear: t0 / (t0 + t)
///   inverse_power:  (t0 / (t0 + t))^p,  0 < p <= 1
class Schedule {
 public:
  enum class Kind { inverse_linear, inverse_power };

  static Schedule inverse_linear(double t0 = 1.0) { return Schedule(Kind::inverse_linear, t0, 1.0); }

  static Schedule inverse_power(double t0, double power) {
    if (!(power > 0.0 && power <= 1.0)) {
      throw ConfigError("inverse_power schedule needs 0 < p <= 1");
    }
    return Schedule(Kind::inverse_power, t0, power);
  }

  double operator()(double t) const {
    const double ratio = t0_ / (t0_ + t);
    return kind_ == Kind::inverse_linear ? ratio : std::pow(ratio, power_);
  }

  /// Closed form of the integral of beta over [0, t].
  double integral(double t) const {
    if (kind_ == Kind::inverse_linear || power_ == 1.0) return t0_ * std::log1p(t / t0_);
    const double q = 1.0 - power_;
    return std::pow(t0_, power_) * (std::pow(t0_ + t, q) - std::pow(t0_, q)) / q;
  }

  Kind kind() const noexcept { return kind_; }
  double t0() const noexcept { return t0_; }
  double power() const noexcept { return power_; }

 private:
  Schedule(Kind kind, double t0, double power) : kind_(kind), t0_(t0), power_(power) {
    if (!(t0 > 0.0) || !std::isfinite(t0)) throw ConfigError("schedule t0 must be positive");
  }

  Kind kind_;
  double t0_;
  double power_;
};

inline std::string_view to_string(Schedule::Kind k) {
  return k == Schedule::Kind::inverse_linear ? "inverse_linear" : "inverse_power";
}

inline std::optional<Schedule::Kind> parse_schedule_kind(std::string_view name) {
  if (name == "inverse_linear") return Schedule::Kind::inverse_linear;
  if (name == "inverse_power") return Schedule::Kind::inverse_power;
  return std::nullopt;
}

}  // namespace dcpf
