// SPDX-License-Identifier: Apache-2.0
#include "stablebranch/params.hpp"

namespace stablebranch {

RegimeLimit make_regime_limit(int case_id, const ModelParams& params) {
  params.validate();
  const Regime regime = params.regime();
  auto require = [&](Regime wanted, const char* what) {
    if (regime != wanted) {
      throw std::invalid_argument(std::string("make_regime_limit: case ") +
                                  std::to_string(case_id) + " requires " + what);
    }
  };
  switch (case_id) {
    case 1:
      require(Regime::equal, "beta = gamma");
      return {1, params.beta, LimitKind::positive_linnik};
    case 2:
      require(Regime::immigration_heavier, "gamma < beta");
      return {2, params.gamma, LimitKind::one_sided_stable};
    case 3:
      require(Regime::immigration_heavier, "gamma < beta");
      return {3, params.beta, LimitKind::degenerate_zero};
    case 4:
      require(Regime::reproduction_heavier, "beta < gamma");
      return {4, params.beta, LimitKind::degenerate_one};
    case 5:
      require(Regime::reproduction_heavier, "beta < gamma");
      return {5, params.gamma, LimitKind::degenerate_one};
    default:
      throw std::invalid_argument("make_regime_limit: case_id must be 1..5");
  }
}

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::equal: return "equal";
    case Regime::immigration_heavier: return "immigration_heavier";
    case Regime::reproduction_heavier: return "reproduction_heavier";
  }
  return "?";
}

std::string to_string(LimitKind kind) {
  switch (kind) {
    case LimitKind::positive_linnik: return "positive_linnik";
    case LimitKind::one_sided_stable: return "one_sided_stable";
    case LimitKind::degenerate_zero: return "degenerate_zero";
    case LimitKind::degenerate_one: return "degenerate_one";
  }
  return "?";
}

}  // namespace stablebranch
