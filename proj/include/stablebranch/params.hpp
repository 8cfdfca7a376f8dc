// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace stablebranch {

/// Tail ordering of the two heavy-tailed inputs.  A smaller exponent means a
/// heavier tail, so `immigration_heavier` is the gamma < beta configuration.
enum class Regime { equal, immigration_heavier, reproduction_heavier };

/// The four free model parameters, plus derived constants.
///
/// - lifetime_rate (K): exponential particle lifetime rate, > 0
/// - beta:  reproduction tail exponent in (0, 1]
/// - gamma: immigration batch tail exponent in (0, 1]
/// - theta: immigration arrival intensity, > 0
///
/// Single source of truth for regime classification: beta and gamma within
/// kRegimeTol of each other are treated as equal.
struct ModelParams {
  double lifetime_rate = 1.0;
  double beta = 0.5;
  double gamma = 0.5;
  double theta = 1.0;

  static constexpr double kRegimeTol = 1e-9;

  /// Time-scale constant A = (1 + beta) / (K beta).
  double time_scale() const { return (1.0 + beta) / (lifetime_rate * beta); }

  /// Tail ratio delta = gamma / beta.
  double tail_ratio() const { return gamma / beta; }

  Regime regime() const {
    if (std::fabs(beta - gamma) <= kRegimeTol) return Regime::equal;
    return gamma < beta ? Regime::immigration_heavier : Regime::reproduction_heavier;
  }

  void validate() const {
    if (!(lifetime_rate > 0.0)) {
      throw std::invalid_argument("ModelParams: lifetime_rate (K) must be > 0");
    }
    if (!(beta > 0.0) || beta > 1.0) {
      throw std::invalid_argument("ModelParams: beta must lie in (0, 1]");
    }
    if (!(gamma > 0.0) || gamma > 1.0) {
      throw std::invalid_argument("ModelParams: gamma must lie in (0, 1]");
    }
    if (!(theta > 0.0)) {
      throw std::invalid_argument("ModelParams: theta must be > 0");
    }
  }
};

enum class LimitKind { positive_linnik, one_sided_stable, degenerate_zero, degenerate_one };

/// One of the five (parameter ordering, normalization exponent) limit cases:
///
///   1: gamma = beta, exponent beta  -> positive Linnik transform
///   2: gamma < beta, exponent gamma -> one-sided stable transform
///   3: gamma < beta, exponent beta  -> degenerate at zero
///   4: beta < gamma, exponent beta  -> degenerate at one
///   5: beta < gamma, exponent gamma -> degenerate at one
struct RegimeLimit {
  int case_id = 1;
  double normalization_exponent = 0.5;
  LimitKind kind = LimitKind::positive_linnik;
};

/// Builds the RegimeLimit for `case_id`, rejecting parameter/case mismatches
/// (e.g. case 2 requested while gamma >= beta).
RegimeLimit make_regime_limit(int case_id, const ModelParams& params);

std::string to_string(Regime regime);
std::string to_string(LimitKind kind);

}  // namespace stablebranch
