#pragma once

// The network formation game whose best-response dynamics coincide with the
// asynchronous update: player i picks x_i to maximize
//   U_i = (n - 1) eps^2 - sum_j min(|x_i - x_j|^2, eps^2).

#include "hk/audit.hpp"
#include "hk/core.hpp"

namespace hk {

inline constexpr double kNashTol = 1e-9;

class GameState {
 public:
  GameState(OpinionProfile profile, double eps);

  const OpinionProfile& profile() const noexcept { return profile_; }
  double eps() const noexcept { return eps_; }
  std::size_t players() const noexcept { return profile_.agents(); }

 private:
  OpinionProfile profile_;
  double eps_;
};

double utility(const GameState& state, std::size_t i);

// Sum of all utilities.
double potential(const GameState& state);

// Mean of N_i; identical to the position async_step assigns to agent i.
Point best_response(const GameState& state, std::size_t i);

// Every player is within tol of its best response.
bool is_nash(const GameState& state, double tol = kNashTol);

struct PotentialGain {
  double gain = 0.0;   // U(after best response) - U(before)
  double floor = 0.0;  // 2 |N_i| |move|^2
  bool ok = false;     // gain >= floor - 1e-9
};

PotentialGain potential_gain_audit(const GameState& state, std::size_t i);

// beta(x_{-i}) = (n-1)(n-2) eps^2 - sum over ordered pairs r != s, both != i,
// of min(|x_r - x_s|^2, eps^2). Satisfies 2 U_i + beta = U.
double team_offset(const GameState& state, std::size_t i);

}  // namespace hk
