#include "hk/game.hpp"

#include <algorithm>
#include <cmath>

#include "hk/async_engine.hpp"

namespace hk {

namespace {

void require_player(const GameState& state, std::size_t i) {
  if (i >= state.players()) throw SizeError("game: player index out of range");
}

double capped(const OpinionProfile& x, std::size_t a, std::size_t b, double cap) {
  return std::min(squared_distance(x.opinion(a), x.opinion(b)), cap);
}

}  // namespace

GameState::GameState(OpinionProfile profile, double eps) : profile_(std::move(profile)), eps_(eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError("GameState: eps must be finite and > 0");
}

double utility(const GameState& state, std::size_t i) {
  require_player(state, i);
  const OpinionProfile& x = state.profile();
  const double cap = state.eps() * state.eps();
  double sum = 0.0;
  for (std::size_t j = 0; j < state.players(); ++j)
    if (j != i) sum += capped(x, i, j, cap);
  return static_cast<double>(state.players() - 1) * cap - sum;
}

double potential(const GameState& state) {
  double u = 0.0;
  for (std::size_t i = 0; i < state.players(); ++i) u += utility(state, i);
  return u;
}

Point best_response(const GameState& state, std::size_t i) {
  require_player(state, i);
  return mean_of(state.profile(), neighborhood_of(state.profile(), state.eps(), i));
}

bool is_nash(const GameState& state, double tol) {
  if (!(tol > 0.0)) throw DomainError("is_nash: tol must be > 0");
  for (std::size_t i = 0; i < state.players(); ++i)
    if (distance(best_response(state, i), state.profile().opinion(i)) > tol) return false;
  return true;
}

PotentialGain potential_gain_audit(const GameState& state, std::size_t i) {
  require_player(state, i);
  const OpinionProfile& x = state.profile();
  const OpinionProfile y = async_step(x, state.eps(), i);
  const std::size_t neighbors = neighborhood_of(x, state.eps(), i).size();

  PotentialGain out;
  out.gain = potential(GameState(y, state.eps())) - potential(state);
  out.floor = 2.0 * static_cast<double>(neighbors) * squared_distance(x.opinion(i), y.opinion(i));
  out.ok = out.gain >= out.floor - kAuditTol;
  return out;
}

double team_offset(const GameState& state, std::size_t i) {
  require_player(state, i);
  const OpinionProfile& x = state.profile();
  const std::size_t n = state.players();
  const double cap = state.eps() * state.eps();
  double sum = 0.0;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t s = 0; s < n; ++s)
      if (r != i && s != i && r != s) sum += capped(x, r, s, cap);
  const double others = static_cast<double>(n) - 1.0;
  return others * (others - 1.0) * cap - sum;
}

}  // namespace hk
