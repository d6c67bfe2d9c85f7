#pragma once

#include <vector>

#include "paac/agents.hpp"
#include "paac/networks.hpp"
#include "paac/replay.hpp"

namespace paac {

// Everything the variance probe (and offline evaluation) needs from a
// trained agent: live nets, targets, a slice of the replay memory and the
// discount.
struct AgentSnapshot {
  ActorNet actor;
  CriticNet critic;
  TargetPair targets;
  std::vector<Transition> transitions;
  double gamma = 0.99;
};

inline AgentSnapshot snapshot_agent(const AgentState& agent,
                                    std::size_t max_transitions = 20000) {
  AgentSnapshot snap;
  snap.actor = agent.actor;
  snap.critic = agent.critic;
  snap.targets = agent.targets;
  snap.gamma = agent.cfg.gamma;
  const std::size_t n = agent.buffer.size();
  const std::size_t keep = n < max_transitions ? n : max_transitions;
  snap.transitions.reserve(keep);
  for (std::size_t age = n - keep; age < n; ++age) {
    snap.transitions.push_back(agent.buffer.by_age(age));
  }
  return snap;
}

}  // namespace paac
