#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "paac/common.hpp"
#include "paac/mlp.hpp"
#include "paac/networks.hpp"
#include "paac/snapshot.hpp"
#include "paac/textio.hpp"

namespace paac {

// Versioned structured-text checkpoints. Values are written as shortest
// round-trip decimals, so save/load is exact and files are byte-stable.

namespace detail {

inline void write_vec(std::ostream& out, const Vec& v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out << ' ';
    out << format_double(v[i]);
  }
  out << '\n';
}

inline Vec read_vec(std::istream& in, std::size_t n, const char* what) {
  Vec v(n);
  std::string token;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(in >> token)) throw IoError(std::string("checkpoint: truncated ") + what);
    v[i] = parse_double(token);
  }
  return v;
}

inline void write_params(std::ostream& out, const NetParams& p) {
  out << "activation " << activation_name(p.activation) << '\n';
  for (int l = 0; l < 3; ++l) {
    out << "layer " << l << ' ' << p.weights[l].rows << ' ' << p.weights[l].cols << '\n';
    write_vec(out, p.weights[l].data);
    write_vec(out, p.biases[l]);
  }
}

inline NetParams read_params(std::istream& in) {
  std::string key, act;
  if (!(in >> key >> act) || key != "activation") {
    throw IoError("checkpoint: expected 'activation'");
  }
  NetParams p;
  if (act == "relu_relu_tanh") {
    p.activation = Activation::relu_relu_tanh;
  } else if (act == "relu_relu_linear") {
    p.activation = Activation::relu_relu_linear;
  } else {
    throw IoError("checkpoint: unknown activation '" + act + "'");
  }
  for (int l = 0; l < 3; ++l) {
    std::size_t layer = 0, rows = 0, cols = 0;
    if (!(in >> key >> layer >> rows >> cols) || key != "layer" ||
        layer != static_cast<std::size_t>(l)) {
      throw IoError("checkpoint: expected layer header");
    }
    p.weights[l] = DenseMatrix(rows, cols, read_vec(in, rows * cols, "weights"));
    p.biases[l] = read_vec(in, rows, "biases");
  }
  return p;
}

}  // namespace detail

inline void save_net_params(std::ostream& out, const NetParams& p) {
  out << "paac-net v1\n";
  detail::write_params(out, p);
}

inline NetParams load_net_params(std::istream& in) {
  std::string magic, version;
  if (!(in >> magic >> version) || magic != "paac-net" || version != "v1") {
    throw IoError("checkpoint: bad net header");
  }
  return detail::read_params(in);
}

inline void save_agent_snapshot(std::ostream& out, const AgentSnapshot& snap) {
  out << "paac-agent v1\n";
  out << "gamma " << format_double(snap.gamma) << '\n';
  out << "action_bound " << snap.actor.action_bound.size() << '\n';
  detail::write_vec(out, snap.actor.action_bound);
  out << "actor\n";
  detail::write_params(out, snap.actor.params);
  out << "critic\n";
  detail::write_params(out, snap.critic.params);
  out << "target_actor\n";
  detail::write_params(out, snap.targets.actor.params);
  out << "target_critic\n";
  detail::write_params(out, snap.targets.critic.params);
  const std::size_t state_dim =
      snap.transitions.empty() ? 0 : snap.transitions.front().state.size();
  const std::size_t action_dim =
      snap.transitions.empty() ? 0 : snap.transitions.front().action.size();
  out << "transitions " << snap.transitions.size() << ' ' << state_dim << ' '
      << action_dim << '\n';
  for (const Transition& t : snap.transitions) {
    detail::write_vec(out, t.state);
    detail::write_vec(out, t.action);
    out << format_double(t.cost) << ' ' << (t.terminal ? 1 : 0) << '\n';
    detail::write_vec(out, t.next_state);
  }
}

inline AgentSnapshot load_agent_snapshot(std::istream& in) {
  std::string magic, version, key;
  if (!(in >> magic >> version) || magic != "paac-agent" || version != "v1") {
    throw IoError("checkpoint: bad agent header");
  }
  AgentSnapshot snap;
  std::string token;
  if (!(in >> key >> token) || key != "gamma") throw IoError("checkpoint: expected gamma");
  snap.gamma = parse_double(token);
  std::size_t bound_dim = 0;
  if (!(in >> key >> bound_dim) || key != "action_bound") {
    throw IoError("checkpoint: expected action_bound");
  }
  const Vec bound = detail::read_vec(in, bound_dim, "action_bound");
  auto expect_section = [&](const char* name) {
    if (!(in >> key) || key != name) {
      throw IoError(std::string("checkpoint: expected section '") + name + "'");
    }
  };
  expect_section("actor");
  snap.actor.params = detail::read_params(in);
  snap.actor.action_bound = bound;
  expect_section("critic");
  snap.critic.params = detail::read_params(in);
  expect_section("target_actor");
  snap.targets.actor.params = detail::read_params(in);
  snap.targets.actor.action_bound = bound;
  expect_section("target_critic");
  snap.targets.critic.params = detail::read_params(in);
  std::size_t n = 0, state_dim = 0, action_dim = 0;
  if (!(in >> key >> n >> state_dim >> action_dim) || key != "transitions") {
    throw IoError("checkpoint: expected transitions header");
  }
  snap.transitions.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Transition t;
    t.state = detail::read_vec(in, state_dim, "transition state");
    t.action = detail::read_vec(in, action_dim, "transition action");
    int terminal = 0;
    if (!(in >> token >> terminal)) throw IoError("checkpoint: truncated transition");
    t.cost = parse_double(token);
    t.terminal = terminal != 0;
    t.next_state = detail::read_vec(in, state_dim, "transition next_state");
    snap.transitions.push_back(std::move(t));
  }
  return snap;
}

inline void save_agent_snapshot_file(const std::string& path, const AgentSnapshot& snap) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  save_agent_snapshot(out, snap);
  if (!out) throw IoError("write failed for '" + path + "'");
}

inline AgentSnapshot load_agent_snapshot_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return load_agent_snapshot(in);
}

}  // namespace paac
