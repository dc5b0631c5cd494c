#include "frn/door_env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace frn {

std::string to_string(DoorMode mode) {
  switch (mode) {
    case DoorMode::kPush: return "push";
    case DoorMode::kPull: return "pull";
    case DoorMode::kSlide: return "slide";
  }
  throw std::logic_error("unknown DoorMode");
}

DoorMode door_mode_from_string(const std::string& s) {
  if (s == "push") return DoorMode::kPush;
  if (s == "pull") return DoorMode::kPull;
  if (s == "slide") return DoorMode::kSlide;
  throw std::invalid_argument("unknown door mode: " + s);
}

namespace {

constexpr double kJointLo[3] = {0.0, 0.0, -1.0};
constexpr double kJointHi[3] = {1.0, 1.0, 1.0};

bool in_contact(const Vec& q, const EnvConfig& cfg) {
  return std::abs(q[0] - cfg.contact_point) <= cfg.contact_tolerance;
}

bool grip_engaged(const Vec& q, const EnvConfig& cfg) {
  return in_contact(q, cfg) && q[1] >= cfg.grip_threshold;
}

}  // namespace

Vec render_observation(const Vec& q, double d, const EnvConfig& cfg) {
  // Depends on (q, d) only, so all modes render identically until the door
  // moves.
  Vec obs(kObsDim);
  obs.head<3>() = q;
  obs[3] = std::clamp(d, 0.0, 1.0);
  obs[4] = in_contact(q, cfg) ? 1.0 : 0.0;
  obs[5] = grip_engaged(q, cfg) ? 1.0 : 0.0;
  obs[6] = 0.5;
  return obs;
}

StepResult reset(DoorMode mode, const EnvConfig& cfg) {
  StepResult r;
  r.state.q = Vec::Zero(3);
  r.state.d = 0.0;
  r.state.mode = mode;
  r.state.step_count = 0;
  r.observation = render_observation(r.state.q, r.state.d, cfg);
  return r;
}

StepResult step(const EnvState& state, const Vec& command,
                const EnvConfig& cfg, RngStream* noise_rng) {
  if (command.size() != 3)
    throw std::invalid_argument("step: command must have 3 entries");
  require_finite(command, "step command");

  EnvState next = state;
  for (int j = 0; j < 3; ++j) {
    const double delta = std::clamp(command[j] - state.q[j],
                                    -cfg.max_joint_delta, cfg.max_joint_delta);
    next.q[j] = std::clamp(state.q[j] + delta, kJointLo[j], kJointHi[j]);
  }

  // Engagement is judged where the effort was applied (pre-move pose).
  if (grip_engaged(state.q, cfg)) {
    const double dq1 = next.q[0] - state.q[0];
    const double dq3 = next.q[2] - state.q[2];
    switch (state.mode) {
      case DoorMode::kPush:
        next.d += cfg.gain * std::max(0.0, dq1);
        break;
      case DoorMode::kPull:
        next.d += cfg.gain * std::max(0.0, -dq1);
        break;
      case DoorMode::kSlide:
        next.d += cfg.gain * std::abs(dq3);
        break;
    }
  }
  next.step_count = state.step_count + 1;

  StepResult r;
  r.observation = render_observation(next.q, next.d, cfg);
  if (noise_rng && cfg.sensor_noise_std > 0.0) {
    for (int k = 0; k < kObsDim; ++k) {
      r.observation[k] += cfg.sensor_noise_std * noise_rng->next_normal();
    }
    for (int j = 0; j < 3; ++j)
      r.observation[j] = std::clamp(r.observation[j], kJointLo[j], kJointHi[j]);
    for (int k = 3; k < kObsDim; ++k)
      r.observation[k] = std::clamp(r.observation[k], 0.0, 1.0);
  }
  r.state = std::move(next);
  return r;
}

bool is_success(const EnvState& state, const EnvConfig& cfg) {
  return state.d >= cfg.success_threshold && state.step_count <= cfg.max_steps;
}

std::vector<Vec> script_demo(DoorMode mode, double jitter_std, RngStream& rng,
                             const EnvConfig& cfg) {
  if (jitter_std < 0.0)
    throw std::invalid_argument("script_demo: negative jitter_std");

  StepResult cur = reset(mode, cfg);
  std::vector<Vec> observations;
  observations.reserve(kDemoLength);

  for (int t = 0; t < kDemoLength; ++t) {
    Vec cmd(3);
    if (t < 20) {
      cmd << cfg.contact_point, 0.0, 0.0;  // approach
    } else if (t < 30) {
      cmd << cfg.contact_point, 1.0, 0.0;  // grasp
    } else if (cur.state.d >= 0.9) {
      cmd = cur.state.q;  // door open, hold pose
    } else {
      const int k = t - 30;
      switch (mode) {
        case DoorMode::kPush:
          // stroke forward within the contact window, then return
          cmd << (k % 2 == 0 ? cfg.contact_point + cfg.contact_tolerance
                             : cfg.contact_point),
              1.0, 0.0;
          break;
        case DoorMode::kPull:
          cmd << (k % 2 == 0 ? cfg.contact_point - cfg.contact_tolerance
                             : cfg.contact_point),
              1.0, 0.0;
          break;
        case DoorMode::kSlide:
          cmd << cfg.contact_point, 1.0, 1.0;
          break;
      }
    }
    for (int j = 0; j < 3; ++j) cmd[j] += jitter_std * rng.next_normal();
    cur = step(cur.state, cmd, cfg);
    observations.push_back(cur.observation);
  }

  if (!is_success(cur.state, cfg)) {
    throw std::runtime_error("script_demo: generated demonstration failed (" +
                             to_string(mode) + ")");
  }
  return observations;
}

}  // namespace frn
