#pragma once

#include <string>
#include <vector>

#include "frn/numeric.hpp"

namespace frn {

/// One of three actuation modes; hidden from the observation until the door
/// actually moves.
enum class DoorMode { kPush, kPull, kSlide };

std::string to_string(DoorMode mode);
DoorMode door_mode_from_string(const std::string& s);

struct EnvConfig {
  double contact_point = 0.8;     // q1 handle location
  double grip_threshold = 0.7;    // q2 needed to hold the handle
  double contact_tolerance = 0.05;
  double max_joint_delta = 0.05;  // per-step joint travel limit
  double gain = 1.0;              // displacement per unit correct effort
  double success_threshold = 0.5;
  int max_steps = 100;
  double sensor_noise_std = 0.0;
};

struct EnvState {
  Vec q;  // [arm extension 0..1, grip 0..1, lateral -1..1]
  double d = 0.0;
  DoorMode mode = DoorMode::kPush;
  int step_count = 0;
};

/// 7-dim observation: joints q (3) followed by the visual proxy v (4) =
/// [door displacement clamped to [0,1], contact flag, grip-engaged flag,
/// constant appearance 0.5]. v depends on (q, d) only, never on the mode.
constexpr int kObsDim = 7;

Vec render_observation(const Vec& q, double d, const EnvConfig& cfg);

struct StepResult {
  EnvState state;
  Vec observation;
};

StepResult reset(DoorMode mode, const EnvConfig& cfg);

/// q moves toward command (per-joint delta clipped, ranges clamped). While
/// the grip is engaged at the handle, only the mode-correct motion moves the
/// door; everything else is blocked. Optional sensor noise is drawn from
/// noise_rng and clamped back into range.
StepResult step(const EnvState& state, const Vec& command,
                const EnvConfig& cfg, RngStream* noise_rng = nullptr);

bool is_success(const EnvState& state, const EnvConfig& cfg);

/// Scripted three-phase demonstration (70 steps: approach, grasp, actuate),
/// executed through step() with Gaussian jitter on commands. Throws if the
/// generated demo does not end in success.
std::vector<Vec> script_demo(DoorMode mode, double jitter_std, RngStream& rng,
                             const EnvConfig& cfg);

constexpr int kDemoLength = 70;

}  // namespace frn
