#pragma once

#include "vavam/common.hpp"
#include "vavam/image.hpp"
#include "vavam/synthetic_world.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace vavam::cl {

using world::ActionTrajectory;
using world::AgentClass;
using world::AgentState;
using world::Command;
using world::Pose;

enum class ScenarioType { stationary, frontal, side };

const char* to_string(ScenarioType t);
ScenarioType scenario_type_from_string(const std::string& s);

struct AdversaryScript {
    Pose start;
    double speed = 0.0;  // along the heading of `start`
    double length = 4.5;
    double width = 2.0;
    AgentClass cls = AgentClass::car;
};

struct Scenario {
    ScenarioType type = ScenarioType::stationary;
    Pose ego_start;
    double ego_speed = 6.0;  // nominal reference speed (v_r)
    std::vector<std::array<double, 2>> reference_path;  // polyline from ego_start
    std::array<double, 2> goal{0.0, 0.0};
    AdversaryScript adversary;
    double duration = 12.0;  // s
    std::uint64_t seed = 0;
};

struct CollisionEvent {
    double time = 0.0;
    double impact_speed = 0.0;     // v_i, |relative velocity| at contact
    double reference_speed = 0.0;  // v_r
    bool policy_fault = false;
};

struct SimState {
    double time = 0.0;
    Pose ego;
    double ego_speed = 0.0;
    Pose adversary;
    double adversary_speed = 0.0;
    std::optional<CollisionEvent> collision;
};

struct EpisodeLog {
    std::vector<SimState> states;
    std::vector<double> deviations;  // per step, distance to the reference path
    double d_initial = 0.0;
    double d_final = 0.0;
    bool reached_goal = false;
    std::vector<std::array<double, 2>> reference_path;
};

// Policies see the rendered observation history plus (for scripted oracles)
// the privileged simulator state.
using Policy =
    std::function<ActionTrajectory(const SimState& state, const std::vector<Image>& history,
                                   Command command)>;

Scenario build_scenario(ScenarioType type, double ego_speed, std::uint64_t seed);

AgentState adversary_at(const Scenario& sc, double t);

// Advances the simulation by one receding-horizon step: the ego moves to the
// trajectory's first waypoint (transformed to world frame, heading along the
// displacement); the adversary follows its script; collisions are detected
// on sub-sampled interpolated states. dt is 0.5 s at 2 Hz.
SimState step(const Scenario& sc, const SimState& state, const ActionTrajectory& trajectory,
              double dt = 0.5);

struct RunOptions {
    int max_steps = 24;
    double dt = 0.5;
    double goal_radius = 2.0;
    int history_frames = 4;
    world::WorldConfig render_config;  // road layout forced to straight
};

EpisodeLog run_episode(const Policy& policy, const Scenario& sc, const RunOptions& opts);

double nncap_score(const EpisodeLog& log, bool* flagged = nullptr);
double mean_deviation(const EpisodeLog& log);
double progress(const EpisodeLog& log, bool* flagged = nullptr);

double point_to_polyline_distance(double x, double y,
                                  const std::vector<std::array<double, 2>>& path);

struct Summary {
    int episodes = 0;
    double avg_nns = 0.0;
    double collision_rate_pct = 0.0;
    double avg_mean_deviation = 0.0;
    double avg_progress = 0.0;
};

Summary aggregate(const std::vector<EpisodeLog>& logs);

// Scripted reference policies.
Policy braking_oracle_policy();
Policy constant_velocity_policy();
Policy road_avoider_policy();

}  // namespace vavam::cl
