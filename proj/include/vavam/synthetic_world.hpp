#pragma once

#include "vavam/common.hpp"
#include "vavam/image.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace vavam::world {

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

enum class RoadLayout { straight, left_turn, right_turn, intersection };
enum class Command { left, right, straight };
enum class AgentClass { car, bus };

const char* to_string(RoadLayout l);
const char* to_string(Command c);
RoadLayout road_layout_from_string(const std::string& s);
Command command_from_string(const std::string& s);

struct Pose {
    double x = 0.0;    // m
    double y = 0.0;    // m
    double yaw = 0.0;  // rad, measured from +x axis
};

// Transform a world point into the frame of `ego`: heading maps to +y and
// +x points to the right of the heading.
std::array<double, 2> to_ego_frame(const Pose& ego, double wx, double wy);
std::array<double, 2> from_ego_frame(const Pose& ego, double px, double py);

struct AgentState {
    Pose pose;
    double speed = 0.0;             // m/s
    double length = 4.5;            // m, along heading
    double width = 2.0;             // m
    AgentClass cls = AgentClass::car;
};

struct WorldConfig {
    int image_height = 64;
    int image_width = 64;
    double frame_rate = 2.0;  // Hz
    RoadLayout road_layout = RoadLayout::straight;
    int n_agents = 2;
    std::uint64_t seed = 0;

    // Rendering and road geometry constants, fixed at desk scale.
    double meters_per_pixel = 0.5;
    double road_half_width = 3.5;
    double ego_speed = 5.0;      // m/s along the centerline
    double turn_radius = 20.0;   // m, for left_turn / right_turn

    void validate(int tokenizer_stride) const;
};

struct Episode {
    std::vector<Image> frames;
    std::vector<Pose> ego_poses;
    std::vector<std::vector<AgentState>> agent_states;  // per frame
    std::vector<double> timestamps;                     // s, 1/frame_rate spacing
    double duration = 0.0;                              // s
    WorldConfig config;
};

// H future waypoints [x, y] in the ego BEV frame, meters, heading toward +y.
using ActionTrajectory = std::vector<std::array<double, 2>>;

struct ClipSample {
    std::vector<Image> observations;  // context_len frames
    ActionTrajectory action;          // horizon waypoints
    Command command = Command::straight;
    int episode_start = 0;  // index of the first observation frame
};

struct DataMixSource {
    std::string id;
    double weight = 0.0;
};

struct DataMixSchedule {
    std::vector<DataMixSource> sources;
    std::size_t total_samples = 0;
    std::uint64_t seed = 0;

    void validate() const;  // fractions sum to 1 +- 1e-9, weights >= 0
};

// ---------------------------------------------------------------------------
// Road geometry: closed-form centerline parameterization per layout.
// ---------------------------------------------------------------------------

class RoadGeometry {
public:
    explicit RoadGeometry(const WorldConfig& cfg);

    // Ego pose after traveling arclength s from the start.
    Pose pose_at(double arclength) const;

    // Signed lateral offset of a world point from the main centerline
    // (positive to the right of travel) and the longitudinal arclength of the
    // closest centerline point. For the intersection layout the cross road is
    // handled separately via on_cross_road().
    void project(double wx, double wy, double& lateral, double& longitudinal) const;

    bool on_road(double wx, double wy) const;
    bool on_marking(double wx, double wy) const;

    RoadLayout layout() const { return layout_; }
    double cross_road_y() const { return cross_y_; }

private:
    RoadLayout layout_;
    double half_width_;
    double radius_;
    double cross_y_;  // intersection cross-road center, m ahead of start
    bool on_cross_road(double wx, double wy) const;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// Deterministic episode for a fixed (config, seed). `tokenizer_stride` is the
// grid stride the frames must be divisible by.
Episode generate_episode(const WorldConfig& config, int n_frames, int tokenizer_stride = 8);

// Renders one frame: egocentric top-down view, ego anchored bottom-center,
// heading up. `labels`, when non-null, receives the per-pixel semantic class
// (0 background, 1 road, 2 marking, 3 ego, 4 agent).
Image render_frame(const WorldConfig& cfg, const RoadGeometry& road, const Pose& ego,
                   const std::vector<AgentState>& agents, std::vector<std::uint8_t>* labels = nullptr);

std::vector<ClipSample> extract_clips(const Episode& episode, int context_len, int horizon,
                                      int stride, double yaw_threshold = 0.2);

Command derive_command(const ActionTrajectory& action, double yaw_threshold = 0.2);

// Future ego positions after frame `frame_idx`, expressed in that frame's ego
// frame. Requires frame_idx + horizon < |poses|.
ActionTrajectory future_waypoints(const Episode& episode, int frame_idx, int horizon);

// Interleaved (source index, within-source index) stream; deterministic for a
// fixed schedule seed. Sources cycle when exhausted.
std::vector<std::pair<std::size_t, std::size_t>> sample_mix(const DataMixSchedule& schedule,
                                                            const std::vector<std::size_t>& source_sizes);

// ---------------------------------------------------------------------------
// Persistence: manifest (JSON) + per-frame raw RGB + poses CSV.
// ---------------------------------------------------------------------------

void save_episode(const std::filesystem::path& dir, const Episode& episode);
Episode load_episode(const std::filesystem::path& dir);

}  // namespace vavam::world
