#include "vavam/synthetic_world.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace vavam::world {

using nlohmann::json;

const char* to_string(RoadLayout l) {
    switch (l) {
        case RoadLayout::straight: return "straight";
        case RoadLayout::left_turn: return "left_turn";
        case RoadLayout::right_turn: return "right_turn";
        case RoadLayout::intersection: return "intersection";
    }
    return "straight";
}

const char* to_string(Command c) {
    switch (c) {
        case Command::left: return "left";
        case Command::right: return "right";
        case Command::straight: return "straight";
    }
    return "straight";
}

RoadLayout road_layout_from_string(const std::string& s) {
    if (s == "straight") return RoadLayout::straight;
    if (s == "left_turn") return RoadLayout::left_turn;
    if (s == "right_turn") return RoadLayout::right_turn;
    if (s == "intersection") return RoadLayout::intersection;
    throw ConfigError("unknown road layout: " + s);
}

Command command_from_string(const std::string& s) {
    if (s == "left") return Command::left;
    if (s == "right") return Command::right;
    if (s == "straight") return Command::straight;
    throw ConfigError("unknown command: " + s);
}

std::array<double, 2> to_ego_frame(const Pose& ego, double wx, double wy) {
    const double dx = wx - ego.x;
    const double dy = wy - ego.y;
    const double c = std::cos(ego.yaw);
    const double s = std::sin(ego.yaw);
    // right = (sin yaw, -cos yaw), forward = (cos yaw, sin yaw)
    return {s * dx - c * dy, c * dx + s * dy};
}

std::array<double, 2> from_ego_frame(const Pose& ego, double px, double py) {
    const double c = std::cos(ego.yaw);
    const double s = std::sin(ego.yaw);
    return {ego.x + s * px + c * py, ego.y - c * px + s * py};
}

void WorldConfig::validate(int tokenizer_stride) const {
    if (frame_rate <= 0.0) throw ConfigError("frame_rate must be positive");
    if (image_height <= 0 || image_width <= 0) throw ConfigError("image size must be positive");
    if (tokenizer_stride > 0 &&
        (image_height % tokenizer_stride != 0 || image_width % tokenizer_stride != 0))
        throw ConfigError("image size must be divisible by the tokenizer stride");
    if (n_agents < 0) throw ConfigError("n_agents must be non-negative");
}

void DataMixSchedule::validate() const {
    double sum = 0.0;
    for (const auto& s : sources) {
        if (s.weight < 0.0) throw ConfigError("data mix weight must be non-negative: " + s.id);
        sum += s.weight;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("data mix weights must sum to 1");
}

// ---------------------------------------------------------------------------
// RoadGeometry
// ---------------------------------------------------------------------------

RoadGeometry::RoadGeometry(const WorldConfig& cfg)
    : layout_(cfg.road_layout),
      half_width_(cfg.road_half_width),
      radius_(cfg.turn_radius),
      cross_y_(25.0) {}

Pose RoadGeometry::pose_at(double s) const {
    switch (layout_) {
        case RoadLayout::straight:
        case RoadLayout::intersection:
            return {0.0, s, M_PI / 2.0};
        case RoadLayout::left_turn: {
            const double phi = s / radius_;
            return {-radius_ + radius_ * std::cos(phi), radius_ * std::sin(phi), M_PI / 2.0 + phi};
        }
        case RoadLayout::right_turn: {
            const double phi = s / radius_;
            const double theta = M_PI - phi;
            return {radius_ + radius_ * std::cos(theta), radius_ * std::sin(theta), M_PI / 2.0 - phi};
        }
    }
    return {};
}

void RoadGeometry::project(double wx, double wy, double& lateral, double& longitudinal) const {
    switch (layout_) {
        case RoadLayout::straight:
        case RoadLayout::intersection:
            lateral = wx;
            longitudinal = wy;
            return;
        case RoadLayout::left_turn: {
            const double rx = wx + radius_;
            const double r = std::hypot(rx, wy);
            lateral = r - radius_;
            longitudinal = radius_ * std::atan2(wy, rx);
            return;
        }
        case RoadLayout::right_turn: {
            const double rx = wx - radius_;
            const double r = std::hypot(rx, wy);
            lateral = radius_ - r;
            longitudinal = radius_ * (M_PI - std::atan2(wy, rx));
            return;
        }
    }
}

bool RoadGeometry::on_cross_road(double wx, double wy) const {
    (void)wx;
    return layout_ == RoadLayout::intersection && std::abs(wy - cross_y_) <= half_width_;
}

bool RoadGeometry::on_road(double wx, double wy) const {
    double lat, lon;
    project(wx, wy, lat, lon);
    return std::abs(lat) <= half_width_ || on_cross_road(wx, wy);
}

bool RoadGeometry::on_marking(double wx, double wy) const {
    double lat, lon;
    project(wx, wy, lat, lon);
    const bool on_main = std::abs(lat) <= half_width_;
    const bool on_cross = on_cross_road(wx, wy);
    if (on_main && on_cross) return false;  // junction box: plain asphalt
    auto road_marks = [this](double l, double s) {
        if (std::abs(l) > 3.0 && std::abs(l) <= half_width_) return true;  // solid edge lines
        double m = std::fmod(s, 4.0);
        if (m < 0.0) m += 4.0;
        return std::abs(l) < 0.3 && m < 2.0;  // dashed centerline
    };
    if (on_main) return road_marks(lat, lon);
    if (on_cross) return road_marks(wy - cross_y_, wx);
    return false;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

namespace {

struct Rgb {
    std::uint8_t r, g, b;
};
constexpr Rgb kBackground{32, 32, 32};
constexpr Rgb kRoad{96, 96, 96};
constexpr Rgb kMarking{255, 255, 255};
constexpr Rgb kEgo{50, 100, 220};
constexpr Rgb kCar{220, 60, 50};
constexpr Rgb kBus{235, 180, 40};

bool point_in_agent(const AgentState& a, double wx, double wy) {
    const auto p = to_ego_frame(a.pose, wx, wy);
    return std::abs(p[0]) <= a.width / 2.0 && std::abs(p[1]) <= a.length / 2.0;
}

}  // namespace

Image render_frame(const WorldConfig& cfg, const RoadGeometry& road, const Pose& ego,
                   const std::vector<AgentState>& agents, std::vector<std::uint8_t>* labels) {
    const int h = cfg.image_height;
    const int w = cfg.image_width;
    Image img(h, w);
    if (labels) labels->assign(static_cast<std::size_t>(h) * w, 0);

    const double mpp = cfg.meters_per_pixel;
    const int anchor_row = h - h / 8;  // ego anchored bottom-center
    const int anchor_col = w / 2;

    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const double px = (c - anchor_col) * mpp;
            const double py = (anchor_row - r) * mpp;
            const auto wp = from_ego_frame(ego, px, py);

            Rgb color = kBackground;
            std::uint8_t label = 0;
            if (road.on_road(wp[0], wp[1])) {
                color = road.on_marking(wp[0], wp[1]) ? kMarking : kRoad;
                label = road.on_marking(wp[0], wp[1]) ? 2 : 1;
            }
            // ego marker: fixed rectangle in the ego frame
            if (std::abs(px) <= 1.0 && std::abs(py) <= 2.25) {
                color = kEgo;
                label = 3;
            }
            for (const auto& a : agents) {
                if (point_in_agent(a, wp[0], wp[1])) {
                    color = a.cls == AgentClass::bus ? kBus : kCar;
                    label = 4;
                    break;
                }
            }
            img.set_pixel(r, c, color.r, color.g, color.b);
            if (labels) (*labels)[static_cast<std::size_t>(r) * w + c] = label;
        }
    }
    return img;
}

// ---------------------------------------------------------------------------
// Episode generation
// ---------------------------------------------------------------------------

namespace {

struct AgentScript {
    double lateral = 0.0;       // lane offset, m (main road) or y offset (cross road)
    double start = 0.0;         // initial arclength / x position, m
    double speed = 0.0;         // signed, m/s
    bool cross = false;         // travels along the intersection cross road
    AgentClass cls = AgentClass::car;
    double length = 4.5;
    double width = 2.0;
};

AgentState agent_state_at(const AgentScript& sc, const RoadGeometry& road, double t) {
    AgentState st;
    st.cls = sc.cls;
    st.length = sc.length;
    st.width = sc.width;
    st.speed = std::abs(sc.speed);
    if (sc.cross) {
        const double x = sc.start + sc.speed * t;
        st.pose = {x, road.cross_road_y() + sc.lateral, sc.speed >= 0.0 ? 0.0 : M_PI};
        return st;
    }
    const double s = sc.start + sc.speed * t;
    Pose lane = road.pose_at(s);
    // shift to the lane offset; flip heading for oncoming traffic
    const auto wp = from_ego_frame(lane, sc.lateral, 0.0);
    st.pose = {wp[0], wp[1], sc.speed >= 0.0 ? lane.yaw : wrap_angle(lane.yaw + M_PI)};
    return st;
}

}  // namespace

Episode generate_episode(const WorldConfig& config, int n_frames, int tokenizer_stride) {
    config.validate(tokenizer_stride);
    if (n_frames <= 0) throw ConfigError("n_frames must be positive");

    Episode ep;
    ep.config = config;
    RoadGeometry road(config);
    Rng rng(derive_seed(config.seed, "synthetic_world"));

    std::vector<AgentScript> scripts;
    for (int i = 0; i < config.n_agents; ++i) {
        AgentScript sc;
        sc.cls = rng.uniform() < 0.2 ? AgentClass::bus : AgentClass::car;
        if (sc.cls == AgentClass::bus) {
            sc.length = 12.0;
            sc.width = 2.5;
        }
        if (config.road_layout == RoadLayout::intersection && i % 2 == 1) {
            sc.cross = true;
            sc.lateral = rng.uniform() < 0.5 ? -1.9 : 1.9;
            sc.start = rng.uniform(-30.0, -10.0);
            sc.speed = rng.uniform(2.0, 5.0);
            if (sc.lateral > 0.0) {
                sc.start = -sc.start;
                sc.speed = -sc.speed;
            }
        } else {
            const bool oncoming = rng.uniform() < 0.5;
            sc.lateral = oncoming ? -1.9 : 1.9;
            sc.start = rng.uniform(10.0, 35.0);
            sc.speed = oncoming ? -rng.uniform(2.0, 5.0) : rng.uniform(2.0, 4.0);
        }
        scripts.push_back(sc);
    }

    const double dt = 1.0 / config.frame_rate;
    ep.frames.reserve(n_frames);
    for (int f = 0; f < n_frames; ++f) {
        const double t = f * dt;
        const Pose ego = road.pose_at(config.ego_speed * t);
        std::vector<AgentState> agents;
        agents.reserve(scripts.size());
        for (const auto& sc : scripts) agents.push_back(agent_state_at(sc, road, t));
        ep.frames.push_back(render_frame(config, road, ego, agents));
        ep.ego_poses.push_back(ego);
        ep.agent_states.push_back(std::move(agents));
        ep.timestamps.push_back(t);
    }
    ep.duration = (n_frames - 1) * dt;
    return ep;
}

// ---------------------------------------------------------------------------
// Clips and commands
// ---------------------------------------------------------------------------

ActionTrajectory future_waypoints(const Episode& episode, int frame_idx, int horizon) {
    if (frame_idx + horizon >= static_cast<int>(episode.ego_poses.size()))
        throw RangeError("future_waypoints: horizon exceeds episode length");
    const Pose& ref = episode.ego_poses[frame_idx];
    ActionTrajectory traj;
    traj.reserve(horizon);
    for (int k = 1; k <= horizon; ++k) {
        const Pose& p = episode.ego_poses[frame_idx + k];
        traj.push_back(to_ego_frame(ref, p.x, p.y));
    }
    return traj;
}

Command derive_command(const ActionTrajectory& action, double yaw_threshold) {
    // Polyline from the ego origin through the waypoints; the initial heading
    // reference is +y (the ego's own heading in its frame).
    double prev_heading = M_PI / 2.0;
    double total = 0.0;
    double last_x = 0.0, last_y = 0.0;
    for (const auto& wp : action) {
        const double dx = wp[0] - last_x;
        const double dy = wp[1] - last_y;
        if (std::hypot(dx, dy) < 1e-9) continue;
        const double h = std::atan2(dy, dx);
        total += wrap_angle(h - prev_heading);
        prev_heading = h;
        last_x = wp[0];
        last_y = wp[1];
    }
    // +x is right of heading, so counter-clockwise (positive) change is left
    if (total > yaw_threshold) return Command::left;
    if (total < -yaw_threshold) return Command::right;
    return Command::straight;
}

std::vector<ClipSample> extract_clips(const Episode& episode, int context_len, int horizon,
                                      int stride, double yaw_threshold) {
    if (context_len <= 0 || horizon <= 0 || stride <= 0)
        throw ConfigError("extract_clips: context_len, horizon, stride must be positive");
    std::vector<ClipSample> clips;
    const int n = static_cast<int>(episode.frames.size());
    for (int start = 0; start + context_len + horizon <= n; start += stride) {
        ClipSample clip;
        clip.episode_start = start;
        clip.observations.assign(episode.frames.begin() + start,
                                 episode.frames.begin() + start + context_len);
        clip.action = future_waypoints(episode, start + context_len - 1, horizon);
        clip.command = derive_command(clip.action, yaw_threshold);
        clips.push_back(std::move(clip));
    }
    return clips;
}

std::vector<std::pair<std::size_t, std::size_t>> sample_mix(const DataMixSchedule& schedule,
                                                            const std::vector<std::size_t>& source_sizes) {
    schedule.validate();
    if (source_sizes.size() != schedule.sources.size())
        throw ConfigError("sample_mix: source count mismatch");
    for (std::size_t i = 0; i < schedule.sources.size(); ++i)
        if (schedule.sources[i].weight > 0.0 && source_sizes[i] == 0)
            throw ConfigError("sample_mix: empty source with nonzero weight: " + schedule.sources[i].id);

    Rng rng(schedule.seed);
    std::vector<double> cum;
    double acc = 0.0;
    for (const auto& s : schedule.sources) {
        acc += s.weight;
        cum.push_back(acc);
    }
    std::vector<std::size_t> counters(schedule.sources.size(), 0);
    std::vector<std::pair<std::size_t, std::size_t>> stream;
    stream.reserve(schedule.total_samples);
    for (std::size_t i = 0; i < schedule.total_samples; ++i) {
        const double u = rng.uniform() * acc;
        std::size_t src = cum.size() - 1;
        for (std::size_t j = 0; j < cum.size(); ++j) {
            if (u < cum[j]) {
                src = j;
                break;
            }
        }
        stream.emplace_back(src, counters[src] % source_sizes[src]);
        counters[src] += 1;
    }
    return stream;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

void save_episode(const std::filesystem::path& dir, const Episode& episode) {
    std::filesystem::create_directories(dir);
    json manifest;
    manifest["image_height"] = episode.config.image_height;
    manifest["image_width"] = episode.config.image_width;
    manifest["frame_rate"] = episode.config.frame_rate;
    manifest["road_layout"] = to_string(episode.config.road_layout);
    manifest["n_agents"] = episode.config.n_agents;
    manifest["seed"] = episode.config.seed;
    manifest["meters_per_pixel"] = episode.config.meters_per_pixel;
    manifest["road_half_width"] = episode.config.road_half_width;
    manifest["ego_speed"] = episode.config.ego_speed;
    manifest["turn_radius"] = episode.config.turn_radius;
    manifest["n_frames"] = episode.frames.size();
    manifest["duration"] = episode.duration;
    {
        std::ofstream f(dir / "manifest.json");
        f << manifest.dump(2) << "\n";
    }
    {
        std::ofstream f(dir / "poses.csv");
        f << "t,x,y,yaw\n";
        f.precision(17);
        for (std::size_t i = 0; i < episode.ego_poses.size(); ++i)
            f << episode.timestamps[i] << "," << episode.ego_poses[i].x << ","
              << episode.ego_poses[i].y << "," << episode.ego_poses[i].yaw << "\n";
    }
    {
        std::ofstream f(dir / "agents.csv");
        f << "frame,agent,x,y,yaw,speed,length,width,class\n";
        f.precision(17);
        for (std::size_t fr = 0; fr < episode.agent_states.size(); ++fr)
            for (std::size_t a = 0; a < episode.agent_states[fr].size(); ++a) {
                const auto& st = episode.agent_states[fr][a];
                f << fr << "," << a << "," << st.pose.x << "," << st.pose.y << ","
                  << st.pose.yaw << "," << st.speed << "," << st.length << "," << st.width << ","
                  << (st.cls == AgentClass::bus ? "bus" : "car") << "\n";
            }
    }
    char name[32];
    for (std::size_t i = 0; i < episode.frames.size(); ++i) {
        std::snprintf(name, sizeof(name), "frame_%05zu.rgb", i);
        write_raw_rgb(dir / name, episode.frames[i]);
    }
}

Episode load_episode(const std::filesystem::path& dir) {
    std::ifstream mf(dir / "manifest.json");
    if (!mf) throw LoadError("load_episode: missing manifest in " + dir.string());
    json manifest = json::parse(mf);

    Episode ep;
    ep.config.image_height = manifest.at("image_height").get<int>();
    ep.config.image_width = manifest.at("image_width").get<int>();
    ep.config.frame_rate = manifest.at("frame_rate").get<double>();
    ep.config.road_layout = road_layout_from_string(manifest.at("road_layout").get<std::string>());
    ep.config.n_agents = manifest.at("n_agents").get<int>();
    ep.config.seed = manifest.at("seed").get<std::uint64_t>();
    ep.config.meters_per_pixel = manifest.at("meters_per_pixel").get<double>();
    ep.config.road_half_width = manifest.at("road_half_width").get<double>();
    ep.config.ego_speed = manifest.at("ego_speed").get<double>();
    ep.config.turn_radius = manifest.at("turn_radius").get<double>();
    ep.duration = manifest.at("duration").get<double>();
    const std::size_t n_frames = manifest.at("n_frames").get<std::size_t>();

    {
        std::ifstream f(dir / "poses.csv");
        if (!f) throw LoadError("load_episode: missing poses.csv");
        std::string line;
        std::getline(f, line);  // header
        while (std::getline(f, line)) {
            std::istringstream ss(line);
            std::string tok;
            double v[4];
            for (int i = 0; i < 4; ++i) {
                if (!std::getline(ss, tok, ',')) throw LoadError("load_episode: malformed poses.csv");
                v[i] = std::stod(tok);
            }
            ep.timestamps.push_back(v[0]);
            ep.ego_poses.push_back({v[1], v[2], v[3]});
        }
    }
    ep.agent_states.assign(n_frames, {});
    {
        std::ifstream f(dir / "agents.csv");
        if (f) {
            std::string line;
            std::getline(f, line);
            while (std::getline(f, line)) {
                std::istringstream ss(line);
                std::string tok;
                std::vector<std::string> cols;
                while (std::getline(ss, tok, ',')) cols.push_back(tok);
                if (cols.size() != 9) throw LoadError("load_episode: malformed agents.csv");
                const std::size_t fr = std::stoul(cols[0]);
                AgentState st;
                st.pose = {std::stod(cols[2]), std::stod(cols[3]), std::stod(cols[4])};
                st.speed = std::stod(cols[5]);
                st.length = std::stod(cols[6]);
                st.width = std::stod(cols[7]);
                st.cls = cols[8] == "bus" ? AgentClass::bus : AgentClass::car;
                ep.agent_states[fr].push_back(st);
            }
        }
    }
    char name[32];
    for (std::size_t i = 0; i < n_frames; ++i) {
        std::snprintf(name, sizeof(name), "frame_%05zu.rgb", i);
        ep.frames.push_back(read_raw_rgb(dir / name, ep.config.image_height, ep.config.image_width));
    }
    if (ep.frames.size() != ep.ego_poses.size())
        throw LoadError("load_episode: frame/pose count mismatch");
    return ep;
}

}  // namespace vavam::world
