#include "vavam/closed_loop.hpp"

#include <cmath>

namespace vavam::cl {

const char* to_string(ScenarioType t) {
    switch (t) {
        case ScenarioType::stationary: return "stationary";
        case ScenarioType::frontal: return "frontal";
        case ScenarioType::side: return "side";
    }
    return "stationary";
}

ScenarioType scenario_type_from_string(const std::string& s) {
    if (s == "stationary") return ScenarioType::stationary;
    if (s == "frontal") return ScenarioType::frontal;
    if (s == "side") return ScenarioType::side;
    throw ConfigError("unknown scenario type: " + s);
}

// ---------------------------------------------------------------------------
// Scenario construction
// ---------------------------------------------------------------------------

Scenario build_scenario(ScenarioType type, double ego_speed, std::uint64_t seed) {
    Rng rng(derive_seed(seed, "closed_loop_scenario"));
    Scenario sc;
    sc.type = type;
    sc.seed = seed;
    sc.ego_speed = ego_speed;
    sc.ego_start = {0.0, 0.0, M_PI / 2.0};
    const double path_len = 60.0;
    for (int i = 0; i <= 60; ++i) sc.reference_path.push_back({0.0, path_len * i / 60.0});
    sc.goal = {0.0, path_len};
    sc.duration = 12.0;

    switch (type) {
        case ScenarioType::stationary: {
            const double y = 30.0 + rng.uniform(-2.0, 2.0);
            sc.adversary.start = {0.0, y, M_PI / 2.0};
            sc.adversary.speed = 0.0;
            if (seed % 2 == 1) {
                sc.adversary.cls = AgentClass::bus;
                sc.adversary.length = 12.0;
                sc.adversary.width = 2.5;
            }
            break;
        }
        case ScenarioType::frontal: {
            const double y = 55.0 + rng.uniform(0.0, 10.0);
            sc.adversary.start = {0.0, y, -M_PI / 2.0};  // head-on, antiparallel heading
            sc.adversary.speed = 5.0 + rng.uniform(0.0, 2.0);
            break;
        }
        case ScenarioType::side: {
            const double conflict_y = 30.0 + rng.uniform(-2.0, 2.0);
            const double start_x = 20.0 + rng.uniform(0.0, 10.0);
            const double t_conflict = conflict_y / ego_speed;
            sc.adversary.start = {start_x, conflict_y, M_PI};  // crossing from the right
            sc.adversary.speed = start_x / t_conflict;         // timed to meet the ego
            break;
        }
    }
    return sc;
}

AgentState adversary_at(const Scenario& sc, double t) {
    AgentState st;
    st.cls = sc.adversary.cls;
    st.length = sc.adversary.length;
    st.width = sc.adversary.width;
    st.speed = sc.adversary.speed;
    st.pose = sc.adversary.start;
    st.pose.x += sc.adversary.speed * t * std::cos(sc.adversary.start.yaw);
    st.pose.y += sc.adversary.speed * t * std::sin(sc.adversary.start.yaw);
    return st;
}

// ---------------------------------------------------------------------------
// Oriented-rectangle overlap (separating axis test)
// ---------------------------------------------------------------------------

namespace {

struct Obb {
    double cx, cy, yaw, half_len, half_wid;
};

void obb_corners(const Obb& b, double corners[4][2]) {
    const double c = std::cos(b.yaw);
    const double s = std::sin(b.yaw);
    const double lx = c * b.half_len, ly = s * b.half_len;   // along heading
    const double wx = s * b.half_wid, wy = -c * b.half_wid;  // right of heading
    corners[0][0] = b.cx + lx + wx;
    corners[0][1] = b.cy + ly + wy;
    corners[1][0] = b.cx + lx - wx;
    corners[1][1] = b.cy + ly - wy;
    corners[2][0] = b.cx - lx - wx;
    corners[2][1] = b.cy - ly - wy;
    corners[3][0] = b.cx - lx + wx;
    corners[3][1] = b.cy - ly + wy;
}

bool obb_overlap(const Obb& a, const Obb& b) {
    double ca[4][2], cb[4][2];
    obb_corners(a, ca);
    obb_corners(b, cb);
    const double axes[4][2] = {
        {std::cos(a.yaw), std::sin(a.yaw)},
        {-std::sin(a.yaw), std::cos(a.yaw)},
        {std::cos(b.yaw), std::sin(b.yaw)},
        {-std::sin(b.yaw), std::cos(b.yaw)},
    };
    for (const auto& axis : axes) {
        double min_a = 1e300, max_a = -1e300, min_b = 1e300, max_b = -1e300;
        for (int i = 0; i < 4; ++i) {
            const double pa = ca[i][0] * axis[0] + ca[i][1] * axis[1];
            const double pb = cb[i][0] * axis[0] + cb[i][1] * axis[1];
            min_a = std::min(min_a, pa);
            max_a = std::max(max_a, pa);
            min_b = std::min(min_b, pb);
            max_b = std::max(max_b, pb);
        }
        if (max_a < min_b || max_b < min_a) return false;
    }
    return true;
}

constexpr double kEgoHalfLen = 4.5 / 2.0;
constexpr double kEgoHalfWid = 2.0 / 2.0;

}  // namespace

// ---------------------------------------------------------------------------
// Simulation step
// ---------------------------------------------------------------------------

SimState step(const Scenario& sc, const SimState& state, const ActionTrajectory& trajectory,
              double dt) {
    if (dt <= 0.0) throw ConfigError("step: dt must be positive");
    SimState next = state;
    next.time = state.time + dt;

    bool fault = trajectory.empty();
    if (!fault)
        for (const auto& wp : trajectory)
            if (!std::isfinite(wp[0]) || !std::isfinite(wp[1])) fault = true;
    if (fault) {
        if (!next.collision)
            next.collision = CollisionEvent{next.time, sc.ego_speed, sc.ego_speed, true};
        return next;
    }

    const auto target = world::from_ego_frame(state.ego, trajectory[0][0], trajectory[0][1]);
    const double dx = target[0] - state.ego.x;
    const double dy = target[1] - state.ego.y;
    const double dist = std::hypot(dx, dy);
    const double new_yaw = dist > 1e-9 ? std::atan2(dy, dx) : state.ego.yaw;

    next.ego = {target[0], target[1], new_yaw};
    next.ego_speed = dist / dt;

    const AgentState adv_next = adversary_at(sc, next.time);
    next.adversary = adv_next.pose;
    next.adversary_speed = adv_next.speed;

    if (!next.collision) {
        const int n_sub = 20;
        for (int k = 1; k <= n_sub; ++k) {
            const double f = static_cast<double>(k) / n_sub;
            const double t_sub = state.time + f * dt;
            const Obb ego_box{state.ego.x + f * dx, state.ego.y + f * dy, new_yaw, kEgoHalfLen,
                              kEgoHalfWid};
            const AgentState adv = adversary_at(sc, t_sub);
            const Obb adv_box{adv.pose.x, adv.pose.y, adv.pose.yaw, adv.length / 2.0,
                              adv.width / 2.0};
            if (obb_overlap(ego_box, adv_box)) {
                const double ego_vx = dx / dt, ego_vy = dy / dt;
                const double adv_vx = adv.speed * std::cos(adv.pose.yaw);
                const double adv_vy = adv.speed * std::sin(adv.pose.yaw);
                CollisionEvent ev;
                ev.time = t_sub;
                ev.impact_speed = std::hypot(ego_vx - adv_vx, ego_vy - adv_vy);
                ev.reference_speed = sc.ego_speed;
                next.collision = ev;
                break;
            }
        }
    }
    return next;
}

// ---------------------------------------------------------------------------
// Episode loop
// ---------------------------------------------------------------------------

double point_to_polyline_distance(double x, double y,
                                  const std::vector<std::array<double, 2>>& path) {
    if (path.empty()) throw ConfigError("point_to_polyline_distance: empty path");
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        const double ax = path[i][0], ay = path[i][1];
        const double bx = path[i + 1][0], by = path[i + 1][1];
        const double vx = bx - ax, vy = by - ay;
        const double len2 = vx * vx + vy * vy;
        double t = len2 > 0.0 ? ((x - ax) * vx + (y - ay) * vy) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        best = std::min(best, std::hypot(x - (ax + t * vx), y - (ay + t * vy)));
    }
    if (path.size() == 1) best = std::hypot(x - path[0][0], y - path[0][1]);
    return best;
}

EpisodeLog run_episode(const Policy& policy, const Scenario& sc, const RunOptions& opts) {
    EpisodeLog log;
    log.reference_path = sc.reference_path;
    log.d_initial = std::hypot(sc.ego_start.x - sc.goal[0], sc.ego_start.y - sc.goal[1]);

    world::WorldConfig render_cfg = opts.render_config;
    render_cfg.road_layout = world::RoadLayout::straight;
    world::RoadGeometry road(render_cfg);

    SimState state;
    state.ego = sc.ego_start;
    state.ego_speed = sc.ego_speed;
    const AgentState adv0 = adversary_at(sc, 0.0);
    state.adversary = adv0.pose;
    state.adversary_speed = adv0.speed;

    std::vector<Image> history;
    auto render = [&](const SimState& s) {
        return world::render_frame(render_cfg, road, s.ego, {adversary_at(sc, s.time)});
    };
    history.push_back(render(state));

    log.states.push_back(state);
    log.deviations.push_back(point_to_polyline_distance(state.ego.x, state.ego.y, sc.reference_path));

    for (int stepi = 0; stepi < opts.max_steps; ++stepi) {
        ActionTrajectory traj;
        bool fault = false;
        try {
            traj = policy(state, history, Command::straight);
        } catch (const std::exception&) {
            fault = true;
        }
        SimState next = fault ? [&] {
            SimState s = state;
            s.time += opts.dt;
            if (!s.collision) s.collision = CollisionEvent{s.time, sc.ego_speed, sc.ego_speed, true};
            return s;
        }()
                              : step(sc, state, traj, opts.dt);

        state = next;
        log.states.push_back(state);
        log.deviations.push_back(
            point_to_polyline_distance(state.ego.x, state.ego.y, sc.reference_path));

        if (state.collision) break;
        const double goal_dist = std::hypot(state.ego.x - sc.goal[0], state.ego.y - sc.goal[1]);
        if (goal_dist <= opts.goal_radius) {
            log.reached_goal = true;
            break;
        }
        history.push_back(render(state));
        if (static_cast<int>(history.size()) > opts.history_frames)
            history.erase(history.begin());
    }

    const auto& last = log.states.back();
    log.d_final = std::hypot(last.ego.x - sc.goal[0], last.ego.y - sc.goal[1]);
    return log;
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

double nncap_score(const EpisodeLog& log, bool* flagged) {
    if (flagged) *flagged = false;
    bool collided = false;
    CollisionEvent ev;
    for (const auto& s : log.states)
        if (s.collision) {
            collided = true;
            ev = *s.collision;
            break;
        }
    if (!collided) return 5.0;
    if (ev.reference_speed <= 0.0) {
        if (flagged) *flagged = true;
        return 0.0;
    }
    return 4.0 * std::max(0.0, 1.0 - ev.impact_speed / ev.reference_speed);
}

double mean_deviation(const EpisodeLog& log) {
    if (log.reference_path.empty()) throw ConfigError("mean_deviation: empty reference path");
    if (log.deviations.empty()) return 0.0;
    double sum = 0.0;
    for (double d : log.deviations) sum += d;
    return sum / static_cast<double>(log.deviations.size());
}

double progress(const EpisodeLog& log, bool* flagged) {
    if (flagged) *flagged = false;
    if (log.d_initial <= 0.0) {
        if (flagged) *flagged = true;
        return 1.0;
    }
    return std::max(0.0, (log.d_initial - log.d_final) / log.d_initial);
}

Summary aggregate(const std::vector<EpisodeLog>& logs) {
    if (logs.empty()) throw ConfigError("aggregate: no episodes");
    Summary s;
    s.episodes = static_cast<int>(logs.size());
    int collisions = 0;
    for (const auto& log : logs) {
        bool collided = false;
        for (const auto& st : log.states) collided = collided || st.collision.has_value();
        collisions += collided ? 1 : 0;
        s.avg_nns += nncap_score(log);
        s.avg_mean_deviation += mean_deviation(log);
        s.avg_progress += progress(log);
    }
    s.avg_nns /= s.episodes;
    s.avg_mean_deviation /= s.episodes;
    s.avg_progress /= s.episodes;
    s.collision_rate_pct = 100.0 * collisions / s.episodes;
    return s;
}

// ---------------------------------------------------------------------------
// Scripted policies
// ---------------------------------------------------------------------------

Policy braking_oracle_policy() {
    return [](const SimState& state, const std::vector<Image>&, Command) {
        ActionTrajectory traj(6, {0.0, 0.0});
        const auto rel = world::to_ego_frame(state.ego, state.adversary.x, state.adversary.y);
        const double speed = 6.0;
        const double stop_distance = std::max(8.0, 2.0 * speed);
        const bool obstacle_ahead = std::abs(rel[0]) < 2.0 && rel[1] > 0.0 && rel[1] < stop_distance;
        if (!obstacle_ahead)
            for (int k = 0; k < 6; ++k) traj[k] = {0.0, (k + 1) * speed * 0.5};
        return traj;
    };
}

Policy constant_velocity_policy() {
    return [](const SimState&, const std::vector<Image>&, Command) {
        ActionTrajectory traj(6);
        const double speed = 6.0;
        for (int k = 0; k < 6; ++k) traj[k] = {0.0, (k + 1) * speed * 0.5};
        return traj;
    };
}

Policy road_avoider_policy() {
    auto counter = std::make_shared<int>(0);
    return [counter](const SimState&, const std::vector<Image>&, Command) {
        ActionTrajectory traj(6);
        const double d = 3.0;  // 6 m/s at 2 Hz
        if (*counter < 3) {
            // veer hard right, off the road
            for (int k = 0; k < 6; ++k) traj[k] = {(k + 1) * d * M_SQRT1_2, (k + 1) * d * M_SQRT1_2};
        } else {
            for (int k = 0; k < 6; ++k) traj[k] = {0.0, (k + 1) * d};
        }
        *counter += 1;
        return traj;
    };
}

}  // namespace vavam::cl
