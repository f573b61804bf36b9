// SPDX-License-Identifier: Apache-2.0
#include "ankf/sim/generate.hpp"

#include <cmath>

#include "ankf/errors.hpp"
#include "ankf/lie.hpp"
#include "ankf/rng.hpp"
#include "ankf/sim/kinematics.hpp"

namespace ankf::sim {

namespace {

constexpr double kGravityZ = -9.81;
constexpr double kCommandLagS = 0.1;  // first-order lag on commanded twists

// Quintic ease 0->1 with zero velocity and acceleration at both ends.
double quintic(double u) { return u * u * u * (10.0 + u * (-15.0 + 6.0 * u)); }
double quintic_rate(double u) {
    const double w = u * (1.0 - u);
    return 30.0 * w * w;
}

struct BaseTrajectory {
    std::vector<Eigen::Matrix3d> R;
    std::vector<Eigen::Vector3d> v_w, p, a_w;
    std::vector<Eigen::Vector3d> w_body;
    std::vector<Eigen::Vector3d> v_body;
};

BaseTrajectory integrate_base(const EpisodeConfig& cfg, size_t n, double dt) {
    BaseTrajectory b;
    b.R.resize(n + 1);
    b.v_w.resize(n + 1);
    b.p.resize(n + 1);
    b.a_w.resize(n);
    b.w_body.resize(n);
    b.v_body.resize(n + 1);

    b.R[0] = Eigen::Matrix3d::Identity();
    b.p[0] = Eigen::Vector3d(0.0, 0.0, cfg.gait.body_height_m);
    b.v_body[0] = Eigen::Vector3d::Zero();
    double wz = 0.0;

    size_t cmd_idx = 0;
    const double alpha = dt / kCommandLagS;
    for (size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * dt;
        while (cmd_idx + 1 < cfg.commands.size() && cfg.commands[cmd_idx + 1].t_start <= t) {
            ++cmd_idx;
        }
        const TwistCommand& cmd = cfg.commands[cmd_idx];

        b.w_body[k] = Eigen::Vector3d(0.0, 0.0, wz);
        b.v_w[k] = b.R[k] * b.v_body[k];
        b.R[k + 1] = b.R[k] * lie::exp_so3(b.w_body[k] * dt);

        Eigen::Vector3d v_next = b.v_body[k];
        v_next.x() += alpha * (cmd.vx - v_next.x());
        v_next.y() += alpha * (cmd.vy - v_next.y());
        wz += alpha * (cmd.wz - wz);
        b.v_body[k + 1] = v_next;

        const Eigen::Vector3d v_w_next = b.R[k + 1] * v_next;
        b.a_w[k] = (v_w_next - b.v_w[k]) / dt;
        b.p[k + 1] = b.p[k] + b.v_w[k] * dt + 0.5 * b.a_w[k] * dt * dt;
        b.v_w[k + 1] = v_w_next;
    }
    return b;
}

struct Foot {
    Eigen::Vector3d pos = Eigen::Vector3d::Zero();
    Eigen::Vector3d vel = Eigen::Vector3d::Zero();
    bool stance = true;
};

class GaitPlanner {
public:
    GaitPlanner(const EpisodeConfig& cfg, const RobotModel& model, const BaseTrajectory& base,
                double dt, size_t n, Rng& slip_rng)
        : cfg_(cfg), model_(model), base_(base), dt_(dt), n_(n), slip_rng_(slip_rng) {
        period_ = 1.0 / cfg.gait.step_freq_hz;
        stance_dur_ = cfg.gait.duty_factor * period_;
    }

    // Trot phase offsets: diagonal pairs move together.
    static constexpr std::array<double, kNumLegs> kOffsets{0.0, 0.5, 0.5, 0.0};

    // Nominal touchdown point: ground projection of the leg-plane origin
    // plus half a stance of commanded travel.
    Eigen::Vector3d touchdown_target(size_t k, int leg) const {
        k = std::min(k, n_);
        const Eigen::Vector3d leg_origin =
            model_.hip_offsets[leg] +
            Eigen::Vector3d(0.0, model_.side_sign(leg) * model_.hip_yaw_offset, 0.0);
        const size_t kv = std::min(k, n_ - 1);
        Eigen::Vector3d tgt = base_.p[k] + base_.R[k] * leg_origin +
                              base_.R[k] * (base_.v_body[kv] * (0.5 * stance_dur_));
        tgt.z() = 0.0;
        return tgt;
    }

    bool slip_active(double t, int leg, double* scale) const {
        for (const auto& seg : cfg_.slip) {
            if (t >= seg.t_start && t < seg.t_end && seg.feet[leg] && seg.slip_vel_scale > 0.0) {
                *scale = seg.slip_vel_scale;
                return true;
            }
        }
        return false;
    }

    // Advances leg state to tick k and returns its world pose.
    Foot step(size_t k, int leg) {
        const double t = static_cast<double>(k) * dt_;
        const double ph = t / period_ + kOffsets[leg];
        const double cycle = std::floor(ph);
        const double frac = ph - cycle;
        const bool stance = frac < cfg_.gait.duty_factor;

        Leg& st = legs_[leg];
        Foot out;
        out.stance = stance;

        if (stance) {
            const double t_td = (cycle - kOffsets[leg]) * period_;
            if (!st.in_stance || !st.initialized) {
                st.anchor = st.initialized ? touchdown_target(tick_of(t_td), leg)
                                           : touchdown_target(0, leg);
                st.in_stance = true;
                st.initialized = true;
                st.slipping = false;
            }
            double scale = 0.0;
            if (slip_active(t, leg, &scale)) {
                if (!st.slipping) {
                    const double psi = slip_rng_.uniform(0.0, 2.0 * M_PI);
                    st.slip_mean = scale * Eigen::Vector3d(std::cos(psi), std::sin(psi), 0.0);
                    st.slip_vel = st.slip_mean;
                    st.slipping = true;
                }
                // OU relaxation toward the per-stance mean drift.
                const double lambda = 20.0, sigma = 0.15 * scale;
                st.slip_vel += lambda * (st.slip_mean - st.slip_vel) * dt_;
                st.slip_vel.x() += sigma * std::sqrt(dt_) * slip_rng_.gaussian();
                st.slip_vel.y() += sigma * std::sqrt(dt_) * slip_rng_.gaussian();
                st.slip_vel.z() = 0.0;
                out.vel = st.slip_vel;
                st.anchor += st.slip_vel * dt_;
            } else {
                st.slipping = false;
                out.vel.setZero();
            }
            out.pos = st.anchor;
        } else {
            if (st.in_stance || !st.initialized) {
                st.lift_pos = (st.in_stance && st.initialized) ? st.anchor
                                                               : touchdown_target(0, leg);
                st.in_stance = false;
                st.initialized = true;
                st.slipping = false;
                st.t_lift = (cycle + cfg_.gait.duty_factor - kOffsets[leg]) * period_;
                st.t_land = (cycle + 1.0 - kOffsets[leg]) * period_;
                st.target = touchdown_target(tick_of(st.t_land), leg);
            }
            const double t_sw = st.t_land - st.t_lift;
            const double u = std::clamp((t - st.t_lift) / t_sw, 0.0, 1.0);
            const Eigen::Vector3d delta = st.target - st.lift_pos;
            out.pos = st.lift_pos + quintic(u) * delta;
            out.pos.z() = cfg_.gait.step_height_m * std::sin(M_PI * u) * std::sin(M_PI * u);
            out.vel = quintic_rate(u) / t_sw * delta;
            out.vel.z() = cfg_.gait.step_height_m * M_PI * std::sin(2.0 * M_PI * u) / t_sw;
        }
        return out;
    }

private:
    struct Leg {
        bool initialized = false;
        bool in_stance = false;
        bool slipping = false;
        Eigen::Vector3d anchor = Eigen::Vector3d::Zero();
        Eigen::Vector3d slip_vel = Eigen::Vector3d::Zero();
        Eigen::Vector3d slip_mean = Eigen::Vector3d::Zero();
        Eigen::Vector3d lift_pos = Eigen::Vector3d::Zero();
        Eigen::Vector3d target = Eigen::Vector3d::Zero();
        double t_lift = 0.0, t_land = 0.0;
    };

    size_t tick_of(double t) const {
        const double k = std::round(t / dt_);
        return static_cast<size_t>(std::clamp(k, 0.0, static_cast<double>(n_)));
    }

    const EpisodeConfig& cfg_;
    const RobotModel& model_;
    const BaseTrajectory& base_;
    double dt_, period_, stance_dur_;
    size_t n_;
    Rng& slip_rng_;
    std::array<Leg, kNumLegs> legs_;
};

}  // namespace

bool EpisodeConfig::valid(std::string* why) const {
    auto fail = [&](const char* msg) {
        if (why) *why = msg;
        return false;
    };
    if (!(duration_s > 0.0)) return fail("duration_s must be > 0");
    if (!(rate_hz > 0.0)) return fail("rate_hz must be > 0");
    if (!(gait.duty_factor > 0.0 && gait.duty_factor < 1.0))
        return fail("gait.duty_factor must be in (0,1)");
    if (!(gait.step_freq_hz > 0.0)) return fail("gait.step_freq_hz must be > 0");
    if (!(gait.step_height_m >= 0.0)) return fail("gait.step_height_m must be >= 0");
    if (!(gait.body_height_m > 0.0)) return fail("gait.body_height_m must be > 0");
    if (!(contact_accuracy > 0.0 && contact_accuracy <= 1.0))
        return fail("contact_accuracy must be in (0,1]");
    if (commands.empty()) return fail("commands must not be empty");
    for (const auto& seg : slip) {
        if (!(seg.t_end > seg.t_start)) return fail("slip segment t_end must exceed t_start");
        if (!(seg.slip_vel_scale >= 0.0)) return fail("slip_vel_scale must be >= 0");
    }
    if (noise.gyro_std < 0 || noise.accel_std < 0 || noise.joint_pos_std < 0 ||
        noise.joint_vel_std < 0 || noise.gyro_bias_walk < 0 || noise.accel_bias_walk < 0)
        return fail("noise stds must be >= 0");
    return true;
}

Episode generate_episode(const EpisodeConfig& cfg, const RobotModel& model) {
    std::string why;
    if (!cfg.valid(&why)) throw ConfigError("generate_episode: " + why);
    if (!model.valid()) throw ConfigError("generate_episode: invalid robot model");

    const double dt = 1.0 / cfg.rate_hz;
    const size_t n = static_cast<size_t>(std::llround(cfg.duration_s * cfg.rate_hz));

    Rng slip_rng(cfg.seed ^ 0x736c6970ULL);
    Rng noise_rng(cfg.seed ^ 0x6e6f6973ULL);
    Rng contact_rng(cfg.seed ^ 0x636f6e74ULL);

    const BaseTrajectory base = integrate_base(cfg, n, dt);
    GaitPlanner planner(cfg, model, base, dt, n, slip_rng);

    Episode ep;
    ep.config = cfg;
    ep.model = model;
    ep.frames.resize(n);
    ep.truth.resize(n);

    const Eigen::Vector3d g(0.0, 0.0, kGravityZ);
    Eigen::Vector3d bias_g = Eigen::Vector3d::Zero();
    Eigen::Vector3d bias_a = Eigen::Vector3d::Zero();
    const double sqrt_dt = std::sqrt(dt);

    for (size_t k = 0; k < n; ++k) {
        SensorFrame& f = ep.frames[k];
        GroundTruthState& gt = ep.truth[k];
        f.t = static_cast<double>(k) * dt;
        gt.R = base.R[k];
        gt.v = base.v_w[k];
        gt.p = base.p[k];

        const Eigen::Matrix3d Rt = gt.R.transpose();
        const Eigen::Vector3d omega = base.w_body[k];

        for (int leg = 0; leg < kNumLegs; ++leg) {
            const Foot foot = planner.step(k, leg);
            gt.foot_pos_w[leg] = foot.pos;
            gt.foot_vel_w[leg] = foot.vel;
            f.contact_gt[leg] = foot.stance;

            const Eigen::Vector3d foot_body = Rt * (foot.pos - gt.p);
            const Eigen::Vector3d q = leg_inverse_kinematics(foot_body, leg, model);
            // Joint rates consistent with the world-frame foot velocity.
            const Eigen::Vector3d foot_body_vel =
                Rt * (foot.vel - gt.v) - omega.cross(foot_body);
            const Eigen::Matrix3d J = analytic_leg_jacobian(q, leg, model);
            const Eigen::Vector3d qd = J.partialPivLu().solve(foot_body_vel);
            f.joint_pos.segment<3>(3 * leg) = q;
            f.joint_vel.segment<3>(3 * leg) = qd;
        }

        // Tick-constant IMU consistent with exact gamma-based strapdown.
        const Eigen::Matrix3d inv_g1 =
            lie::gamma1(omega * dt).partialPivLu().inverse();
        f.gyro = omega;
        f.accel = inv_g1 * (Rt * (base.a_w[k] - g));

        bias_g += Eigen::Vector3d(noise_rng.gaussian(cfg.noise.gyro_bias_walk * sqrt_dt),
                                  noise_rng.gaussian(cfg.noise.gyro_bias_walk * sqrt_dt),
                                  noise_rng.gaussian(cfg.noise.gyro_bias_walk * sqrt_dt));
        bias_a += Eigen::Vector3d(noise_rng.gaussian(cfg.noise.accel_bias_walk * sqrt_dt),
                                  noise_rng.gaussian(cfg.noise.accel_bias_walk * sqrt_dt),
                                  noise_rng.gaussian(cfg.noise.accel_bias_walk * sqrt_dt));
        for (int i = 0; i < 3; ++i) {
            f.gyro(i) += bias_g(i) + noise_rng.gaussian(cfg.noise.gyro_std);
            f.accel(i) += bias_a(i) + noise_rng.gaussian(cfg.noise.accel_std);
        }
        for (int i = 0; i < 12; ++i) f.joint_pos(i) += noise_rng.gaussian(cfg.noise.joint_pos_std);
        for (int i = 0; i < 12; ++i) f.joint_vel(i) += noise_rng.gaussian(cfg.noise.joint_vel_std);

        const double flip_p = 1.0 - cfg.contact_accuracy;
        for (int leg = 0; leg < kNumLegs; ++leg) {
            const bool flip = contact_rng.bernoulli(flip_p);
            f.contact_est[leg] = flip ? !f.contact_gt[leg] : f.contact_gt[leg];
        }

        if (!f.gyro.allFinite() || !f.accel.allFinite() || !f.joint_pos.allFinite() ||
            !f.joint_vel.allFinite()) {
            throw NumericalError("generate_episode: non-finite sensor sample");
        }
    }
    return ep;
}

}  // namespace ankf::sim
