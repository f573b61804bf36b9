// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ankf/errors.hpp"
#include "ankf/lie.hpp"
#include "ankf/sim/generate.hpp"
#include "ankf/sim/kinematics.hpp"
#include "test_util.hpp"

using namespace ankf;
using namespace ankf::sim;

namespace {

Eigen::Matrix4d translate(const Eigen::Vector3d& t) {
    Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
    T.block<3, 1>(0, 3) = t;
    return T;
}

Eigen::Matrix4d rotate(const Eigen::Vector3d& axis, double a) {
    Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
    T.block<3, 3>(0, 0) = lie::exp_so3(axis * a);
    return T;
}

// Homogeneous-transform-chain oracle, independent of the closed form.
Eigen::Vector3d fk_oracle(const Eigen::Vector3d& q, int leg, const RobotModel& m) {
    const double s = m.side_sign(leg);
    Eigen::Matrix4d T = translate(m.hip_offsets[leg]) *
                        rotate(Eigen::Vector3d::UnitX(), q(0)) *
                        translate({0, s * m.hip_yaw_offset, 0}) *
                        rotate(Eigen::Vector3d::UnitY(), q(1)) *
                        translate({0, 0, -m.thigh_len}) *
                        rotate(Eigen::Vector3d::UnitY(), q(2)) *
                        translate({0, 0, -m.shank_len});
    return T.block<3, 1>(0, 3);
}

}  // namespace

TEST_CASE("forward kinematics matches the zero configuration and the chain oracle") {
    RobotModel m;
    for (int leg = 0; leg < kNumLegs; ++leg) {
        Eigen::Vector3d expected = m.hip_offsets[leg];
        expected.y() += m.side_sign(leg) * m.hip_yaw_offset;
        expected.z() -= m.thigh_len + m.shank_len;
        CHECK((leg_forward_kinematics(Eigen::Vector3d::Zero(), leg, m) - expected).norm() <
              1e-14);
    }

    Eigen::Vector3d bent(0.0, 0.0, M_PI / 2);
    for (int leg = 0; leg < kNumLegs; ++leg) {
        CHECK((leg_forward_kinematics(bent, leg, m) - fk_oracle(bent, leg, m)).norm() < 1e-12);
    }

    auto g = test::rng(31);
    for (int i = 0; i < 500; ++i) {
        int leg = static_cast<int>(g() % kNumLegs);
        Eigen::Vector3d q(test::uniform(g, -1.0, 1.0), test::uniform(g, -1.2, 1.2),
                          test::uniform(g, 0.0, 2.5));
        CHECK((leg_forward_kinematics(q, leg, m) - fk_oracle(q, leg, m)).norm() < 1e-12);
    }
}

TEST_CASE("inverse kinematics round trips and rejects unreachable targets") {
    RobotModel m;
    for (int leg = 0; leg < kNumLegs; ++leg) {
        Eigen::Vector3d foot = leg_forward_kinematics(Eigen::Vector3d::Zero(), leg, m);
        CHECK(leg_inverse_kinematics(foot, leg, m).norm() < 1e-9);
    }

    auto g = test::rng(32);
    for (int i = 0; i < 1000; ++i) {
        int leg = static_cast<int>(g() % kNumLegs);
        Eigen::Vector3d q(test::uniform(g, -0.7, 0.7), test::uniform(g, -1.0, 1.0),
                          test::uniform(g, 0.15, 2.4));
        Eigen::Vector3d foot = leg_forward_kinematics(q, leg, m);
        Eigen::Vector3d q_back = leg_inverse_kinematics(foot, leg, m);
        CHECK((leg_forward_kinematics(q_back, leg, m) - foot).norm() < 1e-9);
    }

    Eigen::Vector3d too_far = m.hip_offsets[0];
    too_far.y() += m.hip_yaw_offset;
    too_far.z() -= m.thigh_len + m.shank_len + 1e-3;
    CHECK_THROWS_AS(leg_inverse_kinematics(too_far, 0, m), DataError);
}

TEST_CASE("analytic jacobian matches central finite differences") {
    RobotModel m;
    auto g = test::rng(33);
    const double h = 1e-6;
    for (int i = 0; i < 200; ++i) {
        int leg = static_cast<int>(g() % kNumLegs);
        Eigen::Vector3d q(test::uniform(g, -0.8, 0.8), test::uniform(g, -1.0, 1.0),
                          test::uniform(g, 0.2, 2.2));
        Eigen::Matrix3d J = analytic_leg_jacobian(q, leg, m);
        Eigen::Matrix3d J_fd;
        for (int c = 0; c < 3; ++c) {
            Eigen::Vector3d qp = q, qm = q;
            qp(c) += h;
            qm(c) -= h;
            J_fd.col(c) =
                (leg_forward_kinematics(qp, leg, m) - leg_forward_kinematics(qm, leg, m)) /
                (2 * h);
        }
        CHECK((J - J_fd).cwiseAbs().maxCoeff() < 1e-6);
    }

    // Straight knee is singular: rank drops below 3.
    Eigen::Matrix3d J_sing = analytic_leg_jacobian({0.2, 0.3, 0.0}, 0, m);
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(J_sing);
    CHECK(svd.singularValues()(2) < 1e-12);
}

TEST_CASE("foot velocity is zero for a static robot and zero joint rates") {
    RobotModel m;
    BaseKinematics base{Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero(),
                        Eigen::Vector3d::Zero()};
    Eigen::Vector3d q(0.1, 0.4, 1.2);
    CHECK(foot_velocity_world(base, q, Eigen::Vector3d::Zero(), 1, m).norm() == 0.0);
}

TEST_CASE("noise-free stance feet are world-fixed and foot velocity vanishes") {
    EpisodeConfig cfg;
    cfg.duration_s = 6.0;
    cfg.commands = {{0.0, 0.4, 0.05, 0.1}};
    cfg.seed = 7;
    Episode ep = generate_episode(cfg);
    REQUIRE(ep.size() == 3000);

    std::array<Eigen::Vector3d, kNumLegs> anchor;
    std::array<bool, kNumLegs> had{false, false, false, false};
    double worst_drift = 0.0, worst_vel = 0.0;
    for (size_t k = 0; k < ep.size(); ++k) {
        const auto& f = ep.frames[k];
        const auto& gt = ep.truth[k];
        for (int leg = 0; leg < kNumLegs; ++leg) {
            if (!f.contact_gt[leg]) {
                had[leg] = false;
                continue;
            }
            if (!had[leg]) {
                anchor[leg] = gt.foot_pos_w[leg];
                had[leg] = true;
            }
            worst_drift = std::max(worst_drift, (gt.foot_pos_w[leg] - anchor[leg]).norm());
            BaseKinematics base{gt.R, gt.v, f.gyro};
            const Eigen::Vector3d v = foot_velocity_world(
                base, f.joint_pos.segment<3>(3 * leg), f.joint_vel.segment<3>(3 * leg), leg,
                ep.model);
            worst_vel = std::max(worst_vel, v.norm());
        }
    }
    CHECK(worst_drift < 1e-9);
    CHECK(worst_vel < 1e-9);
}

TEST_CASE("injected slip drives stance-foot speed near the configured scale") {
    EpisodeConfig cfg;
    cfg.duration_s = 8.0;
    cfg.commands = {{0.0, 0.3, 0.0, 0.0}};
    cfg.slip.push_back({2.0, 7.0, 0.3, {true, true, true, true}});
    cfg.seed = 8;
    Episode ep = generate_episode(cfg);

    double sum = 0.0;
    size_t count = 0;
    for (size_t k = 0; k < ep.size(); ++k) {
        const double t = ep.frames[k].t;
        if (t < 2.05 || t > 6.95) continue;
        for (int leg = 0; leg < kNumLegs; ++leg) {
            if (!ep.frames[k].contact_gt[leg]) continue;
            sum += ep.truth[k].foot_vel_w[leg].norm();
            ++count;
        }
    }
    REQUIRE(count > 1000);
    const double mean_speed = sum / static_cast<double>(count);
    CHECK(mean_speed == doctest::Approx(0.3).epsilon(0.20));
}

TEST_CASE("generate_episode is deterministic and static without commands") {
    EpisodeConfig cfg;
    cfg.duration_s = 3.0;
    cfg.noise.gyro_std = 1e-3;
    cfg.noise.accel_std = 1e-2;
    cfg.noise.joint_pos_std = 1e-3;
    cfg.contact_accuracy = 0.97;
    cfg.seed = 99;
    Episode a = generate_episode(cfg);
    Episode b = generate_episode(cfg);
    REQUIRE(a.size() == b.size());
    for (size_t k = 0; k < a.size(); ++k) {
        CHECK(a.frames[k].gyro == b.frames[k].gyro);
        CHECK(a.frames[k].accel == b.frames[k].accel);
        CHECK(a.frames[k].joint_pos == b.frames[k].joint_pos);
        CHECK(a.frames[k].contact_est == b.frames[k].contact_est);
        CHECK(a.truth[k].p == b.truth[k].p);
    }

    EpisodeConfig still;
    still.duration_s = 5.0;
    still.commands = {{0.0, 0.0, 0.0, 0.0}};
    Episode s = generate_episode(still);
    for (size_t k = 0; k < s.size(); ++k) {
        CHECK((s.truth[k].p - s.truth[0].p).norm() < 1e-9);
    }
}

TEST_CASE("commanded forward speed integrates to the expected distance") {
    EpisodeConfig cfg;
    cfg.duration_s = 10.0;
    cfg.commands = {{0.0, 0.5, 0.0, 0.0}};
    Episode ep = generate_episode(cfg);
    const double dist = (ep.truth.back().p - ep.truth.front().p).norm();
    CHECK(dist == doctest::Approx(5.0).epsilon(0.02));
}

TEST_CASE("noise-free IMU strapdown reproduces ground truth") {
    EpisodeConfig cfg;
    cfg.duration_s = 10.0;
    cfg.commands = {{0.0, 0.5, 0.1, 0.15}, {5.0, 0.2, -0.1, -0.2}};
    Episode ep = generate_episode(cfg);
    const double dt = ep.dt();
    const Eigen::Vector3d g(0, 0, -9.81);

    Eigen::Matrix3d R = ep.truth[0].R;
    Eigen::Vector3d v = ep.truth[0].v;
    Eigen::Vector3d p = ep.truth[0].p;
    double traveled = 0.0;
    for (size_t k = 0; k < ep.size(); ++k) {
        const Eigen::Vector3d w = ep.frames[k].gyro;
        const Eigen::Vector3d a = ep.frames[k].accel;
        const Eigen::Vector3d phi = w * dt;
        p += v * dt + (R * lie::gamma2(phi) * a + 0.5 * g) * dt * dt;
        v += (R * lie::gamma1(phi) * a + g) * dt;
        R = R * lie::gamma0(phi);
        if (k > 0) traveled += (ep.truth[k].p - ep.truth[k - 1].p).norm();
    }
    const double err = (p - (ep.truth.back().p + ep.truth.back().v * dt)).norm();
    CHECK(err < 0.01 * traveled);
}

TEST_CASE("contact corruption hits the configured flip rate") {
    EpisodeConfig cfg;
    cfg.duration_s = 60.0;
    cfg.contact_accuracy = 0.97;
    cfg.seed = 5;
    Episode ep = generate_episode(cfg);
    size_t flips = 0, total = 0;
    for (const auto& f : ep.frames) {
        for (int leg = 0; leg < kNumLegs; ++leg) {
            flips += (f.contact_est[leg] != f.contact_gt[leg]);
            ++total;
        }
    }
    REQUIRE(total >= 100000);
    const double rate = static_cast<double>(flips) / static_cast<double>(total);
    CHECK(std::abs(rate - 0.03) < 0.01);
}

TEST_CASE("invalid configs are rejected with the failing field named") {
    EpisodeConfig cfg;
    cfg.gait.duty_factor = 1.5;
    CHECK_THROWS_WITH_AS(static_cast<void>(generate_episode(cfg)),
                         doctest::Contains("duty_factor"), ConfigError);
}
