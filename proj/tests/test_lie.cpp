// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ankf/errors.hpp"
#include "ankf/lie.hpp"
#include "test_util.hpp"

using namespace ankf;
using ankf::lie::GroupMatrix;
using ankf::lie::TangentVector;

TEST_CASE("hat3 matches the definition and the cross-product oracle") {
    Eigen::Matrix3d M = lie::hat3({1, 2, 3});
    Eigen::Matrix3d expected;
    expected << 0, -3, 2, 3, 0, -1, -2, 1, 0;
    CHECK((M - expected).norm() == 0.0);
    CHECK(lie::hat3(Eigen::Vector3d::Zero()).norm() == 0.0);

    auto g = test::rng(17);
    for (int i = 0; i < 200; ++i) {
        Eigen::Vector3d v = test::random_vec3(g, 5.0);
        Eigen::Vector3d w = test::random_vec3(g, 5.0);
        CHECK((lie::hat3(v) * w - v.cross(w)).norm() < 1e-12);
        CHECK((lie::hat3(v) + lie::hat3(v).transpose()).norm() == 0.0);
    }
}

TEST_CASE("vee3 inverts hat3 exactly and rejects non-antisymmetric input") {
    CHECK((lie::vee3(lie::hat3({1, 2, 3})) - Eigen::Vector3d(1, 2, 3)).norm() == 0.0);
    CHECK(lie::vee3(Eigen::Matrix3d::Zero()).norm() == 0.0);

    auto g = test::rng(18);
    for (int i = 0; i < 1000; ++i) {
        Eigen::Vector3d v = test::random_vec3(g, 10.0);
        CHECK((lie::vee3(lie::hat3(v)) - v).norm() == 0.0);
    }
    CHECK_THROWS_AS(lie::vee3(Eigen::Matrix3d::Identity()), NumericalError);
}

TEST_CASE("exp_so3 basics and orthonormality sweep") {
    CHECK((lie::exp_so3(Eigen::Vector3d::Zero()) - Eigen::Matrix3d::Identity()).norm() == 0.0);

    // Quarter turn about z sends x to y.
    Eigen::Matrix3d R = lie::exp_so3({0, 0, M_PI / 2});
    CHECK((R * Eigen::Vector3d::UnitX() - Eigen::Vector3d::UnitY()).norm() < 1e-12);

    // Rodrigues closed form evaluated independently.
    auto g = test::rng(19);
    for (int i = 0; i < 1000; ++i) {
        Eigen::Vector3d axis = test::random_unit3(g);
        double angle = test::uniform(g, -3.0, 3.0);
        Eigen::Matrix3d Rt = lie::exp_so3(angle * axis);
        CHECK((Rt.transpose() * Rt - Eigen::Matrix3d::Identity()).norm() < 1e-10);
        CHECK(Rt.determinant() == doctest::Approx(1.0).epsilon(1e-10));
        Eigen::Matrix3d K = lie::hat3(axis);
        Eigen::Matrix3d rodrigues = Eigen::Matrix3d::Identity() + std::sin(angle) * K +
                                    (1 - std::cos(angle)) * K * K;
        CHECK((Rt - rodrigues).norm() < 1e-12);
        CHECK((Rt * lie::exp_so3(-angle * axis) - Eigen::Matrix3d::Identity()).norm() < 1e-12);
    }
}

TEST_CASE("log_so3 round trips, principal branch, near-pi handling") {
    CHECK(lie::log_so3(Eigen::Matrix3d::Identity()).norm() == 0.0);
    CHECK((lie::log_so3(lie::exp_so3({0.1, 0, 0})) - Eigen::Vector3d(0.1, 0, 0)).norm() < 1e-10);

    auto g = test::rng(20);
    for (int i = 0; i < 1000; ++i) {
        Eigen::Vector3d theta = test::random_unit3(g) * test::uniform(g, 1e-6, M_PI - 0.05);
        CHECK((lie::log_so3(lie::exp_so3(theta)) - theta).norm() < 1e-9);
    }
    // Near the pi singularity.
    for (int i = 0; i < 200; ++i) {
        Eigen::Vector3d theta = test::random_unit3(g) * (M_PI - 1e-3);
        Eigen::Vector3d back = lie::log_so3(lie::exp_so3(theta));
        // Same rotation: compare group elements, branch sign may flip.
        CHECK((lie::exp_so3(back) - lie::exp_so3(theta)).norm() < 1e-6);
        CHECK(back.norm() <= M_PI + 1e-9);
    }
    // Small angles.
    for (int i = 0; i < 200; ++i) {
        Eigen::Vector3d theta = test::random_unit3(g) * test::uniform(g, 0.0, 1e-5);
        CHECK((lie::log_so3(lie::exp_so3(theta)) - theta).norm() < 1e-12);
    }
}

TEST_CASE("exp_sek3 block closed form against dense matrix-exponential oracle") {
    CHECK((lie::exp_sek3(TangentVector::Zero()) - GroupMatrix::Identity()).norm() == 0.0);

    // Zero rotation: columns pass through unchanged (J_l(0) = I).
    TangentVector xi = TangentVector::Zero();
    xi.segment<3>(6) = Eigen::Vector3d(1, 2, 3);
    GroupMatrix X = lie::exp_sek3(xi);
    CHECK((X.block<3, 1>(0, 4) - Eigen::Vector3d(1, 2, 3)).norm() == 0.0);

    auto g = test::rng(21);
    for (int i = 0; i < 300; ++i) {
        TangentVector v;
        for (int k = 0; k < lie::kTangentDim; ++k) v(k) = test::uniform(g, -0.5, 0.5);
        // hat of the tangent in the 9x9 algebra.
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(lie::kGroupDim, lie::kGroupDim);
        A.topLeftCorner<3, 3>() = lie::hat3(v.head<3>());
        for (int c = 0; c < 6; ++c) A.block<3, 1>(0, 3 + c) = v.segment<3>(3 + 3 * c);
        Eigen::MatrixXd dense = test::expm_taylor(A);
        CHECK((lie::exp_sek3(v) - dense).norm() < 1e-9);
    }
}

TEST_CASE("adjoint_sek3 satisfies the defining identity") {
    CHECK((lie::adjoint_sek3(GroupMatrix::Identity()) -
           lie::AdjointMatrix::Identity())
              .norm() == 0.0);

    auto g = test::rng(22);
    for (int i = 0; i < 100; ++i) {
        TangentVector zv, xi;
        for (int k = 0; k < lie::kTangentDim; ++k) {
            zv(k) = test::uniform(g, -0.8, 0.8);
            xi(k) = test::uniform(g, -0.5, 0.5);
        }
        GroupMatrix Z = lie::exp_sek3(zv);
        GroupMatrix lhs = Z * lie::exp_sek3(xi) * lie::inverse_sek3(Z);
        GroupMatrix rhs = lie::exp_sek3(lie::adjoint_sek3(Z) * xi);
        CHECK((lhs - rhs).norm() < 1e-8);
    }

    // Pure rotation: all translational diagonal blocks equal R.
    TangentVector rot = TangentVector::Zero();
    rot.head<3>() = Eigen::Vector3d(0.3, -0.2, 0.5);
    GroupMatrix Z = lie::exp_sek3(rot);
    lie::AdjointMatrix adj = lie::adjoint_sek3(Z);
    for (int i = 0; i < 6; ++i) {
        CHECK((adj.block<3, 3>(3 + 3 * i, 3 + 3 * i) - Z.topLeftCorner<3, 3>()).norm() < 1e-12);
        CHECK(adj.block<3, 3>(3 + 3 * i, 0).norm() == 0.0);
    }
}

TEST_CASE("inverse_sek3 is the exact group inverse") {
    auto g = test::rng(23);
    for (int i = 0; i < 100; ++i) {
        TangentVector v;
        for (int k = 0; k < lie::kTangentDim; ++k) v(k) = test::uniform(g, -1.0, 1.0);
        GroupMatrix Z = lie::exp_sek3(v);
        CHECK((Z * lie::inverse_sek3(Z) - GroupMatrix::Identity()).norm() < 1e-12);
    }
}
