#pragma once

#include "vast/types.hpp"

#include <algorithm>
#include <vector>

namespace vast {

struct TargetEstimate {
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero();
    Eigen::Matrix<double, 6, 6> covariance = Eigen::Matrix<double, 6, 6>::Identity();
    double stamp = 0.0;
};

struct TargetMeasurement {
    int sender = -1;
    double stamp = 0.0;
    Vec3 position = Vec3::Zero();
    double sigma = 0.05;
};

struct TargetPrediction {
    std::vector<Vec3> points;  // N_p + 1 positions, t_k = k * dt
    double dt = 0.3;
    double horizon = 1.8;
    int steps = 6;
    double start_stamp = 0.0;
    Vec3 velocity = Vec3::Zero();

    double stamp_of(int k) const { return start_stamp + k * dt; }
};

// Constant-velocity linear Kalman filter. Measurements are processed in
// stamp order; same-stamp updates commute up to round-off.
inline TargetEstimate fuse(const TargetEstimate &estimate,
                           std::vector<TargetMeasurement> measurements,
                           double process_accel_sigma = 2.0) {
    Eigen::LLT<Eigen::Matrix<double, 6, 6>> llt(
        estimate.covariance + 1e-12 * Eigen::Matrix<double, 6, 6>::Identity());
    if (llt.info() != Eigen::Success ||
        !estimate.covariance.isApprox(estimate.covariance.transpose(), 1e-9))
        throw std::invalid_argument("fuse: covariance must be symmetric PSD");

    std::stable_sort(measurements.begin(), measurements.end(),
                     [](const TargetMeasurement &a, const TargetMeasurement &b) {
                         if (a.stamp != b.stamp) return a.stamp < b.stamp;
                         return a.sender < b.sender;
                     });

    TargetEstimate est = estimate;
    const double q = process_accel_sigma * process_accel_sigma;
    for (const TargetMeasurement &m : measurements) {
        double dt = m.stamp - est.stamp;
        if (dt < -1e-9) throw std::invalid_argument("fuse: measurement predates the estimate");
        dt = std::max(dt, 0.0);
        if (dt > 0.0) {
            Eigen::Matrix<double, 6, 6> F = Eigen::Matrix<double, 6, 6>::Identity();
            F.topRightCorner<3, 3>() = dt * Eigen::Matrix3d::Identity();
            Eigen::Matrix<double, 6, 6> Q = Eigen::Matrix<double, 6, 6>::Zero();
            double dt2 = dt * dt, dt3 = dt2 * dt;
            Q.topLeftCorner<3, 3>() = (q * dt3 / 3.0) * Eigen::Matrix3d::Identity();
            Q.topRightCorner<3, 3>() = (q * dt2 / 2.0) * Eigen::Matrix3d::Identity();
            Q.bottomLeftCorner<3, 3>() = (q * dt2 / 2.0) * Eigen::Matrix3d::Identity();
            Q.bottomRightCorner<3, 3>() = (q * dt) * Eigen::Matrix3d::Identity();
            est.position += dt * est.velocity;
            est.covariance = F * est.covariance * F.transpose() + Q;
            est.stamp = m.stamp;
        }
        Eigen::Matrix<double, 3, 6> H = Eigen::Matrix<double, 3, 6>::Zero();
        H.leftCols<3>() = Eigen::Matrix3d::Identity();
        Eigen::Matrix3d S = H * est.covariance * H.transpose() +
                            (m.sigma * m.sigma) * Eigen::Matrix3d::Identity();
        Eigen::Matrix<double, 6, 3> K = est.covariance * H.transpose() * S.inverse();
        Vec3 innov = m.position - est.position;
        Eigen::Matrix<double, 6, 1> dx = K * innov;
        est.position += dx.head<3>();
        est.velocity += dx.tail<3>();
        Eigen::Matrix<double, 6, 6> IKH = Eigen::Matrix<double, 6, 6>::Identity() - K * H;
        // Joseph form keeps the covariance PSD.
        est.covariance = IKH * est.covariance * IKH.transpose() +
                         K * (m.sigma * m.sigma) * K.transpose();
        est.stamp = std::max(est.stamp, m.stamp);
    }
    return est;
}

// Constant-velocity forward interpolation: xi_k = p + v * k * dt.
inline TargetPrediction predict(const TargetEstimate &estimate, double dt, double horizon) {
    if (dt <= 0.0) throw std::invalid_argument("predict: dt must be positive");
    double steps_f = horizon / dt;
    int steps = static_cast<int>(std::lround(steps_f));
    if (steps < 1 || std::abs(steps * dt - horizon) > 1e-9 * std::max(1.0, horizon))
        throw std::invalid_argument("predict: horizon must be a positive multiple of dt");
    TargetPrediction pred;
    pred.dt = dt;
    pred.horizon = horizon;
    pred.steps = steps;
    pred.start_stamp = estimate.stamp;
    pred.velocity = estimate.velocity;
    pred.points.resize(steps + 1);
    for (int k = 0; k <= steps; ++k) pred.points[k] = estimate.position + estimate.velocity * (k * dt);
    return pred;
}

}  // namespace vast
