#pragma once

// Closed-form evaluators for the link, computing, and flight models. All
// functions are pure and stateless; they are templated on the scalar type so
// the same expressions can be instantiated at higher precision.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace flexedge::physics {

template <class Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
template <class Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;

/// Outcome of one computing path. `actual_time` is always `est_time +
/// time_gap`, so the estimate/actual split survives exactly. `relayed_bits`
/// is only populated by the aerial-server path.
template <class Scalar>
struct ComputeResult {
  Scalar est_time = 0;      // s, as recorded by the twin
  Scalar time_gap = 0;      // s, actual minus estimate
  Scalar actual_time = 0;   // s
  Scalar energy = 0;        // J
  Scalar relayed_bits = 0;  // bits handed to the relay link
};

/// Rotary-wing power model parameters.
template <class Scalar>
struct RotorParams {
  Scalar blade_power = 39.03;         // W, profile power in hover (P0)
  Scalar induced_power = 89.07;       // W, induced power in hover (Pi)
  Scalar tip_speed = 100.0;           // m/s, rotor blade tip speed
  Scalar mean_rotor_velocity = 3.6;   // m/s
  Scalar fuselage_drag_ratio = 0.6;   // dimensionless
  Scalar rotor_solidity = 0.05;       // dimensionless
  Scalar air_density = 1.225;         // kg/m^3
  Scalar disc_area = 0.5030;          // m^2
  int profile_speed_exponent = 3;     // exponent of speed in the profile term
};

// Free-space inverse-square gain relative to the 1 m reference gain.
template <class Scalar>
Scalar channel_gain(const Vec3<Scalar>& pos_a, const Vec3<Scalar>& pos_b,
                    Scalar ref_gain) {
  const Scalar d2 = (pos_a - pos_b).squaredNorm();
  if (d2 <= Scalar(0)) {
    throw std::domain_error("channel_gain: coincident endpoints");
  }
  return ref_gain / d2;
}

// Per-user uplink rate under orthogonal access: each of the `num_users`
// users gets bandwidth/num_users, with the SNR referred to the full band.
template <class Scalar>
Scalar uplink_rate(Scalar gain, Scalar tx_power, Scalar bandwidth,
                   int num_users, Scalar noise_psd) {
  const Scalar snr =
      Scalar(num_users) * tx_power * gain / (bandwidth * noise_psd);
  return bandwidth / Scalar(num_users) * std::log2(Scalar(1) + snr);
}

// Local execution of the (1-alpha) share of a task. The twin estimate uses
// the recorded frequency; the gap term accounts for the signed deviation of
// the real frequency, so est + gap == workload / (est_freq + freq_dev).
template <class Scalar>
ComputeResult<Scalar> local_compute(Scalar alpha, Scalar bits, Scalar density,
                                    Scalar est_freq, Scalar freq_dev) {
  if (est_freq <= Scalar(0)) {
    throw std::domain_error("local_compute: non-positive estimated frequency");
  }
  const Scalar actual_freq = est_freq + freq_dev;
  if (actual_freq <= Scalar(0)) {
    throw std::domain_error("local_compute: non-positive actual frequency");
  }
  ComputeResult<Scalar> r;
  const Scalar workload = (Scalar(1) - alpha) * bits * density;  // cycles
  r.est_time = workload / est_freq;
  r.time_gap = -workload * freq_dev / (est_freq * actual_freq);
  r.actual_time = r.est_time + r.time_gap;
  return r;
}

// Upload time of the offloaded share.
template <class Scalar>
Scalar offload_time(Scalar alpha, Scalar bits, Scalar rate) {
  if (rate <= Scalar(0)) {
    throw std::domain_error("offload_time: non-positive rate");
  }
  return alpha * bits / rate;
}

// Aerial-server execution of the offloaded share. Energy covers at most the
// cycles that fit between arrival and deadline; bits the server cannot absorb
// within that window are handed to the relay. A zero allocation with a
// positive offload never completes: the estimate saturates to +inf and the
// whole share is relayed.
template <class Scalar>
ComputeResult<Scalar> uav_compute(Scalar alpha, Scalar bits, Scalar density,
                                  Scalar deadline, Scalar t_offload,
                                  Scalar est_freq, Scalar freq_dev,
                                  Scalar cap_coeff) {
  if (est_freq < Scalar(0) || est_freq + freq_dev < Scalar(0)) {
    throw std::domain_error("uav_compute: negative frequency");
  }
  ComputeResult<Scalar> r;
  const Scalar offloaded = alpha * bits;
  if (offloaded <= Scalar(0)) {
    return r;
  }
  const Scalar workload = offloaded * density;  // cycles
  const Scalar actual_freq = est_freq + freq_dev;
  const Scalar window = std::max(deadline - t_offload, Scalar(0));
  r.energy = cap_coeff * actual_freq * actual_freq *
             std::min(actual_freq * window, workload);
  r.relayed_bits = std::clamp(offloaded - actual_freq * window / density,
                              Scalar(0), offloaded);
  constexpr Scalar inf = std::numeric_limits<Scalar>::infinity();
  if (est_freq <= Scalar(0)) {
    r.est_time = inf;
    r.actual_time = inf;
  } else {
    r.est_time = workload / est_freq;
    r.time_gap = actual_freq > Scalar(0)
                     ? -workload * freq_dev / (est_freq * actual_freq)
                     : inf;
    r.actual_time = r.est_time + r.time_gap;
  }
  return r;
}

// Roadside-server execution of the relayed bits; same structure as the
// aerial path with the relay delay eating into the deadline window.
template <class Scalar>
ComputeResult<Scalar> rsu_compute(Scalar relayed_bits, Scalar density,
                                  Scalar deadline, Scalar t_relay,
                                  Scalar est_freq, Scalar freq_dev,
                                  Scalar cap_coeff) {
  if (est_freq < Scalar(0) || est_freq + freq_dev < Scalar(0)) {
    throw std::domain_error("rsu_compute: negative frequency");
  }
  ComputeResult<Scalar> r;
  if (relayed_bits <= Scalar(0)) {
    return r;
  }
  const Scalar workload = relayed_bits * density;
  const Scalar actual_freq = est_freq + freq_dev;
  const Scalar window = std::max(deadline - t_relay, Scalar(0));
  r.energy = cap_coeff * actual_freq * actual_freq *
             std::min(actual_freq * window, workload);
  constexpr Scalar inf = std::numeric_limits<Scalar>::infinity();
  if (est_freq <= Scalar(0)) {
    r.est_time = inf;
    r.actual_time = inf;
  } else {
    r.est_time = workload / est_freq;
    r.time_gap = actual_freq > Scalar(0)
                     ? -workload * freq_dev / (est_freq * actual_freq)
                     : inf;
    r.actual_time = r.est_time + r.time_gap;
  }
  return r;
}

template <class Scalar>
Scalar relay_time(Scalar relayed_bits, Scalar relay_rate) {
  if (relay_rate <= Scalar(0)) {
    throw std::domain_error("relay_time: non-positive rate");
  }
  return relayed_bits / relay_rate;
}

// End-to-end latency of the offloaded share: upload, then the slower of the
// relay+roadside pipeline and the aerial server, which run concurrently.
template <class Scalar>
Scalar edge_latency(Scalar t_offload, Scalar t_relay, Scalar t_rsu,
                    Scalar t_uav) {
  return t_offload + std::max(t_relay + t_rsu, t_uav);
}

template <class Scalar>
Vec2<Scalar> clamp_norm(const Vec2<Scalar>& v, Scalar max_norm) {
  const Scalar n = v.norm();
  if (n > max_norm) {
    return v * (max_norm / n);
  }
  return v;
}

template <class Scalar>
struct KinematicsUpdate {
  Vec3<Scalar> position;
  Vec2<Scalar> velocity;
  Vec2<Scalar> applied_accel;
};

// Double-integrator update at fixed altitude. The commanded acceleration is
// magnitude-limited first; the resulting velocity is magnitude-limited after
// integration.
template <class Scalar>
KinematicsUpdate<Scalar> update_kinematics(const Vec3<Scalar>& position,
                                           const Vec2<Scalar>& velocity,
                                           const Vec2<Scalar>& accel,
                                           Scalar dt, Scalar v_max,
                                           Scalar a_max) {
  KinematicsUpdate<Scalar> out;
  out.applied_accel = clamp_norm(accel, a_max);
  const Vec2<Scalar> xy = position.template head<2>() + velocity * dt +
                          Scalar(0.5) * out.applied_accel * dt * dt;
  out.position << xy(0), xy(1), position(2);
  out.velocity = clamp_norm<Scalar>(velocity + out.applied_accel * dt, v_max);
  return out;
}

// Level-flight power as a function of speed: fuselage drag, blade profile,
// and induced components. Isotropic in the flight direction.
template <class Scalar>
Scalar propulsion_power(Scalar speed, const RotorParams<Scalar>& p) {
  const Scalar v2 = speed * speed;
  const Scalar v3 = v2 * speed;
  const Scalar drag = Scalar(0.5) * p.fuselage_drag_ratio * p.air_density *
                      p.rotor_solidity * p.disc_area * v3;
  const Scalar vprof = p.profile_speed_exponent == 2 ? v2 : v3;
  const Scalar profile =
      p.blade_power *
      (Scalar(1) + Scalar(3) * vprof / (p.tip_speed * p.tip_speed));
  const Scalar v0_2 = p.mean_rotor_velocity * p.mean_rotor_velocity;
  const Scalar induced =
      p.induced_power * (std::sqrt(Scalar(1) + v2 * v2 / (Scalar(4) * v0_2 * v0_2)) -
                         v2 / (Scalar(2) * v0_2));
  return drag + profile + induced;
}

template <class Scalar>
Scalar propulsion_energy(const Vec2<Scalar>& velocity, Scalar dt,
                         const RotorParams<Scalar>& p) {
  return propulsion_power(velocity.norm(), p) * dt;
}

}  // namespace flexedge::physics
