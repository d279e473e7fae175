#include "coopmc/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "coopmc/hash.hpp"

namespace coopmc {

double distance(const Vec3& a, const Vec3& b) {
  return std::hypot(a.x - b.x, a.y - b.y, a.z - b.z);
}

double SphericalObserver::volume_um3() const {
  return (4.0 / 3.0) * std::numbers::pi * radius * radius * radius;
}

double Topology::tx_rx_distance(std::size_t k) const {
  return distance(receivers.at(k).center, tx);
}

double Topology::rx_fc_distance(std::size_t k) const {
  return distance(fc.center, receivers.at(k).center);
}

void Topology::validate() const {
  if (receivers.empty()) throw std::invalid_argument("topology: needs at least one receiver");
  if (!(fc.radius > 0.0)) throw std::invalid_argument("topology: fc radius must be positive");
  for (std::size_t k = 0; k < receivers.size(); ++k) {
    if (!(receivers[k].radius > 0.0))
      throw std::invalid_argument("topology: receiver radius must be positive");
    if (!(tx_rx_distance(k) > 0.0))
      throw std::invalid_argument("topology: receiver centre coincides with TX");
    if (!(rx_fc_distance(k) > 0.0))
      throw std::invalid_argument("topology: receiver centre coincides with FC");
  }
  for (const auto& rx : receivers) {
    if (!std::isfinite(rx.center.x) || !std::isfinite(rx.center.y) || !std::isfinite(rx.center.z))
      throw std::invalid_argument("topology: non-finite receiver coordinate");
  }
}

bool is_symmetric(const Topology& topo, double rel_tol) {
  if (rel_tol < 0.0) throw std::invalid_argument("is_symmetric: tol must be >= 0");
  if (topo.receivers.size() <= 1) return true;
  const double d_tx0 = topo.tx_rx_distance(0);
  const double d_fc0 = topo.rx_fc_distance(0);
  for (std::size_t k = 1; k < topo.receivers.size(); ++k) {
    if (std::abs(topo.tx_rx_distance(k) - d_tx0) > rel_tol * std::max(d_tx0, 1.0)) return false;
    if (std::abs(topo.rx_fc_distance(k) - d_fc0) > rel_tol * std::max(d_fc0, 1.0)) return false;
  }
  return true;
}

namespace {

// 0.6 * sin(60 deg); rounding this to four decimals (0.5196) would break
// the exact ring symmetry at the 1e-6 level.
const double kRingZ = std::sqrt(0.27);

const Vec3 kRingCenters[6] = {
    {2.0, 0.6, 0.0},  {2.0, -0.3, kRingZ}, {2.0, -0.3, -kRingZ},
    {2.0, -0.6, 0.0}, {2.0, 0.3, kRingZ},  {2.0, 0.3, -kRingZ},
};

// Third-receiver positions for the line sweep. Case 1 is the ring position
// (2, 0.6, 0), the symmetric starting point at distance 2.088 um; the rest
// step along the line toward the TX.
constexpr Vec3 kLineCase[5] = {
    {2.0, 0.6, 0.0}, {1.6, 0.48, 0.0}, {1.2, 0.36, 0.0}, {0.8, 0.24, 0.0}, {0.4, 0.12, 0.0},
};

}  // namespace

Topology build_symmetric_ring(int k, double rx_radius_um, double fc_radius_um) {
  if (k < 1 || k > 6) throw std::out_of_range("build_symmetric_ring: k must be in 1..6");
  Topology topo;
  topo.tx = {0.0, 0.0, 0.0};
  topo.fc = {{2.0, 0.0, 0.0}, fc_radius_um};
  topo.receivers.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) topo.receivers.push_back({kRingCenters[i], rx_radius_um});
  topo.validate();
  return topo;
}

Topology build_asymmetric_line(int case_index, double rx_radius_um, double fc_radius_um) {
  if (case_index < 1 || case_index > 5)
    throw std::out_of_range("build_asymmetric_line: case_index must be in 1..5");
  Topology topo;
  topo.tx = {0.0, 0.0, 0.0};
  topo.fc = {{2.0, 0.0, 0.0}, fc_radius_um};
  topo.receivers = {
      {{2.0, 0.0, 0.6}, rx_radius_um},
      {{2.0, 0.0, -0.6}, rx_radius_um},
      {kLineCase[case_index - 1], rx_radius_um},
  };
  topo.validate();
  return topo;
}

std::uint64_t topology_hash(const Topology& topo) {
  Fnv1a64 h;
  h.update(topo.tx.x);
  h.update(topo.tx.y);
  h.update(topo.tx.z);
  h.update(static_cast<std::uint64_t>(topo.receivers.size()));
  for (const auto& rx : topo.receivers) {
    h.update(rx.center.x);
    h.update(rx.center.y);
    h.update(rx.center.z);
    h.update(rx.radius);
  }
  h.update(topo.fc.center.x);
  h.update(topo.fc.center.y);
  h.update(topo.fc.center.z);
  h.update(topo.fc.radius);
  return h.digest();
}

}  // namespace coopmc
