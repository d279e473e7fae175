#pragma once

#include <cstdint>
#include <vector>

namespace coopmc {

// Coordinates and radii are in micrometres throughout; the channel layer
// converts to SI at its boundary.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  bool operator==(const Vec3&) const = default;
};

double distance(const Vec3& a, const Vec3& b);

struct SphericalObserver {
  Vec3 center;
  double radius = 0.0;

  double volume_um3() const;
};

// Point transmitter, K passive spherical receivers, one passive spherical
// fusion centre. Immutable after construction; share freely across workers.
struct Topology {
  Vec3 tx;
  std::vector<SphericalObserver> receivers;
  SphericalObserver fc;

  std::size_t num_receivers() const { return receivers.size(); }
  double tx_rx_distance(std::size_t k) const;
  double rx_fc_distance(std::size_t k) const;

  // Throws std::invalid_argument when a receiver is missing, a radius is not
  // positive, or a receiver centre coincides with the TX or FC centre.
  void validate() const;
};

// True when all TX-RX distances agree within rel_tol and all RX-FC distances
// agree within rel_tol. A single receiver is vacuously symmetric.
bool is_symmetric(const Topology& topo, double rel_tol = 1e-9);

// Ring layout: TX at the origin, FC at (2, 0, 0) um, k receivers (1..6) placed
// 0.6 um from the FC centre in the x = 2 plane.
Topology build_symmetric_ring(int k, double rx_radius_um = 0.225, double fc_radius_um = 0.225);

// Three-receiver layout with two fixed receivers and a third one moved along
// the segment from its ring position toward the TX. case_index 1 is the ring
// position; 2..5 step progressively closer to the TX.
Topology build_asymmetric_line(int case_index, double rx_radius_um = 0.225,
                               double fc_radius_um = 0.225);

std::uint64_t topology_hash(const Topology& topo);

}  // namespace coopmc
