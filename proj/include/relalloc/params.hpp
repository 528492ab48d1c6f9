#pragma once

// Closed-form latency, energy and reliability parameters for single task
// placements and for data transfers between devices.

#include "relalloc/model.hpp"

namespace relalloc {

enum class RouteKind { SameDevice, Direct, Relayed };

struct Route {
  RouteKind kind = RouteKind::SameDevice;
  DeviceIndex from = 0;
  DeviceIndex to = 0;
  DeviceIndex via = 0;  // meaningful only for Relayed
};

enum class ExecMode { Single = 1, Dual = 2, Triple = 3 };

const char* to_string(ExecMode mode);

/// Resolves how data travels from k to l. Throws if neither a channel nor a
/// relay connects them.
Route route(const Topology& topo, DeviceIndex k, DeviceIndex l);

/// Seconds to move `bits` along `r`.
double comm_latency(double bits, const Route& r, const Topology& topo);

/// Joules spent by all devices on the path to move `bits` along `r`.
double comm_energy(double bits, const Route& r, const Topology& topo);

/// Joules the sending endpoint spends (first leg transmit).
double send_energy(double bits, const Route& r, const Topology& topo);
/// Joules the receiving endpoint spends (last leg receive).
double receive_energy(double bits, const Route& r, const Topology& topo);
/// Joules the relay device spends forwarding; zero unless relayed.
double relay_energy(double bits, const Route& r, const Topology& topo);

inline double comp_energy(double seconds, double watts) { return seconds * watts; }

/// Left-closed thresholds: V == VT_DE selects Dual, V == VT_TE selects Triple.
ExecMode exec_mode(double vulnerability, const Thresholds& t);
ExecMode exec_mode(double vulnerability, const CriticalityPolicy& policy);

inline double reliability(double vulnerability) { return 1.0 - vulnerability; }

}  // namespace relalloc
