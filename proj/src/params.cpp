#include "relalloc/params.hpp"

#include <fmt/format.h>

namespace relalloc {

const char* to_string(ExecMode mode) {
  switch (mode) {
    case ExecMode::Single: return "SE";
    case ExecMode::Dual: return "DE";
    case ExecMode::Triple: return "TE";
  }
  return "?";
}

Route route(const Topology& topo, DeviceIndex k, DeviceIndex l) {
  if (k == l) return {RouteKind::SameDevice, k, l, k};
  if (topo.channel(k, l)) return {RouteKind::Direct, k, l, k};
  if (auto o = topo.relay(k, l)) return {RouteKind::Relayed, k, l, *o};
  throw Error(fmt::format("no route from {} to {}", topo.device(k).id, topo.device(l).id));
}

namespace {

const Channel& leg(const Topology& topo, DeviceIndex a, DeviceIndex b) {
  const Channel* ch = topo.channel(a, b);
  if (!ch) throw Error(fmt::format("missing channel {}->{}", topo.device(a).id, topo.device(b).id));
  return *ch;
}

}  // namespace

double comm_latency(double bits, const Route& r, const Topology& topo) {
  switch (r.kind) {
    case RouteKind::SameDevice: return 0.0;
    case RouteKind::Direct: return bits / leg(topo, r.from, r.to).bandwidth;
    case RouteKind::Relayed:
      return bits * (1.0 / leg(topo, r.from, r.via).bandwidth +
                     1.0 / leg(topo, r.via, r.to).bandwidth);
  }
  return 0.0;
}

double comm_energy(double bits, const Route& r, const Topology& topo) {
  switch (r.kind) {
    case RouteKind::SameDevice: return 0.0;
    case RouteKind::Direct: {
      const auto& c = leg(topo, r.from, r.to);
      return bits * (c.tx_energy + c.rx_energy);
    }
    case RouteKind::Relayed: {
      const auto& a = leg(topo, r.from, r.via);
      const auto& b = leg(topo, r.via, r.to);
      return bits * (a.tx_energy + a.rx_energy + b.tx_energy + b.rx_energy);
    }
  }
  return 0.0;
}

double send_energy(double bits, const Route& r, const Topology& topo) {
  switch (r.kind) {
    case RouteKind::SameDevice: return 0.0;
    case RouteKind::Direct: return bits * leg(topo, r.from, r.to).tx_energy;
    case RouteKind::Relayed: return bits * leg(topo, r.from, r.via).tx_energy;
  }
  return 0.0;
}

double receive_energy(double bits, const Route& r, const Topology& topo) {
  switch (r.kind) {
    case RouteKind::SameDevice: return 0.0;
    case RouteKind::Direct: return bits * leg(topo, r.from, r.to).rx_energy;
    case RouteKind::Relayed: return bits * leg(topo, r.via, r.to).rx_energy;
  }
  return 0.0;
}

double relay_energy(double bits, const Route& r, const Topology& topo) {
  if (r.kind != RouteKind::Relayed) return 0.0;
  return bits * (leg(topo, r.from, r.via).rx_energy + leg(topo, r.via, r.to).tx_energy);
}

ExecMode exec_mode(double vulnerability, const Thresholds& t) {
  if (vulnerability < t.dual) return ExecMode::Single;
  if (vulnerability < t.triple) return ExecMode::Dual;
  return ExecMode::Triple;
}

ExecMode exec_mode(double vulnerability, const CriticalityPolicy& policy) {
  return exec_mode(vulnerability, thresholds(policy));
}

}  // namespace relalloc
