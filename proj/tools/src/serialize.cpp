#include "asyncpr_cli/serialize.hpp"

#include <cinttypes>
#include <cstdio>

namespace asyncpr::cli {

using nlohmann::json;

namespace {

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

}  // namespace

json to_json(const DenseMatrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

json to_json(const BlockVector& x) { return x.blocks(); }

json to_json(const LinearIVP& ivp) {
  return {{"label", ivp.label},
          {"dim", ivp.dim()},
          {"A", to_json(ivp.generator)},
          {"c", ivp.source},
          {"u0", ivp.initial},
          {"final_time", ivp.final_time}};
}

json to_json(const TimeDecomposition& dec) {
  return {{"p", dec.windows},
          {"coarse_dt", dec.coarse_dt},
          {"fine_dt", dec.fine_dt},
          {"coarse_steps", dec.coarse_steps},
          {"fine_steps", dec.fine_steps()},
          {"final_time", dec.final_time()}};
}

json to_json(const ContractionReport& r) {
  return {{"norm_G", r.norm_G},   {"norm_FmG", r.norm_FmG},       {"theta", r.theta},
          {"alpha", r.alpha},     {"alpha_tilde", r.alpha_tilde}, {"p", r.p},
          {"norm", std::string(to_string(r.norm_kind))}};
}

json to_json(const CostParams& c) {
  return {{"p", c.p},         {"C_F", c.C_F}, {"C_G", c.C_G},
          {"C_bar", c.C_bar}, {"k", c.k},     {"kappa", c.kappa}};
}

json to_json(const SpeedupReport& s) {
  return {{"bound", s.bound}, {"achieved", s.achieved}, {"within_bound", s.within_bound}};
}

json to_json(const UpdateRecord& ev) {
  json reads = json::array();
  for (const ReadRecord& r : ev.reads) {
    reads.push_back({{"source", r.source},
                     {"slot", r.slot},
                     {"version", r.version},
                     {"source_version", r.source_version},
                     {"carried", r.carried}});
  }
  return {{"k", ev.k_global}, {"component", ev.component}, {"reads", std::move(reads)},
          {"frozen", ev.frozen}, {"delta", ev.delta}, {"digest", hex(ev.digest)}};
}

json to_json(const SyncTrace& t, bool with_iterates) {
  json out = {{"k_final", t.k_final},
              {"stop_reason", std::string(to_string(t.stop_reason))},
              {"deltas", t.deltas}};
  if (with_iterates) {
    json its = json::array();
    for (const auto& it : t.iterates) its.push_back(to_json(it));
    out["iterates"] = std::move(its);
  }
  return out;
}

void write_jsonl(std::ostream& out, const SyncTrace& t) {
  out << json{{"kind", "sync"},
              {"k_final", t.k_final},
              {"stop_reason", std::string(to_string(t.stop_reason))}}
             .dump()
      << '\n';
  for (std::size_t k = 0; k < t.iterates.size(); ++k) {
    json line = {{"k", k}, {"state", to_json(t.iterates[k])}};
    if (k > 0) line["delta"] = t.deltas[k - 1];
    out << line.dump() << '\n';
  }
}

void write_jsonl(std::ostream& out, const AsyncTrace& t) {
  out << json{{"kind", "async"},
              {"active", t.active},
              {"initial", to_json(t.initial)},
              {"stop_event", t.stop_event},
              {"stop_cause", std::string(to_string(t.stop_cause))},
              {"per_component_counts", t.per_component_counts}}
             .dump()
      << '\n';
  for (const UpdateRecord& ev : t.events) out << to_json(ev).dump() << '\n';
}

}  // namespace asyncpr::cli
