#pragma once

#include <ostream>

#include <nlohmann/json.hpp>

#include "asyncpr/analysis.hpp"
#include "asyncpr/async_engine.hpp"
#include "asyncpr/model.hpp"
#include "asyncpr/parareal.hpp"

namespace asyncpr::cli {

nlohmann::json to_json(const DenseMatrix& m);
nlohmann::json to_json(const BlockVector& x);
nlohmann::json to_json(const LinearIVP& ivp);
nlohmann::json to_json(const TimeDecomposition& dec);
nlohmann::json to_json(const ContractionReport& report);
nlohmann::json to_json(const CostParams& cost);
nlohmann::json to_json(const SpeedupReport& speedup);
nlohmann::json to_json(const UpdateRecord& event);
/// Iterates are large; they are included only on request.
nlohmann::json to_json(const SyncTrace& trace, bool with_iterates = false);

/// One JSON object per line: a header, then one line per sweep or event.
void write_jsonl(std::ostream& out, const SyncTrace& trace);
void write_jsonl(std::ostream& out, const AsyncTrace& trace);

}  // namespace asyncpr::cli
