#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "gridwave/defect_zoo.hpp"
#include "gridwave/field.hpp"
#include "gridwave/grid.hpp"

namespace gridwave {

inline constexpr const char* kSchema = "gridwave/1";

nlohmann::json edge_to_json(const EdgeId& e);
EdgeId edge_from_json(const nlohmann::json& j);
std::vector<EdgeId> edges_from_json(const nlohmann::json& j);

nlohmann::json window_to_json(const Window& w);
Window window_from_json(const nlohmann::json& j);

nlohmann::json region_to_json(const Region& r);
Region region_from_json(const nlohmann::json& j);

// Grid-spec file: {"window":{...}, "removed":[["H",i,j],...], "generator":{"kind":..., ...params}}.
nlohmann::json grid_to_json(const DefectedGrid& g, const GeneratorSpec* gen = nullptr);
DefectedGrid grid_from_json(const nlohmann::json& j);

// {"mesh_m": m, "edges": [{"edge": ["H", i, j], "samples": [...]}, ...]}, samples from low to high endpoint.
nlohmann::json field_to_json(const Field& u);

nlohmann::json defect_report(const std::vector<Defect>& defects);

// Serializes with 17 significant digits so doubles round-trip.
std::string dump_json(const nlohmann::json& j);

}  // namespace gridwave
