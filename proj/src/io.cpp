#include "gridwave/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace gridwave {

nlohmann::json edge_to_json(const EdgeId& e) {
    return nlohmann::json::array({e.o == Orient::H ? "H" : "V", e.i, e.j});
}

EdgeId edge_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 3 || !j[0].is_string())
        throw ValidationError("edge must be [\"H\"|\"V\", i, j], got " + j.dump());
    std::string o = j[0].get<std::string>();
    if (o != "H" && o != "V") throw ValidationError("edge orientation must be H or V, got " + o);
    return {o == "H" ? Orient::H : Orient::V, j[1].get<int>(), j[2].get<int>()};
}

std::vector<EdgeId> edges_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw ValidationError("edge list must be an array");
    std::vector<EdgeId> out;
    for (const auto& e : j) out.push_back(edge_from_json(e));
    return out;
}

nlohmann::json window_to_json(const Window& w) {
    return {{"xmin", w.xmin}, {"xmax", w.xmax}, {"ymin", w.ymin}, {"ymax", w.ymax}};
}

Window window_from_json(const nlohmann::json& j) {
    if (j.is_string()) return Window::parse(j.get<std::string>());
    for (const char* k : {"xmin", "xmax", "ymin", "ymax"})
        if (!j.contains(k)) throw ValidationError(std::string("window is missing '") + k + "'");
    Window w{j["xmin"].get<int>(), j["xmax"].get<int>(), j["ymin"].get<int>(), j["ymax"].get<int>()};
    if (w.xmin >= w.xmax || w.ymin >= w.ymax) throw ValidationError("empty window " + w.str());
    return w;
}

nlohmann::json region_to_json(const Region& r) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [e, c] : r.cov) {
        auto item = edge_to_json(e);
        item.push_back(c == Cover::Full ? "full" : (c == Cover::HalfLow ? "half-low" : "half-high"));
        out.push_back(item);
    }
    return out;
}

Region region_from_json(const nlohmann::json& j) {
    Region r;
    for (const auto& item : j) {
        EdgeId e = edge_from_json(nlohmann::json::array({item[0], item[1], item[2]}));
        Cover c = Cover::Full;
        if (item.size() > 3) {
            std::string s = item[3].get<std::string>();
            if (s == "half-low") c = Cover::HalfLow;
            else if (s == "half-high") c = Cover::HalfHigh;
            else if (s != "full") throw ValidationError("unknown coverage '" + s + "'");
        }
        r.add(e, c);
    }
    return r;
}

nlohmann::json grid_to_json(const DefectedGrid& g, const GeneratorSpec* gen) {
    nlohmann::json j;
    j["schema"] = kSchema;
    j["window"] = window_to_json(g.window());
    nlohmann::json rem = nlohmann::json::array();
    for (const auto& e : g.removed_edges()) rem.push_back(edge_to_json(e));
    j["removed"] = rem;
    if (gen) {
        nlohmann::json gj = gen->params;
        gj["kind"] = gen->kind;
        j["generator"] = gj;
    }
    return j;
}

DefectedGrid grid_from_json(const nlohmann::json& j) {
    if (!j.contains("window")) throw ValidationError("grid spec needs a 'window'");
    Window w = window_from_json(j["window"]);
    if (j.contains("generator") && !j["generator"].is_null()) {
        nlohmann::json params = j["generator"];
        if (!params.contains("kind")) throw ValidationError("generator needs a 'kind'");
        GeneratorSpec spec{params["kind"].get<std::string>(), params};
        spec.params.erase("kind");
        RemovalRule rule = make_rule(spec);
        std::vector<EdgeId> rem;
        if (j.contains("removed")) rem = edges_from_json(j["removed"]);
        DefectedGrid base = DefectedGrid::from_rule(w, rule, false);
        for (const auto& e : base.removed_edges()) rem.push_back(e);
        std::sort(rem.begin(), rem.end());
        rem.erase(std::unique(rem.begin(), rem.end()), rem.end());
        return DefectedGrid(w, rem, rule);
    }
    std::vector<EdgeId> rem;
    if (j.contains("removed")) rem = edges_from_json(j["removed"]);
    return DefectedGrid(w, rem);
}

nlohmann::json field_to_json(const Field& u) {
    nlohmann::json edges = nlohmann::json::array();
    for (int e = 0; e < u.mesh().num_edges(); ++e)
        edges.push_back({{"edge", edge_to_json(u.mesh().edges()[static_cast<std::size_t>(e)])}, {"samples", u.edge_samples(e)}});
    return {{"mesh_m", u.mesh().m()}, {"edges", edges}};
}

nlohmann::json defect_report(const std::vector<Defect>& defects) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& d : defects)
        out.push_back({{"edge_count", d.edges.size()}, {"boundary_edge_count", d.boundary.size()}, {"truncated", d.truncated}});
    return out;
}

namespace {

void write_value(std::ostringstream& os, const nlohmann::json& j, int indent, int level) {
    auto pad = [&](int l) { os << std::string(static_cast<std::size_t>(indent * l), ' '); };
    switch (j.type()) {
        case nlohmann::json::value_t::object: {
            if (j.empty()) {
                os << "{}";
                return;
            }
            os << "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) os << ",\n";
                first = false;
                pad(level + 1);
                os << nlohmann::json(it.key()).dump() << ": ";
                write_value(os, it.value(), indent, level + 1);
            }
            os << "\n";
            pad(level);
            os << "}";
            return;
        }
        case nlohmann::json::value_t::array: {
            bool flat = true;
            for (const auto& v : j) flat = flat && !v.is_object() && !(v.is_array() && v.size() > 4);
            if (j.empty()) {
                os << "[]";
                return;
            }
            if (flat) {
                os << "[";
                for (std::size_t k = 0; k < j.size(); ++k) {
                    if (k) os << ", ";
                    write_value(os, j[k], indent, level + 1);
                }
                os << "]";
                return;
            }
            os << "[\n";
            for (std::size_t k = 0; k < j.size(); ++k) {
                if (k) os << ",\n";
                pad(level + 1);
                write_value(os, j[k], indent, level + 1);
            }
            os << "\n";
            pad(level);
            os << "]";
            return;
        }
        case nlohmann::json::value_t::number_float: {
            double v = j.get<double>();
            if (!std::isfinite(v)) {
                os << "null";
                return;
            }
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            std::string s(buf);
            if (s.find_first_of(".eE") == std::string::npos) s += ".0";
            os << s;
            return;
        }
        default:
            os << j.dump();
    }
}

}  // namespace

std::string dump_json(const nlohmann::json& j) {
    std::ostringstream os;
    write_value(os, j, 2, 0);
    os << "\n";
    return os.str();
}

}  // namespace gridwave
