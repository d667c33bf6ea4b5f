#ifndef TANGLE_IO_HPP
#define TANGLE_IO_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "tangle/fold.hpp"
#include "tangle/graph.hpp"
#include "tangle/multihump.hpp"
#include "tangle/orbit.hpp"

namespace tangle {

using json = nlohmann::json;

// Shortest representation that round-trips, '.' as decimal separator whatever the locale.
std::string format_double(double v);

std::uint64_t fnv1a(const std::string& data);
std::string hex64(std::uint64_t v);

// {lambda, n_minus, n_plus, dim, points (row-major by index n), bc, residual}
json orbit_to_json(const OrbitSegment& o);
OrbitSegment orbit_from_json(const json& j);

json fit_to_json(const FitReport& r);
// {lambda_bar, c_lambda, c_x, ratio, fit_slope, fit_r2, sv_gap, ...}; fit_slope and
// fit_r2 come from `fit`.
json tangency_to_json(const TangencyData& d, const FitReport& fit);

json cycle_to_json(const LRCycle& c, int n);
LRCycle cycle_from_json(const json& j);
json partition_to_json(const CyclePartition& p, int n);

json empirical_cycle_to_json(const EmpiricalCycle& c);
EmpiricalCycle empirical_cycle_from_json(const json& j);

// "n,cycle_length,count" rows
std::string table_csv(int n, const std::map<int, int>& table);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const json& j);
std::string read_text(const std::filesystem::path& path);
json read_json(const std::filesystem::path& path);

}  // namespace tangle

#endif
