#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "nmembrane/analysis.hpp"
#include "nmembrane/game.hpp"
#include "nmembrane/solver.hpp"

namespace nmembrane {

/// "%.17g"; non-finite values print as null in JSON and nan/inf in CSV.
std::string format_double(double v);

/// JSON text with every float printed to 17 significant digits.
std::string dump_json(const nlohmann::json& j, int indent = 2);

/// Writes `text` atomically (temporary file + rename).
void write_text(const std::filesystem::path& path, const std::string& text);

/// node,x,y,u_1..u_N for every active node.
std::string field_csv(const GridSolution& sol);
std::string weiss_csv(const WeissProfile& profile);
std::string rate_csv(const RateFit& fit);
std::string curve_csv(const FreeBoundaryCurve& curve);

nlohmann::json to_json(const SolveStats& stats);
nlohmann::json to_json(const ResidualReport& report);
nlohmann::json to_json(const MaxPrincipleVerdict& verdict);
nlohmann::json to_json(const GrowthReport& report);
nlohmann::json to_json(const WeissProfile& profile);
nlohmann::json to_json(const MonotonicityVerdict& verdict);
nlohmann::json to_json(const FitResult& fit);
nlohmann::json to_json(const RateFit& fit);
nlohmann::json to_json(const RegularPointReport& report);
nlohmann::json to_json(const BranchVector& b);
nlohmann::json to_json(const MonteCarloResult& mc);
nlohmann::json grid_to_json(const Grid& grid);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace nmembrane
