#pragma once

#include <string>
#include <vector>

#include "vpd/analysis.hpp"
#include "vpd/geometry.hpp"
#include "vpd/solver.hpp"

namespace vpd {

/// Parse a run configuration from JSON text. Keys: epsilon, kappa, r and/or W,
/// profile {kind, p, table_path | s, f}, grid {n1, n2, window}, domain, rho_policy
/// {kind, rho, rho_init, growth, cap}, tolerances {mass, fixed_point}, max_iter,
/// symmetrize, accelerate. Relative table paths resolve against `base_dir`.
/// Throws ConfigError on malformed input.
SolverConfig parse_config(const std::string& json_text, const std::string& base_dir = ".");
SolverConfig load_config(const std::string& path);

/// Canonical JSON (tabulated profiles are written inline), readable by parse_config.
std::string config_to_json(const SolverConfig& config);

/// CSV with header x1,x2,value and one row per cell in (i, j) order.
void write_field_csv(const std::string& path, const ScalarField& field);
/// Reads a field written by write_field_csv; throws std::runtime_error when the cell
/// centres do not match `grid`.
ScalarField read_field_csv(const std::string& path, const GridSpec& grid, FieldRole role = FieldRole::generic);

void write_full_plane_csv(const std::string& path, const FullPlaneField& field);
void write_velocity_csv(const std::string& path, const VectorField& v);

/// Summary JSON of a solve, including grid metadata.
std::string bundle_to_json(const SolutionBundle& bundle, const SolverConfig& config);

void write_sweep_csv(const std::string& path, const std::vector<SweepRecord>& records);
std::string fit_to_json(Observable observable, const FitResult& fit, double kappa);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

/// %.17g formatting, shared by all writers.
std::string format_double(double v);

}  // namespace vpd
