#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "taperfold/analysis.hpp"
#include "taperfold/config.hpp"

namespace taperfold {

inline constexpr const char* kToolName = "taperfold";
inline constexpr const char* kToolVersion = "0.1.0";

// Equilibrium-path CSV: header
//   strain,reaction_force_N,iterations,converged,flagged      (compression)
//   twist_deg,torque_Nmm,iterations,converged,flagged         (torsion)
// one row per sample, full round-trip precision, LF line endings.
void export_curve_csv(const EquilibriumPath& path, const std::filesystem::path& dest);
EquilibriumPath import_curve_csv(const std::filesystem::path& src);

// Developed crease pattern as SVG in mm user units: boundary solid black,
// mountain creases solid red, valley creases dashed blue (assignment from
// the sign of rest dihedral - pi; flat creases are drawn gray).
void export_crease_svg(const PanelGeometry& geom, const std::filesystem::path& dest);

// Triangle mesh as OBJ (mm), one named object per panel, deterministic
// vertex ordering.
void export_mesh_obj(const BarHingeModel& model, const std::filesystem::path& dest);

void write_geometry_json(const PanelGeometry& geom, const SectorAngles& angles,
                         const FoldabilityReport& fold, const std::filesystem::path& dest);
void write_cf_report_json(const ConstantForceReport& report, const std::filesystem::path& dest);
void write_sweep_report_json(const SweepReport& report, const std::filesystem::path& dest);
void write_mesh_summary_json(const BarHingeModel& model, const std::filesystem::path& dest);
void write_path_report_json(const EquilibriumPath& path, const std::filesystem::path& dest);

std::uint64_t fnv1a64(const std::string& text);

// Run manifest (config echo, tool version, input hash, output list);
// deliberately timestamp-free so identical runs produce identical bytes.
void write_manifest(const RunConfig& cfg, const std::string& command,
                    const std::vector<std::string>& outputs,
                    const std::filesystem::path& dir);

}  // namespace taperfold
