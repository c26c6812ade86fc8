#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "taperfold/analysis.hpp"
#include "taperfold/mesh.hpp"
#include "taperfold/solver.hpp"

namespace taperfold {

enum class Scope { Panel, Module };

struct ModelConfig {
    GeometryBranch branch = GeometryBranch::Exact;
    PatternRule pattern_rule = PatternRule::PerpendicularFoot;
    double c_EA = 1.0;
    double w_c = 2.8;
    double module_radius = 30.0;
    Scope scope = Scope::Panel;
    StrainMeasure strain_measure = StrainMeasure::Engineering;
};

struct AnalysisConfig {
    double baseline_strain = 0.25;
    double band = 0.05;
    double fit_window_deg = 3.0;
};

struct OutputConfig {
    std::string dir = "out";
    std::set<std::string> formats = {"csv", "json"};
};

// A fully validated run description: panel parameters, model options,
// load case, solver policy, post-processing and output selection.
struct RunConfig {
    PanelParams panel;
    ModelConfig model;
    LoadCase load;
    AnalysisConfig analysis;
    OutputConfig output;
    std::optional<std::string> preset;

    GeometryOptions geometry_options() const {
        return GeometryOptions{model.branch, model.pattern_rule};
    }
    MeshOptions mesh_options() const { return MeshOptions{model.c_EA, model.w_c}; }
    MechanicsOptions mechanics_options() const {
        MechanicsOptions m;
        m.strain = model.strain_measure;
        return m;
    }
    void validate() const;
};

std::vector<std::string> preset_names();
bool is_preset(const std::string& name);

// Overwrites the panel/material/scope parts of the config with the named
// preset; later config keys still override. Throws ValidationError for an
// unknown name.
void apply_preset(RunConfig& cfg, const std::string& name);
RunConfig config_from_preset(const std::string& name);

// Flat `key = value` text with [section] headers and # comments. Unknown
// keys are rejected (ValidationError); malformed text raises ParseError
// with line and column.
RunConfig parse_config(const std::string& text);
void parse_config_into(RunConfig& cfg, const std::string& text);

// Canonical config text for the given config (re-parsable; used by the
// run manifest).
std::string render_config(const RunConfig& cfg);

struct FamilyPreset {
    std::string name;
    std::string parameter;
    std::vector<std::string> labels;
    std::vector<double> values;
};

// Sweep families over the bundled presets: "dist" (M4-M6), "alpha"
// (M7-M11), "tc" (M12-M16), "scale" (M17-M22).
FamilyPreset family_presets(const std::string& family);

}  // namespace taperfold
