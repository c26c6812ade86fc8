#include "taperfold/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>

namespace taperfold {

namespace {

struct PresetRow {
    double dist, alpha, t_c, n;
};

// Bundled panel configurations M1-M22 (shared dimensions l1 = 50,
// l2 = 45, H0 = 43, t_f = 1.5, TPU95A).
const std::map<std::string, PresetRow>& table_presets() {
    static const std::map<std::string, PresetRow> table = {
        {"M1", {0.0, 0.0, 0.54, 1.0}},   {"M2", {1.0, 0.0, 0.54, 1.0}},
        {"M3", {1.5, 0.0, 0.54, 1.0}},   {"M4", {2.0, 0.0, 0.54, 1.0}},
        {"M5", {3.0, 0.0, 0.54, 1.0}},   {"M6", {4.0, 0.0, 0.54, 1.0}},
        {"M7", {4.0, 0.0, 0.54, 1.0}},   {"M8", {4.0, 4.0, 0.54, 1.0}},
        {"M9", {4.0, 8.0, 0.54, 1.0}},   {"M10", {4.0, 12.0, 0.54, 1.0}},
        {"M11", {4.0, 16.0, 0.54, 1.0}}, {"M12", {4.0, 6.0, 0.54, 1.0}},
        {"M13", {4.0, 6.0, 0.68, 1.0}},  {"M14", {4.0, 6.0, 0.81, 1.0}},
        {"M15", {4.0, 6.0, 0.95, 1.0}},  {"M16", {4.0, 6.0, 1.08, 1.0}},
        {"M17", {2.0, 10.0, 0.54, 1.0}}, {"M18", {2.0, 10.0, 0.54, 0.84}},
        {"M19", {2.0, 10.0, 0.54, 0.71}},{"M20", {2.0, 10.0, 0.54, 0.60}},
        {"M21", {2.0, 10.0, 0.54, 0.51}},{"M22", {2.0, 10.0, 0.54, 0.43}},
    };
    return table;
}

void apply_fabricated_dims(RunConfig& cfg) {
    cfg.panel.l1 = 37.5;
    cfg.panel.l2 = 33.75;
    cfg.panel.H0 = 32.5;
    cfg.panel.t_f = 1.5;
    cfg.panel.t_c = 0.54;
    cfg.panel.n = 1.0;
    cfg.model.scope = Scope::Module;
    cfg.model.module_radius = 20.0;
}

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

}  // namespace

void RunConfig::validate() const {
    panel.validate();
    load.validate();
    if (!(model.c_EA > 0.0)) throw ValidationError("c_EA", "must be positive");
    if (!(model.w_c > 0.0)) throw ValidationError("w_c", "must be positive");
    if (model.scope == Scope::Module && !(model.module_radius > 0.0)) {
        throw ValidationError("module_radius", "must be positive for a module run");
    }
    if (!(analysis.band > 0.0 && analysis.band < 1.0))
        throw ValidationError("band", "must lie in (0, 1)");
    if (!(analysis.baseline_strain > 0.0 && analysis.baseline_strain < 1.0))
        throw ValidationError("baseline_strain", "must lie in (0, 1)");
    if (!(analysis.fit_window_deg > 0.0))
        throw ValidationError("fit_window_deg", "must be positive");
    if (output.dir.empty()) throw ValidationError("dir", "output directory must not be empty");
    for (const std::string& f : output.formats) {
        if (f != "csv" && f != "json" && f != "svg" && f != "obj") {
            throw ValidationError("formats", "unknown format '" + f + "'");
        }
    }
}

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (int i = 1; i <= 22; ++i) names.push_back("M" + std::to_string(i));
    names.push_back("Ma");
    names.push_back("Mb");
    names.push_back("Mc");
    return names;
}

bool is_preset(const std::string& name) {
    if (table_presets().count(name)) return true;
    return name == "Ma" || name == "Mb" || name == "Mc";
}

void apply_preset(RunConfig& cfg, const std::string& name) {
    cfg.panel = PanelParams{};  // table dimensions and TPU95A defaults
    if (auto it = table_presets().find(name); it != table_presets().end()) {
        cfg.panel.dist = it->second.dist;
        cfg.panel.alpha_deg = it->second.alpha;
        cfg.panel.t_c = it->second.t_c;
        cfg.panel.n = it->second.n;
        // The scaling study shrinks the whole mold, thicknesses included.
        cfg.panel.scale_thickness = (it->second.n != 1.0);
        cfg.preset = name;
        return;
    }
    if (name == "Ma") {
        apply_fabricated_dims(cfg);
        cfg.panel.dist = 2.25;
        cfg.panel.alpha_deg = 3.0;
    } else if (name == "Mb") {
        apply_fabricated_dims(cfg);
        cfg.panel.dist = 3.0;
        cfg.panel.alpha_deg = 4.0;
    } else if (name == "Mc") {
        apply_fabricated_dims(cfg);
        cfg.panel.dist = 4.5;
        cfg.panel.alpha_deg = 6.0;
        // Cast silicone build: the modulus is not part of the preset and
        // must be supplied in [material] before the model can be built.
        cfg.panel.material.reset();
    } else {
        throw ValidationError("preset", "unknown preset '" + name + "'");
    }
    cfg.preset = name;
}

RunConfig config_from_preset(const std::string& name) {
    RunConfig cfg;
    apply_preset(cfg, name);
    return cfg;
}

namespace {

class ConfigReader {
public:
    ConfigReader(RunConfig& cfg, const std::string& text) : cfg_(cfg), text_(text) {}

    void run() {
        std::istringstream in(text_);
        std::string raw;
        int lineno = 0;
        while (std::getline(in, raw)) {
            ++lineno;
            line_ = lineno;
            std::string line = raw;
            if (const size_t hash = line.find('#'); hash != std::string::npos) {
                line = line.substr(0, hash);
            }
            line = trim(line);
            if (line.empty()) continue;

            if (line.front() == '[') {
                if (line.back() != ']') {
                    throw ParseError(lineno, static_cast<int>(raw.find('[')) + 1,
                                     "unterminated section header");
                }
                section_ = trim(line.substr(1, line.size() - 2));
                if (section_ != "panel" && section_ != "material" && section_ != "model" &&
                    section_ != "load" && section_ != "solver" && section_ != "analysis" &&
                    section_ != "output") {
                    throw ValidationError(section_, "unknown config section");
                }
                continue;
            }

            const size_t eq = line.find('=');
            if (eq == std::string::npos) {
                throw ParseError(lineno, 1, "expected 'key = value'");
            }
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty()) throw ParseError(lineno, 1, "empty key");
            if (value.empty()) throw ParseError(lineno, static_cast<int>(eq) + 2, "empty value");
            dispatch(key, value);
        }
        finalize();
    }

private:
    double num(const std::string& v) const {
        char* end = nullptr;
        const double x = std::strtod(v.c_str(), &end);
        if (end == v.c_str() || *end != '\0') {
            throw ParseError(line_, 1, "'" + v + "' is not a number");
        }
        return x;
    }
    int integer(const std::string& v) const {
        const double x = num(v);
        if (x != std::floor(x)) throw ParseError(line_, 1, "'" + v + "' is not an integer");
        return static_cast<int>(x);
    }
    bool boolean(const std::string& v) const {
        if (v == "true") return true;
        if (v == "false") return false;
        throw ParseError(line_, 1, "expected 'true' or 'false'");
    }

    void dispatch(const std::string& key, const std::string& value) {
        if (section_.empty()) {
            if (key == "preset") {
                apply_preset(cfg_, value);
                return;
            }
            throw ValidationError(key, "unknown key outside any section");
        }
        if (section_ == "panel") return panel_key(key, value);
        if (section_ == "material") return material_key(key, value);
        if (section_ == "model") return model_key(key, value);
        if (section_ == "load") return load_key(key, value);
        if (section_ == "solver") return solver_key(key, value);
        if (section_ == "analysis") return analysis_key(key, value);
        if (section_ == "output") return output_key(key, value);
    }

    void panel_key(const std::string& k, const std::string& v) {
        if (k == "l1") cfg_.panel.l1 = num(v);
        else if (k == "l2") cfg_.panel.l2 = num(v);
        else if (k == "H0") cfg_.panel.H0 = num(v);
        else if (k == "t_f") cfg_.panel.t_f = num(v);
        else if (k == "t_c") cfg_.panel.t_c = num(v);
        else if (k == "dist") cfg_.panel.dist = num(v);
        else if (k == "alpha") cfg_.panel.alpha_deg = num(v);
        else if (k == "n") cfg_.panel.n = num(v);
        else if (k == "scale_thickness") cfg_.panel.scale_thickness = boolean(v);
        else throw ValidationError(k, "unknown key in [panel]");
    }

    void material_key(const std::string& k, const std::string& v) {
        if (k == "E") mat_E_ = num(v);
        else if (k == "nu") mat_nu_ = num(v);
        else if (k == "name") mat_name_ = v;
        else throw ValidationError(k, "unknown key in [material]");
    }

    void model_key(const std::string& k, const std::string& v) {
        if (k == "branch") {
            if (v == "exact") cfg_.model.branch = GeometryBranch::Exact;
            else if (v == "closed_form") cfg_.model.branch = GeometryBranch::ClosedForm;
            else throw ValidationError(k, "expected 'exact' or 'closed_form'");
        } else if (k == "pattern_rule") {
            if (v == "foot") cfg_.model.pattern_rule = PatternRule::PerpendicularFoot;
            else if (v == "midpoint") cfg_.model.pattern_rule = PatternRule::EdgeMidpoint;
            else throw ValidationError(k, "expected 'foot' or 'midpoint'");
        } else if (k == "c_EA") cfg_.model.c_EA = num(v);
        else if (k == "w_c") cfg_.model.w_c = num(v);
        else if (k == "module_radius") cfg_.model.module_radius = num(v);
        else if (k == "scope") {
            if (v == "panel") cfg_.model.scope = Scope::Panel;
            else if (v == "module") cfg_.model.scope = Scope::Module;
            else throw ValidationError(k, "expected 'panel' or 'module'");
        } else if (k == "strain_measure") {
            if (v == "engineering") cfg_.model.strain_measure = StrainMeasure::Engineering;
            else if (v == "green") cfg_.model.strain_measure = StrainMeasure::Green;
            else throw ValidationError(k, "expected 'engineering' or 'green'");
        } else throw ValidationError(k, "unknown key in [model]");
    }

    void load_key(const std::string& k, const std::string& v) {
        if (k == "kind") {
            if (v == "compression") cfg_.load.kind = LoadKind::Compression;
            else if (v == "torsion") cfg_.load.kind = LoadKind::Torsion;
            else throw ValidationError(k, "expected 'compression' or 'torsion'");
        } else if (k == "target_strain") cfg_.load.target_strain = num(v);
        else if (k == "twist_deg") cfg_.load.twist_deg = num(v);
        else if (k == "pre_strain") cfg_.load.pre_strain = num(v);
        else if (k == "preload_strain") cfg_.load.preload_strain = num(v);
        else if (k == "mode_index") cfg_.load.imperfection.mode_index = integer(v);
        else if (k == "xi") cfg_.load.imperfection.xi = num(v);
        else if (k == "mode_filter") {
            if (v == "fold") cfg_.load.imperfection.filter = ModeFilter::Fold;
            else if (v == "any") cfg_.load.imperfection.filter = ModeFilter::Any;
            else throw ValidationError(k, "expected 'fold' or 'any'");
        }
        else throw ValidationError(k, "unknown key in [load]");
    }

    void solver_key(const std::string& k, const std::string& v) {
        StepPolicy& s = cfg_.load.step;
        if (k == "initial_step") s.initial_step = num(v);
        else if (k == "min_step") s.min_step = num(v);
        else if (k == "max_step") s.max_step = num(v);
        else if (k == "max_steps") s.max_steps = integer(v);
        else if (k == "newton_rel_tol") s.newton_rel_tol = num(v);
        else if (k == "newton_abs_floor") s.newton_abs_floor = num(v);
        else if (k == "max_newton_iters") s.max_newton_iters = integer(v);
        else if (k == "enable_arc_length") s.enable_arc_length = boolean(v);
        else if (k == "record_states") s.record_states = boolean(v);
        else throw ValidationError(k, "unknown key in [solver]");
    }

    void analysis_key(const std::string& k, const std::string& v) {
        if (k == "baseline_strain") cfg_.analysis.baseline_strain = num(v);
        else if (k == "band") cfg_.analysis.band = num(v);
        else if (k == "fit_window_deg") cfg_.analysis.fit_window_deg = num(v);
        else throw ValidationError(k, "unknown key in [analysis]");
    }

    void output_key(const std::string& k, const std::string& v) {
        if (k == "dir") cfg_.output.dir = v;
        else if (k == "formats") {
            cfg_.output.formats.clear();
            std::istringstream ss(v);
            std::string item;
            while (std::getline(ss, item, ',')) {
                item = trim(item);
                if (!item.empty()) cfg_.output.formats.insert(item);
            }
        } else throw ValidationError(k, "unknown key in [output]");
    }

    void finalize() {
        if (mat_E_ || mat_nu_ || mat_name_) {
            MaterialSpec m = cfg_.panel.material.value_or(MaterialSpec{0.0, 0.49, "custom"});
            if (mat_E_) m.E = *mat_E_;
            if (mat_nu_) m.nu = *mat_nu_;
            if (mat_name_) m.name = *mat_name_;
            if (!(m.E > 0.0)) throw ValidationError("E", "material requires a positive modulus");
            cfg_.panel.material = m;
        }
        cfg_.validate();
    }

    RunConfig& cfg_;
    const std::string& text_;
    std::string section_;
    int line_ = 0;
    std::optional<double> mat_E_, mat_nu_;
    std::optional<std::string> mat_name_;
};

}  // namespace

void parse_config_into(RunConfig& cfg, const std::string& text) {
    ConfigReader(cfg, text).run();
}

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    parse_config_into(cfg, text);
    return cfg;
}

std::string render_config(const RunConfig& cfg) {
    std::ostringstream out;
    out.precision(17);
    if (cfg.preset) out << "preset = " << *cfg.preset << "\n";
    out << "[panel]\n";
    out << "l1 = " << cfg.panel.l1 << "\nl2 = " << cfg.panel.l2 << "\nH0 = " << cfg.panel.H0
        << "\nt_f = " << cfg.panel.t_f << "\nt_c = " << cfg.panel.t_c
        << "\ndist = " << cfg.panel.dist << "\nalpha = " << cfg.panel.alpha_deg
        << "\nn = " << cfg.panel.n
        << "\nscale_thickness = " << (cfg.panel.scale_thickness ? "true" : "false") << "\n";
    if (cfg.panel.material) {
        out << "[material]\nE = " << cfg.panel.material->E << "\nnu = " << cfg.panel.material->nu
            << "\nname = " << cfg.panel.material->name << "\n";
    }
    out << "[model]\n";
    out << "branch = " << (cfg.model.branch == GeometryBranch::Exact ? "exact" : "closed_form")
        << "\npattern_rule = "
        << (cfg.model.pattern_rule == PatternRule::PerpendicularFoot ? "foot" : "midpoint")
        << "\nc_EA = " << cfg.model.c_EA << "\nw_c = " << cfg.model.w_c
        << "\nmodule_radius = " << cfg.model.module_radius
        << "\nscope = " << (cfg.model.scope == Scope::Panel ? "panel" : "module")
        << "\nstrain_measure = "
        << (cfg.model.strain_measure == StrainMeasure::Engineering ? "engineering" : "green")
        << "\n";
    out << "[load]\n";
    out << "kind = " << (cfg.load.kind == LoadKind::Compression ? "compression" : "torsion")
        << "\ntarget_strain = " << cfg.load.target_strain
        << "\ntwist_deg = " << cfg.load.twist_deg << "\npre_strain = " << cfg.load.pre_strain
        << "\npreload_strain = " << cfg.load.preload_strain
        << "\nmode_index = " << cfg.load.imperfection.mode_index
        << "\nmode_filter = "
        << (cfg.load.imperfection.filter == ModeFilter::Fold ? "fold" : "any")
        << "\nxi = " << cfg.load.imperfection.xi << "\n";
    const StepPolicy& s = cfg.load.step;
    out << "[solver]\n";
    out << "initial_step = " << s.initial_step << "\nmin_step = " << s.min_step
        << "\nmax_step = " << s.max_step << "\nmax_steps = " << s.max_steps
        << "\nnewton_rel_tol = " << s.newton_rel_tol
        << "\nnewton_abs_floor = " << s.newton_abs_floor
        << "\nmax_newton_iters = " << s.max_newton_iters
        << "\nenable_arc_length = " << (s.enable_arc_length ? "true" : "false")
        << "\nrecord_states = " << (s.record_states ? "true" : "false") << "\n";
    out << "[analysis]\n";
    out << "baseline_strain = " << cfg.analysis.baseline_strain
        << "\nband = " << cfg.analysis.band
        << "\nfit_window_deg = " << cfg.analysis.fit_window_deg << "\n";
    out << "[output]\ndir = " << cfg.output.dir << "\nformats = ";
    bool first = true;
    for (const std::string& f : cfg.output.formats) {
        if (!first) out << ",";
        out << f;
        first = false;
    }
    out << "\n";
    return out.str();
}

FamilyPreset family_presets(const std::string& family) {
    FamilyPreset f;
    f.name = family;
    if (family == "dist") {
        f.parameter = "dist";
        f.labels = {"M4", "M5", "M6"};
        f.values = {2.0, 3.0, 4.0};
    } else if (family == "alpha") {
        f.parameter = "alpha";
        f.labels = {"M7", "M8", "M9", "M10", "M11"};
        f.values = {0.0, 4.0, 8.0, 12.0, 16.0};
    } else if (family == "tc") {
        f.parameter = "t_c";
        f.labels = {"M12", "M13", "M14", "M15", "M16"};
        f.values = {0.54, 0.68, 0.81, 0.95, 1.08};
    } else if (family == "scale") {
        f.parameter = "n";
        f.labels = {"M17", "M18", "M19", "M20", "M21", "M22"};
        f.values = {1.0, 0.84, 0.71, 0.60, 0.51, 0.43};
    } else {
        throw ValidationError("family", "expected dist, alpha, tc or scale");
    }
    return f;
}

}  // namespace taperfold
