#include "taperfold/exporters.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace taperfold {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt_full(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_mm(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::ofstream open_out(const fs::path& dest) {
    if (dest.has_parent_path()) fs::create_directories(dest.parent_path());
    std::ofstream out(dest, std::ios::binary);
    if (!out) throw Error("cannot open '" + dest.string() + "' for writing");
    return out;
}

void dump_json(const json& j, const fs::path& dest) {
    std::ofstream out = open_out(dest);
    out << j.dump(2) << "\n";
}

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
json vec2_json(const Vec2& v) { return json::array({v.x(), v.y()}); }

}  // namespace

void export_curve_csv(const EquilibriumPath& path, const fs::path& dest) {
    if (path.samples.empty()) throw EmptyPath("refusing to export an empty path");
    std::ofstream out = open_out(dest);
    if (path.kind == LoadKind::Compression) {
        out << "strain,reaction_force_N,iterations,converged,flagged\n";
    } else {
        out << "twist_deg,torque_Nmm,iterations,converged,flagged\n";
    }
    for (const PathSample& s : path.samples) {
        out << fmt_full(s.control) << ',' << fmt_full(s.reaction) << ',' << s.newton_iters << ','
            << (s.converged ? 1 : 0) << ',' << (s.flagged ? 1 : 0) << '\n';
    }
}

EquilibriumPath import_curve_csv(const fs::path& src) {
    std::ifstream in(src, std::ios::binary);
    if (!in) throw Error("cannot open '" + src.string() + "' for reading");
    std::string header;
    if (!std::getline(in, header)) throw EmptyPath("csv file is empty");
    if (!header.empty() && header.back() == '\r') header.pop_back();

    EquilibriumPath path;
    if (header.rfind("strain,", 0) == 0) path.kind = LoadKind::Compression;
    else if (header.rfind("twist_deg,", 0) == 0) path.kind = LoadKind::Torsion;
    else throw Error("unrecognized curve header: " + header);

    std::string line;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 5) throw ParseError(lineno, 1, "expected 5 columns");
        PathSample s;
        s.control = std::strtod(cells[0].c_str(), nullptr);
        s.reaction = std::strtod(cells[1].c_str(), nullptr);
        s.newton_iters = std::atoi(cells[2].c_str());
        s.converged = cells[3] == "1";
        s.flagged = cells[4] == "1";
        path.samples.push_back(s);
    }
    return path;
}

void export_crease_svg(const PanelGeometry& geom, const fs::path& dest) {
    const Pattern& p = geom.developed;
    const std::array<Vec2, 8> ring = {p.M, p.A, p.C, p.B, p.N, p.B1, p.C1, p.A1};
    const std::array<double, 8> rest = spoke_dihedrals(geom);

    Vec2 lo = p.O, hi = p.O;
    for (const Vec2& v : ring) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    const double margin = 2.0;
    lo.array() -= margin;
    hi.array() += margin;
    const double w = hi.x() - lo.x();
    const double h = hi.y() - lo.y();

    // SVG user y grows downward; flip the pattern's y.
    const auto px = [&](const Vec2& v) { return fmt_mm(v.x() - lo.x()); };
    const auto py = [&](const Vec2& v) { return fmt_mm(hi.y() - v.y()); };
    const auto line = [&](std::ofstream& out, const Vec2& a, const Vec2& b,
                          const std::string& style) {
        out << "  <line x1=\"" << px(a) << "\" y1=\"" << py(a) << "\" x2=\"" << px(b)
            << "\" y2=\"" << py(b) << "\" " << style << "/>\n";
    };

    std::ofstream out = open_out(dest);
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt_mm(w) << "mm\" height=\""
        << fmt_mm(h) << "mm\" viewBox=\"0 0 " << fmt_mm(w) << " " << fmt_mm(h) << "\">\n";

    const std::string boundary = "stroke=\"#000000\" stroke-width=\"0.4\"";
    const std::string mountain = "class=\"mountain\" stroke=\"#d62728\" stroke-width=\"0.3\"";
    const std::string valley =
        "class=\"valley\" stroke=\"#1f77b4\" stroke-width=\"0.3\" stroke-dasharray=\"1.5,1.0\"";
    const std::string flat = "class=\"flat\" stroke=\"#888888\" stroke-width=\"0.2\"";

    for (int i = 0; i < 8; ++i) {
        line(out, ring[i], ring[(i + 1) % 8], boundary);
    }
    for (int i = 0; i < 8; ++i) {
        const double dev = rest[i] - kPi;
        const std::string& style = (std::abs(dev) < 1e-9) ? flat : (dev < 0.0 ? mountain : valley);
        line(out, p.O, ring[i], style);
    }
    out << "</svg>\n";
}

void export_mesh_obj(const BarHingeModel& model, const fs::path& dest) {
    std::ofstream out = open_out(dest);
    out << "# taperfold bar-and-hinge mesh\n";
    for (const PanelSpan& span : model.panels) {
        out << "o " << span.name << "\n";
        for (int i = span.node_begin; i < span.node_end; ++i) {
            const Vec3& v = model.nodes[i];
            out << "v " << fmt_full(v.x()) << ' ' << fmt_full(v.y()) << ' ' << fmt_full(v.z())
                << "\n";
        }
        for (int t = span.tri_begin; t < span.tri_end; ++t) {
            const Triangle& tri = model.triangles[t];
            out << "f " << tri.v0 + 1 << ' ' << tri.v1 + 1 << ' ' << tri.v2 + 1 << "\n";
        }
    }
}

void write_geometry_json(const PanelGeometry& geom, const SectorAngles& angles,
                         const FoldabilityReport& fold, const fs::path& dest) {
    json j;
    j["h1_mm"] = geom.h1;
    j["h2_mm"] = geom.h2;
    j["height_ratio"] = geom.t;
    j["theta_rad"] = geom.theta;
    j["l_EM_mm"] = geom.l_EM;
    j["semi_perimeter_mm"] = geom.p;
    j["dist_input_mm"] = geom.dist_input;
    j["dist_realized_mm"] = geom.dist_realized;
    j["apex_projection_mm"] = geom.apex_x;
    j["closed_form_gap"] = geom.closed_form_gap;
    j["branch"] = geom.branch == GeometryBranch::Exact ? "exact" : "closed_form";

    json folded;
    folded["A"] = vec3_json(geom.A);
    folded["A1"] = vec3_json(geom.A1);
    folded["B"] = vec3_json(geom.B);
    folded["B1"] = vec3_json(geom.B1);
    folded["C"] = vec3_json(geom.C);
    folded["C1"] = vec3_json(geom.C1);
    folded["O"] = vec3_json(geom.O);
    folded["M"] = vec3_json(geom.M);
    folded["N"] = vec3_json(geom.N);
    j["folded"] = folded;

    const Pattern& p = geom.developed;
    json pat;
    pat["A"] = vec2_json(p.A);
    pat["A1"] = vec2_json(p.A1);
    pat["B"] = vec2_json(p.B);
    pat["B1"] = vec2_json(p.B1);
    pat["C"] = vec2_json(p.C);
    pat["C1"] = vec2_json(p.C1);
    pat["O"] = vec2_json(p.O);
    pat["M"] = vec2_json(p.M);
    pat["N"] = vec2_json(p.N);
    j["pattern"] = pat;

    json a;
    a["gamma1_rad"] = angles.gamma1;
    a["gamma2_rad"] = angles.gamma2;
    a["beta1_rad"] = angles.beta1;
    a["beta2_rad"] = angles.beta2;
    j["sector_angles"] = a;

    json f;
    f["alternating_ok"] = fold.alternating_ok;
    f["sum_ok"] = fold.sum_ok;
    f["complement_ok"] = fold.complement_ok;
    f["opening_ok"] = fold.opening_ok;
    f["interference_ok"] = fold.interference_ok;
    f["alternating_residual"] = fold.alternating_residual;
    f["sum_residual"] = fold.sum_residual;
    f["complement_residual"] = fold.complement_residual;
    f["all_pass"] = fold.all_pass();
    j["foldability"] = f;

    dump_json(j, dest);
}

void write_cf_report_json(const ConstantForceReport& r, const fs::path& dest) {
    json j;
    j["baseline_strain"] = r.baseline_strain;
    j["baseline_force_N"] = r.baseline_force;
    j["band"] = r.band;
    j["strain_lo"] = r.strain_lo;
    j["strain_hi"] = r.strain_hi;
    j["range_width"] = r.range_width();
    j["plateau_force_N"] = r.plateau_force;
    j["fluctuation"] = r.fluctuation;
    dump_json(j, dest);
}

void write_sweep_report_json(const SweepReport& report, const fs::path& dest) {
    json j;
    json per;
    for (const auto& [label, r] : report.per_config) {
        json e;
        e["baseline_force_N"] = r.baseline_force;
        e["plateau_force_N"] = r.plateau_force;
        e["strain_lo"] = r.strain_lo;
        e["strain_hi"] = r.strain_hi;
        e["range_width"] = r.range_width();
        e["fluctuation"] = r.fluctuation;
        per[label] = e;
    }
    j["configs"] = per;
    json fams;
    for (const auto& [name, fr] : report.families) {
        json e;
        e["trend"] = to_string(fr.trend.direction);
        e["strict"] = fr.trend.strict;
        e["p_value"] = fr.trend.p_value;
        if (fr.fit) {
            e["fit"] = {{"slope", fr.fit->slope},
                        {"intercept", fr.fit->intercept},
                        {"r2", fr.fit->r2}};
        }
        fams[name] = e;
    }
    j["families"] = fams;
    dump_json(j, dest);
}

void write_mesh_summary_json(const BarHingeModel& model, const fs::path& dest) {
    json j;
    j["nodes"] = model.nodes.size();
    j["bars"] = model.bars.size();
    j["triangles"] = model.triangles.size();
    j["hinges"] = model.hinges.size();
    j["panels"] = model.panels.size();
    j["total_bar_length_mm"] = model.total_bar_length();
    json groups;
    for (const RigidGroup& g : model.groups) {
        groups[g.name] = {{"nodes", g.nodes.size()}, {"ref", vec3_json(g.ref_point)}};
    }
    j["groups"] = groups;
    dump_json(j, dest);
}

void write_path_report_json(const EquilibriumPath& path, const fs::path& dest) {
    json j;
    j["kind"] = path.kind == LoadKind::Compression ? "compression" : "torsion";
    j["samples"] = path.samples.size();
    j["max_control"] = path.max_control();
    switch (path.status) {
        case TerminalStatus::Completed: j["status"] = "completed"; break;
        case TerminalStatus::StepCollapse: j["status"] = "step_collapse"; break;
        case TerminalStatus::MaxSteps: j["status"] = "max_steps"; break;
    }
    if (!path.message.empty()) j["message"] = path.message;
    bool any_flag = false;
    for (const PathSample& s : path.samples) any_flag = any_flag || s.flagged;
    j["interpenetration_flagged"] = any_flag;
    dump_json(j, dest);
}

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

void write_manifest(const RunConfig& cfg, const std::string& command,
                    const std::vector<std::string>& outputs, const fs::path& dir) {
    const std::string echo = render_config(cfg);
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(echo)));
    json j;
    j["tool"] = kToolName;
    j["version"] = kToolVersion;
    j["command"] = command;
    j["preset"] = cfg.preset ? json(*cfg.preset) : json(nullptr);
    j["config_fnv1a64"] = std::string(hash);
    j["config"] = echo;
    std::vector<std::string> sorted = outputs;
    std::sort(sorted.begin(), sorted.end());
    j["outputs"] = sorted;
    dump_json(j, dir / "manifest.json");
}

}  // namespace taperfold
