#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "taperfold/exporters.hpp"

namespace fs = std::filesystem;
using namespace taperfold;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read config file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CommonArgs {
    std::string config_path;
    std::string preset;
    std::string out_dir;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "run configuration file (key = value)");
    cmd->add_option("--preset", args.preset, "bundled preset name (M1..M22, Ma, Mb, Mc)");
    cmd->add_option("--out", args.out_dir, "output directory");
}

RunConfig load_config(const CommonArgs& args) {
    RunConfig cfg;
    if (!args.preset.empty()) apply_preset(cfg, args.preset);
    if (!args.config_path.empty()) {
        parse_config_into(cfg, read_file(args.config_path));
    } else {
        cfg.validate();
    }
    if (!args.out_dir.empty()) cfg.output.dir = args.out_dir;
    return cfg;
}

PanelGeometry geometry_of(const RunConfig& cfg) {
    return derive_panel_geometry(apply_scaling(cfg.panel), cfg.geometry_options());
}

int run_geom(const CommonArgs& args) {
    const RunConfig cfg = load_config(args);
    const PanelGeometry geom = geometry_of(cfg);
    const SectorAngles angles = sector_angles(geom);
    const FoldabilityReport fold = validate_foldability(angles);

    const fs::path dir = cfg.output.dir;
    std::vector<std::string> outputs;
    write_geometry_json(geom, angles, fold, dir / "geometry.json");
    outputs.push_back("geometry.json");
    if (cfg.output.formats.count("svg")) {
        export_crease_svg(geom, dir / "pattern.svg");
        outputs.push_back("pattern.svg");
    }
    write_manifest(cfg, "geom", outputs, dir);

    std::cout << "h1 = " << geom.h1 << " mm, h2 = " << geom.h2 << " mm, t = " << geom.t
              << ", dist realized = " << geom.dist_realized << " mm\n"
              << "foldability: " << (fold.all_pass() ? "all constraints hold" : "violations reported")
              << " (see geometry.json)\n";
    return 0;
}

int run_mesh(const CommonArgs& args) {
    const RunConfig cfg = load_config(args);
    const fs::path dir = cfg.output.dir;
    std::vector<std::string> outputs;

    BarHingeModel model;
    if (cfg.model.scope == Scope::Module) {
        model = build_module(cfg.panel, cfg.model.module_radius, cfg.geometry_options(),
                             cfg.mesh_options())
                    .model;
    } else {
        model = build_panel(cfg.panel, cfg.geometry_options(), cfg.mesh_options());
    }
    write_mesh_summary_json(model, dir / "mesh.json");
    outputs.push_back("mesh.json");
    if (cfg.output.formats.count("obj")) {
        export_mesh_obj(model, dir / "mesh.obj");
        outputs.push_back("mesh.obj");
    }
    write_manifest(cfg, "mesh", outputs, dir);
    std::cout << model.nodes.size() << " nodes, " << model.bars.size() << " bars, "
              << model.hinges.size() << " hinges\n";
    return 0;
}

int write_run_outputs(const RunConfig& cfg, const RunResult& run, const std::string& command,
                      const fs::path& dir) {
    std::vector<std::string> outputs;
    if (!run.path.samples.empty()) {
        export_curve_csv(run.path, dir / "curve.csv");
        outputs.push_back("curve.csv");
    }
    write_path_report_json(run.path, dir / "run.json");
    outputs.push_back("run.json");

    if (run.path.kind == LoadKind::Compression && !run.path.samples.empty()) {
        try {
            const ConstantForceReport cf = constant_force_range(
                run.path, cfg.analysis.baseline_strain, cfg.analysis.band);
            write_cf_report_json(cf, dir / "cf_report.json");
            outputs.push_back("cf_report.json");
        } catch (const Error& e) {
            std::cerr << "note: constant-force report skipped: " << e.what() << "\n";
        }
    }
    write_manifest(cfg, command, outputs, dir);

    if (!run.path.completed()) {
        std::cerr << "solver did not complete: " << run.path.message << " (partial outputs in "
                  << dir.string() << ")\n";
        return 2;
    }
    return 0;
}

int run_simulate(const CommonArgs& args) {
    const RunConfig cfg = load_config(args);
    const fs::path dir = cfg.output.dir;
    const MechanicsOptions mech = cfg.mechanics_options();

    RunResult run;
    if (cfg.load.kind == LoadKind::Torsion) {
        if (cfg.model.scope != Scope::Module) {
            throw ValidationError("scope", "torsion runs need scope = module");
        }
        const ModuleModel module = build_module(cfg.panel, cfg.model.module_radius,
                                                cfg.geometry_options(), cfg.mesh_options());
        run = simulate_torsion(module, cfg.load, mech).run;
    } else {
        BarHingeModel model;
        if (cfg.model.scope == Scope::Module) {
            model = build_module(cfg.panel, cfg.model.module_radius, cfg.geometry_options(),
                                 cfg.mesh_options())
                        .model;
        } else {
            model = build_panel(cfg.panel, cfg.geometry_options(), cfg.mesh_options());
        }
        run = simulate_compression(model, cfg.load, mech).run;
    }

    const int rc = write_run_outputs(cfg, run, "simulate", dir);
    if (rc == 0) {
        std::cout << run.path.samples.size() << " samples to control "
                  << run.path.max_control() << "\n";
    }
    return rc;
}

int run_sweep(const CommonArgs& args, const std::string& family_name, int jobs) {
    RunConfig base = load_config(args);
    const FamilyPreset family = family_presets(family_name);
    const fs::path dir = base.output.dir;

    struct Slot {
        RunConfig cfg;
        RunResult run;
        ConstantForceReport report;
        bool ok = false;
        std::string error;
    };
    std::vector<Slot> slots(family.labels.size());
    for (size_t i = 0; i < family.labels.size(); ++i) {
        RunConfig cfg = base;
        apply_preset(cfg, family.labels[i]);
        cfg.model.scope = Scope::Panel;
        cfg.load.kind = LoadKind::Compression;
        cfg.output.dir = (dir / family.labels[i]).string();
        slots[i].cfg = cfg;
    }

    std::atomic<size_t> next{0};
    const auto worker = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= slots.size()) return;
            Slot& slot = slots[i];
            try {
                const BarHingeModel model = build_panel(slot.cfg.panel, slot.cfg.geometry_options(),
                                                        slot.cfg.mesh_options());
                slot.run = simulate_compression(model, slot.cfg.load,
                                                slot.cfg.mechanics_options())
                               .run;
                if (!slot.run.path.completed()) {
                    slot.error = "solver: " + slot.run.path.message;
                } else {
                    slot.report = constant_force_range(slot.run.path,
                                                       slot.cfg.analysis.baseline_strain,
                                                       slot.cfg.analysis.band);
                    slot.ok = true;
                }
            } catch (const std::exception& e) {
                slot.error = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    const int nthreads = std::max(1, jobs);
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();

    bool all_ok = true;
    Family fam{family.name, family.parameter, {}};
    for (size_t i = 0; i < slots.size(); ++i) {
        Slot& slot = slots[i];
        const fs::path sub = slot.cfg.output.dir;
        std::vector<std::string> outputs;
        if (!slot.run.path.samples.empty()) {
            export_curve_csv(slot.run.path, sub / "curve.csv");
            outputs.push_back("curve.csv");
            write_path_report_json(slot.run.path, sub / "run.json");
            outputs.push_back("run.json");
        }
        if (slot.ok) {
            write_cf_report_json(slot.report, sub / "cf_report.json");
            outputs.push_back("cf_report.json");
            fam.configs.push_back({family.labels[i], family.values[i], slot.report});
        } else {
            std::cerr << family.labels[i] << " failed: " << slot.error << "\n";
            all_ok = false;
        }
        write_manifest(slot.cfg, "sweep", outputs, sub);
    }

    if (fam.configs.size() >= 2) {
        const SweepReport report = sweep_trends({fam});
        write_sweep_report_json(report, dir / "sweep_report.json");
        const FamilyReport& fr = report.families.at(family.name);
        std::cout << "family " << family.name << ": " << to_string(fr.trend.direction)
                  << " (p = " << fr.trend.p_value << ")";
        if (fr.fit) std::cout << ", fit R^2 = " << fr.fit->r2;
        std::cout << "\n";
    }
    return all_ok ? 0 : 2;
}

int run_analyze(const CommonArgs& args, const std::string& curve_path) {
    const RunConfig cfg = load_config(args);
    const fs::path dir = cfg.output.dir;
    const EquilibriumPath path = import_curve_csv(curve_path);
    std::vector<std::string> outputs;
    if (path.kind == LoadKind::Compression) {
        const ConstantForceReport cf =
            constant_force_range(path, cfg.analysis.baseline_strain, cfg.analysis.band);
        write_cf_report_json(cf, dir / "cf_report.json");
        outputs.push_back("cf_report.json");
        std::cout << "plateau " << cf.plateau_force << " N over [" << cf.strain_lo << ", "
                  << cf.strain_hi << "]\n";
    } else {
        const double k = torsional_stiffness(path, cfg.analysis.fit_window_deg);
        std::ofstream out(dir / "torsion_report.json", std::ios::binary);
        fs::create_directories(dir);
        out << "{\n  \"stiffness_Nm_per_deg\": " << k << "\n}\n";
        outputs.push_back("torsion_report.json");
        std::cout << "torsional stiffness " << k << " N*m/deg\n";
    }
    write_manifest(cfg, "analyze", outputs, dir);
    return 0;
}

int run_export(const CommonArgs& args, bool want_svg, bool want_obj) {
    const RunConfig cfg = load_config(args);
    const fs::path dir = cfg.output.dir;
    std::vector<std::string> outputs;
    if (!want_svg && !want_obj) want_svg = want_obj = true;

    if (want_svg) {
        export_crease_svg(geometry_of(cfg), dir / "pattern.svg");
        outputs.push_back("pattern.svg");
    }
    if (want_obj) {
        BarHingeModel model;
        if (cfg.model.scope == Scope::Module) {
            model = build_module(cfg.panel, cfg.model.module_radius, cfg.geometry_options(),
                                 cfg.mesh_options())
                        .model;
        } else {
            model = build_panel(cfg.panel, cfg.geometry_options(), cfg.mesh_options());
        }
        export_mesh_obj(model, dir / "mesh.obj");
        outputs.push_back("mesh.obj");
    }
    write_manifest(cfg, "export", outputs, dir);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tapered waterbomb panel and gripper-module simulator"};
    app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
    app.require_subcommand(1);

    CommonArgs geom_args, mesh_args, sim_args, sweep_args, analyze_args, export_args;
    std::string family = "dist";
    int jobs = 1;
    std::string curve_path;
    bool want_svg = false, want_obj = false;

    CLI::App* geom = app.add_subcommand("geom", "derive panel geometry and foldability report");
    add_common(geom, geom_args);
    CLI::App* mesh = app.add_subcommand("mesh", "build the bar-and-hinge model");
    add_common(mesh, mesh_args);
    CLI::App* sim = app.add_subcommand("simulate", "buckling-seeded continuation run");
    add_common(sim, sim_args);
    CLI::App* sweep = app.add_subcommand("sweep", "run a parameter family and report trends");
    add_common(sweep, sweep_args);
    sweep->add_option("--family", family, "dist|alpha|tc|scale")->required();
    sweep->add_option("--jobs", jobs, "concurrent runs");
    CLI::App* analyze = app.add_subcommand("analyze", "post-process an exported curve");
    add_common(analyze, analyze_args);
    analyze->add_option("--curve", curve_path, "curve csv to analyze")->required();
    CLI::App* exp = app.add_subcommand("export", "write crease-pattern SVG / mesh OBJ");
    add_common(exp, export_args);
    exp->add_flag("--svg", want_svg, "write pattern.svg");
    exp->add_flag("--obj", want_obj, "write mesh.obj");

    CLI11_PARSE(app, argc, argv);

    try {
        if (geom->parsed()) return run_geom(geom_args);
        if (mesh->parsed()) return run_mesh(mesh_args);
        if (sim->parsed()) return run_simulate(sim_args);
        if (sweep->parsed()) return run_sweep(sweep_args, family, jobs);
        if (analyze->parsed()) return run_analyze(analyze_args, curve_path);
        if (exp->parsed()) return run_export(export_args, want_svg, want_obj);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const EigenFailure& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 2;
    } catch (const StepCollapse& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
