// meshmend command line: repair, audit, inject.
//
// Exit status: 0 success, 2 partial failure (some stage failed, best-effort
// output written), 1 hard error.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "meshmend/error.hpp"
#include "meshmend/json_io.hpp"
#include "meshmend/mesh_io.hpp"
#include "meshmend/parallel.hpp"
#include "meshmend/pipeline.hpp"

namespace fs = std::filesystem;
using namespace meshmend;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitHard = 1;
constexpr int kExitPartial = 2;

std::mutex log_mutex;

void log_error(const std::string& message) {
    std::lock_guard lock(log_mutex);
    std::cerr << "meshmend: " << message << '\n';
}

struct Plane {
    Vec3 point;
    Vec3 normal;
};

Plane parse_plane(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw CLI::ValidationError("--slice", "bad number '" + item + "'");
        }
    }
    if (v.size() != 6) throw CLI::ValidationError("--slice", "expected px,py,pz,nx,ny,nz");
    return {{v[0], v[1], v[2]}, {v[3], v[4], v[5]}};
}

void write_json(const nlohmann::json& j, const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

bool is_mesh_file(const fs::path& p) { return format_from_extension(p).has_value(); }

// Mesh files under `root`, relative to it, sorted.
std::vector<fs::path> collect_meshes(const fs::path& root) {
    std::vector<fs::path> out;
    for (const auto& entry : fs::recursive_directory_iterator(root))
        if (entry.is_regular_file() && is_mesh_file(entry.path())) out.push_back(fs::relative(entry.path(), root));
    std::sort(out.begin(), out.end());
    return out;
}

fs::path before_slice_path(const fs::path& slice) {
    return slice.parent_path() / (slice.stem().string() + ".before" + slice.extension().string());
}

struct RepairArgs {
    std::string input;
    std::string output;
    std::string report;
    std::vector<std::string> slice;
    PipelineConfig config;
    std::vector<std::string> skipped;
};

// Repairs one file. Returns an exit status.
int repair_file(const fs::path& in, const fs::path& out, const fs::path& report_path,
                const std::optional<std::pair<Plane, fs::path>>& slice, const PipelineConfig& config) {
    Mesh mesh;
    try {
        mesh = load_mesh(in);
    } catch (const std::exception& e) {
        log_error(in.string() + ": " + e.what());
        return kExitHard;
    }
    PipelineResult result;
    try {
        result = run_pipeline(mesh, config);
    } catch (const std::exception& e) {
        log_error(in.string() + ": " + e.what());
        return kExitHard;
    }
    try {
        if (out.has_parent_path()) fs::create_directories(out.parent_path());
        save_mesh(result.mesh, out);
        if (!report_path.empty()) write_json(report_to_json(result.report), report_path);
        if (slice) {
            const auto& [plane, path] = *slice;
            if (path.has_parent_path()) fs::create_directories(path.parent_path());
            slice_export(result.mesh, plane.point, plane.normal, path);
            if (result.before_inner)
                slice_export(*result.before_inner, plane.point, plane.normal, before_slice_path(path));
        }
    } catch (const std::exception& e) {
        log_error(out.string() + ": " + e.what());
        return kExitHard;
    }
    if (result.partial_failure) {
        log_error(in.string() + ": stage " + result.failed_stage + " failed: " + result.error);
        return kExitPartial;
    }
    if (result.remesh.residual_pairs > 0)
        log_error(in.string() + ": " + std::to_string(result.remesh.residual_pairs) +
                  " self-intersecting pairs remain after remeshing");
    return kExitOk;
}

int combine(int a, int b) {
    if (a == kExitHard || b == kExitHard) return kExitHard;
    if (a == kExitPartial || b == kExitPartial) return kExitPartial;
    return kExitOk;
}

int run_repair(RepairArgs& args) {
    for (const std::string& name : args.skipped) args.config.set_stage_enabled(*stage_from_name(name), false);
    std::optional<Plane> plane;
    if (!args.slice.empty()) plane = parse_plane(args.slice[0]);

    const fs::path in(args.input);
    if (!fs::is_directory(in)) {
        std::optional<std::pair<Plane, fs::path>> slice;
        if (plane) slice.emplace(*plane, fs::path(args.slice[1]));
        return repair_file(in, args.output, args.report, slice, args.config);
    }

    // Batch: mirror the input tree under the output directory; --report and
    // --slice name directories mirrored the same way.
    const auto files = collect_meshes(in);
    const fs::path out_root(args.output);
    PipelineConfig per_file = args.config;
    const unsigned workers = resolve_worker_count(args.config.workers);
    if (files.size() > 1) per_file.workers = 1;
    std::atomic<int> status{kExitOk};
    parallel_for(files.size(), files.size() > 1 ? workers : 1, [&](std::size_t i) {
        const fs::path& rel = files[i];
        fs::path report;
        if (!args.report.empty()) report = fs::path(args.report) / fs::path(rel).replace_extension(".json");
        std::optional<std::pair<Plane, fs::path>> slice;
        if (plane) slice.emplace(*plane, fs::path(args.slice[1]) / rel);
        const int s = repair_file(in / rel, out_root / rel, report, slice, per_file);
        int cur = status.load();
        while (!status.compare_exchange_weak(cur, combine(cur, s))) {
        }
    }, 1);
    if (files.empty()) log_error(in.string() + ": no .off or .obj files found");
    return status.load();
}

int run_audit(const std::string& input, const std::string& report, const PipelineConfig& config) {
    const fs::path in(input);
    nlohmann::json out;
    int status = kExitOk;
    auto audit_one = [&](const fs::path& path) -> nlohmann::json {
        try {
            return audit_to_json(audit_deficiencies(load_mesh(path), config));
        } catch (const std::exception& e) {
            log_error(path.string() + ": " + e.what());
            status = kExitHard;
            return {{"error", e.what()}};
        }
    };
    if (fs::is_directory(in)) {
        out = nlohmann::json::object();
        for (const fs::path& rel : collect_meshes(in)) out[rel.generic_string()] = audit_one(in / rel);
    } else {
        out = audit_one(in);
    }
    std::cout << out.dump(2) << '\n';
    if (!report.empty() && report != "json") write_json(out, report);
    return status;
}

int run_inject(const std::string& input, const std::string& spec_path, const std::string& output,
               const std::string& truth_path, const std::optional<std::uint64_t>& seed) {
    std::ifstream spec_file(spec_path);
    if (!spec_file) throw IoError("cannot open " + spec_path);
    InjectionSpec spec = injection_spec_from_json(nlohmann::json::parse(spec_file));
    if (seed) spec.seed = *seed;
    const InjectionResult result = inject_deficiencies(load_mesh(input), spec);
    save_mesh(result.mesh, output);
    if (!truth_path.empty()) write_json(truth_to_json(result.truth), truth_path);
    return kExitOk;
}

void add_plan_options(CLI::App* cmd, PipelineConfig& config) {
    cmd->add_option("--rays-total", config.rays.rays_total, "Total ray budget shared by area")
        ->capture_default_str();
    cmd->add_option("--rays-min", config.rays.rays_min, "Minimum rays per face")->capture_default_str();
    cmd->add_option("--inner-threshold", config.rays.inner_threshold,
                    "Escape fraction below which a face is inner")
        ->capture_default_str();
    cmd->add_option("--dedup-tolerance", config.dedup_tolerance, "Distance under which vertices merge")
        ->capture_default_str();
    cmd->add_option("--seed", config.rays.seed, "Ray sampling seed")->capture_default_str();
    cmd->add_option("--workers", config.workers, "Worker threads (0 = all cores)")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Triangle mesh repair"};
    app.require_subcommand(1);

    RepairArgs repair;
    auto* repair_cmd = app.add_subcommand("repair", "Run the repair pipeline on a mesh or a directory of meshes");
    repair_cmd->add_option("input", repair.input, "Input .off/.obj file or directory")->required();
    repair_cmd->add_option("-o,--output", repair.output, "Output file or directory")->required();
    repair_cmd->add_option("--target-vertices", repair.config.target_vertices,
                           "Vertex budget for simplification (0 skips it)")
        ->capture_default_str();
    add_plan_options(repair_cmd, repair.config);
    repair_cmd->add_option("--report", repair.report, "Write the stage report as JSON");
    repair_cmd->add_option("--slice", repair.slice,
                           "\"px,py,pz,nx,ny,nz\" PATH: export faces behind the plane, before and after "
                           "inner-face removal")
        ->expected(2);
    for (Stage s : kAllStages) {
        std::string name = stage_name(s);
        std::string flag = "--skip-" + name;
        std::replace(flag.begin(), flag.end(), '_', '-');
        repair_cmd->add_flag_callback(flag, [&repair, name] { repair.skipped.push_back(name); },
                                      "Skip the " + name + " stage");
    }

    PipelineConfig audit_config;
    std::string audit_input, audit_report;
    auto* audit_cmd = app.add_subcommand("audit", "Count deficiencies; prints JSON");
    audit_cmd->add_option("input", audit_input, "Input file or directory")->required();
    audit_cmd->add_option("--report", audit_report, "Also write the JSON to this path");
    add_plan_options(audit_cmd, audit_config);

    std::string inject_input, inject_spec, inject_output, inject_truth;
    std::optional<std::uint64_t> inject_seed;
    auto* inject_cmd = app.add_subcommand("inject", "Add known deficiencies to a clean mesh");
    inject_cmd->add_option("input", inject_input, "Clean closed input mesh")->required();
    inject_cmd->add_option("--spec", inject_spec, "JSON object of per-class counts")->required();
    inject_cmd->add_option("-o,--output", inject_output, "Output mesh")->required();
    inject_cmd->add_option("--truth", inject_truth, "Write the injected items as JSON");
    inject_cmd->add_option("--seed", inject_seed, "Override the spec's seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*repair_cmd) return run_repair(repair);
        if (*audit_cmd) return run_audit(audit_input, audit_report, audit_config);
        if (*inject_cmd) return run_inject(inject_input, inject_spec, inject_output, inject_truth, inject_seed);
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        log_error(e.what());
        return kExitHard;
    }
    return kExitHard;
}
