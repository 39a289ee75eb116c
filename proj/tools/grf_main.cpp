// SPDX-License-Identifier: MIT
//
// Command-line front end: mesh generation and export, field sampling with
// the Galerkin-Chebyshev method, the convergence studies as report files,
// and the exact sphere oracles as CSV.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "grf/chebyshev.hpp"
#include "grf/experiments.hpp"
#include "grf/fem.hpp"
#include "grf/mesh.hpp"
#include "grf/operators.hpp"
#include "grf/psd.hpp"
#include "grf/sampler.hpp"
#include "grf/sphere_spectral.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

grf::TriangleMesh load_mesh(const std::string& path) {
    const std::string ext = fs::path(path).extension().string();
    if (ext == ".obj") return grf::load_obj(path);
    return grf::load_off(path);
}

// Matern parameter flags shared by `sample` and the sphere oracles: either
// (--nu, --range) or (--kappa2, --beta), never a mix.
struct PsdFlags {
    double nu = 0.0, range = 0.0, kappa2 = 0.0, beta = 0.0;
    CLI::Option* nu_opt = nullptr;
    CLI::Option* kappa2_opt = nullptr;

    void attach(CLI::App* cmd) {
        nu_opt = cmd->add_option("--nu", nu, "Matern smoothness parameter nu > 0");
        CLI::Option* range_opt =
            cmd->add_option("--range", range, "practical correlation range a > 0");
        kappa2_opt = cmd->add_option("--kappa2", kappa2, "Matern kappa^2 > 0");
        CLI::Option* beta_opt = cmd->add_option("--beta", beta, "Matern exponent beta > 1/2");
        nu_opt->needs(range_opt);
        range_opt->needs(nu_opt);
        kappa2_opt->needs(beta_opt);
        beta_opt->needs(kappa2_opt);
        nu_opt->excludes(kappa2_opt);
        nu_opt->excludes(beta_opt);
        range_opt->excludes(kappa2_opt);
        range_opt->excludes(beta_opt);
    }

    grf::PowerSpectralDensity build() const {
        if (nu_opt->count() > 0) return grf::PowerSpectralDensity::matern_from_range(nu, range);
        if (kappa2_opt->count() > 0) return grf::PowerSpectralDensity::matern(kappa2, beta);
        throw CLI::RequiredError("--nu/--range or --kappa2/--beta");
    }
};

void write_csv_line(std::ofstream& out, double a, double b) {
    char buf[80];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", a, b);
    out << buf;
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return out;
}

char hash_hex_buf[32];
const char* hash_hex(std::uint64_t h) {
    std::snprintf(hash_hex_buf, sizeof hash_hex_buf, "%016llx",
                  static_cast<unsigned long long>(h));
    return hash_hex_buf;
}

// --- mesh ----------------------------------------------------------------

void add_mesh_commands(CLI::App& app) {
    CLI::App* mesh = app.add_subcommand("mesh", "generate, inspect, and export meshes");
    mesh->require_subcommand(1);

    {
        CLI::App* gen = mesh->add_subcommand("gen", "generate a built-in mesh as ASCII OFF");
        auto shape = std::make_shared<std::string>();
        auto level = std::make_shared<int>(3);
        auto out = std::make_shared<std::string>();
        gen->add_option("--shape", *shape, "icosphere or hyperboloid")
            ->required()
            ->check(CLI::IsMember({"icosphere", "hyperboloid"}));
        gen->add_option("--level", *level, "refinement level (default 3)")->check(CLI::Range(0, 8));
        gen->add_option("--out", *out, "output OFF path")->required();
        gen->callback([shape, level, out] {
            const grf::TriangleMesh m =
                (*shape == "icosphere") ? grf::icosphere(*level) : grf::hyperboloid(*level);
            grf::save_off(m, *out);
            std::printf("%s level %d: %d vertices, %d triangles -> %s\n", shape->c_str(), *level,
                        m.n_vertices(), m.n_triangles(), out->c_str());
        });
    }

    {
        CLI::App* info = mesh->add_subcommand("info", "validate a mesh and print its summary");
        auto path = std::make_shared<std::string>();
        info->add_option("--mesh", *path, "OFF or OBJ file")->required()->check(CLI::ExistingFile);
        info->callback([path] {
            const grf::TriangleMesh m = load_mesh(*path);
            const grf::MeshReport r = grf::validate(m);
            std::printf("vertices:      %d\n", r.n_vertices);
            std::printf("triangles:     %d\n", r.n_triangles);
            std::printf("edges:         %ld\n", r.n_edges);
            std::printf("boundary:      %ld edges\n", r.boundary_edges);
            std::printf("surface area:  %.17g\n", grf::surface_area(m));
            std::printf("closed:        %s\n", r.is_closed() ? "yes" : "no");
            std::printf("valid:         %s\n", r.ok_with_boundary() ? "yes" : "no");
            std::printf("content hash:  %s\n", hash_hex(grf::content_hash(m)));
        });
    }

    {
        CLI::App* mat = mesh->add_subcommand(
            "matrices", "assemble and export mass, stiffness, and lumped mass as MatrixMarket");
        auto path = std::make_shared<std::string>();
        auto prefix = std::make_shared<std::string>();
        mat->add_option("--mesh", *path, "OFF or OBJ file")->required()->check(CLI::ExistingFile);
        mat->add_option("--out-prefix", *prefix, "writes <prefix>.mass.mtx, <prefix>.stiffness.mtx, <prefix>.lumped.mtx")
            ->required();
        mat->callback([path, prefix] {
            const grf::TriangleMesh m = load_mesh(*path);
            const fs::path p(*prefix);
            if (p.has_parent_path()) fs::create_directories(p.parent_path());
            grf::save_matrix_market(grf::assemble_mass(m), *prefix + ".mass.mtx");
            grf::save_matrix_market(grf::assemble_stiffness(m), *prefix + ".stiffness.mtx");
            grf::save_matrix_market(grf::lumped_mass(m), *prefix + ".lumped.mtx");
            std::printf("wrote %s.{mass,stiffness,lumped}.mtx (n = %d)\n", prefix->c_str(),
                        m.n_vertices());
        });
    }
}

// --- sample ----------------------------------------------------------------

struct SampleArgs {
    std::string mesh_path;
    PsdFlags psd;
    bool lumped = false;
    bool fill_reducing = false;
    std::uint64_t seed = 0;
    long count = 1;
    int workers = 1;
    int cheb_order = -1;
    double cheb_tol = 1e-12;
    int cheb_cap = 1 << 16;
    std::string out_dir;
    std::string format = "csv";
};

void run_sample(const SampleArgs& args) {
    const grf::TriangleMesh mesh = load_mesh(args.mesh_path);
    const grf::PowerSpectralDensity psd = args.psd.build();

    grf::FactorizeOptions options;
    options.mode = args.lumped ? grf::MassMode::Lumped : grf::MassMode::Cholesky;
    options.fill_reducing = args.fill_reducing;
    const grf::SparseSymMatrix mass =
        args.lumped ? grf::lumped_mass(mesh) : grf::assemble_mass(mesh);
    const grf::GalerkinOperator op =
        grf::GalerkinOperator::factorize(mass, grf::assemble_stiffness(mesh), options);

    int order = args.cheb_order;
    bool hit_cap = false;
    if (order < 0) {
        const grf::OrderSelection sel =
            grf::select_order(psd, op.lambda_max(), args.cheb_tol, args.cheb_cap);
        order = sel.order;
        hit_cap = sel.hit_cap;
        if (hit_cap)
            std::cerr << "warning: coefficient ratio " << args.cheb_tol
                      << " not reached below the cap " << args.cheb_cap << "\n";
    }
    const grf::ChebyshevSeries series = grf::fit_chebyshev(psd, op.lambda_max(), order);
    const std::vector<grf::FieldSample> samples =
        grf::sample_batch(op, series, args.count, args.seed, args.workers);

    fs::create_directories(args.out_dir);
    const fs::path dir(args.out_dir);

    json meta;
    meta["mesh"] = args.mesh_path;
    meta["mesh_hash"] = hash_hex(grf::content_hash(mesh));
    meta["n_vertices"] = mesh.n_vertices();
    meta["psd"] = psd.describe();
    meta["mass_mode"] = args.lumped ? "lumped" : "cholesky";
    meta["fill_reducing"] = args.fill_reducing;
    meta["seed"] = args.seed;
    meta["count"] = args.count;
    meta["cheb_order"] = order;
    meta["cheb_order_hit_cap"] = hit_cap;
    meta["lambda_max"] = op.lambda_max();
    meta["format"] = args.format;
    {
        std::ofstream ms = open_out(dir / "metadata.json");
        ms << meta.dump(2) << '\n';
    }

    if (args.format == "csv") {
        // one row per vertex: coordinates, then one column per sample
        std::ofstream out = open_out(dir / "samples.csv");
        out << "x,y,z";
        for (long s = 0; s < args.count; ++s) out << ",sample_" << s;
        out << '\n';
        char buf[48];
        for (int i = 0; i < mesh.n_vertices(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", mesh.vertices[i][0]);
            out << buf;
            for (int c = 1; c < 3; ++c) {
                std::snprintf(buf, sizeof buf, ",%.17g", mesh.vertices[i][c]);
                out << buf;
            }
            for (long s = 0; s < args.count; ++s) {
                std::snprintf(buf, sizeof buf, ",%.17g", samples[s].weights[i]);
                out << buf;
            }
            out << '\n';
        }
    } else {
        // raw little-endian doubles, one sample of n weights after another
        std::ofstream out(dir / "samples.f64", std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + (dir / "samples.f64").string());
        for (const grf::FieldSample& s : samples)
            out.write(reinterpret_cast<const char*>(s.weights.data()),
                      static_cast<std::streamsize>(sizeof(double)) * s.weights.size());
    }
    std::printf("wrote %ld sample(s) of %d weights (Chebyshev order %d) to %s\n", args.count,
                mesh.n_vertices(), order, args.out_dir.c_str());
}

void add_sample_command(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand("sample", "draw field samples on a mesh");
    auto args = std::make_shared<SampleArgs>();
    cmd->add_option("--mesh", args->mesh_path, "OFF or OBJ file")
        ->required()
        ->check(CLI::ExistingFile);
    args->psd.attach(cmd);
    cmd->add_flag("--lumped", args->lumped, "diagonal (lumped) mass instead of Cholesky");
    cmd->add_flag("--fill-reducing", args->fill_reducing,
                  "AMD ordering for the mass factor (large meshes)");
    cmd->add_option("--seed", args->seed, "base seed; the batch is a pure function of it");
    cmd->add_option("--count", args->count, "number of samples")->check(CLI::PositiveNumber);
    cmd->add_option("--workers", args->workers, "worker threads (output independent of this)")
        ->check(CLI::PositiveNumber);
    CLI::Option* order_opt = cmd->add_option(
        "--cheb-order", args->cheb_order, "fixed Chebyshev order (default: criterion-selected)");
    cmd->add_option("--cheb-tol", args->cheb_tol,
                    "coefficient ratio criterion for order selection (default 1e-12)")
        ->excludes(order_opt);
    cmd->add_option("--cheb-cap", args->cheb_cap, "order selection cap (default 65536)");
    cmd->add_option("--out", args->out_dir, "output directory")->required();
    cmd->add_option("--format", args->format, "samples.csv or raw samples.f64 (default csv)")
        ->check(CLI::IsMember({"csv", "bin"}));
    cmd->callback([args] { run_sample(*args); });
}

// --- study -----------------------------------------------------------------

// Pops `key` from `j` into `into` when present, so unknown keys can be
// reported after all known ones are consumed.
template <typename T>
void take(json& j, const char* key, T& into) {
    const auto it = j.find(key);
    if (it == j.end()) return;
    into = it->template get<T>();
    j.erase(it);
}

void take_mass_mode(json& j, grf::MassMode& mode) {
    std::string name;
    take(j, "mass_mode", name);
    if (name.empty()) return;
    if (name == "lumped")
        mode = grf::MassMode::Lumped;
    else if (name == "cholesky")
        mode = grf::MassMode::Cholesky;
    else
        throw std::invalid_argument("mass_mode must be \"cholesky\" or \"lumped\"");
}

json load_config(const std::string& path, const std::string& study) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    json j = json::parse(in);
    std::string declared = study;
    take(j, "study", declared);
    if (declared != study)
        throw std::invalid_argument("config declares study \"" + declared +
                                    "\" but the subcommand is \"" + study + "\"");
    return j;
}

void reject_unknown(const json& j, const std::string& study) {
    if (j.empty()) return;
    throw std::invalid_argument("unknown key \"" + j.begin().key() + "\" in " + study +
                                " study config");
}

void finish_study(const grf::ConvergenceReport& report, const std::string& out_dir) {
    grf::write_report(report, out_dir);
    if (report.degenerate)
        std::printf("%s: degenerate fit (too few points or no spread), FAIL -> %s/report.{csv,json}\n",
                    report.study.c_str(), out_dir.c_str());
    else
        std::printf(
            "%s: slope %.6g (expected %.6g), stderr %.3g, r^2 %.6g, %s -> %s/report.{csv,json}\n",
            report.study.c_str(), report.slope, report.expected_slope, report.slope_stderr,
            report.r_squared, report.pass ? "pass" : "FAIL", out_dir.c_str());
}

void add_study_commands(CLI::App& app) {
    CLI::App* study = app.add_subcommand(
        "study", "run a convergence study from a JSON config and write report.csv/report.json");
    study->require_subcommand(1);

    struct StudyPaths {
        std::string config;
        std::string out;
    };
    const auto add_paths = [](CLI::App* cmd, const std::shared_ptr<StudyPaths>& p) {
        cmd->add_option("--config", p->config, "JSON study configuration")
            ->required()
            ->check(CLI::ExistingFile);
        cmd->add_option("--out", p->out, "report output directory")->required();
    };

    {
        CLI::App* cmd = study->add_subcommand("trunc", "Karhunen-Loeve truncation error");
        auto p = std::make_shared<StudyPaths>();
        add_paths(cmd, p);
        cmd->callback([p] {
            json j = load_config(p->config, "trunc");
            grf::TruncationStudyConfig config;
            take(j, "nu", config.nu);
            take(j, "a", config.a);
            take(j, "orders", config.orders);
            take(j, "tolerance", config.tolerance);
            take(j, "drop_first", config.drop_first);
            reject_unknown(j, "trunc");
            finish_study(grf::run_truncation_study(config), p->out);
        });
    }
    {
        CLI::App* cmd = study->add_subcommand("cheb", "polynomial approximation error");
        auto p = std::make_shared<StudyPaths>();
        add_paths(cmd, p);
        cmd->callback([p] {
            json j = load_config(p->config, "cheb");
            grf::ChebErrorStudyConfig config;
            take(j, "nu", config.nu);
            take(j, "a", config.a);
            take(j, "n_modes", config.n_modes);
            take(j, "orders_K", config.orders_K);
            take(j, "cheb_tol", config.cheb_tol);
            take(j, "cheb_cap", config.cheb_cap);
            take(j, "r2_threshold", config.r2_threshold);
            take(j, "ratio_threshold", config.ratio_threshold);
            reject_unknown(j, "cheb");
            finish_study(grf::run_cheb_error_study(config), p->out);
        });
    }
    {
        CLI::App* cmd = study->add_subcommand("sphere-cov", "sphere covariance error vs level");
        auto p = std::make_shared<StudyPaths>();
        add_paths(cmd, p);
        cmd->callback([p] {
            json j = load_config(p->config, "sphere-cov");
            grf::SphereCovarianceStudyConfig config;
            take(j, "nu", config.nu);
            take(j, "a", config.a);
            take(j, "levels", config.levels);
            take(j, "mode", config.mode);
            take(j, "mc_samples", config.mc_samples);
            take_mass_mode(j, config.mass_mode);
            take(j, "dense_cap", config.dense_cap);
            take(j, "n_angles", config.n_angles);
            take(j, "tolerance", config.tolerance);
            take(j, "drop_first", config.drop_first);
            take(j, "seed", config.seed);
            take(j, "workers", config.workers);
            take(j, "cheb_tol", config.cheb_tol);
            take(j, "cheb_cap", config.cheb_cap);
            reject_unknown(j, "sphere-cov");
            finish_study(grf::run_sphere_covariance_study(config), p->out);
        });
    }
    {
        CLI::App* cmd =
            study->add_subcommand("hyper-cov", "hyperboloid covariance self-convergence");
        auto p = std::make_shared<StudyPaths>();
        add_paths(cmd, p);
        cmd->callback([p] {
            json j = load_config(p->config, "hyper-cov");
            grf::HyperboloidCovarianceStudyConfig config;
            take(j, "nu", config.nu);
            take(j, "a", config.a);
            take(j, "levels", config.levels);
            take(j, "mc_samples", config.mc_samples);
            take_mass_mode(j, config.mass_mode);
            take(j, "dense_cap", config.dense_cap);
            take(j, "n_points", config.n_points);
            take(j, "tolerance", config.tolerance);
            take(j, "drop_first", config.drop_first);
            take(j, "seed", config.seed);
            take(j, "workers", config.workers);
            take(j, "cheb_tol", config.cheb_tol);
            take(j, "cheb_cap", config.cheb_cap);
            reject_unknown(j, "hyper-cov");
            finish_study(grf::run_hyperboloid_covariance_study(config), p->out);
        });
    }
}

// --- sphere oracles ---------------------------------------------------------

void add_sphere_commands(CLI::App& app) {
    CLI::App* sphere =
        app.add_subcommand("sphere", "exact unit-sphere spectral oracles as CSV");
    sphere->require_subcommand(1);

    {
        CLI::App* cmd = sphere->add_subcommand("cov", "angular covariance at given angles");
        auto psd = std::make_shared<PsdFlags>();
        auto thetas_path = std::make_shared<std::string>();
        auto out_path = std::make_shared<std::string>();
        auto rel_tol = std::make_shared<double>(1e-12);
        psd->attach(cmd);
        cmd->add_option("--thetas", *thetas_path, "file of angles in radians, one per line")
            ->required()
            ->check(CLI::ExistingFile);
        cmd->add_option("--out", *out_path, "output CSV (theta,covariance)")->required();
        cmd->add_option("--rel-tol", *rel_tol, "series tail tolerance (default 1e-12)");
        cmd->callback([psd, thetas_path, out_path, rel_tol] {
            std::ifstream in(*thetas_path);
            if (!in) throw std::runtime_error("cannot open " + *thetas_path);
            std::vector<double> thetas;
            double theta;
            while (in >> theta) thetas.push_back(theta);
            if (thetas.empty())
                throw std::invalid_argument("no angles found in " + *thetas_path);
            const std::vector<double> cov =
                grf::covariance_exact_batch(thetas, psd->build(), *rel_tol);
            std::ofstream out = open_out(*out_path);
            out << "theta,covariance\n";
            for (std::size_t i = 0; i < thetas.size(); ++i)
                write_csv_line(out, thetas[i], cov[i]);
            std::printf("wrote %zu covariance values to %s\n", thetas.size(), out_path->c_str());
        });
    }
    {
        CLI::App* cmd =
            sphere->add_subcommand("trunc-error", "Karhunen-Loeve truncation error per order");
        auto psd = std::make_shared<PsdFlags>();
        auto orders = std::make_shared<std::vector<long>>(
            std::vector<long>{100, 1000, 10000, 50000, 100000});
        auto out_path = std::make_shared<std::string>();
        psd->attach(cmd);
        cmd->add_option("--orders", *orders, "truncation orders (mode counts)")->delimiter(',');
        cmd->add_option("--out", *out_path, "output CSV (n_modes,error)")->required();
        cmd->callback([psd, orders, out_path] {
            const grf::PowerSpectralDensity density = psd->build();
            std::ofstream out = open_out(*out_path);
            out << "n_modes,error\n";
            for (long n : *orders)
                write_csv_line(out, static_cast<double>(n),
                               grf::truncation_error_exact(n, density));
            std::printf("wrote %zu truncation errors to %s\n", orders->size(),
                        out_path->c_str());
        });
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Gaussian random fields on triangulated surfaces: Galerkin-Chebyshev "
        "sampling and convergence studies"};
    app.require_subcommand(1);
    add_mesh_commands(app);
    add_sample_command(app);
    add_study_commands(app);
    add_sphere_commands(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
