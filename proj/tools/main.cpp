// reslab: command-line entry point for phantom generation, injection, model
// fitting, scoring, the experiment sweeps, panels and plots.

#include "reslab/anomaly.hpp"
#include "reslab/config.hpp"
#include "reslab/dataset.hpp"
#include "reslab/errors.hpp"
#include "reslab/harness.hpp"
#include "reslab/phantom.hpp"
#include "reslab/plot.hpp"
#include "reslab/reconstruct.hpp"
#include "reslab/rng.hpp"
#include "reslab/scoring.hpp"
#include "reslab/subspace.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace fs = std::filesystem;
using namespace reslab;

namespace {

bool g_verbose = false;

void log(const std::string& msg) {
    if (g_verbose) std::cerr << "reslab: " << msg << '\n';
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorCode::kIo, path.string() + ": cannot open for writing");
    out << text;
    require(static_cast<bool>(out), ErrorCode::kIo, path.string() + ": write failed");
}

// Resolved flag values of a non-sweep subcommand, stored next to its outputs.
class Snapshot {
public:
    explicit Snapshot(std::string command) : command_(std::move(command)) {}

    template <typename T>
    void add(const std::string& key, const T& value) {
        std::ostringstream s;
        s << value;
        lines_ += key + " = " + s.str() + '\n';
    }

    void write(const fs::path& dir) const {
        write_file(dir / (command_ + ".resolved.cfg"), "# resolved " + command_ + " invocation\n" + lines_);
    }

private:
    std::string command_;
    std::string lines_;
};

// ---- sweep options shared by exp1/exp2/exp3/histeq/panels ----

struct SweepFlags {
    std::string config;
    std::vector<std::pair<std::string, std::string>> overrides;
    std::vector<std::string> sets;
    std::vector<std::string> cells;
};

void add_sweep_flags(CLI::App* cmd, SweepFlags& flags) {
    cmd->add_option("--config", flags.config, "Config file (key = value lines)")->check(CLI::ExistingFile);
    // Each flag maps onto the config key of the same name; flags win over the file.
    const std::vector<std::pair<std::string, std::string>> keyed = {
        {"--seed", "seed"},
        {"--out", "out"},
        {"--threads", "threads"},
        {"--test-manifest", "test_manifest"},
        {"--train-manifest", "train_manifest"},
        {"--phantom-test", "phantom_test"},
        {"--phantom-train", "phantom_train"},
        {"--phantom-size", "phantom_size"},
        {"--phantom-seed", "phantom_seed"},
        {"--intensities", "intensities"},
        {"--sigmas", "sigmas"},
        {"--kinds", "kinds"},
        {"--radius", "radius"},
        {"--reference-intensity", "reference_intensity"},
        {"--models", "models"},
        {"--modes", "modes"},
        {"--eval-mask", "eval_mask"},
        {"--match-sigma", "match_sigma"},
        {"--export-injections", "export_injections"},
    };
    for (const auto& [flag, key] : keyed) {
        cmd->add_option_function<std::string>(
            flag, [&flags, key](const std::string& v) { flags.overrides.emplace_back(key, v); },
            "Overrides config key '" + key + "'");
    }
    cmd->add_option("--set", flags.sets, "Extra override, key=value (repeatable)");
}

SweepConfig default_for(ExperimentId id) {
    SweepConfig config = default_config(id);
    // The exp3 subcommand scores both modes unless the config or flags narrow them.
    if (id == ExperimentId::kExp3Healthy) config.modes = {ReconMode::kHealthy, ReconMode::kAnomalous};
    return config;
}

SweepConfig resolve_sweep(ExperimentId id, const SweepFlags& flags, bool check_experiment = true) {
    SweepConfig config = default_for(id);
    if (!flags.config.empty()) load_config_file(config, flags.config);
    for (const auto& [key, value] : flags.overrides) apply_setting(config, key, value, {});
    for (const auto& kv : flags.sets) {
        const auto eq = kv.find('=');
        require(eq != std::string::npos, ErrorCode::kConfig, "--set expects key=value, got '" + kv + "'");
        apply_setting(config, kv.substr(0, eq), kv.substr(eq + 1), {});
    }
    // The experiment key in a config file cannot switch the subcommand's experiment family.
    const bool exp3 = id == ExperimentId::kExp3Healthy || id == ExperimentId::kExp3Anomalous;
    const bool cfg_exp3 =
        config.experiment == ExperimentId::kExp3Healthy || config.experiment == ExperimentId::kExp3Anomalous;
    if (check_experiment && (exp3 != cfg_exp3 || (!exp3 && config.experiment != id))) {
        throw Error(ErrorCode::kConfig, std::string("config experiment '") + to_string(config.experiment) +
                                            "' does not match subcommand '" + to_string(id) + "'");
    }
    return config;
}

int run_sweep(ExperimentId id, const SweepFlags& flags) {
    SweepConfig config = resolve_sweep(id, flags);
    log(std::string("running ") + to_string(config.experiment) + " into " + config.out.string());
    const ExperimentResult result = run_experiment(config);
    log("wrote " + std::to_string(result.rows.size()) + " rows");
    return 0;
}

// ---- individual subcommands ----

struct PhantomFlags {
    std::uint64_t seed = 0;
    std::size_t n = 0;
    std::size_t size = 128;
    std::string role = "test";
    std::string out;
};

int run_phantom(const PhantomFlags& f) {
    require(f.role == "test" || f.role == "train", ErrorCode::kConfig, "--role must be test or train");
    const DatasetRole role = f.role == "train" ? DatasetRole::kTrain : DatasetRole::kTest;
    const fs::path out = f.out;
    fs::create_directories(out);
    const Dataset data = make_phantom_set(f.seed, role, f.n, f.size);
    DatasetManifest manifest{role, {}};
    for (const auto& s : data) {
        write_grid(s.image, out / (s.stem + ".f32g"));
        write_mask(*s.mask, out / (s.stem + ".maskg"));
        manifest.entries.push_back({out / (s.stem + ".f32g"), out / (s.stem + ".maskg")});
    }
    write_manifest(manifest, out / "manifest.txt");
    Snapshot snap("phantom");
    snap.add("seed", f.seed);
    snap.add("n", f.n);
    snap.add("size", f.size);
    snap.add("role", f.role);
    snap.write(out);
    log("wrote " + std::to_string(data.size()) + " phantoms to " + out.string());
    return 0;
}

struct InjectFlags {
    std::string image;
    std::string mask;
    std::string kind;
    std::optional<double> intensity;
    double radius = 20.0;
    std::uint64_t seed = 0;
    std::optional<double> row, col;
    std::string out;
    std::string stem;
};

int run_inject(const InjectFlags& f) {
    AnomalyKind kind;
    try {
        kind = parse_anomaly_kind(f.kind);
    } catch (const Error& e) {
        throw Error(ErrorCode::kConfig, e.what());
    }
    require(kind != AnomalyKind::kIntensity || f.intensity.has_value(), ErrorCode::kConfig,
            "--intensity is required for kind intensity");
    require(f.row.has_value() == f.col.has_value(), ErrorCode::kConfig, "--row and --col go together");
    const Grid image = read_grid(f.image);
    const BinaryMask object = f.mask.empty() ? nonzero_mask(image) : read_mask(f.mask);
    RegionSpec region;
    if (f.row) {
        region = RegionSpec{*f.row, *f.col, f.radius};
    } else {
        region = sample_region(object, f.radius, derive_seed(f.seed, "region", 0));
    }
    const InjectionRecord rec = inject(kind, image, region, f.intensity.value_or(0.0), f.seed);
    const fs::path out = f.out;
    fs::create_directories(out);
    const std::string source = fs::path(f.image).stem().string();
    const std::string stem = f.stem.empty() ? source + "__" + to_string(kind) : f.stem;
    write_injection(rec, out, stem, source);
    Snapshot snap("inject");
    snap.add("image", fs::path(f.image).string());
    snap.add("mask", f.mask.empty() ? std::string("nonzero") : f.mask);
    snap.add("kind", f.kind);
    if (f.intensity) snap.add("intensity", *f.intensity);
    snap.add("radius", f.radius);
    snap.add("seed", f.seed);
    snap.add("center", std::to_string(region.row) + "," + std::to_string(region.col));
    snap.add("stem", stem);
    snap.write(out);
    log("wrote " + (out / (stem + ".f32g")).string());
    return 0;
}

struct FitFlags {
    std::string train_manifest;
    std::size_t phantom_train = 0;
    std::size_t phantom_size = 128;
    std::uint64_t phantom_seed = 0;
    std::size_t k = 16;
    std::uint64_t seed = 0;
    std::string out;
};

int run_fit(const FitFlags& f) {
    require(!f.train_manifest.empty() || f.phantom_train > 0, ErrorCode::kConfig,
            "give --train-manifest or --phantom-train");
    const Dataset train = !f.train_manifest.empty()
                              ? load_dataset(read_manifest(f.train_manifest))
                              : make_phantom_set(f.phantom_seed, DatasetRole::kTrain, f.phantom_train, f.phantom_size);
    log("fitting k=" + std::to_string(f.k) + " on " + std::to_string(train.size()) + " images");
    const SubspaceModel model = fit_subspace(train, f.k, f.seed);
    const fs::path out = f.out;
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    save_subspace(model, out);
    Snapshot snap("fit-subspace");
    if (!f.train_manifest.empty()) {
        snap.add("train_manifest", f.train_manifest);
    } else {
        snap.add("phantom_train", f.phantom_train);
        snap.add("phantom_size", f.phantom_size);
        snap.add("phantom_seed", f.phantom_seed);
    }
    snap.add("k", f.k);
    snap.add("seed", f.seed);
    snap.add("fingerprint", model.fingerprint());
    snap.write(out.has_parent_path() ? out.parent_path() : fs::path("."));
    return 0;
}

struct ReconFlags {
    std::string model;
    std::string manifest;
    std::string mode = "healthy";
    std::string out;
};

int run_reconstruct(const ReconFlags& f) {
    const ModelSpec spec = parse_model_spec(f.model);
    ReconMode mode;
    try {
        mode = parse_recon_mode(f.mode);
    } catch (const Error& e) {
        throw Error(ErrorCode::kConfig, e.what());
    }
    Reconstructor model;
    switch (spec.kind) {
        case ModelSpec::Kind::kIdentity: model = IdentityModel{}; break;
        case ModelSpec::Kind::kBlur: model = BlurOracle{spec.sigma}; break;
        case ModelSpec::Kind::kSubspaceFile:
            model = std::make_shared<const SubspaceModel>(load_subspace(spec.path));
            break;
        case ModelSpec::Kind::kExternal: model = ExternalReconSource{spec.path, spec.name}; break;
        case ModelSpec::Kind::kSubspace:
            throw Error(ErrorCode::kConfig, "reconstruct needs a fitted model: use subspace-file:<path>");
    }
    const Dataset data = load_dataset(read_manifest(f.manifest));
    const fs::path out = f.out;
    fs::create_directories(out);
    // Output layout doubles as an ExternalReconSource directory.
    const ExternalReconSource sink{out, {}};
    for (const auto& s : data) {
        write_grid(reconstruct(model, s.image, s.stem, mode), sink.path_for(s.stem, mode));
    }
    Snapshot snap("reconstruct");
    snap.add("model", spec.text());
    snap.add("manifest", f.manifest);
    snap.add("mode", f.mode);
    snap.write(out);
    log("wrote " + std::to_string(data.size()) + " reconstructions to " + out.string());
    return 0;
}

struct ScoreFlags {
    std::string input, recon, truth, eval, list, out;
};

int run_score(const ScoreFlags& f) {
    const auto score_one = [](const std::string& id, const fs::path& input, const fs::path& recon,
                              const fs::path& truth, const std::optional<fs::path>& eval) {
        ScoredImage img{id, residual_map(read_grid(input), read_grid(recon)), read_mask(truth), std::nullopt};
        if (eval) img.eval_mask = read_mask(*eval);
        return img;
    };
    std::vector<ScoredImage> images;
    if (!f.list.empty()) {
        require(f.input.empty() && f.recon.empty() && f.truth.empty(), ErrorCode::kConfig,
                "--list excludes --input/--recon/--truth");
        std::ifstream in(f.list);
        require(static_cast<bool>(in), ErrorCode::kMissingFile, f.list + ": cannot open list");
        const fs::path base = fs::path(f.list).parent_path();
        const auto at = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            std::vector<std::string> cols;
            std::istringstream ls(line);
            std::string col;
            while (std::getline(ls, col, '\t')) cols.push_back(col);
            require(cols.size() == 4 || cols.size() == 5, ErrorCode::kInvalidArgument,
                    f.list + ": expected id<TAB>input<TAB>recon<TAB>truth[<TAB>eval]");
            images.push_back(score_one(cols[0], at(cols[1]), at(cols[2]), at(cols[3]),
                                       cols.size() == 5 ? std::optional<fs::path>(at(cols[4])) : std::nullopt));
        }
    } else {
        require(!f.input.empty() && !f.recon.empty() && !f.truth.empty(), ErrorCode::kConfig,
                "give --input, --recon and --truth, or --list");
        images.push_back(score_one(fs::path(f.input).stem().string(), f.input, f.recon, f.truth,
                                   f.eval.empty() ? std::nullopt : std::optional<fs::path>(f.eval)));
    }
    const ApResult result = dataset_ap(images);
    std::ostringstream csv;
    write_ap_csv(result, csv);
    if (f.out.empty()) {
        std::cout << csv.str();
    } else {
        write_file(f.out, csv.str());
    }
    return 0;
}

struct PlotFlags {
    std::string csv;
    std::string kind = "line";
    std::string out;
};

int run_plot(const PlotFlags& f) {
    PlotKind kind;
    try {
        kind = parse_plot_kind(f.kind);
    } catch (const Error& e) {
        throw Error(ErrorCode::kConfig, e.what());
    }
    const std::string svg = render_plot(read_score_csv(f.csv), kind);
    if (f.out.empty()) {
        std::cout << svg;
    } else {
        write_file(f.out, svg);
    }
    return 0;
}

int run_panels(const SweepFlags& flags) {
    SweepConfig config = resolve_sweep(ExperimentId::kExp1, flags, false);
    std::vector<std::string> texts = flags.cells.empty() ? config.panels : flags.cells;
    require(!texts.empty(), ErrorCode::kConfig, "panels: give at least one --cell or a 'panels' config entry");
    std::vector<PanelCell> cells;
    for (const auto& t : texts) cells.push_back(parse_panel_cell(t));
    config.panels = texts;
    validate(config);
    fs::create_directories(config.out);
    write_file(config.out / "config.resolved.cfg", format_config(config));
    emit_panels(config, cells);
    log("wrote " + std::to_string(cells.size()) + " panels");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"reslab: residual anomaly-map experiments on synthetic and external image data"};
    app.require_subcommand(1);
    app.add_flag("-v,--verbose", g_verbose, "Progress messages on standard error");

    PhantomFlags phantom;
    auto* c_phantom = app.add_subcommand("phantom", "Generate phantom images, masks and a manifest");
    c_phantom->add_option("--seed", phantom.seed, "Master seed");
    c_phantom->add_option("--n", phantom.n, "Number of images")->required();
    c_phantom->add_option("--size", phantom.size, "Image side length (>= 64)");
    c_phantom->add_option("--role", phantom.role, "test or train");
    c_phantom->add_option("--out", phantom.out, "Output directory")->required();

    InjectFlags inject_f;
    auto* c_inject = app.add_subcommand("inject", "Inject one synthetic anomaly into an image");
    c_inject->add_option("--image", inject_f.image, "Input .f32g")->required()->check(CLI::ExistingFile);
    c_inject->add_option("--mask", inject_f.mask, "Object mask .maskg (default: non-zero pixels)");
    c_inject->add_option("--kind", inject_f.kind, "intensity, sink, source or shuffle")->required();
    c_inject->add_option("--intensity", inject_f.intensity, "Anomaly intensity in [0,1] (kind intensity)");
    c_inject->add_option("--radius", inject_f.radius, "Disk radius in pixels");
    c_inject->add_option("--seed", inject_f.seed, "Seed for the region and shuffle");
    c_inject->add_option("--row", inject_f.row, "Fixed center row (with --col)");
    c_inject->add_option("--col", inject_f.col, "Fixed center column (with --row)");
    c_inject->add_option("--out", inject_f.out, "Output directory")->required();
    c_inject->add_option("--stem", inject_f.stem, "Output file stem");

    FitFlags fit;
    auto* c_fit = app.add_subcommand("fit-subspace", "Fit a PCA subspace reconstructor");
    c_fit->add_option("--train-manifest", fit.train_manifest, "Training manifest");
    c_fit->add_option("--phantom-train", fit.phantom_train, "Use this many generated training phantoms");
    c_fit->add_option("--phantom-size", fit.phantom_size, "Phantom side length");
    c_fit->add_option("--phantom-seed", fit.phantom_seed, "Phantom seed");
    c_fit->add_option("--k", fit.k, "Number of principal directions");
    c_fit->add_option("--seed", fit.seed, "Seed for completing rank-deficient bases");
    c_fit->add_option("--out", fit.out, "Model header path (.json)")->required();

    ReconFlags recon;
    auto* c_recon = app.add_subcommand("reconstruct", "Reconstruct every image of a manifest");
    c_recon->add_option("--model", recon.model, "identity, blur:S, subspace-file:PATH or external:DIR")->required();
    c_recon->add_option("--manifest", recon.manifest, "Input manifest")->required()->check(CLI::ExistingFile);
    c_recon->add_option("--mode", recon.mode, "healthy or anomalous (output file suffix)");
    c_recon->add_option("--out", recon.out, "Output directory")->required();

    ScoreFlags score;
    auto* c_score = app.add_subcommand("score", "Average precision of residual maps");
    c_score->add_option("--input", score.input, "Anomalous image .f32g");
    c_score->add_option("--recon", score.recon, "Reconstruction .f32g");
    c_score->add_option("--truth", score.truth, "Ground-truth anomaly mask .maskg");
    c_score->add_option("--eval", score.eval, "Evaluation mask .maskg (default: full image)");
    c_score->add_option("--list", score.list, "Tab-separated id, input, recon, truth[, eval] per line");
    c_score->add_option("--out", score.out, "CSV output (default: standard output)");

    SweepFlags exp1_f, exp2_f, exp3_f, histeq_f, panels_f;
    auto* c_exp1 = app.add_subcommand("exp1", "Intensity x blur sweep");
    add_sweep_flags(c_exp1, exp1_f);
    auto* c_exp2 = app.add_subcommand("exp2", "Deformation and shuffle anomalies across blur");
    add_sweep_flags(c_exp2, exp2_f);
    auto* c_exp3 = app.add_subcommand("exp3", "Reconstructor sweep in healthy and/or anomalous mode");
    add_sweep_flags(c_exp3, exp3_f);
    auto* c_histeq = app.add_subcommand("histeq", "Intensity x blur sweep on histogram-equalized images");
    add_sweep_flags(c_histeq, histeq_f);
    auto* c_panels = app.add_subcommand("panels", "Input | reconstruction | residual sample panels");
    add_sweep_flags(c_panels, panels_f);
    c_panels->add_option("--cell", panels_f.cells, "<image>/<kind>/<intensity>/<model>/<mode> (repeatable)");

    PlotFlags plot;
    auto* c_plot = app.add_subcommand("plot", "Render an SVG from a score table");
    c_plot->add_option("--csv", plot.csv, "Score table CSV")->required()->check(CLI::ExistingFile);
    c_plot->add_option("--kind", plot.kind, "line, heatmap or scatter");
    c_plot->add_option("--out", plot.out, "SVG output (default: standard output)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, std::cout, std::cerr);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, std::cout, std::cerr);
    } catch (const CLI::ParseError& e) {
        app.exit(e, std::cerr, std::cerr);
        return 1;
    }

    try {
        if (c_phantom->parsed()) return run_phantom(phantom);
        if (c_inject->parsed()) return run_inject(inject_f);
        if (c_fit->parsed()) return run_fit(fit);
        if (c_recon->parsed()) return run_reconstruct(recon);
        if (c_score->parsed()) return run_score(score);
        if (c_exp1->parsed()) return run_sweep(ExperimentId::kExp1, exp1_f);
        if (c_exp2->parsed()) return run_sweep(ExperimentId::kExp2, exp2_f);
        if (c_exp3->parsed()) return run_sweep(ExperimentId::kExp3Healthy, exp3_f);
        if (c_histeq->parsed()) return run_sweep(ExperimentId::kExp1Histeq, histeq_f);
        if (c_panels->parsed()) return run_panels(panels_f);
        if (c_plot->parsed()) return run_plot(plot);
    } catch (const Error& e) {
        std::cerr << "reslab: error [" << to_string(e.code()) << "]: " << e.what() << '\n';
        return e.code() == ErrorCode::kConfig ? 1 : 2;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "reslab: error [io]: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "reslab: internal error: " << e.what() << '\n';
        return 3;
    }
    std::cerr << "reslab: no subcommand\n";
    return 1;
}
