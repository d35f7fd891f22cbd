#include "reslab/harness.hpp"

#include "reslab/blur.hpp"
#include "reslab/errors.hpp"
#include "reslab/intensity.hpp"
#include "reslab/parallel.hpp"
#include "reslab/phantom.hpp"
#include "reslab/plot.hpp"
#include "reslab/rng.hpp"
#include "reslab/subspace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

namespace reslab {

namespace {

std::string format_number(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string format_fixed(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10f", v);
    return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorCode::kIo, path.string() + ": cannot open for writing");
    out << text;
    out.flush();
    require(static_cast<bool>(out), ErrorCode::kIo, path.string() + ": write failed");
}

template <typename Fn>
auto for_image(const std::string& stem, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const Error& e) {
        throw Error(e.code(), "image '" + stem + "': " + e.what());
    }
}

const BinaryMask* eval_mask_for(const PreparedImage& img, EvalMaskPolicy policy) {
    return policy == EvalMaskPolicy::kObject ? &img.object : nullptr;
}

bool is_exp3(ExperimentId id) { return id == ExperimentId::kExp3Healthy || id == ExperimentId::kExp3Anomalous; }

ExperimentId exp3_id(ReconMode mode) {
    return mode == ReconMode::kHealthy ? ExperimentId::kExp3Healthy : ExperimentId::kExp3Anomalous;
}

// Healthy-mode scoring. The reconstruction ignores the anomaly and every
// injection leaves pixels outside the disk untouched, so the negatives of one
// reconstruction are ranked once and reused for every injection.
// Result index: injection * recons.size() + recon.
std::vector<double> score_healthy(const PreparedImage& img, const std::vector<Grid>& recons,
                                  const std::vector<InjectionRecord>& injections, const BinaryMask* eval) {
    std::vector<std::size_t> pos_idx, neg_idx;
    for (std::size_t p = 0; p < img.image.size(); ++p) {
        if (eval && !(*eval)[p]) continue;
        (img.truth[p] ? pos_idx : neg_idx).push_back(p);
    }
    std::vector<double> ap(injections.size() * recons.size());
    for (std::size_t r = 0; r < recons.size(); ++r) {
        const Grid& rec = recons[r];
        std::vector<float> neg;
        neg.reserve(neg_idx.size());
        for (auto p : neg_idx) neg.push_back(std::abs(img.image[p] - rec[p]));
        const NegativeRanking ranking(std::move(neg));
        for (std::size_t j = 0; j < injections.size(); ++j) {
            const Grid& x = injections[j].image;
            std::vector<float> pos;
            pos.reserve(pos_idx.size());
            for (auto p : pos_idx) pos.push_back(std::abs(x[p] - rec[p]));
            ap[j * recons.size() + r] = ranking.average_precision(std::move(pos));
        }
    }
    return ap;
}

// Per-image values of one cell, aggregated in image order.
struct CellStats {
    double mean = 0.0;
    double std = 0.0;
};

CellStats aggregate(const std::vector<std::vector<double>>& per_image, std::size_t cell) {
    std::vector<double> values;
    values.reserve(per_image.size());
    for (const auto& v : per_image) values.push_back(v[cell]);
    const ApResult r = summarize_ap(std::vector<std::string>(values.size()), std::move(values));
    return {r.mean, r.std_dev()};
}

double column_mean(const std::vector<std::vector<double>>& per_image, std::size_t col) {
    double sum = 0.0;
    for (const auto& v : per_image) sum += v[col];
    return sum / static_cast<double>(per_image.size());
}

// Exp1 core: AP per (intensity, sigma) cell, index i * |sigmas| + s, plus the
// per-sigma healthy reconstruction error.
struct BlurSweep {
    std::vector<std::vector<double>> ap;
    std::vector<std::vector<double>> err;
};

BlurSweep blur_sweep(const SweepConfig& config, const std::vector<PreparedImage>& imgs, unsigned threads) {
    BlurSweep out;
    out.ap.resize(imgs.size());
    out.err.resize(imgs.size());
    parallel_for(imgs.size(), threads, [&](std::size_t n) {
        const PreparedImage& img = imgs[n];
        for_image(img.stem, [&] {
            std::vector<Grid> recons;
            std::vector<double> err;
            for (double sigma : config.sigmas) {
                recons.push_back(gaussian_blur(img.image, sigma));
                err.push_back(masked_mean_abs_diff(img.image, recons.back(), img.object));
            }
            std::vector<InjectionRecord> injections;
            for (double I : config.intensities) injections.push_back(inject_intensity(img.image, img.region, I));
            out.ap[n] = score_healthy(img, recons, injections, eval_mask_for(img, config.eval_mask));
            out.err[n] = std::move(err);
        });
    });
    return out;
}

std::vector<ScoreRow> blur_sweep_rows(const SweepConfig& config, ExperimentId id, const BlurSweep& sweep) {
    std::vector<ScoreRow> rows;
    const std::size_t ns = config.sigmas.size();
    for (std::size_t s = 0; s < ns; ++s) {
        const double err = column_mean(sweep.err, s);
        for (std::size_t i = 0; i < config.intensities.size(); ++i) {
            const CellStats st = aggregate(sweep.ap, i * ns + s);
            ScoreRow row;
            row.experiment = id;
            row.kind = to_string(AnomalyKind::kIntensity);
            row.intensity = config.intensities[i];
            row.sigma = config.sigmas[s];
            row.model = "blur";
            row.mode = to_string(ReconMode::kHealthy);
            row.mean_ap = st.mean;
            row.ap_std = st.std;
            row.mean_recon_err = err;
            row.n_images = sweep.ap.size();
            row.seed = config.seed;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

struct LoadedModel {
    std::string name;
    std::optional<std::size_t> k;
    std::optional<double> sigma;
    Reconstructor recon;
};

LoadedModel load_model(const ModelSpec& spec, const SweepConfig& config, const Dataset& train) {
    switch (spec.kind) {
        case ModelSpec::Kind::kIdentity:
            return {"identity", std::nullopt, std::nullopt, IdentityModel{}};
        case ModelSpec::Kind::kBlur:
            return {"blur", std::nullopt, spec.sigma, BlurOracle{spec.sigma}};
        case ModelSpec::Kind::kSubspace: {
            require(!train.empty(), ErrorCode::kEmptyInput, "subspace:" + std::to_string(spec.k) + ": no training data");
            auto m = std::make_shared<const SubspaceModel>(
                fit_subspace(train, spec.k, derive_seed(config.seed, "subspace", spec.k)));
            return {"subspace", spec.k, std::nullopt, m};
        }
        case ModelSpec::Kind::kSubspaceFile: {
            auto m = std::make_shared<const SubspaceModel>(load_subspace(spec.path));
            return {"subspace", m->k(), std::nullopt, m};
        }
        case ModelSpec::Kind::kExternal: {
            ExternalReconSource src{spec.path, spec.name.empty() ? spec.path.filename().string() : spec.name};
            return {src.name, std::nullopt, std::nullopt, src};
        }
    }
    throw Error(ErrorCode::kInvalidArgument, "unsupported model " + spec.text());
}

std::string model_label(const std::string& name, std::optional<std::size_t> k, std::optional<double> sigma) {
    std::string label = name;
    if (k) label += ":" + std::to_string(*k);
    if (sigma) label += ":" + format_number(*sigma);
    return label;
}

bool in_trough(double I) { return I >= kTroughLow - 1e-9 && I <= kTroughHigh + 1e-9; }

// Throws one error naming every absent external reconstruction.
void check_external_inputs(const std::vector<LoadedModel>& models, const std::vector<PreparedImage>& imgs,
                           const SweepConfig& config) {
    std::vector<std::string> missing;
    for (const auto& m : models) {
        if (!std::holds_alternative<ExternalReconSource>(m.recon)) continue;
        std::vector<std::string> healthy_keys, anomalous_keys;
        for (const auto& img : imgs) {
            healthy_keys.push_back(img.stem);
            for (double I : config.intensities) anomalous_keys.push_back(injection_key(img.stem, I));
        }
        const auto& src = std::get<ExternalReconSource>(m.recon);
        for (const auto& key : missing_reconstructions(m.recon, healthy_keys, ReconMode::kHealthy)) {
            missing.push_back(src.path_for(key, ReconMode::kHealthy).string());
        }
        if (std::find(config.modes.begin(), config.modes.end(), ReconMode::kAnomalous) != config.modes.end()) {
            for (const auto& key : missing_reconstructions(m.recon, anomalous_keys, ReconMode::kAnomalous)) {
                missing.push_back(src.path_for(key, ReconMode::kAnomalous).string());
            }
        }
    }
    if (missing.empty()) return;
    std::string msg = std::to_string(missing.size()) + " external reconstruction(s) missing:";
    for (const auto& p : missing) msg += "\n  " + p;
    throw Error(ErrorCode::kMissingReconstruction, msg);
}

std::string summaries_csv(const std::vector<ModelSummary>& summaries) {
    std::string out = "model,k,sigma,mode,mean_recon_err,mean_ap,trough_ap\n";
    for (const auto& s : summaries) {
        out += s.model + ',' + (s.k ? std::to_string(*s.k) : "") + ',' + (s.sigma ? format_number(*s.sigma) : "") +
               ',' + to_string(s.mode) + ',' + format_fixed(s.mean_recon_err) + ',' + format_fixed(s.mean_ap) + ',' +
               format_fixed(s.trough_ap) + '\n';
    }
    return out;
}

std::string best_sigma_csv(const std::vector<BestSigma>& best) {
    std::string out = "model,k,mode,best_sigma,l1_distance\n";
    for (const auto& b : best) {
        out += b.model + ',' + (b.k ? std::to_string(*b.k) : "") + ',' + to_string(b.mode) + ',' +
               format_number(b.match.best_sigma) + ',' + format_fixed(b.match.best_distance) + '\n';
    }
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

void export_injection_files(const SweepConfig& config, const std::vector<PreparedImage>& imgs) {
    const auto dir = config.out / "injections";
    std::filesystem::create_directories(dir);
    // The manifest lets `reconstruct` (or an external model) walk the inputs in order.
    DatasetManifest manifest;
    for (const auto& img : imgs) {
        for (double I : config.intensities) {
            const std::string key = injection_key(img.stem, I);
            write_injection(inject_intensity(img.image, img.region, I), dir, key, img.stem);
            manifest.entries.push_back({dir / (key + ".f32g"), std::nullopt});
        }
    }
    write_manifest(manifest, dir / "manifest.txt");
}

void write_plot(const std::filesystem::path& path, const std::vector<ScoreRow>& rows, PlotKind kind) {
    write_text(path, render_plot(rows, kind));
}

}  // namespace

std::string ScoreRow::series() const {
    if (experiment == ExperimentId::kExp2) return kind;
    return model_label(model, k, sigma);
}

void write_score_csv(const std::vector<ScoreRow>& rows, std::ostream& out) {
    out << "experiment,kind,intensity,sigma,model,mode,k,mean_ap,ap_std,mean_recon_err,n_images,seed\n";
    for (const auto& r : rows) {
        out << to_string(r.experiment) << ',' << r.kind << ',' << (r.intensity ? format_number(*r.intensity) : "")
            << ',' << (r.sigma ? format_number(*r.sigma) : "") << ',' << r.model << ',' << r.mode << ','
            << (r.k ? std::to_string(*r.k) : "") << ',' << format_fixed(r.mean_ap) << ',' << format_fixed(r.ap_std)
            << ',' << (r.mean_recon_err ? format_fixed(*r.mean_recon_err) : "") << ',' << r.n_images << ','
            << r.seed << '\n';
    }
}

std::vector<ScoreRow> read_score_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorCode::kMissingFile, path.string() + ": cannot open score table");
    std::string line;
    std::size_t lineno = 0;
    std::vector<ScoreRow> rows;
    const auto fail = [&](const std::string& msg) {
        throw Error(ErrorCode::kInvalidArgument, path.string() + ":" + std::to_string(lineno) + ": " + msg);
    };
    const auto number = [&](const std::string& s) {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size()) fail("bad number '" + s + "'");
        return v;
    };
    const auto integer = [&](const std::string& s) {
        std::uint64_t v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size()) fail("bad integer '" + s + "'");
        return v;
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (lineno == 1) {
            if (line.rfind("experiment,", 0) != 0) fail("missing score table header");
            continue;
        }
        const auto f = split_csv_line(line);
        if (f.size() != 12) fail("expected 12 fields, got " + std::to_string(f.size()));
        ScoreRow r;
        try {
            r.experiment = parse_experiment_id(f[0]);
        } catch (const Error& e) {
            fail(e.what());
        }
        r.kind = f[1];
        if (!f[2].empty()) r.intensity = number(f[2]);
        if (!f[3].empty()) r.sigma = number(f[3]);
        r.model = f[4];
        r.mode = f[5];
        if (!f[6].empty()) r.k = integer(f[6]);
        r.mean_ap = number(f[7]);
        r.ap_std = number(f[8]);
        if (!f[9].empty()) r.mean_recon_err = number(f[9]);
        r.n_images = integer(f[10]);
        r.seed = integer(f[11]);
        rows.push_back(std::move(r));
    }
    return rows;
}

Dataset load_test_data(const SweepConfig& config) {
    if (config.test.manifest) return load_dataset(read_manifest(*config.test.manifest));
    return make_phantom_set(config.phantom_seed, DatasetRole::kTest, config.test.phantom_count, config.phantom_size);
}

Dataset load_train_data(const SweepConfig& config) {
    if (config.train.manifest) return load_dataset(read_manifest(*config.train.manifest));
    return make_phantom_set(config.phantom_seed, DatasetRole::kTrain, config.train.phantom_count, config.phantom_size);
}

std::vector<PreparedImage> prepare_images(const Dataset& data, double radius, std::uint64_t seed) {
    require(!data.empty(), ErrorCode::kEmptyInput, "test set is empty");
    std::vector<PreparedImage> out;
    out.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Sample& s = data[i];
        out.push_back(for_image(s.stem, [&] {
            PreparedImage p{s.stem, s.image, s.object_mask(), {}, {}};
            p.region = sample_region(p.object, radius, derive_seed(seed, "region", i));
            p.truth = rasterize_disk(p.region, p.image.height(), p.image.width());
            return p;
        }));
    }
    return out;
}

double mean_object_intensity(const Dataset& data) {
    require(!data.empty(), ErrorCode::kEmptyInput, "object mean of an empty dataset");
    double sum = 0.0;
    for (const auto& s : data) {
        sum += for_image(s.stem, [&] { return object_stats(s.image, s.object_mask()).mean; });
    }
    return sum / static_cast<double>(data.size());
}

std::string injection_key(const std::string& stem, double intensity) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", intensity);
    return stem + "__intensity_" + buf;
}

ExperimentResult run_exp1(const SweepConfig& config) { return run_exp1(config, load_test_data(config)); }
ExperimentResult run_exp2(const SweepConfig& config) { return run_exp2(config, load_test_data(config)); }
ExperimentResult run_histeq_variant(const SweepConfig& config) {
    return run_histeq_variant(config, load_test_data(config));
}

ExperimentResult run_exp3(const SweepConfig& config) {
    const bool needs_train = std::any_of(config.models.begin(), config.models.end(),
                                         [](const ModelSpec& m) { return m.kind == ModelSpec::Kind::kSubspace; });
    return run_exp3(config, load_test_data(config), needs_train ? load_train_data(config) : Dataset{});
}

ExperimentResult run_exp1(const SweepConfig& config, const Dataset& test) {
    const auto imgs = prepare_images(test, config.radius, config.seed);
    const BlurSweep sweep = blur_sweep(config, imgs, resolve_thread_count(config.threads));
    return {blur_sweep_rows(config, ExperimentId::kExp1, sweep), {}, {}};
}

ExperimentResult run_histeq_variant(const SweepConfig& config, const Dataset& test) {
    Dataset equalized;
    equalized.reserve(test.size());
    for (const auto& s : test) {
        require(s.mask.has_value(), ErrorCode::kInvalidMask,
                "image '" + s.stem + "': histogram equalization needs an object mask");
        equalized.push_back(Sample{s.stem, for_image(s.stem, [&] { return equalize_masked(s.image, *s.mask); }),
                                   s.mask});
    }
    const auto imgs = prepare_images(equalized, config.radius, config.seed);
    const BlurSweep sweep = blur_sweep(config, imgs, resolve_thread_count(config.threads));
    return {blur_sweep_rows(config, ExperimentId::kExp1Histeq, sweep), {}, {}};
}

ExperimentResult run_exp2(const SweepConfig& config, const Dataset& test) {
    const auto imgs = prepare_images(test, config.radius, config.seed);
    const double reference = config.reference_intensity ? *config.reference_intensity : mean_object_intensity(test);
    const std::size_t ns = config.sigmas.size();
    const char* id = to_string(ExperimentId::kExp2);

    std::vector<std::vector<double>> ap(imgs.size()), err(imgs.size());
    parallel_for(imgs.size(), resolve_thread_count(config.threads), [&](std::size_t n) {
        const PreparedImage& img = imgs[n];
        for_image(img.stem, [&] {
            std::vector<Grid> recons;
            for (double sigma : config.sigmas) {
                recons.push_back(gaussian_blur(img.image, sigma));
                err[n].push_back(masked_mean_abs_diff(img.image, recons.back(), img.object));
            }
            std::vector<InjectionRecord> injections;
            for (AnomalyKind kind : config.kinds) {
                injections.push_back(
                    inject(kind, img.image, img.region, reference, derive_seed(config.seed, id, n, to_string(kind))));
            }
            ap[n] = score_healthy(img, recons, injections, eval_mask_for(img, config.eval_mask));
        });
    });

    ExperimentResult result;
    for (std::size_t q = 0; q < config.kinds.size(); ++q) {
        for (std::size_t s = 0; s < ns; ++s) {
            const CellStats st = aggregate(ap, q * ns + s);
            ScoreRow row;
            row.experiment = ExperimentId::kExp2;
            row.kind = to_string(config.kinds[q]);
            if (config.kinds[q] == AnomalyKind::kIntensity) row.intensity = reference;
            row.sigma = config.sigmas[s];
            row.model = "blur";
            row.mode = to_string(ReconMode::kHealthy);
            row.mean_ap = st.mean;
            row.ap_std = st.std;
            row.mean_recon_err = column_mean(err, s);
            row.n_images = imgs.size();
            row.seed = config.seed;
            result.rows.push_back(std::move(row));
        }
    }
    return result;
}

ExperimentResult run_exp3(const SweepConfig& config, const Dataset& test, const Dataset& train) {
    const auto imgs = prepare_images(test, config.radius, config.seed);
    const unsigned threads = resolve_thread_count(config.threads);
    const std::size_t ni = config.intensities.size();
    const bool want_healthy =
        std::find(config.modes.begin(), config.modes.end(), ReconMode::kHealthy) != config.modes.end();
    const bool want_anomalous =
        std::find(config.modes.begin(), config.modes.end(), ReconMode::kAnomalous) != config.modes.end();

    std::vector<LoadedModel> models;
    for (const auto& spec : config.models) models.push_back(load_model(spec, config, train));
    check_external_inputs(models, imgs, config);

    struct ModelScores {
        std::vector<std::vector<double>> healthy, anomalous;
        std::vector<double> err;
    };
    std::vector<ModelScores> scores(models.size());
    for (std::size_t m = 0; m < models.size(); ++m) {
        const LoadedModel& model = models[m];
        ModelScores& sc = scores[m];
        sc.healthy.resize(imgs.size());
        sc.anomalous.resize(imgs.size());
        sc.err.resize(imgs.size());
        parallel_for(imgs.size(), threads, [&](std::size_t n) {
            const PreparedImage& img = imgs[n];
            for_image(img.stem, [&] {
                const BinaryMask* eval = eval_mask_for(img, config.eval_mask);
                Grid healthy = reconstruct(model.recon, img.image, img.stem, ReconMode::kHealthy);
                sc.err[n] = masked_mean_abs_diff(img.image, healthy, img.object);
                std::vector<InjectionRecord> injections;
                for (double I : config.intensities) injections.push_back(inject_intensity(img.image, img.region, I));
                if (want_healthy) sc.healthy[n] = score_healthy(img, {std::move(healthy)}, injections, eval);
                if (!want_anomalous) return;
                std::vector<Grid> recons;
                if (const auto* sub = std::get_if<std::shared_ptr<const SubspaceModel>>(&model.recon)) {
                    std::vector<Grid> inputs;
                    for (const auto& inj : injections) inputs.push_back(inj.image);
                    recons = (*sub)->reconstruct(inputs);
                } else {
                    for (std::size_t i = 0; i < ni; ++i) {
                        recons.push_back(reconstruct(model.recon, injections[i].image,
                                                     injection_key(img.stem, config.intensities[i]),
                                                     ReconMode::kAnomalous));
                    }
                }
                for (std::size_t i = 0; i < ni; ++i) {
                    sc.anomalous[n].push_back(
                        average_precision(residual_map(injections[i].image, recons[i]), injections[i].truth, eval));
                }
            });
        });
    }

    std::optional<std::vector<SigmaCurve>> blur_curves;
    if (config.match_sigma) {
        const BlurSweep sweep = blur_sweep(config, imgs, threads);
        blur_curves.emplace();
        for (std::size_t s = 0; s < config.sigmas.size(); ++s) {
            SigmaCurve c{config.sigmas[s], {config.intensities, {}}};
            for (std::size_t i = 0; i < ni; ++i) {
                c.curve.ap.push_back(aggregate(sweep.ap, i * config.sigmas.size() + s).mean);
            }
            blur_curves->push_back(std::move(c));
        }
    }

    ExperimentResult result;
    for (ReconMode mode : config.modes) {
        for (std::size_t m = 0; m < models.size(); ++m) {
            const LoadedModel& model = models[m];
            const auto& per_image = mode == ReconMode::kHealthy ? scores[m].healthy : scores[m].anomalous;
            double err_sum = 0.0;
            for (double e : scores[m].err) err_sum += e;
            const double err = err_sum / static_cast<double>(imgs.size());

            ModelSummary summary{model.name, model.k, model.sigma, mode, err, 0.0, 0.0};
            ApCurve curve{config.intensities, {}};
            std::size_t trough_n = 0;
            for (std::size_t i = 0; i < ni; ++i) {
                const CellStats st = aggregate(per_image, i);
                ScoreRow row;
                row.experiment = exp3_id(mode);
                row.kind = to_string(AnomalyKind::kIntensity);
                row.intensity = config.intensities[i];
                row.sigma = model.sigma;
                row.model = model.name;
                row.mode = to_string(mode);
                row.k = model.k;
                row.mean_ap = st.mean;
                row.ap_std = st.std;
                row.mean_recon_err = err;
                row.n_images = imgs.size();
                row.seed = config.seed;
                result.rows.push_back(std::move(row));

                curve.ap.push_back(st.mean);
                summary.mean_ap += st.mean;
                if (in_trough(config.intensities[i])) {
                    summary.trough_ap += st.mean;
                    ++trough_n;
                }
            }
            summary.mean_ap /= static_cast<double>(ni);
            summary.trough_ap = trough_n ? summary.trough_ap / static_cast<double>(trough_n) : 0.0;
            result.summaries.push_back(summary);
            if (blur_curves) {
                result.best_sigma.push_back({model.name, model.k, mode, best_matching_sigma(curve, *blur_curves)});
            }
        }
    }
    return result;
}

ExperimentResult run_experiment(const SweepConfig& config) {
    validate(config);
    std::filesystem::create_directories(config.out);
    write_text(config.out / "config.resolved.cfg", format_config(config));

    const Dataset test = load_test_data(config);
    Dataset train;
    const bool needs_train = std::any_of(config.models.begin(), config.models.end(),
                                         [](const ModelSpec& m) { return m.kind == ModelSpec::Kind::kSubspace; });
    if (is_exp3(config.experiment) && needs_train) train = load_train_data(config);
    for (const auto& text : config.panels) {
        if (parse_panel_cell(text).model.kind == ModelSpec::Kind::kSubspace && train.empty()) {
            train = load_train_data(config);
        }
    }

    ExperimentResult result;
    switch (config.experiment) {
        case ExperimentId::kExp1: result = run_exp1(config, test); break;
        case ExperimentId::kExp2: result = run_exp2(config, test); break;
        case ExperimentId::kExp1Histeq: result = run_histeq_variant(config, test); break;
        case ExperimentId::kExp3Healthy:
        case ExperimentId::kExp3Anomalous: result = run_exp3(config, test, train); break;
    }

    const std::string id = is_exp3(config.experiment) ? "exp3" : to_string(config.experiment);
    std::ostringstream csv;
    write_score_csv(result.rows, csv);
    write_text(config.out / (id + ".csv"), csv.str());

    if (is_exp3(config.experiment)) {
        for (ReconMode mode : config.modes) {
            std::vector<ScoreRow> rows;
            for (const auto& r : result.rows) {
                if (r.experiment == exp3_id(mode)) rows.push_back(r);
            }
            const std::string stem = to_string(exp3_id(mode));
            write_plot(config.out / (stem + "_lines.svg"), rows, PlotKind::kLine);
            write_plot(config.out / (stem + "_scatter.svg"), rows, PlotKind::kScatter);
        }
        write_text(config.out / "exp3_error_vs_ap.csv", summaries_csv(result.summaries));
        if (config.match_sigma) write_text(config.out / "exp3_best_sigma.csv", best_sigma_csv(result.best_sigma));
        if (config.export_injections) {
            export_injection_files(config, prepare_images(test, config.radius, config.seed));
        }
    } else {
        write_plot(config.out / (id + "_lines.svg"), result.rows, PlotKind::kLine);
        if (config.experiment != ExperimentId::kExp2) {
            write_plot(config.out / (id + "_heatmap.svg"), result.rows, PlotKind::kHeatmap);
        }
    }

    if (!config.panels.empty()) {
        std::vector<PanelCell> cells;
        for (const auto& text : config.panels) cells.push_back(parse_panel_cell(text));
        emit_panels(config, cells, test, train);
    }
    return result;
}

PanelCell parse_panel_cell(const std::string& text) {
    std::vector<std::string> parts;
    std::string part;
    std::istringstream in(text);
    while (std::getline(in, part, '/')) parts.push_back(part);
    const auto fail = [&](const std::string& why) -> PanelCell {
        throw Error(ErrorCode::kInvalidArgument, "panel cell '" + text + "': " + why);
    };
    // An absolute path inside the model spec (external:/x/y) also contains '/'; rejoin it.
    if (parts.size() > 5) {
        std::string model = parts[3];
        for (std::size_t i = 4; i + 1 < parts.size(); ++i) model += "/" + parts[i];
        parts = {parts[0], parts[1], parts[2], model, parts.back()};
    }
    if (parts.size() != 5) return fail("expected <image>/<kind>/<intensity>/<model>/<mode>");
    PanelCell cell;
    try {
        std::size_t used = 0;
        const unsigned long long idx = std::stoull(parts[0], &used);
        if (used != parts[0].size()) return fail("bad image index");
        cell.image = static_cast<std::size_t>(idx);
        cell.kind = parse_anomaly_kind(parts[1]);
        cell.intensity = std::stod(parts[2], &used);
        if (used != parts[2].size() || cell.intensity < 0.0 || cell.intensity > 1.0) return fail("bad intensity");
        cell.model = parse_model_spec(parts[3]);
        cell.mode = parse_recon_mode(parts[4]);
    } catch (const Error& e) {
        return fail(e.what());
    } catch (const std::exception&) {
        return fail("malformed number");
    }
    return cell;
}

std::vector<std::uint8_t> encode_montage(const std::vector<const Grid*>& tiles) {
    require(!tiles.empty(), ErrorCode::kEmptyInput, "montage: no tiles");
    const std::size_t h = tiles.front()->height(), w = tiles.front()->width();
    for (const Grid* t : tiles) require_same_shape(tiles.front()->shape(), t->shape(), "montage");
    char header[64];
    const int len = std::snprintf(header, sizeof header, "P5\n%zu %zu\n255\n", w * tiles.size(), h);
    std::vector<std::uint8_t> out(header, header + len);
    out.reserve(out.size() + h * w * tiles.size());
    for (std::size_t r = 0; r < h; ++r) {
        for (const Grid* t : tiles) {
            for (std::size_t c = 0; c < w; ++c) {
                const double v = std::clamp(static_cast<double>((*t)(r, c)), 0.0, 1.0);
                out.push_back(static_cast<std::uint8_t>(std::lround(v * 255.0)));
            }
        }
    }
    return out;
}

void emit_panels(const SweepConfig& config, const std::vector<PanelCell>& cells) {
    const Dataset test = load_test_data(config);
    const bool needs_train = std::any_of(cells.begin(), cells.end(), [](const PanelCell& c) {
        return c.model.kind == ModelSpec::Kind::kSubspace;
    });
    emit_panels(config, cells, test, needs_train ? load_train_data(config) : Dataset{});
}

void emit_panels(const SweepConfig& config, const std::vector<PanelCell>& cells, const Dataset& test,
                 const Dataset& train) {
    require(!cells.empty(), ErrorCode::kInvalidArgument, "panels: no cells given");
    const auto imgs = prepare_images(test, config.radius, config.seed);
    const auto dir = config.out / "panels";
    std::filesystem::create_directories(dir);
    const double reference = config.reference_intensity ? *config.reference_intensity : mean_object_intensity(test);

    std::map<std::string, LoadedModel> model_cache;
    std::string index;
    for (std::size_t n = 0; n < cells.size(); ++n) {
        const PanelCell& cell = cells[n];
        require(cell.image < imgs.size(), ErrorCode::kInvalidArgument,
                "panel cell " + std::to_string(n) + ": image index " + std::to_string(cell.image) +
                    " out of range (" + std::to_string(imgs.size()) + " images)");
        const PreparedImage& img = imgs[cell.image];
        const std::string spec = cell.model.text();
        if (!model_cache.count(spec)) model_cache.emplace(spec, load_model(cell.model, config, train));
        const LoadedModel& model = model_cache.at(spec);

        // Same anomaly as the experiments: exp1/exp3 disk for intensity, exp2 seeds otherwise.
        const double intensity = cell.kind == AnomalyKind::kIntensity ? cell.intensity : reference;
        const InjectionRecord inj =
            inject(cell.kind, img.image, img.region, intensity,
                   derive_seed(config.seed, to_string(ExperimentId::kExp2), cell.image, to_string(cell.kind)));
        const std::string key = cell.kind == AnomalyKind::kIntensity
                                    ? injection_key(img.stem, intensity)
                                    : img.stem + "__" + to_string(cell.kind);
        const Grid recon = for_image(img.stem, [&] {
            return cell.mode == ReconMode::kHealthy ? reconstruct(model.recon, img.image, img.stem, cell.mode)
                                                    : reconstruct(model.recon, inj.image, key, cell.mode);
        });
        const Grid residual = residual_map(inj.image, recon).scores;

        char stem[32];
        std::snprintf(stem, sizeof stem, "panel_%02zu", n);
        write_grid(inj.image, dir / (std::string(stem) + "_input.f32g"));
        write_grid(recon, dir / (std::string(stem) + "_recon.f32g"));
        write_grid(residual, dir / (std::string(stem) + "_residual.f32g"));
        const auto pgm = encode_montage({&inj.image, &recon, &residual});
        write_text(dir / (std::string(stem) + ".pgm"), std::string(pgm.begin(), pgm.end()));

        index += std::string(stem) + '\t' + img.stem + '\t' + to_string(cell.kind) + '\t' + format_number(intensity) +
                 '\t' + spec + '\t' + to_string(cell.mode) + '\n';
    }
    write_text(dir / "index.txt", index);
}

}  // namespace reslab
