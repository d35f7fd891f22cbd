#include "reslab/config.hpp"

#include "reslab/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace reslab {

namespace {

std::string_view trim(std::string_view s) {
    const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

[[noreturn]] void config_error(std::string_view key, const std::string& message) {
    throw Error(ErrorCode::kConfig, "config '" + std::string(key) + "': " + message);
}

std::vector<std::string_view> split_list(std::string_view value, char sep = ',') {
    std::vector<std::string_view> items;
    while (true) {
        const auto pos = value.find(sep);
        const auto item = trim(value.substr(0, pos));
        if (!item.empty()) items.push_back(item);
        if (pos == std::string_view::npos) break;
        value.remove_prefix(pos + 1);
    }
    return items;
}

double parse_double(std::string_view key, std::string_view text) {
    text = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
        config_error(key, "expected a number, got '" + std::string(text) + "'");
    }
    return v;
}

std::uint64_t parse_unsigned(std::string_view key, std::string_view text) {
    text = trim(text);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        config_error(key, "expected a non-negative integer, got '" + std::string(text) + "'");
    }
    return v;
}

bool parse_bool(std::string_view key, std::string_view text) {
    text = trim(text);
    if (text == "true" || text == "yes" || text == "1") return true;
    if (text == "false" || text == "no" || text == "0") return false;
    config_error(key, "expected true or false, got '" + std::string(text) + "'");
}

std::vector<double> parse_grid(std::string_view key, std::string_view value) {
    const auto parts = split_list(value, ':');
    if (parts.size() == 3 && value.find(',') == std::string_view::npos) {
        const double step = parse_double(key, parts[2]);
        if (!(step > 0.0)) config_error(key, "range step must be positive");
        return expand_range(parse_double(key, parts[0]), parse_double(key, parts[1]), step);
    }
    std::vector<double> grid;
    for (auto item : split_list(value)) grid.push_back(parse_double(key, item));
    return grid;
}

std::filesystem::path resolve(const std::filesystem::path& base, std::string_view text) {
    std::filesystem::path p{std::string(trim(text))};
    if (p.is_relative() && !base.empty()) p = base / p;
    return std::filesystem::absolute(p).lexically_normal();
}

std::string format_number(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

template <typename T, typename F>
std::string join(const std::vector<T>& items, F&& fmt) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += fmt(items[i]);
    }
    return out;
}

bool strictly_ascending(const std::vector<double>& v) {
    return std::adjacent_find(v.begin(), v.end(), [](double a, double b) { return !(a < b); }) == v.end();
}

}  // namespace

const char* to_string(ExperimentId id) {
    switch (id) {
        case ExperimentId::kExp1: return "exp1";
        case ExperimentId::kExp2: return "exp2";
        case ExperimentId::kExp3Healthy: return "exp3-healthy";
        case ExperimentId::kExp3Anomalous: return "exp3-anomalous";
        case ExperimentId::kExp1Histeq: return "exp1-histeq";
    }
    return "?";
}

ExperimentId parse_experiment_id(std::string_view text) {
    for (auto id : {ExperimentId::kExp1, ExperimentId::kExp2, ExperimentId::kExp3Healthy,
                    ExperimentId::kExp3Anomalous, ExperimentId::kExp1Histeq}) {
        if (text == to_string(id)) return id;
    }
    throw Error(ErrorCode::kConfig, "unknown experiment id '" + std::string(text) + "'");
}

const char* to_string(EvalMaskPolicy policy) {
    return policy == EvalMaskPolicy::kFull ? "full" : "object";
}

EvalMaskPolicy parse_eval_mask_policy(std::string_view text) {
    if (text == "full") return EvalMaskPolicy::kFull;
    if (text == "object") return EvalMaskPolicy::kObject;
    throw Error(ErrorCode::kConfig, "eval mask policy must be 'full' or 'object', got '" + std::string(text) + "'");
}

std::string ModelSpec::text() const {
    switch (kind) {
        case Kind::kIdentity: return "identity";
        case Kind::kBlur: return "blur:" + format_number(sigma);
        case Kind::kSubspace: return "subspace:" + std::to_string(k);
        case Kind::kSubspaceFile: return "subspace-file:" + path.string();
        case Kind::kExternal: return "external:" + path.string() + (name.empty() ? "" : ":" + name);
    }
    return "?";
}

ModelSpec parse_model_spec(std::string_view text) {
    text = trim(text);
    const auto colon = text.find(':');
    const auto head = text.substr(0, colon);
    const auto rest = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
    ModelSpec m;
    if (head == "identity" && colon == std::string_view::npos) {
        m.kind = ModelSpec::Kind::kIdentity;
    } else if (head == "blur" && !rest.empty()) {
        m.kind = ModelSpec::Kind::kBlur;
        m.sigma = parse_double("models", rest);
        if (m.sigma < 0.0) config_error("models", "blur sigma must be >= 0");
    } else if (head == "subspace" && !rest.empty()) {
        m.kind = ModelSpec::Kind::kSubspace;
        m.k = parse_unsigned("models", rest);
    } else if (head == "subspace-file" && !rest.empty()) {
        m.kind = ModelSpec::Kind::kSubspaceFile;
        m.path = std::string(rest);
    } else if (head == "external" && !rest.empty()) {
        m.kind = ModelSpec::Kind::kExternal;
        const auto name_sep = rest.rfind(':');
        // A trailing ":name" is a label unless the colon belongs to a drive letter.
        if (name_sep != std::string_view::npos && name_sep > 1) {
            m.path = std::string(rest.substr(0, name_sep));
            m.name = std::string(rest.substr(name_sep + 1));
        } else {
            m.path = std::string(rest);
        }
    } else {
        config_error("models", "cannot parse model '" + std::string(text) + "'");
    }
    return m;
}

std::vector<double> expand_range(double start, double stop, double step) {
    require(step > 0.0 && std::isfinite(start) && std::isfinite(stop) && std::isfinite(step), ErrorCode::kConfig,
            "range: step must be positive and bounds finite");
    std::vector<double> out;
    const auto n = static_cast<long long>(std::floor((stop - start) / step + 1e-9));
    for (long long i = 0; i <= n; ++i) {
        // Snap to 1e-9 so 0.15 comes out as the double nearest 0.15, not 0.15000000000000002.
        out.push_back(std::round((start + static_cast<double>(i) * step) * 1e9) / 1e9);
    }
    return out;
}

SweepConfig default_config(ExperimentId id) {
    SweepConfig c;
    c.experiment = id;
    c.intensities = expand_range(0.0, 1.0, 0.05);
    c.sigmas = {0.0, 0.25, 0.5, 1.0, 2.0, 3.0, 5.0};
    c.kinds = {AnomalyKind::kSink, AnomalyKind::kSource, AnomalyKind::kShuffle, AnomalyKind::kIntensity};
    for (std::size_t k : {4, 16, 64, 256}) {
        ModelSpec m;
        m.kind = ModelSpec::Kind::kSubspace;
        m.k = k;
        c.models.push_back(m);
    }
    if (id == ExperimentId::kExp3Anomalous) {
        c.modes = {ReconMode::kAnomalous};
    } else {
        c.modes = {ReconMode::kHealthy};
    }
    return c;
}

void apply_setting(SweepConfig& c, std::string_view key, std::string_view value, const std::filesystem::path& base) {
    key = trim(key);
    value = trim(value);
    try {
        if (key == "experiment") {
            c.experiment = parse_experiment_id(value);
        } else if (key == "test_manifest") {
            c.test.manifest = resolve(base, value);
        } else if (key == "train_manifest") {
            c.train.manifest = resolve(base, value);
        } else if (key == "phantom_test") {
            c.test.manifest.reset();
            c.test.phantom_count = parse_unsigned(key, value);
        } else if (key == "phantom_train") {
            c.train.manifest.reset();
            c.train.phantom_count = parse_unsigned(key, value);
        } else if (key == "phantom_size") {
            c.phantom_size = parse_unsigned(key, value);
        } else if (key == "phantom_seed") {
            c.phantom_seed = parse_unsigned(key, value);
        } else if (key == "intensities") {
            c.intensities = parse_grid(key, value);
        } else if (key == "sigmas") {
            c.sigmas = parse_grid(key, value);
        } else if (key == "kinds") {
            c.kinds.clear();
            for (auto item : split_list(value)) c.kinds.push_back(parse_anomaly_kind(item));
        } else if (key == "reference_intensity") {
            if (value == "auto") {
                c.reference_intensity.reset();
            } else {
                c.reference_intensity = parse_double(key, value);
            }
        } else if (key == "radius") {
            c.radius = parse_double(key, value);
        } else if (key == "models") {
            c.models.clear();
            for (auto item : split_list(value)) {
                ModelSpec m = parse_model_spec(item);
                if (m.kind == ModelSpec::Kind::kSubspaceFile || m.kind == ModelSpec::Kind::kExternal) {
                    m.path = resolve(base, m.path.string());
                }
                c.models.push_back(std::move(m));
            }
        } else if (key == "modes") {
            c.modes.clear();
            for (auto item : split_list(value)) c.modes.push_back(parse_recon_mode(item));
        } else if (key == "match_sigma") {
            c.match_sigma = parse_bool(key, value);
        } else if (key == "export_injections") {
            c.export_injections = parse_bool(key, value);
        } else if (key == "seed") {
            c.seed = parse_unsigned(key, value);
        } else if (key == "eval_mask") {
            c.eval_mask = parse_eval_mask_policy(value);
        } else if (key == "panels") {
            c.panels.clear();
            for (auto item : split_list(value, ';')) c.panels.emplace_back(item);
        } else if (key == "out") {
            c.out = resolve(base, value);
        } else if (key == "threads") {
            c.threads = static_cast<unsigned>(parse_unsigned(key, value));
        } else {
            config_error(key, "unknown key");
        }
    } catch (const Error& e) {
        if (e.code() == ErrorCode::kConfig) throw;
        // Kind and mode parsers report kInvalidArgument; inside a config that is a usage error.
        config_error(key, e.what());
    }
}

void load_config_file(SweepConfig& config, const std::filesystem::path& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorCode::kConfig, "cannot open config file " + path.string());
    const auto base = path.parent_path();
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view = line;
        if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = trim(view);
        if (view.empty()) continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorCode::kConfig,
                        path.string() + ":" + std::to_string(lineno) + ": expected 'key = value'");
        }
        try {
            apply_setting(config, view.substr(0, eq), view.substr(eq + 1), base);
        } catch (const Error& e) {
            throw Error(e.code(), path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

void validate(const SweepConfig& c) {
    const auto fail = [](const std::string& msg) { throw Error(ErrorCode::kConfig, msg); };
    const bool exp3 = c.experiment == ExperimentId::kExp3Healthy || c.experiment == ExperimentId::kExp3Anomalous;

    if (c.intensities.empty()) fail("intensities: grid is empty");
    if (!strictly_ascending(c.intensities)) fail("intensities: grid must be strictly ascending");
    if (c.intensities.front() < 0.0 || c.intensities.back() > 1.0) fail("intensities: values must lie in [0, 1]");
    if (c.experiment != ExperimentId::kExp3Healthy && c.experiment != ExperimentId::kExp3Anomalous) {
        if (c.sigmas.empty()) fail("sigmas: grid is empty");
    }
    if (!c.sigmas.empty()) {
        if (!strictly_ascending(c.sigmas)) fail("sigmas: grid must be strictly ascending");
        if (c.sigmas.front() < 0.0) fail("sigmas: values must be >= 0");
    }
    if (!(c.radius > 0.0)) fail("radius: must be positive");
    if (c.reference_intensity && (*c.reference_intensity < 0.0 || *c.reference_intensity > 1.0)) {
        fail("reference_intensity: must lie in [0, 1]");
    }
    if (!c.test.manifest && c.test.phantom_count == 0) fail("test data: set test_manifest or phantom_test > 0");
    if ((!c.test.manifest || (exp3 && !c.train.manifest)) && c.phantom_size < 64) {
        fail("phantom_size: must be at least 64");
    }
    if (c.experiment == ExperimentId::kExp2 && c.kinds.empty()) fail("kinds: list is empty");
    if (exp3) {
        if (c.models.empty()) fail("models: list is empty");
        if (c.modes.empty()) fail("modes: list is empty");
        const bool needs_train = std::any_of(c.models.begin(), c.models.end(), [](const ModelSpec& m) {
            return m.kind == ModelSpec::Kind::kSubspace;
        });
        if (needs_train && !c.train.manifest && c.train.phantom_count == 0) {
            fail("train data: subspace models need train_manifest or phantom_train > 0");
        }
        if (c.match_sigma && c.sigmas.empty()) fail("sigmas: best-matching sigma needs a sigma grid");
    }
}

std::string format_config(const SweepConfig& c) {
    const bool exp3 = c.experiment == ExperimentId::kExp3Healthy || c.experiment == ExperimentId::kExp3Anomalous;
    std::ostringstream out;
    out << "# resolved configuration\n";
    out << "experiment = " << to_string(c.experiment) << '\n';
    if (c.test.manifest) {
        out << "test_manifest = " << c.test.manifest->string() << '\n';
    } else {
        out << "phantom_test = " << c.test.phantom_count << '\n';
    }
    if (exp3) {
        if (c.train.manifest) {
            out << "train_manifest = " << c.train.manifest->string() << '\n';
        } else {
            out << "phantom_train = " << c.train.phantom_count << '\n';
        }
    }
    out << "phantom_size = " << c.phantom_size << '\n';
    out << "phantom_seed = " << c.phantom_seed << '\n';
    out << "intensities = " << join(c.intensities, format_number) << '\n';
    out << "sigmas = " << join(c.sigmas, format_number) << '\n';
    out << "kinds = " << join(c.kinds, [](AnomalyKind k) { return std::string(to_string(k)); }) << '\n';
    out << "reference_intensity = " << (c.reference_intensity ? format_number(*c.reference_intensity) : "auto")
        << '\n';
    out << "radius = " << format_number(c.radius) << '\n';
    out << "models = " << join(c.models, [](const ModelSpec& m) { return m.text(); }) << '\n';
    out << "modes = " << join(c.modes, [](ReconMode m) { return std::string(to_string(m)); }) << '\n';
    out << "match_sigma = " << (c.match_sigma ? "true" : "false") << '\n';
    out << "export_injections = " << (c.export_injections ? "true" : "false") << '\n';
    out << "seed = " << c.seed << '\n';
    out << "eval_mask = " << to_string(c.eval_mask) << '\n';
    if (!c.panels.empty()) {
        out << "panels = ";
        for (std::size_t i = 0; i < c.panels.size(); ++i) out << (i ? "; " : "") << c.panels[i];
        out << '\n';
    }
    out << "out = " << c.out.string() << '\n';
    return out.str();
}

}  // namespace reslab
