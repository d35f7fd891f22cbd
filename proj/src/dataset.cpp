#include "reslab/dataset.hpp"

#include "reslab/errors.hpp"

#include <fstream>

namespace reslab {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

}  // namespace

const char* to_string(DatasetRole role) { return role == DatasetRole::kTrain ? "train" : "test"; }

DatasetManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::kMissingFile, path.string() + ": cannot open manifest");
    const auto base = path.parent_path();

    DatasetManifest manifest;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            const std::string comment = trim(line.substr(hash + 1));
            if (comment.rfind("role:", 0) == 0) {
                const std::string role = trim(comment.substr(5));
                if (role == "train") {
                    manifest.role = DatasetRole::kTrain;
                } else if (role == "test") {
                    manifest.role = DatasetRole::kTest;
                } else {
                    throw Error(ErrorCode::kInvalidArgument, path.string() + ": unknown role '" + role + "'");
                }
            }
            line = line.substr(0, hash);
        }
        if (trim(line).empty()) continue;

        ManifestEntry entry;
        if (const auto tab = line.find('\t'); tab != std::string::npos) {
            entry.image = base / trim(line.substr(0, tab));
            entry.mask = base / trim(line.substr(tab + 1));
        } else {
            entry.image = base / trim(line);
        }
        manifest.entries.push_back(std::move(entry));
    }
    return manifest;
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
    const auto base = path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path();
    auto rel = [&](const std::filesystem::path& p) {
        auto r = p.lexically_proximate(base);
        return r.generic_string();
    };
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, path.string() + ": cannot write manifest");
    out << "# role: " << to_string(manifest.role) << "\n";
    for (const auto& e : manifest.entries) {
        out << rel(e.image);
        if (e.mask) out << '\t' << rel(*e.mask);
        out << '\n';
    }
    if (!out) throw Error(ErrorCode::kIo, path.string() + ": write failed");
}

Dataset load_dataset(const DatasetManifest& manifest) {
    Dataset data;
    data.reserve(manifest.entries.size());
    for (const auto& e : manifest.entries) {
        Sample s;
        s.stem = e.image.stem().string();
        s.image = read_grid(e.image);
        if (e.mask) {
            s.mask = read_mask(*e.mask);
            require_same_shape(s.image.shape(), s.mask->shape(), e.mask->string().c_str());
        }
        data.push_back(std::move(s));
    }
    return data;
}

}  // namespace reslab
