#include "mtc/dataset/manifest.hpp"

#include <fstream>
#include <set>

#include "json.hpp"

#include "mtc/common/error.hpp"

namespace mtc::dataset {

std::string_view to_string(Label l) { return l == Label::Benign ? "benign" : "malware"; }

Label parse_label(std::string_view text) {
    if (text == "benign") return Label::Benign;
    if (text == "malware") return Label::Malware;
    throw InvalidManifest("label must be 'benign' or 'malware', got '" + std::string(text) + "'");
}

void DatasetManifest::validate() const {
    std::set<std::string> seen;
    for (const auto& e : entries) {
        if (!seen.insert(e.path).second) throw DuplicatePath("manifest lists " + e.path + " more than once");
        if ((e.family == kBenignFamily) != (e.label == Label::Benign))
            throw InvalidManifest("family 'benign' must coincide with label benign (" + e.path + ")");
        if (e.family.empty()) throw InvalidManifest("empty family for " + e.path);
    }
}

std::filesystem::path DatasetManifest::resolve(const ManifestEntry& e) const {
    std::filesystem::path p(e.path);
    return p.is_absolute() ? p : base_dir / p;
}

DatasetManifest DatasetManifest::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingFile("cannot open manifest " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& ex) {
        throw InvalidManifest("manifest " + path.string() + ": " + ex.what());
    }
    DatasetManifest m;
    m.base_dir = path.parent_path();
    try {
        m.dataset_name = j.value("dataset_name", std::string{});
        m.suffix_family_with_source = j.value("suffix_family_with_source", false);
        for (const auto& je : j.at("entries")) {
            ManifestEntry e;
            e.path = je.at("path").get<std::string>();
            e.label = parse_label(je.at("label").get<std::string>());
            e.family = je.value("family", e.label == Label::Benign ? std::string(kBenignFamily) : std::string{});
            e.source_dataset = je.value("source_dataset", std::string{});
            m.entries.push_back(std::move(e));
        }
    } catch (const nlohmann::json::exception& ex) {
        throw InvalidManifest("manifest " + path.string() + ": " + ex.what());
    }
    m.validate();
    return m;
}

void DatasetManifest::save(const std::filesystem::path& path) const {
    nlohmann::json j;
    j["dataset_name"] = dataset_name;
    j["suffix_family_with_source"] = suffix_family_with_source;
    j["entries"] = nlohmann::json::array();
    for (const auto& e : entries) {
        j["entries"].push_back({{"path", e.path},
                                {"label", std::string(to_string(e.label))},
                                {"family", e.family},
                                {"source_dataset", e.source_dataset}});
    }
    std::ofstream out(path);
    if (!out) throw Error("cannot write manifest " + path.string());
    out << j.dump(2) << '\n';
}

} // namespace mtc::dataset
