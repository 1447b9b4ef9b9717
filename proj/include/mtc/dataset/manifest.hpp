#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mtc::dataset {

enum class Label : std::uint8_t { Benign = 0, Malware = 1 };

inline constexpr std::string_view kBenignFamily = "benign";

std::string_view to_string(Label l);
/// "benign" or "malware"; throws InvalidManifest otherwise.
Label parse_label(std::string_view text);

struct ManifestEntry {
    std::string path; ///< as written in the manifest; relative paths resolve against base_dir
    Label label = Label::Benign;
    std::string family = std::string(kBenignFamily);
    std::string source_dataset;
};

/// JSON manifest:
///
///     {
///       "dataset_name": "MTAB",
///       "suffix_family_with_source": false,
///       "entries": [
///         {"path": "benign/a.pcap", "label": "benign", "family": "benign", "source_dataset": "ISCX"},
///         {"path": "mta/dridex.pcap", "label": "malware", "family": "Dridex", "source_dataset": "MTA"}
///       ]
///     }
///
/// With suffix_family_with_source, malware families become "Family@source"
/// so same-named families from different sources stay distinct in merged corpora.
struct DatasetManifest {
    std::string dataset_name;
    std::vector<ManifestEntry> entries;
    std::filesystem::path base_dir;
    bool suffix_family_with_source = false;

    /// Throws DuplicatePath or InvalidManifest.
    void validate() const;
    std::filesystem::path resolve(const ManifestEntry& e) const;

    static DatasetManifest load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;
};

} // namespace mtc::dataset
