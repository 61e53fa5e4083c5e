#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "mmg/errors.hpp"

namespace mmg {

/// One dataset sample: stable id, class label, split membership, and the
/// on-disk location of each modality. Modality names are an open set; names
/// the pipeline does not know are preserved untouched.
struct SampleEntry {
    std::string id;
    std::size_t label = 0;
    std::string split;
    std::map<std::string, std::string> modality_paths;
};

struct DatasetManifest {
    std::vector<SampleEntry> entries;
    std::size_t class_count = 32;
    std::set<std::string> split_names = {"train", "val", "test"};

    std::vector<const SampleEntry*> split(const std::string& name) const {
        std::vector<const SampleEntry*> out;
        for (const auto& e : entries)
            if (e.split == name) out.push_back(&e);
        return out;
    }

    std::unordered_map<std::string, std::size_t> label_index() const {
        std::unordered_map<std::string, std::size_t> m;
        m.reserve(entries.size());
        for (const auto& e : entries) m.emplace(e.id, e.label);
        return m;
    }
};

inline void validate_manifest(const DatasetManifest& m) {
    if (m.class_count == 0) throw ValidationError("manifest class_count must be positive");
    std::unordered_set<std::string> seen;
    seen.reserve(m.entries.size());
    for (const auto& e : m.entries) {
        if (!seen.insert(e.id).second) throw DuplicateSampleError("duplicate sample id: " + e.id);
        if (e.label >= m.class_count)
            throw LabelRangeError("label " + std::to_string(e.label) + " of sample " + e.id +
                                  " outside [0," + std::to_string(m.class_count) + ")");
        if (!m.split_names.count(e.split))
            throw ValidationError("sample " + e.id + " uses undeclared split \"" + e.split + "\"");
    }
}

}  // namespace mmg
