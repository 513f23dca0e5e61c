#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace meshmend {

struct StageEntry {
    std::string stage;
    std::size_t vertices_before = 0;
    std::size_t vertices_after = 0;
    std::size_t faces_before = 0;
    std::size_t faces_after = 0;
    std::size_t removed_or_flipped = 0;
    double ms = 0.0;
};

// Stage entries in execution order; after-counts of one entry equal the
// before-counts of the next.
struct RepairReport {
    std::vector<StageEntry> stages;

    const StageEntry* find(const std::string& stage) const {
        for (const auto& s : stages)
            if (s.stage == stage) return &s;
        return nullptr;
    }
};

}  // namespace meshmend
