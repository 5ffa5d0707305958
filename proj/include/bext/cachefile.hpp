// Process-wide registry of minimal resolutions with an optional disk cache.
//
// Resolutions are expensive; every consumer (column models, depth ladders,
// dictionaries, the CLI) fetches them through ResolutionStore so that equal
// requests share one build. Identity is the cell set of the module together
// with (s_max, t_max): two modules with the same cells carry the same action
// (the binomial rule depends only on the cell degrees), so their minimal
// resolutions are interchangeable.
//
// The disk cache stores one file per (key, s_max, t_max, code version) in a
// fixed little-endian binary layout with a CRC-32 trailer; files that fail
// any header, version or checksum test are discarded and rebuilt. Writes go
// through a temporary file plus rename so readers never observe a partial
// file.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "bext/module.hpp"
#include "bext/resolution.hpp"

namespace bext::cache {

// Bumped whenever resolution output could change for the same input; stale
// disk entries are then ignored.
extern const char* const kCodeVersion;

// Stable textual identity of a cell-span module: ascending cells compressed
// to ranges, e.g. "c{-8..-2,0..24}".
std::string module_key(const mod::GradedModule& m);

// CRC-32 (IEEE 802.3 polynomial, reflected) of a byte span.
std::uint32_t crc32(const std::uint8_t* data, std::size_t len);

class ResolutionStore {
public:
    static ResolutionStore& instance();

    // Directory for persistent resolution files; nullopt disables the disk
    // layer. Created on first use.
    void set_cache_dir(std::optional<std::filesystem::path> dir);
    std::optional<std::filesystem::path> cache_dir() const;

    // Fetch-or-build with exact (cells, s_max, t_max) matching. Thread-safe;
    // concurrent requests for the same key wait for a single build.
    std::shared_ptr<const res::Resolution> get(const mod::ModulePtr& m, int s_max, int t_max);

    // Drop one in-memory entry (any disk copy remains usable).
    void evict(const mod::GradedModule& m, int s_max, int t_max);
    // Drop every in-memory entry.
    void clear_memory();

    // Counters for tests and provenance reporting.
    struct Stats {
        std::uint64_t builds = 0;
        std::uint64_t memory_hits = 0;
        std::uint64_t disk_hits = 0;
        std::uint64_t disk_discards = 0;  // corrupt or mismatched files
    };
    Stats stats() const;

private:
    ResolutionStore() = default;

    struct Key {
        std::string cells;
        int s_max;
        int t_max;
        bool operator<(const Key& o) const {
            if (cells != o.cells) return cells < o.cells;
            if (s_max != o.s_max) return s_max < o.s_max;
            return t_max < o.t_max;
        }
    };

    std::filesystem::path file_for(const Key& k) const;
    std::shared_ptr<const res::Resolution> load_disk(const Key& k, const mod::ModulePtr& m);
    void store_disk(const Key& k, const res::Resolution& r);

    mutable std::mutex mu_;
    std::optional<std::filesystem::path> dir_;
    std::map<Key, std::shared_ptr<const res::Resolution>> mem_;
    // Per-key build locks so distinct resolutions build concurrently.
    std::map<Key, std::shared_ptr<std::mutex>> building_;
    Stats stats_;
};

}  // namespace bext::cache
