#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tabgap/table.hpp"

namespace tabgap {

/// On-disk study layout: one directory, one CSV per artifact, plus
/// manifest.json carrying the schema version, per-artifact column types
/// and content hashes. Writes go to a temp file first and are renamed
/// into place, so partial artifacts are never visible.
class ArtifactStore {
public:
    explicit ArtifactStore(std::filesystem::path dir);

    const std::filesystem::path& dir() const { return dir_; }

    /// Persists `table` under `name` ([a-z0-9_-]+) and updates the manifest.
    std::filesystem::path persist(const std::string& name, const Table& table);

    /// Persists a raw text document (for example report.md) with a hash entry.
    std::filesystem::path persist_text(const std::string& name, const std::string& filename,
                                       const std::string& content);

    /// Loads a table artifact; verifies the content hash against the
    /// manifest and throws IoError on mismatch or unknown name.
    Table load(const std::string& name) const;

    bool has(const std::string& name) const;

    /// Artifact names currently recorded in the manifest, sorted.
    std::vector<std::string> names() const;

    static std::uint64_t hash_bytes(const std::string& bytes);

private:
    void load_manifest();
    void save_manifest() const;
    void write_file_atomic(const std::filesystem::path& target, const std::string& content) const;

    struct Entry {
        std::string file;
        std::string kind;  // "table" or "text"
        std::string hash_hex;
        std::vector<std::pair<std::string, ColumnType>> columns;
    };

    std::filesystem::path dir_;
    std::vector<std::pair<std::string, Entry>> entries_;  // sorted by name
};

}  // namespace tabgap
