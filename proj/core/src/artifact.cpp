#include "tabgap/artifact.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "tabgap/error.hpp"
#include "tabgap/rng.hpp"

namespace tabgap {

namespace {

constexpr int kSchemaVersion = 1;

bool valid_artifact_name(const std::string& name) {
    if (name.empty()) return false;
    for (char c : name) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
        if (!ok) return false;
    }
    return true;
}

std::string hash_hex(std::uint64_t h) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

ArtifactStore::ArtifactStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
    load_manifest();
}

std::uint64_t ArtifactStore::hash_bytes(const std::string& bytes) { return fnv1a64(bytes); }

void ArtifactStore::load_manifest() {
    entries_.clear();
    const auto path = dir_ / "manifest.json";
    if (!std::filesystem::exists(path)) return;
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw IoError("corrupt manifest " + path.string() + ": " + e.what());
    }
    if (!doc.contains("artifacts")) return;
    for (const auto& [name, j] : doc.at("artifacts").items()) {
        Entry e;
        e.file = j.at("file").get<std::string>();
        e.kind = j.value("kind", std::string("table"));
        e.hash_hex = j.at("fnv1a64").get<std::string>();
        if (j.contains("columns")) {
            for (const auto& col : j.at("columns")) {
                e.columns.emplace_back(col.at("name").get<std::string>(),
                                       column_type_from_string(col.at("type").get<std::string>()));
            }
        }
        entries_.emplace_back(name, std::move(e));
    }
    std::sort(entries_.begin(), entries_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
}

void ArtifactStore::save_manifest() const {
    nlohmann::json artifacts = nlohmann::json::object();
    for (const auto& [name, e] : entries_) {
        nlohmann::json j;
        j["file"] = e.file;
        j["kind"] = e.kind;
        j["fnv1a64"] = e.hash_hex;
        if (e.kind == "table") {
            nlohmann::json cols = nlohmann::json::array();
            for (const auto& [cname, ctype] : e.columns) {
                cols.push_back({{"name", cname}, {"type", to_string(ctype)}});
            }
            j["columns"] = std::move(cols);
        }
        artifacts[name] = std::move(j);
    }
    nlohmann::json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["artifacts"] = std::move(artifacts);
    write_file_atomic(dir_ / "manifest.json", doc.dump(2) + "\n");
}

void ArtifactStore::write_file_atomic(const std::filesystem::path& target,
                                      const std::string& content) const {
    const auto tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp);
        out << content;
        if (!out) throw IoError("write failed for " + tmp);
    }
    std::filesystem::rename(tmp, target);
}

std::filesystem::path ArtifactStore::persist(const std::string& name, const Table& table) {
    if (!valid_artifact_name(name)) throw IoError("invalid artifact name '" + name + "'");
    std::ostringstream buf;
    table.write_csv(buf);
    const std::string content = buf.str();

    Entry e;
    e.file = name + ".csv";
    e.kind = "table";
    e.hash_hex = hash_hex(hash_bytes(content));
    for (std::size_t c = 0; c < table.n_cols(); ++c) {
        e.columns.emplace_back(table.column_names()[c], table.type(c));
    }

    const auto target = dir_ / e.file;
    write_file_atomic(target, content);

    auto it = std::find_if(entries_.begin(), entries_.end(),
                           [&](const auto& kv) { return kv.first == name; });
    if (it != entries_.end()) {
        it->second = std::move(e);
    } else {
        entries_.emplace_back(name, std::move(e));
        std::sort(entries_.begin(), entries_.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
    }
    save_manifest();
    return target;
}

std::filesystem::path ArtifactStore::persist_text(const std::string& name,
                                                  const std::string& filename,
                                                  const std::string& content) {
    if (!valid_artifact_name(name)) throw IoError("invalid artifact name '" + name + "'");
    Entry e;
    e.file = filename;
    e.kind = "text";
    e.hash_hex = hash_hex(hash_bytes(content));

    const auto target = dir_ / filename;
    write_file_atomic(target, content);

    auto it = std::find_if(entries_.begin(), entries_.end(),
                           [&](const auto& kv) { return kv.first == name; });
    if (it != entries_.end()) {
        it->second = std::move(e);
    } else {
        entries_.emplace_back(name, std::move(e));
        std::sort(entries_.begin(), entries_.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
    }
    save_manifest();
    return target;
}

Table ArtifactStore::load(const std::string& name) const {
    const auto it = std::find_if(entries_.begin(), entries_.end(),
                                 [&](const auto& kv) { return kv.first == name; });
    if (it == entries_.end()) throw IoError("unknown artifact '" + name + "'");
    const Entry& e = it->second;
    if (e.kind != "table") throw IoError("artifact '" + name + "' is not a table");

    const auto path = dir_ / e.file;
    const std::string content = read_file(path);
    if (hash_hex(hash_bytes(content)) != e.hash_hex) {
        throw IoError("integrity error: artifact '" + name + "' does not match its manifest hash");
    }
    std::vector<ColumnType> types;
    types.reserve(e.columns.size());
    for (const auto& [_, t] : e.columns) types.push_back(t);
    std::istringstream in(content);
    return Table::read_csv(in, types);
}

bool ArtifactStore::has(const std::string& name) const {
    return std::any_of(entries_.begin(), entries_.end(),
                       [&](const auto& kv) { return kv.first == name; });
}

std::vector<std::string> ArtifactStore::names() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& [name, _] : entries_) out.push_back(name);
    return out;
}

}  // namespace tabgap
