#include "bext/cachefile.hpp"

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace bext::cache {

const char* const kCodeVersion = "bext-res-3";

namespace {

constexpr std::array<char, 8> kMagic = {'B', 'X', 'R', 'E', 'S', '0', '1', '\n'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

bool take_u32(const std::vector<std::uint8_t>& in, std::size_t& pos, std::uint32_t& v) {
    if (pos + 4 > in.size()) return false;
    v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[pos + i]) << (8 * i);
    pos += 4;
    return true;
}

bool take_u64(const std::vector<std::uint8_t>& in, std::size_t& pos, std::uint64_t& v) {
    if (pos + 8 > in.size()) return false;
    v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in[pos + i]) << (8 * i);
    pos += 8;
    return true;
}

void put_str(std::vector<std::uint8_t>& out, const std::string& s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
}

bool take_str(const std::vector<std::uint8_t>& in, std::size_t& pos, std::string& s) {
    std::uint32_t n = 0;
    if (!take_u32(in, pos, n)) return false;
    if (pos + n > in.size()) return false;
    s.assign(in.begin() + static_cast<long>(pos), in.begin() + static_cast<long>(pos + n));
    pos += n;
    return true;
}

// FNV-1a, used only to derive stable file names (the full key is verified
// against the file contents on load).
std::uint64_t fnv64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

std::string module_key(const mod::GradedModule& m) {
    const std::vector<int>& cells = m.cells();
    std::ostringstream os;
    os << "c{";
    std::size_t i = 0;
    bool first = true;
    while (i < cells.size()) {
        std::size_t j = i;
        while (j + 1 < cells.size() && cells[j + 1] == cells[j] + 1) ++j;
        if (!first) os << ',';
        first = false;
        if (j == i)
            os << cells[i];
        else
            os << cells[i] << ".." << cells[j];
        i = j + 1;
    }
    os << '}';
    return os.str();
}

std::uint32_t crc32(const std::uint8_t* data, std::size_t len) {
    static const std::array<std::uint32_t, 256> table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t n = 0; n < 256; ++n) {
            std::uint32_t c = n;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320U ^ (c >> 1) : c >> 1;
            t[n] = c;
        }
        return t;
    }();
    std::uint32_t c = 0xFFFFFFFFU;
    for (std::size_t i = 0; i < len; ++i) c = table[(c ^ data[i]) & 0xFF] ^ (c >> 8);
    return c ^ 0xFFFFFFFFU;
}

ResolutionStore& ResolutionStore::instance() {
    static ResolutionStore store;
    static const bool env_applied = [] {
        if (const char* env = std::getenv("BEXT_CACHE_DIR"); env && *env)
            store.set_cache_dir(std::filesystem::path(env));
        return true;
    }();
    (void)env_applied;
    return store;
}

void ResolutionStore::set_cache_dir(std::optional<std::filesystem::path> dir) {
    std::lock_guard<std::mutex> lock(mu_);
    dir_ = std::move(dir);
}

std::optional<std::filesystem::path> ResolutionStore::cache_dir() const {
    std::lock_guard<std::mutex> lock(mu_);
    return dir_;
}

std::filesystem::path ResolutionStore::file_for(const Key& k) const {
    std::ostringstream tag;
    tag << kCodeVersion << '|' << k.cells << '|' << k.s_max << '|' << k.t_max;
    std::ostringstream name;
    name << "res-" << std::hex << fnv64(tag.str()) << ".bin";
    return *dir_ / name.str();
}

std::shared_ptr<const res::Resolution> ResolutionStore::get(const mod::ModulePtr& m, int s_max,
                                                            int t_max) {
    if (!m) throw std::invalid_argument("ResolutionStore: null module");
    Key key{module_key(*m), s_max, t_max};

    std::shared_ptr<std::mutex> build_lock;
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = mem_.find(key);
        if (it != mem_.end()) {
            ++stats_.memory_hits;
            return it->second;
        }
        auto& slot = building_[key];
        if (!slot) slot = std::make_shared<std::mutex>();
        build_lock = slot;
    }

    std::lock_guard<std::mutex> build_guard(*build_lock);
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = mem_.find(key);
        if (it != mem_.end()) {
            ++stats_.memory_hits;
            return it->second;
        }
    }

    std::shared_ptr<const res::Resolution> built = load_disk(key, m);
    if (!built) {
        auto fresh = std::make_shared<res::Resolution>(m, s_max, t_max);
        {
            std::lock_guard<std::mutex> lock(mu_);
            ++stats_.builds;
        }
        store_disk(key, *fresh);
        built = std::move(fresh);
    }

    std::lock_guard<std::mutex> lock(mu_);
    mem_[key] = built;
    return built;
}

std::shared_ptr<const res::Resolution> ResolutionStore::load_disk(const Key& k,
                                                                  const mod::ModulePtr& m) {
    std::filesystem::path path;
    {
        std::lock_guard<std::mutex> lock(mu_);
        if (!dir_) return nullptr;
        path = file_for(k);
    }
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return nullptr;

    std::vector<std::uint8_t> bytes;
    {
        std::ifstream in(path, std::ios::binary);
        if (!in) return nullptr;
        in.seekg(0, std::ios::end);
        std::streamoff n = in.tellg();
        in.seekg(0);
        bytes.resize(static_cast<std::size_t>(n));
        in.read(reinterpret_cast<char*>(bytes.data()), n);
        if (!in) bytes.clear();
    }

    auto discard = [&]() -> std::shared_ptr<const res::Resolution> {
        std::filesystem::remove(path, ec);
        std::lock_guard<std::mutex> lock(mu_);
        ++stats_.disk_discards;
        return nullptr;
    };

    std::size_t pos = 0;
    if (bytes.size() < kMagic.size()) return discard();
    if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) return discard();
    pos = kMagic.size();

    std::string version, cells;
    std::uint32_t smax = 0, tmax = 0, crc = 0;
    std::uint64_t payload_len = 0;
    if (!take_str(bytes, pos, version) || !take_str(bytes, pos, cells)) return discard();
    if (!take_u32(bytes, pos, smax) || !take_u32(bytes, pos, tmax)) return discard();
    if (!take_u64(bytes, pos, payload_len) || !take_u32(bytes, pos, crc)) return discard();
    if (version != kCodeVersion || cells != k.cells) return discard();
    if (smax != static_cast<std::uint32_t>(k.s_max) || tmax != static_cast<std::uint32_t>(k.t_max))
        return discard();
    if (pos + payload_len != bytes.size()) return discard();
    if (crc32(bytes.data() + pos, payload_len) != crc) return discard();

    std::vector<std::uint8_t> payload(bytes.begin() + static_cast<long>(pos), bytes.end());
    std::unique_ptr<res::Resolution> r = res::Resolution::deserialize(m, k.s_max, k.t_max, payload);
    if (!r) return discard();
    {
        std::lock_guard<std::mutex> lock(mu_);
        ++stats_.disk_hits;
    }
    return std::shared_ptr<const res::Resolution>(std::move(r));
}

void ResolutionStore::store_disk(const Key& k, const res::Resolution& r) {
    std::filesystem::path path;
    {
        std::lock_guard<std::mutex> lock(mu_);
        if (!dir_) return;
        std::error_code ec;
        std::filesystem::create_directories(*dir_, ec);
        path = file_for(k);
    }

    std::vector<std::uint8_t> payload;
    r.serialize(payload);

    std::vector<std::uint8_t> bytes(kMagic.begin(), kMagic.end());
    put_str(bytes, kCodeVersion);
    put_str(bytes, k.cells);
    put_u32(bytes, static_cast<std::uint32_t>(k.s_max));
    put_u32(bytes, static_cast<std::uint32_t>(k.t_max));
    put_u64(bytes, payload.size());
    put_u32(bytes, crc32(payload.data(), payload.size()));
    bytes.insert(bytes.end(), payload.begin(), payload.end());

    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) return;
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            return;
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) std::filesystem::remove(tmp, ec);
}

void ResolutionStore::evict(const mod::GradedModule& m, int s_max, int t_max) {
    std::lock_guard<std::mutex> lock(mu_);
    mem_.erase(Key{module_key(m), s_max, t_max});
}

void ResolutionStore::clear_memory() {
    std::lock_guard<std::mutex> lock(mu_);
    mem_.clear();
}

ResolutionStore::Stats ResolutionStore::stats() const {
    std::lock_guard<std::mutex> lock(mu_);
    return stats_;
}

}  // namespace bext::cache
