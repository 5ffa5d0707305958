#include "bext/catalog.hpp"

#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace bext::cat {

namespace {

const char* kMinus = "−";  // U+2212, the sign used inside cell suffixes

std::string superscript_digit(int d) {
    switch (d) {
        case 1: return "¹";
        case 2: return "²";
        case 3: return "³";
        default: {
            // U+2070 + d for 0 and 4..9.
            std::string s = "⁰";
            s[2] = static_cast<char>(static_cast<unsigned char>(s[2]) + d);
            return s;
        }
    }
}

}  // namespace

std::string superscript(int e) {
    if (e < 0) throw std::invalid_argument("superscript: negative exponent");
    std::string digits = std::to_string(e);
    std::string out;
    for (char c : digits) out += superscript_digit(c - '0');
    return out;
}

std::string cell_suffix(int n) {
    std::string out = "[";
    if (n < 0) {
        out += kMinus;
        out += std::to_string(-n);
    } else {
        out += std::to_string(n);
    }
    out += "]";
    return out;
}

std::string strip_cell(const std::string& name) {
    auto pos = name.rfind('[');
    if (pos == std::string::npos) return name;
    return name.substr(0, pos);
}

namespace {

// Procedural stem-0 tower: s = 0 -> "1", s = 1 -> "h0", s >= 2 -> "h0" + sup.
std::string tower_name(int s) {
    if (s == 0) return "1";
    if (s == 1) return "h0";
    return "h0" + superscript(s);
}

}  // namespace

Catalog Catalog::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("catalog: cannot open " + path);
    Catalog cat;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        // Trim trailing whitespace/CR.
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
            line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        int s, stem, index;
        std::string name;
        if (!(ss >> s >> stem >> index >> name)) {
            throw std::runtime_error("catalog: " + path + ":" + std::to_string(lineno) +
                                     ": expected 's stem index name'");
        }
        std::string extra;
        if (ss >> extra) {
            throw std::runtime_error("catalog: " + path + ":" + std::to_string(lineno) +
                                     ": trailing field '" + extra + "'");
        }
        if (s < 1 || stem < 1 || stem > stem_limit() || index < 0) {
            throw std::runtime_error("catalog: " + path + ":" + std::to_string(lineno) +
                                     ": position out of range (need s>=1, 1<=stem<=" +
                                     std::to_string(stem_limit()) + ", index>=0)");
        }
        Position pos{s, stem, index};
        if (!cat.names_.emplace(pos, name).second) {
            throw std::runtime_error("catalog: " + path + ":" + std::to_string(lineno) +
                                     ": duplicate position");
        }
        if (!cat.reverse_.emplace(name, pos).second) {
            throw std::runtime_error("catalog: " + path + ":" + std::to_string(lineno) +
                                     ": duplicate name '" + name + "'");
        }
    }
    return cat;
}

const Catalog& Catalog::instance() {
    static std::once_flag flag;
    static Catalog cat;
    std::call_once(flag, [] {
#ifdef BEXT_DATA_DIR
        const std::string dir = BEXT_DATA_DIR;
#else
        const std::string dir = "data";
#endif
        cat = from_file(dir + "/sphere_names.tsv");
    });
    return cat;
}

std::optional<std::string> Catalog::find_name(int s, int stem, int index) const {
    if (stem == 0) {
        if (index != 0 || s < 0) return std::nullopt;
        return tower_name(s);
    }
    auto it = names_.find(Position{s, stem, index});
    if (it == names_.end()) return std::nullopt;
    return it->second;
}

std::string Catalog::name_or(int s, int stem, int index, const std::string& fallback) const {
    auto n = find_name(s, stem, index);
    return n ? *n : fallback;
}

std::optional<Position> Catalog::find_position(const std::string& name) const {
    auto it = reverse_.find(name);
    if (it != reverse_.end()) return it->second;
    // Procedural tower names.
    if (name == "1") return Position{0, 0, 0};
    if (name == "h0") return Position{1, 0, 0};
    for (int s = 2; s <= 64; ++s) {
        if (name == tower_name(s)) return Position{s, 0, 0};
    }
    return std::nullopt;
}

int Catalog::names_at(int s, int stem) const {
    int count = 0;
    for (auto it = names_.lower_bound(Position{s, stem, 0});
         it != names_.end() && it->first.s == s && it->first.stem == stem; ++it)
        ++count;
    return count;
}

}  // namespace bext::cat
