// Positional human names for sphere Ext generators.
//
// The chart engine names generators canonically as "g{s}_{t}_{i}". For the
// sphere chart through stem 30 we attach the traditional symbols (h0, h1,
// c0, Ph2, d0, ...) from a data file keyed by (s, stem, index): names are
// positional metadata, not computed products. Positions the file does not
// cover keep their canonical ids. The stem-0 tower (1, h0, h0², ...) is
// procedural and must not appear in the file.
//
// Formatting conventions shared by every consumer:
//   * powers use Unicode superscripts: "h0²", "h1³" (exponent 1 is omitted);
//   * a class sitting on cell n carries the suffix "[n]" with U+2212 for the
//     minus sign: "h0³h3[−4]";
//   * sums of basis classes join with "+";
//   * the "May part" of a decorated name is the name with the cell suffix
//     stripped.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bext/f2.hpp"

namespace bext::cat {

// Unicode superscript digits for an exponent (>= 2 in practice).
std::string superscript(int e);

// "[n]" with U+2212 for negative n.
std::string cell_suffix(int n);

// Name with any trailing "[...]" removed.
std::string strip_cell(const std::string& name);

struct Position {
    int s = 0;
    int stem = 0;
    int index = 0;
    bool operator<(const Position& o) const {
        if (s != o.s) return s < o.s;
        if (stem != o.stem) return stem < o.stem;
        return index < o.index;
    }
};

class Catalog {
public:
    // Parse a name file: one record per line, "s<TAB>stem<TAB>index<TAB>name",
    // '#' starts a comment. Throws std::runtime_error with a line diagnostic
    // on malformed records, duplicate positions, duplicate names, stem-0
    // records, or records outside 1 <= s, 1 <= stem <= stem_limit().
    static Catalog from_file(const std::string& path);

    // The built-in table (data/sphere_names.tsv), loaded once per process.
    static const Catalog& instance();

    static constexpr int stem_limit() { return 30; }

    // Human name of sphere-chart position (s, stem, index), if on file.
    // The stem-0 tower is always named: "1", "h0", "h0²", ...
    std::optional<std::string> find_name(int s, int stem, int index) const;

    // Human name or the supplied canonical fallback id.
    std::string name_or(int s, int stem, int index, const std::string& fallback) const;

    // Reverse lookup (exact string, including procedural tower names).
    std::optional<Position> find_position(const std::string& name) const;

    // Number of named positions at (s, stem).
    int names_at(int s, int stem) const;

    // Name a vector in the sphere chart basis at (s, stem): a sum of basis
    // names joined by "+", or "0" for the zero vector. `fallback(i)` supplies
    // the canonical id of basis index i.
    template <typename F>
    std::string name_vector(int s, int stem, const f2::BitVector& v, F&& fallback) const {
        std::string out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v.get(i)) continue;
            if (!out.empty()) out += "+";
            out += name_or(s, stem, static_cast<int>(i), fallback(static_cast<int>(i)));
        }
        return out.empty() ? std::string("0") : out;
    }

private:
    std::map<Position, std::string> names_;
    std::map<std::string, Position> reverse_;
};

}  // namespace bext::cat
