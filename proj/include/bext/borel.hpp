// Trigraded Borel Ext groups assembled from weight-column limit charts,
// rho-multiplication between adjacent columns, name dictionaries from the
// cell spectral sequence of the dictionary models, and algebraic Mahowald
// invariants.
//
// Coordinates. A Borel group sits at (s, t, w); its stem is f = t - s and
// its coweight is c = t - s - w. The underlying classical chart of weight w
// lives at bidegree (s - 1, t_cl) with t_cl = t - w - 1 (for the model
// part; the (-1)-sphere part of a w <= 0 column sits at (s, t_cl)).
// A chart page at coweight c displays, at stem f, the column w = f - c; the
// classical stem of every model-part class equals the coweight.
//
// rho-multiplication maps (s, t, w) -> (s, t-1, w-1): it preserves s, the
// coweight and the classical bidegree, and shifts the stem by -1, so rho
// lines connect adjacent stems within a single coweight page. The map is
// computed honestly on truncations: the kill-top-cell quotient
// P(-K, -w) ->> P(-K, -w-1) induces Ext(column w) -> Ext(column w-1) at a
// common ladder depth K, transported to the named column-model bases. The
// w = 1 -> 0 crossing is NOT the identity on shared models; the engine
// computes it through the same truncation transport.
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "bext/ahss.hpp"
#include "bext/f2.hpp"
#include "bext/limits.hpp"
#include "bext/module.hpp"

namespace bext::borel {

// Global caps for a chart engine; queries outside are rejected with an
// enlargement hint. Defaults match the shipped chart pages.
struct PageCaps {
    int coweight_min = -2;
    int coweight_max = 13;
    int stem_max = 30;
    int s_max = 12;
};

struct NamedClass {
    std::string name;        // detection-decorated, e.g. "h0³h3[−4]"
    int cell = 0;            // detecting cell
    char summand = 'm';      // 'm' model part, 's' (-1)-sphere part (w <= 0)
};

struct BorelGroup {
    int s = 0, t = 0, w = 0;
    int dim = 0;
    std::vector<NamedClass> basis;  // model generators first, then sphere
    bool stabilized = false;
    bool verified = false;
};

// One rho line on a coweight page: source (stem, s, index) -> target
// (stem - 1, s, index) in the named bases of the two groups.
struct RhoLine {
    int stem = 0, s = 0;
    int src_index = 0, tgt_index = 0;
};

// rho data for the column pair w -> w-1 at one Borel bidegree of the source.
struct RhoBlock {
    f2::BitMatrix matrix;  // rows: target named basis, cols: source named basis
    int base = 0;          // ladder depth that certified this block
    bool verified = false;
};

class Engine {
public:
    explicit Engine(PageCaps caps = {});

    const PageCaps& caps() const { return caps_; }

    // Window of coweights the column at weight w contributes to the pages.
    // Throws std::out_of_range with an enlargement hint if empty.
    lim::Window column_window(int w) const;

    // Full narrowed-window limit chart for one column (memoized).
    const lim::LimitChart& column(int w);

    // Single-group query through a minimal window (fast path; memoized).
    // Throws std::out_of_range with an enlargement hint outside the caps.
    const BorelGroup& group(int s, int t, int w);

    // Named basis of a column chart entry (shared by group() and the pages).
    std::vector<NamedClass> names_for(const lim::LimitChart& chart, int s, int t);

    // rho block for source bidegree (s,t) of column w, computed at a common
    // forced ladder depth for the pair (w, w-1); deepened until both sides
    // certify or the widening budget is exhausted (then verified = false).
    const RhoBlock& rho(int w, int s, int t);

    // All rho lines of the coweight-c page for stems 1..stem_max.
    std::vector<RhoLine> rho_lines(int coweight, int stem_max);

    // Composite rho^k matrix from (s, t, w) down to (s, t-k, w-k).
    f2::BitMatrix rho_power(int s, int t, int w, int k);

private:
    struct PairCharts {
        int base = 0;  // forced depth of the attempt pair
        lim::LimitChart src, tgt;
        std::shared_ptr<const res::Resolution> r_src_rung, r_tgt_rung;
        res::ExtMap mu;  // Ext(src rung) -> Ext(tgt rung)
    };
    sseq::Detector& detector_for(const mod::ModulePtr& m, int t_res);
    PairCharts& pair_charts(int w, int base);

    PageCaps caps_;
    std::map<int, lim::LimitChart> columns_;
    std::map<std::tuple<int, int, int>, BorelGroup> groups_;       // (s,t,w)
    std::map<std::string, std::unique_ptr<sseq::Detector>> detectors_;
    std::map<std::pair<int, int>, PairCharts> pairs_;              // (w, base)
    std::map<std::tuple<int, int, int>, RhoBlock> rho_;            // (w,s,t)
};

// Differential-pair dictionary of a dictionary model, certified by depth
// agreement: pairs are computed at depths K and K+8 and reported only when
// both runs produce them identically; the symmetric difference is returned
// as unstable reports.
struct Dictionary {
    char variant = 'A';
    int K = 0, T = 0;
    std::vector<sseq::PairRecord> pairs;     // sorted by (stem, s)
    std::vector<std::string> unstable;       // excluded pair reports
};
Dictionary dictionary(char variant, int K, int T, int r_max, int s_hi, int stem_hi);

// Algebraic Mahowald invariant of a named sphere class: its image under
// Ext(S^{-1}) -> Ext(variant-B model) (induced by the projection onto the
// (-1)-cell, which is legal because nothing in the other cells maps onto
// cell -1), detection-named, certified stable under K -> K+8.
struct MahowaldResult {
    std::string input;
    std::string name;     // e.g. "1[−1]", "h1[−2]"
    int cell = 0;
    int K_used = 0;
    bool certified = false;
    std::string report;   // non-empty when not certified
};
MahowaldResult mahowald(const std::string& cls, int K = 8, int max_widenings = 3);

}  // namespace bext::borel
