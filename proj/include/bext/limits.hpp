// Ext of the doubly-infinite stunted projective limit at a fixed weight,
// computed as a Mittag-Leffler eventual image down a finite depth ladder,
// together with transport maps identifying the answer with a bounded-below
// column model.
//
// For weight w the limit module is the inverse system of stunted modules
// P(-K, -w-1) as K grows. Charts are produced for three depths K, K+8, K+16;
// the maps induced by the depth inclusions form a tower whose image in the
// shallowest chart is certified stable when adding the deepest stage changes
// nothing. Entries are indexed in Borel coordinates (s, t) with t = t_cl +
// w + 1; the classical bidegree of the underlying chart is (s, t - w - 1).
//
// Finite ladders can plateau transiently: a class supported near the bottom
// cells may persist across two consecutive rungs and then die deeper down.
// The transport verification below is therefore the decisive certificate.
// It is one-sided: the transport image always lies inside the eventual image
// of every finite ladder, so equality certifies the entry at that depth, and
// no depth can certify a wrong value. Entries that fail are recomputed on a
// deeper ladder (up to a bounded number of 8-step widenings), keeping each
// entry's value from the shallowest ladder that certified it.
//
// Transports realize the column-model identification:
//   w >= 1: the connecting map of  M_w-part >-> P(-K, top) ->> P(-K, -w-1)
//           carries Ext^{s-1,t_cl}(M_w part) isomorphically onto the
//           eventual image in Ext^{s,t_cl}(P(-K,-w-1)).
//   w <= 0: the same connecting map for the P_{-w} part, plus the map induced
//           by the projection onto the (-1)-cell sphere, give a direct-sum
//           decomposition of the eventual image.
// Both facts are verified entrywise; failures are reported in `problems`,
// never patched.
#pragma once

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "bext/f2.hpp"
#include "bext/module.hpp"
#include "bext/resolution.hpp"

namespace bext::lim {

// Query window in Borel coordinates: coweights c = t - s - w in
// [coweight_min, coweight_max] and filtrations s in [0, s_max]. The default
// matches the chart pages (coweights -2..13, filtrations through 12).
struct Window {
    int coweight_min = -2;
    int coweight_max = 13;
    int s_max = 12;
};

// Base depth policy: largest classical stem in the window plus twice the
// filtration cap plus one periodicity step of slack.
int depth_for(const Window& win);

// Classical internal degree cap needed by a window.
int classical_t_max(const Window& win);

struct Entry {
    int dim = 0;
    bool stabilized = false;
    bool verified = false;
    int base = 0;  // ladder depth this entry was taken from
};

struct Transport {
    // Columns: generators of the model chart at (s-1, t_cl), then (w <= 0)
    // generators of the (-1)-sphere chart at (s, t_cl). Rows: generators of
    // the depth-`base` bottom-rung chart at (s, t_cl). Verified injective
    // with image equal to the eventual image whenever `verified` holds.
    f2::BitMatrix to_limit;
    // Canonical (RREF) basis of the eventual image in bottom-rung coordinates.
    std::vector<f2::BitVector> limit_basis;
    int model_cols = 0;   // leading columns coming from the model chart
    int sphere_cols = 0;  // trailing columns from the (-1)-sphere chart
    bool stabilized = false;
    bool verified = false;
    int base = 0;
};

struct LimitChart {
    int w = 0;
    Window window;
    int base_depth = 0;            // first ladder depth K
    std::vector<int> bases_used;   // every ladder depth attempted, ascending

    // Bottom rung P(-K, -w-1) at the first ladder depth. Entries certified
    // only on a deeper ladder carry transports in that deeper rung's
    // coordinates (see Transport::base).
    std::shared_ptr<const res::Resolution> bottom;
    // Column-model part (cells >= -w, truncated): Ext appears with s-shift 1.
    std::shared_ptr<const res::Resolution> model;
    // (-1)-sphere part, present only for w <= 0.
    std::shared_ptr<const res::Resolution> sphere;

    // Keyed by Borel (s, t); zero entries included inside the window.
    std::map<std::pair<int, int>, Entry> entries;
    std::map<std::pair<int, int>, Transport> transports;

    // Human-readable reports of non-stabilized or non-verified bidegrees.
    std::vector<std::string> problems;

    int dim(int s, int t) const;
    bool fully_stabilized() const;
    bool fully_verified() const;
};

// Compute the limit chart for weight w over the window. When forced_base > 0
// the depth policy is overridden (used to align neighbouring weights for
// rho-transport); widening is disabled in that case and the chart reports
// exactly what the forced ladder certifies.
LimitChart ext_of_limit(int w, const Window& win, int forced_base = -1);

}  // namespace bext::lim
