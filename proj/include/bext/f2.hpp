// Dense bit-packed linear algebra over GF(2).
//
// Conventions used throughout the engine:
//  * BitMatrix is row-major; a matrix M with r rows and c cols represents the
//    linear map F2^c -> F2^r, x |-> Mx.
//  * All solution/basis choices are canonical (free coordinates zero, bases
//    ordered by pivot), so every computation downstream is bit-for-bit
//    deterministic regardless of scheduling.
//  * Trailing pad bits of every row are kept zero at all times.
#pragma once

#include <cstdint>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace bext::f2 {

class BitVector {
public:
    BitVector() = default;
    explicit BitVector(std::size_t n) : n_(n), w_((n + 63) / 64, 0) {}

    std::size_t size() const { return n_; }
    bool get(std::size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1u; }
    void set(std::size_t i, bool v) {
        std::uint64_t m = std::uint64_t(1) << (i & 63);
        if (v)
            w_[i >> 6] |= m;
        else
            w_[i >> 6] &= ~m;
    }
    void xor_bit(std::size_t i) { w_[i >> 6] ^= std::uint64_t(1) << (i & 63); }
    void xor_with(const BitVector& o);
    bool is_zero() const;
    std::size_t popcount() const;
    // Index of lowest set bit, or -1 if zero.
    long first_set() const;

    std::uint64_t* words() { return w_.data(); }
    const std::uint64_t* words() const { return w_.data(); }
    std::size_t word_count() const { return w_.size(); }

    bool operator==(const BitVector& o) const { return n_ == o.n_ && w_ == o.w_; }

    std::string to_string() const;  // e.g. "10110"

private:
    std::size_t n_ = 0;
    std::vector<std::uint64_t> w_;
};

class BitMatrix {
public:
    BitMatrix() = default;
    BitMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), wpr_((cols + 63) / 64), w_(rows * wpr_, 0) {}

    static BitMatrix identity(std::size_t n);
    static BitMatrix from_rows(const std::vector<BitVector>& rows, std::size_t cols);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    bool get(std::size_t r, std::size_t c) const {
        return (w_[r * wpr_ + (c >> 6)] >> (c & 63)) & 1u;
    }
    void set(std::size_t r, std::size_t c, bool v) {
        std::uint64_t m = std::uint64_t(1) << (c & 63);
        if (v)
            w_[r * wpr_ + (c >> 6)] |= m;
        else
            w_[r * wpr_ + (c >> 6)] &= ~m;
    }

    std::uint64_t* row_words(std::size_t r) { return w_.data() + r * wpr_; }
    const std::uint64_t* row_words(std::size_t r) const { return w_.data() + r * wpr_; }
    std::size_t words_per_row() const { return wpr_; }

    void row_xor(std::size_t dst, std::size_t src);   // row[dst] ^= row[src]
    void row_swap(std::size_t a, std::size_t b);
    bool row_is_zero(std::size_t r) const;
    BitVector row_copy(std::size_t r) const;
    void set_row(std::size_t r, const BitVector& v);

    // Mx for x of size cols(); result size rows().
    BitVector apply(const BitVector& x) const;
    // this * other  (cols() must equal other.rows()).
    BitMatrix multiply(const BitMatrix& other) const;

    bool operator==(const BitMatrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && w_ == o.w_;
    }

    std::string to_string() const;

private:
    std::size_t rows_ = 0, cols_ = 0, wpr_ = 0;
    std::vector<std::uint64_t> w_;
};

BitMatrix transpose(const BitMatrix& m);

struct RrefResult {
    BitMatrix mat;            // reduced row echelon form
    std::vector<int> pivots;  // pivot column per pivot row, strictly increasing
    std::size_t rank() const { return pivots.size(); }
};

// Full Gauss-Jordan reduction. Deterministic: pivots are chosen as the first
// nonzero column scanning rows top-down.
RrefResult rref(const BitMatrix& m);

// Rank of the row space. Destroys the matrix in place: forward elimination
// only, no transform tracking, no back-substitution. Use this instead of
// rref() when only the rank is needed from a large matrix.
std::size_t rank_destructive(BitMatrix& m);

// Augmented echelon span over F2. Rows are pairs (f, a); on insertion f is
// reduced against the stored echelon rows and the same row operations are
// applied to a. An f part that reduces to zero yields its combination
// certificate: the reduced a encodes which inserted rows sum to the given f.
// One pass through a row list therefore gives both the image span (for
// membership tests) and a deterministic left-kernel basis — the single
// elimination at the heart of the resolution builder.
class AugSpan {
public:
    AugSpan(std::size_t f_width, std::size_t a_width) : fw_(f_width), aw_(a_width) {}

    std::size_t rank() const { return f_rows_.size(); }
    std::size_t f_width() const { return fw_; }
    std::size_t a_width() const { return aw_; }

    // Reduce (f, a) against the span. If the f residue is nonzero, the
    // reduced row joins the span and nullopt is returned. Otherwise the
    // state is unchanged and the reduced a is returned.
    std::optional<BitVector> add(BitVector f, BitVector a);

    // Reduce (f, a) without ever inserting: returns the reduced a when the
    // f residue vanishes, nullopt when f is outside the span.
    std::optional<BitVector> reduce_complete(BitVector f, BitVector a) const;

private:
    std::size_t fw_, aw_;
    std::vector<BitVector> f_rows_, a_rows_;
    std::vector<long> pivot_of_;  // f column -> row index, lazily sized
};

// Canonical kernel basis of the map x |-> Mx, derived from rref: one basis
// vector per free column (in increasing column order), with that free
// coordinate set to 1 and the other free coordinates 0.
std::vector<BitVector> kernel_basis(const BitMatrix& m);

// Canonical solution of Mx = b (free coordinates zero), or nullopt if b is
// not in the column space. Throws std::invalid_argument on dimension
// mismatch; size errors are never silent.
std::optional<BitVector> solve(const BitMatrix& m, const BitVector& b);

// Pre-factored system for solving Mx = b repeatedly with the same M.
// Stores the RREF of M together with the elimination transform E (E*M = R),
// so each solve is a matrix-vector product plus a consistency check.
class LinearSystem {
public:
    explicit LinearSystem(const BitMatrix& m);

    std::optional<BitVector> solve(const BitVector& b) const;
    std::size_t rank() const { return pivots_.size(); }
    const std::vector<int>& pivots() const { return pivots_; }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

private:
    std::size_t rows_ = 0, cols_ = 0;
    BitMatrix r_;              // rref of M
    BitMatrix e_;              // elimination transform, E*M = R
    std::vector<int> pivots_;
};

// Incremental row span in echelon form (not reduced): supports rank queries,
// membership tests and deterministic reduction of new rows.
class RowSpan {
public:
    explicit RowSpan(std::size_t width) : width_(width) {}

    std::size_t width() const { return width_; }
    std::size_t rank() const { return rows_.size(); }

    // Reduce v against the span; returns the residue (zero iff v in span).
    BitVector reduce(BitVector v) const;
    bool contains(const BitVector& v) const { return reduce(v).is_zero(); }
    // Insert v if independent; returns true if the rank grew.
    bool add(BitVector v);

    // Canonical basis of the span: RREF rows, top-down.
    std::vector<BitVector> canonical_basis() const;

private:
    std::size_t width_;
    std::vector<BitVector> rows_;  // echelon: strictly increasing pivots
    std::vector<long> pivots_;
};

// Tower of composable maps f_k : V_{k+1} -> V_k given by matrices
// maps[k] (rows = dim V_k, cols = dim V_{k+1}).  Returns a canonical basis
// of im(f_0 ∘ f_1 ∘ ... ∘ f_{K-1}) inside V_0, together with a flag that is
// true iff the image equals the image of the tower with one fewer stage
// (i.e. the image has visibly stabilized at the last stage).
struct EventualImage {
    std::vector<BitVector> basis;  // canonical (RREF) basis in V_0 coordinates
    bool stabilized = false;
};
EventualImage eventual_image(const std::vector<BitMatrix>& maps);

}  // namespace bext::f2
