#include "bext/f2.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <stdexcept>

namespace bext::f2 {

namespace {

inline void words_xor(std::uint64_t* dst, const std::uint64_t* src, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] ^= src[i];
}

}  // namespace

void BitVector::xor_with(const BitVector& o) {
    if (n_ != o.n_) throw std::invalid_argument("BitVector::xor_with: size mismatch");
    words_xor(w_.data(), o.w_.data(), w_.size());
}

bool BitVector::is_zero() const {
    for (auto w : w_)
        if (w) return false;
    return true;
}

std::size_t BitVector::popcount() const {
    std::size_t c = 0;
    for (auto w : w_) c += std::size_t(std::popcount(w));
    return c;
}

long BitVector::first_set() const {
    for (std::size_t i = 0; i < w_.size(); ++i)
        if (w_[i]) return long(i * 64 + std::size_t(std::countr_zero(w_[i])));
    return -1;
}

std::string BitVector::to_string() const {
    std::string s(n_, '0');
    for (std::size_t i = 0; i < n_; ++i)
        if (get(i)) s[i] = '1';
    return s;
}

BitMatrix BitMatrix::identity(std::size_t n) {
    BitMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i, true);
    return m;
}

BitMatrix BitMatrix::from_rows(const std::vector<BitVector>& rows, std::size_t cols) {
    BitMatrix m(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != cols)
            throw std::invalid_argument("BitMatrix::from_rows: row width mismatch");
        std::memcpy(m.row_words(r), rows[r].words(), m.words_per_row() * 8);
    }
    return m;
}

void BitMatrix::row_xor(std::size_t dst, std::size_t src) {
    words_xor(row_words(dst), row_words(src), wpr_);
}

void BitMatrix::row_swap(std::size_t a, std::size_t b) {
    if (a == b) return;
    std::uint64_t* pa = row_words(a);
    std::uint64_t* pb = row_words(b);
    for (std::size_t i = 0; i < wpr_; ++i) std::swap(pa[i], pb[i]);
}

bool BitMatrix::row_is_zero(std::size_t r) const {
    const std::uint64_t* p = row_words(r);
    for (std::size_t i = 0; i < wpr_; ++i)
        if (p[i]) return false;
    return true;
}

BitVector BitMatrix::row_copy(std::size_t r) const {
    BitVector v(cols_);
    std::memcpy(v.words(), row_words(r), wpr_ * 8);
    return v;
}

void BitMatrix::set_row(std::size_t r, const BitVector& v) {
    if (v.size() != cols_) throw std::invalid_argument("BitMatrix::set_row: width mismatch");
    std::memcpy(row_words(r), v.words(), wpr_ * 8);
}

BitVector BitMatrix::apply(const BitVector& x) const {
    if (x.size() != cols_) throw std::invalid_argument("BitMatrix::apply: size mismatch");
    BitVector out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        const std::uint64_t* rw = row_words(r);
        std::uint64_t acc = 0;
        for (std::size_t i = 0; i < wpr_; ++i) acc ^= rw[i] & x.words()[i];
        out.set(r, std::popcount(acc) & 1u);
    }
    return out;
}

BitMatrix BitMatrix::multiply(const BitMatrix& other) const {
    if (cols_ != other.rows())
        throw std::invalid_argument("BitMatrix::multiply: inner dimension mismatch");
    BitMatrix out(rows_, other.cols());
    // Row-by-row accumulation: out[r] = xor of other rows selected by bits of
    // this row.  Word-level inner loop keeps this fast for the sizes we use.
    for (std::size_t r = 0; r < rows_; ++r) {
        const std::uint64_t* rw = row_words(r);
        std::uint64_t* ow = out.row_words(r);
        for (std::size_t wi = 0; wi < wpr_; ++wi) {
            std::uint64_t w = rw[wi];
            while (w) {
                std::size_t k = wi * 64 + std::size_t(std::countr_zero(w));
                w &= w - 1;
                if (k < other.rows()) words_xor(ow, other.row_words(k), out.words_per_row());
            }
        }
    }
    return out;
}

std::string BitMatrix::to_string() const {
    std::string s;
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) s += get(r, c) ? '1' : '0';
        s += '\n';
    }
    return s;
}

BitMatrix transpose(const BitMatrix& m) {
    BitMatrix t(m.cols(), m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const std::uint64_t* rw = m.row_words(r);
        for (std::size_t wi = 0; wi < m.words_per_row(); ++wi) {
            std::uint64_t w = rw[wi];
            while (w) {
                std::size_t c = wi * 64 + std::size_t(std::countr_zero(w));
                w &= w - 1;
                t.set(c, r, true);
            }
        }
    }
    return t;
}

RrefResult rref(const BitMatrix& m) {
    RrefResult res{m, {}};
    BitMatrix& a = res.mat;
    std::size_t r = 0;
    for (std::size_t c = 0; c < a.cols() && r < a.rows(); ++c) {
        std::size_t pr = r;
        while (pr < a.rows() && !a.get(pr, c)) ++pr;
        if (pr == a.rows()) continue;
        a.row_swap(r, pr);
        for (std::size_t i = 0; i < a.rows(); ++i)
            if (i != r && a.get(i, c)) a.row_xor(i, r);
        res.pivots.push_back(int(c));
        ++r;
    }
    return res;
}

std::size_t rank_destructive(BitMatrix& m) {
    const std::size_t wpr = m.words_per_row();
    std::vector<long> pivot_of(m.cols(), -1);
    std::size_t rank = 0;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        std::uint64_t* a = m.row_words(r);
        std::size_t wi = 0;
        while (wi < wpr) {
            if (a[wi] == 0) {
                ++wi;
                continue;
            }
            std::size_t c = wi * 64 + std::size_t(std::countr_zero(a[wi]));
            long p = pivot_of[c];
            if (p < 0) {
                pivot_of[c] = long(r);
                ++rank;
                break;
            }
            const std::uint64_t* b = m.row_words(std::size_t(p));
            for (std::size_t k = wi; k < wpr; ++k) a[k] ^= b[k];
        }
    }
    return rank;
}

std::optional<BitVector> AugSpan::add(BitVector f, BitVector a) {
    if (f.size() != fw_ || a.size() != aw_)
        throw std::invalid_argument("AugSpan::add: width mismatch");
    if (pivot_of_.empty() && fw_ > 0) pivot_of_.assign(fw_, -1);
    std::uint64_t* fw = f.words();
    const std::size_t wc = f.word_count();
    std::size_t wi = 0;
    while (wi < wc) {
        if (fw[wi] == 0) {
            ++wi;
            continue;
        }
        std::size_t c = wi * 64 + std::size_t(std::countr_zero(fw[wi]));
        long p = pivot_of_[c];
        if (p < 0) {
            pivot_of_[c] = static_cast<long>(f_rows_.size());
            f_rows_.push_back(std::move(f));
            a_rows_.push_back(std::move(a));
            return std::nullopt;
        }
        // Echelon rows are zero before their pivot, so the xor can start at
        // the current word.
        const std::uint64_t* bw = f_rows_[static_cast<std::size_t>(p)].words();
        for (std::size_t k = wi; k < wc; ++k) fw[k] ^= bw[k];
        a.xor_with(a_rows_[static_cast<std::size_t>(p)]);
    }
    return a;
}

std::optional<BitVector> AugSpan::reduce_complete(BitVector f, BitVector a) const {
    if (f.size() != fw_ || a.size() != aw_)
        throw std::invalid_argument("AugSpan::reduce_complete: width mismatch");
    std::uint64_t* fw = f.words();
    const std::size_t wc = f.word_count();
    std::size_t wi = 0;
    while (wi < wc) {
        if (fw[wi] == 0) {
            ++wi;
            continue;
        }
        std::size_t c = wi * 64 + std::size_t(std::countr_zero(fw[wi]));
        long p = pivot_of_.empty() ? -1 : pivot_of_[c];
        if (p < 0) return std::nullopt;
        const std::uint64_t* bw = f_rows_[static_cast<std::size_t>(p)].words();
        for (std::size_t k = wi; k < wc; ++k) fw[k] ^= bw[k];
        a.xor_with(a_rows_[static_cast<std::size_t>(p)]);
    }
    return a;
}

std::vector<BitVector> kernel_basis(const BitMatrix& m) {
    RrefResult rr = rref(m);
    std::vector<bool> is_pivot(m.cols(), false);
    for (int p : rr.pivots) is_pivot[std::size_t(p)] = true;
    std::vector<BitVector> out;
    for (std::size_t c = 0; c < m.cols(); ++c) {
        if (is_pivot[c]) continue;
        BitVector v(m.cols());
        v.set(c, true);
        for (std::size_t pr = 0; pr < rr.pivots.size(); ++pr)
            if (rr.mat.get(pr, c)) v.set(std::size_t(rr.pivots[pr]), true);
        out.push_back(std::move(v));
    }
    return out;
}

LinearSystem::LinearSystem(const BitMatrix& m) : rows_(m.rows()), cols_(m.cols()) {
    r_ = m;
    e_ = BitMatrix::identity(rows_);
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols_ && r < rows_; ++c) {
        std::size_t pr = r;
        while (pr < rows_ && !r_.get(pr, c)) ++pr;
        if (pr == rows_) continue;
        r_.row_swap(r, pr);
        e_.row_swap(r, pr);
        for (std::size_t i = 0; i < rows_; ++i)
            if (i != r && r_.get(i, c)) {
                r_.row_xor(i, r);
                e_.row_xor(i, r);
            }
        pivots_.push_back(int(c));
        ++r;
    }
}

std::optional<BitVector> LinearSystem::solve(const BitVector& b) const {
    if (b.size() != rows_)
        throw std::invalid_argument("LinearSystem::solve: rhs dimension mismatch");
    BitVector c = e_.apply(b);
    // Rows beyond the rank are zero rows of R; consistency requires the
    // corresponding transformed rhs bits to vanish.
    for (std::size_t i = pivots_.size(); i < rows_; ++i)
        if (c.get(i)) return std::nullopt;
    BitVector x(cols_);
    for (std::size_t i = 0; i < pivots_.size(); ++i)
        if (c.get(i)) x.set(std::size_t(pivots_[i]), true);
    return x;
}

std::optional<BitVector> solve(const BitMatrix& m, const BitVector& b) {
    if (b.size() != m.rows())
        throw std::invalid_argument("solve: rhs dimension mismatch");
    return LinearSystem(m).solve(b);
}

BitVector RowSpan::reduce(BitVector v) const {
    if (v.size() != width_) throw std::invalid_argument("RowSpan::reduce: width mismatch");
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        long p = pivots_[i];
        if (p >= 0 && v.get(std::size_t(p))) v.xor_with(rows_[i]);
    }
    return v;
}

bool RowSpan::add(BitVector v) {
    v = reduce(std::move(v));
    long p = v.first_set();
    if (p < 0) return false;
    // Keep rows sorted by pivot for determinism.
    std::size_t pos = 0;
    while (pos < rows_.size() && pivots_[pos] < p) ++pos;
    rows_.insert(rows_.begin() + long(pos), std::move(v));
    pivots_.insert(pivots_.begin() + long(pos), p);
    return true;
}

std::vector<BitVector> RowSpan::canonical_basis() const {
    // Fully reduce upward: subtract each row from earlier rows that have a
    // bit in its pivot column.
    std::vector<BitVector> rows = rows_;
    for (std::size_t i = rows.size(); i-- > 0;) {
        long p = pivots_[i];
        for (std::size_t j = 0; j < i; ++j)
            if (rows[j].get(std::size_t(p))) rows[j].xor_with(rows[i]);
    }
    return rows;
}

EventualImage eventual_image(const std::vector<BitMatrix>& maps) {
    if (maps.empty()) throw std::invalid_argument("eventual_image: empty tower");
    for (std::size_t k = 0; k + 1 < maps.size(); ++k)
        if (maps[k].cols() != maps[k + 1].rows())
            throw std::invalid_argument("eventual_image: tower maps are not composable");

    auto image_span = [](const BitMatrix& m) {
        RowSpan s(m.rows());
        BitMatrix t = transpose(m);  // image = row space of the transpose
        for (std::size_t r = 0; r < t.rows(); ++r) s.add(t.row_copy(r));
        return s;
    };

    BitMatrix composite = maps[0];
    RowSpan prev = image_span(composite);  // image with one stage
    RowSpan last = prev;
    for (std::size_t k = 1; k < maps.size(); ++k) {
        composite = composite.multiply(maps[k]);
        last = image_span(composite);
    }
    EventualImage out;
    if (maps.size() == 1) {
        // A single stage has no shorter tower to compare against.
        out.stabilized = false;
        out.basis = last.canonical_basis();
        return out;
    }
    // Recompute the image with one fewer stage for the stabilization test.
    BitMatrix shorter = maps[0];
    for (std::size_t k = 1; k + 1 < maps.size(); ++k) shorter = shorter.multiply(maps[k]);
    RowSpan prev_span = image_span(shorter);
    out.stabilized = (prev_span.rank() == last.rank());
    out.basis = last.canonical_basis();
    return out;
}

}  // namespace bext::f2
