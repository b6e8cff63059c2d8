#pragma once

#include <cstdint>
#include <vector>

namespace hoconv::volterra {

/// One symmetric weight slot: a sorted index tuple and the number of distinct
/// orderings of that tuple in the full n^p tensor.
struct MonomialIndex {
    std::vector<std::uint32_t> indices;
    std::uint64_t multiplicity = 1;

    friend bool operator==(const MonomialIndex&, const MonomialIndex&) = default;
};

/// All non-decreasing p-tuples over [0, n), lexicographic order.
/// Requires n >= 1 and 1 <= p <= 8.
std::vector<MonomialIndex> enumerate_monomials(int n, int p);

/// Binomial coefficient; throws ArithmeticError on 64-bit overflow.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

/// Number of unique order-p weights for an n-element patch: C(n+p-1, p).
std::uint64_t unique_count(int n, int p);

/// Number of monomials of degree <= p (constant included): C(n+p, p).
std::uint64_t cumulative_count(int n, int p);

/// Index tables for incremental monomial evaluation up to `max_order`.
///
/// Degree-p monomial m is the product of its length-(p-1) prefix and one more
/// input, so every product costs a single multiply once the previous degree
/// is known. prefix[p][m] indexes degree p-1 (for p >= 2), last[p][m] is the
/// appended input index. Degree 1 is the identity on inputs.
struct MonomialTable {
    int n = 0;
    int max_order = 0;
    std::vector<std::vector<std::uint32_t>> prefix;  // indexed [p][m], p in 1..max_order
    std::vector<std::vector<std::uint32_t>> last;
    std::vector<std::size_t> offset;                 // start of degree p in a flat product buffer
    std::size_t total = 0;                           // sum over p of unique_count(n, p)

    std::size_t count(int p) const { return last[static_cast<std::size_t>(p)].size(); }

    static MonomialTable build(int n, int max_order);

    /// Fills `products` (size total) with every monomial of degree 1..max_order.
    void evaluate(const double* x, double* products) const;
};

}  // namespace hoconv::volterra
