#include "hoconv/volterra/monomials.hpp"

#include <limits>
#include <numeric>
#include <string>

#include "hoconv/core/errors.hpp"

namespace hoconv::volterra {

namespace {

void check_np(int n, int p) {
    if (n < 1) throw ParameterError("monomial support size must be >= 1, got " + std::to_string(n));
    if (p < 1 || p > 8) throw ParameterError("monomial order must be in [1, 8], got " + std::to_string(p));
}

std::uint64_t factorial(std::uint64_t k) {
    std::uint64_t f = 1;
    for (std::uint64_t i = 2; i <= k; ++i) f *= i;
    return f;
}

// p! / prod(count_i!) for a sorted tuple.
std::uint64_t multiplicity_of(const std::vector<std::uint32_t>& t) {
    std::uint64_t denom = 1;
    std::size_t run = 1;
    for (std::size_t i = 1; i <= t.size(); ++i) {
        if (i < t.size() && t[i] == t[i - 1]) {
            ++run;
        } else {
            denom *= factorial(run);
            run = 1;
        }
    }
    return factorial(t.size()) / denom;
}

}  // namespace

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    std::uint64_t r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        const std::uint64_t num = n - k + i;
        // r * num / i is exact at every step; divide by gcd first to delay overflow.
        std::uint64_t a = r, b = num, d = i;
        std::uint64_t g = std::gcd(a, d);
        a /= g;
        d /= g;
        b /= d;  // d now divides num
        if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
            throw ArithmeticError("binomial(" + std::to_string(n) + ", " + std::to_string(k) + ") overflows 64 bits");
        }
        r = a * b;
    }
    return r;
}

std::uint64_t unique_count(int n, int p) {
    check_np(n, p);
    return binomial(static_cast<std::uint64_t>(n + p - 1), static_cast<std::uint64_t>(p));
}

std::uint64_t cumulative_count(int n, int p) {
    check_np(n, p);
    return binomial(static_cast<std::uint64_t>(n + p), static_cast<std::uint64_t>(p));
}

std::vector<MonomialIndex> enumerate_monomials(int n, int p) {
    check_np(n, p);
    std::vector<MonomialIndex> out;
    out.reserve(static_cast<std::size_t>(unique_count(n, p)));
    std::vector<std::uint32_t> t(static_cast<std::size_t>(p), 0);
    const auto top = static_cast<std::uint32_t>(n - 1);
    while (true) {
        out.push_back({t, multiplicity_of(t)});
        // Odometer over non-decreasing tuples.
        int pos = p - 1;
        while (pos >= 0 && t[static_cast<std::size_t>(pos)] == top) --pos;
        if (pos < 0) break;
        const std::uint32_t v = t[static_cast<std::size_t>(pos)] + 1;
        for (auto i = static_cast<std::size_t>(pos); i < t.size(); ++i) t[i] = v;
    }
    return out;
}

MonomialTable MonomialTable::build(int n, int max_order) {
    check_np(n, max_order);
    MonomialTable table;
    table.n = n;
    table.max_order = max_order;
    const auto levels = static_cast<std::size_t>(max_order) + 1;
    table.prefix.resize(levels);
    table.last.resize(levels);
    table.offset.assign(levels + 1, 0);

    // Degree 1: identity. The "first allowed next index" of monomial m is its last index.
    for (std::uint32_t i = 0; i < static_cast<std::uint32_t>(n); ++i) {
        table.prefix[1].push_back(0);
        table.last[1].push_back(i);
    }
    for (std::size_t p = 2; p < levels; ++p) {
        const auto& prev_last = table.last[p - 1];
        for (std::uint32_t m = 0; m < prev_last.size(); ++m) {
            for (std::uint32_t j = prev_last[m]; j < static_cast<std::uint32_t>(n); ++j) {
                table.prefix[p].push_back(m);
                table.last[p].push_back(j);
            }
        }
    }
    std::size_t acc = 0;
    for (std::size_t p = 1; p < levels; ++p) {
        table.offset[p] = acc;
        acc += table.last[p].size();
    }
    table.offset[levels] = acc;
    table.total = acc;
    return table;
}

void MonomialTable::evaluate(const double* x, double* products) const {
    double* deg1 = products + offset[1];
    for (int i = 0; i < n; ++i) deg1[i] = x[i];
    for (int p = 2; p <= max_order; ++p) {
        const auto up = static_cast<std::size_t>(p);
        const double* prev = products + offset[up - 1];
        double* cur = products + offset[up];
        const auto& pre = prefix[up];
        const auto& lst = last[up];
        for (std::size_t m = 0; m < lst.size(); ++m) cur[m] = prev[pre[m]] * x[lst[m]];
    }
}

}  // namespace hoconv::volterra
