#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <map>
#include <mutex>
#include <utility>

#include "pbt/partitions.hpp"

namespace pbt {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }
inline double to_double(const BigInt& n) { return n.convert_to<double>(); }

inline BigInt factorial(int n) {
    BigInt f = 1;
    for (int k = 2; k <= n; ++k)
        f *= k;
    return f;
}

inline BigInt binomial(int n, int k) {
    if (k < 0 || k > n)
        return 0;
    BigInt num = 1, den = 1;
    for (int i = 0; i < k; ++i) {
        num *= n - i;
        den *= i + 1;
    }
    return num / den;
}

/// Dimension of the symmetric-group irrep lambda (hook length formula). d_empty = 1.
inline BigInt dim_sym(const Partition& lam) {
    static std::map<std::vector<int>, BigInt> cache;
    static std::mutex mtx;
    {
        std::lock_guard lock(mtx);
        if (auto it = cache.find(lam.parts()); it != cache.end())
            return it->second;
    }
    int n = lam.weight();
    std::vector<int> conj(lam.empty() ? 0 : lam.parts()[0], 0);
    for (int p : lam.parts())
        for (int j = 0; j < p; ++j)
            ++conj[j];
    BigInt hooks = 1;
    for (int i = 0; i < lam.rows(); ++i)
        for (int j = 0; j < lam.parts()[i]; ++j)
            hooks *= (lam.parts()[i] - j - 1) + (conj[j] - i - 1) + 1;
    BigInt dim = factorial(n) / hooks;
    std::lock_guard lock(mtx);
    cache.emplace(lam.parts(), dim);
    return dim;
}

/// Weyl dimension formula for a general staircase weight of length d.
inline BigInt dim_gl(const Staircase& st) {
    int d = st.length();
    BigInt num = 1, den = 1;
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            num *= st.weights[i] - st.weights[j] + j - i;
            den *= j - i;
        }
    return num / den;
}

/// Dimension of the U(d) irrep with highest weight lambda (padded with zeros).
inline BigInt dim_gl(const Partition& lam, int d) {
    if (lam.rows() > d)
        throw std::invalid_argument("dim_gl: " + lam.str() + " has more than " +
                                    std::to_string(d) + " rows");
    static std::map<std::pair<std::vector<int>, int>, BigInt> cache;
    static std::mutex mtx;
    std::pair<std::vector<int>, int> key{lam.parts(), d};
    {
        std::lock_guard lock(mtx);
        if (auto it = cache.find(key); it != cache.end())
            return it->second;
    }
    std::vector<long long> w(lam.parts().begin(), lam.parts().end());
    w.resize(static_cast<std::size_t>(d), 0);
    BigInt dim = dim_gl(Staircase(std::move(w)));
    std::lock_guard lock(mtx);
    cache.emplace(std::move(key), dim);
    return dim;
}

namespace detail {

// Murnaghan-Nakayama: sum over rim hooks of length k spanning rows a..b.
inline BigInt mn_char(const std::vector<int>& lam, const std::vector<int>& rho,
                      std::size_t rho_pos,
                      std::map<std::pair<std::vector<int>, std::size_t>, BigInt>& memo) {
    if (lam.empty())
        return 1;
    auto key = std::make_pair(lam, rho_pos);
    if (auto it = memo.find(key); it != memo.end())
        return it->second;
    const int k = rho[rho_pos];
    BigInt total = 0;
    const int rows = static_cast<int>(lam.size());
    for (int a = 0; a < rows; ++a) {
        for (int b = a; b < rows; ++b) {
            std::vector<int> mu = lam;
            for (int j = a; j < b; ++j)
                mu[j] = lam[j + 1] - 1;
            mu[b] = lam[a] - k + (b - a);
            if (mu[b] < 0)
                continue;
            bool ok = true;
            for (std::size_t j = 0; j + 1 < mu.size() && ok; ++j)
                ok = mu[j] >= mu[j + 1];
            if (!ok)
                continue;
            while (!mu.empty() && mu.back() == 0)
                mu.pop_back();
            BigInt sub = mn_char(mu, rho, rho_pos + 1, memo);
            total += ((b - a) % 2 == 0) ? sub : -sub;
        }
    }
    memo.emplace(std::move(key), total);
    return total;
}

} // namespace detail

/// Symmetric-group character chi^lambda on the conjugacy class of cycle_type.
inline BigInt char_sym(const Partition& lam, const Partition& cycle_type) {
    if (lam.weight() != cycle_type.weight())
        throw std::invalid_argument("char_sym: |" + lam.str() + "| != |" + cycle_type.str() + "|");
    static std::map<std::pair<std::vector<int>, std::vector<int>>, BigInt> cache;
    static std::mutex mtx;
    std::lock_guard lock(mtx);
    auto key = std::make_pair(lam.parts(), cycle_type.parts());
    if (auto it = cache.find(key); it != cache.end())
        return it->second;
    std::map<std::pair<std::vector<int>, std::size_t>, BigInt> memo;
    BigInt value = detail::mn_char(lam.parts(), cycle_type.parts(), 0, memo);
    cache.emplace(std::move(key), value);
    return value;
}

/// Number of permutations in S_n with the given cycle type.
inline BigInt conjugacy_class_size(const Partition& cycle_type) {
    int n = cycle_type.weight();
    BigInt centralizer = 1;
    std::map<int, int> freq;
    for (int p : cycle_type.parts())
        ++freq[p];
    for (auto [len, count] : freq) {
        centralizer *= factorial(count);
        for (int i = 0; i < count; ++i)
            centralizer *= len;
    }
    return factorial(n) / centralizer;
}

} // namespace pbt
