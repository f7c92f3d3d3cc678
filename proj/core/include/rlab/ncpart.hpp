#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rlab {

/// A set partition of {1..k} in canonical form: every block sorted ascending,
/// blocks ordered by their minimum element.
struct Partition {
    int k = 0;
    std::vector<std::vector<int>> blocks;

    /// Canonicalizes and validates (disjoint blocks covering {1..k}).
    static Partition from_blocks(int k, std::vector<std::vector<int>> blocks);

    /// Parses the text form "134|2|5|6" (elements concatenated for k <= 9,
    /// comma-separated otherwise, e.g. "1,3,10|2|..."). k is inferred.
    static Partition parse(std::string_view text);

    std::string to_text() const;

    /// Index (1-based) of the block containing element e.
    int block_of(int e) const;

    bool operator==(const Partition&) const = default;
    bool operator<(const Partition& other) const { return blocks < other.blocks; }
};

/// Edge set over {1..k} with no two edges (a,b),(c,d) satisfying a<c<b<d.
struct NonCrossingGraph {
    int k = 0;
    std::vector<std::pair<int, int>> edges; // each (i,j) with i<j, sorted

    bool operator==(const NonCrossingGraph&) const = default;
};

inline constexpr int kMaxNcpGround = 10; // Catalan growth guard
inline constexpr int kMaxNcgGround = 7;  // 2^C(k,2) filter guard
inline constexpr int kMaxCatalan = 30;   // exact in 64 bits

/// C_n = binom(2n,n)/(n+1), exact for n <= 30.
std::uint64_t catalan(int n);

bool is_noncrossing(const Partition& p);

/// All non-crossing partitions of {1..k}, canonical form, sorted
/// lexicographically on the block structure; count = catalan(k).
std::vector<Partition> enumerate_ncp(int k, int k_max = kMaxNcpGround);

/// Kreweras complement: the maximal partition sigma of the interleaved copies
/// {1bar..kbar} such that p together with sigma is non-crossing on the circle
/// 1,1bar,2,2bar,...,k,kbar. Requires p non-crossing.
Partition kreweras(const Partition& p);

/// All non-crossing graphs on {1..k}, deterministic order.
std::vector<NonCrossingGraph> enumerate_ncg(int k);

/// Connected components of g as a partition of {1..k}.
Partition connected_components(const NonCrossingGraph& g);

} // namespace rlab
