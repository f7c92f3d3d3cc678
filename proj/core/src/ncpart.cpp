#include "rlab/ncpart.hpp"

#include "rlab/errors.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

namespace rlab {

namespace {

void canonicalize(std::vector<std::vector<int>>& blocks) {
    for (auto& b : blocks) std::sort(b.begin(), b.end());
    std::sort(blocks.begin(), blocks.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
}

} // namespace

Partition Partition::from_blocks(int k, std::vector<std::vector<int>> blocks) {
    if (k < 1) throw ValidationError("partition ground-set size k must be >= 1, got " + std::to_string(k));
    canonicalize(blocks);
    std::vector<char> seen(static_cast<std::size_t>(k) + 1, 0);
    std::size_t total = 0;
    for (const auto& b : blocks) {
        if (b.empty()) throw ValidationError("partition block may not be empty");
        for (int e : b) {
            if (e < 1 || e > k) throw ValidationError("partition element " + std::to_string(e) + " outside {1.." + std::to_string(k) + "}");
            if (seen[static_cast<std::size_t>(e)]) throw ValidationError("partition element " + std::to_string(e) + " appears twice");
            seen[static_cast<std::size_t>(e)] = 1;
        }
        total += b.size();
    }
    if (total != static_cast<std::size_t>(k))
        throw ValidationError("partition blocks cover " + std::to_string(total) + " of " + std::to_string(k) + " elements");
    Partition p;
    p.k = k;
    p.blocks = std::move(blocks);
    return p;
}

Partition Partition::parse(std::string_view text) {
    if (text.empty()) throw ValidationError("empty partition text");
    std::vector<std::vector<int>> blocks;
    std::size_t pos = 0;
    const bool comma_form = text.find(',') != std::string_view::npos;
    while (pos <= text.size()) {
        const std::size_t bar = text.find('|', pos);
        const std::string_view tok = text.substr(pos, bar == std::string_view::npos ? text.size() - pos : bar - pos);
        if (tok.empty()) throw ValidationError("empty block in partition text '" + std::string(text) + "'");
        std::vector<int> block;
        if (comma_form) {
            std::size_t tp = 0;
            while (tp <= tok.size()) {
                const std::size_t c = tok.find(',', tp);
                const std::string_view num = tok.substr(tp, c == std::string_view::npos ? tok.size() - tp : c - tp);
                int v = 0;
                const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
                if (ec != std::errc{} || ptr != num.data() + num.size())
                    throw ValidationError("bad partition element '" + std::string(num) + "'");
                block.push_back(v);
                if (c == std::string_view::npos) break;
                tp = c + 1;
            }
        } else {
            for (char ch : tok) {
                if (ch < '1' || ch > '9')
                    throw ValidationError(std::string("bad partition digit '") + ch + "' (use commas for k > 9)");
                block.push_back(ch - '0');
            }
        }
        blocks.push_back(std::move(block));
        if (bar == std::string_view::npos) break;
        pos = bar + 1;
    }
    int k = 0;
    for (const auto& b : blocks) k += static_cast<int>(b.size());
    return from_blocks(k, std::move(blocks));
}

std::string Partition::to_text() const {
    std::string out;
    const char* elem_sep = (k <= 9) ? "" : ",";
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        if (bi) out += '|';
        for (std::size_t ei = 0; ei < blocks[bi].size(); ++ei) {
            if (ei) out += elem_sep;
            out += std::to_string(blocks[bi][ei]);
        }
    }
    return out;
}

int Partition::block_of(int e) const {
    for (std::size_t bi = 0; bi < blocks.size(); ++bi)
        for (int x : blocks[bi])
            if (x == e) return static_cast<int>(bi) + 1;
    throw ValidationError("element " + std::to_string(e) + " not in partition over {1.." + std::to_string(k) + "}");
}

std::uint64_t catalan(int n) {
    if (n < 0) throw ValidationError("catalan index must be >= 0, got " + std::to_string(n));
    if (n > kMaxCatalan) throw ValidationError("catalan index " + std::to_string(n) + " exceeds exact-integer guard " + std::to_string(kMaxCatalan));
    // C_0 = 1, C_{m+1} = C_m * 2(2m+1)/(m+2); every intermediate is an integer
    std::uint64_t c = 1;
    for (int m = 0; m < n; ++m) c = c * 2 * (2 * static_cast<std::uint64_t>(m) + 1) / (static_cast<std::uint64_t>(m) + 2);
    return c;
}

bool is_noncrossing(const Partition& p) {
    // a<c<b<d with a,b in one block and c,d in another
    for (std::size_t i = 0; i < p.blocks.size(); ++i) {
        for (std::size_t j = i + 1; j < p.blocks.size(); ++j) {
            for (std::size_t a = 0; a + 1 < p.blocks[i].size(); ++a) {
                for (std::size_t b = a + 1; b < p.blocks[i].size(); ++b) {
                    const int lo = p.blocks[i][a], hi = p.blocks[i][b];
                    bool inside = false, outside = false;
                    for (int e : p.blocks[j]) {
                        (e > lo && e < hi ? inside : outside) = true;
                        if (inside && outside) return false;
                    }
                }
            }
        }
    }
    return true;
}

namespace {

using BlockList = std::vector<std::vector<int>>;

/// Non-crossing partitions of an arbitrary ordered ground set, by recursing on
/// the block of the minimum element; gaps between consecutive chosen elements
/// are partitioned independently.
std::vector<BlockList> ncp_rec(const std::vector<int>& ground) {
    if (ground.empty()) return {BlockList{}};
    const int n = static_cast<int>(ground.size()) - 1; // candidates after ground[0]
    std::vector<BlockList> out;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        std::vector<int> block{ground[0]};
        std::vector<std::vector<int>> gaps(1);
        for (int i = 0; i < n; ++i) {
            if (mask & (1u << i)) {
                block.push_back(ground[i + 1]);
                gaps.emplace_back();
            } else {
                gaps.back().push_back(ground[i + 1]);
            }
        }
        std::vector<std::vector<BlockList>> gap_parts;
        for (const auto& gap : gaps)
            if (!gap.empty()) gap_parts.push_back(ncp_rec(gap));
        std::vector<std::size_t> idx(gap_parts.size(), 0);
        while (true) {
            BlockList combined{block};
            for (std::size_t g = 0; g < gap_parts.size(); ++g)
                for (const auto& b : gap_parts[g][idx[g]])
                    combined.push_back(b);
            out.push_back(std::move(combined));
            std::size_t g = 0;
            for (; g < idx.size(); ++g) {
                if (++idx[g] < gap_parts[g].size()) break;
                idx[g] = 0;
            }
            if (g == idx.size()) break;
        }
    }
    return out;
}

} // namespace

std::vector<Partition> enumerate_ncp(int k, int k_max) {
    if (k < 1 || k > k_max)
        throw ValidationError("enumerate_ncp k=" + std::to_string(k) + " outside 1.." + std::to_string(k_max));
    std::vector<int> ground(static_cast<std::size_t>(k));
    std::iota(ground.begin(), ground.end(), 1);
    std::vector<Partition> out;
    for (auto& blocks : ncp_rec(ground)) out.push_back(Partition::from_blocks(k, std::move(blocks)));
    std::sort(out.begin(), out.end());
    return out;
}

Partition kreweras(const Partition& p) {
    if (!is_noncrossing(p)) throw ValidationError("kreweras complement requires a non-crossing partition, got " + p.to_text());
    const int k = p.k;
    // Union-find over the barred copies. ibar and jbar (i<j) may be joined iff
    // no block of p has elements both inside {i+1..j} and outside it; on the
    // interleaved circle that is exactly when the chord ibar--jbar crosses no
    // chord of p. Pairwise compatibility implies joint compatibility.
    std::vector<int> parent(static_cast<std::size_t>(k) + 1);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    };
    for (int i = 1; i <= k; ++i) {
        for (int j = i + 1; j <= k; ++j) {
            bool compatible = true;
            for (const auto& b : p.blocks) {
                bool inside = false, outside = false;
                for (int e : b) {
                    (e > i && e <= j ? inside : outside) = true;
                    if (inside && outside) { compatible = false; break; }
                }
                if (!compatible) break;
            }
            if (compatible) parent[static_cast<std::size_t>(find(i))] = find(j);
        }
    }
    std::vector<std::vector<int>> comp(static_cast<std::size_t>(k) + 1);
    for (int i = 1; i <= k; ++i) comp[static_cast<std::size_t>(find(i))].push_back(i);
    std::vector<std::vector<int>> blocks;
    for (auto& c : comp)
        if (!c.empty()) blocks.push_back(std::move(c));
    return Partition::from_blocks(k, std::move(blocks));
}

std::vector<NonCrossingGraph> enumerate_ncg(int k) {
    if (k < 1 || k > kMaxNcgGround)
        throw ValidationError("enumerate_ncg k=" + std::to_string(k) + " outside 1.." + std::to_string(kMaxNcgGround));
    std::vector<std::pair<int, int>> all_edges;
    for (int i = 1; i <= k; ++i)
        for (int j = i + 1; j <= k; ++j) all_edges.emplace_back(i, j);
    const int m = static_cast<int>(all_edges.size());
    auto crosses = [](std::pair<int, int> e, std::pair<int, int> f) {
        return (e.first < f.first && f.first < e.second && e.second < f.second) ||
               (f.first < e.first && e.first < f.second && f.second < e.second);
    };
    std::vector<NonCrossingGraph> out;
    for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
        NonCrossingGraph g;
        g.k = k;
        bool ok = true;
        for (int i = 0; i < m && ok; ++i) {
            if (!(mask & (1u << i))) continue;
            for (const auto& e : g.edges) {
                if (crosses(e, all_edges[static_cast<std::size_t>(i)])) { ok = false; break; }
            }
            if (ok) g.edges.push_back(all_edges[static_cast<std::size_t>(i)]);
        }
        if (ok) out.push_back(std::move(g));
    }
    return out;
}

Partition connected_components(const NonCrossingGraph& g) {
    if (g.k < 1) throw ValidationError("graph ground-set size must be >= 1");
    std::vector<int> parent(static_cast<std::size_t>(g.k) + 1);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    };
    for (const auto& [a, b] : g.edges) {
        if (a < 1 || b > g.k || a >= b) throw ValidationError("graph edge (" + std::to_string(a) + "," + std::to_string(b) + ") out of range");
        parent[static_cast<std::size_t>(find(a))] = find(b);
    }
    std::vector<std::vector<int>> comp(static_cast<std::size_t>(g.k) + 1);
    for (int i = 1; i <= g.k; ++i) comp[static_cast<std::size_t>(find(i))].push_back(i);
    std::vector<std::vector<int>> blocks;
    for (auto& c : comp)
        if (!c.empty()) blocks.push_back(std::move(c));
    return Partition::from_blocks(g.k, std::move(blocks));
}

} // namespace rlab
