#include <rlab/errors.hpp>
#include <rlab/ncpart.hpp>

#include <doctest.h>

#include <algorithm>
#include <set>

#include "support/oracles.hpp"

using rlab::Partition;

namespace {

Partition cyclic_shift(const Partition& p) {
    // e -> e-1 mod k (1-based); K^2 rotates against the circle orientation,
    // e.g. K^2({12|3}) = K({1|23}) = {13|2}
    std::vector<std::vector<int>> blocks;
    for (const auto& b : p.blocks) {
        std::vector<int> nb;
        for (int e : b) nb.push_back(e == 1 ? p.k : e - 1);
        blocks.push_back(std::move(nb));
    }
    return Partition::from_blocks(p.k, std::move(blocks));
}

} // namespace

TEST_SUITE("ncpart") {

TEST_CASE("catalan numbers") {
    CHECK(rlab::catalan(0) == 1);
    CHECK(rlab::catalan(1) == 1);
    CHECK(rlab::catalan(4) == 14);
    CHECK(rlab::catalan(10) == 16796);
    for (int n = 0; n <= 30; ++n) CHECK(rlab::catalan(n) == oracle::catalan_by_binomial(n));
    CHECK(rlab::catalan(30) == 3814986502092304ull);
    CHECK_THROWS_AS(rlab::catalan(31), rlab::ValidationError);
    CHECK_THROWS_AS(rlab::catalan(-1), rlab::ValidationError);
}

TEST_CASE("enumeration matches the filter oracle") {
    for (int k = 1; k <= 7; ++k) {
        auto got = rlab::enumerate_ncp(k);
        auto want = oracle::ncp_by_filter(k);
        REQUIRE(got.size() == want.size());
        auto sorted = got;
        std::sort(sorted.begin(), sorted.end());
        CHECK(sorted == want);
        CHECK(got.size() == rlab::catalan(k));
        for (const auto& p : got) CHECK(rlab::is_noncrossing(p));
    }
}

TEST_CASE("enumeration is duplicate-free and canonical") {
    auto ps = rlab::enumerate_ncp(6);
    std::set<std::string> seen;
    for (const auto& p : ps) {
        CHECK(seen.insert(p.to_text()).second);
        CHECK(Partition::parse(p.to_text()) == p);
        for (const auto& b : p.blocks) CHECK(std::is_sorted(b.begin(), b.end()));
    }
}

TEST_CASE("ground set guard") {
    CHECK_THROWS_AS(rlab::enumerate_ncp(11), rlab::ValidationError);
    CHECK(rlab::enumerate_ncp(11, 12).size() == rlab::catalan(11));
    CHECK_THROWS_AS(rlab::enumerate_ncp(0), rlab::ValidationError);
}

TEST_CASE("crossing detection") {
    CHECK(!rlab::is_noncrossing(Partition::parse("13|24")));
    CHECK(rlab::is_noncrossing(Partition::parse("14|23")));
    CHECK(rlab::is_noncrossing(Partition::parse("1234")));
    CHECK(!rlab::is_noncrossing(Partition::parse("135|24")));
}

TEST_CASE("parse rejects malformed text") {
    CHECK_THROWS_AS(Partition::parse(""), rlab::ValidationError);
    CHECK_THROWS_AS(Partition::parse("12|2"), rlab::ValidationError);  // duplicate
    CHECK_THROWS_AS(Partition::parse("13|4"), rlab::ValidationError);  // 2 missing
    CHECK_THROWS_AS(Partition::parse("1||2"), rlab::ValidationError);  // empty block
    CHECK_THROWS_AS(Partition::parse("1a|2"), rlab::ValidationError);
    CHECK(Partition::parse("1,3,10|2|4,5,6,7,8,9").k == 10);
}

TEST_CASE("kreweras worked example") {
    CHECK(rlab::kreweras(Partition::parse("134|2|5|6")).to_text() == "12|3|456");
}

TEST_CASE("kreweras matches the search oracle") {
    for (int k = 1; k <= 6; ++k)
        for (const auto& p : rlab::enumerate_ncp(k))
            CHECK(rlab::kreweras(p) == oracle::kreweras_by_search(p));
}

TEST_CASE("kreweras block-count identity") {
    // |pi| + |K(pi)| = k + 1
    for (int k = 1; k <= 7; ++k)
        for (const auto& p : rlab::enumerate_ncp(k))
            CHECK(p.blocks.size() + rlab::kreweras(p).blocks.size() ==
                  static_cast<std::size_t>(k) + 1);
}

TEST_CASE("kreweras squared is the cyclic shift") {
    for (int k = 1; k <= 7; ++k)
        for (const auto& p : rlab::enumerate_ncp(k))
            CHECK(rlab::kreweras(rlab::kreweras(p)) == cyclic_shift(p));
}

TEST_CASE("kreweras extremes") {
    CHECK(rlab::kreweras(Partition::parse("1234")).to_text() == "1|2|3|4");
    CHECK(rlab::kreweras(Partition::parse("1|2|3|4")).to_text() == "1234");
    CHECK_THROWS_AS(rlab::kreweras(Partition::parse("13|24")), rlab::ValidationError);
}

TEST_CASE("non-crossing graph counts") {
    const std::size_t want[] = {2, 8, 48, 352, 2880, 25216};
    for (int k = 2; k <= 7; ++k) CHECK(rlab::enumerate_ncg(k).size() == want[k - 2]);
    CHECK(rlab::enumerate_ncg(1).size() == 1);
    CHECK_THROWS_AS(rlab::enumerate_ncg(8), rlab::ValidationError);
}

TEST_CASE("non-crossing graphs match the subset oracle") {
    for (int k = 1; k <= 5; ++k) {
        auto got = rlab::enumerate_ncg(k);
        auto want = oracle::ncg_by_filter(k);
        REQUIRE(got.size() == want.size());
        std::set<std::vector<std::pair<int, int>>> gs, ws;
        for (auto& g : got) gs.insert(g.edges);
        for (auto& w : want) ws.insert(w);
        CHECK(gs == ws);
    }
}

TEST_CASE("connected components") {
    rlab::NonCrossingGraph g;
    g.k = 5;
    g.edges = {{1, 2}, {2, 3}};
    CHECK(rlab::connected_components(g).to_text() == "123|4|5");
    g.edges = {};
    CHECK(rlab::connected_components(g).to_text() == "1|2|3|4|5");
    g.edges = {{1, 5}, {2, 3}, {3, 4}};
    CHECK(rlab::connected_components(g).to_text() == "15|234");
}

TEST_CASE("components of every enumerated graph are non-crossing") {
    for (const auto& g : rlab::enumerate_ncg(5)) CHECK(rlab::is_noncrossing(rlab::connected_components(g)));
}

} // TEST_SUITE
