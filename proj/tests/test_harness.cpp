#include <rlab/errors.hpp>
#include <rlab/harness.hpp>
#include <rlab/version.hpp>

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

using rlab::ExperimentConfig;
using rlab::ExperimentKind;
using doctest::Approx;

namespace {

ExperimentConfig small_scan() {
    ExperimentConfig c;
    c.kind = ExperimentKind::locallaw_scan;
    c.N_grid = {24, 32};
    c.eta_values = {0.5, 0.75};  // keeps eta*N above the default floor at N=24
    c.k = 0;
    c.trials = 8;
    c.base_seed = 99;
    c.threads = 2;
    return c;
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("/tmp/rlab_test_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

} // namespace

TEST_SUITE("harness") {

TEST_CASE("string round trips") {
    for (auto k : {ExperimentKind::locallaw_scan, ExperimentKind::sqrt_eta_rule,
                   ExperimentKind::thermalization, ExperimentKind::two_scale_clt,
                   ExperimentKind::identity_suite})
        CHECK(rlab::kind_from_string(rlab::to_string(k)) == k);
    CHECK_THROWS_AS(rlab::kind_from_string("bogus"), rlab::ValidationError);
    for (auto l : {rlab::Layout::alternating_conj, rlab::Layout::upper_half})
        CHECK(rlab::layout_from_string(rlab::to_string(l)) == l);
}

TEST_CASE("quantiles") {
    std::vector<double> v{5.0, 1.0, 3.0, 2.0, 4.0};
    CHECK(rlab::vec_median(v) == 3.0);
    CHECK(rlab::quantile(v, 0.0) == 1.0);
    CHECK(rlab::quantile(v, 1.0) == 5.0);
    CHECK(rlab::quantile(v, 0.9) == Approx(4.6).epsilon(1e-14));
    CHECK(rlab::vec_mean(v) == Approx(3.0));
    std::vector<double> two{1.0, 2.0};
    CHECK(rlab::vec_median(two) == Approx(1.5));
    CHECK_THROWS_AS(rlab::vec_median({}), rlab::ValidationError);
}

TEST_CASE("config validation messages name the key") {
    auto expect_throw_with = [](ExperimentConfig c, const std::string& key) {
        try {
            c.validate();
            FAIL_CHECK("expected validation failure for ", key);
        } catch (const rlab::ValidationError& e) {
            CHECK(std::string(e.what()).find(key) != std::string::npos);
        }
    };
    auto base = small_scan();

    auto c = base;
    c.trials = 4;
    expect_throw_with(c, "trials");
    c = base;
    c.N_grid = {1};
    expect_throw_with(c, "N");
    c = base;
    c.N_grid.clear();
    expect_throw_with(c, "N");
    c = base;
    c.beta = 3;
    expect_throw_with(c, "beta");
    c = base;
    c.eta_values = {-0.1};
    expect_throw_with(c, "eta");
    c = base;
    c.eta_values = {0.5};
    c.eta_is_exponent = true;
    c.eta_values = {1.5};
    expect_throw_with(c, "eta");
    c = base;
    c.k = 9;
    expect_throw_with(c, "k");
    c = base;
    c.k = 2;
    c.a = 3;
    expect_throw_with(c, "a");
    c = base;
    c.k = 3;
    c.a = 1;
    c.tie_matrices = true;
    expect_throw_with(c, "tie-matrices");
    c = base;
    c.energy = 20.0;
    expect_throw_with(c, "energy");
    c = base;
    c.eta_values = {0.05}; // 24 * 0.05 = 1.2 below even the hard floor
    expect_throw_with(c, "eta");

    c = base;
    c.kind = ExperimentKind::sqrt_eta_rule;
    c.k = 2;
    c.a = 2;
    c.a_ref = 2;
    c.N_grid = {32};
    c.eta_values = {0.45, 0.5, 0.55};
    expect_throw_with(c, "a-ref");
    c.a_ref = 0;
    c.eta_values = {0.45, 0.5};
    expect_throw_with(c, "eta"); // needs >= 3 points
    c.eta_values = {0.45, 0.5, 0.55};
    c.N_grid = {24, 32};
    expect_throw_with(c, "N"); // single N only
    c.N_grid = {32};
    CHECK_NOTHROW(c.validate());

    c = base;
    c.kind = ExperimentKind::thermalization;
    c.s_grid.clear();
    expect_throw_with(c, "s");
    c.s_grid = {0.0, -1.0};
    expect_throw_with(c, "s");
}

TEST_CASE("eta exponent expansion") {
    ExperimentConfig c;
    c.eta_is_exponent = true;
    CHECK(c.eta_for(256, 0.5) == Approx(1.0 / 16.0).epsilon(1e-14));
    c.eta_is_exponent = false;
    CHECK(c.eta_for(256, 0.05) == 0.05);
}

TEST_CASE("config hash ignores execution-only fields") {
    auto a = small_scan();
    auto b = a;
    b.threads = 7;
    b.keep_raw = !a.keep_raw;
    CHECK(a.hash() == b.hash());
    b.k = a.k + 1;
    CHECK(a.hash() != b.hash());
    auto c = a;
    c.base_seed += 1;
    CHECK(a.hash() != c.hash());
}

TEST_CASE("apply_key and config files") {
    ExperimentConfig c;
    c.apply_key("kind", "locallaw-scan");
    c.apply_key("N", "128,256");
    c.apply_key("eta-exp", "0.5");
    c.apply_key("k", "2");
    c.apply_key("a", "2");
    c.apply_key("tie-matrices", "true");
    c.apply_key("beta", "2");
    c.apply_key("dist", "rademacher");
    c.apply_key("trials", "16");
    c.apply_key("seed", "42");
    c.apply_key("recipe", "random-hermitian-traceless");
    CHECK(c.N_grid == std::vector<int>{128, 256});
    CHECK(c.eta_is_exponent);
    CHECK(c.eta_values == std::vector<double>{0.5});
    CHECK(c.tie_matrices);
    CHECK(c.beta == 2);
    CHECK(c.base_seed == 42);
    CHECK_NOTHROW(c.validate());

    CHECK_THROWS_AS(c.apply_key("unknown-key", "1"), rlab::ValidationError);
    CHECK_THROWS_AS(c.apply_key("trials", "many"), rlab::ValidationError);
    CHECK_THROWS_AS(c.apply_key("N", "64,,128"), rlab::ValidationError);

    TempFile f("config.cfg");
    {
        std::ofstream out(f.path);
        out << "# comment line\n"
            << "kind = locallaw-scan\n"
            << "N = 32\n"
            << "eta = 0.5\n"
            << "k = 1\n"
            << "a = 1\n"
            << "trials = 8\n"
            << "seed = 5\n";
    }
    auto from = ExperimentConfig::from_file(f.path);
    CHECK(from.N_grid == std::vector<int>{32});
    CHECK(from.eta_values == std::vector<double>{0.5});
    CHECK(from.base_seed == 5);
    CHECK_THROWS_AS(ExperimentConfig::from_file("/nonexistent/x.cfg"), rlab::IoError);
}

TEST_CASE("scan results are deterministic and thread-count independent") {
    auto c = small_scan();
    c.threads = 1;
    auto r1 = rlab::run_locallaw_scan(c);
    c.threads = 4;
    auto r2 = rlab::run_locallaw_scan(c);
    REQUIRE(r1.stats.size() == r2.stats.size());
    for (std::size_t i = 0; i < r1.stats.size(); ++i) {
        CHECK(r1.stats[i].raw == r2.stats[i].raw); // bitwise
        CHECK(r1.stats[i].median == r2.stats[i].median);
    }
    CHECK(r1.config_hash == r2.config_hash); // threads excluded from the hash
}

TEST_CASE("scan grid covers the product and carries psi columns") {
    auto c = small_scan();
    auto r = rlab::run_locallaw_scan(c);
    REQUIRE(r.stats.size() == 4);
    CHECK(r.stats.front().N == 24);
    CHECK(r.stats.back().N == 32);
    for (const auto& gs : r.stats) {
        CHECK(gs.raw.size() == 8);
        CHECK(gs.median > 0.0);
        CHECK(gs.q90 >= gs.median);
        CHECK(gs.extras.count("psi_median") == 1);
        CHECK(gs.extras.at("psi_factor") == Approx(gs.N * gs.eta).epsilon(1e-14));
        CHECK(gs.extras.at("psi_median") == Approx(gs.median * gs.N * gs.eta).epsilon(1e-12));
    }
    CHECK(r.version_tag == rlab::kVersionTag);
    CHECK(!r.started_at.empty());

    // keep_raw = false drops the trial vectors but not the statistics
    c.keep_raw = false;
    auto lean = rlab::run_locallaw_scan(c);
    CHECK(lean.stats.front().raw.empty());
    CHECK(lean.stats.front().median == r.stats.front().median);
}

TEST_CASE("k=2 scan with mixed traceless count") {
    auto c = small_scan();
    c.k = 2;
    c.a = 1;
    c.N_grid = {24};
    c.eta_values = {0.5};
    c.recipe = rlab::Recipe::random_hermitian;
    auto r = rlab::run_locallaw_scan(c);
    REQUIRE(r.stats.size() == 1);
    CHECK(r.stats.front().median > 0.0);
    CHECK(r.stats.front().extras.at("psi_factor") ==
          Approx(24.0 * 0.5).epsilon(1e-14)); // N eta^{k/2} with k = 2
}

TEST_CASE("fit_scaling recovers an exact power law") {
    rlab::ResultRecord rec;
    rec.config = small_scan();
    for (double eta : {0.1, 0.2, 0.4, 0.8}) {
        rlab::GridStat gs;
        gs.N = 64;
        gs.eta = eta;
        gs.median = 3.0 * std::pow(eta, -1.5);
        rec.stats.push_back(gs);
    }
    auto fit = rlab::fit_scaling(rec, rlab::FitAxis::eta);
    CHECK(fit.slope == Approx(-1.5).epsilon(1e-12));
    CHECK(fit.std_error < 1e-12);
    CHECK(fit.points_used == 4);

    // degenerate axis
    rlab::ResultRecord flat;
    flat.config = rec.config;
    for (int i = 0; i < 3; ++i) {
        rlab::GridStat gs;
        gs.N = 64;
        gs.eta = 0.5;
        gs.median = 1.0;
        flat.stats.push_back(gs);
    }
    CHECK_THROWS_AS(rlab::fit_scaling(flat, rlab::FitAxis::eta), rlab::ValidationError);

    // nonpositive median cannot be log-fitted
    rec.stats.front().median = 0.0;
    CHECK_THROWS_AS(rlab::fit_scaling(rec, rlab::FitAxis::eta), rlab::NumericError);
}

TEST_CASE("fit_scaling over N with eta slaved to the exponent") {
    rlab::ResultRecord rec;
    rec.config = small_scan();
    rec.config.eta_is_exponent = true;
    rec.config.eta_values = {0.5};
    for (int N : {64, 128, 256}) {
        rlab::GridStat gs;
        gs.N = N;
        gs.eta = std::pow(N, -0.5);
        gs.median = 7.0 * std::pow(N, -0.5);
        rec.stats.push_back(gs);
    }
    auto fit = rlab::fit_scaling(rec, rlab::FitAxis::N);
    CHECK(fit.slope == Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("sqrt-eta pairing shares the seed") {
    ExperimentConfig c;
    c.kind = ExperimentKind::sqrt_eta_rule;
    c.N_grid = {32};
    c.eta_values = {0.35, 0.5, 0.7};
    c.k = 2;
    c.a = 2;
    c.a_ref = 0;
    c.tie_matrices = true;
    c.recipe = rlab::Recipe::identity;
    c.trials = 8;
    c.base_seed = 7;
    auto rep = rlab::sqrt_eta_rule_test(c);
    CHECK(rep.primary.config.a == 2);
    CHECK(rep.reference.config.a == 0);
    CHECK(rep.primary.config.base_seed == rep.reference.config.base_seed);
    CHECK(rep.primary.config.kind == ExperimentKind::locallaw_scan);
    CHECK(rep.predicted_gap == Approx(1.0));
    CHECK(rep.gap == Approx(rep.fit_primary.slope - rep.fit_reference.slope).epsilon(1e-14));
    CHECK(rep.primary.stats.front().label == "a=2");
    CHECK(rep.reference.stats.front().label == "a=0");
}

TEST_CASE("thermalization error vanishes at s = 0") {
    ExperimentConfig c;
    c.kind = ExperimentKind::thermalization;
    c.N_grid = {32};
    c.s_grid = {0.0, 1.0};
    c.trials = 8;
    c.base_seed = 3;
    auto r = rlab::thermalization_scan(c);
    REQUIRE(r.stats.size() == 2);
    CHECK(r.stats.front().s == 0.0);
    CHECK(r.stats.front().median == 0.0);
    CHECK(r.stats.front().q90 == 0.0);
    CHECK(r.stats.front().extras.at("phi2") == 1.0);
    CHECK(r.stats.back().median > 0.0);
    CHECK(r.stats.back().extras.at("phi2") ==
          Approx(rlab::phi(1.0) * rlab::phi(1.0)).epsilon(1e-12));
}

TEST_CASE("two-scale modes collapse for pure recipes") {
    ExperimentConfig c;
    c.kind = ExperimentKind::two_scale_clt;
    c.N_grid = {32};
    c.eta_values = {0.4};
    c.trials = 8;
    c.base_seed = 8;

    c.recipe = rlab::Recipe::identity; // B = I: no traceless part
    auto rid = rlab::two_scale_clt(c);
    // the eigenbasis rotation of I is I only up to rounding
    CHECK(rid.stats.front().extras.at("std_traceless") < 1e-12);
    CHECK(rid.stats.front().extras.at("mean_b2") == 0.0);
    CHECK(rid.stats.front().extras.at("mean_trace") == Approx(1.0));
    CHECK(rid.stats.front().extras.at("std_tracial") > 0.0);

    c.recipe = rlab::Recipe::random_hermitian_traceless; // <B> = 0: no tracial part
    auto rtl = rlab::two_scale_clt(c);
    CHECK(rtl.stats.front().extras.at("std_tracial_part") < 1e-13);
    CHECK(rtl.stats.front().extras.at("mean_trace") < 1e-14);
    CHECK(rtl.stats.front().extras.at("std_traceless") > 0.0);
    CHECK(rtl.stats.front().extras.at("ratio") > 0.0);
    CHECK(rtl.stats.front().extras.at("predicted_ratio") ==
          Approx(std::sqrt(0.4) * std::sqrt(rtl.stats.front().extras.at("mean_b2")))
              .epsilon(1e-12));
}

TEST_CASE("identity suite runs every check") {
    ExperimentConfig c;
    c.kind = ExperimentKind::identity_suite;
    c.N_grid = {48};
    c.eta_values = {0.3};
    c.trials = 8;
    c.base_seed = 12;
    auto r = rlab::run_identity_suite(c);
    REQUIRE(r.stats.size() == 11);
    for (const auto& gs : r.stats) {
        CHECK(!gs.label.empty());
        CHECK(gs.extras.count("max") == 1);
        // structural identities hold to near machine precision; the contour
        // route is quadrature-limited
        const double tol = gs.label == "contour" ? 1e-5 : 1e-9;
        CHECK(gs.extras.at("max") < tol);
    }
}

TEST_CASE("json round trip preserves the record") {
    auto c = small_scan();
    auto r = rlab::run_locallaw_scan(c);
    const std::string text = rlab::to_json_string(r);
    auto back = rlab::record_from_json_string(text);
    CHECK(back.config_hash == r.config_hash);
    CHECK(back.config.hash() == r.config.hash());
    REQUIRE(back.stats.size() == r.stats.size());
    for (std::size_t i = 0; i < r.stats.size(); ++i) {
        CHECK(back.stats[i].N == r.stats[i].N);
        CHECK(back.stats[i].eta == r.stats[i].eta);
        CHECK(back.stats[i].median == r.stats[i].median);
        CHECK(back.stats[i].raw == r.stats[i].raw);
        CHECK(back.stats[i].extras == r.stats[i].extras);
    }

    TempFile f("roundtrip.json");
    rlab::persist(r, f.path);
    auto loaded = rlab::load(f.path);
    CHECK(loaded.config_hash == r.config_hash);
    CHECK(loaded.stats.size() == r.stats.size());
}

TEST_CASE("load rejects wrong schema, tampered hash, malformed text") {
    auto r = rlab::run_locallaw_scan(small_scan());
    std::string text = rlab::to_json_string(r);

    auto bad_schema = text;
    const auto pos = bad_schema.find("\"schema_version\": 1");
    REQUIRE(pos != std::string::npos);
    bad_schema.replace(pos, 19, "\"schema_version\": 2");
    CHECK_THROWS_AS(rlab::record_from_json_string(bad_schema), rlab::IoError);

    auto bad_hash = text;
    const auto hpos = bad_hash.find("\"config_hash\": \"");
    REQUIRE(hpos != std::string::npos);
    bad_hash[hpos + 16] = bad_hash[hpos + 16] == 'a' ? 'b' : 'a';
    CHECK_THROWS_AS(rlab::record_from_json_string(bad_hash), rlab::IoError);

    CHECK_THROWS_AS(rlab::record_from_json_string("{ not json"), rlab::IoError);
    CHECK_THROWS_AS(rlab::load("/nonexistent/rec.json"), rlab::IoError);
}

TEST_CASE("csv layout") {
    auto c = small_scan();
    c.keep_raw = false;
    auto r = rlab::run_locallaw_scan(c);
    const std::string csv = rlab::to_csv_string(r);
    CHECK(csv.rfind("N,eta,s,label,statistic,value\n", 0) == 0);
    // every grid point contributes median, mean, q90 plus the psi extras
    std::size_t rows = 0;
    for (char ch : csv)
        if (ch == '\n') ++rows;
    const std::size_t per_point = 3 + r.stats.front().extras.size();
    CHECK(rows == 1 + r.stats.size() * per_point);
    CHECK(csv.find(",median,") != std::string::npos);
    CHECK(csv.find(",psi_median,") != std::string::npos);

    TempFile f("stats.csv");
    rlab::write_csv(r, f.path);
    std::ifstream in(f.path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "N,eta,s,label,statistic,value");
}

TEST_CASE("thread resolution") {
    unsetenv("RESOLVENT_LAB_THREADS");
    CHECK(rlab::resolve_threads(3) == 3);
    CHECK(rlab::resolve_threads(0) >= 1);
    setenv("RESOLVENT_LAB_THREADS", "2", 1);
    CHECK(rlab::resolve_threads(8) == 2);
    setenv("RESOLVENT_LAB_THREADS", "zero", 1);
    CHECK_THROWS_AS(rlab::resolve_threads(1), rlab::ValidationError);
    unsetenv("RESOLVENT_LAB_THREADS");
}

TEST_CASE("chain slot matrices") {
    using rlab::Recipe;
    // traceless slots honor the recipe family
    auto tl = rlab::chain_slot_matrix(16, Recipe::random_hermitian, true, 2, 5);
    CHECK(std::abs(tl.trace()) / 16.0 < 1e-14);
    auto ti = rlab::chain_slot_matrix(16, Recipe::identity, true, 2, 5);
    CHECK(std::abs(ti.trace()) / 16.0 < 1e-14); // identity recipe falls back to a random draw
    // tracial slots: identity recipe pins I, others draw a plain matrix
    auto id = rlab::chain_slot_matrix(16, Recipe::identity, false, 2, 5);
    CHECK((id - rlab::CMatrix::Identity(16, 16)).norm() == 0.0);
    auto plain = rlab::chain_slot_matrix(16, Recipe::random_hermitian, false, 2, 5);
    CHECK(std::abs(plain.trace()) / 16.0 > 1e-14);
    CHECK_THROWS_AS(rlab::chain_slot_matrix(16, Recipe::random_unit_vectors, true, 2, 5),
                    rlab::ValidationError);
    // beta = 1 slots are real
    auto real_slot = rlab::chain_slot_matrix(16, Recipe::random_hermitian, true, 1, 5);
    CHECK(real_slot.imag().norm() == 0.0);
}

} // TEST_SUITE
