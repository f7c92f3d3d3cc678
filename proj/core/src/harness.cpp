#include "rlab/harness.hpp"

#include "rlab/errors.hpp"
#include "rlab/quadrature.hpp"
#include "rlab/rng.hpp"
#include "rlab/version.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace rlab {

using nlohmann::json;

ExperimentKind kind_from_string(const std::string& s) {
    if (s == "locallaw-scan") return ExperimentKind::locallaw_scan;
    if (s == "sqrt-eta-rule") return ExperimentKind::sqrt_eta_rule;
    if (s == "thermalization") return ExperimentKind::thermalization;
    if (s == "two-scale-clt") return ExperimentKind::two_scale_clt;
    if (s == "identity-suite") return ExperimentKind::identity_suite;
    throw ValidationError("kind: unknown experiment kind '" + s + "'");
}

std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::locallaw_scan: return "locallaw-scan";
        case ExperimentKind::sqrt_eta_rule: return "sqrt-eta-rule";
        case ExperimentKind::thermalization: return "thermalization";
        case ExperimentKind::two_scale_clt: return "two-scale-clt";
        case ExperimentKind::identity_suite: return "identity-suite";
    }
    return "?";
}

Layout layout_from_string(const std::string& s) {
    if (s == "alternating-conj") return Layout::alternating_conj;
    if (s == "upper-half") return Layout::upper_half;
    throw ValidationError("layout: unknown layout '" + s + "' (alternating-conj|upper-half)");
}

std::string to_string(Layout l) {
    return l == Layout::alternating_conj ? "alternating-conj" : "upper-half";
}

// ---------------------------------------------------------------- statistics

double quantile(std::vector<double> values, double p) {
    if (values.empty()) throw ValidationError("quantile of empty sample");
    std::sort(values.begin(), values.end());
    const double h = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= values.size()) return values.back();
    const double frac = h - std::floor(h);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

double vec_median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

double vec_mean(const std::vector<double>& values) {
    if (values.empty()) throw ValidationError("mean of empty sample");
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc / static_cast<double>(values.size());
}

int resolve_threads(int requested) {
    if (const char* env = std::getenv("RESOLVENT_LAB_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return n;
        } catch (...) {
        }
        throw ValidationError("RESOLVENT_LAB_THREADS must be a positive integer");
    }
    if (requested > 0) return requested;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

// ---------------------------------------------------------------- config

double ExperimentConfig::eta_for(int N, double value) const {
    return eta_is_exponent ? std::pow(static_cast<double>(N), -value) : value;
}

namespace {

bool needs_eta(ExperimentKind k) { return k != ExperimentKind::thermalization; }

bool traceless_capable(Recipe r) {
    return r == Recipe::random_hermitian_traceless || r == Recipe::signed_projection_traceless ||
           r == Recipe::random_hermitian || r == Recipe::identity;
}

} // namespace

void ExperimentConfig::validate() const {
    if (trials < 8) throw ValidationError("trials: must be >= 8, got " + std::to_string(trials));
    if (N_grid.empty()) throw ValidationError("N: grid must be nonempty");
    for (int n : N_grid)
        if (n < 2 || n > 1 << 16)
            throw ValidationError("N: grid value out of range [2, 65536]: " + std::to_string(n));
    if (beta != 1 && beta != 2) throw ValidationError("beta: must be 1 or 2");
    if (k < 0 || k > 8) throw ValidationError("k: must be in [0, 8]");
    if (a < 0 || a > std::max(k, 0)) throw ValidationError("a: traceless count must be in [0, k]");
    if (std::abs(energy) > 10.0) throw ValidationError("energy: |E| must be <= 10");
    if (tie_matrices && k >= 2 && a != 0 && a != k)
        throw ValidationError("tie-matrices: needs a uniform traceless count (a = 0 or a = k)");
    if (eta_floor_times_n < 2.0)
        throw ValidationError("eta-floor: eta*N floor below the hard minimum 2");
    if (needs_eta(kind)) {
        if (eta_values.empty()) throw ValidationError("eta: grid must be nonempty");
        for (double v : eta_values) {
            if (eta_is_exponent && (v <= 0.0 || v >= 1.0))
                throw ValidationError("eta-exp: exponents must lie in (0, 1)");
            if (!eta_is_exponent && (v <= 0.0 || v > 1e3))
                throw ValidationError("eta: values must lie in (0, 1e3]");
            for (int n : N_grid) {
                const double eta = eta_for(n, v);
                if (eta * n < eta_floor_times_n * (1.0 - 1e-9))
                    throw ValidationError("eta: grid point eta*N = " + std::to_string(eta * n) +
                                          " below floor " + std::to_string(eta_floor_times_n) +
                                          " (set eta-floor to admit it, hard minimum 2)");
            }
        }
    }
    switch (kind) {
        case ExperimentKind::locallaw_scan:
            if (k >= 1 && recipe == Recipe::random_unit_vectors)
                throw ValidationError("recipe: chain experiments need a matrix recipe");
            if (k >= 1 && a > 0 && !traceless_capable(recipe))
                throw ValidationError("recipe: cannot produce traceless chain matrices");
            break;
        case ExperimentKind::sqrt_eta_rule:
            if (a_ref < 0 || a_ref > k)
                throw ValidationError("a-ref: comparison traceless count must be in [0, k]");
            if (a_ref == a)
                throw ValidationError("a-ref: sub-configs must differ in traceless count");
            if (k < 1) throw ValidationError("k: sqrt-eta-rule needs k >= 1");
            if (static_cast<int>(eta_values.size()) < 3)
                throw ValidationError("eta: slope fit needs >= 3 eta grid points");
            if (N_grid.size() != 1)
                throw ValidationError("N: sqrt-eta-rule fixes a single N");
            break;
        case ExperimentKind::thermalization:
            if (s_grid.empty()) throw ValidationError("s: time grid must be nonempty");
            for (double s : s_grid)
                if (s < 0.0 || s > 1e3) throw ValidationError("s: times must lie in [0, 1e3]");
            if (!traceless_capable(recipe))
                throw ValidationError("recipe: thermalization needs a traceless-capable recipe");
            break;
        case ExperimentKind::two_scale_clt:
            if (recipe == Recipe::random_unit_vectors)
                throw ValidationError("recipe: two-scale-clt needs a matrix recipe");
            break;
        case ExperimentKind::identity_suite:
            break;
    }
}

namespace {

json config_to_json_impl(const ExperimentConfig& c, bool for_hash) {
    json j;
    j["kind"] = to_string(c.kind);
    j["N"] = c.N_grid;
    j["eta"] = c.eta_values;
    j["eta-is-exponent"] = c.eta_is_exponent;
    j["eta-floor"] = c.eta_floor_times_n;
    j["k"] = c.k;
    j["a"] = c.a;
    j["a-ref"] = c.a_ref;
    j["tie-matrices"] = c.tie_matrices;
    j["energy"] = c.energy;
    j["layout"] = to_string(c.layout);
    j["beta"] = c.beta;
    j["dist"] = to_string(c.dist);
    j["trials"] = c.trials;
    j["seed"] = c.base_seed;
    j["recipe"] = to_string(c.recipe);
    j["s"] = c.s_grid;
    if (!for_hash) {
        // execution details: not part of the experiment's identity
        j["threads"] = c.threads;
        j["keep-raw"] = c.keep_raw;
    }
    return j;
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    try {
        c.kind = kind_from_string(j.at("kind").get<std::string>());
        c.N_grid = j.at("N").get<std::vector<int>>();
        c.eta_values = j.at("eta").get<std::vector<double>>();
        c.eta_is_exponent = j.at("eta-is-exponent").get<bool>();
        c.eta_floor_times_n = j.at("eta-floor").get<double>();
        c.k = j.at("k").get<int>();
        c.a = j.at("a").get<int>();
        c.a_ref = j.at("a-ref").get<int>();
        c.tie_matrices = j.at("tie-matrices").get<bool>();
        c.energy = j.at("energy").get<double>();
        c.layout = layout_from_string(j.at("layout").get<std::string>());
        c.beta = j.at("beta").get<int>();
        c.dist = dist_from_string(j.at("dist").get<std::string>());
        c.trials = j.at("trials").get<int>();
        c.base_seed = j.at("seed").get<std::uint64_t>();
        c.recipe = recipe_from_string(j.at("recipe").get<std::string>());
        c.s_grid = j.at("s").get<std::vector<double>>();
        c.threads = j.value("threads", 0);
        c.keep_raw = j.value("keep-raw", true);
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed config in result file: ") + e.what());
    }
    return c;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

int parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const int n = std::stoi(v, &pos);
        if (pos == v.size()) return n;
    } catch (...) {
    }
    throw ValidationError(key + ": expected an integer, got '" + v + "'");
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos == v.size()) return x;
    } catch (...) {
    }
    throw ValidationError(key + ": expected a number, got '" + v + "'");
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const unsigned long long n = std::stoull(v, &pos);
        if (pos == v.size()) return n;
    } catch (...) {
    }
    throw ValidationError(key + ": expected an unsigned integer, got '" + v + "'");
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ValidationError(key + ": expected a boolean, got '" + v + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    for (const auto& item : split_list(v)) out.push_back(parse_int(key, item));
    return out;
}

std::vector<double> parse_double_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const auto& item : split_list(v)) out.push_back(parse_double(key, item));
    return out;
}

} // namespace

std::uint64_t ExperimentConfig::hash() const {
    return fnv1a(config_to_json_impl(*this, true).dump());
}

void ExperimentConfig::apply_key(const std::string& key, const std::string& value) {
    if (key == "kind") kind = kind_from_string(value);
    else if (key == "N") N_grid = parse_int_list(key, value);
    else if (key == "eta") { eta_values = parse_double_list(key, value); eta_is_exponent = false; }
    else if (key == "eta-exp") { eta_values = parse_double_list(key, value); eta_is_exponent = true; }
    else if (key == "eta-floor") eta_floor_times_n = parse_double(key, value);
    else if (key == "k") k = parse_int(key, value);
    else if (key == "a") a = parse_int(key, value);
    else if (key == "a-ref") a_ref = parse_int(key, value);
    else if (key == "tie-matrices") tie_matrices = parse_bool(key, value);
    else if (key == "energy") energy = parse_double(key, value);
    else if (key == "layout") layout = layout_from_string(value);
    else if (key == "beta") beta = parse_int(key, value);
    else if (key == "dist") dist = dist_from_string(value);
    else if (key == "trials") trials = parse_int(key, value);
    else if (key == "seed") base_seed = parse_u64(key, value);
    else if (key == "recipe") recipe = recipe_from_string(value);
    else if (key == "s") s_grid = parse_double_list(key, value);
    else if (key == "threads") threads = parse_int(key, value);
    else if (key == "keep-raw") keep_raw = parse_bool(key, value);
    else throw ValidationError("unknown config key '" + key + "'");
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    ExperimentConfig c;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash_pos = line.find('#'); hash_pos != std::string::npos)
            line = line.substr(0, hash_pos);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config file line " + std::to_string(lineno) +
                                  ": expected 'key = value'");
        c.apply_key(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return c;
}

// ---------------------------------------------------------------- work queue

namespace {

std::uint64_t trial_seed(std::uint64_t base, int grid_index, int trial) {
    return split_seed(split_seed(base, static_cast<std::uint64_t>(grid_index)),
                      static_cast<std::uint64_t>(trial));
}

/// Runs fn(grid_index, trial) over the full grid x trials rectangle on a
/// thread pool. Each task writes only its own slot, so the result layout is
/// identical for any thread count.
template <class T, class Fn>
std::vector<std::vector<T>> run_tasks(int n_grid, int trials, int threads, Fn&& fn) {
    const int total = n_grid * trials;
    std::vector<std::vector<T>> out(static_cast<std::size_t>(n_grid));
    for (auto& row : out) row.resize(static_cast<std::size_t>(trials));
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex err_mtx;
    auto worker = [&]() {
        for (;;) {
            const int id = next.fetch_add(1);
            if (id >= total) return;
            const int g = id / trials;
            const int t = id % trials;
            try {
                out[static_cast<std::size_t>(g)][static_cast<std::size_t>(t)] = fn(g, t);
            } catch (...) {
                {
                    std::lock_guard<std::mutex> lk(err_mtx);
                    if (!first_error) first_error = std::current_exception();
                }
                next.store(total);
                return;
            }
        }
    };
    const int nt = std::clamp(threads, 1, std::max(total, 1));
    if (nt <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(nt));
        for (int i = 0; i < nt; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);
    return out;
}

std::string now_iso8601() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void finalize_stat(GridStat& gs, std::vector<double> raw, bool keep_raw) {
    gs.median = vec_median(raw);
    gs.mean = vec_mean(raw);
    gs.q90 = quantile(raw, 0.9);
    if (keep_raw) gs.raw = std::move(raw);
}

} // namespace

CMatrix chain_slot_matrix(int N, Recipe recipe, bool traceless, int beta, std::uint64_t seed) {
    Recipe r;
    if (traceless) {
        switch (recipe) {
            // identity has no traceless analogue, so a mixed chain under the
            // identity recipe draws its traceless slots at random
            case Recipe::identity:
            case Recipe::random_hermitian:
            case Recipe::random_hermitian_traceless:
                r = Recipe::random_hermitian_traceless;
                break;
            case Recipe::signed_projection_traceless:
                r = Recipe::signed_projection_traceless;
                break;
            default:
                throw ValidationError("recipe: cannot produce traceless chain matrices");
        }
    } else {
        r = recipe == Recipe::identity ? Recipe::identity : Recipe::random_hermitian;
    }
    return make_observables(N, r, seed, beta == 1).primary;
}

namespace {

std::vector<SpectralKernel> layout_kernels(int k, double energy, double eta, Layout layout) {
    std::vector<SpectralKernel> ks;
    ks.reserve(static_cast<std::size_t>(k));
    for (int j = 1; j <= k; ++j) {
        const bool upper = layout == Layout::upper_half || (j % 2 == 1);
        ks.push_back(SpectralKernel::resolvent(Complex(energy, upper ? eta : -eta)));
    }
    return ks;
}

struct GridPoint {
    int N;
    double eta;
};

std::vector<GridPoint> make_grid(const ExperimentConfig& c) {
    std::vector<GridPoint> grid;
    for (int n : c.N_grid)
        for (double v : c.eta_values) grid.push_back({n, c.eta_for(n, v)});
    return grid;
}

} // namespace

// ---------------------------------------------------------------- scans

ResultRecord run_locallaw_scan(const ExperimentConfig& config) {
    config.validate();
    if (config.kind != ExperimentKind::locallaw_scan)
        throw ValidationError("kind: run_locallaw_scan needs kind = locallaw-scan");
    const auto grid = make_grid(config);
    const int threads = resolve_threads(config.threads);

    ResultRecord rec;
    rec.config = config;
    rec.config_hash = config.hash();
    rec.version_tag = kVersionTag;
    rec.started_at = now_iso8601();

    auto trial_fn = [&](int g, int t) -> double {
        const auto [N, eta] = grid[static_cast<std::size_t>(g)];
        const std::uint64_t ts = trial_seed(config.base_seed, g, t);
        WignerSample sample = sample_wigner(N, config.beta, config.dist, split_seed(ts, 0));
        if (config.k == 0) {
            const Complex z(config.energy, eta);
            return std::abs(resolvent_trace(sample, z) - stieltjes(z));
        }
        std::vector<CMatrix> mats;
        mats.reserve(static_cast<std::size_t>(config.k));
        for (int i = 0; i < config.k; ++i) {
            const std::uint64_t slot = config.tie_matrices ? 1 : 1 + static_cast<std::uint64_t>(i);
            mats.push_back(chain_slot_matrix(N, config.recipe, i < config.a, config.beta,
                                             split_seed(ts, slot)));
        }
        ChainSpec chain = ChainSpec::make(layout_kernels(config.k, config.energy, eta, config.layout),
                                          std::move(mats));
        const Complex value = chain_avg(sample, chain);
        const Complex det = m_avg(chain);
        return std::abs(value - det);
    };

    const auto raw = run_tasks<double>(static_cast<int>(grid.size()), config.trials, threads, trial_fn);

    for (std::size_t g = 0; g < grid.size(); ++g) {
        GridStat gs;
        gs.N = grid[g].N;
        gs.eta = grid[g].eta;
        finalize_stat(gs, raw[g], config.keep_raw);
        const double psi_factor = config.k == 0
                                      ? gs.N * gs.eta
                                      : gs.N * std::pow(gs.eta, config.k / 2.0);
        gs.extras["psi_factor"] = psi_factor;
        gs.extras["psi_median"] = psi_factor * gs.median;
        gs.extras["psi_q90"] = psi_factor * gs.q90;
        rec.stats.push_back(std::move(gs));
    }
    rec.finished_at = now_iso8601();
    return rec;
}

ScalingFit fit_scaling(const ResultRecord& record, FitAxis axis) {
    const auto& stats = record.stats;
    if (stats.size() < 3)
        throw ValidationError("fit_scaling: needs >= 3 grid points, got " +
                              std::to_string(stats.size()));
    for (const auto& gs : stats)
        if (gs.label != stats.front().label)
            throw ValidationError("fit_scaling: record mixes sub-series; fit them separately");
    const bool eta_slaved =
        record.config.eta_is_exponent && record.config.eta_values.size() == 1;
    if (axis == FitAxis::N) {
        for (const auto& gs : stats)
            if (!eta_slaved && gs.eta != stats.front().eta)
                throw ValidationError("fit_scaling: eta varies across the grid; N-fit needs "
                                      "constant or N-slaved eta");
    } else {
        for (const auto& gs : stats)
            if (gs.N != stats.front().N)
                throw ValidationError("fit_scaling: N varies across the grid; eta-fit needs fixed N");
    }

    std::vector<double> xs, ys;
    for (const auto& gs : stats) {
        const double x = axis == FitAxis::N ? static_cast<double>(gs.N) : gs.eta;
        if (gs.median <= 0.0)
            throw NumericError("fit_scaling: nonpositive median error; log fit undefined");
        xs.push_back(std::log(x));
        ys.push_back(std::log(gs.median));
    }
    const double xbar = vec_mean(xs);
    const double ybar = vec_mean(ys);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - xbar) * (xs[i] - xbar);
        sxy += (xs[i] - xbar) * (ys[i] - ybar);
    }
    if (sxx < 1e-12) throw ValidationError("fit_scaling: degenerate grid (no variation along axis)");
    ScalingFit fit;
    fit.points_used = static_cast<int>(xs.size());
    fit.slope = sxy / sxx;
    fit.intercept = ybar - fit.slope * xbar;
    double rss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
        rss += r * r;
    }
    const int dof = fit.points_used - 2;
    fit.std_error = dof > 0 ? std::sqrt(rss / dof / sxx) : 0.0;
    return fit;
}

EtaRuleReport sqrt_eta_rule_test(const ExperimentConfig& config) {
    config.validate();
    if (config.kind != ExperimentKind::sqrt_eta_rule)
        throw ValidationError("kind: sqrt_eta_rule_test needs kind = sqrt-eta-rule");
    auto make_sub = [&](int a_count) {
        ExperimentConfig sub = config;
        sub.kind = ExperimentKind::locallaw_scan;
        sub.a = a_count;
        sub.a_ref = -1;
        return sub;
    };
    EtaRuleReport rep;
    rep.primary = run_locallaw_scan(make_sub(config.a));
    rep.reference = run_locallaw_scan(make_sub(config.a_ref));
    for (auto& gs : rep.primary.stats) gs.label = "a=" + std::to_string(config.a);
    for (auto& gs : rep.reference.stats) gs.label = "a=" + std::to_string(config.a_ref);
    rep.fit_primary = fit_scaling(rep.primary, FitAxis::eta);
    rep.fit_reference = fit_scaling(rep.reference, FitAxis::eta);
    rep.gap = rep.fit_primary.slope - rep.fit_reference.slope;
    rep.predicted_gap = (config.a - config.a_ref) / 2.0;
    return rep;
}

ResultRecord thermalization_scan(const ExperimentConfig& config) {
    config.validate();
    if (config.kind != ExperimentKind::thermalization)
        throw ValidationError("kind: thermalization_scan needs kind = thermalization");
    const int threads = resolve_threads(config.threads);
    const int ns = static_cast<int>(config.s_grid.size());

    std::vector<double> phi2(static_cast<std::size_t>(ns));
    for (int i = 0; i < ns; ++i) {
        const double p = phi(config.s_grid[static_cast<std::size_t>(i)]);
        phi2[static_cast<std::size_t>(i)] = p * p;
    }

    ResultRecord rec;
    rec.config = config;
    rec.config_hash = config.hash();
    rec.version_tag = kVersionTag;
    rec.started_at = now_iso8601();

    // one sample per (N, trial) serves the whole s grid
    auto trial_fn = [&](int g, int t) -> std::vector<double> {
        const int N = config.N_grid[static_cast<std::size_t>(g)];
        const std::uint64_t ts = trial_seed(config.base_seed, g, t);
        WignerSample sample = sample_wigner(N, config.beta, config.dist, split_seed(ts, 0));
        const CMatrix A = chain_slot_matrix(N, config.recipe, true, config.beta, split_seed(ts, 1));
        const CMatrix mats[2] = {A, A};
        ChainEvaluator ev(sample, mats);
        const Complex ref = ev.heisenberg(0.0); // <A^2> by functional calculus
        std::vector<double> errs(static_cast<std::size_t>(ns));
        for (int i = 0; i < ns; ++i) {
            const Complex h = ev.heisenberg(config.s_grid[static_cast<std::size_t>(i)]);
            errs[static_cast<std::size_t>(i)] =
                std::abs(h - phi2[static_cast<std::size_t>(i)] * ref);
        }
        return errs;
    };

    const auto rows = run_tasks<std::vector<double>>(static_cast<int>(config.N_grid.size()),
                                                     config.trials, threads, trial_fn);

    for (std::size_t g = 0; g < config.N_grid.size(); ++g) {
        for (int i = 0; i < ns; ++i) {
            GridStat gs;
            gs.N = config.N_grid[g];
            gs.s = config.s_grid[static_cast<std::size_t>(i)];
            std::vector<double> raw;
            raw.reserve(static_cast<std::size_t>(config.trials));
            for (int t = 0; t < config.trials; ++t)
                raw.push_back(rows[g][static_cast<std::size_t>(t)][static_cast<std::size_t>(i)]);
            finalize_stat(gs, std::move(raw), config.keep_raw);
            gs.extras["phi2"] = phi2[static_cast<std::size_t>(i)];
            rec.stats.push_back(std::move(gs));
        }
    }
    rec.finished_at = now_iso8601();
    return rec;
}

namespace {

struct ModeSample {
    Complex tracial;        // <G> - m, the unit tracial channel
    Complex traceless;      // <G B°> with B° the traceless part of B
    Complex trace_part;     // <B>, so trace_part * tracial is B's tracial contribution
    double b2 = 0.0;        // <B° B°*>
};

double complex_std(const std::vector<Complex>& v) {
    Complex mean = 0.0;
    for (const Complex& x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double acc = 0.0;
    for (const Complex& x : v) acc += std::norm(x - mean);
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

} // namespace

ResultRecord two_scale_clt(const ExperimentConfig& config) {
    config.validate();
    if (config.kind != ExperimentKind::two_scale_clt)
        throw ValidationError("kind: two_scale_clt needs kind = two-scale-clt");
    const auto grid = make_grid(config);
    const int threads = resolve_threads(config.threads);

    ResultRecord rec;
    rec.config = config;
    rec.config_hash = config.hash();
    rec.version_tag = kVersionTag;
    rec.started_at = now_iso8601();

    auto trial_fn = [&](int g, int t) -> ModeSample {
        const auto [N, eta] = grid[static_cast<std::size_t>(g)];
        const std::uint64_t ts = trial_seed(config.base_seed, g, t);
        WignerSample sample = sample_wigner(N, config.beta, config.dist, split_seed(ts, 0));
        const CMatrix B =
            make_observables(N, config.recipe, split_seed(ts, 1), config.beta == 1).primary;
        const Complex z(config.energy, eta);
        ModeSample m;
        m.trace_part = B.trace() / static_cast<double>(N);
        m.b2 = (B - m.trace_part * CMatrix::Identity(N, N)).squaredNorm() / static_cast<double>(N);
        sample.ensure_eigen(true);
        m.tracial = resolvent_trace(sample, z) - stieltjes(z);
        // <G B°> from the eigenbasis diagonal of B, shifted by the trace
        const CVector d = eigenbasis_diag(sample, B);
        Complex acc = 0.0;
        for (int i = 0; i < N; ++i) acc += (d(i) - m.trace_part) / (sample.lambda(i) - z);
        m.traceless = acc / static_cast<double>(N);
        return m;
    };

    const auto modes =
        run_tasks<ModeSample>(static_cast<int>(grid.size()), config.trials, threads, trial_fn);

    for (std::size_t g = 0; g < grid.size(); ++g) {
        const int N = grid[g].N;
        const double eta = grid[g].eta;
        std::vector<Complex> vtr, vtl, vcontrib;
        std::vector<double> raw, b2s, traces;
        for (const ModeSample& m : modes[g]) {
            vtr.push_back(m.tracial);
            vtl.push_back(m.traceless);
            vcontrib.push_back(m.trace_part * m.tracial);
            raw.push_back(std::abs(m.traceless));
            b2s.push_back(m.b2);
            traces.push_back(std::abs(m.trace_part));
        }
        GridStat gs;
        gs.N = N;
        gs.eta = eta;
        finalize_stat(gs, std::move(raw), config.keep_raw);
        const double std_tr = complex_std(vtr);
        const double std_tl = complex_std(vtl);
        const double b2 = vec_mean(b2s);
        gs.extras["std_tracial"] = std_tr;
        gs.extras["std_traceless"] = std_tl;
        gs.extras["std_tracial_part"] = complex_std(vcontrib);
        gs.extras["ratio"] = std_tl / std::max(std_tr, 1e-300);
        gs.extras["predicted_ratio"] = std::sqrt(eta) * std::sqrt(b2);
        gs.extras["scale_tracial"] = 1.0 / (N * eta);
        gs.extras["scale_traceless"] = std::sqrt(b2) / (N * std::sqrt(eta));
        gs.extras["mean_b2"] = b2;
        gs.extras["mean_trace"] = vec_mean(traces);
        rec.stats.push_back(std::move(gs));
    }
    rec.finished_at = now_iso8601();
    return rec;
}

// ---------------------------------------------------------------- identities

namespace {

struct RandomChainDraw {
    std::vector<SpectralKernel> kernels;
    std::vector<CMatrix> mats;
};

RandomChainDraw random_chain(Rng& rng, int n_kernels, int n_mats, int N, double eta_min,
                             double eta_max, bool mixed_halves) {
    RandomChainDraw d;
    for (int j = 0; j < n_kernels; ++j) {
        const double e = -1.5 + 3.0 * rng.next_double();
        const double eta = eta_min + (eta_max - eta_min) * rng.next_double();
        const double sign = mixed_halves && rng.next_sign() < 0 ? -1.0 : 1.0;
        d.kernels.push_back(SpectralKernel::resolvent(Complex(e, sign * eta)));
    }
    for (int i = 0; i < n_mats; ++i) {
        const Recipe r = rng.next_double() < 0.5 ? Recipe::random_hermitian_traceless
                                                 : Recipe::random_hermitian;
        d.mats.push_back(make_observables(N, r, rng.next_u64()).primary);
    }
    return d;
}

double rel_diff(Complex got, Complex want) {
    const double scale = std::max(std::abs(want), 1e-300);
    return std::abs(got - want) / scale;
}

using IdentityFn = std::function<double(const ExperimentConfig&, std::uint64_t)>;

double ward_residual(const ExperimentConfig& c, std::uint64_t ts) {
    Rng rng(split_seed(ts, 9));
    const int N = c.N_grid.front();
    const double eta0 = c.eta_for(N, c.eta_values.front());
    WignerSample s = sample_wigner(N, c.beta, c.dist, split_seed(ts, 0));
    const Complex z(-1.0 + 2.0 * rng.next_double(), eta0 * (1.0 + rng.next_double()));
    const CMatrix I = CMatrix::Identity(N, N);
    const CMatrix mats[2] = {I, I};
    ChainEvaluator ev(s, mats);
    const SpectralKernel ks[2] = {SpectralKernel::resolvent(z),
                                  SpectralKernel::resolvent(std::conj(z))};
    const Complex gg = ev.avg(ks);
    Complex img = 0.0;
    for (int i = 0; i < N; ++i) img += z.imag() / std::norm(s.lambda(i) - z);
    img /= static_cast<double>(N);
    return rel_diff(gg, img / z.imag());
}

double resolvent_pair_residual(const ExperimentConfig& c, std::uint64_t ts) {
    Rng rng(split_seed(ts, 9));
    const int N = c.N_grid.front();
    const double eta0 = c.eta_for(N, c.eta_values.front());
    WignerSample s = sample_wigner(N, c.beta, c.dist, split_seed(ts, 0));
    const Complex z1(-1.0 + 2.0 * rng.next_double(), eta0 * (1.0 + rng.next_double()));
    const Complex z2(-1.0 + 2.0 * rng.next_double(),
                     eta0 * (1.0 + rng.next_double()) * (rng.next_sign() < 0 ? -1.0 : 1.0));
    const CMatrix I = CMatrix::Identity(N, N);
    const CMatrix mats[2] = {I, I};
    ChainEvaluator ev(s, mats);
    const SpectralKernel ks[2] = {SpectralKernel::resolvent(z1), SpectralKernel::resolvent(z2)};
    const Complex lhs = ev.avg(ks);
    const Complex rhs = (resolvent_trace(s, z1) - resolvent_trace(s, z2)) / (z1 - z2);
    return rel_diff(lhs, rhs);
}

double conjugation_residual(const ExperimentConfig& c, std::uint64_t ts) {
    Rng rng(split_seed(ts, 9));
    const int N = std::min(c.N_grid.front(), 128);
    const double eta0 = std::max(c.eta_for(N, c.eta_values.front()), 0.05);
    WignerSample s = sample_wigner(N, c.beta, c.dist, split_seed(ts, 0));
    auto d = random_chain(rng, 2, 2, N, eta0, 2.0 * eta0, true);
    ChainSpec fwd = ChainSpec::make(d.kernels, d.mats);
    const Complex lhs = std::conj(chain_avg(s, fwd));
    std::vector<SpectralKernel> rk = {SpectralKernel::resolvent(std::conj(d.kernels[0].z)),
                                      SpectralKernel::resolvent(std::conj(d.kernels[1].z))};
    std::vector<CMatrix> rm = {d.mats[1].adjoint(), d.mats[0].adjoint()};
    ChainSpec rev = ChainSpec::make(rk, rm);
    const Complex rhs = chain_avg(s, rev);
    return rel_diff(rhs, lhs);
}

double eigen_reconstruction_residual(const ExperimentConfig& c, std::uint64_t ts) {
    const int N = c.N_grid.front();
    WignerSample s = sample_wigner(N, c.beta, c.dist, split_seed(ts, 0));
    s.ensure_eigen(true);
    if (s.is_real()) {
        const Eigen::MatrixXd rec = s.Ur * s.lambda.asDiagonal() * s.Ur.transpose();
        return (rec - s.Wr).norm() / s.Wr.norm();
    }
    const CMatrix rec = s.Uc * s.lambda.asDiagonal().toDenseMatrix().cast<Complex>() * s.Uc.adjoint();
    return (rec - s.Wc).norm() / s.Wc.norm();
}

double dual_route_avg_residual(const ExperimentConfig& c, std::uint64_t ts) {
    Rng rng(split_seed(ts, 9));
    const int N = std::min(c.N_grid.front(), 128);
    const int k = std::clamp(c.k, 1, 3);
    WignerSample s = sample_wigner(N, c.beta, c.dist, split_seed(ts, 0));
    auto d = random_chain(rng, k, k, N, 0.1, 0.5, true);
    ChainSpec chain = ChainSpec::make(d.kernels, d.mats);
    return rel_diff(chain_avg(s, chain), chain_avg_direct(s, chain));
}

double dual_route_iso_residual(const ExperimentConfig& c, std::uint64_t ts) {
    Rng rng(split_seed(ts, 9));
    const int N = std::min(c.N_grid.front(), 128);
    const int k = std::clamp(c.k, 1, 3);
    WignerSample s = sample_wigner(N, c.beta, c.dist, split_seed(ts, 0));
    auto d = random_chain(rng, k + 1, k, N, 0.1, 0.5, true);
    const ObservableSet obs = make_observables(N, Recipe::random_unit_vectors, split_seed(ts, 7));
    ChainSpec chain = ChainSpec::make(d.kernels, d.mats, N);
    return rel_diff(chain_iso(s, chain, obs.x, obs.y), chain_iso_direct(s, chain, obs.x, obs.y));
}

double identity_insertion_residual(const ExperimentConfig& c, std::uint64_t ts) {
    Rng rng(split_seed(ts, 9));
    const int N = 16;
    const int k = std::clamp(c.k + 1, 3, 5); // kernels in the inserted chain
    auto d = random_chain(rng, k, k - 1, N, 0.1, 0.6, true);
    // matrix slot i (1-based) carries the inserted identity between z_i, z_{i+1}
    const int i = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(k - 1));
    d.mats[static_cast<std::size_t>(i - 1)] = CMatrix::Identity(N, N);
    const Complex zi = d.kernels[static_cast<std::size_t>(i - 1)].z;
    const Complex zn = d.kernels[static_cast<std::size_t>(i)].z;
    ChainSpec inserted = ChainSpec::make(d.kernels, d.mats, N);
    const CMatrix lhs = m_matrix(inserted).matrix_part;

    // shorter chains: drop the identity slot plus one of its two kernels
    auto chain_without = [&](int dropped_kernel) {
        std::vector<SpectralKernel> ks2;
        for (int j = 0; j < k; ++j)
            if (j != dropped_kernel) ks2.push_back(d.kernels[static_cast<std::size_t>(j)]);
        std::vector<CMatrix> ms2;
        for (int j = 0; j + 1 < k; ++j)
            if (j != i - 1) ms2.push_back(d.mats[static_cast<std::size_t>(j)]);
        return ChainSpec::make(ks2, ms2, N);
    };
    const CMatrix ma = m_matrix(chain_without(i)).matrix_part;     // keeps z_i
    const CMatrix mb = m_matrix(chain_without(i - 1)).matrix_part; // keeps z_{i+1}
    const CMatrix rhs = (ma - mb) / (zi - zn);
    return (lhs - rhs).norm() / std::max(lhs.norm(), 1e-300);
}

double q_formula_residual(const ExperimentConfig& c, std::uint64_t ts) {
    Rng rng(split_seed(ts, 9));
    const int N = 16;
    const int k = std::clamp(c.k, 2, 4);
    auto d = random_chain(rng, k, k - 1, N, 0.1, 0.6, true);
    ChainSpec chain = ChainSpec::make(d.kernels, d.mats, N);
    const CMatrix a = m_matrix(chain).matrix_part;
    const CMatrix b = m_matrix_q(chain).matrix_part;
    return (a - b).norm() / std::max(a.norm(), 1e-300);
}

double recursion_residual_max(const ExperimentConfig& c, std::uint64_t ts, RecVariant variant) {
    Rng rng(split_seed(ts, 9));
    const int N = 16;
    const int k = std::clamp(c.k, 2, 4);
    auto d = random_chain(rng, k, k - 1, N, 0.1, 0.6, true);
    ChainSpec chain = ChainSpec::make(d.kernels, d.mats, N);
    double worst = 0.0;
    for (int j = 1; j <= k; ++j) worst = std::max(worst, recursion_residual(chain, j, variant));
    return worst;
}

double contour_residual(const ExperimentConfig& c, std::uint64_t ts) {
    Rng rng(split_seed(ts, 9));
    const int N = std::min(c.N_grid.front(), 64);
    WignerSample s = sample_wigner(N, c.beta, c.dist, split_seed(ts, 0));
    s.ensure_eigen(false);
    const int k = 2;
    std::vector<Complex> zs;
    double min_eta = 1e9;
    for (int j = 0; j < k; ++j) {
        const Complex z(-1.0 + 2.0 * rng.next_double(), 0.2 + 0.3 * rng.next_double());
        zs.push_back(z);
        min_eta = std::min(min_eta, z.imag());
    }
    const double zeta = 0.5 * min_eta;
    Complex lhs = 0.0;
    for (int i = 0; i < N; ++i) {
        Complex p = 1.0;
        for (const Complex& z : zs) p /= (s.lambda(i) - z);
        lhs += p;
    }
    lhs /= static_cast<double>(N);
    // Im <G(x + i zeta)> = (1/N) sum zeta / ((lambda-x)^2 + zeta^2)
    auto integrand = [&](double x) -> Complex {
        double img = 0.0;
        for (int i = 0; i < N; ++i) {
            const double u = s.lambda(i) - x;
            img += zeta / (u * u + zeta * zeta);
        }
        Complex p = img / static_cast<double>(N);
        for (const Complex& z : zs) p /= (x - z + Complex(0.0, zeta));
        return p;
    };
    const double L = 60.0;
    const Complex rhs = integrate(integrand, -L, L, 1e-9) / std::acos(-1.0);
    return rel_diff(rhs, lhs);
}

} // namespace

ResultRecord run_identity_suite(const ExperimentConfig& config) {
    config.validate();
    if (config.kind != ExperimentKind::identity_suite)
        throw ValidationError("kind: run_identity_suite needs kind = identity-suite");
    if (config.eta_values.empty())
        throw ValidationError("eta: identity-suite needs a base eta");
    const int threads = resolve_threads(config.threads);

    const std::vector<std::pair<std::string, IdentityFn>> identities = {
        {"ward", ward_residual},
        {"resolvent-pair", resolvent_pair_residual},
        {"conjugation", conjugation_residual},
        {"eigen-reconstruction", eigen_reconstruction_residual},
        {"dual-route-avg", dual_route_avg_residual},
        {"dual-route-iso", dual_route_iso_residual},
        {"identity-insertion", identity_insertion_residual},
        {"q-formula", q_formula_residual},
        {"recursion-1",
         [](const ExperimentConfig& c, std::uint64_t ts) {
             return recursion_residual_max(c, ts, RecVariant::rec1);
         }},
        {"recursion-2",
         [](const ExperimentConfig& c, std::uint64_t ts) {
             return recursion_residual_max(c, ts, RecVariant::rec2);
         }},
        {"contour", contour_residual},
    };

    ResultRecord rec;
    rec.config = config;
    rec.config_hash = config.hash();
    rec.version_tag = kVersionTag;
    rec.started_at = now_iso8601();

    auto trial_fn = [&](int g, int t) -> double {
        const std::uint64_t ts = trial_seed(config.base_seed, g, t);
        return identities[static_cast<std::size_t>(g)].second(config, ts);
    };
    const auto raw = run_tasks<double>(static_cast<int>(identities.size()), config.trials, threads,
                                       trial_fn);

    for (std::size_t g = 0; g < identities.size(); ++g) {
        GridStat gs;
        gs.N = config.N_grid.front();
        gs.eta = config.eta_for(gs.N, config.eta_values.front());
        gs.label = identities[g].first;
        finalize_stat(gs, raw[g], config.keep_raw);
        gs.extras["max"] = *std::max_element(raw[g].begin(), raw[g].end());
        rec.stats.push_back(std::move(gs));
    }
    rec.finished_at = now_iso8601();
    return rec;
}

// ---------------------------------------------------------------- persistence

namespace {

json stat_to_json(const GridStat& gs) {
    json j;
    j["N"] = gs.N;
    j["eta"] = gs.eta;
    j["s"] = gs.s;
    j["label"] = gs.label;
    j["median"] = gs.median;
    j["mean"] = gs.mean;
    j["q90"] = gs.q90;
    j["raw"] = gs.raw;
    j["extras"] = gs.extras;
    return j;
}

GridStat stat_from_json(const json& j) {
    GridStat gs;
    try {
        gs.N = j.at("N").get<int>();
        gs.eta = j.at("eta").get<double>();
        gs.s = j.at("s").get<double>();
        gs.label = j.at("label").get<std::string>();
        gs.median = j.at("median").get<double>();
        gs.mean = j.at("mean").get<double>();
        gs.q90 = j.at("q90").get<double>();
        gs.raw = j.at("raw").get<std::vector<double>>();
        gs.extras = j.at("extras").get<std::map<std::string, double>>();
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed grid entry in result file: ") + e.what());
    }
    return gs;
}

std::string hash_hex(std::uint64_t h) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json record_to_json(const ResultRecord& rec) {
    json j;
    j["schema_version"] = kResultSchemaVersion;
    j["version_tag"] = rec.version_tag;
    j["config_hash"] = hash_hex(rec.config_hash);
    j["config"] = config_to_json_impl(rec.config, false);
    j["started_at"] = rec.started_at;
    j["finished_at"] = rec.finished_at;
    json grid = json::array();
    for (const auto& gs : rec.stats) grid.push_back(stat_to_json(gs));
    j["grid"] = grid;
    return j;
}

ResultRecord record_from_json(const json& j) {
    if (!j.is_object() || !j.contains("schema_version"))
        throw IoError("result file lacks a schema_version field");
    const int ver = j.at("schema_version").get<int>();
    if (ver != kResultSchemaVersion)
        throw IoError("result schema version mismatch: file has " + std::to_string(ver) +
                      ", this build reads " + std::to_string(kResultSchemaVersion));
    ResultRecord rec;
    try {
        rec.version_tag = j.at("version_tag").get<std::string>();
        rec.config = config_from_json(j.at("config"));
        rec.started_at = j.at("started_at").get<std::string>();
        rec.finished_at = j.at("finished_at").get<std::string>();
        for (const auto& item : j.at("grid")) rec.stats.push_back(stat_from_json(item));
        const std::string stored = j.at("config_hash").get<std::string>();
        rec.config_hash = std::stoull(stored, nullptr, 16);
    } catch (const IoError&) {
        throw;
    } catch (const std::exception& e) {
        throw IoError(std::string("malformed result file: ") + e.what());
    }
    if (rec.config_hash != rec.config.hash())
        throw IoError("result file config_hash does not match its config");
    return rec;
}

json fit_to_json(const ScalingFit& f) {
    return json{{"slope", f.slope},
                {"intercept", f.intercept},
                {"std_error", f.std_error},
                {"points_used", f.points_used}};
}

} // namespace

std::string to_json_string(const ResultRecord& record) { return record_to_json(record).dump(2); }

ResultRecord record_from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw IoError(std::string("result file is not valid JSON: ") + e.what());
    }
    return record_from_json(j);
}

std::string to_json_string(const EtaRuleReport& report) {
    json j;
    j["schema_version"] = kResultSchemaVersion;
    j["kind"] = "sqrt-eta-rule";
    j["primary"] = record_to_json(report.primary);
    j["reference"] = record_to_json(report.reference);
    j["fit_primary"] = fit_to_json(report.fit_primary);
    j["fit_reference"] = fit_to_json(report.fit_reference);
    j["gap"] = report.gap;
    j["predicted_gap"] = report.predicted_gap;
    return j.dump(2);
}

void persist(const ResultRecord& record, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << to_json_string(record) << '\n';
    if (!out) throw IoError("failed writing '" + path + "'");
}

ResultRecord load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open result file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return record_from_json_string(buf.str());
}

namespace {

void append_csv_value(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

void append_stat_rows(std::string& out, const GridStat& gs) {
    auto row = [&](const std::string& stat, double value) {
        out += std::to_string(gs.N);
        out += ',';
        append_csv_value(out, gs.eta);
        out += ',';
        append_csv_value(out, gs.s);
        out += ',';
        out += gs.label;
        out += ',';
        out += stat;
        out += ',';
        append_csv_value(out, value);
        out += '\n';
    };
    row("median", gs.median);
    row("mean", gs.mean);
    row("q90", gs.q90);
    for (const auto& [key, value] : gs.extras) row(key, value);
}

constexpr const char* kCsvHeader = "N,eta,s,label,statistic,value\n";

} // namespace

std::string to_csv_string(const ResultRecord& record) {
    std::string out = kCsvHeader;
    for (const auto& gs : record.stats) append_stat_rows(out, gs);
    return out;
}

std::string to_csv_string(const EtaRuleReport& report) {
    std::string out = kCsvHeader;
    for (const auto& gs : report.primary.stats) append_stat_rows(out, gs);
    for (const auto& gs : report.reference.stats) append_stat_rows(out, gs);
    const int N = report.primary.config.N_grid.empty() ? 0 : report.primary.config.N_grid.front();
    auto fit_rows = [&](const std::string& label, const ScalingFit& f) {
        const std::pair<const char*, double> rows[] = {
            {"slope", f.slope},
            {"intercept", f.intercept},
            {"std_error", f.std_error},
            {"points_used", static_cast<double>(f.points_used)}};
        for (const auto& [key, value] : rows) {
            out += std::to_string(N);
            out += ",0,0,";
            out += label;
            out += ',';
            out += key;
            out += ',';
            append_csv_value(out, value);
            out += '\n';
        }
    };
    fit_rows("fit:a=" + std::to_string(report.primary.config.a), report.fit_primary);
    fit_rows("fit:a=" + std::to_string(report.reference.config.a), report.fit_reference);
    out += std::to_string(N) + ",0,0,,gap,";
    append_csv_value(out, report.gap);
    out += '\n';
    out += std::to_string(N) + ",0,0,,predicted-gap,";
    append_csv_value(out, report.predicted_gap);
    out += '\n';
    return out;
}

namespace {

void write_text(const std::string& text, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw IoError("failed writing '" + path + "'");
}

} // namespace

void write_csv(const ResultRecord& record, const std::string& path) {
    write_text(to_csv_string(record), path);
}

void write_csv(const EtaRuleReport& report, const std::string& path) {
    write_text(to_csv_string(report), path);
}

} // namespace rlab
