#pragma once

#include "rlab/ensemble.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace rlab {

enum class ExperimentKind {
    locallaw_scan,
    sqrt_eta_rule,
    thermalization,
    two_scale_clt,
    identity_suite,
};

ExperimentKind kind_from_string(const std::string& s);
std::string to_string(ExperimentKind k);

/// Spectral-parameter layout for a k-kernel chain at energy E:
/// alternating_conj puts z, conj(z), z, ... (the G A G* A setting);
/// upper_half puts every z in the upper half-plane.
enum class Layout { alternating_conj, upper_half };

Layout layout_from_string(const std::string& s);
std::string to_string(Layout l);

/// Full description of one experiment. Everything needed to regenerate the
/// results is in here (including base_seed), so the config hash identifies
/// the data.
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::locallaw_scan;

    std::vector<int> N_grid;
    /// Absolute eta values, or exponents gamma (eta = N^-gamma) when
    /// eta_is_exponent is set. The grid is the product N_grid x eta_values.
    std::vector<double> eta_values;
    bool eta_is_exponent = false;
    /// Require eta * N >= this on every grid point (default 10; hard floor 2).
    double eta_floor_times_n = 10.0;

    int k = 1;       // matrices per averaged chain; 0 tests <G> - m alone
    int a = 0;       // leading slots get traceless matrices
    int a_ref = -1;  // comparison traceless count (sqrt-eta-rule only)
    /// One matrix reused in every chain slot (the <G A G* A> setting)
    /// instead of independent draws; needs a uniform a (0 or k).
    bool tie_matrices = false;
    double energy = 0.0;
    Layout layout = Layout::alternating_conj;

    int beta = 1;
    Dist dist = Dist::gaussian;
    int trials = 64;
    std::uint64_t base_seed = 1;
    Recipe recipe = Recipe::random_hermitian_traceless;

    std::vector<double> s_grid;  // thermalization times

    int threads = 0;        // 0: all hardware threads (env override wins)
    bool keep_raw = true;   // store per-trial raw values in the record

    void validate() const;
    /// FNV-1a over the canonical serialized form; equal for semantically
    /// equal configs.
    std::uint64_t hash() const;

    /// Flat key-value file: one "key = value" per line, '#' comments,
    /// lists comma-separated. Keys match the CLI flag names.
    static ExperimentConfig from_file(const std::string& path);
    /// Applies one key (same vocabulary as the config file) to this config.
    void apply_key(const std::string& key, const std::string& value);

    double eta_for(int N, double value) const;
};

/// Statistics for one grid point. raw holds the per-trial values (bit-stable
/// for a fixed config regardless of thread count); extras carries named
/// companion columns (phi2, psi_median, fitted scales, ...).
struct GridStat {
    int N = 0;
    double eta = 0.0;
    double s = 0.0;
    std::string label;  // sub-series tag (identity name, "a=2", ...)

    double median = 0.0;
    double mean = 0.0;
    double q90 = 0.0;
    std::vector<double> raw;
    std::map<std::string, double> extras;
};

struct ResultRecord {
    std::uint64_t config_hash = 0;
    ExperimentConfig config;
    std::vector<GridStat> stats;
    std::string started_at;   // UTC, ISO 8601
    std::string finished_at;
    std::string version_tag;
};

/// Least-squares line through (log x, log median); std_error is the standard
/// error of the slope.
struct ScalingFit {
    double slope = 0.0;
    double intercept = 0.0;
    double std_error = 0.0;
    int points_used = 0;
};

enum class FitAxis { N, eta };

/// Runs a (N, eta) grid of averaged-chain trials. Per grid point it records
/// raw errors |<chain> - <M B_k>| (trial vector + median/mean/0.9-quantile)
/// and the normalized N eta^{k/2} statistics in extras.
ResultRecord run_locallaw_scan(const ExperimentConfig& config);

/// Fits log(median raw error) against log N or log eta. Requires >= 3 grid
/// points varying along the chosen axis and constant elsewhere.
ScalingFit fit_scaling(const ResultRecord& record, FitAxis axis);

/// Two locallaw scans differing only in traceless count (a vs a_ref), both
/// fitted against eta; gap = slope(a) - slope(a_ref), predicted (a - a_ref)/2.
struct EtaRuleReport {
    ResultRecord primary;
    ResultRecord reference;
    ScalingFit fit_primary;
    ScalingFit fit_reference;
    double gap = 0.0;
    double predicted_gap = 0.0;
};

EtaRuleReport sqrt_eta_rule_test(const ExperimentConfig& config);

/// Per (N, s): median |<e^{isW} A e^{-isW} A> - phi(s)^2 <A^2>| over trials;
/// phi(s)^2 recorded as a companion column. One sample serves the whole
/// s grid.
ResultRecord thermalization_scan(const ExperimentConfig& config);

/// Single-resolvent fluctuation split: per trial, tracial mode <G - m> and
/// traceless mode <G B('s traceless part)>. Records empirical standard
/// deviations of both modes, their ratio, and the predicted 1/(N eta) vs
/// <B'B'*>^{1/2}/(N sqrt(eta)) scales.
ResultRecord two_scale_clt(const ExperimentConfig& config);

/// Structural identity checks (Ward, resolvent pairing, conjugation symmetry,
/// dual evaluation routes, identity insertion, q-formula, recursions, contour
/// representation). One grid row per identity; raw = per-trial residuals.
ResultRecord run_identity_suite(const ExperimentConfig& config);

/// JSON persistence, schema-versioned; load rejects other schema versions.
void persist(const ResultRecord& record, const std::string& path);
ResultRecord load(const std::string& path);
std::string to_json_string(const ResultRecord& record);
ResultRecord record_from_json_string(const std::string& text);
std::string to_json_string(const EtaRuleReport& report);

/// Long-format CSV: N,eta,s,label,statistic,value; one row per grid point
/// per statistic (median, mean, q90, then extras alphabetically).
void write_csv(const ResultRecord& record, const std::string& path);
void write_csv(const EtaRuleReport& report, const std::string& path);
std::string to_csv_string(const ResultRecord& record);
std::string to_csv_string(const EtaRuleReport& report);

/// Thread count actually used: RESOLVENT_LAB_THREADS env var if set, else
/// requested if > 0, else hardware concurrency.
int resolve_threads(int requested);

/// Matrix for one chain slot: the traceless variant of the recipe for
/// traceless slots, the plain one otherwise; real symmetric when beta = 1.
CMatrix chain_slot_matrix(int N, Recipe recipe, bool traceless, int beta, std::uint64_t seed);

double quantile(std::vector<double> values, double p);
double vec_median(std::vector<double> values);
double vec_mean(const std::vector<double>& values);

} // namespace rlab
