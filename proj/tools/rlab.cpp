// Command-line front end: combinatorics queries, deterministic-term
// evaluation, structural identity checks, and the Monte Carlo experiments.

#include <rlab/errors.hpp>
#include <rlab/harness.hpp>
#include <rlab/mchain.hpp>
#include <rlab/ncpart.hpp>
#include <rlab/rng.hpp>
#include <rlab/semicircle.hpp>
#include <rlab/version.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using rlab::Complex;

Complex parse_complex(const std::string& key, const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos)
        throw rlab::ValidationError(key + ": expected 're,im', got '" + text + "'");
    try {
        std::size_t p1 = 0, p2 = 0;
        const std::string re_s = text.substr(0, comma);
        const std::string im_s = text.substr(comma + 1);
        const double re = std::stod(re_s, &p1);
        const double im = std::stod(im_s, &p2);
        if (p1 == re_s.size() && p2 == im_s.size()) return {re, im};
    } catch (...) {
    }
    throw rlab::ValidationError(key + ": expected 're,im', got '" + text + "'");
}

std::string fmt_complex(Complex z) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g%+.15gi", z.real(), z.imag());
    return buf;
}

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

/// Options shared by the experiment subcommands. Only flags the user actually
/// passed are applied, on top of an optional config file.
struct ExperimentFlags {
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides; // (config key, raw value)
    std::string out_path;
    std::string format = "json";

    void add_to(CLI::App* sub, bool with_eta, bool with_s) {
        sub->add_option_function<std::string>(
               "--config", [this](const std::string& v) { config_path = v; },
               "flat key-value config file (keys match these flags)");
        auto key_opt = [this, sub](const std::string& flag, const std::string& key,
                                   const std::string& help) {
            sub->add_option_function<std::string>(
                flag, [this, key](const std::string& v) { overrides.emplace_back(key, v); }, help);
        };
        key_opt("--N", "N", "dimension grid, comma separated");
        if (with_eta) {
            key_opt("--eta", "eta", "absolute eta grid, comma separated");
            key_opt("--eta-exp", "eta-exp", "eta = N^-gamma exponent grid");
            key_opt("--eta-floor", "eta-floor", "required eta*N floor (default 10, hard minimum 2)");
        }
        if (with_s) key_opt("--s", "s", "evolution time grid, comma separated");
        key_opt("--k", "k", "matrices per chain (0: bare <G> - m)");
        key_opt("--a", "a", "traceless matrix count");
        key_opt("--a-ref", "a-ref", "comparison traceless count");
        key_opt("--tie-matrices", "tie-matrices", "reuse one matrix in every slot (true/false)");
        key_opt("--energy", "energy", "Re z");
        key_opt("--layout", "layout", "alternating-conj | upper-half");
        key_opt("--beta", "beta", "symmetry class, 1 (real) or 2 (complex)");
        key_opt("--dist", "dist", "entry law: gaussian | rademacher | uniform");
        key_opt("--trials", "trials", "Monte Carlo trials per grid point (>= 8)");
        key_opt("--seed", "seed", "base seed; everything derives from it");
        key_opt("--recipe", "recipe", "observable recipe");
        key_opt("--threads", "threads", "worker threads (0: all cores)");
        key_opt("--keep-raw", "keep-raw", "store per-trial values in the record (true/false)");
        sub->add_option("--out", out_path, "result file path");
        sub->add_option("--format", format, "output format: json | csv")
            ->check(CLI::IsMember({"json", "csv"}));
    }

    rlab::ExperimentConfig build(rlab::ExperimentKind kind) const {
        rlab::ExperimentConfig cfg;
        if (!config_path.empty()) cfg = rlab::ExperimentConfig::from_file(config_path);
        cfg.kind = kind;
        for (const auto& [key, value] : overrides) cfg.apply_key(key, value);
        return cfg;
    }
};

void write_record(const rlab::ResultRecord& rec, const std::string& out, const std::string& format) {
    if (out.empty()) return;
    if (format == "csv")
        rlab::write_csv(rec, out);
    else
        rlab::persist(rec, out);
    std::cout << "wrote " << out << "\n";
}

void print_grid_summary(const rlab::ResultRecord& rec) {
    for (const auto& gs : rec.stats) {
        std::cout << "N=" << gs.N;
        if (gs.eta > 0.0) std::cout << " eta=" << fmt_double(gs.eta);
        if (!rec.config.s_grid.empty()) std::cout << " s=" << fmt_double(gs.s);
        if (!gs.label.empty()) std::cout << " [" << gs.label << "]";
        std::cout << "  median=" << fmt_double(gs.median) << "  q90=" << fmt_double(gs.q90);
        if (auto it = gs.extras.find("psi_median"); it != gs.extras.end())
            std::cout << "  psi_median=" << fmt_double(it->second);
        if (auto it = gs.extras.find("phi2"); it != gs.extras.end())
            std::cout << "  phi2=" << fmt_double(it->second);
        std::cout << "\n";
    }
}

int run_ncp(int k, bool count_only, bool graphs) {
    if (graphs) {
        const auto gs = rlab::enumerate_ncg(k);
        if (count_only) {
            std::cout << gs.size() << "\n";
            return 0;
        }
        for (const auto& g : gs) {
            if (g.edges.empty()) {
                std::cout << "-\n";
                continue;
            }
            std::string line;
            for (const auto& [a, b] : g.edges) {
                if (!line.empty()) line += ' ';
                line += std::to_string(a) + "-" + std::to_string(b);
            }
            std::cout << line << "\n";
        }
        return 0;
    }
    const auto ps = rlab::enumerate_ncp(k);
    if (count_only) {
        std::cout << ps.size() << "\n";
        return 0;
    }
    for (const auto& p : ps) std::cout << p.to_text() << "\n";
    return 0;
}

int run_kreweras(const std::string& text) {
    const rlab::Partition p = rlab::Partition::parse(text);
    std::cout << rlab::kreweras(p).to_text() << "\n";
    return 0;
}

struct MEvalOpts {
    int k = 2;
    std::vector<std::string> z_text = std::vector<std::string>(8);
    int N = 32;
    int a = 0;
    int beta = 2;
    std::string recipe = "random-hermitian";
    std::uint64_t seed = 1;
    bool check_q = false;
};

int run_m_eval(const MEvalOpts& o) {
    if (o.k < 1 || o.k > 8) throw rlab::ValidationError("k: must be in [1, 8]");
    if (o.a < 0 || o.a > o.k) throw rlab::ValidationError("a: must be in [0, k]");
    std::vector<rlab::SpectralKernel> kernels;
    for (int j = 0; j < o.k; ++j) {
        const std::string key = "z" + std::to_string(j + 1);
        if (o.z_text[static_cast<std::size_t>(j)].empty())
            throw rlab::ValidationError(key + ": required for k = " + std::to_string(o.k));
        kernels.push_back(
            rlab::SpectralKernel::resolvent(parse_complex(key, o.z_text[static_cast<std::size_t>(j)])));
    }
    const rlab::Recipe recipe = rlab::recipe_from_string(o.recipe);
    std::vector<rlab::CMatrix> mats;
    for (int i = 0; i < o.k; ++i)
        mats.push_back(rlab::chain_slot_matrix(o.N, recipe, i < o.a, o.beta,
                                               rlab::split_seed(o.seed, static_cast<std::uint64_t>(i))));
    rlab::ChainSpec chain = rlab::ChainSpec::make(kernels, mats);
    const Complex avg = rlab::m_avg(chain);
    std::cout << "<M B> = " << fmt_complex(avg) << "\n";
    std::cout << "bound = " << fmt_double(rlab::m_bound(chain)) << "\n";
    if (o.check_q) {
        const rlab::CMatrix m1 = rlab::m_matrix(chain).matrix_part;
        const rlab::CMatrix m2 = rlab::m_matrix_q(chain).matrix_part;
        const double residual = (m1 - m2).norm() / std::max(m1.norm(), 1e-300);
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3e", residual);
        std::cout << "q-residual = " << buf << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"resolvent chain laboratory: deterministic approximations of Wigner resolvent\n"
                 "chains and Monte Carlo verification of their local laws",
                 "rlab"};
    app.set_version_flag("--version", rlab::kVersionTag);
    app.require_subcommand(1);

    // ncp
    auto* ncp = app.add_subcommand("ncp", "enumerate non-crossing partitions or graphs");
    int ncp_k = 3;
    bool ncp_count = false, ncp_graphs = false;
    ncp->add_option("--k", ncp_k, "ground set size")->required();
    ncp->add_flag("--count", ncp_count, "print only the count");
    ncp->add_flag("--graphs", ncp_graphs, "non-crossing graphs instead of partitions");

    // kreweras
    auto* krew = app.add_subcommand("kreweras", "Kreweras complement of a non-crossing partition");
    std::string krew_text;
    krew->add_option("--partition", krew_text, "partition text, e.g. \"134|2|5|6\"")->required();

    // m-eval
    auto* meval = app.add_subcommand("m-eval", "evaluate the deterministic chain value <M B>");
    MEvalOpts mo;
    meval->add_option("--k", mo.k, "chain length (kernels)")->required();
    for (int j = 0; j < 8; ++j)
        meval->add_option("--z" + std::to_string(j + 1), mo.z_text[static_cast<std::size_t>(j)],
                          "spectral parameter " + std::to_string(j + 1) + " as re,im");
    meval->add_option("--N", mo.N, "matrix dimension");
    meval->add_option("--a", mo.a, "traceless matrix count");
    meval->add_option("--beta", mo.beta, "field of the drawn matrices: 1 real, 2 complex");
    meval->add_option("--recipe", mo.recipe, "observable recipe");
    meval->add_option("--seed", mo.seed, "matrix seed");
    meval->add_flag("--check-q", mo.check_q, "also report the graph-formula residual");

    // experiment subcommands
    auto* idsuite = app.add_subcommand("identity-suite", "structural identity residuals");
    ExperimentFlags id_flags;
    id_flags.add_to(idsuite, true, false);

    auto* scan = app.add_subcommand("scan", "local-law error scan over an (N, eta) grid");
    ExperimentFlags scan_flags;
    scan_flags.add_to(scan, true, false);

    auto* sqrt_eta = app.add_subcommand("sqrt-eta", "eta-slope gap between two traceless counts");
    ExperimentFlags sqrt_flags;
    sqrt_flags.add_to(sqrt_eta, true, false);

    auto* therm = app.add_subcommand("thermalize", "Heisenberg-evolution decay against phi(s)^2");
    ExperimentFlags therm_flags;
    therm_flags.add_to(therm, false, true);

    auto* clt = app.add_subcommand("clt", "two-scale fluctuation split of <(G - m) B>");
    ExperimentFlags clt_flags;
    clt_flags.add_to(clt, true, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (app.got_subcommand(ncp)) return run_ncp(ncp_k, ncp_count, ncp_graphs);
        if (app.got_subcommand(krew)) return run_kreweras(krew_text);
        if (app.got_subcommand(meval)) return run_m_eval(mo);
        if (app.got_subcommand(idsuite)) {
            auto cfg = id_flags.build(rlab::ExperimentKind::identity_suite);
            if (id_flags.config_path.empty() || cfg.N_grid.empty()) {
                // suite defaults: modest size, quick turnaround
                if (cfg.N_grid.empty()) cfg.apply_key("N", "96");
                if (cfg.eta_values.empty()) cfg.apply_key("eta", "0.2");
            }
            const auto rec = rlab::run_identity_suite(cfg);
            for (const auto& gs : rec.stats) {
                char med[32], mx[32];
                std::snprintf(med, sizeof med, "%.3e", gs.median);
                std::snprintf(mx, sizeof mx, "%.3e", gs.extras.at("max"));
                std::cout << gs.label << ": median=" << med << " max=" << mx << "\n";
            }
            write_record(rec, id_flags.out_path, id_flags.format);
            return 0;
        }
        if (app.got_subcommand(scan)) {
            const auto rec = rlab::run_locallaw_scan(scan_flags.build(rlab::ExperimentKind::locallaw_scan));
            print_grid_summary(rec);
            write_record(rec, scan_flags.out_path, scan_flags.format);
            return 0;
        }
        if (app.got_subcommand(sqrt_eta)) {
            const auto rep = rlab::sqrt_eta_rule_test(sqrt_flags.build(rlab::ExperimentKind::sqrt_eta_rule));
            std::cout << "slope a=" << rep.primary.config.a << ": " << fmt_double(rep.fit_primary.slope)
                      << " (stderr " << fmt_double(rep.fit_primary.std_error) << ")\n";
            std::cout << "slope a=" << rep.reference.config.a << ": "
                      << fmt_double(rep.fit_reference.slope) << " (stderr "
                      << fmt_double(rep.fit_reference.std_error) << ")\n";
            std::cout << "gap = " << fmt_double(rep.gap)
                      << " (predicted " << fmt_double(rep.predicted_gap) << ")\n";
            if (!sqrt_flags.out_path.empty()) {
                if (sqrt_flags.format == "csv") {
                    rlab::write_csv(rep, sqrt_flags.out_path);
                } else {
                    std::ofstream out(sqrt_flags.out_path);
                    if (!out) throw rlab::IoError("cannot open '" + sqrt_flags.out_path + "' for writing");
                    out << rlab::to_json_string(rep) << "\n";
                }
                std::cout << "wrote " << sqrt_flags.out_path << "\n";
            }
            return 0;
        }
        if (app.got_subcommand(therm)) {
            const auto rec = rlab::thermalization_scan(therm_flags.build(rlab::ExperimentKind::thermalization));
            print_grid_summary(rec);
            write_record(rec, therm_flags.out_path, therm_flags.format);
            return 0;
        }
        if (app.got_subcommand(clt)) {
            const auto rec = rlab::two_scale_clt(clt_flags.build(rlab::ExperimentKind::two_scale_clt));
            for (const auto& gs : rec.stats) {
                std::cout << "N=" << gs.N << " eta=" << fmt_double(gs.eta)
                          << "  ratio=" << fmt_double(gs.extras.at("ratio"))
                          << "  predicted=" << fmt_double(gs.extras.at("predicted_ratio"))
                          << "  std_tracial=" << fmt_double(gs.extras.at("std_tracial"))
                          << "  std_traceless=" << fmt_double(gs.extras.at("std_traceless")) << "\n";
            }
            write_record(rec, clt_flags.out_path, clt_flags.format);
            return 0;
        }
    } catch (const rlab::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.kind()) {
            case rlab::Error::Kind::validation: return 1;
            case rlab::Error::Kind::numeric: return 2;
            case rlab::Error::Kind::io: return 3;
        }
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
