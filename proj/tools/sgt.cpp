// Batch front-end: deterministic orchestration of the covariance, gas,
// spectral and cluster computations with persisted result records.
#include <CLI11.hpp>

#include <chrono>
#include <complex>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "sgt/bridge.hpp"
#include "sgt/cluster.hpp"
#include "sgt/covariance.hpp"
#include "sgt/dirichlet.hpp"
#include "sgt/gas.hpp"
#include "sgt/record.hpp"
#include "sgt/spectral.hpp"

using namespace sgt;
using nlohmann::json;

namespace {

struct Cli {
    ThermalParams params;
    record::RunConfig run;
    std::string config_file;
};

void load_config_file(Cli& cli) {
    if (cli.config_file.empty()) return;
    std::ifstream in(cli.config_file);
    if (!in) throw std::invalid_argument("cannot open config file " + cli.config_file);
    json j;
    in >> j;
    if (j.contains("params")) {
        const json& p = j["params"];
        if (p.contains("beta")) cli.params.beta = p["beta"].get<double>();
        if (p.contains("mass")) cli.params.mass = p["mass"].get<double>();
        if (p.contains("coupling_a")) cli.params.coupling_a = p["coupling_a"].get<double>();
        if (p.contains("hbar")) cli.params.hbar = p["hbar"].get<double>();
        if (p.contains("mu_scale")) cli.params.mu_scale = p["mu_scale"].get<double>();
        if (p.contains("coupling_lambda"))
            cli.params.coupling_lambda = p["coupling_lambda"].get<double>();
    }
    if (j.contains("run")) {
        const json& r = j["run"];
        if (r.contains("seed")) cli.run.seed = r["seed"].get<std::uint64_t>();
        if (r.contains("samples")) cli.run.samples = r["samples"].get<long long>();
        if (r.contains("tolerance")) cli.run.tolerance = r["tolerance"].get<double>();
        if (r.contains("n_max")) cli.run.n_max = r["n_max"].get<int>();
        if (r.contains("workers")) cli.run.workers = r["workers"].get<int>();
        if (r.contains("format")) cli.run.format = r["format"].get<std::string>();
        if (r.contains("output_dir")) cli.run.output_dir = r["output_dir"].get<std::string>();
    }
}

record::ResultRecord make_record(const Cli& cli, const std::string& command) {
    record::ResultRecord rec;
    rec.command = command;
    rec.params = cli.params;
    rec.config = cli.run;
    rec.config_hash = record::sha1_hex(cli.run.canonical_json());
    const auto now = std::chrono::system_clock::now();
    rec.timestamp = std::to_string(
        std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count());
    return rec;
}

void finish(record::ResultRecord& rec, std::chrono::steady_clock::time_point t0) {
    rec.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    if (!rec.config.output_dir.empty()) {
        const std::string path = rec.write(rec.config.output_dir);
        std::cout << "record: " << path << "\n";
    }
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::string cur;
    for (char c : text + ",") {
        if (c == ',') {
            if (!cur.empty()) out.push_back(std::stoi(cur));
            cur.clear();
        } else if (!isspace(static_cast<unsigned char>(c))) {
            cur.push_back(c);
        }
    }
    return out;
}

cluster::TestSource default_source() {
    cluster::TestSource s;
    s.x_left = 0.1;
    s.dx = 0.1;
    s.psi = {0.0, 0.3, 0.8, 1.0, 0.8, 0.3, 0.0};
    s.psi_prime = {0.0, -0.2, -0.5, 0.0, 0.5, 0.2, 0.0};
    return s;
}

struct VerifyContext {
    bool fast = true;
    int failures = 0;
    record::ResultRecord* rec = nullptr;
    void check(const std::string& name, bool ok, double lhs = 0.0, double rhs = 0.0) {
        std::cout << (ok ? "[PASS] " : "[FAIL] ") << name;
        if (lhs != 0.0 || rhs != 0.0) std::cout << "  (" << lhs << " vs " << rhs << ")";
        std::cout << "\n";
        if (!ok) ++failures;
        if (rec) rec->add(name, ok ? 1.0 : 0.0);
    }
};

void verify_all(const Cli& cli, VerifyContext& v) {
    const ThermalParams& p = cli.params;
    McConfig mc;
    mc.seed = cli.run.seed;
    mc.samples = cli.run.samples / (v.fast ? 4 : 1);
    mc.workers = cli.run.workers;

    // covariance route agreement
    {
        Rng rng(mix_seed({cli.run.seed, 0xA17ull}));
        bool ok = true;
        double worst = 0.0;
        const int npts = v.fast ? 20 : 100;
        for (int i = 0; i < npts; ++i) {
            ThermalParams q = p;
            q.beta = rng.uniform(0.5, 4.0);
            q.mass = rng.uniform(0.5, 8.0);
            const double uu = q.beta * rng.uniform(0.1, 0.9);
            const double xx = rng.uniform(0.1, 1.2);
            const int n = cov::matsubara_terms_for_tol(q, xx, 1e-13);
            const double mats = cov::thermal_matsubara(q, uu, xx, n).value;
            const double quad = cov::thermal_quadrature(q, uu, xx, 1e-11);
            const double rel = std::fabs(mats - quad) / std::max(std::fabs(mats), 1e-12);
            worst = std::max(worst, rel);
            ok = ok && rel < 1e-8;
        }
        v.check("covariance_oracle_agreement", ok, worst, 1e-8);
    }
    // symmetry + positivity + decay margins
    {
        bool sym = true, pos = true;
        Rng rng(mix_seed({cli.run.seed, 77ull}));
        for (int i = 0; i < (v.fast ? 15 : 60); ++i) {
            const double uu = p.beta * rng.uniform(0.05, 0.95);
            const double xx = rng.uniform(0.05, 3.0);
            const double c = cov::thermal_covariance(p, uu, xx);
            sym = sym && std::fabs(c - cov::thermal_covariance(p, uu, -xx)) < 1e-10;
            sym = sym && std::fabs(c - cov::thermal_covariance(p, p.beta - uu, xx)) < 1e-10;
            pos = pos && c > 0.0;
        }
        v.check("covariance_symmetry", sym);
        v.check("covariance_positivity", pos);
        std::vector<EuclideanPoint> grid;
        for (int i = 1; i < 8; ++i)
            for (int j = 0; j < 8; ++j) grid.push_back({p.beta * i / 8.0, 0.6 + 0.8 * j});
        const auto rep = cov::decay_bound_report(p, 0.5, grid);
        v.check("decay_certificate", rep.all_ok, rep.min_margin, 0.0);
    }
    // dirichlet identities
    {
        dirichlet::InterpolationVector iv{{0, 1}, {0.4, 0.7}};
        auto at = [&](double s0) {
            dirichlet::InterpolationVector w = iv;
            w.s[0] = s0;
            return dirichlet::interpolated_covariance(p, w, 0.4 * p.beta, 0.3, 0.7);
        };
        const bool affine = std::fabs(at(0.5) - 0.5 * (at(0.0) + at(1.0))) < 1e-12;
        v.check("interpolation_affinity", affine);
        const double slope =
            dirichlet::partial_gamma_covariance(p, iv, {0}, 0.4 * p.beta, 0.3, 0.7);
        v.check("corner_formula_sign", slope >= 0.0, slope, 0.0);
        v.check("gamma_decoupling",
                dirichlet::gamma_covariance(p, {0}, 0.4 * p.beta, -0.5, 0.5) == 0.0);
    }
    // bridge vs covariance
    {
        McConfig c = mc;
        c.samples = v.fast ? 20000 : 80000;
        const auto be = dirichlet::bridge_estimator(p, {}, {}, 0.4 * p.beta, 0.3, -0.4, c);
        const double ref = cov::thermal_covariance(p, 0.4 * p.beta, 0.7);
        v.check("bridge_free_estimate", std::fabs(be.value - ref) < 4.0 * be.std_error, be.value,
                ref);
    }
    // cauchy identity
    {
        Rng rng(mix_seed({cli.run.seed, 0xCAull}));
        bool ok = true;
        for (int rep = 0; rep < (v.fast ? 20 : 100); ++rep) {
            std::vector<gas::Point2> xs, ys;
            for (int i = 0; i < 2; ++i) {
                xs.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
                ys.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
            }
            try {
                const auto sides = gas::cauchy_identity_sides(xs, ys);
                ok = ok &&
                     std::fabs(sides.lhs - sides.rhs) <= 1e-10 * std::max(sides.lhs, sides.rhs);
            } catch (const PreconditionError&) {
            }
        }
        v.check("cauchy_identity", ok);
    }
    // partitions sandwich
    {
        const auto w = cov::make_massive_hadamard_model(p);
        const gas::CutoffFunction g = gas::characteristic_square(-0.5, 0.5, -0.5, 0.5);
        const auto g1 = gas::grand_partitions(p, w, g, 1.0, 4, mc);
        const auto g2 = gas::grand_partitions(p, w, g, 2.0, 4, mc);
        const double e1 = std::hypot(g1.xi_cosh_err, g1.z_err);
        const double e2 = std::hypot(g1.z_err, g2.xi_cosh_err);
        v.check("partition_sandwich_lower", g1.xi_cosh <= g1.z_grand + 3.0 * e1, g1.xi_cosh,
                g1.z_grand);
        v.check("partition_sandwich_upper", g1.z_grand <= g2.xi_cosh + 3.0 * e2, g1.z_grand,
                g2.xi_cosh);
    }
    // K constant
    {
        spectral::WindowFunction win{p.mu_scale, p.mu_scale};
        spectral::NullGrid base{win.extent(), 256};
        try {
            const auto split = spectral::k_constant(p, win, base, 3);
            v.check("k_constant_reality", split.im_ratio < 1e-8, split.im_ratio, 1e-8);
            v.check("k_constant_split_additivity",
                    std::fabs(split.pos_l1 + split.neg_l1 - split.K_finest) < 1e-10);
        } catch (const std::exception& e) {
            std::cout << "k_constant: " << e.what() << "\n";
            v.check("k_constant_reality", false);
        }
    }
    // cluster toy telescoping
    {
        ThermalParams q = p;
        q.beta = std::min(q.beta, 1.0);
        q.mass = std::max(q.mass, 2.0);
        q.coupling_lambda = 0.5;
        McConfig c = mc;
        c.samples = v.fast ? 300 : 800;
        const cluster::TestSource src = default_source();
        const cluster::Region window{0, 3};
        const auto cs =
            cluster::cluster_sum(q, src, window, window, 2, c, cluster::SigmaMode::CornerExact);
        const auto direct = cluster::f_and_z(q, cluster::gamma_bundle(q, {0, 3}), src, window, 2, c);
        const auto zfree = cluster::f_and_z(q, cluster::thermal_bundle(q), {}, window, 2, c);
        const std::complex<double> expect = direct.F / zfree.Z;
        v.check("cluster_telescoping",
                std::abs(cs.value - expect) <= 1e-10 * std::max(1.0, std::abs(expect)),
                std::abs(cs.value - expect), 1e-10);
    }
    // combinatorics
    {
        const auto comb = cluster::combinatorics_check(5, 8.0);
        v.check("cluster_combinatorics", comb.all_ok);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"thermal sine-gordon covariance / gas / cluster toolkit"};
    app.require_subcommand(1);
    Cli cli;
    if (const char* env = std::getenv("SGT_OUTPUT_DIR")) cli.run.output_dir = env;

    app.add_option("--config", cli.config_file, "JSON config file (flags override it)");
    app.add_option("--beta", cli.params.beta, "inverse temperature");
    app.add_option("--m,--mass", cli.params.mass, "field mass");
    app.add_option("--a", cli.params.coupling_a, "vertex charge");
    app.add_option("--hbar", cli.params.hbar, "Planck constant");
    app.add_option("--mu", cli.params.mu_scale, "massless kernel scale");
    app.add_option("--lambda", cli.params.coupling_lambda, "cosine coupling");
    app.add_option("--seed", cli.run.seed, "base seed");
    app.add_option("--samples", cli.run.samples, "Monte Carlo samples");
    app.add_option("--workers", cli.run.workers, "worker threads");
    app.add_option("--tolerance", cli.run.tolerance, "quadrature tolerance");
    app.add_option("--n-max", cli.run.n_max, "series truncation order");
    app.add_option("--out", cli.run.output_dir, "output directory for records");
    app.add_option("--format", cli.run.format, "record format: json|csv");

    auto* cov_cmd = app.add_subcommand("cov", "covariance evaluations")->fallthrough();
    double u = 0.7, x = 1.3, x2 = 0.0;
    std::string kind = "quadrature";
    auto* cov_eval = cov_cmd->add_subcommand("eval", "evaluate one kernel")->fallthrough();
    cov_eval->add_option("--u", u);
    cov_eval->add_option("--x", x);
    cov_eval->add_option("--kind", kind, "quadrature|matsubara|vacuum|hadamard0|hadamardm");
    auto* cov_table = cov_cmd->add_subcommand("table", "CSV table over a grid")->fallthrough();
    int nu = 9, nx = 9;
    cov_table->add_option("--nu", nu);
    cov_table->add_option("--nx", nx);

    auto* dir_cmd = app.add_subcommand("dirichlet", "image-charge kernels")->fallthrough();
    std::string bonds_text = "0";
    auto* dir_eval = dir_cmd->add_subcommand("eval", "gamma kernel value")->fallthrough();
    dir_eval->add_option("--bonds", bonds_text);
    dir_eval->add_option("--u", u);
    dir_eval->add_option("--x1", x);
    dir_eval->add_option("--x2", x2);
    auto* dir_bridge = dir_cmd->add_subcommand("bridge", "path-sampling estimate")->fallthrough();
    std::string touch_text, avoid_text;
    double bx = 0.3, by = -0.5;
    dir_bridge->add_option("--touch", touch_text);
    dir_bridge->add_option("--avoid", avoid_text);
    dir_bridge->add_option("--u", u);
    dir_bridge->add_option("--x", bx);
    dir_bridge->add_option("--y", by);

    auto* gas_cmd = app.add_subcommand("gas", "charge-gas estimates")->fallthrough();
    int order = 2, charge_q = 0;
    auto* gas_smatrix = gas_cmd->add_subcommand("smatrix", "coefficient estimate")->fallthrough();
    gas_smatrix->add_option("--order", order);
    auto* gas_partition = gas_cmd->add_subcommand("partition", "canonical partition")->fallthrough();
    gas_partition->add_option("--order", order);
    gas_partition->add_option("--charge", charge_q);
    auto* gas_ineq = gas_cmd->add_subcommand("inequalities", "appendix inequality suite")->fallthrough();

    auto* kconst_cmd = app.add_subcommand("kconst", "comparison-kernel K constant")->fallthrough();
    int grid_n = 256, refinements = 3;
    double decay_width = 1.0;
    kconst_cmd->add_option("--grid", grid_n);
    kconst_cmd->add_option("--refinements", refinements);
    kconst_cmd->add_option("--width", decay_width);

    auto* cluster_cmd = app.add_subcommand("cluster", "cluster expansion")->fallthrough();
    auto* cluster_run = cluster_cmd->add_subcommand("run", "expansion vs direct ratio")->fallthrough();
    int win_lo = -1, win_hi = 3, y0_lo = 0, y0_hi = 1;
    cluster_run->add_option("--window-lo", win_lo);
    cluster_run->add_option("--window-hi", win_hi);
    cluster_run->add_option("--y0-lo", y0_lo);
    cluster_run->add_option("--y0-hi", y0_hi);
    auto* cluster_scan = cluster_cmd->add_subcommand("scan", "adiabatic window scan")->fallthrough();
    std::string widths_text = "1,2,3,4";
    cluster_scan->add_option("--widths", widths_text, "half-widths of nested windows");
    auto* cluster_bounds = cluster_cmd->add_subcommand("bounds", "bound suite")->fallthrough();

    auto* verify_cmd = app.add_subcommand("verify", "verification suite")->fallthrough();
    auto* verify_all_cmd = verify_cmd->add_subcommand("all", "run every property check")->fallthrough();
    bool fast = false;
    verify_all_cmd->add_flag("--fast", fast, "reduced sample counts");

    try {
        app.parse(argc, argv);
        load_config_file(cli);
        // flags win over the file
        app.clear();
        app.parse(argc, argv);
        cli.params.validate();
        cli.run.validate();
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }

    const auto t0 = std::chrono::steady_clock::now();
    try {
        if (cov_eval->parsed()) {
            record::ResultRecord rec = make_record(cli, "cov eval");
            cov::CovarianceEval ev;
            ev.params = cli.params;
            if (kind == "quadrature")
                ev.kind = cov::CovKind::ThermalQuadrature;
            else if (kind == "matsubara") {
                ev.kind = cov::CovKind::ThermalMatsubara;
                ev.truncation = cov::matsubara_terms_for_tol(cli.params, x, cli.run.tolerance);
            } else if (kind == "vacuum")
                ev.kind = cov::CovKind::Vacuum;
            else if (kind == "hadamard0")
                ev.kind = cov::CovKind::MasslessHadamard;
            else if (kind == "hadamardm")
                ev.kind = cov::CovKind::MassiveHadamard;
            else
                throw CLI::ValidationError("--kind", "unknown kind " + kind);
            const double val = ev(u, x);
            std::cout.precision(15);
            std::cout << "C(" << u << ", " << x << ") = " << val << "\n";
            rec.add("value", val);
            finish(rec, t0);
        } else if (cov_table->parsed()) {
            record::ResultRecord rec = make_record(cli, "cov table");
            std::cout << "u,x,value\n";
            std::cout.precision(15);
            for (int i = 1; i < nu; ++i)
                for (int j = 0; j < nx; ++j) {
                    const double uu = cli.params.beta * i / nu;
                    const double xx = -2.0 + 4.0 * j / std::max(1, nx - 1);
                    const double val = cov::thermal_covariance(cli.params, uu, xx);
                    std::cout << uu << "," << xx << "," << val << "\n";
                    rec.add("C_" + std::to_string(i) + "_" + std::to_string(j), val);
                }
            finish(rec, t0);
        } else if (dir_eval->parsed()) {
            record::ResultRecord rec = make_record(cli, "dirichlet eval");
            const auto bonds = parse_int_list(bonds_text);
            const double val = dirichlet::gamma_covariance(cli.params, bonds, u, x, x2);
            std::cout.precision(15);
            std::cout << "C_Gamma(" << u << "; " << x << ", " << x2 << ") = " << val << "\n";
            rec.add("value", val);
            finish(rec, t0);
        } else if (dir_bridge->parsed()) {
            record::ResultRecord rec = make_record(cli, "dirichlet bridge");
            McConfig mc = cli.run.mc();
            const auto be = dirichlet::bridge_estimator(cli.params, parse_int_list(touch_text),
                                                        parse_int_list(avoid_text), u, bx, by, mc);
            std::cout.precision(12);
            std::cout << "estimate = " << be.value << " +- " << be.std_error << "\n";
            rec.add("estimate", be.value, be.std_error);
            finish(rec, t0);
        } else if (gas_smatrix->parsed()) {
            record::ResultRecord rec = make_record(cli, "gas smatrix");
            const gas::CutoffFunction g = gas::characteristic_diamond(cli.params.mu_scale);
            const auto est = gas::smatrix_coefficient_mc(cli.params, g, order, {}, cli.run.mc());
            std::cout.precision(12);
            std::cout << "S_" << order << " = " << est.value.real() << " + " << est.value.imag()
                      << " i  (+- " << est.std_error << ")\n";
            rec.add("re", est.value.real(), est.std_error);
            rec.add("im", est.value.imag(), est.std_error);
            finish(rec, t0);
        } else if (gas_partition->parsed()) {
            record::ResultRecord rec = make_record(cli, "gas partition");
            const gas::CutoffFunction g = gas::characteristic_diamond(cli.params.mu_scale);
            const auto w = cov::make_massive_hadamard_model(cli.params);
            const auto est =
                gas::canonical_partition(cli.params, w, g, order, charge_q, cli.run.mc());
            std::cout.precision(12);
            std::cout << "Z_{2n=" << 2 * order << "}^{2q=" << 2 * charge_q << "} = " << est.value
                      << " +- " << est.std_error << "\n";
            rec.add("value", est.value, est.std_error);
            finish(rec, t0);
        } else if (gas_ineq->parsed()) {
            record::ResultRecord rec = make_record(cli, "gas inequalities");
            const auto w = cov::make_massive_hadamard_model(cli.params);
            const gas::CutoffFunction g = gas::characteristic_square(-0.5, 0.5, -0.5, 0.5);
            const auto gp =
                gas::grand_partitions(cli.params, w, g, 1.0, cli.run.n_max, cli.run.mc());
            std::cout << "Xi = " << gp.xi << " +- " << gp.xi_err << "\n";
            std::cout << "Xi_cosh = " << gp.xi_cosh << " +- " << gp.xi_cosh_err << "\n";
            std::cout << "Z = " << gp.z_grand << " +- " << gp.z_err << "\n";
            rec.add("xi", gp.xi, gp.xi_err);
            rec.add("xi_cosh", gp.xi_cosh, gp.xi_cosh_err);
            rec.add("z_grand", gp.z_grand, gp.z_err);
            const auto rep = gas::holder_translation_check(cli.params, w, 2, cli.run.mc());
            for (const auto& row : rep.rows) {
                std::cout << (row.ok ? "[PASS] " : "[FAIL] ") << row.name << "\n";
                rec.add(row.name, row.ok ? 1.0 : 0.0);
            }
            finish(rec, t0);
            if (!rep.all_ok) return 3;
        } else if (kconst_cmd->parsed()) {
            record::ResultRecord rec = make_record(cli, "kconst");
            spectral::WindowFunction win{cli.params.mu_scale, decay_width};
            spectral::NullGrid base{win.extent(), grid_n};
            const auto split = spectral::k_constant(cli.params, win, base, refinements);
            std::cout << split.provenance_json() << "\n";
            rec.add("K", split.K);
            rec.add("K_finest", split.K_finest);
            rec.add("neg_l1", split.neg_l1);
            rec.add("pos_l1", split.pos_l1);
            finish(rec, t0);
        } else if (cluster_run->parsed()) {
            record::ResultRecord rec = make_record(cli, "cluster run");
            const cluster::TestSource src = default_source();
            const cluster::Region window{win_lo, win_hi}, y0{y0_lo, y0_hi};
            const auto cs =
                cluster::cluster_sum(cli.params, src, y0, window, cli.run.n_max, cli.run.mc());
            const auto direct = cluster::f_and_z(cli.params, cluster::thermal_bundle(cli.params),
                                                 src, window, cli.run.n_max, cli.run.mc());
            std::cout << "term_id,y_lo,y_hi,gamma,gl_degree,re,im,std_error\n";
            std::cout.precision(12);
            int tid = 0;
            for (const auto& row : cs.table) {
                std::cout << tid++ << "," << row.term.y.lo << "," << row.term.y.hi << ",\"";
                for (std::size_t i = 0; i < row.term.gamma.size(); ++i)
                    std::cout << (i ? " " : "") << row.term.gamma[i];
                std::cout << "\"," << row.gl_degree << "," << row.contribution.real() << ","
                          << row.contribution.imag() << "," << row.contribution_err << "\n";
            }
            std::cout << "cluster_sum = " << cs.value.real() << " + " << cs.value.imag()
                      << " i (+- " << cs.std_error << ")\n";
            std::cout << "direct F/Z  = " << direct.ratio.real() << " + " << direct.ratio.imag()
                      << " i (+- " << direct.ratio_err << ")\n";
            rec.add("cluster_re", cs.value.real(), cs.std_error);
            rec.add("cluster_im", cs.value.imag(), cs.std_error);
            rec.add("direct_re", direct.ratio.real(), direct.ratio_err);
            rec.add("direct_im", direct.ratio.imag(), direct.ratio_err);
            finish(rec, t0);
        } else if (cluster_scan->parsed()) {
            record::ResultRecord rec = make_record(cli, "cluster scan");
            const cluster::TestSource src = default_source();
            std::vector<cluster::Region> windows;
            for (int w : parse_int_list(widths_text)) windows.push_back({-w, w + 1});
            const auto scan = cluster::adiabatic_scan(cli.params, src, {0, 1}, windows,
                                                      cli.run.n_max, cli.run.mc());
            std::cout << "window_lo,window_hi,re,im,err,gap,gap_err\n";
            std::cout.precision(12);
            for (const auto& row : scan.rows) {
                std::cout << row.window.lo << "," << row.window.hi << "," << row.value.real()
                          << "," << row.value.imag() << "," << row.err << "," << row.gap << ","
                          << row.gap_err << "\n";
                rec.add("S_" + std::to_string(row.window.hi), row.value.real(), row.err);
                rec.add("gap_" + std::to_string(row.window.hi), row.gap, row.gap_err);
            }
            std::cout << (scan.converged ? "converged\n"
                                         : (scan.inconclusive ? "inconclusive\n" : "open\n"));
            finish(rec, t0);
        } else if (cluster_bounds->parsed()) {
            record::ResultRecord rec = make_record(cli, "cluster bounds");
            const auto rep = cluster::bound_suite(cli.params, cli.run.mc());
            for (const auto& row : rep.rows) {
                std::cout << (row.ok ? "[PASS] " : "[FAIL] ") << row.name << " (" << row.lhs
                          << " <= " << row.rhs << ")\n";
                rec.add(row.name, row.ok ? 1.0 : 0.0);
            }
            finish(rec, t0);
            if (!rep.all_ok) return 3;
        } else if (verify_all_cmd->parsed()) {
            record::ResultRecord rec = make_record(cli, "verify all");
            VerifyContext v;
            v.fast = fast;
            v.rec = &rec;
            verify_all(cli, v);
            finish(rec, t0);
            if (v.failures > 0) {
                std::cout << v.failures << " checks failed\n";
                return 3;
            }
            std::cout << "all checks passed\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "computation error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
