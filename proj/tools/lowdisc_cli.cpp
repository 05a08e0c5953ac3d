// Command-line driver: lower bounds on the generalized de Bruijn-Newman
// constant from low-lying zeros of quadratic Dirichlet L-functions.
//
//   analyze   one discriminant -> LowReport JSON on stdout
//   scan      classify Z(0) over a discriminant range, summary table
//   flow      integrate the zero-repulsion ODE, CSV trajectory on stdout
//   plotdata  uniform samples of Z(t, chi) as CSV for external plotting
//
// Exit codes: 0 success, 1 usage/validation error, 2 numerical failure.
// All numbers serialize as decimal strings; identical configuration yields
// byte-identical output (and cache hits replay the original bytes).

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "lowdisc/lowdisc.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace lowdisc;

namespace {

struct CommonOpts {
    int precision = 30;
    std::string eps = "5e-16";
    std::string tol = "1e-9";
    std::string format = "json";
    std::string cache_dir;
    int jobs = 0;
};

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex16(uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

std::string cache_key(long disc, const AnalyzeConfig& cfg) {
    std::ostringstream os;
    os << "v1|disc=" << disc << "|precision=" << cfg.precision << "|eps=" << cfg.eps
       << "|policy=" << static_cast<int>(cfg.zero_policy) << "|zeros=" << cfg.zero_count
       << "|tol=" << cfg.tol << "|slack=" << cfg.lambda_slack_rel;
    return hex16(fnv1a(os.str()));
}

std::optional<std::string> cache_load(const std::string& dir, long disc, const AnalyzeConfig& cfg) {
    if (dir.empty()) return std::nullopt;
    fs::path p = fs::path(dir) /
                 ("lowreport_" + std::to_string(-disc) + "_" + cache_key(disc, cfg) + ".json");
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void cache_store(const std::string& dir, long disc, const AnalyzeConfig& cfg,
                 const std::string& bytes) {
    if (dir.empty()) return;
    std::error_code ec;
    fs::create_directories(dir, ec);
    fs::path p = fs::path(dir) /
                 ("lowreport_" + std::to_string(-disc) + "_" + cache_key(disc, cfg) + ".json");
    std::ofstream out(p, std::ios::binary);
    out << bytes;
}

AnalyzeConfig make_config(const CommonOpts& c, long zeros) {
    AnalyzeConfig cfg;
    cfg.precision = c.precision;
    cfg.eps = c.eps;
    cfg.tol = c.tol;
    if (zeros > 0) {
        cfg.zero_policy = ZeroPolicy::fixed_count;
        cfg.zero_count = zeros;
    }
    return cfg;
}

int run_analyze(const CommonOpts& c, long disc, long zeros, const std::string& zeros_file) {
    if (!is_fundamental(disc)) {
        std::cerr << "error: " << disc << " is not a negative fundamental discriminant\n";
        return 1;
    }
    AnalyzeConfig cfg = make_config(c, zeros);
    cfg.validate();

    if (zeros_file.empty()) {
        if (auto hit = cache_load(c.cache_dir, disc, cfg)) {
            std::cout << *hit;
            return hit->find("\"stage_error\": \"\"") != std::string::npos ? 0 : 2;
        }
    }

    LowReport rep;
    if (!zeros_file.empty()) {
        std::ifstream in(zeros_file);
        if (!in) {
            std::cerr << "error: cannot open zeros file '" << zeros_file << "'\n";
            return 1;
        }
        ZeroList imported = import_zero_list(FundamentalDiscriminant::make(disc), in,
                                             BigReal(cfg.tol, cfg.precision), cfg.precision);
        rep = analyze(FundamentalDiscriminant::make(disc), cfg, &imported);
    } else {
        rep = analyze(FundamentalDiscriminant::make(disc), cfg);
    }
    std::string bytes = rep.to_json().dump(2) + "\n";
    std::cout << bytes;
    if (zeros_file.empty()) cache_store(c.cache_dir, disc, cfg, bytes);
    return rep.ok() ? 0 : 2;
}

int run_scan(const CommonOpts& c, long lo, long hi, bool full) {
    if (hi >= 0) {
        std::cerr << "error: scan range must be negative (lo <= hi < 0)\n";
        return 1;
    }
    auto discs = enumerate_fundamental(lo, hi);
    struct Item {
        long disc = 0;
        std::string classification;
        std::string report_json;
        bool failed = false;
    };
    std::vector<Item> items(discs.size());

    const int jobs =
        c.jobs > 0 ? c.jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= discs.size()) return;
            Item& it = items[i];
            it.disc = discs[i].neg_d;
            try {
                AnalyzeConfig cfg = make_config(c, 0);
                auto grid = std::make_shared<PhiGrid>(
                    KroneckerCharacter(discs[i], cfg.table_limit), cfg.precision,
                    BigReal(cfg.eps, cfg.precision), cfg.quad);
                XiEvaluator xi(grid);
                it.classification = to_string(classify_origin(xi));
                if (full) {
                    LowReport rep = analyze(discs[i], cfg);
                    it.report_json = rep.to_json().dump(2) + "\n";
                    if (!rep.ok()) it.failed = true;
                    cache_store(c.cache_dir, it.disc, cfg, it.report_json);
                }
            } catch (const std::exception&) {
                it.classification = "error";
                it.failed = true;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    std::map<std::string, long> counts;
    for (const auto& it : items) ++counts[it.classification];

    if (c.format == "json") {
        ordered_json j;
        j["lo"] = lo;
        j["hi"] = hi;
        j["fundamental_count"] = discs.size();
        ordered_json cj = ordered_json::object();
        for (const auto& [k, v] : counts) cj[k] = v;
        j["counts"] = cj;
        ordered_json per = ordered_json::array();
        for (const auto& it : items) {
            ordered_json e;
            e["disc"] = it.disc;
            e["classification"] = it.classification;
            per.push_back(e);
        }
        j["discriminants"] = per;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "range [" << lo << ", " << hi << "]: " << discs.size()
                  << " fundamental discriminants\n";
        for (const auto& [k, v] : counts) std::cout << "  " << k << ": " << v << "\n";
    }
    return 0;
}

struct FlowArgs {
    long disc = 0;
    long m = 16;
    std::string t_end = "0.5";
    long samples = 11;
    bool oracle_check = false;
    std::string diag_out;
};

int run_flow(const CommonOpts& c, const FlowArgs& fa) {
    if (!is_fundamental(fa.disc)) {
        std::cerr << "error: " << fa.disc << " is not a negative fundamental discriminant\n";
        return 1;
    }
    if (fa.m < 1) {
        std::cerr << "error: --m must be at least 1\n";
        return 1;
    }
    const int P = c.precision;
    const BigReal t_end(fa.t_end, P);
    if (fa.oracle_check && abs(t_end) > BigReal("0.5", P)) {
        std::cerr << "error: --oracle-check requires |t-end| <= 1/2 (Xi_t domain)\n";
        return 1;
    }

    auto grid = std::make_shared<PhiGrid>(
        KroneckerCharacter(FundamentalDiscriminant::make(fa.disc)), P, BigReal(c.eps, P));
    XiEvaluator xi(grid);
    MomentPair mp = xi.moments();
    ZeroSearchOptions zo;
    zo.count = fa.m + (fa.oracle_check ? 8 : 0);
    zo.tol = BigReal(c.tol, P);
    ZeroList zl = find_zeros(xi, zo, &mp);

    FlowState s0;
    s0.t = BigReal(0, P);
    s0.x.assign(zl.gammas.begin(), zl.gammas.begin() + fa.m);
    FlowOptions fo;
    fo.tol = BigReal(c.tol, P) * BigReal("1e-3", P);
    BigReal tol_floor = pow(BigReal(10, P), 3 - P);
    if (!(fo.tol >= tol_floor)) fo.tol = tol_floor;
    long n_samples = std::max(1l, fa.samples);
    for (long i = 0; i < n_samples; ++i)
        fo.sample_times.push_back(t_end * i / std::max(1l, n_samples - 1));
    if (t_end.is_zero()) fo.sample_times = {BigReal(0, P)};

    FlowResult r = integrate(s0, t_end, fo);
    write_trajectory_csv(std::cout, r.samples);

    ordered_json diag;
    diag["disc"] = fa.disc;
    diag["m"] = fa.m;
    diag["t_end"] = t_end.str();
    diag["status"] = r.status == FlowStatus::ok ? "ok" : "collision_stop";
    if (r.status == FlowStatus::collision_stop) diag["stop_time"] = r.state.t.str();
    diag["accepted_steps"] = r.accepted_steps;
    if (r.status == FlowStatus::ok) {
        FlowDiagnostics d = diagnostics(r.state, BigReal("1e-3", P), fo);
        diag["f"] = d.f.str();
        diag["g"] = d.g.str();
        diag["g_prime_fd"] = d.g_prime_fd.str();
        diag["lemma25_ok"] = d.lemma25_ok;
    } else {
        // the stop state sits at the collision tolerance; probing g' would
        // collide again, so only the plain sums are reported
        BigReal f_sum(P), g_sum(P);
        detail::fg_sums(r.state, f_sum, g_sum);
        diag["f"] = f_sum.str();
        diag["g"] = g_sum.str();
    }
    if (fa.oracle_check && r.status == FlowStatus::ok) {
        OracleCheck oc = oracle_check(grid, r.state, zl.gammas, static_cast<size_t>(fa.m),
                                      zl.residual, t_end, zo.tol);
        ordered_json arr = ordered_json::array();
        for (size_t k = 0; k < oc.gaps.size(); ++k) {
            ordered_json e;
            e["k"] = k + 1;
            e["ode"] = r.state.x[k].str();
            e["root"] = oc.roots[k].str();
            e["gap"] = oc.gaps[k].str();
            e["allowance"] = oc.allowances[k].is_finite() ? oc.allowances[k].str() : "inf";
            e["ok"] = static_cast<bool>(oc.gaps[k] <= max(BigReal("1e-6", P), oc.allowances[k]));
            arr.push_back(e);
        }
        diag["oracle"] = arr;
        diag["oracle_all_ok"] = oc.all_ok;
    }
    std::string diag_bytes = diag.dump(2) + "\n";
    if (!fa.diag_out.empty()) {
        std::ofstream out(fa.diag_out, std::ios::binary);
        out << diag_bytes;
    } else {
        std::cerr << diag_bytes;
    }
    return r.status == FlowStatus::ok ? 0 : 2;
}

int run_plotdata(const CommonOpts& c, long disc, const std::string& t_min,
                 const std::string& t_max, long samples) {
    if (!is_fundamental(disc)) {
        std::cerr << "error: " << disc << " is not a negative fundamental discriminant\n";
        return 1;
    }
    const int P = c.precision;
    BigReal a(t_min, P), b(t_max, P);
    if (!(b >= a)) {
        std::cerr << "error: need t-min <= t-max\n";
        return 1;
    }
    auto grid = std::make_shared<PhiGrid>(
        KroneckerCharacter(FundamentalDiscriminant::make(disc)), P, BigReal(c.eps, P));
    XiEvaluator xi(grid);
    long n = std::max(2l, samples);
    std::cout << "t,Z\n";
    for (long i = 0; i < n; ++i) {
        BigReal t = a + (b - a) * i / (n - 1);
        std::cout << t.str() << "," << xi.z_value(t).str() << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lower bounds on the generalized de Bruijn-Newman constant from "
                 "quadratic Dirichlet L-functions"};
    app.require_subcommand(1);
    app.fallthrough();  // global options may follow the subcommand

    CommonOpts common;
    const char* env_cache = std::getenv("LOWDISC_CACHE_DIR");
    if (env_cache) common.cache_dir = env_cache;
    app.add_option("--precision", common.precision, "working precision in decimal digits")
        ->capture_default_str();
    app.add_option("--eps", common.eps, "absolute quadrature accuracy target")
        ->capture_default_str();
    app.add_option("--tol", common.tol, "zero-bracket refinement tolerance")
        ->capture_default_str();
    app.add_option("--format", common.format, "output format: json|csv (scan summary)")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    app.add_option("--cache-dir", common.cache_dir, "directory for cached reports");
    app.add_option("--jobs", common.jobs, "scan worker count (default: available cores)");

    long disc = 0, lo = 0, hi = 0, zeros = 0;
    std::string zeros_file;
    auto* analyze_cmd = app.add_subcommand("analyze", "full bound pipeline for one discriminant");
    analyze_cmd->add_option("--disc", disc, "negative fundamental discriminant")->required();
    analyze_cmd->add_option("--zeros", zeros, "explicit zero count for the g(0) bound");
    analyze_cmd->add_option("--zeros-file", zeros_file,
                            "import externally computed zeros (one ordinate per line)");

    bool full = false;
    auto* scan_cmd = app.add_subcommand("scan", "classify Z(0) over a discriminant range");
    scan_cmd->add_option("--lo", lo, "range start (most negative)")->required();
    scan_cmd->add_option("--hi", hi, "range end")->required();
    scan_cmd->add_flag("--full", full, "run the full analyze pipeline per discriminant");

    FlowArgs fa;
    auto* flow_cmd = app.add_subcommand("flow", "integrate the zero-repulsion flow");
    flow_cmd->add_option("--disc", fa.disc, "negative fundamental discriminant")->required();
    flow_cmd->add_option("--m", fa.m, "number of tracked zero pairs")->capture_default_str();
    flow_cmd->add_option("--t-end", fa.t_end, "target heat time")->capture_default_str();
    flow_cmd->add_option("--samples", fa.samples, "trajectory sample count")
        ->capture_default_str();
    flow_cmd->add_flag("--oracle-check", fa.oracle_check,
                       "compare final positions against direct quadrature roots");
    flow_cmd->add_option("--diag-out", fa.diag_out, "write diagnostics JSON here (default stderr)");

    long pd_disc = 0, pd_samples = 121;
    std::string t_min = "0", t_max = "6";
    auto* plot_cmd = app.add_subcommand("plotdata", "CSV samples of Z(t, chi)");
    plot_cmd->add_option("--disc", pd_disc, "negative fundamental discriminant")->required();
    plot_cmd->add_option("--t-min", t_min, "grid start")->capture_default_str();
    plot_cmd->add_option("--t-max", t_max, "grid end")->capture_default_str();
    plot_cmd->add_option("--samples", pd_samples, "grid point count")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (app.got_subcommand(analyze_cmd)) return run_analyze(common, disc, zeros, zeros_file);
        if (app.got_subcommand(scan_cmd)) return run_scan(common, lo, hi, full);
        if (app.got_subcommand(flow_cmd)) return run_flow(common, fa);
        if (app.got_subcommand(plot_cmd))
            return run_plotdata(common, pd_disc, t_min, t_max, pd_samples);
    } catch (const config_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
