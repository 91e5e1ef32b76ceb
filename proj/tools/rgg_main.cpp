// Command-line front end: experiments, verification suites and constants as
// subcommands with reproducible, machine-readable outputs. Every run writes a
// manifest (config echo + seed + version + content hashes of the outputs).

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rgg/constants.hpp"
#include "rgg/estimators.hpp"
#include "rgg/functionals.hpp"
#include "rgg/graphs.hpp"
#include "rgg/io.hpp"
#include "rgg/sampling.hpp"
#include "rgg/stats.hpp"
#include "rgg/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rgg;

namespace {

struct RunContext {
    KeyValueConfig cfg;
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    int workers = 1;
    long max_points = 1000000;
    std::vector<std::pair<std::string, std::string>> outputs; // file -> hash
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();
};

std::string get_str(const KeyValueConfig& c, const std::string& key, const std::string& def) {
    auto it = c.find(key);
    return it == c.end() ? def : it->second;
}

double get_double(const KeyValueConfig& c, const std::string& key, double def) {
    auto it = c.find(key);
    if (it == c.end()) return def;
    try {
        std::size_t used = 0;
        double v = std::stod(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw argument_error("config key '" + key + "': bad number '" + it->second + "'");
    }
}

long get_long(const KeyValueConfig& c, const std::string& key, long def) {
    double v = get_double(c, key, static_cast<double>(def));
    return static_cast<long>(v);
}

ConvexBody body_from_config(const KeyValueConfig& c, int d) {
    std::string kind = get_str(c, "body.kind", "box");
    if (kind == "box") return ConvexBody::unit_box(d);
    if (kind == "ball") {
        double r = get_double(c, "body.radius", 1.0);
        return ConvexBody::ball(std::vector<double>(d, 0.0), r);
    }
    throw argument_error("config key 'body.kind': expected box or ball");
}

FunctionalSpec functional_from_config(const KeyValueConfig& c) {
    GraphFamily fam = family_from_name(get_str(c, "family", "gilbert"));
    std::string w = get_str(c, "weight", "power");
    double alpha = get_double(c, "alpha", 1.0);
    if (w == "power") return FunctionalSpec::power(fam, alpha);
    if (w == "phi_inv_power") return FunctionalSpec::phi_inverse_power(fam, alpha);
    if (w == "phi_exp") return FunctionalSpec::phi_exponential(fam);
    throw argument_error("config key 'weight': expected power, phi_inv_power or phi_exp");
}

ExperimentSpec experiment_from_config(const RunContext& ctx, std::uint64_t subcommand_id) {
    const KeyValueConfig& c = ctx.cfg;
    ExperimentSpec spec;
    spec.functional = functional_from_config(c);
    int d = static_cast<int>(get_long(c, "d", 2));
    if (d < 1) throw argument_error("config key 'd': must be >= 1");
    spec.body = body_from_config(c, d);
    auto it = c.find("t");
    if (it == c.end()) throw argument_error("config key 't': required (comma-separated grid)");
    spec.t_grid = parse_double_list(it->second);
    spec.intensity = get_double(c, "intensity", 1.0);
    spec.replicates = static_cast<int>(get_long(c, "replicates", 2));
    spec.knn_k = static_cast<int>(get_long(c, "k", 1));
    std::string rule = get_str(c, "eps_rule", "const");
    if (rule == "const") {
        spec.eps_rule = {EpsilonRule::Kind::constant, get_double(c, "eps", 0.1)};
    } else if (rule == "power") {
        spec.eps_rule = {EpsilonRule::Kind::power, get_double(c, "eps_theta", 1.0)};
    } else {
        throw argument_error("config key 'eps_rule': expected const or power");
    }
    spec.base_seed = ctx.seed;
    spec.subcommand_id = subcommand_id;
    spec.max_points = ctx.max_points;
    spec.workers = ctx.workers;
    spec.validate();
    if (!spec.functional.power_in_clt_range(d))
        std::cerr << "note: power exponent outside the established normal-approximation range for this family;"
                     " computation proceeds\n";
    return spec;
}

void write_file(RunContext& ctx, const std::string& name, const std::string& content) {
    fs::create_directories(ctx.out_dir);
    std::string path = (fs::path(ctx.out_dir) / name).string();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw argument_error("cannot write output file: " + path);
    f << content;
    f.close();
    ctx.outputs.emplace_back(name, hash_hex(fnv1a64(content)));
}

void write_manifest(RunContext& ctx, const std::string& subcommand) {
    json m;
    m["subcommand"] = subcommand;
    m["version"] = artifact_version;
    m["seed"] = ctx.seed;
    m["workers"] = ctx.workers;
    json cfg_echo = json::object();
    for (const auto& [k, v] : ctx.cfg) cfg_echo[k] = v;
    m["config"] = cfg_echo;
    json outs = json::object();
    std::uint64_t combined = 0xcbf29ce484222325ULL;
    for (const auto& [name, hash] : ctx.outputs) {
        outs[name] = hash;
        std::string row = name + ":" + hash + "\n";
        combined = rgg::fnv1a64(row.data(), row.size(), combined);
    }
    m["outputs"] = outs;
    m["combined_output_hash"] = hash_hex(combined);
    m["wall_time_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.started).count();
    fs::create_directories(ctx.out_dir);
    std::ofstream f(fs::path(ctx.out_dir) / "manifest.json");
    f << m.dump(2) << "\n";
    std::cout << "combined_output_hash " << hash_hex(combined) << "\n";
}

json report_rows_json(const EstimateReport& rep) {
    json rows = json::array();
    for (const auto& r : rep.rows) {
        rows.push_back({{"t", r.t},
                        {"n_mean", r.n_mean},
                        {"mean", r.mean},
                        {"mean_se", r.mean_se},
                        {"var", r.var},
                        {"var_se", r.var_se},
                        {"dK", r.dk},
                        {"dW", r.dw}});
    }
    return rows;
}

json config_echo_json(const KeyValueConfig& cfg) {
    json j = json::object();
    for (const auto& [k, v] : cfg) j[k] = v;
    return j;
}

// ---------------------------------------------------------------------------

std::string report_csv(const EstimateReport& rep) {
    std::string csv = "t,n_mean,mean,mean_se,var,var_se,dK,dW\n";
    for (const auto& r : rep.rows)
        csv += format_double(r.t) + "," + format_double(r.n_mean) + "," + format_double(r.mean) +
               "," + format_double(r.mean_se) + "," + format_double(r.var) + "," +
               format_double(r.var_se) + "," + format_double(r.dk) + "," + format_double(r.dw) +
               "\n";
    return csv;
}

int cmd_simulate(RunContext& ctx) {
    ExperimentSpec spec = experiment_from_config(ctx, 1);
    EstimateReport rep = run_experiment(spec);

    std::string csv = "t,replicate,n,value\n";
    for (std::size_t ti = 0; ti < spec.t_grid.size(); ++ti)
        for (int r = 0; r < spec.replicates; ++r)
            csv += format_double(spec.t_grid[ti]) + "," + std::to_string(r) + "," +
                   std::to_string(rep.counts[ti][r]) + "," + format_double(rep.samples[ti][r]) +
                   "\n";
    write_file(ctx, "samples.csv", csv);
    write_file(ctx, "report.csv", report_csv(rep));

    json rj;
    rj["spec"] = config_echo_json(ctx.cfg);
    rj["seed"] = ctx.seed;
    rj["rows"] = report_rows_json(rep);
    write_file(ctx, "report.json", rj.dump(2) + "\n");
    write_manifest(ctx, "simulate");
    return 0;
}

int cmd_variance_scan(RunContext& ctx) {
    int d = static_cast<int>(get_long(ctx.cfg, "d", 2));
    std::vector<double> ts, vars, var_ses;
    json rj;
    std::string inject = get_str(ctx.cfg, "inject", "");
    if (!inject.empty()) {
        // synthetic-injection mode: CSV rows `t,var`
        std::ifstream f(inject);
        if (!f) throw argument_error("cannot open injection file: " + inject);
        std::string line;
        while (std::getline(f, line)) {
            line = trim(line);
            if (line.empty() || !std::isdigit(static_cast<unsigned char>(line[0]))) continue;
            auto vals = parse_double_list(line);
            if (vals.size() < 2) throw argument_error("injection file: expected `t,var` rows");
            ts.push_back(vals[0]);
            vars.push_back(vals[1]);
            var_ses.push_back(0.0);
        }
    } else {
        ExperimentSpec spec = experiment_from_config(ctx, 2);
        EstimateReport rep = run_experiment(spec);
        for (const auto& r : rep.rows) {
            ts.push_back(r.t);
            vars.push_back(r.var);
            var_ses.push_back(r.var_se);
        }
        rj["rows"] = report_rows_json(rep);
    }
    if (ts.size() < 3) throw argument_error("variance-scan: need a grid of at least 3 t values");
    ScalingFit fit = fit_variance_scaling(ts, vars, d);

    std::string csv = "t,var,var_se,log_corrected_ratio\n";
    for (std::size_t i = 0; i < ts.size(); ++i)
        csv += format_double(ts[i]) + "," + format_double(vars[i]) + "," +
               format_double(var_ses[i]) + "," + format_double(fit.log_corrected_ratio[i]) + "\n";
    write_file(ctx, "scan.csv", csv);

    rj["spec"] = config_echo_json(ctx.cfg);
    rj["seed"] = ctx.seed;
    rj["fit"] = {{"slope", fit.slope}, {"slope_stderr", fit.slope_stderr}};
    rj["log_corrected_ratio"] = fit.log_corrected_ratio;
    write_file(ctx, "report.json", rj.dump(2) + "\n");
    write_manifest(ctx, "variance-scan");
    std::cout << "slope " << fit.slope << " +- " << fit.slope_stderr << "\n";
    return 0;
}

int cmd_clt_distance(RunContext& ctx) {
    bool compound = get_str(ctx.cfg, "model", "") == "compound_poisson";
    std::vector<double> ts, dks, dws;
    int replicates = static_cast<int>(get_long(ctx.cfg, "replicates", 2));
    if (compound) {
        auto it = ctx.cfg.find("t");
        if (it == ctx.cfg.end()) throw argument_error("config key 't': required");
        ts = parse_double_list(it->second);
        for (double T : ts) {
            auto xs = compound_poisson_samples(T, replicates, ctx.seed, 0x43504f49ULL, ctx.workers);
            dks.push_back(kolmogorov_to_normal(xs));
            dws.push_back(wasserstein1_to_normal(xs));
        }
    } else {
        ExperimentSpec spec = experiment_from_config(ctx, 3);
        EstimateReport rep = run_experiment(spec);
        for (const auto& r : rep.rows) {
            ts.push_back(r.t);
            dks.push_back(r.dk);
            dws.push_back(r.dw);
        }
    }
    // conservative MC standard error bound for the Kolmogorov statistic
    double se = 0.5 / std::sqrt(static_cast<double>(replicates));
    bool monotone = true;
    for (std::size_t i = 1; i < dks.size(); ++i)
        if (dks[i] > dks[i - 1] + 2.0 * se) monotone = false;

    std::string csv = "t,dK,dW,dK_se_bound\n";
    for (std::size_t i = 0; i < ts.size(); ++i)
        csv += format_double(ts[i]) + "," + format_double(dks[i]) + "," + format_double(dws[i]) +
               "," + format_double(se) + "\n";
    write_file(ctx, "distances.csv", csv);

    json rj;
    rj["spec"] = config_echo_json(ctx.cfg);
    rj["seed"] = ctx.seed;
    rj["dK"] = dks;
    rj["dW"] = dws;
    rj["dK_se_bound"] = se;
    rj["dK_nonincreasing_within_2se"] = monotone;
    write_file(ctx, "report.json", rj.dump(2) + "\n");
    write_manifest(ctx, "clt-distance");
    std::cout << "dK monotone(2se): " << (monotone ? "yes" : "no") << "\n";
    return 0;
}

int cmd_constants(RunContext& ctx) {
    int dmin = static_cast<int>(get_long(ctx.cfg, "d_min", 1));
    int dmax = static_cast<int>(get_long(ctx.cfg, "d_max", 2));
    double tol = get_double(ctx.cfg, "tol", 1e-4);
    if (dmin < 1 || dmax > 6 || dmin > dmax)
        throw argument_error("constants: d range must satisfy 1 <= d_min <= d_max <= 6");
    std::string csv = "d,c,c_abs_error,evaluations,beta1\n";
    for (int d = dmin; d <= dmax; ++d) {
        IntegrationResult res = c_constant(d, tol);
        csv += std::to_string(d) + "," + format_double(res.value) + "," +
               format_double(res.abs_error_estimate) + "," + std::to_string(res.evaluations) + ",";
        if (d >= 3 && d <= 9) csv += format_double(beta1(d));
        csv += "\n";
    }
    write_file(ctx, "constants.csv", csv);
    write_manifest(ctx, "constants");
    std::cout << csv;
    return 0;
}

int cmd_mecke(RunContext& ctx) {
    int d = static_cast<int>(get_long(ctx.cfg, "d", 2));
    ConvexBody body = body_from_config(ctx.cfg, d);
    double intensity = get_double(ctx.cfg, "intensity", 5.0);
    int replicates = static_cast<int>(get_long(ctx.cfg, "replicates", 400));
    std::string csv = "h,lhs,rhs,lhs_se,rhs_se,pooled_se,within_3se\n";
    bool all_ok = true;
    for (MeckeFn fn : mecke_catalogue()) {
        MeckeResult res = mecke_check(fn, body, intensity, replicates, ctx.seed, 32, ctx.workers);
        bool ok = std::fabs(res.lhs - res.rhs) <= 3.0 * res.pooled_se() + 1e-12;
        all_ok = all_ok && ok;
        csv += std::string(mecke_fn_name(fn)) + "," + format_double(res.lhs) + "," +
               format_double(res.rhs) + "," + format_double(res.lhs_se) + "," +
               format_double(res.rhs_se) + "," + format_double(res.pooled_se()) + "," +
               (ok ? "1" : "0") + "\n";
    }
    write_file(ctx, "mecke.csv", csv);
    write_manifest(ctx, "mecke");
    std::cout << csv;
    return all_ok ? 0 : 5;
}

int cmd_poincare(RunContext& ctx) {
    int d = static_cast<int>(get_long(ctx.cfg, "d", 2));
    ConvexBody body = body_from_config(ctx.cfg, d);
    double intensity = get_double(ctx.cfg, "intensity", 1.0);
    int replicates = static_cast<int>(get_long(ctx.cfg, "replicates", 300));
    std::vector<double> ps = parse_double_list(get_str(ctx.cfg, "p", "1.5,2"));
    std::string csv = "functional,p,lhs,rhs,margin,pooled_se,pass\n";
    bool all_ok = true;
    for (const auto& stat : poincare_catalogue()) {
        for (double p : ps) {
            PoincareResult res =
                poincare_check(stat, p, body, intensity, replicates, ctx.seed, 32, ctx.workers);
            bool ok = res.margin >= -3.0 * res.pooled_se;
            all_ok = all_ok && ok;
            csv += stat.name + "," + format_double(p) + "," + format_double(res.lhs) + "," +
                   format_double(res.rhs) + "," + format_double(res.margin) + "," +
                   format_double(res.pooled_se) + "," + (ok ? "1" : "0") + "\n";
        }
    }
    write_file(ctx, "poincare.csv", csv);
    write_manifest(ctx, "poincare");
    std::cout << csv;
    return all_ok ? 0 : 5;
}

// ---------------------------------------------------------------------------
// verify: oracle-equivalence, eqDbyL-style bound, product rule, positivity,
// Mecke and Poincaré suites. Exit 0 iff all selected suites pass.
// ---------------------------------------------------------------------------
struct SuiteResult {
    std::string name;
    bool pass = true;
    std::string detail;
};

SuiteResult suite_oracle(RunContext& ctx, bool inject_fault) {
    SuiteResult out{.name = "oracle"};
    int checked = 0;
    const int configs = 25;
    for (int c = 0; c < configs && out.pass; ++c) {
        RngStream stream(ctx.seed, derive_stream_id({0xabc1ULL, static_cast<std::uint64_t>(c)}));
        ConvexBody body = ConvexBody::unit_box(2).scaled(8.0);
        MarkedPointConfig cfg = sample_poisson(body, 150.0 / body.volume(), true, stream.substream(1));
        RngStream probe_stream = stream.substream(2);
        if (cfg.size() < 10) continue;
        struct Case {
            FunctionalSpec spec;
            double eps;
            int k;
        };
        std::vector<Case> cases{{FunctionalSpec::power(GraphFamily::onng, 0.5), 0.0, 0},
                                {FunctionalSpec::power(GraphFamily::gilbert, 1.0), 1.0, 0},
                                {FunctionalSpec::phi_inverse_power(GraphFamily::knn, 0.5), 0.0, 3},
                                {FunctionalSpec::phi_exponential(GraphFamily::rst), 0.0, 0}};
        for (const auto& cs : cases) {
            GeometricGraph fastg = detail::build_family(cs.spec, cfg, cs.eps, cs.k, true);
            GeometricGraph bruteg = detail::build_family(cs.spec, cfg, cs.eps, cs.k, false);
            if (inject_fault && cs.spec.family == GraphFamily::gilbert && !fastg.edges.empty())
                fastg.edges[0].length += 1e-6;
            if (fastg.edges.size() != bruteg.edges.size()) {
                out.pass = false;
                out.detail = "edge count mismatch (" + std::string(family_name(cs.spec.family)) + ")";
                break;
            }
            for (std::size_t e = 0; e < fastg.edges.size(); ++e) {
                const Edge &a = fastg.edges[e], &b = bruteg.edges[e];
                if (a.i != b.i || a.j != b.j || a.length != b.length) {
                    out.pass = false;
                    out.detail = "edge mismatch (" + std::string(family_name(cs.spec.family)) + ")";
                    break;
                }
            }
            if (!out.pass) break;
            // incremental vs rebuild add-one cost on a probe
            std::vector<double> probe;
            sample_uniform_in_body(body, probe_stream, probe);
            std::optional<double> mark;
            if (cfg.marked()) mark = probe_stream.uniform01();
            auto fast = add_one_cost_fast(cs.spec, cfg, fastg, probe, mark);
            auto oracle = add_one_cost_oracle(cs.spec, cfg, probe, mark, cs.eps, cs.k);
            double scale = std::max({1.0, std::fabs(fast.first_order), std::fabs(oracle.first_order)});
            if (std::fabs(fast.first_order - oracle.first_order) > 1e-10 * scale) {
                out.pass = false;
                out.detail = "add-one cost mismatch (" + std::string(family_name(cs.spec.family)) + ")";
                break;
            }
            ++checked;
        }
    }
    if (out.pass) out.detail = std::to_string(checked) + " family/config checks";
    return out;
}

SuiteResult suite_dbyl(RunContext& ctx) {
    SuiteResult out{.name = "dbyl"};
    int pairs = 0;
    std::string sweep = "probe_x0,probe_x1,mark,D1,D2,R_theta,L_term\n";
    for (int d : {1, 2}) {
        const ConeCover& cover = cone_cover(d);
        for (double alpha : {0.3, 0.5}) {
            FunctionalSpec spec = FunctionalSpec::power(GraphFamily::onng, alpha);
            for (int c = 0; c < 5; ++c) {
                RngStream stream(ctx.seed,
                                 derive_stream_id({0xdb1ULL, static_cast<std::uint64_t>(d),
                                                   static_cast<std::uint64_t>(c),
                                                   static_cast<std::uint64_t>(alpha * 100)}));
                ConvexBody body = ConvexBody::unit_box(d).scaled(d == 1 ? 100.0 : 12.0);
                MarkedPointConfig cfg =
                    sample_poisson(body, 150.0 / body.volume(), true, stream.substream(1));
                RngStream probe_stream = stream.substream(2);
                GeometricGraph g = build_onng(cfg);
                for (int q = 0; q < 25; ++q) {
                    std::vector<double> probe;
                    sample_uniform_in_body(body, probe_stream, probe);
                    double s = probe_stream.uniform01();
                    double d1 = add_one_cost_fast(spec, cfg, g, probe, s).first_order;
                    double R = onng_radius(cfg, probe, s, cover);
                    double L = onng_L_term(spec, cfg, g, probe, s);
                    double bound = std::pow(R, alpha) + L;
                    if (std::fabs(d1) > bound * (1.0 + 1e-9) + 1e-12) {
                        out.pass = false;
                        out.detail = "bound violated";
                    }
                    if (d == 2) {
                        std::vector<double> probe2;
                        sample_uniform_in_body(body, probe_stream, probe2);
                        double s2 = probe_stream.uniform01();
                        double d2 = second_add_one_cost(spec, cfg, g, probe, s, probe2, s2);
                        sweep += format_double(probe[0]) + "," + format_double(probe[1]) + "," +
                                 format_double(s) + "," + format_double(d1) + "," +
                                 format_double(d2) + "," + format_double(R) + "," +
                                 format_double(L) + "\n";
                    }
                    ++pairs;
                }
            }
        }
    }
    write_file(ctx, "dbyl_sweep.csv", sweep);
    if (out.pass) out.detail = std::to_string(pairs) + " (config, probe) pairs";
    return out;
}

SuiteResult suite_product(RunContext& ctx) {
    SuiteResult out{.name = "product"};
    int checked = 0;
    FunctionalSpec fspec = FunctionalSpec::power(GraphFamily::onng, 0.3);
    FunctionalSpec gspec = FunctionalSpec::power(GraphFamily::gilbert, 1.0);
    for (int c = 0; c < 100; ++c) {
        RngStream stream(ctx.seed, derive_stream_id({0x9f0dULL, static_cast<std::uint64_t>(c)}));
        ConvexBody body = ConvexBody::unit_box(2).scaled(6.0);
        MarkedPointConfig cfg = sample_poisson(body, 2.0, true, stream.substream(1));
        if (cfg.size() < 2) continue;
        RngStream probe_stream = stream.substream(2);
        std::vector<double> probe;
        sample_uniform_in_body(body, probe_stream, probe);
        double mark = probe_stream.uniform01();
        MarkedPointConfig cfg1 = cfg.add_point(probe, mark);
        auto value = [&](const FunctionalSpec& s, const MarkedPointConfig& k) {
            return evaluate(s, detail::build_family(s, k, 1.0, 0));
        };
        double f0 = value(fspec, cfg), f1 = value(fspec, cfg1);
        double g0 = value(gspec, cfg), g1 = value(gspec, cfg1);
        double lhs = f1 * g1 - f0 * g0;
        double rhs = (f1 - f0) * g0 + f0 * (g1 - g0) + (f1 - f0) * (g1 - g0);
        double scale = std::max({1.0, std::fabs(lhs), std::fabs(rhs)});
        if (std::fabs(lhs - rhs) > 1e-9 * scale) {
            out.pass = false;
            out.detail = "product rule violated";
            break;
        }
        ++checked;
    }
    if (out.pass) out.detail = std::to_string(checked) + " configs";
    return out;
}

SuiteResult suite_positivity(RunContext& ctx) {
    SuiteResult out{.name = "positivity"};
    int checked = 0;
    FunctionalSpec knn_spec = FunctionalSpec::phi_inverse_power(GraphFamily::knn, 0.5);
    FunctionalSpec rst_spec = FunctionalSpec::phi_inverse_power(GraphFamily::rst, 0.5);
    for (int c = 0; c < 50; ++c) {
        RngStream stream(ctx.seed, derive_stream_id({0x90f1ULL, static_cast<std::uint64_t>(c)}));
        ConvexBody body = ConvexBody::ball({0.0, 0.0}, 5.0);
        MarkedPointConfig cfg =
            sample_poisson(body, 100.0 / body.volume(), false, stream.substream(1));
        if (cfg.size() < 6) continue;
        RngStream probe_stream = stream.substream(2);
        std::vector<double> probe;
        sample_uniform_in_body(body, probe_stream, probe);
        double dknn = add_one_cost_oracle(knn_spec, cfg, probe, {}, 0.0, 4).first_order;
        GeometricGraph g = build_rst(cfg);
        double drst = add_one_cost_fast(rst_spec, cfg, g, probe).first_order;
        if (dknn < -1e-10 || drst < -1e-10) {
            out.pass = false;
            out.detail = "negative first-order cost";
            break;
        }
        ++checked;
    }
    if (out.pass) out.detail = std::to_string(checked) + " configs";
    return out;
}

SuiteResult suite_mecke(RunContext& ctx) {
    SuiteResult out{.name = "mecke"};
    ConvexBody body = ConvexBody::ball({0.0, 0.0}, 1.0);
    for (MeckeFn fn : mecke_catalogue()) {
        MeckeResult res = mecke_check(fn, body, 5.0, 400, ctx.seed, 32, ctx.workers);
        if (std::fabs(res.lhs - res.rhs) > 3.0 * res.pooled_se() + 1e-12) {
            out.pass = false;
            out.detail = std::string("catalogue entry ") + mecke_fn_name(fn);
            return out;
        }
    }
    out.detail = std::to_string(mecke_catalogue().size()) + " catalogue entries";
    return out;
}

SuiteResult suite_poincare(RunContext& ctx) {
    SuiteResult out{.name = "poincare"};
    int n = 0;
    for (const auto& stat : poincare_catalogue()) {
        ConvexBody body =
            stat.fspec.family == GraphFamily::onng && !stat.centered_count
                ? ConvexBody::unit_box(1).scaled(8.0)
                : ConvexBody::unit_box(2).scaled(3.0);
        for (double p : {1.5, 2.0}) {
            PoincareResult res = poincare_check(stat, p, body, 1.0, 300, ctx.seed, 32, ctx.workers);
            if (res.margin < -3.0 * res.pooled_se) {
                out.pass = false;
                out.detail = stat.name + " at p=" + format_double(p);
                return out;
            }
            ++n;
        }
    }
    out.detail = std::to_string(n) + " (functional, p) pairs";
    return out;
}

int cmd_verify(RunContext& ctx, const std::vector<std::string>& only, bool inject_fault) {
    std::vector<std::string> names = only;
    if (names.empty()) names = {"oracle", "dbyl", "product", "positivity", "mecke", "poincare"};
    std::vector<SuiteResult> results;
    for (const std::string& n : names) {
        if (n == "oracle") results.push_back(suite_oracle(ctx, inject_fault));
        else if (n == "dbyl") results.push_back(suite_dbyl(ctx));
        else if (n == "product") results.push_back(suite_product(ctx));
        else if (n == "positivity") results.push_back(suite_positivity(ctx));
        else if (n == "mecke") results.push_back(suite_mecke(ctx));
        else if (n == "poincare") results.push_back(suite_poincare(ctx));
        else throw argument_error("verify: unknown suite '" + n + "'");
    }
    bool all = true;
    json rj;
    rj["suites"] = json::array();
    for (const auto& r : results) {
        all = all && r.pass;
        std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << " (" << r.detail << ")\n";
        rj["suites"].push_back({{"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
    }
    rj["all_pass"] = all;
    rj["seed"] = ctx.seed;
    write_file(ctx, "verify.json", rj.dump(2) + "\n");
    write_manifest(ctx, "verify");
    return all ? 0 : 5;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Poisson random geometric graph simulation and verification toolkit"};
    app.require_subcommand(1);
    app.fallthrough(); // shared options may appear after the subcommand name

    std::string config_path, out_dir;
    std::uint64_t seed = 1;
    int workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    long max_points = 1000000;
    std::vector<std::string> suites;
    bool inject_fault = false;

    app.add_option("--config", config_path, "key-value config file");
    app.add_option("--seed", seed, "base seed (overrides config)");
    app.add_option("--workers", workers, "worker threads (overrides config)");
    app.add_option("--out", out_dir, "output directory (default $RGG_OUTPUT_DIR or .)");
    app.add_option("--max-points", max_points, "per-replicate point cap (overrides config)");

    auto* sim = app.add_subcommand("simulate", "sample a functional across a t grid");
    auto* scan = app.add_subcommand("variance-scan", "variance scaling fit across a t grid");
    auto* clt = app.add_subcommand("clt-distance", "distance-to-normal estimates across a t grid");
    auto* ver = app.add_subcommand("verify", "run the property suites");
    ver->add_option("--suite", suites, "run only the named suites");
    ver->add_flag("--inject-fault", inject_fault, "perturb an edge weight (self-test)");
    auto* cst = app.add_subcommand("constants", "emit the constants table");
    auto* mck = app.add_subcommand("mecke", "empirical Mecke formula check");
    auto* pcr = app.add_subcommand("poincare", "empirical p-Poincaré check");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        RunContext ctx;
        if (!config_path.empty()) ctx.cfg = load_key_value_file(config_path);
        ctx.seed = app.count("--seed") ? seed : static_cast<std::uint64_t>(get_long(ctx.cfg, "seed", 1));
        ctx.workers =
            app.count("--workers") ? workers : static_cast<int>(get_long(ctx.cfg, "workers", workers));
        ctx.max_points = app.count("--max-points")
                             ? max_points
                             : get_long(ctx.cfg, "max_points", max_points);
        if (!out_dir.empty()) {
            ctx.out_dir = out_dir;
        } else if (const char* env = std::getenv("RGG_OUTPUT_DIR")) {
            ctx.out_dir = env;
        } else {
            ctx.out_dir = get_str(ctx.cfg, "out", ".");
        }
        if (ctx.workers < 1) throw argument_error("--workers must be >= 1");

        if (sim->parsed()) return cmd_simulate(ctx);
        if (scan->parsed()) return cmd_variance_scan(ctx);
        if (clt->parsed()) return cmd_clt_distance(ctx);
        if (ver->parsed()) return cmd_verify(ctx, suites, inject_fault);
        if (cst->parsed()) return cmd_constants(ctx);
        if (mck->parsed()) return cmd_mecke(ctx);
        if (pcr->parsed()) return cmd_poincare(ctx);
        return 2;
    } catch (const argument_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const capacity_error& e) {
        std::cerr << "capacity error: " << e.what() << "\n";
        return 3;
    } catch (const integration_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    } catch (const numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    } catch (const degenerate_input_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
