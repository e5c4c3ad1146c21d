// Copyright 2026 The spinmetro Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line driver: every subcommand writes CSV data plus a <command>.json
// sidecar holding the resolved configuration and summary results.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "spinmetro/io.hpp"
#include "spinmetro/spinmetro.hpp"

namespace sm = spinmetro;
namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

struct Globals {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    int threads = 1;
    std::string scheme_kind;
    int n = 0;
};

/// Reads keys from the config object once each; leftovers are an error.
class ConfigReader {
public:
    explicit ConfigReader(Json j) : j_(std::move(j)) {
        sm::detail::require(j_.is_object(), sm::ErrorCode::invalid_config, "config must be a JSON object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    template <typename T>
    T get(const std::string& key, const T& fallback) {
        used_.insert(key);
        if (!j_.contains(key)) return fallback;
        try {
            return j_.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            throw sm::Error(sm::ErrorCode::invalid_config, "config field '" + key + "' has the wrong type");
        }
    }

    Json raw(const std::string& key) {
        used_.insert(key);
        return j_.contains(key) ? j_.at(key) : Json();
    }

    void finish() const {
        for (const auto& item : j_.items()) {
            sm::detail::require(used_.count(item.key()) > 0, sm::ErrorCode::invalid_config,
                                "unknown config field '" + item.key() + "'");
        }
    }

private:
    Json j_;
    std::set<std::string> used_;
};

Json load_config(const Globals& g) {
    if (g.config_path.empty()) return Json::object();
    std::ifstream in(g.config_path);
    sm::detail::require(in.good(), sm::ErrorCode::invalid_config, "cannot open config file " + g.config_path);
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw sm::Error(sm::ErrorCode::invalid_config, std::string("config is not valid JSON: ") + e.what());
    }
}

sm::PrepScheme read_scheme(ConfigReader& cfg, const Globals& g, sm::SchemeKind kind, int n) {
    Json j = cfg.raw("scheme");
    if (j.is_null()) j = Json::object();
    sm::detail::require(j.is_object(), sm::ErrorCode::invalid_config, "scheme must be an object");
    if (!g.scheme_kind.empty()) j["kind"] = g.scheme_kind;
    if (g.n > 0) j["n"] = g.n;
    if (!j.contains("kind")) j["kind"] = std::string(sm::to_string(kind));
    if (!j.contains("n")) j["n"] = n;
    return sm::scheme_from_json(j);
}

std::vector<double> read_grid(ConfigReader& cfg, const std::string& key, std::vector<double> fallback) {
    auto v = cfg.get<std::vector<double>>(key, fallback);
    sm::detail::require(!v.empty(), sm::ErrorCode::invalid_config, key + " must be non-empty");
    for (double x : v) sm::detail::require(std::isfinite(x), sm::ErrorCode::invalid_config, key + " must be finite");
    return v;
}

Json vec3(const sm::Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

class Writer {
public:
    Writer(const Globals& g, std::string command) : dir_(g.out_dir), command_(std::move(command)) {
        fs::create_directories(dir_);
    }

    template <typename F>
    void csv(const std::string& name, F&& body) {
        std::ostringstream os;
        body(os);
        write(name, os.str());
        files_.push_back(name);
    }

    void sidecar(const Globals& g, Json config, Json results) {
        Json out;
        out["command"] = command_;
        out["version"] = sm::kVersion;
        out["seed"] = g.seed;
        out["config"] = std::move(config);
        out["results"] = std::move(results);
        out["files"] = files_;
        write(command_ + ".json", out.dump(2) + "\n");
    }

private:
    void write(const std::string& name, const std::string& text) {
        std::ofstream f(dir_ / name, std::ios::binary);
        sm::detail::require(f.good(), sm::ErrorCode::invalid_config, "cannot write " + (dir_ / name).string());
        f << text;
    }

    fs::path dir_;
    std::string command_;
    std::vector<std::string> files_;
};

void run_nqcrb_curve(const Globals& g, ConfigReader& cfg) {
    const auto ns = cfg.get<std::vector<int>>("n_values", g.n > 0 ? std::vector<int>{g.n} : std::vector<int>{10, 100, 1000});
    const auto grid = read_grid(cfg, "sigma_over_n", sm::default_sigma_over_n_grid());
    const Json fq_cfg = cfg.raw("f_q");
    cfg.finish();
    sm::detail::require(fq_cfg.is_null() || fq_cfg.is_number(), sm::ErrorCode::invalid_config, "f_q must be a number");
    for (double r : grid) sm::detail::require(r >= 0.0, sm::ErrorCode::invalid_config, "sigma_over_n must be >= 0");

    Writer w(g, "nqcrb-curve");
    Json results = Json::array();
    for (int n : ns) {
        sm::detail::require(n >= 1, sm::ErrorCode::invalid_config, "n_values must be >= 1");
        const double fq = fq_cfg.is_null() ? static_cast<double>(n) * n : fq_cfg.get<double>();
        std::vector<sm::NqcrbResult> rows;
        double max_gap = 0.0;
        for (double r : grid) {
            rows.push_back(sm::nqcrb(n, fq, r * n));
            max_gap = std::max(max_gap, (rows.back().f_numeric - rows.back().f_analytic) / fq);
        }
        w.csv("nqcrb_N" + std::to_string(n) + ".csv", [&](std::ostream& os) { sm::csv::nqcrb_curve(os, rows); });
        results.push_back({{"n", n}, {"f_q", fq}, {"max_normalized_gap", max_gap}});
    }
    Json config;
    config["n_values"] = ns;
    config["f_q"] = fq_cfg.is_null() ? Json("N^2") : fq_cfg;
    config["sigma_over_n"] = grid;
    w.sidecar(g, config, results);
}

std::vector<sm::ReadoutKind> default_readouts(const sm::PrepScheme& s) {
    std::vector<sm::ReadoutKind> out{sm::ReadoutKind::NONE_LINEAR, sm::ReadoutKind::ECHO};
    out.push_back(s.kind == sm::SchemeKind::QPT || s.kind == sm::SchemeKind::QND ? sm::ReadoutKind::FLIP_PRIME_ECHO
                                                                                 : sm::ReadoutKind::FLIP_ECHO);
    if (s.is_pure()) out.push_back(sm::ReadoutKind::OPTIMAL);
    return out;
}

Json context_summary(const sm::SweepContext& ctx) {
    Json j;
    j["f_q"] = ctx.f_q;
    j["axis"] = vec3(ctx.axis.n);
    j["phi0"] = ctx.phi0 ? Json(*ctx.phi0) : Json(nullptr);
    return j;
}

void run_cfi_sweep(const Globals& g, ConfigReader& cfg) {
    const auto scheme = read_scheme(cfg, g, sm::SchemeKind::OAT, 100);
    std::vector<double> default_sigmas;
    for (int k = 0; k <= 20; ++k) default_sigmas.push_back(0.5 * k);
    const auto sigmas = read_grid(cfg, "sigmas", default_sigmas);
    std::vector<sm::ReadoutKind> readouts;
    for (const auto& name : cfg.get<std::vector<std::string>>("readouts", {})) {
        readouts.push_back(sm::parse_readout_kind(name));
    }
    if (readouts.empty()) readouts = default_readouts(scheme);
    const Json phi_grid = cfg.raw("phi_grid");
    cfg.finish();
    for (double s : sigmas) sm::detail::require(s >= 0.0, sm::ErrorCode::invalid_config, "sigmas must be >= 0");
    sm::detail::require(phi_grid.is_null() || (phi_grid.is_array() && !phi_grid.empty()), sm::ErrorCode::invalid_config,
                        "phi_grid must be a non-empty array");

    const auto ctx = sm::make_sweep_context(scheme);
    std::vector<sm::SweepRecord> rows;
    Json readout_names = Json::array();
    for (auto r : readouts) {
        readout_names.push_back(std::string(sm::to_string(r)));
        const auto grid = phi_grid.is_null() ? sm::default_phi_grid(ctx, r) : phi_grid.get<std::vector<double>>();
        const auto rec = sm::cfi_sweep(ctx, r, sigmas, grid, g.threads);
        rows.insert(rows.end(), rec.begin(), rec.end());
    }
    Writer w(g, "cfi-sweep");
    w.csv("sweep.csv", [&](std::ostream& os) { sm::csv::sweep(os, rows); });
    Json config;
    config["scheme"] = sm::to_json(ctx.scheme);
    config["readouts"] = readout_names;
    config["sigmas"] = sigmas;
    config["phi_grid"] = phi_grid.is_null() ? Json("default") : phi_grid;
    w.sidecar(g, config, context_summary(ctx));
}

void run_prob_snapshot(const Globals& g, ConfigReader& cfg) {
    const auto scheme = read_scheme(cfg, g, sm::SchemeKind::OAT, 20);
    const double sigma = cfg.get<double>("sigma", 3.0);
    const double dphi = cfg.get<double>("dphi", 1.0 / scheme.n_particles);
    cfg.finish();
    sm::detail::require(sigma >= 0.0 && std::isfinite(dphi), sm::ErrorCode::invalid_config, "bad sigma or dphi");
    const auto ctx = sm::make_sweep_context(scheme);
    sm::detail::require(ctx.phi0.has_value(), sm::ErrorCode::unsupported, "prob-snapshot needs a pure scheme");
    const double phi0 = *ctx.phi0;

    struct Panel {
        const char* label;
        sm::ReadoutKind readout;
        double phi;
        double sigma;
    };
    const sm::ReadoutKind flip =
        scheme.kind == sm::SchemeKind::QPT ? sm::ReadoutKind::FLIP_PRIME_ECHO : sm::ReadoutKind::FLIP_ECHO;
    const std::vector<Panel> panels{
        {"a", sm::ReadoutKind::ECHO, phi0, 0.0},    {"b", sm::ReadoutKind::OPTIMAL, phi0, 0.0},
        {"c", sm::ReadoutKind::ECHO, 0.0, 0.0},     {"d", flip, 0.0, 0.0},
        {"e", sm::ReadoutKind::ECHO, phi0, sigma},  {"f", sm::ReadoutKind::OPTIMAL, phi0, sigma},
        {"g", sm::ReadoutKind::ECHO, 0.0, sigma},   {"h", flip, 0.0, sigma},
    };
    Writer w(g, "prob-snapshot");
    Json results = context_summary(ctx);
    Json list = Json::array();
    for (const auto& p : panels) {
        const auto snap = sm::snapshot(ctx, p.readout, p.phi, dphi, p.sigma);
        const std::string base = std::string("panel_") + p.label;
        w.csv(base + "_phi.csv", [&](std::ostream& os) { sm::csv::distribution(os, snap.at_phi); });
        w.csv(base + "_phi_plus_dphi.csv", [&](std::ostream& os) { sm::csv::distribution(os, snap.at_phi_shifted); });
        list.push_back({{"panel", p.label},
                        {"readout", std::string(sm::to_string(p.readout))},
                        {"phi", p.phi},
                        {"sigma", p.sigma},
                        {"hellinger", snap.hellinger}});
    }
    results["panels"] = list;
    Json config;
    config["scheme"] = sm::to_json(ctx.scheme);
    config["sigma"] = sigma;
    config["dphi"] = dphi;
    w.sidecar(g, config, results);
}

sm::ProbDist start_by_name(const std::string& name, int n, double f0) {
    if (name == "uniform_spread") return sm::starts::uniform_spread(n, f0);
    if (name == "adjacent_pair") return sm::starts::adjacent_pair(n, f0);
    if (name == "mid_spectrum_pair") return sm::starts::mid_spectrum_pair(n, f0);
    throw sm::Error(sm::ErrorCode::invalid_config, "unknown start '" + name + "'");
}

void run_opt_verify(const Globals& g, ConfigReader& cfg) {
    const int n = cfg.get<int>("n", g.n > 0 ? g.n : 10);
    const double sigma = cfg.get<double>("sigma", 4.0);
    const double f0 = cfg.get<double>("f0", 1.0);
    sm::HillClimbOptions opt;
    opt.iterations = cfg.get<long>("iterations", 100000);
    opt.max_angle = cfg.get<double>("max_angle", 0.1);
    opt.trace_stride = cfg.get<long>("trace_stride", 100);
    const auto starts = cfg.get<std::vector<std::string>>(
        "starts", {"uniform_spread", "adjacent_pair", "mid_spectrum_pair"});
    cfg.finish();
    sm::detail::require(n >= 2 && sigma >= 0.0 && f0 >= 0.0, sm::ErrorCode::invalid_config,
                        "opt-verify needs n >= 2, sigma >= 0, f0 >= 0");
    sm::detail::require(!starts.empty(), sm::ErrorCode::invalid_config, "starts must be non-empty");

    std::vector<sm::ProbDist> initial;
    for (const auto& s : starts) initial.push_back(start_by_name(s, n, f0));
    std::vector<sm::HillClimbResult> runs(starts.size());
    sm::parallel_for(starts.size(), g.threads, [&](std::size_t i) {
        sm::HillClimbOptions o = opt;
        o.seed = g.seed + i;
        runs[i] = sm::hill_climb(initial[i], sigma, o);
    });

    Writer w(g, "opt-verify");
    const double bound = sm::nqcrb_numeric(n, f0, sigma);
    const auto popt = sm::make_popt(n, f0);
    Json results;
    results["nqcrb"] = bound;
    Json list = Json::array();
    for (std::size_t i = 0; i < runs.size(); ++i) {
        w.csv("trace_" + starts[i] + ".csv", [&](std::ostream& os) { sm::csv::trace(os, runs[i].trace); });
        double drift = 0.0;
        for (const auto& t : runs[i].trace) drift = std::max(drift, std::abs(t.f_zero - f0));
        list.push_back({{"start", starts[i]},
                        {"seed", g.seed + i},
                        {"final_f_sigma", runs[i].f_sigma},
                        {"relative_gap", (bound - runs[i].f_sigma) / bound},
                        {"hellinger_to_popt", sm::hellinger(runs[i].best, popt)},
                        {"f_zero_drift", drift},
                        {"accepted", runs[i].accepted}});
    }
    results["runs"] = list;
    Json config;
    config["n"] = n;
    config["sigma"] = sigma;
    config["f0"] = f0;
    config["iterations"] = opt.iterations;
    config["max_angle"] = opt.max_angle;
    config["trace_stride"] = opt.trace_stride;
    config["starts"] = starts;
    w.sidecar(g, config, results);
}

void run_bound_cert(const Globals& g, ConfigReader& cfg) {
    const int n = cfg.get<int>("n", g.n > 0 ? g.n : 10);
    const double sigma = cfg.get<double>("sigma", 4.0);
    const double f0 = cfg.get<double>("f0", 1.0);
    const long count = cfg.get<long>("count", 10000);
    cfg.finish();
    sm::detail::require(n >= 1 && sigma >= 0.0 && f0 >= 0.0 && count >= 1, sm::ErrorCode::invalid_config,
                        "bound-cert needs n >= 1, sigma >= 0, f0 >= 0, count >= 1");
    const auto rows = sm::certify_bound(n, sigma, f0, count, g.seed, g.threads);
    long violations = 0;
    double worst = 0.0;
    for (const auto& r : rows) {
        if (r.f_sigma > r.bound + 1e-9) ++violations;
        worst = std::max(worst, r.f_sigma);
    }
    Writer w(g, "bound-cert");
    w.csv("cert.csv", [&](std::ostream& os) { sm::csv::certification(os, rows); });
    Json config;
    config["n"] = n;
    config["sigma"] = sigma;
    config["f0"] = f0;
    config["count"] = count;
    w.sidecar(g, config, {{"nqcrb", rows.front().bound}, {"max_f_sigma", worst}, {"violations", violations}});
}

void run_husimi(const Globals& g, ConfigReader& cfg) {
    const auto scheme = read_scheme(cfg, g, sm::SchemeKind::OAT, 20);
    const int n_theta = cfg.get<int>("n_theta", 100);
    const int n_phi = cfg.get<int>("n_phi", 200);
    cfg.finish();
    const auto ops = sm::build_spin_ops(scheme.n_particles);
    const auto field = sm::husimi_q(sm::prepare_state(scheme, ops), ops, n_theta, n_phi);
    Writer w(g, "husimi");
    w.csv("husimi.csv", [&](std::ostream& os) { sm::csv::husimi(os, field); });
    Json config;
    config["scheme"] = sm::to_json(scheme);
    config["n_theta"] = n_theta;
    config["n_phi"] = n_phi;
    w.sidecar(g, config, {{"integral", sm::husimi_integral(field)}});
}

void run_state_report(const Globals& g, ConfigReader& cfg) {
    const auto scheme = read_scheme(cfg, g, sm::SchemeKind::OAT, 100);
    cfg.finish();
    const auto ctx = sm::make_sweep_context(scheme);
    const auto dist = sm::measurement_distribution(ctx.state, sm::Unitary::identity(ctx.ops.dim()), ctx.axis);
    Json results = context_summary(ctx);
    results["purity"] = sm::purity(ctx.state);
    results["mean_spin"] = {sm::expectation(ctx.state, ctx.ops.jx), sm::expectation(ctx.state, ctx.ops.jy),
                            sm::expectation(ctx.state, ctx.ops.jz)};
    results["quantum_gain"] = ctx.f_q / scheme.n_particles;
    Writer w(g, "state-report");
    w.csv("state.csv", [&](std::ostream& os) { sm::csv::distribution(os, dist); });
    w.sidecar(g, {{"scheme", sm::to_json(ctx.scheme)}}, results);
}

void report_error(const std::string& code, const std::string& message) {
    std::cerr << Json{{"error", code}, {"message", message}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Phase estimation with collective spins under detection noise"};
    app.set_version_flag("--version", std::string(sm::kVersion));
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config_path, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--out", g.out_dir, "Output directory");
    app.add_option("--seed", g.seed, "RNG seed");
    app.add_option("--threads", g.threads, "Worker threads")->check(CLI::Range(1, 1024));
    app.add_option("--scheme", g.scheme_kind, "Preparation scheme (OAT, TACT, TNT, CAT, QPT, QND, CSS)");
    app.add_option("--n", g.n, "Number of particles")->check(CLI::PositiveNumber);

    struct Command {
        const char* name;
        const char* help;
        void (*run)(const Globals&, ConfigReader&);
    };
    const std::vector<Command> commands{
        {"nqcrb-curve", "Noisy QCRB vs sigma/N, numeric and analytic", run_nqcrb_curve},
        {"cfi-sweep", "Phase-optimized CFI vs sigma for each readout", run_cfi_sweep},
        {"prob-snapshot", "Outcome distributions at phi and phi + dphi", run_prob_snapshot},
        {"opt-verify", "Hill-climb from several starts toward the two-point optimum", run_opt_verify},
        {"bound-cert", "Random constrained distributions against the noisy bound", run_bound_cert},
        {"husimi", "Husimi Q on a theta-phi grid", run_husimi},
        {"state-report", "QFI, axis and phi0 of a prepared state", run_state_report},
    };
    std::vector<CLI::App*> subs;
    for (const auto& c : commands) subs.push_back(app.add_subcommand(c.name, c.help));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        report_error("invalid_config", e.what());
        return 2;
    }

    try {
        for (std::size_t i = 0; i < commands.size(); ++i) {
            if (subs[i]->parsed()) {
                ConfigReader cfg(load_config(g));
                commands[i].run(g, cfg);
            }
        }
    } catch (const sm::Error& e) {
        report_error(std::string(sm::to_string(e.code())), e.what());
        return 2;
    } catch (const std::exception& e) {
        report_error("internal", e.what());
        return 2;
    }
    return 0;
}
