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

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Run {
    int status = 0;
    std::string err;
};

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("spinmetro_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Run run(const std::string& args, const fs::path& dir) {
    const fs::path err = dir / "stderr.txt";
    const std::string cmd = std::string(SPINMETRO_CLI) + " " + args + " 2> " + err.string() + " > /dev/null";
    const int raw = std::system(cmd.c_str());
    Run r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.err = slurp(err);
    return r;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
    const fs::path p = dir / "config.json";
    std::ofstream(p) << text;
    return p;
}

}  // namespace

TEST(Cli, NqcrbCurveFilesAndSidecar) {
    const auto dir = scratch("nqcrb");
    const auto cfg = write_config(dir, R"({"n_values":[10,100],"sigma_over_n":[0.01,0.1,1.0]})");
    const auto r = run("nqcrb-curve --config " + cfg.string() + " --out " + (dir / "out").string(), dir);
    ASSERT_EQ(r.status, 0) << r.err;
    const std::string csv = slurp(dir / "out" / "nqcrb_N100.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "sigma_over_n,f_numeric,f_analytic,f_q");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
    const auto side = nlohmann::json::parse(slurp(dir / "out" / "nqcrb-curve.json"));
    EXPECT_EQ(side["command"], "nqcrb-curve");
    EXPECT_EQ(side["version"], "0.1.0");
    EXPECT_EQ(side["config"]["n_values"].size(), 2u);
    EXPECT_EQ(side["files"].size(), 2u);
}

TEST(Cli, SnapshotReproducesHellinger) {
    const auto dir = scratch("snapshot");
    const auto r = run("prob-snapshot --out " + (dir / "out").string(), dir);
    ASSERT_EQ(r.status, 0) << r.err;
    const auto side = nlohmann::json::parse(slurp(dir / "out" / "prob-snapshot.json"));
    EXPECT_NEAR(side["results"]["phi0"].get<double>(), 0.118, 1e-3);
    const double expected[] = {0.238, 0.238, 0.238, 0.238, 0.067, 0.201, 0.012, 0.232};
    ASSERT_EQ(side["results"]["panels"].size(), 8u);
    for (int i = 0; i < 8; ++i) {
        EXPECT_NEAR(side["results"]["panels"][i]["hellinger"].get<double>(), expected[i], 0.005) << i;
    }
    EXPECT_DOUBLE_EQ(side["config"]["dphi"].get<double>(), 0.05);
    EXPECT_TRUE(fs::exists(dir / "out" / "panel_h_phi_plus_dphi.csv"));
}

TEST(Cli, SweepIsDeterministicAcrossThreads) {
    const auto dir = scratch("sweep");
    const auto cfg = write_config(dir, R"({"scheme":{"kind":"TNT","n":16},"sigmas":[0,1,2]})");
    ASSERT_EQ(run("cfi-sweep --config " + cfg.string() + " --out " + (dir / "a").string(), dir).status, 0);
    ASSERT_EQ(run("cfi-sweep --threads 3 --config " + cfg.string() + " --out " + (dir / "b").string(), dir).status, 0);
    EXPECT_EQ(slurp(dir / "a" / "sweep.csv"), slurp(dir / "b" / "sweep.csv"));
    EXPECT_EQ(slurp(dir / "a" / "cfi-sweep.json"), slurp(dir / "b" / "cfi-sweep.json"));
    const std::string csv = slurp(dir / "a" / "sweep.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "scheme,readout,sigma,phi_opt,f_c,f_n,f_q");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 4 * 3);
    const auto side = nlohmann::json::parse(slurp(dir / "a" / "cfi-sweep.json"));
    EXPECT_DOUBLE_EQ(side["config"]["scheme"]["r"].get<double>(), 0.0715);
}

TEST(Cli, OptimizerOutputsDeterministic) {
    const auto dir = scratch("opt");
    const auto cfg = write_config(dir, R"({"iterations":2000,"trace_stride":100})");
    ASSERT_EQ(run("opt-verify --seed 5 --config " + cfg.string() + " --out " + (dir / "a").string(), dir).status, 0);
    ASSERT_EQ(run("opt-verify --seed 5 --config " + cfg.string() + " --out " + (dir / "b").string(), dir).status, 0);
    for (const char* f : {"trace_uniform_spread.csv", "trace_adjacent_pair.csv", "trace_mid_spectrum_pair.csv",
                          "opt-verify.json"}) {
        EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
    }
    const auto side = nlohmann::json::parse(slurp(dir / "a" / "opt-verify.json"));
    EXPECT_EQ(side["seed"], 5);
    EXPECT_EQ(side["results"]["runs"].size(), 3u);
}

TEST(Cli, BoundCertificate) {
    const auto dir = scratch("cert");
    const auto cfg = write_config(dir, R"({"count":300})");
    ASSERT_EQ(run("bound-cert --threads 2 --config " + cfg.string() + " --out " + (dir / "out").string(), dir).status,
              0);
    const auto side = nlohmann::json::parse(slurp(dir / "out" / "bound-cert.json"));
    EXPECT_EQ(side["results"]["violations"], 0);
    const std::string csv = slurp(dir / "out" / "cert.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 301);
}

TEST(Cli, HusimiAndStateReport) {
    const auto dir = scratch("misc");
    ASSERT_EQ(run("husimi --scheme CAT --n 10 --out " + (dir / "h").string(), dir).status, 0);
    const auto hs = nlohmann::json::parse(slurp(dir / "h" / "husimi.json"));
    EXPECT_NEAR(hs["results"]["integral"].get<double>(), 1.0, 0.01);
    ASSERT_EQ(run("state-report --scheme QND --n 100 --out " + (dir / "s").string(), dir).status, 0);
    const auto st = nlohmann::json::parse(slurp(dir / "s" / "state-report.json"));
    EXPECT_NEAR(st["results"]["purity"].get<double>(), 0.4, 0.02);
    EXPECT_TRUE(st["results"]["phi0"].is_null());
}

TEST(Cli, InvalidConfigIsSingleLineJsonError) {
    const auto dir = scratch("bad");
    for (const char* text : {R"({"scheme":{"kind":"NOPE","n":4}})", R"({"sigmas":[]})", R"({"bogus":1})", "{not json"}) {
        const auto cfg = write_config(dir, text);
        const auto r = run("cfi-sweep --config " + cfg.string() + " --out " + (dir / "out").string(), dir);
        EXPECT_EQ(r.status, 2) << text;
        ASSERT_FALSE(r.err.empty()) << text;
        EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1) << r.err;
        const auto j = nlohmann::json::parse(r.err);
        EXPECT_TRUE(j.contains("error"));
        EXPECT_TRUE(j.contains("message"));
    }
    const auto r = run("no-such-command", dir);
    EXPECT_EQ(r.status, 2);
    EXPECT_TRUE(nlohmann::json::parse(r.err).contains("error"));
}
