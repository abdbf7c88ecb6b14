// Copyright 2026 The Chainpulse Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "chainpulse/schedule_io.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(CHAINPULSE_CLI) + " " + args + " 2>/dev/null";
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    if (p == nullptr) return r;
    char buf[4096];
    std::size_t got;
    while ((got = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, got);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string strip_timing(const std::string& s) {
    std::istringstream is(s);
    std::string line, out;
    while (std::getline(is, line))
        if (line.rfind("elapsed_ms=", 0) != 0) out += line + "\n";
    return out;
}

std::size_t count_lines(const fs::path& p) {
    std::ifstream is(p);
    std::size_t n = 0;
    std::string line;
    while (std::getline(is, line)) ++n;
    return n;
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("chainpulse_cli_" + std::to_string(::getpid()) + "_" +
                                            ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

TEST_F(Cli, UsageErrors) {
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("frobnicate").code, 2);
    EXPECT_EQ(run("synthesize --gate swap").code, 2);
    EXPECT_EQ(run("synthesize --gate cz --n 3").code, 2);
    EXPECT_EQ(run("synthesize --theta-ns 23.5").code, 2);
    EXPECT_EQ(run("evaluate --in " + path("missing.json")).code, 2);
    EXPECT_EQ(run("--help").code, 0);
}

TEST_F(Cli, BudgetExhaustionWritesBestEffort) {
    const auto out = path("best.json");
    const auto r = run("synthesize --gate toffoli --theta-ns 26 --budget-s 1 --seed 3 --out " + out);
    EXPECT_EQ(r.code, 1);
    ASSERT_TRUE(fs::exists(out));
    const auto f = chainpulse::read_schedule(out);
    EXPECT_EQ(f.schedule.num_steps(), 26);
    EXPECT_EQ(f.target_name, "toffoli");

    // The best-effort file is accepted as-is by evaluate and continue.
    const auto e1 = run("evaluate --in " + out);
    EXPECT_EQ(e1.code, 1);
    EXPECT_NE(e1.out.find("fidelity="), std::string::npos);
    EXPECT_EQ(strip_timing(run("evaluate --in " + out).out), strip_timing(e1.out));

    const auto cont = path("cont.json");
    EXPECT_NE(run("continue --rescale-only --in " + out + " --theta-ns 20 --out " + cont).code, 2);
    EXPECT_EQ(chainpulse::read_schedule(cont).schedule.num_steps(), 20);
    EXPECT_EQ(run("continue --in " + out + " --theta-ns 30 --out " + cont).code, 2);
}

TEST_F(Cli, CsvExports) {
    chainpulse::ScheduleFile f;
    f.schedule = chainpulse::PulseSchedule(2, 4, 1.0, 0.25);
    f.beta = chainpulse::PhaseCompensation::zeros(2);
    f.device = chainpulse::DeviceParams::for_sites(2);
    f.target_name = "cz";
    const auto in = path("s.json");
    chainpulse::write_schedule(in, f);
    ASSERT_EQ(run("export-csv --in " + in + " --out " + path("s.csv")).code, 0);
    EXPECT_EQ(count_lines(path("s.csv")), 5u);
    ASSERT_EQ(run("plot-data --in " + in + " --out " + path("p.csv")).code, 0);
    EXPECT_EQ(count_lines(path("p.csv")), 9u);
    const auto r = run("export-csv --in " + in);
    EXPECT_EQ(r.out.rfind("step,eps_1,eps_2\n0,0.25,0.25\n", 0), 0u);
}

TEST_F(Cli, Spectrum) {
    ASSERT_EQ(run("spectrum --points 11 --out " + path("spec.csv")).code, 0);
    EXPECT_EQ(count_lines(path("spec.csv")), 12u);
    EXPECT_EQ(run("spectrum --freqs 4.8,6.8").code, 2);
    EXPECT_EQ(run("spectrum --range 7:5").code, 2);
    const auto two = run("spectrum --freqs sweep,5.0 --range 4.9:5.1 --points 3");
    EXPECT_EQ(two.code, 0);
    EXPECT_EQ(two.out.rfind("sweep_GHz,E0,E1,E2,E3,E4,E5\n", 0), 0u);
}

TEST_F(Cli, ConfigFile) {
    std::ofstream(path("run.cfg")) << "gate = cz\ntheta_ns = 6\ntime_budget_s = 1\nmax_local_searches = 1\n";
    const auto r = run("synthesize --config " + path("run.cfg") + " --out " + path("c.json"));
    EXPECT_TRUE(r.code == 0 || r.code == 1);
    EXPECT_EQ(chainpulse::read_schedule(path("c.json")).schedule.num_steps(), 6);
    std::ofstream(path("bad.cfg")) << "gate = cz\nturbo = yes\n";
    EXPECT_EQ(run("synthesize --config " + path("bad.cfg")).code, 2);
}

TEST_F(Cli, ShippedReferencesEvaluate) {
    for (const char* name : {"toffoli_26ns.json", "toffoli_23ns.json", "cccz_70ns.json"}) {
        const fs::path p = fs::path(CHAINPULSE_DATA_DIR) / name;
        ASSERT_TRUE(fs::exists(p)) << p;
        const auto r = run("evaluate --in " + p.string());
        EXPECT_EQ(r.code, 0) << name << "\n" << r.out;
        EXPECT_NE(r.out.find("feasible=yes"), std::string::npos);
    }
}

}  // namespace
