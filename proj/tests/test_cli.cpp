#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "edgeband/estimator.hpp"
#include "edgeband/image.hpp"
#include "edgeband/kernels.hpp"
#include "edgeband/scenes.hpp"
#include "edgeband/variance.hpp"

#include "json.hpp"

#include <sys/wait.h>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace edgeband;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

struct CliRun {
    int code = -1;
    std::string out;
    std::string err;
};

// run the binary through the shell; env assignments may prefix the arguments
CliRun cli(const std::string& args, bool env_prefix = false) {
    std::string cmd = env_prefix ? args : std::string(EDGEBAND_CLI_PATH) + " " + args;
    cmd += " > cli_stdout.txt 2> cli_stderr.txt";
    int rc = std::system(cmd.c_str());
    CliRun r;
    if (WIFEXITED(rc)) r.code = WEXITSTATUS(rc);
    r.out = slurp("cli_stdout.txt");
    r.err = slurp("cli_stderr.txt");
    return r;
}

std::string cli_path() { return EDGEBAND_CLI_PATH; }

// the shared noisy test image on disk, written once
std::string input_csv() {
    static bool done = false;
    if (!done) {
        ImageGrid g = generate(scene_linear(0.3, 11), 64);
        save_csv(g, "cli_in.csv");
        done = true;
    }
    return "cli_in.csv";
}

std::vector<std::vector<double>> parse_csv_rows(const std::string& text, std::size_t skip) {
    std::vector<std::vector<double>> rows;
    std::istringstream is(text);
    std::string line;
    for (std::size_t i = 0; i < skip; ++i) std::getline(is, line);
    while (std::getline(is, line)) {
        for (char& c : line)
            if (c == ',') c = ' ';
        std::istringstream ls(line);
        std::vector<double> row;
        double v;
        while (ls >> v) row.push_back(v);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string drop_last_column(const std::string& text) {
    std::istringstream is(text);
    std::string out, line;
    while (std::getline(is, line)) {
        out.append(line, 0, line.rfind(','));
        out.push_back('\n');
    }
    return out;
}

} // namespace

TEST_CASE("help and parse failures map to 0 and 2") {
    CHECK(cli("--help").code == 0);
    CHECK(cli("estimate --help").code == 0);
    CHECK(cli("").code == 2);                                // a subcommand is required
    CHECK(cli("estimate").code == 2);                        // --input is required
    CHECK(cli("estimate --input a.csv --nope").code == 2);   // unknown flag
    CHECK(cli("estimate --input a.csv --h -0.1").code == 2); // h must be positive
    CHECK(cli("estimate --input a.csv --h 0.1 --points-per-window 10").code == 2);
    CHECK(cli("simulate --scenario bogus").code == 2);
}

TEST_CASE("unreadable and malformed inputs exit 2") {
    CliRun r = cli("estimate --input no_such_file.csv");
    CHECK(r.code == 2);
    CHECK(r.err.find("error:") != std::string::npos);
    std::ofstream("cli_ragged.csv") << "1,2,3\n4,5\n";
    CHECK(cli("estimate --input cli_ragged.csv").code == 2);
}

TEST_CASE("config and argument errors exit 3") {
    std::string in = input_csv();
    CHECK(cli("estimate --input " + in + " --h 0.6").code == 3); // h outside (0, 1/2)
    CHECK(cli("estimate --input " + in + " --sigma-region 1,1,9,9").code == 3); // < 100 pixels
    CHECK(cli("bands --input " + in + " --h 0.12 --tn bogus --bootstrap 512").code == 3);
    CHECK(cli("bands --input " + in + " --h 0.12 --bootstrap 100").code == 3);
}

TEST_CASE("estimate output matches the library call") {
    std::string in = input_csv();
    CliRun r = cli("estimate --input " + in + " --h 0.12 --out cli_est.csv");
    REQUIRE(r.code == 0);
    std::string text = slurp("cli_est.csv");
    CHECK(text.rfind("x,phi_hat,psi_hat,tau_hat,contrast\n", 0) == 0);

    ImageGrid g = load_image(in);
    KernelPair pair = make_default_kernels();
    EstimationConfig cfg;
    cfg.h = 0.12;
    double sig = estimate_sigma(g);
    EdgeEstimate est = estimate_curve_tracked(g, pair, cfg, TrackConfig{}, sig);

    auto rows = parse_csv_rows(text, 1);
    REQUIRE(rows.size() == est.x_grid.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        REQUIRE(rows[i].size() == 5);
        CHECK(rows[i][0] == doctest::Approx(est.x_grid[i]).epsilon(1e-7));
        CHECK(rows[i][1] == doctest::Approx(est.phi_hat[i]).epsilon(1e-7));
        CHECK(rows[i][2] == doctest::Approx(est.psi_hat[i]).epsilon(1e-7));
        CHECK(rows[i][3] == doctest::Approx(est.tau_hat[i]).epsilon(1e-7));
        CHECK(rows[i][4] == doctest::Approx(est.contrast_at_max[i]).epsilon(1e-7));
    }

    CliRun j = cli("estimate --input " + in + " --h 0.12 --json --out cli_est.json");
    REQUIRE(j.code == 0);
    nlohmann::json je = nlohmann::json::parse(slurp("cli_est.json"));
    CHECK(je["h"] == 0.12);
    CHECK(je["n1"] == 64);
    CHECK(je["x"].size() == est.x_grid.size());
    CHECK(je["phi_hat"].size() == est.x_grid.size());
    CHECK(je.contains("sigma_hat"));
}

TEST_CASE("bands are reproducible from the seed, flag or environment") {
    std::string in = input_csv();
    std::string base = "bands --input " + in + " --h 0.12 --bootstrap 512";
    REQUIRE(cli(base + " --seed 42 --out cli_b1.csv").code == 0);
    REQUIRE(cli(base + " --seed 42 --out cli_b2.csv").code == 0);
    CHECK(slurp("cli_b1.csv") == slurp("cli_b2.csv"));

    CliRun env = cli("EDGEBAND_SEED=42 " + cli_path() + " " + base + " --out cli_b3.csv", true);
    REQUIRE(env.code == 0);
    CHECK(slurp("cli_b3.csv") == slurp("cli_b1.csv"));

    REQUIRE(cli(base + " --seed 43 --out cli_b4.csv").code == 0);
    CHECK(slurp("cli_b4.csv") != slurp("cli_b1.csv"));

    std::string text = slurp("cli_b1.csv");
    CHECK(text.rfind("# target=phi", 0) == 0);
    CHECK(text.find("\nx,center,pw_lo,pw_hi,unif_lo,unif_hi\n") != std::string::npos);
    auto rows = parse_csv_rows(text, 2);
    REQUIRE(!rows.empty());
    for (const auto& row : rows) {
        REQUIRE(row.size() == 6);
        CHECK(row[2] <= row[1]); // pw_lo <= center
        CHECK(row[1] <= row[3]);
        CHECK(row[4] <= row[2]); // uniform nests point-wise
        CHECK(row[3] <= row[5]);
    }

    CHECK(cli(base + " --target psi --seed 42 --out cli_bpsi.csv").code == 0);
}

TEST_CASE("multi emits one Bonferroni band per curve") {
    ImageGrid g = generate(scene_two_edges(0.1 * std::sqrt(0.8), 3), 64);
    save_csv(g, "cli_multi.csv");
    CliRun r = cli("multi --input cli_multi.csv --h 0.15 --bootstrap 512 --seed 2"
                   " --out cli_m.csv");
    REQUIRE(r.code == 0);
    std::string text = slurp("cli_m.csv");
    CHECK(text.find(" curves=2 ") != std::string::npos);
    CHECK(text.find("# curve=0 alpha_bonferroni=0.025") != std::string::npos);
    CHECK(text.find("# curve=1 alpha_bonferroni=0.025") != std::string::npos);
    CHECK(text.find("curve,x,center,pw_lo,pw_hi,unif_lo,unif_hi\n") != std::string::npos);
    auto rows = parse_csv_rows(text, 4);
    REQUIRE(!rows.empty());
    CHECK(rows.front()[0] == 0);
    CHECK(rows.back()[0] == 1);
}

TEST_CASE("pgm input goes through the same pipeline") {
    ImageGrid g = generate(scene_linear(0.0, 1), 32);
    std::ofstream f("cli_in.pgm", std::ios::binary);
    f << "P5\n32 32\n255\n";
    for (int r = 0; r < 32; ++r)
        for (int c = 0; c < 32; ++c) {
            double v = g.at(c + 1, 32 - r) / 1.5; // top raster row holds the largest y
            int q = static_cast<int>(std::lround(std::min(std::max(v, 0.0), 1.0) * 255.0));
            f.put(static_cast<char>(q));
        }
    f.close();
    CliRun r = cli("estimate --input cli_in.pgm --h 0.15 --out cli_pgm.csv");
    REQUIRE(r.code == 0);
    auto rows = parse_csv_rows(slurp("cli_pgm.csv"), 1);
    REQUIRE(!rows.empty());
    // quantization aside, the edge is still phi(x) = 1/4 + x/2
    for (const auto& row : rows)
        CHECK(std::abs(row[1] - scene_linear_phi(row[0])) < 0.05);
    CHECK(cli("estimate --input cli_in.pgm --format pgm --h 0.15").code == 0);
}

TEST_CASE("simulate is deterministic given a seed") {
    std::string base = "simulate --scenario phi1 --n 64 --sigma 0.5 --reps 1 --bootstrap 512"
                       " --seed 5";
    REQUIRE(cli(base + " --out cli_s1.csv").code == 0);
    REQUIRE(cli(base + " --out cli_s2.csv").code == 0);
    // identical up to the wall-clock column
    CHECK(drop_last_column(slurp("cli_s1.csv")) == drop_last_column(slurp("cli_s2.csv")));
    CHECK(slurp("cli_s1.csv").rfind("scenario,n,sigma_tilde,alpha,t_n,x,", 0) == 0);

    REQUIRE(cli(base + " --json --out cli_s.json").code == 0);
    nlohmann::json js = nlohmann::json::parse(slurp("cli_s.json"));
    CHECK(js.contains("spec"));
    CHECK(js["cells"].size() == 1);

    CliRun tn = cli("simulate --study tn --scenario phi1 --n 64 --reps 2 --bootstrap 512"
                    " --seed 5 --out cli_tn.csv");
    REQUIRE(tn.code == 0);
    CHECK(slurp("cli_tn.csv").rfind("n,sigma_tilde,level,empirical,bootstrap\n", 0) == 0);
}

TEST_CASE("checks reports the kernel facts") {
    CliRun r = cli("checks --out cli_checks.txt");
    REQUIRE(r.code == 0);
    std::string text = slurp("cli_checks.txt");
    CHECK(text.find("ok   K1 unit mass") != std::string::npos);
    CHECK(text.find("ok   K2 unit mass") != std::string::npos);
    CHECK(text.find("K2'(0) = 6.70750011") != std::string::npos);
    CHECK(text.find("note odd-moment condition") != std::string::npos);
    CHECK(text.find("bandwidth range:") != std::string::npos);
    // a bandwidth inside the admissible window gets an ok line
    CliRun ok = cli("checks --n 4096 --h 0.05 --eta 0.5 --out cli_checks2.txt");
    REQUIRE(ok.code == 0);
    CHECK(slurp("cli_checks2.txt").find("ok   bandwidth range") != std::string::npos);
}
