// End-to-end checks of the command-line tool: exit codes, determinism,
// file formats, and the JSON config path. Invoked with the binary path.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

int failures = 0;

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout
};

RunResult run(const std::string& cmd) {
    RunResult r;
    FILE* pipe = popen((cmd + " 2>/dev/null").c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    while (std::size_t got = fread(buf, 1, sizeof(buf), pipe)) {
        r.output.append(buf, got);
    }
    int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

void check(bool ok, const std::string& what) {
    if (ok) {
        std::printf("[ ok ] %s\n", what.c_str());
    } else {
        std::printf("[FAIL] %s\n", what.c_str());
        ++failures;
    }
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: test_cli <path-to-binary>\n");
        return 1;
    }
    const std::string bin = argv[1];
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "deepcond_cli_test";
    fs::create_directories(dir);

    {
        RunResult r = run(bin + " normrelu --c -1.5975 --format json --output " +
                          (dir / "nr.json").string());
        check(r.exit_code == 0, "normrelu exits 0");
        std::string text = slurp((dir / "nr.json").string());
        auto body = text.substr(text.find('{'));
        auto j = nlohmann::json::parse(body);
        check(std::abs(j["lambda"].get<double>() - 1.05) < 5e-3,
              "normrelu lambda near 1.05");
        check(std::abs(j["mu"].get<double>() - 0.0156) < 1e-3,
              "normrelu mu near 0.0156");
        check(text.rfind("# tool", 0) == 0, "provenance header present");
    }
    {
        RunResult r = run(bin + " normrelu --c abc");
        check(r.exit_code == 2, "non-numeric c is a usage error");
    }
    {
        RunResult a = run(bin + " dual-table --activations relu,step,exp");
        check(a.exit_code == 0, "dual-table exits 0");
        check(a.output.find("activation,mu,muTilde") != std::string::npos,
              "dual-table header");
        RunResult unknown = run(bin + " dual-table --activations swish");
        check(unknown.exit_code == 2, "unknown activation is a usage error");
        RunResult none = run(bin + " dual-table");
        check(none.exit_code == 2, "missing activation list is a usage error");
        RunResult ident = run(bin + " dual-table --activations identity");
        check(ident.output.find("identity,0,") != std::string::npos,
              "identity row reports mu = 0");
        // mu column for relu matches (pi-2)/(2 pi-2)
        auto pos = a.output.find("\nrelu,");
        check(pos != std::string::npos, "relu row present");
        if (pos != std::string::npos) {
            double mu = std::stod(a.output.substr(pos + 6));
            check(std::abs(mu - (M_PI - 2.0) / (2.0 * M_PI - 2.0)) < 1e-6,
                  "relu mu column matches the closed value");
        }
    }
    {
        const std::string out = (dir / "profile.csv").string();
        RunResult r = run(bin +
                          " profile --kind toplayer --synthetic-n 8 --delta 0.1"
                          " --activation relu-normalized --lmax 30 --seed 5"
                          " --output " + out);
        check(r.exit_code == 0, "profile exits 0");
        check(r.output.find("bounds-respected true") != std::string::npos,
              "profile verdict line");
        std::string text = slurp(out);
        check(text.find("L,maxOffDiag,lambdaMin,lambdaMax,kappa,boundB,boundKappa") !=
                  std::string::npos,
              "profile CSV schema");
    }
    {
        const std::string out = (dir / "ntk.csv").string();
        RunResult r = run(bin +
                          " profile --kind ntk --synthetic-n 4 --delta 0.3"
                          " --activation hermite2 --lmax 12 --seed 6 --output " + out);
        check(r.exit_code == 0, "ntk profile exits 0");
    }
    {
        // malformed CSV input names the line
        const std::string bad = (dir / "bad.csv").string();
        std::ofstream(bad) << "1,0.5\n0.5,not_a_number\n";
        RunResult r = run(bin + " profile --input " + bad +
                          " --activation relu-normalized --lmax 3");
        check(r.exit_code != 0, "malformed CSV input fails");
    }
    {
        const std::string a = (dir / "decay_a.csv").string();
        const std::string b = (dir / "decay_b.csv").string();
        const std::string cmd = bin +
            " simulate decay --m 256 --L 12 --rho 0.8 --trials 30 --seed 7"
            " --output ";
        RunResult r1 = run(cmd + a);
        RunResult r2 = run(cmd + b);
        check(r1.exit_code == 0 && r2.exit_code == 0, "simulate decay exits 0");
        check(slurp(a) == slurp(b) && !slurp(a).empty(),
              "repeated seeded runs are byte-identical");
    }
    {
        RunResult r = run(bin +
                          " simulate bn-invariance --activation relu-normalized"
                          " --batch 32 --m 64 --seed 9");
        check(r.exit_code == 0, "bn-invariance exits 0");
        check(r.output.find("bn-invariance true") != std::string::npos,
              "bn-invariance verdict");
    }
    {
        RunResult r = run(bin + " train interpolate --n 16 --delta 0.1"
                                " --activation relu-normalized --depth L1"
                                " --labels zeros --seed 3");
        check(r.exit_code == 0, "interpolate with zero labels exits 0");
        check(r.output.find("interpolation true") != std::string::npos,
              "interpolate verdict");
    }
    {
        RunResult r = run(bin + " train gd --kappa 100 --n 8 --iterations 500"
                                " --seed 2");
        check(r.exit_code == 0, "train gd exits 0");
        check(r.output.find("rate-envelope true") != std::string::npos,
              "gd verdict");
    }
    {
        RunResult r = run(bin + " train gd --n 16 --delta 0.1"
                                " --activation relu-normalized --depth L1"
                                " --iterations 300 --seed 4");
        check(r.exit_code == 0 &&
                  r.output.find("rate-envelope true") != std::string::npos,
              "gd on the depth-L1 kernel respects the envelope");
    }
    {
        RunResult r = run(bin + " simulate kernel --m 128,512 --n 3 --L 2"
                                " --trials 60 --delta 0.3 --seed 4");
        check(r.exit_code == 0 &&
                  r.output.find("kernel-concentration true") != std::string::npos,
              "kernel sweep error decreases with width");
    }
    {
        RunResult r = run(bin + " simulate sigma-min --n 4 --m 512 --delta 0.5"
                                " --trials 8 --seed 2");
        check(r.exit_code == 0 &&
                  r.output.find("sigma-min-positive true") != std::string::npos,
              "sigma-min stays positive");
    }
    {
        RunResult r = run(bin + " train sgd --kappa 25 --n 6 --epsilon 1e-3"
                                " --seeds 10 --seed 9");
        check(r.exit_code == 0 &&
                  r.output.find("sgd-rate true") != std::string::npos,
              "sgd reaches the loss target");
    }
    {
        RunResult r = run(bin + " train risk --n 24,32 --n-test 200"
                                " --activation relu-normalized --seed 5");
        check(r.exit_code == 0, "train risk runs");
    }
    {
        // identical output independent of the thread budget
        const std::string t1 = (dir / "threads1.csv").string();
        const std::string t2 = (dir / "threads2.csv").string();
        RunResult r1 = run(bin + " simulate decay --m 512 --L 10 --rho 0.6"
                                 " --trials 20 --seed 3 --threads 1 --output " + t1);
        RunResult r2 = run(bin + " simulate decay --m 512 --L 10 --rho 0.6"
                                 " --trials 20 --seed 3 --threads 2 --output " + t2);
        check(r1.exit_code == 0 && r2.exit_code == 0 && slurp(t1) == slurp(t2),
              "output is byte-identical across thread budgets");
    }
    {
        // JSON config supplies values; explicit flags win
        const std::string cfg = (dir / "cfg.json").string();
        std::ofstream(cfg) << R"({"m": 128, "L": 6, "rho": 0.5, "trials": 10})";
        const std::string out1 = (dir / "cfg_run.csv").string();
        RunResult r = run(bin + " simulate decay --config " + cfg +
                          " --seed 21 --output " + out1);
        check(r.exit_code == 0, "config-file run exits 0");
        check(slurp(out1).find("L=6") != std::string::npos,
              "config value reached the run");
        const std::string out2 = (dir / "cfg_run2.csv").string();
        RunResult r2 = run(bin + " simulate decay --config " + cfg +
                           " --L 4 --seed 21 --output " + out2);
        check(r2.exit_code == 0 &&
                  slurp(out2).find("L=4") != std::string::npos,
              "explicit flag beats the config file");
        const std::string badcfg = (dir / "badcfg.json").string();
        std::ofstream(badcfg) << R"({"bogus_key": 1})";
        RunResult r3 = run(bin + " simulate decay --config " + badcfg);
        check(r3.exit_code == 2, "unknown config keys are rejected");
    }

    std::printf("%s: %d failure(s)\n", failures ? "FAILURE" : "SUCCESS", failures);
    return failures ? 1 : 0;
}
