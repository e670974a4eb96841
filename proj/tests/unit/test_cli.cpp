#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const std::string kRoot = MEMSNN_SOURCE_DIR;
const std::string kCli = MEMSNN_CLI;

fs::path scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / ("memsnn_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Runs the CLI from the source root; returns the exit status.
int run(const std::string& args, const fs::path& log)
{
    const std::string cmd = "cd '" + kRoot + "' && '" + kCli + "' " + args + " > '" +
                            log.string() + "' 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t lines(const std::string& text)
{
    std::size_t n = 0;
    for (char c : text)
        n += c == '\n';
    return n;
}

} // namespace

TEST_CASE("train is byte-reproducible for a fixed seed")
{
    const auto dir = scratch("train");
    const std::string base = "train --config configs/tiny_tsv.toml --seed 5 --out '";
    REQUIRE(run(base + (dir / "a").string() + "'", dir / "a.log") == 0);
    REQUIRE(run(base + (dir / "b").string() + "'", dir / "b.log") == 0);
    const auto a = slurp(dir / "a" / "metrics.csv");
    CHECK(!a.empty());
    CHECK(a == slurp(dir / "b" / "metrics.csv"));
    CHECK(slurp(dir / "a" / "crossbar.csv") == slurp(dir / "b" / "crossbar.csv"));
    for (const char* f : {"summary.json", "weights_trace.csv", "programming_trace.csv",
                          "config.toml", "params.txt"})
        CHECK(fs::exists(dir / "a" / f));

    // the saved config reproduces the run
    REQUIRE(run("train --config '" + (dir / "a" / "config.toml").string() + "' --out '" +
                    (dir / "c").string() + "'",
                dir / "c.log") == 0);
    CHECK(slurp(dir / "c" / "metrics.csv") == a);

    // eval on the saved artifacts
    CHECK(run("eval --config configs/tiny_tsv.toml --params '" +
                  (dir / "a" / "params.txt").string() + "' --crossbar '" +
                  (dir / "a" / "crossbar.csv").string() + "' --out '" + (dir / "e").string() +
                  "'",
              dir / "e.log") == 0);
}

TEST_CASE("bad configs fail with a message naming the field")
{
    const auto dir = scratch("bad");
    CHECK(run("train --config configs/approach1.toml --out '" + (dir / "o").string() + "'",
              dir / "log") == 2);
    CHECK(slurp(dir / "log").find("imdb_dir") != std::string::npos);

    CHECK(run("train --config configs/tiny_tsv.toml --override network.T=0 --out '" +
                  (dir / "o").string() + "'",
              dir / "log2") == 2);
    CHECK(slurp(dir / "log2").find("T") != std::string::npos);

    CHECK(run("train --config does_not_exist.toml", dir / "log3") != 0);
}

TEST_CASE("sweep writes one row per value and validates up front")
{
    const auto dir = scratch("sweep");
    REQUIRE(run("sweep --config configs/tiny_tsv.toml --override experiment.epochs=1 "
                "--param T --values 50,200 --out '" +
                    (dir / "s").string() + "'",
                dir / "log") == 0);
    const auto csv = slurp(dir / "s" / "sweep.csv");
    CHECK(lines(csv) == 3);
    CHECK(csv.find("ok") != std::string::npos);
    CHECK(fs::exists(dir / "s" / "cell_0" / "metrics.csv"));
    CHECK(fs::exists(dir / "s" / "cell_1" / "metrics.csv"));

    REQUIRE(run("sweep --config configs/tiny_tsv.toml --override experiment.epochs=1 "
                "--param read_noise --values 0,0.01 --param2 r_tolerance --values2 0.03 --out '" +
                    (dir / "g").string() + "'",
                dir / "log2") == 0);
    CHECK(lines(slurp(dir / "g" / "sweep.csv")) == 3);

    CHECK(run("sweep --config configs/tiny_tsv.toml --param T --values 50,0 --out '" +
                  (dir / "bad").string() + "'",
              dir / "log3") == 2);
    CHECK(!fs::exists(dir / "bad" / "sweep.csv"));
    CHECK(run("sweep --config configs/tiny_tsv.toml --param T --values '' --out '" +
                  (dir / "empty").string() + "'",
              dir / "log4") != 0);
    CHECK(run("sweep --config configs/tiny_tsv.toml --param bogus --values 1 --out '" +
                  (dir / "bogus").string() + "'",
              dir / "log5") != 0);
}
