#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("rotorwalk_cli_" + std::to_string(::getpid()));
        fs::create_directories(d);
        std::ofstream(d / "k3.edges") << "a b\nb z\nz a\n";
        std::ofstream(d / "k4.edges") << "a b\na c\na z\nb c\nb z\nc z\n";
        std::ofstream(d / "p3.edges") << "v0 v1\nv1 v2\n";
        return d;
    }();
    return dir;
}

int cli(const std::string& args) {
    std::string cmd = "cd '" + workdir().string() + "' && '" ROTORWALK_CLI_PATH "' " + args + " > stdout.txt 2> stderr.txt";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string body(const fs::path& p) {
    std::ifstream in(p);
    std::string line, out;
    while (std::getline(in, line))
        if (line.empty() || line[0] != '#') out += line + '\n';
    return out;
}

const std::string kConfigs = ROTORWALK_SOURCE_DIR "/configs/";

}  // namespace

TEST_CASE("cli green, walk and sample") {
    REQUIRE(cli("green --graph k3.edges --sink z --start a --exact --out g.csv") == 0);
    CHECK(body(workdir() / "g.csv") == "vertex,G\na,4/3\nb,2/3\nz,0\n");
    CHECK(slurp(workdir() / "g.csv").rfind("# rotorwalk ", 0) == 0);

    REQUIRE(cli("walk --graph p3.edges --sink v2 --start v0 --rho v0:v1,v1:v2 --out w.csv") == 0);
    std::string w = body(workdir() / "w.csv");
    CHECK(w.find("v0,2,") != std::string::npos);
    CHECK(w.find("v1,2,") != std::string::npos);

    REQUIRE(cli("sample --graph k4.edges --sink z --n 100000 --seed 7 --out s.csv") == 0);
    std::string s = body(workdir() / "s.csv");
    CHECK(std::count(s.begin(), s.end(), '\n') == 100001);
    REQUIRE(cli("sample --graph k4.edges --sink z --n 100000 --seed 7 --out s2.csv") == 0);
    CHECK(body(workdir() / "s2.csv") == s);
}

TEST_CASE("cli errors") {
    CHECK(cli("graph --family grid --dim 0") == 2);
    CHECK(cli("experiment --config " + kConfigs + "fig1_gap.json --seed 1 --out bad --stem f") == 1);
    CHECK(cli("walk --graph missing.edges --sink z --start a") != 0);
    CHECK(cli("green --graph k3.edges --sink q --start a") != 0);
    CHECK(cli("walk --graph k3.edges --sink z --start a --rho a:a") != 0);
}

TEST_CASE("cli graph") {
    REQUIRE(cli("graph --family grid --dim 3 --radius 2 --out gr --stem g") == 0);
    CHECK(fs::exists(workdir() / "gr" / "g.edges"));
    CHECK(slurp(workdir() / "gr" / "g.json").find("\"vertex_count\": 125") != std::string::npos);
    REQUIRE(cli("green --graph gr/g.edges --sink \"(2,2,2)\" --start \"(0,0,0)\" --out gg.csv") == 0);
}

TEST_CASE("cli experiment and reruns") {
    const std::string cfg = kConfigs + "sigma_bijection_k4.json";
    REQUIRE(cli("experiment --config " + cfg + " --out e1") == 0);
    REQUIRE(cli("--threads 4 experiment --config " + cfg + " --out e2") == 0);
    auto csv = "sigma_bijection_k4_permutation.csv";
    CHECK(!body(workdir() / "e1" / csv).empty());
    CHECK(body(workdir() / "e1" / csv) == body(workdir() / "e2" / csv));
    CHECK(slurp(workdir() / "e1" / "sigma_bijection_k4.json").find("\"verdict\": \"pass\"") != std::string::npos);
    CHECK(cli("experiment --list") == 0);
}
