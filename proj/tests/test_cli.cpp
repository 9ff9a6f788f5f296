#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <json.hpp>

#include "bregtrim/cli.hpp"
#include "bregtrim/errors.hpp"
#include "bregtrim/io.hpp"
#include "bregtrim/trimmed_kmeans.hpp"

using namespace bregtrim;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() / ("bregtrim_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

std::string slurp(const std::string& path) { return read_text_file(path); }

}  // namespace

TEST_CASE("generate") {
    TempDir dir;
    auto r = cli({"generate", "--preset", "poisson,small", "--seed", "7", "--out", dir / "d.csv"});
    REQUIRE(r.code == 0);
    const auto data = read_dataset_csv(dir / "d.csv");
    CHECK(data.size() == 120);
    CHECK(slurp(dir / "d.csv").rfind("x1,x2,label\n", 0) == 0);

    REQUIRE(cli({"generate", "--preset", "poisson,small", "--seed", "7", "--out", dir / "e.csv"}).code == 0);
    CHECK(slurp(dir / "d.csv") == slurp(dir / "e.csv"));

    r = cli({"generate", "--preset", "weibull", "--out", dir / "x.csv"});
    CHECK(r.code == 2);
    CHECK(r.err.find("gaussian,small") != std::string::npos);

    CHECK(cli({"generate", "--preset", "gamma", "--out", (dir / "missing") + "/deep/x.csv"}).code == 3);
}

TEST_CASE("generate from a spec file") {
    TempDir dir;
    write(dir / "spec.json", R"({"dimension": 1, "n_signal": 10, "n_noise": 2, "noise_box": [[0, 5]],
        "components": [{"weight": 1, "coordinates": [{"law": "poisson", "a": 3}]}]})");
    REQUIRE(cli({"generate", "--spec", dir / "spec.json", "--seed", "1", "--out", dir / "d.csv"}).code == 0);
    CHECK(read_dataset_csv(dir / "d.csv").size() == 12);
    write(dir / "bad.json", "{");
    CHECK(cli({"generate", "--spec", dir / "bad.json", "--out", dir / "e.csv"}).code == 2);
}

TEST_CASE("fit on the five-point toy") {
    TempDir dir;
    write(dir / "toy.csv", "x1\n0\n0\n10\n10\n1000\n");
    auto r = cli({"fit", "--in", dir / "toy.csv", "--divergence", "sqeuclidean", "--k", "2", "--q", "4", "--seed", "3",
                  "--out", dir / "fit.json"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("cost 0.0\n") != std::string::npos);
    const auto j = nlohmann::json::parse(slurp(dir / "fit.json"));
    CHECK(j.at("labels") == nlohmann::json::array({1, 1, 2, 2, 0}));
    CHECK(j.at("version") == 1);
    CHECK(j.at("n") == 5);

    CHECK(cli({"fit", "--in", dir / "toy.csv", "--k", "2", "--q", "6"}).code == 2);
    CHECK(cli({"fit", "--in", dir / "toy.csv", "--k", "3", "--q", "2"}).code == 2);
    CHECK(cli({"fit", "--in", dir / "nope.csv", "--k", "2", "--q", "4"}).code == 3);
    CHECK(cli({"fit", "--in", dir / "toy.csv", "--k", "2", "--q", "4", "--divergence", "bogus"}).code == 2);
}

TEST_CASE("fit reports domain violations with the row") {
    TempDir dir;
    write(dir / "z.csv", "x1,x2\n1,2\n3,4\n0,5\n6,7\n");
    const auto r = cli({"fit", "--in", dir / "z.csv", "--divergence", "gamma:40", "--k", "1", "--q", "3"});
    CHECK(r.code == 2);
    CHECK(r.err.find("row 3") != std::string::npos);

    write(dir / "n.csv", "x1\n1\n-2\n3\n");
    CHECK(cli({"fit", "--in", dir / "n.csv", "--divergence", "poisson", "--k", "1", "--q", "2"}).code == 2);

    write(dir / "bad.csv", "x1,x2\n1,2\n3,abc\n");
    const auto bad = cli({"fit", "--in", dir / "bad.csv", "--k", "1", "--q", "2"});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("row 2") != std::string::npos);
}

TEST_CASE("fit result round trip") {
    TempDir dir;
    REQUIRE(cli({"generate", "--preset", "gamma,small", "--seed", "2", "--out", dir / "d.csv"}).code == 0);
    REQUIRE(cli({"fit", "--in", dir / "d.csv", "--divergence", "gamma:40", "--k", "3", "--q", "110", "--seed", "4",
                 "--starts", "5", "--out", dir / "f.json"})
                .code == 0);
    const auto file = fit_result_from_json(slurp(dir / "f.json"));
    const auto data = read_dataset_csv(dir / "d.csv");
    const auto div = Divergence::parse(file.divergence);
    const double recomputed = empirical_distortion(div, data, file.fit.codebook, file.q);
    CHECK(std::abs(recomputed - file.fit.cost) <= 1e-9 * file.fit.cost);
    std::size_t nonzero = 0;
    for (int l : file.fit.labels) nonzero += l != 0;
    CHECK(nonzero == 110);
    CHECK(fit_result_to_json(file) == slurp(dir / "f.json"));
}

TEST_CASE("sweep") {
    TempDir dir;
    REQUIRE(cli({"generate", "--preset", "gaussian,small", "--seed", "1", "--out", dir / "d.csv"}).code == 0);
    CHECK(cli({"sweep", "--in", dir / "d.csv", "--k-grid", "", "--q-grid", "100"}).code == 2);
    CHECK(cli({"sweep", "--in", dir / "d.csv", "--k-grid", "3..1", "--q-grid", "100"}).code == 2);

    auto r = cli({"sweep", "--in", dir / "d.csv", "--k-grid", "3", "--q-grid", "110", "--out-curves", dir / "c.csv"});
    REQUIRE(r.code == 0);
    const auto one = slurp(dir / "c.csv");
    CHECK(std::count(one.begin(), one.end(), '\n') == 2);

    r = cli({"sweep", "--in", dir / "d.csv", "--k-grid", "1..3", "--q-grid", "60..120", "--starts", "4", "--out-curves",
             dir / "c.csv", "--out-svg", dir / "c.svg"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("ranked candidates") != std::string::npos);
    CHECK(slurp(dir / "c.svg").find("<svg") != std::string::npos);
    const auto csv = slurp(dir / "c.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 3 * 61);
}

TEST_CASE("eval") {
    TempDir dir;
    write(dir / "a.csv", "label\n1\n1\n2\n2\n");
    write(dir / "b.csv", "label\n1\n2\n1\n2\n");
    write(dir / "c.csv", "label\n1\n2\n");
    auto r = cli({"eval", "--labels-a", dir / "a.csv", "--labels-b", dir / "a.csv"});
    CHECK(r.code == 0);
    CHECK(r.out == "1.0\n");
    r = cli({"eval", "--labels-a", dir / "a.csv", "--labels-b", dir / "b.csv"});
    CHECK(r.out == "0.0\n");
    CHECK(cli({"eval", "--labels-a", dir / "a.csv", "--labels-b", dir / "c.csv"}).code == 2);
}

TEST_CASE("breakdown") {
    TempDir dir;
    auto r = cli({"breakdown", "--p", "0.4", "--h", "0.9", "--gamma", "0.15", "--N-list", "10,100,1000", "--n", "1000",
                  "--out", dir / "b.json"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(slurp(dir / "b.json"));
    const auto& pts = j.at("points");
    REQUIRE(pts.size() == 3);
    for (std::size_t i = 1; i < 3; ++i)
        CHECK(pts[i].at("max_magnitude").get<double>() > pts[i - 1].at("max_magnitude").get<double>());

    r = cli({"breakdown", "--p", "0.4", "--h", "0.9", "--gamma", "0", "--N-list", "10,100,1000", "--out", dir / "z.json"});
    REQUIRE(r.code == 0);
    for (const auto& pt : nlohmann::json::parse(slurp(dir / "z.json")).at("points"))
        CHECK(pt.at("max_magnitude").get<double>() == doctest::Approx(1.0).epsilon(0.05));

    CHECK(cli({"breakdown", "--p", "0.4", "--h", "0.6", "--gamma", "0.1", "--N-list", "10"}).code == 2);
}

TEST_CASE("compare") {
    TempDir dir;
    const std::vector<std::string> args = {"compare", "--preset", "poisson,small", "--divergence", "sqeuclidean",
                                           "--divergence", "poisson", "--replications", "2", "--starts", "3",
                                           "--seed", "5"};
    auto a = args, b = args;
    a.insert(a.end(), {"--out-json", dir / "a.json", "--out-csv", dir / "a.csv"});
    b.insert(b.end(), {"--out-json", dir / "b.json", "--out-csv", dir / "b.csv", "--threads", "3"});
    REQUIRE(cli(a).code == 0);
    REQUIRE(cli(b).code == 0);
    CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
}

TEST_CASE("usage errors") {
    CHECK(cli({}).code == 2);
    CHECK(cli({"frobnicate"}).code == 2);
    CHECK(cli({"fit", "--k", "2"}).code == 2);
    CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("grid and list parsing") {
    CHECK(parse_grid("1..5") == std::vector<std::size_t>{1, 2, 3, 4, 5});
    CHECK(parse_grid("90,100..102") == std::vector<std::size_t>{90, 100, 101, 102});
    CHECK(parse_grid("7") == std::vector<std::size_t>{7});
    CHECK(parse_grid(" ").empty());
    CHECK_THROWS_AS(parse_grid("5,3"), ConfigError);
    CHECK_THROWS_AS(parse_grid("1..x"), ConfigError);
    CHECK(parse_real_list("10,100,1e3") == std::vector<double>{10, 100, 1000});
}

TEST_CASE("csv parsing") {
    const auto d = parse_dataset_csv("x1,x2,label\n1.5,-2,0\n3,4e1,2\n");
    CHECK(d.size() == 2);
    CHECK(d.dimension() == 2);
    CHECK(d.points(1, 1) == 40.0);
    CHECK(*d.labels == std::vector<int>{0, 2});
    CHECK_FALSE(parse_dataset_csv("x1\n1\n2\n").labels);
    CHECK_THROWS_AS(parse_dataset_csv("x1,x2\n1,2\n3\n"), CsvError);
    CHECK_THROWS_AS(parse_dataset_csv("x1\n1,5\n"), CsvError);
    CHECK(parse_double("0.1") == 0.1);
    CHECK(format_double(0.1) == "0.1");
}
