#include <cmath>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "vesselkit/cli.hpp"
#include "vesselkit/config.hpp"
#include "vesselkit/errors.hpp"
#include "vesselkit/hierarchy.hpp"

using namespace vesselkit;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args)
{
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string fixture(const std::string& name) { return std::string(VESSELKIT_FIXTURES) + "/" + name; }

std::vector<std::vector<double>> parse_csv(const std::string& text, std::string* header = nullptr)
{
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    if (header) *header = line;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

double sech2(double u) { return 1.0 / (std::cosh(u) * std::cosh(u)); }

} // namespace

TEST_CASE("complex literals")
{
    const cplx I{0.0, 1.0};
    CHECK(cli::parse_complex("1.5") == cplx(1.5));
    CHECK(cli::parse_complex("1+2i") == cplx(1, 2));
    CHECK(cli::parse_complex("1-2i") == cplx(1, -2));
    CHECK(cli::parse_complex("-2.5i") == cplx(0, -2.5));
    CHECK(cli::parse_complex("i") == I);
    CHECK(cli::parse_complex("-i") == -I);
    CHECK(cli::parse_complex("1.4142135623730951+0i") == cplx(std::sqrt(2.0)));
    CHECK(cli::parse_complex("√2") == cplx(std::sqrt(2.0)));
    CHECK(cli::parse_complex("sqrt(2)-i") == cplx(std::sqrt(2.0), -1));
    CHECK(cli::parse_complex("1e-3+4e1i") == cplx(1e-3, 40));
    for (const char* bad : {"", "abc", "1+", "1+2", "i+1", "1+-2i", "sqrt(2", "2ii", "nan"})
        CHECK_THROWS_AS(cli::parse_complex(bad), ValidationError);
}

TEST_CASE("lists")
{
    CHECK(cli::split_list("1, 2,3") == std::vector<std::string>{"1", "2", "3"});
    CHECK(cli::split_list("").empty());
    CHECK_THROWS_AS(cli::split_list("1,,2"), ValidationError);
    CHECK_THROWS_AS(cli::split_list("1,"), ValidationError);
}

TEST_CASE("hierarchy command")
{
    auto r = run({"hierarchy", "--levels", "0", "--format", "text"});
    CHECK(r.code == 0);
    CHECK(r.out == "(-1/4)*B3 + (3/2)*B1^2\n");

    CHECK(run({"hierarchy", "--levels", "11"}).code == 2);
    CHECK(run({"hierarchy", "--levels", "-1"}).code == 2);
    CHECK(run({"hierarchy", "--format", "yaml"}).code == 2);
    CHECK(run({"hierarchy", "--recursion", "other"}).code == 2);

    r = run({"hierarchy", "--levels", "1", "--format", "json", "--companions"});
    REQUIRE(r.code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    const auto table = hierarchy_table(1);
    REQUIRE(doc["levels"].size() == 2);
    for (int m = 0; m <= 1; ++m) {
        CHECK(from_json(doc["levels"][m]["b"]) == table[m].b);
        CHECK(from_json(doc["levels"][m]["a"]) == table[m].a);
        CHECK(from_json(doc["levels"][m]["c"]) == table[m].c);
    }

    const auto a = run({"hierarchy", "--levels", "4", "--format", "latex", "--companions"});
    const auto b = run({"hierarchy", "--levels", "4", "--format", "latex", "--companions"});
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.find("b_{4}") != std::string::npos);
}

TEST_CASE("soliton command")
{
    auto r = run({"soliton", "--k", "1", "--b", "1.4142135623730951+0i", "--n", "1", "--grid", "-5:5:101,0:1:21"});
    REQUIRE(r.code == 0);
    std::string header;
    const auto rows = parse_csv(r.out, &header);
    CHECK(header == "x,t,re_q,im_q,re_beta,im_beta,re_tau,im_tau");
    REQUIRE(rows.size() == 2121);
    CHECK(rows[1][0] == doctest::Approx(-4.9));
    CHECK(rows[1][1] == 0.0);
    CHECK(rows[101][1] == doctest::Approx(0.05));
    double worst = 0.0;
    for (const auto& row : rows) worst = std::max(worst, std::abs(row[2] + 2.0 * sech2(row[0] + row[1])));
    CHECK(worst <= 1e-8);

    CHECK(r.out == run({"soliton", "--k", "1", "--b", "√2"}).out);

    CHECK(run({"soliton", "--k", "1,1", "--b", "1,1"}).code == 2);
    CHECK(run({"soliton", "--k", "", "--b", ""}).code == 2);
    CHECK(run({"soliton", "--k", "1,2", "--b", "1"}).code == 2);
    CHECK(run({"soliton", "--k", "-1", "--b", "1"}).code == 2);
    CHECK(run({"soliton", "--k", "1", "--b", "0"}).code == 2);
    CHECK(run({"soliton", "--k", "1", "--b", "1", "--grid", "bad"}).code == 2);
    CHECK(run({"soliton", "--k", "1", "--b", "1", "--n", "0"}).code == 2);
    const auto bad_b = run({"soliton", "--k", "1", "--b", "x"});
    CHECK(bad_b.code == 2);
    CHECK(bad_b.err.find("--b") != std::string::npos);
    CHECK(run({"soliton", "--b", "1"}).code == 2);
    CHECK(run({}).code == 2);
}

TEST_CASE("csv values survive a decimal round trip")
{
    auto r = run({"soliton", "--k", "0.5,1.5", "--b", "1+0.5i,2", "--grid", "-1:1:5,0:1:2"});
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", std::stod(cell));
            CHECK(cell == buf);
        }
    }
}

TEST_CASE("verify command")
{
    auto r = run({"verify", "--suite", "kdv", "--k", "1", "--b", "√2", "--n", "1"});
    CHECK(r.code == 0);
    CHECK(r.out.find("kdv") != std::string::npos);

    r = run({"verify", "--suite", "vessel", "--config", fixture("corrupted.json")});
    CHECK(r.code == 1);
    CHECK(r.out.find("lyapunov") != std::string::npos);

    r = run({"verify", "--suite", "all", "--config", fixture("zero_modes.json"), "--json"});
    CHECK(r.code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    for (const auto& row : doc["checks"]) {
        CAPTURE(row["name"].get<std::string>());
        CHECK(row["pass"] == true);
        if (row["name"] != "input_lde" && row["name"] != "backlund") CHECK(row["max_residual"] == 0.0);
    }

    r = run({"verify", "--suite", "all", "--config", fixture("kdv_1soliton.json")});
    CHECK(r.code == 0);
    CHECK(r.out.find("hierarchy_flow_level_0") != std::string::npos);

    CHECK(run({"verify", "--suite", "kdv", "--k", "1", "--b", "1", "--tol", "1e-30"}).code == 1);
    CHECK(run({"verify", "--suite", "bogus", "--k", "1", "--b", "1"}).code == 2);
    CHECK(run({"verify", "--suite", "kdv", "--k", "1", "--b", "1", "--n", "2"}).code == 2);
    CHECK(run({"verify", "--suite", "kdv"}).code == 2);
    CHECK(run({"verify", "--config", fixture("unknown_key.json")}).code == 2);
    CHECK(run({"verify", "--config", fixture("missing.json")}).code == 2);
    CHECK(run({"verify", "--suite", "vessel", "--config", fixture("invalid_coefficients.json")}).code == 2);
}

TEST_CASE("evolve command")
{
    auto r = run({"evolve", "--config", fixture("type0.json")});
    REQUIRE(r.code == 0);
    std::string header;
    auto rows = parse_csv(r.out, &header);
    CHECK(header == "x,t,re_beta,im_beta,re_tau,im_tau");
    REQUIRE(rows.size() == 45);
    std::map<double, cplx> beta0;
    double worst = 0.0;
    for (const auto& row : rows) {
        const cplx beta(row[2], row[3]);
        if (row[1] == 0.0) beta0[row[0]] = beta;
        worst = std::max(worst, std::abs(beta - type0_closed_beta(beta0.at(row[0]), 1.0, row[1])));
    }
    CHECK(worst <= 1e-8);
    CHECK(r.err.find("lyapunov_residual") != std::string::npos);

    r = run({"evolve", "--config", fixture("hierarchy1_evolve.json")});
    REQUIRE(r.code == 0);
    const auto evolved = parse_csv(r.out);
    const auto closed = parse_csv(run({"soliton", "--k", "1", "--b", "√2", "--grid", "-5:5:21,0:1:6"}).out);
    REQUIRE(evolved.size() == closed.size());
    worst = 0.0;
    for (std::size_t i = 0; i < closed.size(); ++i)
        for (std::size_t c = 0; c < closed[i].size(); ++c)
            worst = std::max(worst, std::abs(evolved[i][c] - closed[i][c]));
    CHECK(worst <= 1e-6);

    CHECK(run({"evolve", "--config", fixture("invalid_coefficients.json")}).code == 2);
    CHECK(run({"evolve", "--config", fixture("unknown_key.json")}).code == 2);

    r = run({"evolve", "--config", fixture("type0_pole.json")});
    CHECK(r.code == 4);
    CHECK(r.err.find("last good time t=0.5") != std::string::npos);

    const auto a = run({"evolve", "--config", fixture("type0.json")});
    CHECK(a.out == run({"evolve", "--config", fixture("type0.json")}).out);
}

TEST_CASE("run configs")
{
    const auto cfg = RunConfig::load(fixture("kdv_1soliton.json"));
    CHECK(cfg.mode == RunMode::soliton);
    CHECK(cfg.modes.size() == 1);
    CHECK(cfg.grid.nx == 13);
    CHECK(cfg.outputs.fields.size() == 3);

    using nlohmann::json;
    const json base = json::parse(R"({"mode": "general", "evolution": {"type": "type0", "m": 1},
                                      "modes": [{"k": 1, "b_re": 1}]})");
    CHECK_NOTHROW(RunConfig::from_json(base));
    auto bad = base;
    bad["modes"][0]["phase"] = 1;
    CHECK_THROWS_AS(RunConfig::from_json(bad), ValidationError);
    bad = base;
    bad["evolution"]["n"] = 1;
    CHECK_THROWS_AS(RunConfig::from_json(bad), ValidationError);
    bad = base;
    bad["mode"] = "soliton";
    CHECK_THROWS_AS(RunConfig::from_json(bad), ValidationError);
    bad = base;
    bad["outputs"] = json::parse(R"({"fields": ["q", "q"]})");
    CHECK_THROWS_AS(RunConfig::from_json(bad), ValidationError);
    bad = base;
    bad["grid"] = json::parse(R"({"nx": 0})");
    CHECK_THROWS_AS(RunConfig::from_json(bad), ValidationError);
    bad = base;
    bad["modes"].push_back(json::parse(R"({"k": 1, "b_re": 2})"));
    CHECK_THROWS_AS(RunConfig::from_json(bad), ValidationError);
    bad = base;
    bad.erase("modes");
    CHECK_THROWS_AS(RunConfig::from_json(bad), ValidationError);
}
