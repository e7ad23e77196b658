#include <catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "vaxnet/milp/lp_format.hpp"

using namespace vaxnet::milp;

namespace {

std::string to_text(const MilpProblem& p) {
    std::ostringstream os;
    write_lp(p, os);
    return os.str();
}

}  // namespace

TEST_CASE("empty problem round trips", "[lpformat]") {
    MilpProblem p;
    p.name = "empty";
    const std::string text = to_text(p);
    CHECK(text.find("Maximize") != std::string::npos);
    CHECK(text.find("Subject To") != std::string::npos);
    CHECK(parse_lp(text) == p);
}

TEST_CASE("binary columns go under Binaries", "[lpformat]") {
    MilpProblem p;
    p.add_variable("Y_3", Domain::Binary, 0, 1, 0.0);
    p.add_variable("Z", Domain::Integer, 0, 7, 0.0);
    const std::string text = to_text(p);
    const auto bin = text.find("Binaries");
    REQUIRE(bin != std::string::npos);
    CHECK(text.find("Y_3", bin) != std::string::npos);
    CHECK(text.find("Generals") < bin);
    CHECK(parse_lp(text) == p);
}

TEST_CASE("awkward coefficients and bounds survive bit-exact", "[lpformat]") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    MilpProblem p;
    p.name = "awkward";
    p.add_variable("free_col", Domain::Continuous, -kInf, kInf, 1.0 / 3.0);
    p.add_variable("neg", Domain::Continuous, -2.5, -0.125, -0.0);
    p.add_variable("fixed", Domain::Continuous, 4.0, 4.0, 0.0);
    p.add_variable("upper_only", Domain::Continuous, -kInf, 9.0, 1e-300);
    p.add_variable("y", Domain::Binary, 1, 1, 5.0);
    p.add_variable("k", Domain::Integer, -3, kInf, 2.0);
    for (int i = 0; i < 40; ++i) {
        std::vector<Term> t;
        for (int j = 0; j < 6; ++j)
            if ((i + j) % 3) t.push_back({j, u(rng)});
        p.add_row("row_" + std::to_string(i), t, static_cast<RowSense>(i % 3), u(rng));
    }
    p.add_row("empty_row", {}, RowSense::LessEqual, 3.0);
    CHECK(parse_lp(to_text(p)) == p);
}

TEST_CASE("parser accepts hand-written files", "[lpformat]") {
    const std::string text = R"(\ a comment
MINIMIZE
 cost: 2 x + 3 y - z
SUBJECT TO
 c1: x + y >= 2
 -x + 2 y <= 3.5e0
 c3: z =< 4
BOUNDS
 y <= 10
 z free
GENERAL
 y
END
)";
    const MilpProblem p = parse_lp(text);
    REQUIRE(p.columns() == 3);
    CHECK(p.objective == std::vector<double>{-2.0, -3.0, 1.0});
    REQUIRE(p.rows.size() == 3);
    CHECK(p.rows[1].name == "R2");
    CHECK(p.rows[1].rhs == 3.5);
    CHECK(p.rows[2].sense == RowSense::LessEqual);
    CHECK(p.variables[1].domain == Domain::Integer);
    CHECK(p.variables[1].upper == 10.0);
    CHECK(p.variables[2].lower == -kInf);
}

TEST_CASE("malformed input is rejected", "[lpformat]") {
    CHECK_THROWS_AS(parse_lp("Maximize\n obj: x\nSubject To\n c: x 3\nEnd\n"), vaxnet::Error);
    CHECK_THROWS_AS(parse_lp("Maximize\n obj: x\nSubject To\n c: x <= ?\nEnd\n"), vaxnet::Error);
}

TEST_CASE("long rows wrap", "[lpformat]") {
    MilpProblem p;
    std::vector<Term> t;
    for (int j = 0; j < 300; ++j) {
        p.add_variable("column_with_long_name_" + std::to_string(j), Domain::Continuous, 0, kInf, j * 0.1);
        t.push_back({j, 1.0 + j});
    }
    p.add_row("big", t, RowSense::LessEqual, 1e5);
    const std::string text = to_text(p);
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) CHECK(line.size() < 260);
    CHECK(parse_lp(text) == p);
}

TEST_CASE("unwritable destination throws", "[lpformat]") {
    CHECK_THROWS_AS(write_lp_file(MilpProblem{}, "/nonexistent_dir/x.lp"), vaxnet::Error);
}
