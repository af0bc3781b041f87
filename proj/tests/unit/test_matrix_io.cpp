#include "mdyn/errors.hpp"
#include "mdyn/matrix_io.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <random>

using namespace mdyn;

TEST(FormatDouble, ShortestRoundTrip) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 2000; ++i) {
        const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
        EXPECT_EQ(io::parse_double(io::format_double(v), "t"), v);
    }
    EXPECT_EQ(io::format_double(0.1), "0.1");
    EXPECT_EQ(io::format_double(-2.0), "-2");
}

TEST(FormatDouble, NonFinite) {
    EXPECT_EQ(io::format_double(std::numeric_limits<double>::infinity()), "inf");
    EXPECT_TRUE(std::isnan(io::parse_double("nan", "t")));
    EXPECT_EQ(io::parse_double("-inf", "t"), -std::numeric_limits<double>::infinity());
}

TEST(ParseDouble, RejectsGarbage) {
    EXPECT_THROW(io::parse_double("", "ctx"), IoError);
    EXPECT_THROW(io::parse_double("1.5x", "ctx"), IoError);
    EXPECT_THROW(io::parse_double("one", "ctx"), IoError);
    EXPECT_DOUBLE_EQ(io::parse_double(" +2.5 ", "ctx"), 2.5);
    try {
        io::parse_double("zz", "file.csv:3");
        FAIL();
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("file.csv:3"), std::string::npos);
    }
}

TEST(Split, KeepsEmptyFields) {
    const auto f = io::split("a,,b,");
    ASSERT_EQ(f.size(), 4u);
    EXPECT_EQ(f[1], "");
    EXPECT_EQ(f[3], "");
}

TEST(MatrixCsv, RoundTrip) {
    mdyn::testing::TempDir dir("mio");
    const Matrix m = Matrix::Random(7, 4) * 1e3;
    io::write_matrix_csv(m, dir / "m.csv", {"a", "b", "c", "d"});
    EXPECT_EQ(io::read_matrix_csv(dir / "m.csv", true), m);
    EXPECT_EQ(io::read_header(dir / "m.csv"), (std::vector<std::string>{"a", "b", "c", "d"}));
    io::write_matrix_csv(m, dir / "n.csv");
    EXPECT_EQ(io::read_matrix_csv(dir / "n.csv"), m);
}

TEST(MatrixCsv, RaggedRowsFail) {
    mdyn::testing::TempDir dir("mio");
    {
        std::ofstream f(dir / "r.csv");
        f << "1,2\n3\n";
    }
    EXPECT_THROW(io::read_matrix_csv(dir / "r.csv"), IoError);
}

TEST(KeyValues, RoundTripAndComments) {
    mdyn::testing::TempDir dir("mio");
    io::KeyValues kv{{"alpha", "1"}, {"beta", "two words"}};
    io::write_key_values(kv, dir / "k.meta");
    EXPECT_EQ(io::read_key_values(dir / "k.meta"), kv);
    {
        std::ofstream f(dir / "c.meta");
        f << "# comment\n  key =  v  \n\n";
    }
    const auto c = io::read_key_values(dir / "c.meta");
    EXPECT_EQ(io::require_key(c, "key", dir / "c.meta"), "v");
    EXPECT_THROW(io::require_key(c, "nope", dir / "c.meta"), IoError);
    {
        std::ofstream f(dir / "bad.meta");
        f << "no equals sign\n";
    }
    EXPECT_THROW(io::read_key_values(dir / "bad.meta"), IoError);
}
