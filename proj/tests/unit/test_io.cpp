#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "mqg/errors.hpp"
#include "mqg/io.hpp"

using namespace mqg;

TEST_CASE("fixed-point wire format") {
  CHECK(io::format_fixed(0.0) == "0.00000000000");
  CHECK(io::format_fixed(1.0) == "1.00000000000");
  CHECK(io::format_fixed(123.456) == "123.456000000");
  CHECK(io::format_fixed(-0.0123456789012345) == "-0.0123456789012");
  CHECK(io::format_fixed(9.9999999999996) == "10.0000000000");
  CHECK(io::format_fixed(-1e-20) == "-0.0000000000000000000100000000000");
}

TEST_CASE("wire format is a fixed point of parse and format") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> mant(-10.0, 10.0);
  std::uniform_int_distribution<int> ex(-6, 6);
  for (int i = 0; i < 2000; ++i) {
    const double x = mant(rng) * std::pow(10.0, ex(rng));
    const std::string s = io::format_fixed(x);
    CHECK(io::format_fixed(std::stod(s)) == s);
    CHECK(std::abs(std::stod(s) - x) <= 1e-11 * std::abs(x));
  }
}

TEST_CASE("band CSV round trip") {
  const FluxRatio f = FluxRatio::make(1, 3);
  BandSet set{f, Regime::positive, {}, 1e-10, 0.0, 10.0};
  set.bands.push_back({0.5, 0.9, 0.25, 0.81});
  set.bands.push_back({2.0, std::sqrt(5.0), 4.0, 5.0});
  BandSet neg{f, Regime::negative, {}, 1e-10, 0.0, 6.0};
  neg.bands.push_back({1.1, 1.3, -1.69, -1.21});

  auto rows = io::band_rows(set);
  const auto nrows = io::band_rows(neg);
  rows.insert(rows.end(), nrows.begin(), nrows.end());
  io::sort_rows(rows);
  CHECK(rows.front().regime == Regime::negative);

  std::ostringstream os;
  io::write_band_csv(os, rows);
  const std::string text = os.str();
  CHECK(text.rfind("p,q,regime,band_index,e_lo,e_hi\n", 0) == 0);
  CHECK(text.find("1,3,negative,1,-1.69000000000,-1.21000000000\n") != std::string::npos);

  std::istringstream is(text);
  const auto back = io::read_band_csv(is);
  REQUIRE(back.size() == rows.size());
  std::ostringstream again;
  io::write_band_csv(again, back);
  CHECK(again.str() == text);

  const BandSet rebuilt = io::band_set_from_rows(back, f, Regime::positive);
  REQUIRE(rebuilt.bands.size() == 2);
  CHECK(rebuilt.bands[1].z_hi == doctest::Approx(std::sqrt(5.0)));
  const BandSet rebuilt_neg = io::band_set_from_rows(back, f, Regime::negative);
  REQUIRE(rebuilt_neg.bands.size() == 1);
  CHECK(rebuilt_neg.bands[0].z_lo == doctest::Approx(1.1));
  CHECK(rebuilt_neg.bands[0].z_hi == doctest::Approx(1.3));
}

TEST_CASE("malformed CSV") {
  std::istringstream no_header("1,2,positive,1,0.1,0.2\n");
  CHECK_THROWS_AS(io::read_band_csv(no_header), IoError);
  std::istringstream short_line("p,q,regime,band_index,e_lo,e_hi\n1,2,positive\n");
  CHECK_THROWS_AS(io::read_band_csv(short_line), IoError);
  std::istringstream bad_number("p,q,regime,band_index,e_lo,e_hi\n1,2,positive,1,abc,0.2\n");
  CHECK_THROWS_AS(io::read_band_csv(bad_number), IoError);
  std::istringstream bad_regime("p,q,regime,band_index,e_lo,e_hi\n1,2,up,1,0.1,0.2\n");
  CHECK_THROWS_AS(io::read_band_csv(bad_regime), IoError);
}

TEST_CASE("JSON mirrors the CSV") {
  std::vector<io::BandRow> rows{{1, 2, Regime::positive, 1, 1.0 / 3.0, 0.5}};
  io::DatasetMetadata meta;
  meta.command = "bands";
  meta.kappa_max = 6.0;
  const auto j = nlohmann::json::parse(io::band_json(rows, meta));
  CHECK(j["bands"][0]["e_lo"].get<double>() == std::stod(io::format_fixed(1.0 / 3.0)));
  CHECK(j["bands"][0]["regime"] == "positive");
  CHECK(j["metadata"]["kappa_max"].get<double>() == 6.0);
  CHECK(j["metadata"].contains("kappa_max_caveat"));
  CHECK(j["metadata"].contains("engine_version"));
}

TEST_CASE("probability and star CSV") {
  std::ostringstream os;
  io::write_prob_csv(os, {{1, 2, 0.5, 0.583, 50, 0.49, 0.495}});
  CHECK(os.str() == "p,q,p_sigma,thouless_ref,n\n1,2,0.500000000000,0.583000000000,50\n");
  std::ostringstream star;
  io::write_star_csv(star, 4, {-1.0});
  CHECK(star.str() == "n_edges,index,energy\n4,1,-1.00000000000\n");
}

TEST_CASE("SVG rendering") {
  std::vector<io::BandRow> rows{{1, 2, Regime::positive, 1, 1.0, 2.0}, {0, 1, Regime::positive, 1, 0.0, 3.0}};
  const std::string svg = io::butterfly_svg(rows, 0.0, 4.0);
  CHECK(svg.rfind("<svg", 0) == 0);
  std::size_t lines = 0;
  for (std::size_t pos = svg.find("<line"); pos != std::string::npos; pos = svg.find("<line", pos + 1)) ++lines;
  CHECK(lines == 3);  // baseline drawn at 0 and 1
  CHECK_THROWS_AS(io::butterfly_svg(rows, 1.0, 1.0), ValidationError);
}

TEST_CASE("write_file") {
  const auto dir = std::filesystem::temp_directory_path() / "mqg_test_io";
  std::filesystem::remove_all(dir);
  const auto path = (dir / "sub" / "x.csv").string();
  io::write_file(path, "abc\n");
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "abc");
  // A regular file in place of a directory.
  CHECK_THROWS_AS(io::write_file((dir / "sub" / "x.csv" / "y.csv").string(), "z"), IoError);
  std::filesystem::remove_all(dir);
}
