#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "twk/estimator.hpp"
#include "twk/io.hpp"
#include "twk/prf.hpp"

using namespace twk;

namespace {

WatermarkKey testKey(std::uint8_t fill = 0x42) {
  std::array<std::uint8_t, 32> master{};
  master.fill(fill);
  return WatermarkKey(master);
}

struct TempFile {
  std::string path;
  explicit TempFile(std::string p) : path(std::move(p)) {}
  ~TempFile() { std::remove(path.c_str()); }
};

void writeFile(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::trunc);
  os << content;
}

}  // namespace

TEST_CASE("load_csv: minimal file and header handling") {
  TempFile f("io_mini.csv");
  writeFile(f.path, "a,b\n1.5,2\n-3,4.25\n");
  const Dataset ds = Dataset::loadCsv(f.path);
  CHECK(ds.rows() == 2);
  CHECK(ds.features() == 2);
  CHECK(ds.featureNames()[0] == "a");
  CHECK(ds.at(0, 0) == 1.5);
  CHECK(ds.at(1, 1) == 4.25);
}

TEST_CASE("load_csv errors name the offending cell") {
  TempFile f("io_bad.csv");
  writeFile(f.path, "a,b\n1,2\n3,oops\n");
  try {
    Dataset::loadCsv(f.path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("row 3") != std::string::npos);
    CHECK(msg.find("column 2") != std::string::npos);
  }

  TempFile empty("io_empty.csv");
  writeFile(empty.path, "");
  CHECK_THROWS_AS(Dataset::loadCsv(empty.path), ParseError);

  TempFile ragged("io_ragged.csv");
  writeFile(ragged.path, "a,b\n1,2,3\n");
  CHECK_THROWS_AS(Dataset::loadCsv(ragged.path), ParseError);

  CHECK_THROWS_AS(Dataset::loadCsv("does_not_exist.csv"), ParseError);
}

TEST_CASE("a Stocks-shaped table loads with matching dimensions") {
  TempFile f("io_stocks.csv");
  std::string content = "open,high,low,close,adj,volume\n";
  const Prf rnd = testKey().subKey("csv");
  for (std::uint64_t r = 0; r < 3773; ++r) {
    for (int c = 0; c < 6; ++c) {
      content += std::to_string(rnd.unitOpen({r, std::uint64_t(c)}));
      content += (c == 5) ? '\n' : ',';
    }
  }
  writeFile(f.path, content);
  const Dataset ds = Dataset::loadCsv(f.path);
  CHECK(ds.rows() == 3773);
  CHECK(ds.features() == 6);
}

TEST_CASE("window: counts and overlap against a loop oracle") {
  TempFile f("io_win.csv");
  std::string content = "x,y\n";
  for (int r = 0; r < 10; ++r) {
    content += std::to_string(r) + "," + std::to_string(10 * r) + "\n";
  }
  writeFile(f.path, content);
  const Dataset ds = Dataset::loadCsv(f.path);

  CHECK(window(ds, 10, 1).batch() == 1);  // R == W
  const SeriesTensor t = window(ds, 4, 2);
  CHECK(t.batch() == 4);
  for (std::size_t b = 0; b < 4; ++b) {
    for (std::size_t w = 0; w < 4; ++w) {
      CHECK(t.at(b, w, 0) == ds.at(b * 2 + w, 0));
      CHECK(t.at(b, w, 1) == ds.at(b * 2 + w, 1));
    }
  }
  CHECK_THROWS_AS(window(ds, 11, 1), std::invalid_argument);

  // Exhaustive count check for small R.
  for (std::size_t R = 1; R <= 50; ++R) {
    std::string c2 = "v\n";
    for (std::size_t r = 0; r < R; ++r) c2 += std::to_string(r) + "\n";
    TempFile f2("io_count.csv");
    writeFile(f2.path, c2);
    const Dataset d2 = Dataset::loadCsv(f2.path);
    for (std::size_t W = 1; W <= R; ++W) {
      for (std::size_t s = 1; s <= 3; ++s) {
        std::size_t expect = 0;
        for (std::size_t start = 0; start + W <= R; start += s) ++expect;
        CHECK(window(d2, W, s).batch() == expect);
      }
    }
  }
}

TEST_CASE("normalization round trips to 1e-12 and min-max lands in [0,1]") {
  TempFile f("io_norm.csv");
  std::string content = "p,q,const\n";
  const Prf rnd = testKey(0x15).subKey("norm");
  std::vector<double> orig;
  for (std::uint64_t r = 0; r < 40; ++r) {
    const double a = rnd.unitOpen({r, 0}) * 100 - 50;
    const double b = rnd.unitOpen({r, 1}) * 1e-3;
    orig.push_back(a);
    orig.push_back(b);
    orig.push_back(7.0);
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,7\n", a, b);
    content += buf;
  }
  writeFile(f.path, content);
  for (const auto kind : {Normalization::minmax, Normalization::zscore}) {
    Dataset ds = Dataset::loadCsv(f.path);
    ds.normalize(kind);
    if (kind == Normalization::minmax) {
      for (std::size_t r = 0; r < ds.rows(); ++r) {
        for (std::size_t c = 0; c < 2; ++c) {
          CHECK(ds.at(r, c) >= 0.0);
          CHECK(ds.at(r, c) <= 1.0);
        }
      }
    }
    ds.denormalize();
    for (std::size_t r = 0; r < ds.rows(); ++r) {
      for (std::size_t c = 0; c < 3; ++c) {
        CHECK(ds.at(r, c) == doctest::Approx(orig[r * 3 + c]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("TWK1 round trip is bit exact and the size formula holds") {
  const std::size_t B = 3, W = 5, F = 2;
  SeriesTensor x = standard_normal_tensor(B, W, F, testKey().subKey("t"), 0);
  x.at(0, 0, 0) = -0.0;
  x.at(0, 0, 1) = 5e-324;  // subnormal
  TempFile f("io_tensor.twk");
  save_tensor(x, f.path);
  CHECK(std::filesystem::file_size(f.path) == 20 + 8 * B * W * F);
  const SeriesTensor y = load_tensor(f.path);
  CHECK(y.batch() == B);
  CHECK(y.window() == W);
  CHECK(y.features() == F);
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::uint64_t ba, bb;
    std::memcpy(&ba, &x.flat()[i], 8);
    std::memcpy(&bb, &y.flat()[i], 8);
    CHECK(ba == bb);
  }
}

TEST_CASE("TWK1 rejects bad magic, bad version, truncation") {
  TempFile f("io_corrupt.twk");
  writeFile(f.path, "NOPE");
  CHECK_THROWS_WITH_AS(load_tensor(f.path), doctest::Contains("magic"),
                       std::runtime_error);

  SeriesTensor x(1, 2, 2);
  save_tensor(x, f.path);
  {
    std::fstream fs(f.path, std::ios::in | std::ios::out | std::ios::binary);
    fs.seekp(4);
    const char two[4] = {2, 0, 0, 0};
    fs.write(two, 4);
  }
  CHECK_THROWS_WITH_AS(load_tensor(f.path), doctest::Contains("version"),
                       std::runtime_error);

  save_tensor(x, f.path);
  std::filesystem::resize_file(f.path, 30);
  CHECK_THROWS_WITH_AS(load_tensor(f.path), doctest::Contains("truncated"),
                       std::runtime_error);
}
