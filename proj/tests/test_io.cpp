#include "road/io.hpp"

#include "road/svg.hpp"

#include <doctest.h>

#include <bit>
#include <cstdint>
#include <filesystem>
#include <string>

using namespace road;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("road_io_test_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

bool same_bits(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

}  // namespace

TEST_CASE("format_double round-trips exactly") {
  for (double v : {0.0, 1.0, -2.5, 0.1, 1.0 / 3.0, 6.02214076e23, -1.7976931348623157e308,
                   5e-324, 3.141592653589793, 1e-10, -0.30853753872598689}) {
    CAPTURE(v);
    CHECK(same_bits(io::parse_double(io::format_double(v)), v));
  }
  CHECK(io::format_double(1.0) == "1");
  CHECK(io::format_double(0.5) == "0.5");
}

TEST_CASE("parse_double rejects malformed text") {
  CHECK(io::parse_double("  2.5\t") == 2.5);
  CHECK_THROWS_AS(io::parse_double("abc"), io::ParseError);
  CHECK_THROWS_AS(io::parse_double("1.2.3"), io::ParseError);
  CHECK_THROWS_AS(io::parse_double(""), io::ParseError);
  CHECK_THROWS_AS(io::parse_double("3 4"), io::ParseError);
}

TEST_CASE("parse_vector and parse_int_list") {
  const VectorXd v = io::parse_vector("1, 2.5 ,-3");
  REQUIRE(v.size() == 3);
  CHECK(v[0] == 1.0);
  CHECK(v[1] == 2.5);
  CHECK(v[2] == -3.0);
  CHECK_THROWS_AS(io::parse_vector("1,x,3"), io::ParseError);
  CHECK_THROWS_AS(io::parse_vector(""), io::ParseError);

  const std::vector<int> ints = io::parse_int_list("50, 200,800");
  CHECK(ints == std::vector<int>{50, 200, 800});
  CHECK_THROWS_AS(io::parse_int_list("1,2.5"), io::ParseError);
}

TEST_CASE("atomic_write_text") {
  TempDir dir;
  const fs::path target = dir.path / "out.txt";
  io::atomic_write_text(target, "first\n");
  CHECK(io::read_text(target) == "first\n");
  io::atomic_write_text(target, "second\n");
  CHECK(io::read_text(target) == "second\n");
  CHECK_FALSE(fs::exists(dir.path / "out.txt.tmp"));
  CHECK_THROWS_AS(io::read_text(dir.path / "missing.txt"), Error);
}

TEST_CASE("matrix csv round trip") {
  TempDir dir;
  MatrixXd m(2, 3);
  m << 1, 0.1, -3.5e-8, 2.0 / 3.0, 0, 1e16;
  const fs::path path = dir.path / "m.csv";
  io::atomic_write_text(path, io::matrix_csv(m));
  const MatrixXd back = io::read_matrix_csv(path);
  REQUIRE(back.rows() == 2);
  REQUIRE(back.cols() == 3);
  for (Eigen::Index r = 0; r < 2; ++r)
    for (Eigen::Index c = 0; c < 3; ++c) CHECK(same_bits(back(r, c), m(r, c)));

  io::atomic_write_text(path, "1,2\n3\n");
  CHECK_THROWS_AS(io::read_matrix_csv(path), io::ParseError);
  io::atomic_write_text(path, "\n  \n");
  CHECK_THROWS_AS(io::read_matrix_csv(path), io::ParseError);
  io::atomic_write_text(path, "1,oops\n");
  CHECK_THROWS_AS(io::read_matrix_csv(path), io::ParseError);
}

TEST_CASE("dataset csv round trip") {
  TempDir dir;
  MatrixXd x(3, 2);
  x << 0.25, -1, 2, 0.5, 1e-3, 4;
  const LabeledDataset data(x, {1, 2, 1});
  const fs::path path = dir.path / "d.csv";
  const std::string text = io::dataset_csv(data);
  CHECK(text.rfind("label,x1,x2\n", 0) == 0);
  io::atomic_write_text(path, text);
  const LabeledDataset back = io::read_dataset_csv(path);
  CHECK(back.labels == data.labels);
  REQUIRE(back.x.rows() == 3);
  REQUIRE(back.x.cols() == 2);
  for (Eigen::Index r = 0; r < 3; ++r)
    for (Eigen::Index c = 0; c < 2; ++c) CHECK(same_bits(back.x(r, c), x(r, c)));

  io::atomic_write_text(path, "lbl,x1\n1,2\n");
  CHECK_THROWS_AS(io::read_dataset_csv(path), io::ParseError);
  io::atomic_write_text(path, "label,a,b\n1,2,3\n");
  CHECK_THROWS_AS(io::read_dataset_csv(path), io::ParseError);
  io::atomic_write_text(path, "label,x1\n");
  CHECK_THROWS_AS(io::read_dataset_csv(path), io::ParseError);
  io::atomic_write_text(path, "label,x1\n1,2,3\n");
  CHECK_THROWS_AS(io::read_dataset_csv(path), io::ParseError);
  io::atomic_write_text(path, "label,x1\n1.5,2\n");
  CHECK_THROWS_AS(io::read_dataset_csv(path), io::ParseError);
  io::atomic_write_text(path, "label,x1\n3,2\n1,0\n1,1\n2,0\n2,1\n");
  CHECK_THROWS_AS(io::read_dataset_csv(path), Error);  // label outside {1, 2}
}

TEST_CASE("model json round trip") {
  TempDir dir;
  VectorXd mu1(2), mu2(2);
  mu1 << 0.3, -1.25;
  mu2 << -0.7, 2;
  MatrixXd sigma(2, 2);
  sigma << 1.5, 0.25, 0.25, 2;
  const GaussianPair model(mu1, mu2, sigma);
  const fs::path path = dir.path / "model.json";
  io::atomic_write_text(path, io::model_json(model));
  const GaussianPair back = io::read_model_json(path);
  CHECK(same_bits(back.mu1[0], mu1[0]));
  CHECK(same_bits(back.mu1[1], mu1[1]));
  CHECK(same_bits(back.mu2[0], mu2[0]));
  CHECK(same_bits(back.mu2[1], mu2[1]));
  CHECK((back.sigma - sigma).lpNorm<Eigen::Infinity>() == 0);

  io::atomic_write_text(path, "{ not json");
  CHECK_THROWS_AS(io::read_model_json(path), io::ParseError);
  io::atomic_write_text(path, "{\"mu1\": [1, 0], \"mu2\": [0, 1]}");
  CHECK_THROWS_AS(io::read_model_json(path), io::ParseError);
  io::atomic_write_text(path, "{\"mu1\": \"x\", \"mu2\": [0], \"sigma\": [[1]]}");
  CHECK_THROWS_AS(io::read_model_json(path), io::ParseError);
  io::atomic_write_text(path,
                        "{\"mu1\": [1, 0], \"mu2\": [0, 1], \"sigma\": [[1, 0], [0]]}");
  CHECK_THROWS_AS(io::read_model_json(path), io::ParseError);
}

TEST_CASE("report csv headers") {
  CHECK(io::labels_csv({1, 2, 2}) == "predicted\n1\n2\n2\n");

  std::vector<CeDraw> draws(1);
  draws[0] = CeDraw{1e-4, -2e-4, 1.26, 1.25, 1.251, true};
  const std::string dtext = io::draws_csv(draws);
  CHECK(dtext.rfind("a,b,lhs,rhs_exact,rhs_expansion,violated\n", 0) == 0);
  CHECK(dtext.find(",1\n") != std::string::npos);

  std::vector<RegretRecord> records(1);
  records[0] = RegretRecord{50, 3, 0.2, 0.15, 0.05, 1.5, false};
  const std::string rtext = io::records_csv(records);
  CHECK(rtext.rfind("n,replicate,w_hat_rate,oracle_rate,abs_regret,d_n,failed\n", 0) == 0);
  CHECK(rtext.find("50,3,0.2,0.15,0.05,1.5,0\n") != std::string::npos);

  std::vector<ConvergenceSummary> summaries(1);
  summaries[0] = ConvergenceSummary{50, 0.04, 0.09, 1.5, 0.1};
  const std::string stext = io::summary_csv(summaries);
  CHECK(stext.rfind("n,median_abs_regret,q90_abs_regret,d_n,fail_frac\n", 0) == 0);
  CHECK(stext.find("50,0.04,0.09,1.5,0.1\n") != std::string::npos);
}

TEST_CASE("loglog_plot emits a self-contained document") {
  svg::Series s1{"median <a&b>", {50, 200, 800}, {0.1, 0.05, 0.025}};
  svg::Series s2{"envelope", {50, 200, 800}, {0.5, 0.25, 0.125}};
  const std::string doc = svg::loglog_plot({s1, s2}, "n", "regret", "shrinking regret");
  CHECK(doc.rfind("<svg", 0) == 0);
  CHECK(doc.find("</svg>") != std::string::npos);
  CHECK(doc.find("median &lt;a&amp;b&gt;") != std::string::npos);
  CHECK(doc.find("envelope") != std::string::npos);
  CHECK(doc.find("shrinking regret") != std::string::npos);
  CHECK(doc.find("regret") != std::string::npos);

  // nonpositive coordinates are dropped rather than mapped to nan
  svg::Series bad{"mixed", {10, 100, 1000}, {0.5, 0.0, -1.0}};
  const std::string doc2 = svg::loglog_plot({bad}, "n", "y", "t");
  CHECK(doc2.find("nan") == std::string::npos);
  CHECK(doc2.find("inf") == std::string::npos);
  CHECK(doc2.rfind("<svg", 0) == 0);
}
