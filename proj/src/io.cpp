#include "road/io.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

namespace road::io {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string> nonempty_lines(const std::string& text) {
  std::vector<std::string> out;
  for (const auto& raw : split(text, '\n')) {
    const std::string line = trim(raw);
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

int parse_int(const std::string& text) {
  const std::string t = trim(text);
  int value = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw ParseError("not an integer: '" + text + "'");
  return value;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  const std::string t = trim(text);
  double value = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw ParseError("not a number: '" + text + "'");
  return value;
}

VectorXd parse_vector(const std::string& text) {
  const auto parts = split(text, ',');
  VectorXd v(Eigen::Index(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) v[Eigen::Index(i)] = parse_double(parts[i]);
  return v;
}

std::vector<int> parse_int_list(const std::string& text) {
  const auto parts = split(text, ',');
  std::vector<int> out;
  out.reserve(parts.size());
  for (const auto& part : parts) out.push_back(parse_int(part));
  return out;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file for reading: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error("read failed: " + path.string());
  return buf.str();
}

void atomic_write_text(const std::filesystem::path& path, const std::string& text) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open file for writing: " + tmp.string());
    out << text;
    out.flush();
    if (!out.good()) throw Error("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error("cannot move temporary file over " + path.string());
  }
}

MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  const auto lines = nonempty_lines(read_text(path));
  if (lines.empty()) throw ParseError("matrix file is empty: " + path.string());
  const auto first = split(lines[0], ',');
  MatrixXd m(Eigen::Index(lines.size()), Eigen::Index(first.size()));
  for (std::size_t r = 0; r < lines.size(); ++r) {
    const auto cells = split(lines[r], ',');
    if (cells.size() != first.size())
      throw ParseError("matrix rows have inconsistent lengths: " + path.string());
    for (std::size_t c = 0; c < cells.size(); ++c)
      m(Eigen::Index(r), Eigen::Index(c)) = parse_double(cells[c]);
  }
  return m;
}

std::string matrix_csv(const MatrixXd& m) {
  std::string out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c > 0) out += ',';
      out += format_double(m(r, c));
    }
    out += '\n';
  }
  return out;
}

LabeledDataset read_dataset_csv(const std::filesystem::path& path) {
  const auto lines = nonempty_lines(read_text(path));
  if (lines.size() < 2) throw ParseError("dataset file has no observations: " + path.string());
  const auto header = split(lines[0], ',');
  if (header.size() < 2 || trim(header[0]) != "label")
    throw ParseError("dataset header must be label,x1,...,xp: " + path.string());
  const std::size_t p = header.size() - 1;
  for (std::size_t i = 1; i < header.size(); ++i)
    if (trim(header[i]) != "x" + std::to_string(i))
      throw ParseError("dataset header must be label,x1,...,xp: " + path.string());

  MatrixXd x(Eigen::Index(lines.size() - 1), Eigen::Index(p));
  std::vector<int> labels;
  labels.reserve(lines.size() - 1);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = split(lines[r], ',');
    if (cells.size() != header.size())
      throw ParseError("dataset row has the wrong number of columns: " + path.string());
    labels.push_back(parse_int(cells[0]));
    for (std::size_t c = 1; c < cells.size(); ++c)
      x(Eigen::Index(r - 1), Eigen::Index(c - 1)) = parse_double(cells[c]);
  }
  return LabeledDataset(std::move(x), std::move(labels));
}

std::string dataset_csv(const LabeledDataset& data) {
  std::string out = "label";
  for (Eigen::Index c = 0; c < data.dim(); ++c) out += ",x" + std::to_string(c + 1);
  out += '\n';
  for (Eigen::Index r = 0; r < data.n(); ++r) {
    out += std::to_string(data.labels[std::size_t(r)]);
    for (Eigen::Index c = 0; c < data.dim(); ++c) out += ',' + format_double(data.x(r, c));
    out += '\n';
  }
  return out;
}

GaussianPair read_model_json(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("model file is not valid JSON: " + path.string() + ": " + e.what());
  }
  try {
    const auto mu1v = j.at("mu1").get<std::vector<double>>();
    const auto mu2v = j.at("mu2").get<std::vector<double>>();
    const auto rows = j.at("sigma").get<std::vector<std::vector<double>>>();
    VectorXd mu1 = Eigen::Map<const VectorXd>(mu1v.data(), Eigen::Index(mu1v.size()));
    VectorXd mu2 = Eigen::Map<const VectorXd>(mu2v.data(), Eigen::Index(mu2v.size()));
    MatrixXd sigma(Eigen::Index(rows.size()), rows.empty() ? 0 : Eigen::Index(rows[0].size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != rows[0].size())
        throw ParseError("model sigma rows have inconsistent lengths: " + path.string());
      for (std::size_t c = 0; c < rows[r].size(); ++c)
        sigma(Eigen::Index(r), Eigen::Index(c)) = rows[r][c];
    }
    return GaussianPair(std::move(mu1), std::move(mu2), std::move(sigma));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("model file needs numeric mu1, mu2 and sigma: " + path.string() + ": " +
                     e.what());
  }
}

std::string model_json(const GaussianPair& model) {
  nlohmann::json j;
  j["mu1"] = std::vector<double>(model.mu1.data(), model.mu1.data() + model.mu1.size());
  j["mu2"] = std::vector<double>(model.mu2.data(), model.mu2.data() + model.mu2.size());
  std::vector<std::vector<double>> rows;
  rows.reserve(std::size_t(model.sigma.rows()));
  for (Eigen::Index r = 0; r < model.sigma.rows(); ++r) {
    rows.emplace_back(model.sigma.row(r).begin(), model.sigma.row(r).end());
  }
  j["sigma"] = rows;
  return j.dump(2) + "\n";
}

std::string labels_csv(const std::vector<int>& labels) {
  std::string out = "predicted\n";
  for (int l : labels) out += std::to_string(l) + "\n";
  return out;
}

std::string draws_csv(const std::vector<CeDraw>& draws) {
  std::string out = "a,b,lhs,rhs_exact,rhs_expansion,violated\n";
  for (const auto& d : draws) {
    out += format_double(d.a) + ',' + format_double(d.b) + ',' + format_double(d.lhs) + ',' +
           format_double(d.rhs_exact) + ',' + format_double(d.rhs_expansion) + ',' +
           (d.violated ? "1" : "0") + '\n';
  }
  return out;
}

std::string records_csv(const std::vector<RegretRecord>& records) {
  std::string out = "n,replicate,w_hat_rate,oracle_rate,abs_regret,d_n,failed\n";
  for (const auto& r : records) {
    out += std::to_string(r.n) + ',' + std::to_string(r.replicate) + ',' +
           format_double(r.w_hat_rate) + ',' + format_double(r.oracle_rate) + ',' +
           format_double(r.abs_regret) + ',' + format_double(r.d_n) + ',' +
           (r.failed ? "1" : "0") + '\n';
  }
  return out;
}

std::string summary_csv(const std::vector<ConvergenceSummary>& summaries) {
  std::string out = "n,median_abs_regret,q90_abs_regret,d_n,fail_frac\n";
  for (const auto& s : summaries) {
    out += std::to_string(s.n) + ',' + format_double(s.median_abs_regret) + ',' +
           format_double(s.q90_abs_regret) + ',' + format_double(s.d_n) + ',' +
           format_double(s.fail_frac) + '\n';
  }
  return out;
}

}  // namespace road::io
