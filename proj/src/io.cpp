#include "covtest/io.hpp"

#include "covtest/error.hpp"

#include <json.hpp>

#include <Eigen/Core>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <vector>

namespace covtest {

namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

[[noreturn]] void parse_failure(std::string_view source, std::size_t line, std::size_t column,
                                const std::string& what) {
  std::ostringstream msg;
  msg << source << ":" << line;
  if (column > 0) msg << ":" << column;
  msg << ": " << what;
  throw Error(ErrorKind::parse, msg.str());
}

double parse_field(std::string_view field, std::string_view source, std::size_t line,
                   std::size_t column) {
  std::string_view body = trim(field);
  if (!body.empty() && body.front() == '+') body.remove_prefix(1);
  double value = 0.0;
  const char* first = body.data();
  const char* last = body.data() + body.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (body.empty() || ec != std::errc() || ptr != last) {
    parse_failure(source, line, column, "not a number: '" + std::string(trim(field)) + "'");
  }
  if (!std::isfinite(value)) {
    parse_failure(source, line, column, "non-finite value '" + std::string(trim(field)) + "'");
  }
  return value;
}

json versions_json() {
  return json{{"covtest", std::string(kVersion)},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                            std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)}};
}

std::string decision_line(bool reject) { return reject ? "REJECT H0" : "FAIL TO REJECT H0"; }

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

SampleMatrix parse_matrix(std::string_view text, char delimiter, bool has_header,
                          std::string_view source) {
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  bool header_pending = has_header;

  while (!text.empty()) {
    const std::size_t eol = text.find('\n');
    const std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (trim(line).empty()) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }

    std::size_t column = 0;
    std::string_view rest = line;
    while (true) {
      const std::size_t cut = rest.find(delimiter);
      ++column;
      values.push_back(parse_field(rest.substr(0, cut), source, line_no, column));
      if (cut == std::string_view::npos) break;
      rest = rest.substr(cut + 1);
    }
    if (rows == 0) {
      cols = column;
    } else if (column != cols) {
      parse_failure(source, line_no, 0,
                    "ragged row: " + std::to_string(column) + " fields, expected " +
                        std::to_string(cols));
    }
    ++rows;
  }
  if (rows == 0) {
    throw Error(ErrorKind::empty_input, std::string(source) + ": no data rows");
  }
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * cols + j];
  return SampleMatrix(std::move(m));
}

SampleMatrix read_matrix(const DatasetFile& file) {
  std::ifstream in(file.path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + file.path + "'");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorKind::io, "error while reading '" + file.path + "'");
  return parse_matrix(text, file.delimiter, file.has_header, file.path);
}

void write_matrix(std::ostream& out, const Matrix& m, char delimiter) {
  char buf[64];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << delimiter;
      const auto [ptr, ec] =
          std::to_chars(buf, buf + sizeof buf, m(i, j), std::chars_format::general, 17);
      out.write(buf, ptr - buf);
    }
    out << '\n';
  }
}

OutputFormat parse_output_format(std::string_view text) {
  if (text == "json") return OutputFormat::json;
  if (text == "text") return OutputFormat::text;
  if (text == "csv") return OutputFormat::csv;
  throw Error(ErrorKind::config,
              "unknown output format '" + std::string(text) + "' (expected json, text or csv)");
}

std::string write_outcome(const TestOutcome& o, OutputFormat format) {
  const std::string t2_key = o.eigen.t2 ? "t2" : "t2m";
  const double t2_value = o.eigen.statistic();

  switch (format) {
    case OutputFormat::json: {
      json j;
      j["t1"] = o.frob.t1;
      j["p1"] = o.frob.p1;
      j[t2_key] = t2_value;
      j["p2"] = o.eigen.p2;
      j["t_fc"] = o.t_fc;
      j["q"] = o.q;
      j["alpha"] = o.alpha;
      j["m"] = o.m;
      j["reject"] = o.reject;
      j["diagnostics"] = o.diagnostics;
      j["versions"] = versions_json();
      j["seed"] = o.seed;
      j["frobenius"] = {{"b1", o.frob.b1},
                        {"b2", o.frob.b2},
                        {"c", o.frob.c},
                        {"sigma1_hat", o.frob.sigma1_hat}};
      j["monte_carlo"] = {{"draws", o.eigen.mc_draws},
                          {"seed", o.eigen.mc_seed},
                          {"stream", o.eigen.mc_stream}};
      return j.dump(2) + "\n";
    }
    case OutputFormat::text: {
      std::ostringstream out;
      out << "two-sample covariance test (m = " << o.m << ", alpha = " << format_double(o.alpha)
          << ")\n";
      out << "  frobenius detector: T1 = " << format_double(o.frob.t1)
          << ", p1 = " << format_double(o.frob.p1) << "\n";
      out << "  spike detector:     " << (o.eigen.t2 ? "T2" : "T2m") << " = "
          << format_double(t2_value) << ", p2 = " << format_double(o.eigen.p2) << "\n";
      out << "  combined:           T_FC = " << format_double(o.t_fc)
          << ", q = " << format_double(o.q) << "\n";
      out << "  seed: " << o.seed << "\n";
      for (const auto& d : o.diagnostics) out << "  diagnostic: " << d << "\n";
      out << decision_line(o.reject) << "\n";
      return out.str();
    }
    case OutputFormat::csv: {
      std::ostringstream out;
      out << "t1,p1," << t2_key << ",p2,t_fc,q,alpha,m,reject,seed\n";
      out << format_double(o.frob.t1) << ',' << format_double(o.frob.p1) << ','
          << format_double(t2_value) << ',' << format_double(o.eigen.p2) << ','
          << format_double(o.t_fc) << ',' << format_double(o.q) << ','
          << format_double(o.alpha) << ',' << o.m << ',' << (o.reject ? "true" : "false")
          << ',' << o.seed << "\n";
      return out.str();
    }
  }
  return {};
}

TestOutcome parse_outcome_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("outcome json: ") + e.what());
  }
  try {
    TestOutcome o;
    o.frob.t1 = j.at("t1").get<double>();
    o.frob.p1 = j.at("p1").get<double>();
    if (j.contains("t2")) {
      o.eigen.t2 = j.at("t2").get<double>();
    } else {
      o.eigen.t2m = j.at("t2m").get<double>();
    }
    o.eigen.p2 = j.at("p2").get<double>();
    o.t_fc = j.at("t_fc").get<double>();
    o.q = j.at("q").get<double>();
    o.alpha = j.at("alpha").get<double>();
    o.m = j.at("m").get<std::size_t>();
    o.eigen.m = o.m;
    o.reject = j.at("reject").get<bool>();
    o.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
    o.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("frobenius")) {
      const json& f = j.at("frobenius");
      o.frob.b1 = f.at("b1").get<double>();
      o.frob.b2 = f.at("b2").get<double>();
      o.frob.c = f.at("c").get<double>();
      o.frob.sigma1_hat = f.at("sigma1_hat").get<double>();
    }
    if (j.contains("monte_carlo")) {
      const json& mc = j.at("monte_carlo");
      o.eigen.mc_draws = mc.at("draws").get<std::size_t>();
      o.eigen.mc_seed = mc.at("seed").get<std::uint64_t>();
      o.eigen.mc_stream = mc.at("stream").get<std::uint64_t>();
    }
    return o;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("outcome json: ") + e.what());
  }
}

}  // namespace covtest
