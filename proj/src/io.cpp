#include "covfit/io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "covfit/errors.hpp"

namespace covfit {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& tok, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError(where + ": expected a number, got '" + tok + "'");
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot open '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> content_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

GraphFile parse_graph_text(const std::string& text, const std::string& name) {
  GraphFile gf;
  std::vector<std::string> seen_order;
  auto declare = [&](const std::string& label) {
    if (std::find(gf.vertices.begin(), gf.vertices.end(), label) == gf.vertices.end()) {
      gf.vertices.push_back(label);
    }
  };
  int lineno = 0;
  for (const std::string& raw : content_lines(text)) {
    ++lineno;
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const std::string where = name + ":" + std::to_string(lineno);
    const std::vector<std::string> tok = split_ws(line);
    if (tok[0] == "vertex" || tok[0] == "latent") {
      if (tok.size() != 2) {
        throw ParseError(where + ": expected '" + tok[0] + " <label>'");
      }
      declare(tok[1]);
      if (tok[0] == "latent") gf.latents.push_back(tok[1]);
    } else if (tok.size() == 3 && tok[1] == "<->") {
      declare(tok[0]);
      declare(tok[2]);
      gf.bidirected_edges.emplace_back(tok[0], tok[2]);
    } else if (tok.size() == 3 && tok[1] == "->") {
      declare(tok[0]);
      declare(tok[2]);
      gf.directed_edges.emplace_back(tok[0], tok[2]);
    } else {
      throw ParseError(where + ": cannot parse '" + line + "'");
    }
  }
  return gf;
}

GraphFile parse_graph_file(const std::string& path) {
  return parse_graph_text(read_file(path), path);
}

BidirectedGraph GraphFile::to_bidirected() const {
  if (has_directed_content()) {
    throw ParseError("file mixes bi-directed and directed declarations; expected a pure "
                     "bi-directed graph");
  }
  return BidirectedGraph(vertices, bidirected_edges);
}

Dag GraphFile::to_dag() const {
  if (has_bidirected_content()) {
    throw ParseError("file mixes directed and bi-directed declarations; expected a DAG");
  }
  return Dag(vertices, directed_edges, latents);
}

std::string to_graph_text(const BidirectedGraph& g) {
  std::ostringstream out;
  for (const auto& label : g.labels()) {
    out << "vertex " << label << "\n";
  }
  for (const auto& [i, j] : g.edges()) {
    out << g.label(i) << " <-> " << g.label(j) << "\n";
  }
  return out.str();
}

CovarianceMatrix read_covariance_csv(const std::string& path) {
  std::vector<std::string> rows;
  for (const std::string& raw : content_lines(read_file(path))) {
    if (!trim(raw).empty()) rows.push_back(raw);
  }
  if (rows.empty()) {
    throw ParseError(path + ": empty covariance file");
  }
  const std::vector<std::string> labels = split_csv(rows[0]);
  const int p = static_cast<int>(labels.size());
  if (static_cast<int>(rows.size()) != p + 1) {
    throw ParseError(path + ": expected " + std::to_string(p) + " matrix rows after the header, got " +
                     std::to_string(rows.size() - 1));
  }
  Eigen::MatrixXd m(p, p);
  for (int i = 0; i < p; ++i) {
    const std::vector<std::string> fields = split_csv(rows[i + 1]);
    if (static_cast<int>(fields.size()) != p) {
      throw ParseError(path + ": row " + std::to_string(i + 2) + " has " +
                       std::to_string(fields.size()) + " fields, expected " + std::to_string(p));
    }
    for (int j = 0; j < p; ++j) {
      m(i, j) = parse_number(fields[j], path + ":" + std::to_string(i + 2));
    }
  }
  return CovarianceMatrix(labels, std::move(m));
}

CovarianceMatrix read_correlation_table(const std::string& path) {
  std::vector<std::string> rows;
  for (const std::string& raw : content_lines(read_file(path))) {
    if (!trim(raw).empty()) rows.push_back(raw);
  }
  if (rows.size() < 2) {
    throw ParseError(path + ": expected correlation rows followed by an SD row");
  }
  std::vector<std::string> labels;
  std::vector<std::vector<double>> lower;
  std::vector<double> sds;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::vector<std::string> fields = split_csv(rows[r]);
    const std::string where = path + ":" + std::to_string(r + 1);
    if (fields.empty() || fields[0].empty()) {
      throw ParseError(where + ": missing row label");
    }
    if (fields[0] == "SD") {
      if (r + 1 != rows.size()) {
        throw ParseError(where + ": the SD row must be the last row");
      }
      for (std::size_t c = 1; c < fields.size(); ++c) {
        sds.push_back(parse_number(fields[c], where));
      }
      if (sds.size() != labels.size()) {
        throw ParseError(where + ": SD row holds " + std::to_string(sds.size()) +
                         " values for " + std::to_string(labels.size()) + " variables");
      }
      return from_correlation_table(lower, sds, labels);
    }
    if (fields.size() != r + 1) {
      throw ParseError(where + ": row '" + fields[0] + "' must hold " + std::to_string(r) +
                       " correlations, got " + std::to_string(fields.size() - 1));
    }
    labels.push_back(fields[0]);
    std::vector<double> vals;
    for (std::size_t c = 1; c < fields.size(); ++c) {
      vals.push_back(parse_number(fields[c], where));
    }
    lower.push_back(std::move(vals));
  }
  throw ParseError(path + ": missing SD row");
}

SampleSummary read_data_csv(const std::string& path, bool centered, bool transpose) {
  std::vector<std::string> rows;
  for (const std::string& raw : content_lines(read_file(path))) {
    if (!trim(raw).empty()) rows.push_back(raw);
  }
  if (rows.empty()) {
    throw ParseError(path + ": empty data file");
  }
  std::vector<std::string> labels;
  Eigen::MatrixXd data;
  if (!transpose) {
    const int p = static_cast<int>(rows.size());
    int n = -1;
    for (int i = 0; i < p; ++i) {
      const std::vector<std::string> fields = split_csv(rows[i]);
      if (fields.size() < 2 || fields[0].empty()) {
        throw ParseError(path + ":" + std::to_string(i + 1) +
                         ": expected 'label, v1, v2, ...'");
      }
      if (n < 0) {
        n = static_cast<int>(fields.size()) - 1;
        data.resize(p, n);
      } else if (static_cast<int>(fields.size()) - 1 != n) {
        throw ParseError(path + ":" + std::to_string(i + 1) + ": row has " +
                         std::to_string(fields.size() - 1) + " values, expected " +
                         std::to_string(n));
      }
      labels.push_back(fields[0]);
      for (int k = 0; k < n; ++k) {
        data(i, k) = parse_number(fields[k + 1], path + ":" + std::to_string(i + 1));
      }
    }
  } else {
    labels = split_csv(rows[0]);
    const int p = static_cast<int>(labels.size());
    const int n = static_cast<int>(rows.size()) - 1;
    if (n < 1) {
      throw ParseError(path + ": no subject rows after the header");
    }
    data.resize(p, n);
    for (int k = 0; k < n; ++k) {
      const std::vector<std::string> fields = split_csv(rows[k + 1]);
      if (static_cast<int>(fields.size()) != p) {
        throw ParseError(path + ":" + std::to_string(k + 2) + ": row has " +
                         std::to_string(fields.size()) + " values, expected " +
                         std::to_string(p));
      }
      for (int i = 0; i < p; ++i) {
        data(i, k) = parse_number(fields[i], path + ":" + std::to_string(k + 2));
      }
    }
  }
  return empirical_covariance(data, std::move(labels), centered);
}

}  // namespace covfit
