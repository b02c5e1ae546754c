#include "covfit/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace covfit {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv_mix(std::uint64_t& h, const std::string& s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= kFnvPrime;
  }
  h ^= 0xFF;
  h *= kFnvPrime;  // field separator
}

std::string fmt12(double v) {
  if (std::isnan(v)) return "null";
  if (std::isinf(v)) return v > 0 ? "1e9999" : "-1e9999";  // never expected; keep JSON parseable
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\t':
        out += "\\t";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string quoted(const std::string& s) { return "\"" + json_escape(s) + "\""; }

std::string matrix_json(const Eigen::MatrixXd& m) {
  std::ostringstream out;
  out << "[";
  for (int i = 0; i < m.rows(); ++i) {
    if (i) out << ",";
    out << "[";
    for (int j = 0; j < m.cols(); ++j) {
      if (j) out << ",";
      out << fmt12(m(i, j));
    }
    out << "]";
  }
  out << "]";
  return out.str();
}

std::string vector_json(const Eigen::VectorXd& v) {
  std::ostringstream out;
  out << "[";
  for (int i = 0; i < v.size(); ++i) {
    if (i) out << ",";
    out << fmt12(v(i));
  }
  out << "]";
  return out.str();
}

std::string labels_json(const std::vector<std::string>& labels) {
  std::ostringstream out;
  out << "[";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) out << ",";
    out << quoted(labels[i]);
  }
  out << "]";
  return out.str();
}

std::string hex64(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::uint64_t digest_graph(const BidirectedGraph& g) {
  std::uint64_t h = kFnvOffset;
  for (const auto& label : g.labels()) fnv_mix(h, label);
  for (const auto& [i, j] : g.edges()) {
    fnv_mix(h, std::to_string(i) + "<->" + std::to_string(j));
  }
  return h;
}

std::uint64_t digest_summary(const SampleSummary& summary) {
  std::uint64_t h = kFnvOffset;
  fnv_mix(h, std::to_string(summary.n));
  fnv_mix(h, summary.centered ? "centered" : "mean-estimated");
  for (const auto& label : summary.cov.labels()) fnv_mix(h, label);
  char buf[40];
  const Eigen::MatrixXd& m = summary.cov.entries();
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = i; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      fnv_mix(h, buf);
    }
  }
  return h;
}

std::string to_json(const FitReport& r) {
  std::ostringstream out;
  out << "{";
  out << "\"tool\":\"covfit\"";
  out << ",\"algorithm\":" << quoted(r.algorithm);
  out << ",\"status\":" << quoted(r.status);
  out << ",\"converged\":" << (r.converged ? "true" : "false");
  out << ",\"iterations\":" << r.iterations;
  out << ",\"log_likelihood\":" << fmt12(r.loglik);
  out << ",\"residual\":" << fmt12(r.residual);
  out << ",\"n\":" << r.n;
  out << ",\"p\":" << r.p;
  out << ",\"labels\":" << labels_json(r.labels);
  out << ",\"sigma\":" << matrix_json(r.sigma);
  out << ",\"correlations\":" << matrix_json(r.correlations);
  out << ",\"sd\":" << vector_json(r.sds);
  out << ",\"graph_digest\":" << quoted(hex64(r.graph_digest));
  out << ",\"data_digest\":" << quoted(hex64(r.data_digest));
  out << "}";
  return out.str();
}

std::string to_json(const BenchRecord& r) {
  std::ostringstream out;
  out << "{";
  out << "\"seed\":" << r.seed;
  out << ",\"p\":" << r.p;
  out << ",\"edges\":" << r.edge_count;
  out << ",\"edge_prob\":" << fmt12(r.edge_prob);
  out << ",\"n\":" << r.n;
  out << ",\"icf\":{\"status\":" << quoted(r.icf_status) << ",\"loglik\":" << fmt12(r.icf_loglik)
      << ",\"sweeps\":" << r.icf_sweeps << ",\"residual\":" << fmt12(r.icf_residual) << "}";
  out << ",\"anderson\":{\"status\":" << quoted(r.anderson_status) << ",\"loglik\":"
      << (r.anderson_loglik ? fmt12(*r.anderson_loglik) : "null")
      << ",\"iterations\":" << r.anderson_iterations << "}";
  out << ",\"agree\":";
  if (r.agree.has_value()) {
    out << (*r.agree ? "true" : "false");
  } else {
    out << "null";
  }
  out << "}";
  return out.str();
}

std::string to_json(const BenchSummary& s) {
  std::ostringstream out;
  out << "{\"summary\":true";
  out << ",\"instances\":" << s.instances;
  out << ",\"icf_converged\":" << s.icf_converged;
  out << ",\"both_converged\":" << s.both_converged;
  out << ",\"agreements\":" << s.agreements;
  out << ",\"agreement_rate\":"
      << fmt12(s.both_converged > 0 ? static_cast<double>(s.agreements) / s.both_converged : 1.0);
  out << ",\"anderson_failures\":{\"non_pd_iterate\":" << s.anderson_non_pd
      << ",\"max_iters_reached\":" << s.anderson_max_iters
      << ",\"singular_system\":" << s.anderson_singular << "}";
  out << "}";
  return out.str();
}

std::string to_human_table(const FitReport& r) {
  std::ostringstream out;
  out << "algorithm: " << r.algorithm << "\n";
  out << "status: " << r.status << " (" << r.iterations
      << (r.algorithm == "icf" ? " sweeps" : " iterations") << ")\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", r.loglik);
  out << "log-likelihood: " << buf << "\n";
  std::snprintf(buf, sizeof(buf), "%.3e", r.residual);
  out << "residual: " << buf << "\n";
  std::snprintf(buf, sizeof(buf), "%.3f", r.wall_time_ms);
  out << "wall-time-ms: " << buf << "\n";
  out << "\nmarginal correlations (lower triangle) and standard deviations\n";

  int width = 9;
  for (const auto& label : r.labels) {
    width = std::max(width, static_cast<int>(label.size()) + 2);
  }
  auto cell = [&](const std::string& s) {
    out << std::string(width > static_cast<int>(s.size()) ? width - s.size() : 1, ' ') << s;
  };
  cell("");
  for (const auto& label : r.labels) cell(label);
  out << "\n";
  for (int i = 0; i < r.p; ++i) {
    cell(r.labels[i]);
    for (int j = 0; j < i; ++j) {
      std::snprintf(buf, sizeof(buf), "%.4f", r.correlations(i, j));
      cell(buf);
    }
    cell(".");
    out << "\n";
  }
  cell("SD");
  for (int i = 0; i < r.p; ++i) {
    std::snprintf(buf, sizeof(buf), "%.4f", r.sds(i));
    cell(buf);
  }
  out << "\n";
  return out.str();
}

}  // namespace covfit
