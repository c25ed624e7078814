#include "distfuse/io.hpp"

#include <nlohmann/json.hpp>

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

namespace distfuse::io {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& name, const std::string& what) {
  throw Error(name + ": " + what);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

double parse_double(const std::string& s, const std::string& name, std::size_t row) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(name, "row " + std::to_string(row) + ": '" + s + "' is not a number");
  }
}

std::int64_t parse_int(const std::string& s, const std::string& name, std::size_t row) {
  try {
    std::size_t used = 0;
    const std::int64_t v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(name, "row " + std::to_string(row) + ": '" + s + "' is not an integer");
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open '" + tmp.string() + "' for writing");
    os << text;
    if (!os.flush()) throw Error("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw Error("cannot rename '" + tmp.string() + "' to '" + path.string() +
                "': " + ec.message());
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

std::string file_digest(const std::filesystem::path& path) {
  const std::string bytes = read_text(path);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string distribution_csv(const Distribution& dist) {
  std::ostringstream os;
  os << "cell_index,bitmask,prob\n";
  for (Eigen::Index i = 0; i < dist.size(); ++i) {
    os << i << ',' << dist.space().bitmask_string(static_cast<int>(i)) << ','
       << format_double(dist[i]) << '\n';
  }
  return os.str();
}

Distribution parse_distribution_csv(const std::string& text, const std::string& name) {
  const auto rows = lines_of(text);
  if (rows.empty() || rows[0] != "cell_index,bitmask,prob") {
    fail(name, "expected header 'cell_index,bitmask,prob'");
  }
  const std::size_t k = rows.size() - 1;
  if (k < 2 || (k & (k - 1)) != 0) {
    fail(name, "cell count " + std::to_string(k) + " is not a power of two >= 2");
  }
  int j = 0;
  while ((std::size_t{1} << j) < k) ++j;
  const OutcomeSpace space(j);
  Eigen::ArrayXd p(static_cast<Eigen::Index>(k));
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto cols = split(rows[r], ',');
    if (cols.size() != 3) fail(name, "row " + std::to_string(r) + ": expected 3 columns");
    const std::int64_t idx = parse_int(cols[0], name, r);
    if (idx != static_cast<std::int64_t>(r - 1)) {
      fail(name, "row " + std::to_string(r) + ": cell_index " + cols[0] +
                     " out of order (expected " + std::to_string(r - 1) + ")");
    }
    if (cols[1] != space.bitmask_string(static_cast<int>(idx))) {
      fail(name, "row " + std::to_string(r) + ": bitmask '" + cols[1] +
                     "' does not encode cell " + cols[0]);
    }
    p[static_cast<Eigen::Index>(idx)] = parse_double(cols[2], name, r);
  }
  try {
    return Distribution(space, std::move(p));
  } catch (const Error& e) {
    fail(name, e.what());
  }
}

Distribution read_distribution_csv(const std::filesystem::path& path) {
  return parse_distribution_csv(read_text(path), path.string());
}

std::string counts_csv(const EmpiricalCounts& counts) {
  std::ostringstream os;
  os << "cell_index,count\n";
  for (std::size_t i = 0; i < counts.counts.size(); ++i) {
    os << i << ',' << counts.counts[i] << '\n';
  }
  return os.str();
}

EmpiricalCounts parse_counts_csv(const std::string& text, const std::string& name,
                                 std::optional<std::int64_t> declared_n) {
  const auto rows = lines_of(text);
  if (rows.empty() || rows[0] != "cell_index,count") {
    fail(name, "expected header 'cell_index,count'");
  }
  const std::size_t k = rows.size() - 1;
  if (k < 2 || (k & (k - 1)) != 0) {
    fail(name, "cell count " + std::to_string(k) + " is not a power of two >= 2");
  }
  int j = 0;
  while ((std::size_t{1} << j) < k) ++j;
  std::vector<std::int64_t> counts(k, 0);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto cols = split(rows[r], ',');
    if (cols.size() != 2) fail(name, "row " + std::to_string(r) + ": expected 2 columns");
    const std::int64_t idx = parse_int(cols[0], name, r);
    if (idx != static_cast<std::int64_t>(r - 1)) {
      fail(name, "row " + std::to_string(r) + ": cell_index out of order");
    }
    counts[static_cast<std::size_t>(idx)] = parse_int(cols[1], name, r);
  }
  try {
    if (declared_n) return EmpiricalCounts(OutcomeSpace(j), std::move(counts), *declared_n);
    return EmpiricalCounts(OutcomeSpace(j), std::move(counts));
  } catch (const Error& e) {
    fail(name, e.what());
  }
}

EmpiricalCounts read_counts_csv(const std::filesystem::path& path,
                                std::optional<std::int64_t> declared_n) {
  return parse_counts_csv(read_text(path), path.string(), declared_n);
}

std::pair<OutcomeSpace, ConstraintSet> parse_constraints_json(const std::string& text,
                                                              const std::string& name) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(name, e.what());
  }
  if (!doc.is_object() || !doc.contains("symptoms") || !doc["symptoms"].is_array()) {
    fail(name, "expected an object with a 'symptoms' array");
  }
  std::vector<std::string> labels;
  for (const auto& s : doc["symptoms"]) {
    if (!s.is_string()) fail(name, "'symptoms' entries must be strings");
    labels.push_back(s.get<std::string>());
  }
  OutcomeSpace space;
  try {
    space = OutcomeSpace(static_cast<int>(labels.size()), labels);
  } catch (const Error& e) {
    fail(name, e.what());
  }
  ConstraintSet cs;
  if (doc.contains("marginals")) {
    if (!doc["marginals"].is_array()) fail(name, "'marginals' must be an array");
    for (const auto& m : doc["marginals"]) {
      if (!m.is_object() || !m.contains("index") || !m.contains("lo") || !m.contains("hi")) {
        fail(name, "each marginal needs 'index', 'lo' and 'hi'");
      }
      cs.marginal_bounds.push_back(
          {m["index"].get<int>(), m["lo"].get<double>(), m["hi"].get<double>()});
    }
  }
  if (doc.contains("forbidden_cells")) {
    if (!doc["forbidden_cells"].is_array()) fail(name, "'forbidden_cells' must be an array");
    for (const auto& c : doc["forbidden_cells"]) cs.forbidden_cells.push_back(c.get<int>());
  }
  if (doc.contains("min_present") && !doc["min_present"].is_null()) {
    cs.min_present = doc["min_present"].get<int>();
  }
  try {
    cs.validate(space);
  } catch (const Error& e) {
    fail(name, e.what());
  }
  return {space, cs};
}

std::pair<OutcomeSpace, ConstraintSet> read_constraints_json(
    const std::filesystem::path& path) {
  return parse_constraints_json(read_text(path), path.string());
}

nlohmann::json fusion_report_json(const FusionReport& report, std::int64_t n) {
  json j;
  j["schema"] = 1;
  j["method"] = report.method == FusionMethod::kl ? "kl" : "l1";
  j["n"] = n;
  j["estimate"] = std::vector<double>(
      report.estimate.probs().data(),
      report.estimate.probs().data() + report.estimate.size());
  j["epsilon"] = report.epsilon;
  j["mix_weight"] = report.mix_weight;
  if (!report.lambda_tilde) {
    j["lambda_tilde"] = nullptr;
  } else if (std::isinf(*report.lambda_tilde)) {
    j["lambda_tilde"] = "infinity";
  } else {
    j["lambda_tilde"] = *report.lambda_tilde;
  }
  j["achieved_constraint"] = report.achieved_constraint;
  j["expert_feasible"] = report.expert_feasible;
  return j;
}

nlohmann::json maxent_report_json(const MaxentSolution& solution) {
  json j;
  j["schema"] = 1;
  j["entropy"] = solution.entropy;
  j["iterations"] = solution.iterations;
  j["converged"] = solution.converged;
  j["max_constraint_residual"] = solution.max_constraint_residual;
  j["feasible"] = true;
  return j;
}

nlohmann::json coverage_report_json(const CoverageReport& report) {
  json j;
  j["schema"] = 1;
  j["replications"] = report.replications;
  j["epsilon"] = report.epsilon;
  j["delta"] = report.delta;
  j["theorem"] = report.theorem;
  j["event_failures"] = report.event_failures;
  j["event_failure_rate"] = report.event_failure_rate;
  j["binomial_slack"] = report.binomial_slack;
  j["theorem_checks"] = report.theorem_checks;
  j["theorem_violations"] = report.theorem_violations;
  if (report.theorem == "theorem2") {
    j["expert_bound_violations"] = report.expert_bound_violations;
  }
  return j;
}

}  // namespace distfuse::io
