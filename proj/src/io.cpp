#include "shubin/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include <unistd.h>

#include "shubin/errors.hpp"

namespace shubin {

namespace {

double parse_double(const std::string& field, const char* what) {
  double v = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  while (begin < end && *begin == ' ') ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\r')) --end;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) {
    throw InvalidInput(std::string("cannot parse ") + what + " value '" + field + "'");
  }
  return v;
}

MultiIndex multi_index_from_json(const json& j, std::size_t dim, const char* field) {
  if (!j.is_array() || j.size() != dim) {
    throw InvalidInput(std::string("operator term field '") + field + "' must be an array of " +
                       std::to_string(dim) + " nonnegative integers");
  }
  MultiIndex m(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    if (!j[i].is_number_integer() || j[i].get<long long>() < 0) {
      throw InvalidInput(std::string("operator term field '") + field +
                         "' must hold nonnegative integers");
    }
    m[i] = j[i].get<unsigned>();
  }
  return m;
}

json entry_to_json(const NormEntry& e) {
  return json{{"h", e.h},
              {"log_value", number_or_null(e.log_value)},
              {"argmax", e.argmax},
              {"saturated", e.saturated}};
}

const json& require(const json& j, const char* key, const char* context) {
  if (!j.is_object() || !j.contains(key)) {
    throw InvalidInput(std::string(context) + ": missing field '" + key + "'");
  }
  return j.at(key);
}

std::string multi_index_string(const MultiIndex& k) {
  std::string out;
  for (std::size_t i = 0; i < k.dim(); ++i) {
    if (i) out += ';';
    out += std::to_string(k[i]);
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

WeightSequence weights_from_json(const json& j) {
  const auto kind = require(j, "kind", "weights").get<std::string>();
  if (kind == "gevrey") {
    const double mu = require(j, "mu", "weights").get<double>();
    const auto p_max = require(j, "p_max", "weights").get<std::size_t>();
    return make_gevrey(mu, p_max);
  }
  if (kind == "explicit") {
    if (j.contains("log_m")) return WeightSequence(j.at("log_m").get<std::vector<double>>());
    if (j.contains("m")) {
      auto m = j.at("m").get<std::vector<double>>();
      for (double& v : m) {
        if (!(v > 0.0)) throw InvalidInput("weights: entries of 'm' must be positive");
        v = std::log(v);
      }
      return WeightSequence(std::move(m));
    }
    throw InvalidInput("weights: explicit kind needs 'log_m' or 'm'");
  }
  throw InvalidInput("weights: unknown kind '" + kind + "'");
}

ShubinOperator operator_from_json(const json& j) {
  const auto dim = require(j, "dim", "operator").get<std::size_t>();
  if (dim == 0) throw InvalidInput("operator: dim must be positive");
  if (j.contains("builtin")) {
    const auto name = j.at("builtin").get<std::string>();
    if (name == "harmonic_oscillator") return ShubinOperator::harmonic_oscillator(dim);
    if (name == "identity") return ShubinOperator::identity(dim);
    const auto axis = j.value("axis", std::size_t{0});
    if (axis >= dim) throw InvalidInput("operator: axis out of range");
    if (name == "annihilation") return ShubinOperator::annihilation(dim, axis);
    if (name == "position") return ShubinOperator::position(dim, axis);
    if (name == "derivative") return ShubinOperator::derivative(dim, axis);
    throw InvalidInput("operator: unknown builtin '" + name + "'");
  }
  const auto& terms = require(j, "terms", "operator");
  if (!terms.is_array()) throw InvalidInput("operator: 'terms' must be an array");
  ShubinOperator p(dim);
  for (const auto& t : terms) {
    const auto beta = multi_index_from_json(require(t, "beta", "operator term"), dim, "beta");
    const auto alpha = multi_index_from_json(require(t, "alpha", "operator term"), dim, "alpha");
    p.add_term(beta, alpha, Complex(t.value("re", 0.0), t.value("im", 0.0)));
  }
  return p;
}

json operator_to_json(const ShubinOperator& p) {
  json terms = json::array();
  for (const auto& [mono, c] : p.terms()) {
    terms.push_back(json{{"beta", mono.beta.entries()},
                         {"alpha", mono.alpha.entries()},
                         {"re", c.real()},
                         {"im", c.imag()}});
  }
  return json{{"dim", p.dim()}, {"order", p.order()}, {"terms", terms}};
}

json to_json(const ConditionReport& r) {
  json out{{"m1_ok", r.m1_ok}};
  if (!r.m1_ok) out["m1_first_violation"] = r.m1_first_violation;
  out["m2prime_ok"] = r.m2prime_ok;
  out["m2prime_A"] = number_or_null(r.m2prime_A);
  out["m2prime_H"] = number_or_null(r.m2prime_H);
  out["m2prime_boundary"] = r.m2prime_boundary;
  out["m2_ok"] = r.m2_ok;
  out["m2_A"] = number_or_null(r.m2_A);
  out["m2_H"] = number_or_null(r.m2_H);
  out["assumption_roumieu"] = r.assumption_roumieu;
  out["roumieu_l"] = number_or_null(r.roumieu_l);
  out["roumieu_C"] = number_or_null(r.roumieu_C);
  out["assumption_beurling"] = r.assumption_beurling;
  out["beurling_finite_range"] = r.beurling_finite_range;
  out["lemma_r"] = number_or_null(r.lemma_r);
  json ratios = json::array();
  for (double v : r.lemma_ratios) ratios.push_back(number_or_null(v));
  out["lemma_ratios"] = ratios;
  return out;
}

json to_json(const EllipticityReport& r) {
  return json{{"elliptic", r.elliptic},
              {"min_modulus", r.min_modulus},
              {"argmin", r.argmin},
              {"threshold", r.threshold}};
}

json to_json(const NormalityReport& r) {
  return json{{"normal", r.normal}, {"discrepancy", r.discrepancy}};
}

json to_json(const WeylFit& f) {
  return json{{"B", f.B},
              {"exponent", f.exponent},
              {"exponent_expected", f.exponent_expected},
              {"r_squared", f.r_squared},
              {"j_min", f.j_min},
              {"j_max", f.j_max},
              {"m", f.m},
              {"n", f.n}};
}

json to_json(const DecayFit& f) {
  json rows = json::array();
  for (const auto& r : f.rows) {
    rows.push_back(json{{"lambda", r.lambda},
                        {"log_sup", number_or_null(r.log_sup)},
                        {"log_sup_monotone", number_or_null(r.log_sup_monotone)},
                        {"argmax_j", r.argmax_j},
                        {"log_head", number_or_null(r.log_head)},
                        {"log_tail", number_or_null(r.log_tail)},
                        {"saturated", r.saturated},
                        {"pass", r.pass}});
  }
  return json{{"verdict_roumieu", f.verdict_roumieu},
              {"verdict_beurling", f.verdict_beurling},
              {"lambda_star", f.lambda_star},
              {"log_c_star", number_or_null(f.log_c_star)},
              {"j_count", f.j_count},
              {"j_resolved", f.j_resolved},
              {"rows", rows}};
}

json to_json(const NormTable& t) {
  json out{{"h_grid", t.h_grid}};
  auto column = [](const std::vector<NormEntry>& v) {
    json a = json::array();
    for (const auto& e : v) a.push_back(entry_to_json(e));
    return a;
  };
  if (!t.iterate.empty()) {
    out["iterate"] = column(t.iterate);
    out["iterate_l2"] = t.iterate_l2;
  }
  if (!t.ultra.empty()) {
    out["ultra"] = column(t.ultra);
    out["sobolev"] = column(t.sobolev);
    out["level_sum"] = t.level_sum;
    out["level_max"] = t.level_max;
  }
  return out;
}

json to_json(const EigenBoundWitness& w) {
  return json{{"witness", w.witness},
              {"j_max", w.j_max},
              {"per_index", w.per_index},
              {"running_max", w.running_max}};
}

json to_json(const InterpolationReport& r) {
  json holds = json::array();
  for (bool b : r.holds) holds.push_back(b);
  return json{{"c_grid", r.c_grid},
              {"holds", holds},
              {"least_passing", r.least_passing},
              {"worst_ratio", r.worst_ratio}};
}

Function builtin_function(const json& spec, std::size_t dim) {
  const std::string name = spec.is_string() ? spec.get<std::string>()
                                            : require(spec, "name", "test_function").get<std::string>();
  auto radius2 = [](std::span<const double> x) {
    double r = 0.0;
    for (double v : x) r += v * v;
    return r;
  };
  if (name == "gaussian" || name == "gaussian_wide") {
    double sigma = name == "gaussian" ? 1.0 : 2.0;
    if (spec.is_object() && spec.contains("sigma")) sigma = spec.at("sigma").get<double>();
    if (!(sigma > 0.0)) throw InvalidInput("test_function: sigma must be positive");
    const double scale = 0.5 / (sigma * sigma);
    return [=](std::span<const double> x) { return Complex(std::exp(-scale * radius2(x))); };
  }
  if (name == "hermite_k") {
    std::vector<unsigned> k(dim, 0);
    if (spec.is_object() && spec.contains("k")) {
      const auto& kj = spec.at("k");
      if (kj.is_array()) {
        if (kj.size() != dim) throw InvalidInput("test_function: 'k' needs one entry per axis");
        for (std::size_t i = 0; i < dim; ++i) k[i] = kj[i].get<unsigned>();
      } else {
        k[0] = kj.get<unsigned>();
      }
    }
    return [=](std::span<const double> x) {
      double v = 1.0;
      for (std::size_t i = 0; i < x.size(); ++i) v *= hermite_eval(k[i], x[i]);
      return Complex(v);
    };
  }
  if (name == "gevrey_bump") {
    return [=](std::span<const double> x) {
      const double r = radius2(x);
      return Complex(r < 1.0 ? std::exp(-1.0 / (1.0 - r)) : 0.0);
    };
  }
  throw InvalidInput("test_function: unknown name '" + name + "'");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json_file(const std::filesystem::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw InvalidInput("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInput("cannot write '" + tmp.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw InvalidInput("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw InvalidInput("cannot move output into place at '" + path.string() + "'");
  }
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  return std::string::npos;
}

CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  std::size_t pos = 0;
  bool first = true;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      std::string f(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
      while (!f.empty() && f.front() == ' ') f.erase(f.begin());
      while (!f.empty() && f.back() == ' ') f.pop_back();
      fields.push_back(std::move(f));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (first) {
      table.header = std::move(fields);
      first = false;
    } else {
      if (fields.size() != table.header.size()) {
        throw InvalidInput("CSV row " + std::to_string(table.rows.size() + 1) + " has " +
                           std::to_string(fields.size()) + " fields, header has " +
                           std::to_string(table.header.size()));
      }
      table.rows.push_back(std::move(fields));
    }
  }
  return table;
}

std::string to_csv(const CsvTable& table) {
  std::string out;
  auto line = [&out](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      out += fields[i];
    }
    out += '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
  return out;
}

std::vector<Complex> coefficients_from_csv(const CsvTable& table) {
  const auto re = table.column("re");
  const auto im = table.column("im");
  if (re == std::string::npos) throw InvalidInput("coefficient CSV needs a 're' column");
  std::vector<Complex> out;
  out.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    const double r = parse_double(row[re], "re");
    const double i = im == std::string::npos ? 0.0 : parse_double(row[im], "im");
    if (!std::isfinite(r) || !std::isfinite(i)) throw InvalidInput("coefficient CSV has a non-finite entry");
    out.emplace_back(r, i);
  }
  return out;
}

CsvTable hermite_coefficients_csv(const VectorXc& c, const BasisTruncation& trunc) {
  CsvTable t{{"index", "multi_index", "re", "im"}, {}};
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    t.rows.push_back({std::to_string(i), multi_index_string(trunc.multi_index(i)),
                      format_double(c[i].real()), format_double(c[i].imag())});
  }
  return t;
}

CsvTable expansion_csv(const VectorXc& a) {
  CsvTable t{{"j", "re", "im", "abs"}, {}};
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    t.rows.push_back({std::to_string(i + 1), format_double(a[i].real()),
                      format_double(a[i].imag()), format_double(std::abs(a[i]))});
  }
  return t;
}

CsvTable spectrum_csv(const SpectralDecomposition& s) {
  CsvTable t{{"j", "re", "im", "abs", "residual", "trusted"}, {}};
  for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
    t.rows.push_back({std::to_string(i + 1), format_double(s.eigenvalues[i].real()),
                      format_double(s.eigenvalues[i].imag()),
                      format_double(std::abs(s.eigenvalues[i])), format_double(s.residuals[i]),
                      static_cast<std::size_t>(i) < s.trusted ? "1" : "0"});
  }
  return t;
}

CsvTable decay_csv(const DecayFit& f) {
  CsvTable t{{"lambda", "log_sup", "log_sup_monotone", "argmax_j", "log_head", "log_tail",
              "saturated", "pass"},
             {}};
  for (const auto& r : f.rows) {
    t.rows.push_back({format_double(r.lambda), format_double(r.log_sup),
                      format_double(r.log_sup_monotone), std::to_string(r.argmax_j),
                      format_double(r.log_head), format_double(r.log_tail),
                      std::to_string(r.saturated), r.pass ? "1" : "0"});
  }
  return t;
}

CsvTable norms_csv(const NormTable& t) {
  CsvTable out{{"h", "norm", "log_value", "argmax", "saturated"}, {}};
  auto add = [&out](const char* name, const std::vector<NormEntry>& v) {
    for (const auto& e : v) {
      out.rows.push_back({format_double(e.h), name, format_double(e.log_value),
                          std::to_string(e.argmax), e.saturated ? "1" : "0"});
    }
  };
  add("iterate", t.iterate);
  add("ultra", t.ultra);
  add("sobolev", t.sobolev);
  return out;
}

CsvTable nodes_csv(const GaussHermiteRule& rule, std::size_t dim) {
  CsvTable t;
  for (std::size_t i = 0; i < dim; ++i) t.header.push_back("x" + std::to_string(i));
  t.header.push_back("re");
  t.header.push_back("im");
  for (const auto& p : tensor_nodes(rule, dim)) {
    std::vector<std::string> row;
    for (double x : p) row.push_back(format_double(x));
    row.push_back("0");
    row.push_back("0");
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::vector<Complex> samples_from_csv(const CsvTable& table, const GaussHermiteRule& rule,
                                      std::size_t dim) {
  const auto nodes = tensor_nodes(rule, dim);
  if (table.rows.size() != nodes.size()) {
    throw InvalidInput("sample CSV has " + std::to_string(table.rows.size()) + " rows, the " +
                       std::to_string(rule.nodes.size()) + "-point tensor rule needs " +
                       std::to_string(nodes.size()));
  }
  std::vector<std::size_t> cols;
  for (std::size_t i = 0; i < dim; ++i) {
    const auto c = table.column("x" + std::to_string(i));
    if (c == std::string::npos) throw InvalidInput("sample CSV lacks column x" + std::to_string(i));
    cols.push_back(c);
  }
  for (std::size_t r = 0; r < nodes.size(); ++r) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double x = parse_double(table.rows[r][cols[i]], "node");
      if (std::abs(x - nodes[r][i]) > 1e-9 * (1.0 + std::abs(nodes[r][i]))) {
        throw InvalidInput("sample CSV row " + std::to_string(r + 1) +
                           " is not at the expected quadrature node");
      }
    }
  }
  return coefficients_from_csv(table);
}

}  // namespace shubin
