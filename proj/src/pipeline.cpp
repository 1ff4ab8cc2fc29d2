#include "shubin/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "shubin/errors.hpp"
#include "shubin/svg.hpp"

namespace shubin {

namespace {

template <class T>
T field(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("job field '") + key + "': " + e.what());
  }
}

std::vector<double> positive_grid(const json& j, const char* key, std::vector<double> fallback) {
  auto grid = field<std::vector<double>>(j, key, std::move(fallback));
  if (grid.empty()) throw InvalidInput(std::string("job field '") + key + "' must be nonempty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || !std::isfinite(grid[i]) || (i > 0 && !(grid[i] > grid[i - 1]))) {
      throw InvalidInput(std::string("job field '") + key +
                         "' must hold positive, strictly increasing values");
    }
  }
  return grid;
}

bool symbolically_selfadjoint(const ShubinOperator& p) {
  return (adjoint(p) - p).max_abs_coefficient() <= 1e-14 * std::max(1.0, p.max_abs_coefficient());
}

std::span<const Complex> as_span(const VectorXc& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

std::string decay_svg(const VectorXc& a, const DecayFit& fit, const WeightSequence& w,
                      std::size_t n) {
  svg::Plot plot;
  plot.title = "Expansion coefficients and decay envelopes";
  plot.x_label = "j";
  plot.y_label = "|a_j|";
  plot.log_y = true;
  svg::Series coeffs{"|a_j|", {}, "#1f77b4", false, true};
  for (Eigen::Index j = 0; j < a.size(); ++j) coeffs.points.emplace_back(j + 1.0, std::abs(a[j]));
  plot.series.push_back(coeffs);

  const AssociatedFunction assoc(w);
  auto envelope = [&](const DecayRow& row, const std::string& color) {
    svg::Series s{"C e^{-M(" + format_double(row.lambda) + " j^{1/2n})}", {}, color, true, false};
    for (Eigen::Index j = 0; j < a.size(); ++j) {
      const double t = row.lambda * std::pow(j + 1.0, 1.0 / (2.0 * static_cast<double>(n)));
      s.points.emplace_back(j + 1.0, std::exp(row.log_sup - assoc(t)));
    }
    return s;
  };
  const DecayRow* passing = nullptr;
  const DecayRow* failing = nullptr;
  for (const auto& r : fit.rows) {
    if (r.pass) passing = &r;
    if (!r.pass && !failing && std::isfinite(r.log_sup)) failing = &r;
  }
  if (passing && std::isfinite(passing->log_sup)) plot.series.push_back(envelope(*passing, "#2ca02c"));
  if (failing) plot.series.push_back(envelope(*failing, "#d62728"));
  return svg::render(plot);
}

std::string weyl_svg(const SpectralDecomposition& s, const std::optional<WeylFit>& fit) {
  svg::Plot plot;
  plot.title = "Eigenvalue growth";
  plot.x_label = "j";
  plot.y_label = "|lambda_j|";
  plot.log_x = true;
  plot.log_y = true;
  svg::Series ev{"|lambda_j| (trusted)", {}, "#1f77b4", false, true};
  for (std::size_t j = 0; j < s.trusted; ++j)
    ev.points.emplace_back(j + 1.0, std::abs(s.eigenvalues[static_cast<Eigen::Index>(j)]));
  plot.series.push_back(ev);
  if (fit) {
    svg::Series line{"B j^e fit", {}, "#d62728", true, false};
    for (std::size_t j : {fit->j_min, fit->j_max})
      line.points.emplace_back(static_cast<double>(j), fit->B * std::pow(static_cast<double>(j), fit->exponent));
    plot.series.push_back(line);
  }
  return svg::render(plot);
}

struct Outputs {
  std::vector<std::pair<std::string, std::string>> files;
  void add(std::string name, std::string contents) {
    files.emplace_back(std::move(name), std::move(contents));
  }
};

}  // namespace

JobConfig job_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw InvalidInput("job description must be a JSON object");
  JobConfig job;
  if (j.contains("schema_version") && j.at("schema_version") != kSchemaVersion) {
    throw InvalidInput("job field 'schema_version': unsupported value " +
                       j.at("schema_version").dump());
  }
  try {
    if (!j.contains("operator")) throw InvalidInput("missing field");
    job.operator_json = j.at("operator");
    job.op = operator_from_json(job.operator_json);
  } catch (const std::exception& e) {
    throw InvalidInput(std::string("job field 'operator': ") + e.what());
  }
  try {
    if (!j.contains("weights")) throw InvalidInput("missing field");
    job.weights_json = j.at("weights");
    job.weights = weights_from_json(job.weights_json);
  } catch (const std::exception& e) {
    throw InvalidInput(std::string("job field 'weights': ") + e.what());
  }
  const json trunc = j.value("truncation", json::object());
  job.n_per_axis = field<std::size_t>(trunc, "N", job.n_per_axis);
  job.pad = field<std::size_t>(trunc, "pad", job.pad);
  if (job.n_per_axis < 2) throw InvalidInput("job field 'truncation.N' must be >= 2");
  job.quad_order = field<std::size_t>(j, "quad_order", 0);
  if (job.quad_order == 0) job.quad_order = job.n_per_axis + 16;
  if (job.quad_order < job.n_per_axis + 8) {
    throw InvalidInput("job field 'quad_order' must be >= truncation.N + 8");
  }

  if (j.contains("test_function")) {
    const auto& tf = j.at("test_function");
    if (tf.is_object() && tf.contains("samples_csv")) {
      std::filesystem::path p = tf.at("samples_csv").get<std::string>();
      job.samples_csv = p.is_relative() ? base_dir / p : p;
      if (!std::filesystem::exists(job.samples_csv)) {
        throw InvalidInput("job field 'test_function.samples_csv': file '" +
                           job.samples_csv.string() + "' does not exist");
      }
    } else {
      try {
        builtin_function(tf, job.op.dim());
      } catch (const std::exception& e) {
        throw InvalidInput(std::string("job field 'test_function': ") + e.what());
      }
    }
    job.test_function = tf;
  }

  job.lambda_grid = positive_grid(j, "lambda_grid", job.lambda_grid);
  job.classify_floor = field<double>(j, "classify_floor", job.classify_floor);
  if (!(job.classify_floor >= 0.0) || !(job.classify_floor < 1.0)) {
    throw InvalidInput("job field 'classify_floor' must lie in [0, 1)");
  }
  job.h_grid = positive_grid(j, "h_grid", job.h_grid);
  job.c_grid = positive_grid(j, "c_grid", job.c_grid);

  const json checks = j.value("checks", json::object());
  auto& c = job.checks;
  c.conditions = field(checks, "conditions", c.conditions);
  c.ellipticity = field(checks, "ellipticity", c.ellipticity);
  c.normality = field(checks, "normality", c.normality);
  c.spectrum = field(checks, "spectrum", c.spectrum);
  c.weyl = field(checks, "weyl", c.weyl);
  c.classify = field(checks, "classify", c.classify);
  c.norms = field(checks, "norms", c.norms);
  c.bounds = field(checks, "bounds", c.bounds);
  c.interpolation = field(checks, "interpolation", c.interpolation);
  c.solve = field(checks, "solve", c.solve);

  job.ellipticity_samples = field<std::size_t>(j, "ellipticity_samples", job.ellipticity_samples);
  const json weyl = j.value("weyl", json::object());
  job.weyl_j_min = field<std::size_t>(weyl, "j_min", job.weyl_j_min);
  job.weyl_j_max = field<std::size_t>(weyl, "j_max", job.weyl_j_max);
  const json norms = j.value("norms", json::object());
  job.p_cap = field<unsigned>(norms, "p_cap", job.p_cap);
  job.s_cap = field<unsigned>(norms, "s_cap", job.s_cap);
  const json bounds = j.value("bounds", json::object());
  job.bound_cap = field<unsigned>(bounds, "cap", job.bound_cap);
  job.bound_j_max = field<std::size_t>(bounds, "j_max", job.bound_j_max);
  const json interp = j.value("interpolation", json::object());
  job.interpolation_p_max = field<unsigned>(interp, "p_max", job.interpolation_p_max);
  const json solve = j.value("solve", json::object());
  const auto policy = field<std::string>(solve, "policy", "reject");
  if (policy == "reject") {
    job.kernel_policy = KernelPolicy::Reject;
  } else if (policy == "project") {
    job.kernel_policy = KernelPolicy::Project;
  } else {
    throw InvalidInput("job field 'solve.policy' must be 'reject' or 'project'");
  }
  job.output_dir = field<std::string>(j, "output_dir", job.output_dir.string());
  job.seed = field<std::uint64_t>(j, "seed", job.seed);

  const std::size_t total =
      static_cast<std::size_t>(std::pow(static_cast<double>(job.n_per_axis), job.op.dim()));
  if (total > 4096) {
    throw InvalidInput("job field 'truncation.N': N^n = " + std::to_string(total) +
                       " exceeds the dense budget of 4096");
  }
  return job;
}

JobConfig load_job(const std::filesystem::path& path) {
  return job_from_json(read_json_file(path), path.parent_path());
}

RunResult run_job(const JobConfig& job, bool write_files) {
  RunResult result;
  json& report = result.report;
  Outputs outputs;
  const std::size_t n = job.op.dim();
  const unsigned m = job.op.order();

  report["schema_version"] = kSchemaVersion;
  report["job"] = json{{"operator", operator_to_json(job.op)},
                       {"weights", job.weights_json},
                       {"truncation", {{"N", job.n_per_axis}, {"pad", job.pad}}},
                       {"quad_order", job.quad_order},
                       {"test_function", job.samples_csv.empty()
                                             ? job.test_function
                                             : json(job.samples_csv.filename().string())},
                       {"lambda_grid", job.lambda_grid},
                       {"classify_floor", job.classify_floor},
                       {"h_grid", job.h_grid},
                       {"seed", job.seed}};

  auto fail_hypothesis = [&](const std::string& stage, const std::string& message) {
    result.status = RunStatus::HypothesisFailure;
    result.message = message;
    report["hypothesis_failure"] = json{{"stage", stage}, {"message", message}};
  };

  try {
    if (job.checks.conditions) report["conditions"] = to_json(check_conditions(job.weights));

    if (job.checks.ellipticity) {
      const auto e = ellipticity_test(job.op, job.ellipticity_samples, job.seed);
      report["ellipticity"] = to_json(e);
      if (!e.elliptic) {
        std::string where;
        for (std::size_t i = 0; i < e.argmin.size(); ++i)
          where += (i ? ", " : "") + format_double(e.argmin[i]);
        fail_hypothesis("ellipticity", "principal symbol vanishes on the unit sphere: |p_m| = " +
                                           format_double(e.min_modulus) + " at (" + where + ")");
      }
    }
    if (result.status == RunStatus::Ok && job.checks.normality) {
      const double scale = std::max(1.0, job.op.max_abs_coefficient());
      const auto r = is_normal(job.op, 1e-12 * scale * scale);
      report["normality"] = to_json(r);
      if (!r.normal) {
        fail_hypothesis("normality", "operator is not normal: max |coefficient of PP* - P*P| = " +
                                         format_double(r.discrepancy));
      }
    }

    if (result.status == RunStatus::Ok && job.checks.spectrum) {
      const BasisTruncation trunc(n, job.n_per_axis);
      const auto mat = operator_matrix(job.op, trunc, job.pad);
      const bool selfadjoint = symbolically_selfadjoint(job.op);
      const SpectralDecomposition s = [&] {
        try {
          return decompose(mat, selfadjoint);
        } catch (const NotNormal& e) {
          report["spectrum"] = json{{"normal", false}, {"departure", e.departure()}};
          fail_hypothesis("spectrum", e.what());
          throw;
        }
      }();
      report["spectrum"] = json{{"total", s.eigenvalues.size()},
                                {"trusted", s.trusted},
                                {"pad", mat.pad},
                                {"matrix_norm", s.matrix_norm},
                                {"schur_departure", s.schur_departure},
                                {"selfadjoint", s.selfadjoint},
                                {"max_trusted_residual",
                                 s.trusted ? s.residuals.head(static_cast<Eigen::Index>(s.trusted)).maxCoeff()
                                           : 0.0}};
      outputs.add("spectrum.csv", to_csv(spectrum_csv(s)));

      std::optional<WeylFit> weyl;
      if (job.checks.weyl) {
        try {
          weyl = weyl_fit(s, m, n, job.weyl_j_min, job.weyl_j_max);
          report["weyl"] = to_json(*weyl);
        } catch (const ResourceLimit& e) {
          report["weyl"] = json{{"error", e.what()}};
        }
        outputs.add("weyl.svg", weyl_svg(s, weyl));
      }

      VectorXc f;
      const bool need_f = job.checks.classify || job.checks.norms || job.checks.interpolation ||
                          job.checks.solve;
      if (need_f) {
        if (!job.samples_csv.empty()) {
          const auto rule = gauss_hermite(job.quad_order);
          const auto samples = samples_from_csv(parse_csv(read_file(job.samples_csv)), rule, n);
          f = hermite_transform(samples, trunc, job.quad_order);
        } else {
          f = hermite_transform(builtin_function(job.test_function, n), trunc, job.quad_order);
        }
        outputs.add("hermite_coefficients.csv", to_csv(hermite_coefficients_csv(f, trunc)));
      }
      ExpansionCoefficients a;
      if (job.checks.classify || job.checks.solve) {
        a = expand(f, s, job.samples_csv.empty() ? job.test_function.dump()
                                                 : job.samples_csv.filename().string());
        outputs.add("coefficients.csv", to_csv(expansion_csv(a.a)));
        double mass = f.squaredNorm();
        report["expansion"] = json{{"j_count", a.a.size()},
                                   {"l2_norm_squared", mass},
                                   {"captured_squared", a.a.squaredNorm()}};
      }
      if (job.checks.classify) {
        const auto fit = classify_decay(as_span(a.a), job.weights, n, job.lambda_grid, job.classify_floor);
        report["classify"] = to_json(fit);
        outputs.add("decay.csv", to_csv(decay_csv(fit)));
        outputs.add("decay.svg", decay_svg(a.a, fit, job.weights, n));
      }
      if (job.checks.norms) {
        json norms;
        try {
          const auto pm = iterate_matrix(job.op, trunc, job.p_cap);
          NormTable table = iterate_norms(pm, f, trunc, job.weights, m, job.h_grid, job.p_cap);
          const auto semi = seminorm_family(f, trunc, job.weights, job.h_grid, job.s_cap, m);
          table.ultra = semi.ultra;
          table.sobolev = semi.sobolev;
          table.level_sum = semi.level_sum;
          table.level_max = semi.level_max;
          norms = to_json(table);
          norms["p_cap"] = job.p_cap;
          norms["s_cap"] = job.s_cap;
          outputs.add("norms.csv", to_csv(norms_csv(table)));
        } catch (const InvalidArgument& e) {
          norms = json{{"error", e.what()}};
        } catch (const ResourceLimit& e) {
          norms = json{{"error", e.what()}};
        }
        report["norms"] = norms;
      }
      if (job.checks.bounds) {
        if (weyl) {
          const auto w = eigen_bound_fit(s, *weyl, job.bound_cap,
                                         std::min(job.bound_j_max, s.trusted));
          report["bounds"] = to_json(w);
        } else {
          report["bounds"] = json{{"error", "needs a Weyl fit"}};
        }
      }
      if (job.checks.interpolation) {
        try {
          report["interpolation"] =
              to_json(interpolation_check(f, trunc, m, job.c_grid, job.interpolation_p_max));
        } catch (const InvalidArgument& e) {
          report["interpolation"] = json{{"error", e.what()}};
        }
      }
      if (job.checks.solve) {
        try {
          const auto d = solve_eigen_division(s, a, job.kernel_policy);
          const auto fit_u = classify_decay(as_span(d.u.a), job.weights, n, job.lambda_grid,
                                            job.classify_floor);
          report["solve"] = json{{"policy", job.kernel_policy == KernelPolicy::Reject ? "reject" : "project"},
                                 {"kernel", d.kernel},
                                 {"dropped_mass", d.dropped_mass},
                                 {"classify", to_json(fit_u)}};
          outputs.add("solution.csv", to_csv(expansion_csv(d.u.a)));
        } catch (const Unsolvable& e) {
          report["solve"] = json{{"error", e.what()}};
          fail_hypothesis("solve", e.what());
        }
      }
    }
  } catch (const HypothesisError& e) {
    if (result.status != RunStatus::HypothesisFailure) fail_hypothesis("hypothesis", e.what());
  } catch (const std::exception& e) {
    result.status = RunStatus::Error;
    result.message = e.what();
    report["error"] = e.what();
  }
  report["status"] = result.status == RunStatus::Ok              ? "ok"
                     : result.status == RunStatus::HypothesisFailure ? "hypothesis_failure"
                                                                     : "error";

  if (write_files) {
    std::filesystem::create_directories(job.output_dir);
    for (const auto& [name, contents] : outputs.files) write_atomic(job.output_dir / name, contents);
    write_atomic(job.output_dir / "report.json", report.dump(2) + "\n");
  }
  return result;
}

}  // namespace shubin
