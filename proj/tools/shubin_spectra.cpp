#include <CLI11.hpp>
#include <Eigen/Core>

#include <cstdlib>
#include <iostream>
#include <string>

#include "shubin/errors.hpp"
#include "shubin/pipeline.hpp"

using namespace shubin;

namespace {

json json_argument(const std::string& arg) {
  if (!arg.empty() && arg.front() == '{') {
    try {
      return json::parse(arg);
    } catch (const json::parse_error& e) {
      throw InvalidInput(std::string("inline JSON: ") + e.what());
    }
  }
  return read_json_file(arg);
}

void apply_thread_cap() {
  if (const char* env = std::getenv("SHUBIN_SPECTRA_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) Eigen::setNbThreads(static_cast<int>(v));
  }
}

const char* yes_no(bool b) { return b ? "ok" : "FAIL"; }

int finish(const RunResult& r, const JobConfig& job) {
  const auto& rep = r.report;
  if (rep.contains("weyl") && rep["weyl"].contains("B")) {
    std::cout << "weyl: B = " << format_double(rep["weyl"]["B"].get<double>())
              << ", exponent = " << format_double(rep["weyl"]["exponent"].get<double>())
              << " (expected " << format_double(rep["weyl"]["exponent_expected"].get<double>())
              << ")\n";
  }
  if (rep.contains("classify")) {
    std::cout << "classify: roumieu = " << rep["classify"]["verdict_roumieu"]
              << ", beurling = " << rep["classify"]["verdict_beurling"]
              << ", lambda_star = " << format_double(rep["classify"]["lambda_star"].get<double>())
              << "\n";
  }
  std::cout << "status: " << rep["status"].get<std::string>() << "; report written to "
            << (job.output_dir / "report.json").string() << "\n";
  if (r.status != RunStatus::Ok) std::cerr << "shubin-spectra: " << r.message << "\n";
  return static_cast<int>(r.status);
}

int run_with(const std::string& path, const std::string& out_dir,
             void (*select)(StageFlags&)) {
  JobConfig job = load_job(path);
  if (!out_dir.empty()) job.output_dir = out_dir;
  if (select) select(job.checks);
  return finish(run_job(job), job);
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_cap();
  CLI::App app{"Eigenfunction expansions and Gelfand-Shilov regularity for Shubin operators"};
  app.require_subcommand(1);

  std::string job_path, out_dir;

  auto* run = app.add_subcommand("run", "Run every configured stage of a job");
  run->add_option("job", job_path, "Job description (JSON)")->required();
  run->add_option("-o,--output-dir", out_dir, "Override output_dir");

  auto* spectrum = app.add_subcommand("spectrum", "Hypothesis checks, spectrum and Weyl fit");
  spectrum->add_option("job", job_path, "Job description (JSON)")->required();
  spectrum->add_option("-o,--output-dir", out_dir, "Override output_dir");

  auto* norms = app.add_subcommand("norms", "Norm families of the job's test function");
  norms->add_option("job", job_path, "Job description (JSON)")->required();
  norms->add_option("-o,--output-dir", out_dir, "Override output_dir");

  std::string policy;
  auto* solve = app.add_subcommand("solve", "Eigen-division solve P u = f");
  solve->add_option("job", job_path, "Job description (JSON)")->required();
  solve->add_option("-o,--output-dir", out_dir, "Override output_dir");
  solve->add_option("--policy", policy, "Kernel policy")->check(CLI::IsMember({"reject", "project"}));

  std::string weights_arg;
  auto* check_weights = app.add_subcommand("check-weights", "Weight-sequence conditions");
  check_weights->add_option("--weights", weights_arg, "Weights JSON file or inline object")->required();

  std::string operator_arg;
  std::size_t samples = 256;
  std::uint64_t seed = 0;
  auto* check_operator = app.add_subcommand("check-operator", "Normality and global ellipticity");
  check_operator->add_option("--operator", operator_arg, "Operator JSON file or inline object")->required();
  check_operator->add_option("--samples", samples, "Sphere samples")->check(CLI::PositiveNumber);
  check_operator->add_option("--seed", seed, "Sampling seed");

  std::string coeffs_path;
  std::size_t dim = 1;
  std::vector<double> lambda_grid;
  std::string json_out;
  double floor = 0.0;
  auto* classify = app.add_subcommand("classify", "Classify decay of expansion coefficients");
  classify->add_option("--coeffs", coeffs_path, "CSV with columns re[,im]")->required();
  classify->add_option("--weights", weights_arg, "Weights JSON file or inline object")->required();
  classify->add_option("--dim", dim, "Space dimension n")->check(CLI::PositiveNumber);
  classify->add_option("--lambda-grid", lambda_grid, "Lambda grid (default 2^-4..2^4)");
  classify->add_option("--floor", floor, "Relative noise floor below which |a_j| counts as unresolved")
      ->check(CLI::Range(0.0, 1.0));
  classify->add_option("--json", json_out, "Write the decay table as JSON");

  std::size_t quad_order = 0;
  auto* nodes = app.add_subcommand("nodes", "Print the quadrature node grid as a CSV template");
  nodes->add_option("--quad-order", quad_order, "Gauss-Hermite order")->required()->check(CLI::PositiveNumber);
  nodes->add_option("--dim", dim, "Space dimension n")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) return run_with(job_path, out_dir, nullptr);
    if (*spectrum) {
      return run_with(job_path, out_dir, [](StageFlags& c) {
        c.classify = c.norms = c.bounds = c.interpolation = c.solve = false;
        c.spectrum = true;
      });
    }
    if (*norms) {
      return run_with(job_path, out_dir, [](StageFlags& c) {
        c.weyl = c.classify = c.bounds = c.interpolation = c.solve = false;
        c.spectrum = c.norms = true;
      });
    }
    if (*solve) {
      JobConfig job = load_job(job_path);
      if (!out_dir.empty()) job.output_dir = out_dir;
      if (!policy.empty()) job.kernel_policy = policy == "reject" ? KernelPolicy::Reject : KernelPolicy::Project;
      auto& c = job.checks;
      c.weyl = c.norms = c.bounds = c.interpolation = false;
      c.spectrum = c.classify = c.solve = true;
      return finish(run_job(job), job);
    }
    if (*check_weights) {
      const auto w = weights_from_json(json_argument(weights_arg));
      const auto r = check_conditions(w);
      std::cout << "p_max: " << w.p_max() << "\n"
                << "(M.1): " << yes_no(r.m1_ok);
      if (!r.m1_ok) std::cout << " (first violation at p = " << r.m1_first_violation << ")";
      std::cout << "\n(M.2)': " << yes_no(r.m2prime_ok) << " A = " << format_double(r.m2prime_A)
                << " H = " << format_double(r.m2prime_H) << "\n"
                << "(M.2): " << yes_no(r.m2_ok) << " A = " << format_double(r.m2_A)
                << " H = " << format_double(r.m2_H) << "\n"
                << "roumieu assumption: " << yes_no(r.assumption_roumieu)
                << " l = " << format_double(r.roumieu_l) << " C = " << format_double(r.roumieu_C) << "\n"
                << "beurling assumption: " << yes_no(r.assumption_beurling) << "\n"
                << "lemma r: " << format_double(r.lemma_r) << "\n";
      json out{{"schema_version", kSchemaVersion}, {"conditions", to_json(r)}};
      std::cout << out.dump(2) << "\n";
      return 0;
    }
    if (*check_operator) {
      const auto p = operator_from_json(json_argument(operator_arg));
      const double scale = std::max(1.0, p.max_abs_coefficient());
      const auto nr = is_normal(p, 1e-12 * scale * scale);
      const auto er = ellipticity_test(p, samples, seed);
      std::cout << "order: " << p.order() << "\n"
                << "normal: " << yes_no(nr.normal)
                << " discrepancy = " << format_double(nr.discrepancy) << "\n"
                << "elliptic: " << yes_no(er.elliptic)
                << " min |p_m| = " << format_double(er.min_modulus) << " at (";
      for (std::size_t i = 0; i < er.argmin.size(); ++i)
        std::cout << (i ? ", " : "") << format_double(er.argmin[i]);
      std::cout << ")\n";
      json out{{"schema_version", kSchemaVersion}, {"normality", to_json(nr)}, {"ellipticity", to_json(er)}};
      std::cout << out.dump(2) << "\n";
      return nr.normal && er.elliptic ? 0 : 2;
    }
    if (*classify) {
      const auto w = weights_from_json(json_argument(weights_arg));
      const auto a = coefficients_from_csv(parse_csv(read_file(coeffs_path)));
      if (lambda_grid.empty()) lambda_grid = default_lambda_grid();
      const auto fit = classify_decay(a, w, dim, lambda_grid, floor);
      std::cout << "j_count: " << fit.j_count << "\n";
      for (const auto& r : fit.rows) {
        std::cout << "lambda " << format_double(r.lambda) << ": log S = " << format_double(r.log_sup)
                  << (r.pass ? "  pass" : "  fail") << "\n";
      }
      std::cout << "roumieu: " << (fit.verdict_roumieu ? "true" : "false")
                << "\nbeurling: " << (fit.verdict_beurling ? "true" : "false")
                << "\nlambda_star: " << format_double(fit.lambda_star) << "\n";
      if (!json_out.empty()) {
        json out{{"schema_version", kSchemaVersion}, {"classify", to_json(fit)}};
        write_atomic(json_out, out.dump(2) + "\n");
      }
      return 0;
    }
    if (*nodes) {
      std::cout << to_csv(nodes_csv(gauss_hermite(quad_order), dim));
      return 0;
    }
  } catch (const HypothesisError& e) {
    std::cerr << "shubin-spectra: " << e.what() << "\n";
    return 2;
  } catch (const Unsolvable& e) {
    std::cerr << "shubin-spectra: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "shubin-spectra: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
