#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "shubin/io.hpp"

namespace shubin {

struct StageFlags {
  bool conditions = true;
  bool ellipticity = true;
  bool normality = true;
  bool spectrum = true;
  bool weyl = true;
  bool classify = true;
  bool norms = true;
  bool bounds = true;
  bool interpolation = false;
  bool solve = false;
};

struct JobConfig {
  ShubinOperator op{1};
  json operator_json;
  WeightSequence weights = make_gevrey(1.0, 64);
  json weights_json;
  std::size_t n_per_axis = 64;
  std::size_t pad = 0;  // 0 means the operator order
  std::size_t quad_order = 0;  // 0 means N + 16
  json test_function = "gaussian";
  std::filesystem::path samples_csv;  // set when the test function comes from sampled values
  std::vector<double> lambda_grid = default_lambda_grid();
  double classify_floor = 1e-13;  // relative noise floor for classify_decay
  std::vector<double> h_grid{0.5, 1.0, 2.0, 4.0};
  std::vector<double> c_grid{0.5, 1.0, 2.0, 4.0, 8.0};
  StageFlags checks;
  std::size_t ellipticity_samples = 256;
  std::size_t weyl_j_min = 20;
  std::size_t weyl_j_max = 0;
  unsigned p_cap = 6;
  unsigned s_cap = 12;
  unsigned bound_cap = 4;
  std::size_t bound_j_max = 100;
  unsigned interpolation_p_max = 3;
  KernelPolicy kernel_policy = KernelPolicy::Reject;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 0;
};

/// Parses a job description. Relative sample paths resolve against base_dir.
/// Throws InvalidInput naming the offending field.
JobConfig job_from_json(const json& j, const std::filesystem::path& base_dir = {});
JobConfig load_job(const std::filesystem::path& path);

enum class RunStatus { Ok = 0, Error = 1, HypothesisFailure = 2 };

struct RunResult {
  RunStatus status = RunStatus::Ok;
  json report;
  std::string message;
};

/// Runs the enabled stages in order and writes report.json plus CSV/SVG
/// artifacts into output_dir when write_files is set.
RunResult run_job(const JobConfig& job, bool write_files = true);

}  // namespace shubin
