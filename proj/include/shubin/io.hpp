#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "shubin/analysis.hpp"
#include "shubin/hermite.hpp"
#include "shubin/operator.hpp"
#include "shubin/spectral.hpp"
#include "shubin/weights.hpp"

namespace shubin {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Shortest round-trip decimal form; "nan", "inf", "-inf" for non-finite values.
std::string format_double(double v);

/// Finite doubles as numbers, non-finite ones as null.
json number_or_null(double v);

/// {"kind":"gevrey","mu":0.5,"p_max":128} or {"kind":"explicit","log_m":[...]}
/// or {"kind":"explicit","m":[...]} with M_p > 0.
WeightSequence weights_from_json(const json& j);

/// {"dim":1,"terms":[{"beta":[0],"alpha":[2],"re":1,"im":0}, ...]}
/// or {"builtin":"harmonic_oscillator","dim":1}.
ShubinOperator operator_from_json(const json& j);
json operator_to_json(const ShubinOperator& p);

json to_json(const ConditionReport& r);
json to_json(const EllipticityReport& r);
json to_json(const NormalityReport& r);
json to_json(const WeylFit& f);
json to_json(const DecayFit& f);
json to_json(const NormTable& t);
json to_json(const EigenBoundWitness& w);
json to_json(const InterpolationReport& r);

/// Named test functions: gaussian (optional "sigma"), gaussian_wide, hermite_k
/// (integer or per-axis "k"), gevrey_bump.
Function builtin_function(const json& spec, std::size_t dim);

/// Reads the whole file; throws InvalidInput if it cannot be opened.
std::string read_file(const std::filesystem::path& path);
json read_json_file(const std::filesystem::path& path);

/// Writes via a sibling temporary file and rename.
void write_atomic(const std::filesystem::path& path, std::string_view contents);

/// Minimal CSV table: header plus rows of raw fields.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;  // npos if absent
};

CsvTable parse_csv(std::string_view text);
std::string to_csv(const CsvTable& table);

/// Reads complex coefficients from columns "re" and (optional) "im".
std::vector<Complex> coefficients_from_csv(const CsvTable& table);

/// index,multi_index,re,im with multi-indices written as "k0;k1;...".
CsvTable hermite_coefficients_csv(const VectorXc& c, const BasisTruncation& trunc);
/// j,re,im,abs for a_j, 1-based.
CsvTable expansion_csv(const VectorXc& a);
/// j,re,im,abs,residual,trusted.
CsvTable spectrum_csv(const SpectralDecomposition& s);
/// lambda,log_sup,log_sup_monotone,argmax_j,log_head,log_tail,saturated,pass.
CsvTable decay_csv(const DecayFit& f);
/// h,norm,log_value,argmax,saturated for the three norm families.
CsvTable norms_csv(const NormTable& t);

/// Samples at tensor Gauss-Hermite nodes: x0..x{n-1},re,im in tensor_nodes order.
CsvTable nodes_csv(const GaussHermiteRule& rule, std::size_t dim);
std::vector<Complex> samples_from_csv(const CsvTable& table, const GaussHermiteRule& rule,
                                      std::size_t dim);

}  // namespace shubin
