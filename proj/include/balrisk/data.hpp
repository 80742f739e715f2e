#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "balrisk/dataset.hpp"
#include "balrisk/sampler.hpp"

namespace balrisk {

// Class prior plus a multivariate Student-t law (location, scale matrix,
// degrees of freedom) for each class.
struct StudentMixtureParams {
  double p = 0.5;
  Eigen::VectorXd mu_neg;
  Eigen::VectorXd mu_pos;
  Eigen::MatrixXd sigma_neg;
  Eigen::MatrixXd sigma_pos;
  double nu_neg = 2.5;
  double nu_pos = 1.1;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(mu_neg.size()); }

  // Locations (0,0) and (1,1), scales I and 3I, degrees of freedom 2.5 and 1.1.
  static StudentMixtureParams reference(double p);
  // Both classes share one Student-t law.
  static StudentMixtureParams symmetric(double p, std::size_t dim, double nu);
};

// Sampler and densities of a validated StudentMixtureParams. An optional
// truncation radius rejects draws with ||x|| > radius.
class StudentMixture final : public ClassConditionalSampler {
 public:
  explicit StudentMixture(StudentMixtureParams params, std::optional<double> truncation_radius = {});

  const StudentMixtureParams& params() const noexcept { return params_; }
  std::optional<double> truncation_radius() const noexcept { return truncation_; }

  std::size_t dim() const noexcept override { return params_.dim(); }
  double prior() const noexcept override { return params_.p; }
  std::vector<double> draw_class(Label y, std::size_t count, std::uint64_t seed) const override;
  LabeledDataset draw_labeled(std::size_t n, std::uint64_t seed) const override;

  // Log-density of the untruncated class-conditional law.
  double log_density(Label y, std::span<const double> x) const;
  // P(Y = +1 | X = x) of the untruncated mixture, computed in log space.
  double eta(std::span<const double> x) const;

 private:
  struct ClassLaw {
    Eigen::VectorXd mu;
    Eigen::MatrixXd chol;  // lower Cholesky factor of the scale matrix
    double nu = 1.0;
    double log_norm = 0.0;
  };

  const ClassLaw& law(Label y) const noexcept { return y == Label::positive ? pos_ : neg_; }
  template <class Rng>
  void draw_point(const ClassLaw& law, Rng& rng, double* out) const;

  StudentMixtureParams params_;
  std::optional<double> truncation_;
  ClassLaw pos_;
  ClassLaw neg_;
};

// Labels Bernoulli(p) mapped to {-1,+1}; given Y = y, X = mu_y + L_y Z sqrt(nu_y / W)
// with Z standard normal and W chi-square(nu_y). Deterministic per seed and
// independent of the worker count.
// E[phi(m + s T)] for the logistic loss phi and T a standard univariate
// Student-t with nu > 1 degrees of freedom (s >= 0). The ReLU part of phi has
// a closed form; the bounded remainder is integrated adaptively.
double logistic_student_expectation(double m, double s, double nu);

// Exact balanced logistic risk (E+ phi(g(X)) + E- phi(-g(X))) / 2 of a linear
// score under an untruncated mixture with both degrees of freedom above 1.
double logistic_balanced_risk(const StudentMixture& mixture, std::span<const double> beta);

LabeledDataset sample_student_mixture(const StudentMixtureParams& params, std::size_t n, std::uint64_t seed);

double student_log_density(const StudentMixtureParams& params, Label which, std::span<const double> x);

double true_eta(const StudentMixtureParams& params, std::span<const double> x);

struct CsvSchema {
  std::variant<std::string, long> label_column = -1L;  // name, or 0-based index (negative counts from the end)
  std::string positive_value = "1";
  char delimiter = ',';
  bool has_header = true;
  bool min_max_scale = false;
};

// Parses delimited text into a dataset: every column except the label column
// is a feature. With target_p, positives are subsampled uniformly (seeded) so
// the positive fraction is as close to target_p as integer counts allow,
// keeping at least one positive and the original row order.
LabeledDataset parse_csv(std::string_view text, const CsvSchema& schema,
                         std::optional<double> target_p = {}, std::uint64_t seed = 0);
LabeledDataset load_csv(const std::string& path, const CsvSchema& schema,
                        std::optional<double> target_p = {}, std::uint64_t seed = 0);

// Splits one delimited record stream into fields (quoted fields, doubled
// quotes, CRLF line ends).
std::vector<std::vector<std::string>> split_csv_records(std::string_view text, char delimiter);

// Feature-only rows (for queries); a non-numeric first row is taken as a header.
std::vector<double> parse_feature_rows(std::string_view text, char delimiter, std::size_t& dim);

// Binary cache: "BRL1", u32 n, u32 d, then per row d little-endian f64 and
// one label byte (0x00 -> -1, 0x01 -> +1).
std::string encode_cache(const LabeledDataset& data);
LabeledDataset decode_cache(std::string_view bytes);
void write_cache(const std::string& path, const LabeledDataset& data);
LabeledDataset read_cache(const std::string& path);

// Columns x1..xd then label (+1/-1), 17 significant digits.
void write_dataset_csv(std::ostream& out, const LabeledDataset& data);

std::string read_file(const std::string& path);

}  // namespace balrisk
