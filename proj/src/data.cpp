#include "balrisk/data.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "balrisk/error.hpp"
#include "balrisk/parallel.hpp"
#include "balrisk/random.hpp"

namespace balrisk {

StudentMixtureParams StudentMixtureParams::reference(double p) {
  StudentMixtureParams s;
  s.p = p;
  s.mu_neg = Eigen::Vector2d(0.0, 0.0);
  s.mu_pos = Eigen::Vector2d(1.0, 1.0);
  s.sigma_neg = Eigen::Matrix2d::Identity();
  s.sigma_pos = 3.0 * Eigen::Matrix2d::Identity();
  s.nu_neg = 2.5;
  s.nu_pos = 1.1;
  return s;
}

StudentMixtureParams StudentMixtureParams::symmetric(double p, std::size_t dim, double nu) {
  StudentMixtureParams s;
  auto d = static_cast<Eigen::Index>(dim);
  s.p = p;
  s.mu_neg = s.mu_pos = Eigen::VectorXd::Zero(d);
  s.sigma_neg = s.sigma_pos = Eigen::MatrixXd::Identity(d, d);
  s.nu_neg = s.nu_pos = nu;
  return s;
}

namespace {

constexpr std::size_t kSampleChunk = 4096;

Eigen::MatrixXd cholesky_or_throw(const Eigen::MatrixXd& sigma, const char* which) {
  if (sigma.rows() != sigma.cols()) throw DomainError(std::string(which) + " scale matrix is not square");
  if (!sigma.isApprox(sigma.transpose(), 1e-12)) {
    throw DomainError(std::string(which) + " scale matrix is not symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw DomainError(std::string(which) + " scale matrix is not positive definite");
  }
  return llt.matrixL();
}

}  // namespace

StudentMixture::StudentMixture(StudentMixtureParams params, std::optional<double> truncation_radius)
    : params_(std::move(params)), truncation_(truncation_radius) {
  if (!(params_.p > 0.0 && params_.p < 1.0)) throw DomainError("class prior p must lie in (0,1)");
  std::size_t d = params_.dim();
  if (d == 0 || static_cast<std::size_t>(params_.mu_pos.size()) != d ||
      static_cast<std::size_t>(params_.sigma_neg.rows()) != d ||
      static_cast<std::size_t>(params_.sigma_pos.rows()) != d) {
    throw DomainError("mixture parameters have inconsistent dimensions");
  }
  if (!(params_.nu_neg > 0.0) || !(params_.nu_pos > 0.0)) throw DomainError("degrees of freedom must be positive");
  if (truncation_ && !(*truncation_ > 0.0)) throw DomainError("truncation radius must be positive");

  auto make = [d](const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma, double nu, const char* which) {
    ClassLaw law;
    law.mu = mu;
    law.chol = cholesky_or_throw(sigma, which);
    law.nu = nu;
    double dd = static_cast<double>(d);
    double log_det = 2.0 * law.chol.diagonal().array().log().sum();
    law.log_norm = std::lgamma(0.5 * (nu + dd)) - std::lgamma(0.5 * nu) -
                   0.5 * dd * std::log(nu * std::numbers::pi) - 0.5 * log_det;
    return law;
  };
  neg_ = make(params_.mu_neg, params_.sigma_neg, params_.nu_neg, "negative-class");
  pos_ = make(params_.mu_pos, params_.sigma_pos, params_.nu_pos, "positive-class");
}

template <class R>
void StudentMixture::draw_point(const ClassLaw& law, R& rng, double* out) const {
  const auto d = static_cast<Eigen::Index>(dim());
  std::normal_distribution<double> gauss;
  // chi-square(nu) = Gamma(nu/2, 2)
  std::gamma_distribution<double> chi2(0.5 * law.nu, 2.0);
  Eigen::VectorXd z(d);
  for (;;) {
    for (Eigen::Index j = 0; j < d; ++j) z[j] = gauss(rng);
    double w = chi2(rng);
    Eigen::VectorXd x = law.mu + law.chol * z * std::sqrt(law.nu / w);
    if (!x.allFinite()) continue;
    if (truncation_ && x.norm() > *truncation_) continue;
    std::copy(x.data(), x.data() + d, out);
    return;
  }
}

std::vector<double> StudentMixture::draw_class(Label y, std::size_t count, std::uint64_t seed) const {
  const std::size_t d = dim();
  std::vector<double> out(count * d);
  const ClassLaw& l = law(y);
  std::uint64_t tag = y == Label::positive ? stream::positive : stream::negative;
  std::size_t chunks = (count + kSampleChunk - 1) / kSampleChunk;
  parallel_for(chunks, [&](std::size_t c) {
    Rng rng = make_rng(seed, {tag, c});
    std::size_t end = std::min(count, (c + 1) * kSampleChunk);
    for (std::size_t i = c * kSampleChunk; i < end; ++i) draw_point(l, rng, out.data() + i * d);
  });
  return out;
}

LabeledDataset StudentMixture::draw_labeled(std::size_t n, std::uint64_t seed) const {
  const std::size_t d = dim();
  std::vector<double> features(n * d);
  std::vector<Label> labels(n);
  std::size_t chunks = (n + kSampleChunk - 1) / kSampleChunk;
  parallel_for(chunks, [&](std::size_t c) {
    Rng rng = make_rng(seed, {stream::labels, c});
    std::bernoulli_distribution coin(params_.p);
    std::size_t end = std::min(n, (c + 1) * kSampleChunk);
    for (std::size_t i = c * kSampleChunk; i < end; ++i) {
      labels[i] = coin(rng) ? Label::positive : Label::negative;
      draw_point(law(labels[i]), rng, features.data() + i * d);
    }
  });
  return LabeledDataset(d, std::move(features), std::move(labels));
}

double StudentMixture::log_density(Label y, std::span<const double> x) const {
  const ClassLaw& l = law(y);
  auto d = static_cast<Eigen::Index>(dim());
  if (static_cast<Eigen::Index>(x.size()) != d) throw DomainError("point dimension does not match the mixture");
  Eigen::Map<const Eigen::VectorXd> xv(x.data(), d);
  Eigen::VectorXd r = l.chol.triangularView<Eigen::Lower>().solve(xv - l.mu);
  double maha = r.squaredNorm();
  return l.log_norm - 0.5 * (l.nu + static_cast<double>(d)) * std::log1p(maha / l.nu);
}

double StudentMixture::eta(std::span<const double> x) const {
  double r = std::log(params_.p) + log_density(Label::positive, x) - std::log1p(-params_.p) -
             log_density(Label::negative, x);
  // logistic(r), stable for |r| large
  if (r >= 0.0) return 1.0 / (1.0 + std::exp(-r));
  double e = std::exp(r);
  return e / (1.0 + e);
}

double logistic_student_expectation(double m, double s, double nu) {
  if (!(nu > 1.0)) throw DomainError("the logistic risk needs nu > 1");
  if (!(s >= 0.0) || !std::isfinite(m)) throw DomainError("invalid location or scale");
  // log1p(exp(-|z|)), the bounded part of phi(z) = max(-z, 0) + log1p(exp(-|z|))
  auto soft = [](double z) { return std::log1p(std::exp(-std::abs(z))); };
  if (s == 0.0) return std::max(-m, 0.0) + soft(m);

  boost::math::students_t_distribution<double> t(nu);
  // E max(-m - sT, 0) = s E (a - T)+ with a = -m/s, and
  // E (a - T)+ = a F(a) + (nu + a^2) f(a) / (nu - 1).
  double a = -m / s;
  double relu = s * (a * boost::math::cdf(t, a) + (nu + a * a) * boost::math::pdf(t, a) / (nu - 1.0));

  auto integrand = [&](double x) { return soft(m + s * x) * boost::math::pdf(t, x); };
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  constexpr double inf = std::numeric_limits<double>::infinity();
  double left = GK::integrate(integrand, -inf, a, 20, 1e-13);
  double right = GK::integrate(integrand, a, inf, 20, 1e-13);
  return relu + left + right;
}

double logistic_balanced_risk(const StudentMixture& mixture, std::span<const double> beta) {
  if (mixture.truncation_radius()) throw DomainError("exact risk needs an untruncated mixture");
  const auto& prm = mixture.params();
  auto d = static_cast<Eigen::Index>(prm.dim());
  if (static_cast<Eigen::Index>(beta.size()) != d) throw DomainError("beta dimension does not match the mixture");
  Eigen::Map<const Eigen::VectorXd> b(beta.data(), d);
  double sp = std::sqrt(std::max(0.0, b.dot(prm.sigma_pos * b)));
  double sn = std::sqrt(std::max(0.0, b.dot(prm.sigma_neg * b)));
  // T is symmetric, so E phi(-(m + sT)) = E phi(-m + sT).
  double pos = logistic_student_expectation(b.dot(prm.mu_pos), sp, prm.nu_pos);
  double neg = logistic_student_expectation(-b.dot(prm.mu_neg), sn, prm.nu_neg);
  return 0.5 * (pos + neg);
}

LabeledDataset sample_student_mixture(const StudentMixtureParams& params, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw DomainError("sample size must be at least 1");
  return StudentMixture(params).draw_labeled(n, seed);
}

double student_log_density(const StudentMixtureParams& params, Label which, std::span<const double> x) {
  return StudentMixture(params).log_density(which, x);
}

double true_eta(const StudentMixtureParams& params, std::span<const double> x) {
  return StudentMixture(params).eta(x);
}

// ---- CSV ----

std::vector<std::vector<std::string>> split_csv_records(std::string_view text, char delimiter) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t row = 1;
  auto end_field = [&] {
    fields.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    // Skip blank lines.
    if (!(fields.size() == 1 && fields[0].empty())) records.push_back(std::move(fields));
    fields.clear();
    ++row;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    char ch = text[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"') {
      if (field_started && !field.empty()) throw ParseError("quote inside an unquoted field", row);
      in_quotes = true;
      field_started = true;
    } else if (ch == delimiter) {
      end_field();
    } else if (ch == '\r') {
      if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
      end_record();
    } else if (ch == '\n') {
      end_record();
    } else {
      field.push_back(ch);
      field_started = true;
    }
  }
  if (in_quotes) throw ParseError("unterminated quoted field", row);
  if (!field.empty() || !fields.empty()) end_record();
  return records;
}

namespace {

bool parse_double(const std::string& s, double& out) {
  std::size_t b = s.find_first_not_of(" \t");
  std::size_t e = s.find_last_not_of(" \t");
  if (b == std::string::npos) return false;
  std::string t = s.substr(b, e - b + 1);
  char* end = nullptr;
  out = std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size() && std::isfinite(out);
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  std::size_t e = s.find_last_not_of(" \t");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

void min_max_scale(std::vector<double>& features, std::size_t n, std::size_t d) {
  for (std::size_t j = 0; j < d; ++j) {
    double lo = features[j], hi = features[j];
    for (std::size_t i = 1; i < n; ++i) {
      lo = std::min(lo, features[i * d + j]);
      hi = std::max(hi, features[i * d + j]);
    }
    double span = hi - lo;
    for (std::size_t i = 0; i < n; ++i) features[i * d + j] = span > 0.0 ? (features[i * d + j] - lo) / span : 0.0;
  }
}

}  // namespace

LabeledDataset parse_csv(std::string_view text, const CsvSchema& schema, std::optional<double> target_p,
                         std::uint64_t seed) {
  auto records = split_csv_records(text, schema.delimiter);
  if (records.empty() || (schema.has_header && records.size() == 1)) throw EmptyDatasetError("CSV has no data rows");
  std::size_t width = records.front().size();
  if (width < 2) throw SchemaError("CSV needs at least one feature column and a label column");

  std::size_t label_col = 0;
  if (const auto* name = std::get_if<std::string>(&schema.label_column)) {
    if (!schema.has_header) throw SchemaError("label column given by name but the file has no header");
    auto& header = records.front();
    auto it = std::find_if(header.begin(), header.end(), [&](const std::string& h) { return trim(h) == *name; });
    if (it == header.end()) throw SchemaError("label column '" + *name + "' not found in header");
    label_col = static_cast<std::size_t>(it - header.begin());
  } else {
    long idx = std::get<long>(schema.label_column);
    long w = static_cast<long>(width);
    if (idx < -w || idx >= w) throw SchemaError("label column index " + std::to_string(idx) + " out of range");
    label_col = static_cast<std::size_t>(idx < 0 ? idx + w : idx);
  }

  const std::size_t d = width - 1;
  std::vector<double> features;
  std::vector<Label> labels;
  std::size_t first = schema.has_header ? 1 : 0;
  for (std::size_t r = first; r < records.size(); ++r) {
    const auto& rec = records[r];
    std::size_t row_no = r + 1;
    if (rec.size() != width) {
      throw ParseError("expected " + std::to_string(width) + " fields, found " + std::to_string(rec.size()), row_no);
    }
    for (std::size_t c = 0; c < width; ++c) {
      if (c == label_col) continue;
      double v = 0.0;
      if (!parse_double(rec[c], v)) throw ParseError("not a finite number: '" + rec[c] + "'", row_no, c + 1);
      features.push_back(v);
    }
    labels.push_back(trim(rec[label_col]) == schema.positive_value ? Label::positive : Label::negative);
  }

  std::size_t n = labels.size();
  if (schema.min_max_scale) min_max_scale(features, n, d);
  LabeledDataset data(d, std::move(features), std::move(labels));
  if (!target_p) return data;

  double tp = *target_p;
  if (!(tp > 0.0 && tp < 1.0)) throw DomainError("target_p must lie in (0,1)");
  std::vector<std::size_t> pos_idx;
  for (std::size_t i = 0; i < n; ++i) {
    if (data.label(i) == Label::positive) pos_idx.push_back(i);
  }
  std::size_t neg = n - pos_idx.size();
  if (pos_idx.empty()) throw DegenerateClassError("cannot subsample: no positive rows");
  // k/(k + neg) closest to target_p.
  auto keep = static_cast<std::size_t>(std::llround(tp * static_cast<double>(neg) / (1.0 - tp)));
  keep = std::clamp<std::size_t>(keep, 1, pos_idx.size());

  Rng rng = make_rng(seed, {stream::subsample});
  std::shuffle(pos_idx.begin(), pos_idx.end(), rng);
  std::vector<bool> drop(n, false);
  for (std::size_t j = keep; j < pos_idx.size(); ++j) drop[pos_idx[j]] = true;
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < n; ++i) {
    if (!drop[i]) rows.push_back(i);
  }
  return data.subset(rows);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

LabeledDataset load_csv(const std::string& path, const CsvSchema& schema, std::optional<double> target_p,
                        std::uint64_t seed) {
  return parse_csv(read_file(path), schema, target_p, seed);
}

std::vector<double> parse_feature_rows(std::string_view text, char delimiter, std::size_t& dim) {
  auto records = split_csv_records(text, delimiter);
  std::vector<double> out;
  dim = 0;
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& rec = records[r];
    std::vector<double> row(rec.size());
    bool numeric = true;
    for (std::size_t c = 0; c < rec.size() && numeric; ++c) numeric = parse_double(rec[c], row[c]);
    if (!numeric) {
      if (r == 0) continue;  // header
      throw ParseError("non-numeric query field", r + 1);
    }
    if (dim == 0) dim = rec.size();
    if (rec.size() != dim) throw ParseError("inconsistent field count", r + 1);
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

// ---- binary cache ----

namespace {

constexpr char kMagic[4] = {'B', 'R', 'L', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

void put_f64(std::string& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
}

std::uint64_t get_le(std::string_view bytes, std::size_t at, int width) {
  std::uint64_t v = 0;
  for (int b = 0; b < width; ++b) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[at + b])) << (8 * b);
  return v;
}

}  // namespace

std::string encode_cache(const LabeledDataset& data) {
  if (data.size() > 0xffffffffu || data.dim() > 0xffffffffu) throw DataError("dataset too large for the cache format");
  std::string out(kMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(data.size()));
  put_u32(out, static_cast<std::uint32_t>(data.dim()));
  out.reserve(12 + data.size() * (8 * data.dim() + 1));
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.row(i)) put_f64(out, v);
    out.push_back(data.label(i) == Label::positive ? '\x01' : '\x00');
  }
  return out;
}

LabeledDataset decode_cache(std::string_view bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw DataError("not a BRL1 dataset cache");
  auto n = static_cast<std::size_t>(get_le(bytes, 4, 4));
  auto d = static_cast<std::size_t>(get_le(bytes, 8, 4));
  std::size_t row_bytes = 8 * d + 1;
  if (bytes.size() != 12 + n * row_bytes) throw DataError("dataset cache has the wrong length");
  std::vector<double> features(n * d);
  std::vector<Label> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t at = 12 + i * row_bytes;
    for (std::size_t j = 0; j < d; ++j) features[i * d + j] = std::bit_cast<double>(get_le(bytes, at + 8 * j, 8));
    auto tag = static_cast<unsigned char>(bytes[at + 8 * d]);
    if (tag > 1) throw ParseError("label byte must be 0x00 or 0x01", i + 1);
    labels[i] = tag ? Label::positive : Label::negative;
  }
  return LabeledDataset(d, std::move(features), std::move(labels));
}

void write_cache(const std::string& path, const LabeledDataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  std::string bytes = encode_cache(data);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

LabeledDataset read_cache(const std::string& path) { return decode_cache(read_file(path)); }

void write_dataset_csv(std::ostream& out, const LabeledDataset& data) {
  for (std::size_t j = 0; j < data.dim(); ++j) out << 'x' << (j + 1) << ',';
  out << "label\n";
  char buf[32];
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.row(i)) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << buf << ',';
    }
    out << (data.label(i) == Label::positive ? "1" : "-1") << '\n';
  }
}

}  // namespace balrisk
