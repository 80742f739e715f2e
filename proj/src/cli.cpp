#include "balrisk/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <utility>

#include "balrisk/bounds.hpp"
#include "balrisk/data.hpp"
#include "balrisk/error.hpp"
#include "balrisk/experiments.hpp"
#include "balrisk/knn.hpp"
#include "balrisk/parallel.hpp"
#include "balrisk/random.hpp"
#include "balrisk/svg.hpp"
#include "balrisk/table.hpp"

namespace balrisk {

namespace {

// Options that only steer where output goes or how fast it is produced; they
// never enter the echoed configuration.
const std::vector<std::string> kUnechoed = {"config", "threads", "out", "svg"};

template <class T>
std::string echo_value(const T& v) {
  if constexpr (std::is_same_v<T, double>) {
    return format_double(v);
  } else if constexpr (std::is_same_v<T, bool>) {
    return v ? "true" : "false";
  } else if constexpr (std::is_same_v<T, std::string>) {
    return v;
  } else {
    return std::to_string(v);
  }
}

// Binds options to variables and remembers how to echo each one.
class Options {
 public:
  explicit Options(CLI::App* sub) : sub_(sub) {}

  template <class T>
  CLI::Option* add(const std::string& key, T& var, const std::string& help) {
    CLI::Option* opt = sub_->add_option("--" + key, var, help)->capture_default_str();
    track(key, [&var] { return echo_value(var); });
    return opt;
  }

  template <class T>
  CLI::Option* add_optional(const std::string& key, std::optional<T>& var, const std::string& help) {
    CLI::Option* opt = sub_->add_option("--" + key, var, help);
    track(key, [&var] { return var ? echo_value(*var) : std::string("none"); });
    return opt;
  }

  CLI::Option* add_flag(const std::string& key, bool& var, const std::string& help) {
    CLI::Option* opt = sub_->add_flag("--" + key, var, help);
    track(key, [&var] { return echo_value(var); });
    return opt;
  }

  std::vector<std::string> echo(const std::string& command) const {
    std::vector<std::string> lines{"command=" + command};
    for (const auto& [key, fn] : echo_) {
      if (std::find(kUnechoed.begin(), kUnechoed.end(), key) == kUnechoed.end()) lines.push_back(key + "=" + fn());
    }
    return lines;
  }

 private:
  void track(const std::string& key, std::function<std::string()> fn) { echo_.emplace_back(key, std::move(fn)); }

  CLI::App* sub_;
  std::vector<std::pair<std::string, std::function<std::string()>>> echo_;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(text);
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_real_list(const std::string& text, const std::string& key) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) {
    char* end = nullptr;
    double v = std::strtod(item.c_str(), &end);
    if (end != item.c_str() + item.size() || !std::isfinite(v)) {
      throw UsageError("--" + key + ": '" + item + "' is not a number");
    }
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("--" + key + " must list at least one value");
  return out;
}

std::vector<std::size_t> parse_size_list(const std::string& text, const std::string& key) {
  std::vector<std::size_t> out;
  for (double v : parse_real_list(text, key)) {
    if (v < 0 || v != std::floor(v)) throw UsageError("--" + key + ": values must be nonnegative integers");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::string trim(std::string s) {
  s.erase(0, s.find_first_not_of(" \t\r"));
  s.erase(s.find_last_not_of(" \t\r") + 1);
  return s;
}

// key=value lines; blank lines and '#' comments ignored.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  std::string text = read_file(path);
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

std::optional<std::string> find_config_path(const std::vector<std::string>& args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file name");
      path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    }
  }
  return path;
}

bool has_extension(const std::string& path, const std::string& ext) {
  return path.size() >= ext.size() && path.compare(path.size() - ext.size(), ext.size(), ext) == 0;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write '" + path + "'");
  f << text;
  if (!f) throw DataError("write to '" + path + "' failed");
}

void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << text;
  } else {
    write_text(out_path, text);
  }
}

void add_echo(ResultTable& table, const Options& opts, const std::string& command) {
  for (auto& line : opts.echo(command)) table.add_comment(std::move(line));
}

struct CsvOptions {
  std::string label_column = "-1";
  std::string positive_value = "1";
  std::string delimiter = ",";
  bool no_header = false;
  bool scale = false;
  std::optional<double> target_p;

  void add_to(Options& opts) {
    opts.add("label-column", label_column, "label column of a CSV input: header name or 0-based index");
    opts.add("positive-value", positive_value, "label token of the positive class");
    opts.add("delimiter", delimiter, "CSV field delimiter");
    opts.add_flag("no-header", no_header, "CSV input has no header row");
    opts.add_flag("scale", scale, "min-max scale CSV features to [0,1]");
    opts.add_optional("target-p", target_p, "subsample positives to this fraction");
  }

  CsvSchema schema() const {
    CsvSchema s;
    if (delimiter.size() != 1) throw UsageError("--delimiter must be one character");
    s.delimiter = delimiter[0];
    s.positive_value = positive_value;
    s.has_header = !no_header;
    s.min_max_scale = scale;
    char* end = nullptr;
    long idx = std::strtol(label_column.c_str(), &end, 10);
    if (!label_column.empty() && end == label_column.c_str() + label_column.size()) {
      s.label_column = idx;
    } else {
      s.label_column = label_column;
    }
    return s;
  }
};

LabeledDataset load_dataset(const std::string& path, const CsvOptions& csv, std::uint64_t seed) {
  if (has_extension(path, ".csv") || has_extension(path, ".txt")) return load_csv(path, csv.schema(), csv.target_p, seed);
  if (csv.target_p) throw UsageError("--target-p applies to CSV inputs only");
  return read_cache(path);
}

Label constant_label(const std::string& name) {
  if (name == "+1" || name == "1" || name == "positive") return Label::positive;
  if (name == "-1" || name == "negative") return Label::negative;
  throw UsageError("--classifier must be +1 or -1");
}

int dispatch(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Balanced-risk learning toolkit: synthetic data, k-NN and ERM experiments, bound tables", "balrisk"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_version_flag("--version", "balrisk 1.0");

  unsigned threads = 0;
  std::string config_path;
  std::uint64_t seed = 1;
  std::string out_path;
  std::string svg_path;

  auto common = [&](Options& o, bool with_svg) {
    o.add("config", config_path, "key=value file; flags override its values");
    o.add("threads", threads, "worker threads (0: BRL_THREADS or hardware)");
    o.add("seed", seed, "master seed");
    o.add("out", out_path, "output file (default: standard output)");
    if (with_svg) o.add("svg", svg_path, "also render an SVG figure to this file");
  };

  // gen
  CLI::App* gen = app.add_subcommand("gen", "sample the synthetic Student-t mixture");
  Options gen_o(gen);
  std::size_t gen_n = 1000;
  double gen_a = 0.5;
  std::optional<double> gen_p;
  std::optional<double> gen_trunc;
  std::string gen_format = "auto";
  common(gen_o, false);
  gen_o.add("n", gen_n, "sample size");
  gen_o.add("a", gen_a, "prior exponent: p = n^-a");
  gen_o.add_optional("p", gen_p, "class prior (overrides --a)");
  gen_o.add_optional("truncate", gen_trunc, "reject draws with norm above this radius");
  gen_o.add("format", gen_format, "auto, bin or csv (auto: csv iff the output ends in .csv)")
      ->check(CLI::IsMember({"auto", "bin", "csv"}));

  // knn-heatmap
  CLI::App* hm = app.add_subcommand("knn-heatmap", "balanced k-NN AM risk over a (k, p) grid");
  Options hm_o(hm);
  HeatmapConfig hm_cfg;
  std::string hm_a = "0.25,0.375,0.5,0.625,0.75", hm_b = hm_a;
  common(hm_o, true);
  hm_o.add("n", hm_cfg.n, "training sample size");
  hm_o.add("a-grid", hm_a, "comma-separated prior exponents (p = n^-a)");
  hm_o.add("b-grid", hm_b, "comma-separated neighbor exponents (k = n^b)");
  hm_o.add("reps", hm_cfg.reps, "repetitions per cell");
  hm_o.add("test-queries", hm_cfg.test_queries, "test draws per class");
  hm_o.add("max-redraws", hm_cfg.max_redraws, "redraws allowed when a class is empty");

  // erm-curve
  CLI::App* ec = app.add_subcommand("erm-curve", "excess balanced risk of constrained ERM against n");
  Options ec_o(ec);
  ExcessRiskConfig ec_cfg;
  std::string ec_n = "100,316,1000,3162,10000";
  common(ec_o, true);
  ec_o.add("n-grid", ec_n, "comma-separated increasing sample sizes");
  ec_o.add("a", ec_cfg.a, "prior exponent: p = n^-a");
  ec_o.add("u", ec_cfg.u, "radius of the parameter ball");
  ec_o.add("loss", ec_cfg.loss, "logistic, exponential, squared or squared_hinge");
  ec_o.add("oracle-draws", ec_cfg.oracle_draws, "sample size of the oracle fit");
  ec_o.add("risk-draws", ec_cfg.risk_draws, "risk-evaluation draws per class");
  ec_o.add("reps", ec_cfg.reps, "repetitions per n");
  ec_o.add("max-redraws", ec_cfg.max_redraws, "redraws allowed when a class is empty");
  ec_o.add("risk-eval", ec_cfg.risk_eval, "auto, exact (logistic loss, quadrature) or monte-carlo")
      ->check(CLI::IsMember({"auto", "exact", "monte-carlo"}));

  // bounds
  CLI::App* bd = app.add_subcommand("bounds", "evaluate the rate bounds for one input set or an n grid");
  Options bd_o(bd);
  BoundInputs bin;
  bin.n = 1e6;
  bin.p = 0.01;
  bin.B = 4.0;
  std::optional<double> bd_q;
  std::string bd_n_grid;
  common(bd_o, false);
  bd_o.add("n", bin.n, "sample size");
  bd_o.add("p", bin.p, "class prior");
  bd_o.add_optional("q", bd_q, "weight of the fast-rate deviation (default: p)");
  bd_o.add("v", bin.v, "VC exponent");
  bd_o.add("A", bin.A, "VC constant");
  bd_o.add("U", bin.U, "envelope");
  bd_o.add("sigma-plus", bin.sigma_plus, "positive-class standard deviation bound");
  bd_o.add("sigma-minus", bin.sigma_minus, "negative-class standard deviation bound");
  bd_o.add("B", bin.B, "Bernstein constant");
  bd_o.add("delta", bin.delta, "confidence level");
  bd_o.add("K", bin.K, "fast-rate trade-off constant (> 1)");
  bd_o.add("K-slow", bin.K_slow, "slow-rate universal constant");
  bd_o.add("n-grid", bd_n_grid, "comma-separated sample sizes (overrides --n)");

  // check-identity
  CLI::App* ci = app.add_subcommand("check-identity", "cross-check the excess AM-risk identity by simulation");
  Options ci_o(ci);
  double ci_p = 0.05;
  std::size_t ci_draws = 1000000;
  std::string ci_classifier = "+1";
  double ci_tol = 3.0;
  common(ci_o, false);
  ci_o.add("p", ci_p, "class prior of the mixture");
  ci_o.add("draws", ci_draws, "draws for each estimate");
  ci_o.add("classifier", ci_classifier, "constant classifier, +1 or -1");
  ci_o.add("tolerance", ci_tol, "allowed gap in combined standard errors");

  // knn-predict
  CLI::App* kp = app.add_subcommand("knn-predict", "fit balanced k-NN on a dataset and classify query rows");
  Options kp_o(kp);
  std::string kp_train, kp_query, kp_method = "auto";
  std::size_t kp_k = 1;
  CsvOptions kp_csv;
  common(kp_o, false);
  kp_o.add("train", kp_train, "training data: .csv or binary cache")->required();
  kp_o.add("query", kp_query, "query CSV of feature rows")->required();
  kp_o.add("k", kp_k, "number of neighbors")->required();
  kp_o.add("method", kp_method, "auto, brute or kdtree")->check(CLI::IsMember({"auto", "brute", "kdtree"}));
  kp_csv.add_to(kp_o);

  // Config-file values go in front of the command-line flags so that the
  // last occurrence (the flag) wins.
  std::vector<std::string> args = raw_args;
  if (auto cfg_path = find_config_path(args)) {
    auto sub_it = std::find_if(args.begin(), args.end(), [&](const std::string& a) {
      return app.get_subcommand_no_throw(a) != nullptr;
    });
    if (sub_it == args.end()) throw UsageError("--config needs a subcommand");
    CLI::App* sub = app.get_subcommand(*sub_it);
    std::vector<std::string> injected;
    for (const auto& [key, value] : read_config(*cfg_path)) {
      if (key == "config" || sub->get_option_no_throw("--" + key) == nullptr) {
        throw UsageError("unknown config key '" + key + "' for " + sub->get_name());
      }
      CLI::Option* opt = sub->get_option("--" + key);
      if (opt->get_expected_min() == 0) {
        if (value == "true" || value == "1") injected.push_back("--" + key);
        else if (value != "false" && value != "0") throw UsageError("config key '" + key + "' expects true or false");
      } else {
        injected.push_back("--" + key + "=" + value);
      }
    }
    args.insert(sub_it + 1, injected.begin(), injected.end());
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (threads > 0) set_default_threads(threads);

  if (gen->parsed()) {
    double p = gen_p ? *gen_p : std::pow(static_cast<double>(gen_n), -gen_a);
    if (out_path.empty()) throw UsageError("gen needs --out");
    StudentMixture mix(StudentMixtureParams::reference(p), gen_trunc);
    if (gen_n < 1) throw UsageError("--n must be at least 1");
    LabeledDataset data = mix.draw_labeled(gen_n, seed);
    bool csv = gen_format == "csv" || (gen_format == "auto" && has_extension(out_path, ".csv"));
    if (csv) {
      std::ostringstream ss;
      write_dataset_csv(ss, data);
      write_text(out_path, ss.str());
    } else {
      write_cache(out_path, data);
    }
    err << "wrote " << data.size() << " rows (" << data.count_positive() << " positive, p=" << format_double(p)
        << ") to " << out_path << '\n';
    return kExitOk;
  }

  if (hm->parsed()) {
    hm_cfg.a_grid = parse_real_list(hm_a, "a-grid");
    hm_cfg.b_grid = parse_real_list(hm_b, "b-grid");
    hm_cfg.seed = seed;
    ResultTable t = run_knn_heatmap(hm_cfg);
    add_echo(t, hm_o, "knn-heatmap");
    emit(t.to_csv(), out_path, out);
    if (!svg_path.empty()) write_text(svg_path, heatmap_svg(t));
    return kExitOk;
  }

  if (ec->parsed()) {
    ec_cfg.n_grid = parse_size_list(ec_n, "n-grid");
    ec_cfg.seed = seed;
    ResultTable t = run_erm_excess_curve(ec_cfg);
    add_echo(t, ec_o, "erm-curve");
    emit(t.to_csv(), out_path, out);
    if (!svg_path.empty()) write_text(svg_path, excess_curve_svg(t));
    return kExitOk;
  }

  if (bd->parsed()) {
    std::vector<BoundInputs> inputs;
    std::vector<double> ns = bd_n_grid.empty() ? std::vector<double>{bin.n} : parse_real_list(bd_n_grid, "n-grid");
    for (double n : ns) {
      BoundInputs in = bin;
      in.n = n;
      in.q = bd_q ? *bd_q : in.p;
      inputs.push_back(in);
    }
    ResultTable t = run_bound_report(inputs, ConstantTable::compute());
    add_echo(t, bd_o, "bounds");
    for (std::size_t r = 0; r < t.size(); ++r) {
      if (t.text(r, "small_log_argument") == "true") {
        err << "warning: " << t.text(r, "bound") << " at n=" << t.text(r, "n")
            << " has a log argument below e; evaluated verbatim\n";
      }
    }
    emit(t.to_csv(), out_path, out);
    return kExitOk;
  }

  if (ci->parsed()) {
    StudentMixture mix(StudentMixtureParams::reference(ci_p));
    BayesOracle oracle{[&mix](std::span<const double> x) { return mix.eta(x); }, ci_p};
    Label c = constant_label(ci_classifier);
    Classifier g = [c](std::span<const double>) { return c; };
    MonteCarloEstimate id = excess_am_risk_identity(oracle, g, mix, ci_draws, derive_seed(seed, {1}));
    MonteCarloEstimate direct = direct_excess_am_risk(oracle, g, mix, ci_draws, derive_seed(seed, {2}));
    double combined = std::sqrt(id.std_error * id.std_error + direct.std_error * direct.std_error);
    double z = combined > 0.0 ? std::abs(id.value - direct.value) / combined : 0.0;
    bool agree = z <= ci_tol;
    ResultTable t({"estimate", "value", "std_error"});
    add_echo(t, ci_o, "check-identity");
    t.add_row({std::string("identity"), id.value, id.std_error});
    t.add_row({std::string("direct"), direct.value, direct.std_error});
    t.add_row({std::string("gap_in_std_errors"), z, 0.0});
    emit(t.to_csv(), out_path, out);
    if (!agree) {
      err << "identity check failed: estimates differ by " << format_double(z) << " combined standard errors\n";
      return kExitNumeric;
    }
    return kExitOk;
  }

  if (kp->parsed()) {
    LabeledDataset train = load_dataset(kp_train, kp_csv, seed);
    std::size_t dim = 0;
    std::string delim = kp_csv.delimiter;
    std::vector<double> queries = parse_feature_rows(read_file(kp_query), delim.empty() ? ',' : delim[0], dim);
    if (!queries.empty() && dim != train.dim()) {
      throw SchemaError("query rows have " + std::to_string(dim) + " features, training data has " +
                        std::to_string(train.dim()));
    }
    SearchMethod method = kp_method == "brute"    ? SearchMethod::brute_force
                          : kp_method == "kdtree" ? SearchMethod::kd_tree
                                                  : SearchMethod::automatic;
    KnnModel model(std::move(train), kp_k, method);
    std::vector<Label> labels = model.classify_batch(queries);
    ResultTable t({"prediction"});
    add_echo(t, kp_o, "knn-predict");
    for (Label l : labels) t.add_row({static_cast<std::int64_t>(sign(l))});
    emit(t.to_csv(), out_path, out);
    return kExitOk;
  }
  return kExitUsage;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
}

}  // namespace balrisk
