#include "bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "grouping.hpp"
#include "rng.hpp"

namespace catgp::bench {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

double rrmse(const VectorXd& y_true, const VectorXd& y_pred) {
  if (y_true.size() != y_pred.size() || y_true.size() == 0)
    throw std::invalid_argument("rrmse: vectors must have equal nonzero length");
  const double ybar = y_true.mean();
  const double denom = (y_true.array() - ybar).square().sum();
  if (denom <= 0.0) throw std::invalid_argument("rrmse: constant y_true");
  return std::sqrt((y_true - y_pred).squaredNorm() / denom);
}

double dataset_quantile(std::vector<double> scores, double tau) {
  if (scores.empty()) throw std::invalid_argument("dataset_quantile: empty multiset");
  if (!(tau > 0.0) || tau > 1.0) throw std::invalid_argument("dataset_quantile: tau in (0,1]");
  std::sort(scores.begin(), scores.end());
  const auto n = static_cast<double>(scores.size());
  const auto k = static_cast<std::size_t>(std::ceil(tau * n));
  return scores[std::min(k, scores.size()) - 1];
}

std::vector<double> tau_grid() {
  std::vector<double> grid(100);
  for (int g = 0; g < 100; ++g) grid[static_cast<std::size_t>(g)] = (g + 1) / 100.0;
  return grid;
}

namespace {

struct ScoreTable {
  std::vector<std::string> methods;                    // first-appearance order
  std::vector<std::string> dataset_keys;               // name#train_size
  // per method: list of (dataset index, score), finite scores only
  std::vector<std::vector<std::pair<int, double>>> finite_scores;
  std::vector<std::vector<double>> per_dataset;        // finite scores per dataset
};

double metric_score(const ExperimentRecord& r, Metric m) {
  if (m == Metric::Rrmse) return r.rrmse;
  return (r.status == "ok") ? r.fit_seconds : kInf;
}

ScoreTable build_table(const std::vector<ExperimentRecord>& records, Metric metric) {
  ScoreTable t;
  std::map<std::string, int> m_index, d_index;
  for (const auto& r : records) {
    if (m_index.emplace(r.method, static_cast<int>(t.methods.size())).second) {
      t.methods.push_back(r.method);
      t.finite_scores.emplace_back();
    }
    const std::string dkey = r.dataset + "#" + std::to_string(r.train_size);
    if (d_index.emplace(dkey, static_cast<int>(t.dataset_keys.size())).second) {
      t.dataset_keys.push_back(dkey);
      t.per_dataset.emplace_back();
    }
    const double s = metric_score(r, metric);
    if (std::isfinite(s)) {
      const int mi = m_index[r.method];
      const int di = d_index[dkey];
      t.finite_scores[static_cast<std::size_t>(mi)].emplace_back(di, s);
      t.per_dataset[static_cast<std::size_t>(di)].push_back(s);
    }
  }
  return t;
}

// Per-(dataset, replicate) paired scores of two methods; both finite.
std::vector<std::pair<double, double>> paired_scores(const std::vector<ExperimentRecord>& records,
                                                     Metric metric, const std::string& a,
                                                     const std::string& b) {
  std::map<std::string, std::pair<double, double>> cells;
  for (const auto& r : records) {
    if (r.method != a && r.method != b) continue;
    const double s = metric_score(r, metric);
    const std::string key =
        r.dataset + "#" + std::to_string(r.train_size) + "#" + std::to_string(r.replicate);
    auto& cell = cells.try_emplace(key, kInf, kInf).first->second;
    (r.method == a ? cell.first : cell.second) = s;
  }
  std::vector<std::pair<double, double>> out;
  for (const auto& [key, cell] : cells)
    if (std::isfinite(cell.first) && std::isfinite(cell.second)) out.push_back(cell);
  return out;
}

}  // namespace

std::vector<PerformanceProfile> performance_profiles(const std::vector<ExperimentRecord>& records,
                                                     Metric metric) {
  const ScoreTable t = build_table(records, metric);
  const std::vector<double> grid = tau_grid();

  // q_{j,tau} for every dataset and grid point.
  std::vector<std::vector<double>> quantiles(t.dataset_keys.size());
  for (std::size_t d = 0; d < t.dataset_keys.size(); ++d) {
    std::vector<double> sorted = t.per_dataset[d];
    std::sort(sorted.begin(), sorted.end());
    quantiles[d].resize(grid.size(), kInf);
    if (sorted.empty()) continue;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const auto k = static_cast<std::size_t>(
          std::ceil(grid[g] * static_cast<double>(sorted.size())));
      quantiles[d][g] = sorted[std::min(k, sorted.size()) - 1];
    }
  }

  std::vector<PerformanceProfile> profiles;
  for (std::size_t m = 0; m < t.methods.size(); ++m) {
    PerformanceProfile prof;
    prof.method = t.methods[m];
    prof.p.assign(grid.size(), 0.0);
    const auto& scores = t.finite_scores[m];
    if (!scores.empty()) {
      for (std::size_t g = 0; g < grid.size(); ++g) {
        int count = 0;
        for (const auto& [d, s] : scores)
          if (s <= quantiles[static_cast<std::size_t>(d)][g]) ++count;
        prof.p[g] = static_cast<double>(count) / static_cast<double>(scores.size());
      }
    }
    double auc = 0.0;
    for (std::size_t g = 0; g + 1 < grid.size(); ++g)
      auc += 0.5 * (prof.p[g] + prof.p[g + 1]) * (grid[g + 1] - grid[g]);
    prof.auc = auc;
    profiles.push_back(std::move(prof));
  }
  std::sort(profiles.begin(), profiles.end(), [](const auto& a, const auto& b) {
    if (a.auc != b.auc) return a.auc > b.auc;
    return a.method < b.method;
  });

  // Legend grouping: AUC-adjacent methods stay in one group unless a
  // one-sided signed-rank test separates them at the 5% level.
  int group = 0;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    if (i > 0) {
      const auto pairs = paired_scores(records, metric, profiles[i - 1].method, profiles[i].method);
      bool different = false;
      if (pairs.size() >= 5) {
        std::vector<double> a, b;
        for (const auto& [x, y] : pairs) {
          a.push_back(x);
          b.push_back(y);
        }
        different = wilcoxon_one_sided(a, b).p_value < 0.05;
      }
      if (different) ++group;
    }
    profiles[i].wilcoxon_group = group;
  }
  return profiles;
}

WilcoxonResult wilcoxon_one_sided(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("wilcoxon: length mismatch");
  if (a.size() < 5) throw std::invalid_argument("wilcoxon: needs at least 5 pairs");
  std::vector<double> diffs;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (d != 0.0) diffs.push_back(d);
  }
  WilcoxonResult res;
  res.n_nonzero = static_cast<int>(diffs.size());
  if (diffs.empty()) {
    res.all_ties = true;
    res.p_value = 1.0;
    return res;
  }
  const int n = res.n_nonzero;

  // Average ranks of |d|, doubled so ties stay integral.
  std::vector<int> order(diffs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    return std::abs(diffs[static_cast<std::size_t>(i)]) <
           std::abs(diffs[static_cast<std::size_t>(j)]);
  });
  std::vector<long long> rank2(diffs.size());
  std::vector<double> tie_sizes;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() &&
           std::abs(diffs[static_cast<std::size_t>(order[j])]) ==
               std::abs(diffs[static_cast<std::size_t>(order[i])]))
      ++j;
    const long long sum2 = static_cast<long long>(i + 1 + j) * static_cast<long long>(j - i);
    const long long avg2 = sum2 / static_cast<long long>(j - i);  // 2*(average rank)
    for (std::size_t k = i; k < j; ++k) rank2[static_cast<std::size_t>(order[k])] = avg2;
    if (j - i > 1) tie_sizes.push_back(static_cast<double>(j - i));
    i = j;
  }

  long long w2_plus = 0;
  for (std::size_t i = 0; i < diffs.size(); ++i)
    if (diffs[i] > 0.0) w2_plus += rank2[i];
  res.statistic = static_cast<double>(w2_plus) / 2.0;

  if (n <= 25) {
    // Exact: subset-sum counting over the doubled ranks (2^n sign vectors).
    const long long max_sum = static_cast<long long>(n) * (n + 1);
    std::vector<double> ways(static_cast<std::size_t>(max_sum) + 1, 0.0);
    ways[0] = 1.0;
    for (std::size_t i = 0; i < diffs.size(); ++i)
      for (long long s = max_sum - rank2[i]; s >= 0; --s)
        if (ways[static_cast<std::size_t>(s)] > 0.0)
          ways[static_cast<std::size_t>(s + rank2[i])] += ways[static_cast<std::size_t>(s)];
    double below = 0.0;
    for (long long s = 0; s <= w2_plus; ++s) below += ways[static_cast<std::size_t>(s)];
    res.p_value = below / std::pow(2.0, n);
  } else {
    const double w_plus = res.statistic;
    const double mean = n * (n + 1) / 4.0;
    double var = n * (n + 1) * (2.0 * n + 1) / 24.0;
    for (double tsize : tie_sizes) var -= (tsize * tsize * tsize - tsize) / 48.0;
    const double z = (w_plus + 0.5 - mean) / std::sqrt(var);
    res.p_value = normal_cdf(z);
  }
  return res;
}

std::vector<ParetoPoint> pareto_points(const std::vector<ExperimentRecord>& records) {
  const auto by_rrmse = performance_profiles(records, Metric::Rrmse);
  const auto by_time = performance_profiles(records, Metric::FitSeconds);
  std::map<std::string, double> time_auc;
  for (const auto& p : by_time) time_auc[p.method] = p.auc;

  std::vector<ParetoPoint> points;
  for (const auto& p : by_rrmse) {
    ParetoPoint pt;
    pt.method = p.method;
    pt.auc_rrmse = p.auc;
    pt.auc_time = time_auc.count(p.method) ? time_auc[p.method] : 0.0;
    points.push_back(pt);
  }
  for (auto& pt : points) {
    bool dominated = false;
    for (const auto& other : points) {
      if (&other == &pt) continue;
      if (other.auc_time >= pt.auc_time && other.auc_rrmse >= pt.auc_rrmse &&
          (other.auc_time > pt.auc_time || other.auc_rrmse > pt.auc_rrmse)) {
        dominated = true;
        break;
      }
    }
    pt.on_front = !dominated;
  }
  return points;
}

// ---- configuration ----------------------------------------------------------

void SuiteConfig::validate() const {
  if (replicates < 1) throw std::invalid_argument("config: replicates must be >= 1");
  if (jobs < 1) throw std::invalid_argument("config: jobs must be >= 1");
  if (n_restarts < 1) throw std::invalid_argument("config: restarts must be >= 1");
  if (dataset_names.empty()) throw std::invalid_argument("config: no datasets listed");
  if (sizes.empty()) throw std::invalid_argument("config: no sizes listed");
  if (methods.empty()) throw std::invalid_argument("config: no methods listed");
  for (const auto& name : dataset_names) datasets::problem_from_name(name);
  for (const auto& name : methods) parse_method(name);
  for (int s : sizes)
    if (s < 1) throw std::invalid_argument("config: sizes must be positive");
}

std::vector<std::string> known_methods() {
  return {"Ho",           "Ho_NC",        "He",           "He_NC",
          "Ho_2",         "Ho_3",         "EHH",          "LVGP",
          "CS",           "one_hot",      "no_cat",       "Nested_CS_He",
          "Nested_He_He", "Nested_Ho_CS", "Nested_CS_CS", "Nested_CS_He_MSD",
          "Nested_He_He_MSD", "Nested_Ho_CS_MSD", "Nested_CS_CS_MSD",
          "Nested_CS_He_LV", "Nested_He_He_LV", "Nested_Ho_CS_LV", "Nested_CS_CS_LV"};
}

SuiteConfig default_suite_config() {
  SuiteConfig c;
  c.dataset_names = datasets::problem_names();
  c.sizes = {3, 6, 9, 12, 15};
  c.methods = known_methods();
  return c;
}

SuiteConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  SuiteConfig c = default_suite_config();
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error("config line " + std::to_string(line_no) + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "suite" && section != "optimizer" && section != "datasets" &&
          section != "methods")
        throw std::runtime_error("config: unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section == "suite") {
      if (key == "replicates") c.replicates = std::stoi(value);
      else if (key == "records") c.records_name = value;
      else if (key == "jobs") c.jobs = std::stoi(value);
      else throw std::runtime_error("config: unknown key '" + key + "' in [suite]");
    } else if (section == "optimizer") {
      if (key == "mode") c.mode = optimize::mode_from_name(value);
      else if (key == "restarts") c.n_restarts = std::stoi(value);
      else if (key == "max_fun_evals") c.max_fun_evals = std::stoi(value);
      else if (key == "max_iters") c.max_iters = std::stoi(value);
      else if (key == "tolerance") c.tolerance = std::stod(value);
      else throw std::runtime_error("config: unknown key '" + key + "' in [optimizer]");
    } else if (section == "datasets") {
      if (key == "names") c.dataset_names = split_list(value);
      else if (key == "sizes") {
        c.sizes.clear();
        for (const auto& tok : split_list(value)) c.sizes.push_back(std::stoi(tok));
      } else throw std::runtime_error("config: unknown key '" + key + "' in [datasets]");
    } else if (section == "methods") {
      if (key == "names") c.methods = split_list(value);
      else throw std::runtime_error("config: unknown key '" + key + "' in [methods]");
    } else {
      throw std::runtime_error("config: key outside any section at line " + std::to_string(line_no));
    }
  }
  c.validate();
  return c;
}

// ---- methods ----------------------------------------------------------------

MethodSpec parse_method(const std::string& name) {
  MethodSpec m;
  m.name = name;
  if (name == "no_cat") {
    m.no_cat = true;
    return m;
  }
  if (name.rfind("Nested_", 0) == 0) {
    m.nested = true;
    std::string rest = name.substr(7);
    if (rest.size() > 4 && rest.substr(rest.size() - 4) == "_MSD") {
      m.groups = MethodSpec::Groups::MSD;
      rest = rest.substr(0, rest.size() - 4);
    } else if (rest.size() > 3 && rest.substr(rest.size() - 3) == "_LV") {
      m.groups = MethodSpec::Groups::LV;
      rest = rest.substr(0, rest.size() - 3);
    }
    const auto us = rest.find('_');
    if (us == std::string::npos)
      throw std::invalid_argument("method: nested kernels are Nested_<between>_<within>: " + name);
    const std::string between = rest.substr(0, us);
    const std::string within = rest.substr(us + 1);
    // The published Nested_Ho_CS carries gamma(gamma+3)/2 parameters, i.e.
    // a radius per group; the between block is built heteroscedastic.
    if (between == "CS") m.between = kernels::BlockKind::CS;
    else if (between == "Ho" || between == "He") m.between = kernels::BlockKind::He;
    else throw std::invalid_argument("method: unknown between structure in " + name);
    if (within == "CS") m.within = kernels::BlockKind::CS;
    else if (within == "He") m.within = kernels::BlockKind::He;
    else throw std::invalid_argument("method: unknown within structure in " + name);
    return m;
  }
  if (name == "Ho_2" || name == "Ho_3") {
    m.family = kernels::Family::HoLowRank;
    m.rank = (name == "Ho_2") ? 2 : 3;
    return m;
  }
  if (name == "LVGP") {
    m.family = kernels::Family::LVGP;
    m.rank = 2;
    return m;
  }
  m.family = kernels::family_from_name(name);
  return m;
}

bool method_applicable(const MethodSpec& method, const datasets::ProblemInfo& info) {
  std::vector<int> counts = info.level_counts;
  if (info.merged) {
    int total = 1;
    for (int c : info.level_counts) total *= c;
    counts = {total};
  }
  if (method.no_cat) return info.cont_dims >= 1;
  if (method.nested) {
    if (method.groups == MethodSpec::Groups::True) return info.has_known_groups;
    for (int c : counts)
      if (c < 3) return false;  // silhouette selection needs 2..C-1 clusters
    return true;
  }
  if (method.family == kernels::Family::LVGP || method.family == kernels::Family::HoLowRank) {
    for (int c : counts)
      if (c <= method.rank) return false;
  }
  return true;
}

gp::GpConfig build_config(const MethodSpec& method, const std::vector<int>& level_counts,
                          const std::vector<GroupPartition>& partitions) {
  gp::GpConfig config;
  if (method.no_cat) return config;
  for (std::size_t v = 0; v < level_counts.size(); ++v) {
    kernels::KernelSpec spec;
    spec.levels = level_counts[v];
    if (method.nested) {
      spec.family = kernels::Family::Nested;
      spec.between = method.between;
      spec.within = method.within;
      if (v >= partitions.size())
        throw std::invalid_argument("build_config: nested method needs one partition per variable");
      spec.partition = partitions[v];
    } else {
      spec.family = method.family;
      spec.rank = method.rank;
    }
    spec.validate();
    config.cat_kernels.push_back(std::move(spec));
  }
  return config;
}

// ---- records I/O ------------------------------------------------------------

std::string record_to_csv(const ExperimentRecord& r) {
  std::string status = r.status;
  std::replace(status.begin(), status.end(), ',', ';');
  std::ostringstream out;
  out << r.method << ',' << r.dataset << ',' << r.train_size << ',' << r.replicate << ','
      << fmt(r.rrmse) << ',' << fmt(r.fit_seconds) << ',' << r.n_params << ',' << r.opt_mode << ','
      << status;
  return out.str();
}

std::vector<ExperimentRecord> read_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open records: " + path);
  std::string line;
  if (!std::getline(in, line)) return {};
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kRecordsHeader)
    throw std::runtime_error("records CSV header mismatch in " + path);
  std::vector<ExperimentRecord> out;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    std::vector<std::string> cols;
    while (std::getline(ss, tok, ',')) cols.push_back(tok);
    if (cols.size() != 9) throw std::runtime_error("ragged records row in " + path);
    ExperimentRecord r;
    r.method = cols[0];
    r.dataset = cols[1];
    r.train_size = std::stoi(cols[2]);
    r.replicate = std::stoi(cols[3]);
    r.rrmse = std::strtod(cols[4].c_str(), nullptr);
    r.fit_seconds = std::strtod(cols[5].c_str(), nullptr);
    r.n_params = std::stoi(cols[6]);
    r.opt_mode = cols[7];
    r.status = cols[8];
    out.push_back(std::move(r));
  }
  return out;
}

void write_records(const std::string& path, const std::vector<ExperimentRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << kRecordsHeader << '\n';
  for (const auto& r : records) out << record_to_csv(r) << '\n';
}

// ---- running ----------------------------------------------------------------

std::uint64_t method_seed(std::uint64_t replicate_seed, const std::string& method) {
  return mix_seed(replicate_seed, fnv1a(method));
}

SingleFitResult run_single(const SuiteConfig& config, const MethodSpec& method,
                           datasets::Problem problem, int samples_per_level, int replicate) {
  const datasets::ProblemInfo& info = datasets::problem_info(problem);
  const std::uint64_t base =
      config.base_seed_override ? *config.base_seed_override : datasets::base_seed(problem);
  datasets::DatasetSpec spec;
  spec.problem = problem;
  spec.samples_per_level = samples_per_level;
  spec.seed = base + static_cast<std::uint64_t>(replicate);

  SingleFitResult result;
  ExperimentRecord& rec = result.record;
  rec.method = method.name;
  rec.dataset = datasets::problem_name(problem);
  rec.replicate = replicate;
  rec.opt_mode = optimize::mode_name(config.mode);
  int n_tuples = 1;
  for (int c : info.level_counts) n_tuples *= c;
  rec.train_size = samples_per_level * n_tuples;

  if (!method_applicable(method, info)) {
    rec.rrmse = kInf;
    rec.status = "inapplicable";
    return result;
  }

  try {
    auto [train, test] = datasets::generate_replicate(spec);

    if (method.nested) {
      switch (method.groups) {
        case MethodSpec::Groups::True:
          if (train.cat_dims() != 1)
            throw std::runtime_error("true groups are only tabulated for single-variable datasets");
          result.partitions = {info.true_groups};
          break;
        case MethodSpec::Groups::MSD:
          for (int v = 0; v < train.cat_dims(); ++v)
            result.partitions.push_back(
                grouping::groups_from_msd(train.Z.col(v), train.y,
                                          train.level_counts[static_cast<std::size_t>(v)])
                    .partition);
          break;
        case MethodSpec::Groups::LV: {
          // Proxy LVGP fit; its cost is deliberately not part of fit_seconds.
          const MethodSpec proxy = parse_method("LVGP");
          const gp::GpConfig proxy_config = build_config(proxy, train.level_counts);
          gp::FitOptions proxy_options{config.mode, config.n_restarts, config.max_fun_evals,
                                       config.max_iters, config.tolerance};
          const gp::TrainedGp proxy_model =
              gp::fit(train, proxy_config, proxy_options,
                      method_seed(spec.seed, "LVGP-proxy:" + method.name));
          for (int v = 0; v < train.cat_dims(); ++v) {
            const auto [offset, count] = proxy_model.layout().cat[static_cast<std::size_t>(v)];
            const MatrixXd latents = kernels::lvgp_embed(
                proxy_model.params().segment(offset, count),
                train.level_counts[static_cast<std::size_t>(v)], 2);
            result.partitions.push_back(grouping::groups_from_latent(latents).partition);
          }
          break;
        }
      }
    }

    const gp::GpConfig gp_config = build_config(method, train.level_counts, result.partitions);
    gp::FitOptions options{config.mode, config.n_restarts, config.max_fun_evals, config.max_iters,
                           config.tolerance};
    const gp::TrainedGp model =
        gp::fit(train, gp_config, options, method_seed(spec.seed, method.name));
    rec.rrmse = model.rrmse_on(test);
    rec.fit_seconds = model.info().cpu_seconds;
    rec.n_params = model.param_dim();
    rec.status = "ok";
  } catch (const std::exception& err) {
    rec.rrmse = kInf;
    rec.status = std::string("failed:") + err.what();
  }
  return result;
}

std::vector<ExperimentRecord> run_suite(const SuiteConfig& config, const std::string& out_dir,
                                        const std::function<void(const ExperimentRecord&)>&
                                            on_record) {
  config.validate();
  std::filesystem::create_directories(out_dir);
  const std::string records_path = out_dir + "/" + config.records_name;

  const bool had_records =
      std::filesystem::exists(records_path) && std::filesystem::file_size(records_path) > 0;
  std::vector<ExperimentRecord> existing;
  if (had_records) existing = read_records(records_path);
  std::set<std::string> done;
  auto key_of = [](const ExperimentRecord& r) {
    return r.method + "|" + r.dataset + "|" + std::to_string(r.train_size) + "|" +
           std::to_string(r.replicate) + "|" + r.opt_mode;
  };
  for (const auto& r : existing) done.insert(key_of(r));

  struct Task {
    MethodSpec method;
    datasets::Problem problem;
    int samples_per_level;
    int replicate;
  };
  std::vector<Task> tasks;
  for (const auto& dname : config.dataset_names) {
    const datasets::Problem problem = datasets::problem_from_name(dname);
    const datasets::ProblemInfo& info = datasets::problem_info(problem);
    for (int spl : config.sizes) {
      const auto& allowed = info.allowed_samples_per_level;
      if (std::find(allowed.begin(), allowed.end(), spl) == allowed.end()) continue;
      int n_tuples = 1;
      for (int c : info.level_counts) n_tuples *= c;
      for (const auto& mname : config.methods) {
        const MethodSpec method = parse_method(mname);
        for (int k = 0; k < config.replicates; ++k) {
          ExperimentRecord probe;
          probe.method = mname;
          probe.dataset = datasets::problem_name(problem);
          probe.train_size = spl * n_tuples;
          probe.replicate = k;
          probe.opt_mode = optimize::mode_name(config.mode);
          if (done.count(key_of(probe))) continue;
          tasks.push_back({method, problem, spl, k});
        }
      }
    }
  }

  std::ofstream sink(records_path, std::ios::app);
  if (!sink) throw std::runtime_error("cannot open for append: " + records_path);
  if (!had_records) {
    sink << kRecordsHeader << '\n';
    sink.flush();
  }

  std::mutex sink_mutex;
  std::vector<ExperimentRecord> fresh;
  std::atomic<std::size_t> next{0};
  const int n_workers = std::max(1, std::min<int>(config.jobs, static_cast<int>(tasks.size())));
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& task = tasks[i];
      const SingleFitResult result =
          run_single(config, task.method, task.problem, task.samples_per_level, task.replicate);
      std::lock_guard<std::mutex> lock(sink_mutex);
      sink << record_to_csv(result.record) << '\n';
      sink.flush();
      fresh.push_back(result.record);
      if (on_record) on_record(result.record);
    }
  };
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<ExperimentRecord> all = existing;
  all.insert(all.end(), fresh.begin(), fresh.end());
  emit_aggregates(all, out_dir);
  return all;
}

// ---- aggregates & SVG -------------------------------------------------------

namespace {

std::string color_for(int index) {
  // Golden-angle hue walk, fixed saturation/lightness.
  const double h = std::fmod(index * 137.508, 360.0);
  const double s = 0.65, l = 0.45;
  const double c = (1.0 - std::abs(2.0 * l - 1.0)) * s;
  const double hp = h / 60.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  if (hp < 1) { r = c; g = x; }
  else if (hp < 2) { r = x; g = c; }
  else if (hp < 3) { g = c; b = x; }
  else if (hp < 4) { g = x; b = c; }
  else if (hp < 5) { r = x; b = c; }
  else { r = c; b = x; }
  const double m = l - c / 2.0;
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", static_cast<int>((r + m) * 255),
                static_cast<int>((g + m) * 255), static_cast<int>((b + m) * 255));
  return buf;
}

void write_profiles_svg(const std::vector<PerformanceProfile>& profiles, const std::string& path,
                        const std::string& y_label) {
  const int width = 860, height = 520;
  const double x0 = 60, y0 = 470, x1 = 620, y1 = 40;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y0
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\"" << y1
      << "\" stroke=\"black\"/>\n";
  for (int tick = 0; tick <= 5; ++tick) {
    const double f = tick / 5.0;
    const double px = x0 + f * (x1 - x0);
    const double py = y0 - f * (y0 - y1);
    out << "<text x=\"" << px - 8 << "\" y=\"" << y0 + 16 << "\" font-size=\"11\">" << f
        << "</text>\n";
    out << "<text x=\"" << x0 - 32 << "\" y=\"" << py + 4 << "\" font-size=\"11\">" << f
        << "</text>\n";
  }
  out << "<text x=\"" << (x0 + x1) / 2 - 10 << "\" y=\"" << y0 + 34
      << "\" font-size=\"12\">tau</text>\n";
  out << "<text x=\"12\" y=\"" << (y0 + y1) / 2 << "\" font-size=\"12\" transform=\"rotate(-90 12 "
      << (y0 + y1) / 2 << ")\">" << y_label << "</text>\n";
  const std::vector<double> grid = tau_grid();
  int idx = 0;
  for (const auto& prof : profiles) {
    out << "<polyline fill=\"none\" stroke=\"" << color_for(idx) << "\" stroke-width=\"1.5\" points=\"";
    out << x0 << ',' << y0 << ' ';  // p(0) = 0 by convention
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const double px = x0 + grid[g] * (x1 - x0);
      const double py = y0 - prof.p[g] * (y0 - y1);
      out << px << ',' << py << ' ';
    }
    out << "\"/>\n";
    const double ly = y1 + 14 * (idx + 1);
    out << "<line x1=\"" << x1 + 16 << "\" y1=\"" << ly - 4 << "\" x2=\"" << x1 + 34 << "\" y2=\""
        << ly - 4 << "\" stroke=\"" << color_for(idx) << "\" stroke-width=\"2\"/>\n";
    char auc[32];
    std::snprintf(auc, sizeof(auc), "%.3f", prof.auc);
    out << "<text x=\"" << x1 + 40 << "\" y=\"" << ly << "\" font-size=\"11\">" << prof.method
        << " (" << auc << ") [g" << prof.wilcoxon_group << "]</text>\n";
    ++idx;
  }
  out << "</svg>\n";
}

void write_pareto_svg(const std::vector<ParetoPoint>& points, const std::string& path) {
  const int width = 720, height = 540;
  const double x0 = 70, y0 = 480, x1 = 680, y1 = 40;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y0
      << "\" stroke=\"black\"/>\n<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0
      << "\" y2=\"" << y1 << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << (x0 + x1) / 2 - 40 << "\" y=\"" << y0 + 30
      << "\" font-size=\"12\">AUC (RRMSE)</text>\n";
  out << "<text x=\"14\" y=\"" << (y0 + y1) / 2 << "\" font-size=\"12\" transform=\"rotate(-90 14 "
      << (y0 + y1) / 2 << ")\">AUC (time)</text>\n";
  auto px = [&](double v) { return x0 + v * (x1 - x0); };
  auto py = [&](double v) { return y0 - v * (y0 - y1); };
  std::vector<const ParetoPoint*> front;
  for (const auto& p : points)
    if (p.on_front) front.push_back(&p);
  std::sort(front.begin(), front.end(),
            [](const ParetoPoint* a, const ParetoPoint* b) { return a->auc_rrmse < b->auc_rrmse; });
  if (front.size() > 1) {
    out << "<polyline fill=\"none\" stroke=\"#999999\" stroke-dasharray=\"5,4\" points=\"";
    for (const auto* p : front) out << px(p->auc_rrmse) << ',' << py(p->auc_time) << ' ';
    out << "\"/>\n";
  }
  int idx = 0;
  for (const auto& p : points) {
    out << "<circle cx=\"" << px(p.auc_rrmse) << "\" cy=\"" << py(p.auc_time) << "\" r=\""
        << (p.on_front ? 5 : 3.5) << "\" fill=\"" << color_for(idx) << "\"/>\n";
    out << "<text x=\"" << px(p.auc_rrmse) + 6 << "\" y=\"" << py(p.auc_time) - 4
        << "\" font-size=\"10\">" << p.method << "</text>\n";
    ++idx;
  }
  out << "</svg>\n";
}

}  // namespace

void emit_aggregates(const std::vector<ExperimentRecord>& records, const std::string& out_dir) {
  if (records.empty()) return;
  std::filesystem::create_directories(out_dir);
  const auto profiles = performance_profiles(records, Metric::Rrmse);
  const std::vector<double> grid = tau_grid();
  {
    std::ofstream out(out_dir + "/profiles.csv");
    if (!out) throw std::runtime_error("cannot write profiles.csv");
    out << "method,tau,p\n";
    for (const auto& prof : profiles)
      for (std::size_t g = 0; g < grid.size(); ++g)
        out << prof.method << ',' << fmt(grid[g]) << ',' << fmt(prof.p[g]) << '\n';
  }
  {
    std::ofstream out(out_dir + "/auc.csv");
    if (!out) throw std::runtime_error("cannot write auc.csv");
    out << "method,auc,wilcoxon_group\n";
    for (const auto& prof : profiles)
      out << prof.method << ',' << fmt(prof.auc) << ',' << prof.wilcoxon_group << '\n';
  }
  write_profiles_svg(profiles, out_dir + "/profiles.svg", "p(tau)");

  const auto pareto = pareto_points(records);
  {
    std::ofstream out(out_dir + "/pareto.csv");
    if (!out) throw std::runtime_error("cannot write pareto.csv");
    out << "method,auc_time,auc_rrmse,on_front\n";
    for (const auto& p : pareto)
      out << p.method << ',' << fmt(p.auc_time) << ',' << fmt(p.auc_rrmse) << ','
          << (p.on_front ? 1 : 0) << '\n';
  }
  write_pareto_svg(pareto, out_dir + "/pareto.svg");
}

}  // namespace catgp::bench
