// catgp command-line tool. Talks to the library exclusively through the
// C API in catgp.h; every subcommand is a thin adapter around one or two
// library calls.

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "catgp.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

int report(catgp_status status) {
  if (status == CATGP_OK) return kExitOk;
  std::fprintf(stderr, "catgp: %s\n", catgp_last_error());
  return status == CATGP_ERR_INVALID ? kExitUsage : kExitRuntime;
}

std::optional<uint64_t> env_seed() {
  const char* s = std::getenv("CATGP_SEED");
  if (!s || !*s) return std::nullopt;
  return std::strtoull(s, nullptr, 10);
}

bool ensure_output_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) std::fprintf(stderr, "catgp: cannot create %s: %s\n", dir.c_str(), ec.message().c_str());
  return !ec;
}

bool refuse(const std::string& path, bool force) {
  if (!force && std::filesystem::exists(path)) {
    std::fprintf(stderr, "catgp: %s exists; use --force to overwrite\n", path.c_str());
    return true;
  }
  return false;
}

struct DatasetHandle {
  catgp_dataset* ptr = nullptr;
  ~DatasetHandle() { catgp_dataset_free(ptr); }
};

struct ModelHandle {
  catgp_model* ptr = nullptr;
  ~ModelHandle() { catgp_model_free(ptr); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian process regression with categorical kernels"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(catgp_version()));

  // generate ------------------------------------------------------------
  auto* generate = app.add_subcommand("generate", "Write train/test CSVs for an analytic dataset");
  std::string g_dataset;
  int g_spl = 3;
  int g_replicate = 0;
  std::optional<uint64_t> g_seed;
  std::string g_out = ".";
  bool g_force = false;
  generate->add_option("--dataset", g_dataset, "Dataset name (f1, f2, beam_bending, borehole, borehole2, otl, otl2, piston, piston2, goldstein)")->required();
  generate->add_option("--samples-per-level", g_spl, "Training points per level tuple")
      ->default_val(3);
  generate->add_option("--replicate", g_replicate, "Replicate index k (trains with base seed + k)")
      ->default_val(0);
  generate->add_option("--seed", g_seed, "Absolute training seed (overrides base seed + replicate)");
  generate->add_option("--output-dir", g_out, "Output directory")->default_val(".");
  generate->add_flag("--force", g_force, "Overwrite existing files");

  // fit ------------------------------------------------------------------
  auto* fit = app.add_subcommand("fit", "Train a GP on a dataset CSV and report test RRMSE");
  std::string f_kernel, f_train, f_test, f_groups, f_model_out;
  std::string f_mode = "long";
  int f_restarts = 96;
  uint64_t f_seed = 0;
  bool f_force = false;
  fit->add_option("--kernel", f_kernel, "Method name, e.g. He, LVGP, Nested_He_He_MSD")->required();
  fit->add_option("--train", f_train, "Training CSV (x1..xn,z1..zm,y)")->required();
  fit->add_option("--test", f_test, "Test CSV; prints RRMSE when given");
  fit->add_option("--groups", f_groups, "JSON level partition(s) for plain Nested_* kernels");
  fit->add_option("--opt-mode", f_mode, "Optimizer setting: short or long")->default_val("long");
  fit->add_option("--restarts", f_restarts, "Multi-start restart count")->default_val(96);
  fit->add_option("--seed", f_seed, "Fit seed")->default_val(0);
  fit->add_option("--model-out", f_model_out, "Write the fitted model to this JSON file");
  fit->add_flag("--force", f_force, "Overwrite an existing model file");

  // predict ----------------------------------------------------------------
  auto* predict = app.add_subcommand("predict", "Predict with a saved model");
  std::string p_model, p_test, p_out;
  bool p_force = false;
  predict->add_option("--model", p_model, "Model JSON written by fit")->required();
  predict->add_option("--test", p_test, "Input CSV")->required();
  predict->add_option("--output", p_out, "Predictions CSV (mean,variance)")->required();
  predict->add_flag("--force", p_force, "Overwrite an existing output file");

  // bench -------------------------------------------------------------------
  auto* bench = app.add_subcommand("bench", "Run a benchmark suite from a config file");
  std::string b_config, b_out = "bench_out";
  int b_jobs = 0;
  bench->add_option("--config", b_config, "INI-style suite config (docs/config.md)")->required();
  bench->add_option("--output-dir", b_out, "Output directory")->default_val("bench_out");
  bench->add_option("--jobs", b_jobs, "Worker threads (overrides [suite] jobs)")->default_val(0);

  // profile -------------------------------------------------------------------
  auto* profile = app.add_subcommand("profile", "Emit performance profiles and Pareto data");
  std::string r_records, r_out = ".";
  profile->add_option("--records", r_records, "records.csv produced by bench")->required();
  profile->add_option("--output-dir", r_out, "Output directory")->default_val(".");

  // cluster ---------------------------------------------------------------------
  auto* cluster = app.add_subcommand("cluster", "Infer level groups of a categorical variable");
  std::string c_train, c_embedding = "msd", c_out = ".";
  std::size_t c_index = 0;
  uint64_t c_seed = 0;
  bool c_force = false;
  cluster->add_option("--train", c_train, "Dataset CSV")->required();
  cluster->add_option("--embedding", c_embedding, "msd or lvgp")->default_val("msd");
  cluster->add_option("--cat-index", c_index, "Categorical variable index (0-based)")
      ->default_val(0);
  cluster->add_option("--seed", c_seed, "Seed for the lvgp embedding")->default_val(0);
  cluster->add_option("--output-dir", c_out, "Output directory")->default_val(".");
  cluster->add_flag("--force", c_force, "Overwrite existing outputs");

  CLI11_PARSE(app, argc, argv);

  if (generate->parsed()) {
    uint64_t seed;
    if (g_seed) {
      seed = *g_seed;
    } else {
      uint64_t base;
      if (const auto env = env_seed()) {
        base = *env;
      } else if (catgp_base_seed(g_dataset.c_str(), &base) != CATGP_OK) {
        std::fprintf(stderr, "catgp: %s\n", catgp_last_error());
        return kExitUsage;
      }
      seed = base + static_cast<uint64_t>(g_replicate);
    }
    if (!ensure_output_dir(g_out)) return kExitRuntime;
    const std::string train_path = g_out + "/" + g_dataset + "_train.csv";
    const std::string test_path = g_out + "/" + g_dataset + "_test.csv";
    if (refuse(train_path, g_force) || refuse(test_path, g_force)) return kExitUsage;
    const int code = report(catgp_generate(g_dataset.c_str(), g_spl, seed, train_path.c_str(),
                                           test_path.c_str(), g_force ? 1 : 0));
    if (code == kExitOk)
      std::printf("wrote %s and %s\n", train_path.c_str(), test_path.c_str());
    return code;
  }

  if (fit->parsed()) {
    DatasetHandle train;
    if (const int code = report(catgp_dataset_load_csv(f_train.c_str(), &train.ptr))) return code;
    if (const auto env = env_seed(); env && f_seed == 0) f_seed = *env;
    ModelHandle model;
    if (const int code = report(catgp_fit(train.ptr, f_kernel.c_str(),
                                          f_groups.empty() ? nullptr : f_groups.c_str(),
                                          f_mode.c_str(), f_restarts, f_seed, &model.ptr)))
      return code;
    int n_params = 0;
    double seconds = 0.0;
    catgp_model_param_count(model.ptr, &n_params);
    catgp_model_fit_seconds(model.ptr, &seconds);
    std::printf("fitted %s: %d parameters, %.3f s (CPU)\n", f_kernel.c_str(), n_params, seconds);
    if (!f_test.empty()) {
      DatasetHandle test;
      if (const int code = report(catgp_dataset_load_csv(f_test.c_str(), &test.ptr))) return code;
      double score = 0.0;
      if (const int code = report(catgp_score_rrmse(model.ptr, test.ptr, &score))) return code;
      std::printf("rrmse %.17g\n", score);
    }
    if (!f_model_out.empty()) {
      if (refuse(f_model_out, f_force)) return kExitUsage;
      if (const int code = report(catgp_model_save(model.ptr, f_model_out.c_str(), f_force ? 1 : 0)))
        return code;
      std::printf("model written to %s\n", f_model_out.c_str());
    }
    return kExitOk;
  }

  if (predict->parsed()) {
    if (refuse(p_out, p_force)) return kExitUsage;
    ModelHandle model;
    if (const int code = report(catgp_model_load(p_model.c_str(), &model.ptr))) return code;
    DatasetHandle test;
    if (const int code = report(catgp_dataset_load_csv(p_test.c_str(), &test.ptr))) return code;
    size_t rows = 0;
    catgp_dataset_rows(test.ptr, &rows);
    std::vector<double> mean(rows), variance(rows);
    if (const int code = report(catgp_predict(model.ptr, test.ptr, mean.data(), variance.data())))
      return code;
    std::ofstream out(p_out);
    if (!out) {
      std::fprintf(stderr, "catgp: cannot open %s\n", p_out.c_str());
      return kExitRuntime;
    }
    out << "mean,variance\n";
    char buf[64];
    for (size_t i = 0; i < rows; ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", mean[i], variance[i]);
      out << buf;
    }
    std::printf("wrote %s\n", p_out.c_str());
    return kExitOk;
  }

  if (bench->parsed()) {
    if (!ensure_output_dir(b_out)) return kExitRuntime;
    const auto env = env_seed();
    uint64_t seed_value = env.value_or(0);
    return report(catgp_bench_run(b_config.c_str(), b_out.c_str(), b_jobs,
                                  env ? &seed_value : nullptr));
  }

  if (profile->parsed()) {
    if (!ensure_output_dir(r_out)) return kExitRuntime;
    return report(catgp_profiles_emit(r_records.c_str(), r_out.c_str()));
  }

  if (cluster->parsed()) {
    if (!ensure_output_dir(c_out)) return kExitRuntime;
    const std::string part_path = c_out + "/partition.json";
    const std::string sil_path = c_out + "/silhouette.csv";
    if (refuse(part_path, c_force) || refuse(sil_path, c_force)) return kExitUsage;
    DatasetHandle train;
    if (const int code = report(catgp_dataset_load_csv(c_train.c_str(), &train.ptr))) return code;
    char* partition = nullptr;
    char* silhouette = nullptr;
    const int code = report(catgp_cluster(train.ptr, c_embedding.c_str(), c_index, c_seed,
                                          &partition, &silhouette));
    if (code != kExitOk) return code;
    std::printf("%s\n", partition);
    std::ofstream pj(part_path);
    pj << partition << '\n';
    std::ofstream sc(sil_path);
    sc << silhouette;
    catgp_string_free(partition);
    catgp_string_free(silhouette);
    std::printf("wrote %s and %s\n", part_path.c_str(), sil_path.c_str());
    return kExitOk;
  }

  return kExitUsage;
}
