#include "catgp.h"

#include <cstring>
#include <filesystem>
#include <memory>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "bench.hpp"
#include "datasets.hpp"
#include "gp.hpp"
#include "grouping.hpp"
#include "kernels.hpp"
#include "types.hpp"

using namespace catgp;

struct catgp_dataset_s {
  MixedDataset data;
};

struct catgp_model_s {
  gp::TrainedGp model;
};

namespace {

thread_local std::string g_last_error;

template <class Fn>
catgp_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return CATGP_OK;
  } catch (const std::invalid_argument& e) {
    g_last_error = e.what();
    return CATGP_ERR_INVALID;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CATGP_ERR_RUNTIME;
  }
}

void require_arg(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

void refuse_overwrite(const std::string& path, int force) {
  if (!force && std::filesystem::exists(path))
    throw std::invalid_argument(path + " exists; pass force to overwrite");
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* catgp_version(void) { return "0.1.0"; }

const char* catgp_last_error(void) { return g_last_error.c_str(); }

catgp_status catgp_generate(const char* dataset, int samples_per_level, uint64_t train_seed,
                            const char* train_csv_path, const char* test_csv_path, int force) {
  return guarded([&] {
    require_arg(dataset && train_csv_path && test_csv_path, "null argument");
    refuse_overwrite(train_csv_path, force);
    refuse_overwrite(test_csv_path, force);
    datasets::DatasetSpec spec;
    spec.problem = datasets::problem_from_name(dataset);
    spec.samples_per_level = samples_per_level;
    spec.seed = train_seed;
    const auto [train, test] = datasets::generate_replicate(spec);
    datasets::write_csv(train, train_csv_path);
    datasets::write_csv(test, test_csv_path);
  });
}

catgp_status catgp_base_seed(const char* dataset, uint64_t* out) {
  return guarded([&] {
    require_arg(dataset && out, "null argument");
    *out = datasets::base_seed(datasets::problem_from_name(dataset));
  });
}

catgp_status catgp_dataset_load_csv(const char* path, catgp_dataset** out) {
  return guarded([&] {
    require_arg(path && out, "null argument");
    auto handle = std::make_unique<catgp_dataset_s>();
    handle->data = datasets::read_csv(path);
    *out = handle.release();
  });
}

catgp_status catgp_dataset_rows(const catgp_dataset* d, size_t* out) {
  return guarded([&] {
    require_arg(d && out, "null argument");
    *out = static_cast<size_t>(d->data.rows());
  });
}

catgp_status catgp_dataset_cont_dims(const catgp_dataset* d, size_t* out) {
  return guarded([&] {
    require_arg(d && out, "null argument");
    *out = static_cast<size_t>(d->data.cont_dims());
  });
}

catgp_status catgp_dataset_cat_dims(const catgp_dataset* d, size_t* out) {
  return guarded([&] {
    require_arg(d && out, "null argument");
    *out = static_cast<size_t>(d->data.cat_dims());
  });
}

catgp_status catgp_dataset_level_count(const catgp_dataset* d, size_t cat_index, int* out) {
  return guarded([&] {
    require_arg(d && out, "null argument");
    require_arg(cat_index < d->data.level_counts.size(), "cat_index out of range");
    *out = d->data.level_counts[cat_index];
  });
}

void catgp_dataset_free(catgp_dataset* d) { delete d; }

catgp_status catgp_fit(const catgp_dataset* train, const char* method, const char* groups_json,
                       const char* opt_mode, int n_restarts, uint64_t seed, catgp_model** out) {
  return guarded([&] {
    require_arg(train && method && opt_mode && out, "null argument");
    const bench::MethodSpec spec = bench::parse_method(method);
    const MixedDataset& data = train->data;

    std::vector<GroupPartition> partitions;
    if (spec.nested) {
      if (spec.groups == bench::MethodSpec::Groups::True) {
        require_arg(groups_json != nullptr,
                    "plain Nested_* methods need groups_json with one partition per variable");
        const nlohmann::json j = nlohmann::json::parse(groups_json);
        require_arg(j.is_array() && !j.empty(), "groups_json must be a JSON array");
        // Either one partition per variable, or a single flat partition for
        // single-variable data: [[1,2],[3,4]] vs [[[1,2],[3,4]], ...].
        const bool flat = j[0].is_array() && !j[0].empty() && j[0][0].is_number();
        if (flat) {
          partitions.push_back(GroupPartition::parse_json(j.dump()));
        } else {
          for (const auto& item : j)
            partitions.push_back(GroupPartition::parse_json(item.dump()));
        }
        require_arg(static_cast<int>(partitions.size()) == data.cat_dims(),
                    "groups_json must carry one partition per categorical variable");
      } else if (spec.groups == bench::MethodSpec::Groups::MSD) {
        for (int v = 0; v < data.cat_dims(); ++v)
          partitions.push_back(grouping::groups_from_msd(data.Z.col(v), data.y,
                                                         data.level_counts[static_cast<std::size_t>(v)])
                                   .partition);
      } else {
        const bench::MethodSpec proxy = bench::parse_method("LVGP");
        const gp::GpConfig proxy_config = bench::build_config(proxy, data.level_counts);
        gp::FitOptions proxy_options;
        proxy_options.mode = optimize::mode_from_name(opt_mode);
        proxy_options.n_restarts = n_restarts > 0 ? n_restarts : 96;
        const gp::TrainedGp proxy_model =
            gp::fit(data, proxy_config, proxy_options, mix_seed(seed, 0x4C56ULL));
        for (int v = 0; v < data.cat_dims(); ++v) {
          const auto [offset, count] = proxy_model.layout().cat[static_cast<std::size_t>(v)];
          const MatrixXd latents =
              kernels::lvgp_embed(proxy_model.params().segment(offset, count),
                                  data.level_counts[static_cast<std::size_t>(v)], 2);
          partitions.push_back(grouping::groups_from_latent(latents).partition);
        }
      }
    }

    const gp::GpConfig config = bench::build_config(spec, data.level_counts, partitions);
    gp::FitOptions options;
    options.mode = optimize::mode_from_name(opt_mode);
    options.n_restarts = n_restarts > 0 ? n_restarts : 96;
    auto handle = std::make_unique<catgp_model_s>();
    handle->model = gp::fit(data, config, options, seed);
    *out = handle.release();
  });
}

catgp_status catgp_model_save(const catgp_model* m, const char* path, int force) {
  return guarded([&] {
    require_arg(m && path, "null argument");
    refuse_overwrite(path, force);
    m->model.save(path);
  });
}

catgp_status catgp_model_load(const char* path, catgp_model** out) {
  return guarded([&] {
    require_arg(path && out, "null argument");
    auto handle = std::make_unique<catgp_model_s>();
    handle->model = gp::TrainedGp::load(path);
    *out = handle.release();
  });
}

catgp_status catgp_model_param_count(const catgp_model* m, int* out) {
  return guarded([&] {
    require_arg(m && out, "null argument");
    *out = m->model.param_dim();
  });
}

catgp_status catgp_model_fit_seconds(const catgp_model* m, double* out) {
  return guarded([&] {
    require_arg(m && out, "null argument");
    *out = m->model.info().cpu_seconds;
  });
}

catgp_status catgp_predict(const catgp_model* m, const catgp_dataset* test, double* mean,
                           double* variance) {
  return guarded([&] {
    require_arg(m && test && mean, "null argument");
    const gp::PosteriorPrediction p = m->model.predict(test->data, false);
    for (Eigen::Index i = 0; i < p.mean.size(); ++i) mean[i] = p.mean[i];
    if (variance)
      for (Eigen::Index i = 0; i < p.variance.size(); ++i) variance[i] = p.variance[i];
  });
}

catgp_status catgp_score_rrmse(const catgp_model* m, const catgp_dataset* test, double* out) {
  return guarded([&] {
    require_arg(m && test && out, "null argument");
    *out = m->model.rrmse_on(test->data);
  });
}

void catgp_model_free(catgp_model* m) { delete m; }

catgp_status catgp_cluster(const catgp_dataset* train, const char* embedding, size_t cat_index,
                           uint64_t seed, char** partition_json, char** silhouette_csv) {
  return guarded([&] {
    require_arg(train && embedding && partition_json, "null argument");
    const MixedDataset& data = train->data;
    require_arg(cat_index < data.level_counts.size(), "cat_index out of range");
    const int v = static_cast<int>(cat_index);
    const int C = data.level_counts[cat_index];

    grouping::GroupSelection selection;
    const std::string kind(embedding);
    if (kind == "msd") {
      selection = grouping::groups_from_msd(data.Z.col(v), data.y, C);
    } else if (kind == "lvgp") {
      const bench::MethodSpec proxy = bench::parse_method("LVGP");
      const gp::GpConfig config = bench::build_config(proxy, data.level_counts);
      gp::FitOptions options;
      const gp::TrainedGp model = gp::fit(data, config, options, seed);
      const auto [offset, count] = model.layout().cat[cat_index];
      const MatrixXd latents = kernels::lvgp_embed(model.params().segment(offset, count), C, 2);
      selection = grouping::groups_from_latent(latents);
    } else {
      throw std::invalid_argument("embedding must be 'msd' or 'lvgp'");
    }

    *partition_json = copy_string(selection.partition.to_json());
    if (silhouette_csv) {
      std::ostringstream csv;
      csv << "q,score\n";
      char buf[32];
      for (const auto& [q, score] : selection.scores) {
        std::snprintf(buf, sizeof(buf), "%.17g", score);
        csv << q << ',' << buf << '\n';
      }
      *silhouette_csv = copy_string(csv.str());
    }
  });
}

void catgp_string_free(char* s) { delete[] s; }

catgp_status catgp_bench_run(const char* config_path, const char* out_dir, int jobs,
                             const uint64_t* seed_override) {
  return guarded([&] {
    require_arg(config_path && out_dir, "null argument");
    bench::SuiteConfig config = bench::parse_config_file(config_path);
    if (jobs > 0) config.jobs = jobs;
    if (seed_override) config.base_seed_override = *seed_override;
    bench::run_suite(config, out_dir);
  });
}

catgp_status catgp_profiles_emit(const char* records_csv, const char* out_dir) {
  return guarded([&] {
    require_arg(records_csv && out_dir, "null argument");
    const auto records = bench::read_records(records_csv);
    require_arg(!records.empty(), "records CSV has no rows");
    bench::emit_aggregates(records, out_dir);
  });
}

}  // extern "C"
